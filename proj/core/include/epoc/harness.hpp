#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "epoc/artifacts.hpp"
#include "epoc/channel_layout.hpp"
#include "epoc/classify.hpp"
#include "epoc/frame_codec.hpp"
#include "epoc/recording.hpp"
#include "epoc/spectral.hpp"
#include "epoc/synthesizer.hpp"

namespace epoc {

inline constexpr std::string_view kDefaultMaskKeyHex = "45504f432d454d552d4b45592d303031";

/// Everything an experiment run needs. Loaded from an INI file with
/// [experiment], [profile], [linear] and [mlp] sections.
struct ExperimentConfig {
  SubjectProfile profile;
  std::size_t periods_per_condition{100};
  double period_len_s{1.0};
  std::uint64_t seed{7};
  std::filesystem::path output_dir{"out"};
  double lsb_uv{kDefaultLsbMicrovolts};
  MaskKey mask_key = parse_mask_key(std::string(kDefaultMaskKeyHex));

  // 50 Hz control tone added to synthetic data before encoding.
  double mains_hz{50.0};
  double mains_uv{0.7};

  double highpass_hz{1.0};
  double lowpass_hz{45.0};
  double notch_hz{0.0};  // 0 disables the notch
  double notch_q{10.0};

  std::size_t grid_n{32};
  std::size_t folds{5};
  double drop_rate{0.0};
  bool classify{true};
  LinearHyperparams linear;
  MlpHyperparams mlp;

  std::optional<std::filesystem::path> elp_path;
  /// Optional `.efr` inputs per condition, replacing synthesis.
  std::map<Condition, std::filesystem::path> captures;

  double condition_duration_s() const {
    return static_cast<double>(periods_per_condition) * period_len_s;
  }
  /// Every violated constraint.
  std::vector<std::string> problems() const;
  /// Throws ConfigError listing all problems.
  void validate() const;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

ExperimentConfig parse_config(std::string_view ini_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Per-condition analysis results.
struct ConditionReport {
  Condition condition{Condition::EyesOpen};
  std::array<double, kNumChannels> alpha_power{};  // 8-12 Hz, uV^2
  std::optional<AlphaPeak> o2_peak;
  double o2_prominence{0.0};
  std::vector<ArtifactEvent> events;
  DropReport drops;
  std::size_t decode_warnings{0};
  TopoMap alpha_map;
  LabeledFeatureSet features;
};

struct ClassifierScore {
  std::string name;
  Evaluation evaluation;
};

struct ExperimentReport {
  std::string name;
  std::vector<ConditionReport> conditions;
  std::vector<ClassifierScore> classifiers;
  std::size_t folds{0};  // cross-validation folds actually used
  std::optional<double> distractor_ratio;  // O2 alpha power distractor / quiet
  double mlp_final_loss{0.0};
  std::vector<std::filesystem::path> files;

  const ConditionReport& condition(Condition c) const;
};

/// Synthesizes (or loads) one condition, round-trips it through
/// encode -> mask -> capture file -> unmask -> decode -> assemble, then
/// preprocesses and analyzes it. Files are written to config.output_dir.
ConditionReport analyze_condition(const ExperimentConfig& config, Condition condition,
                                  std::vector<std::filesystem::path>* files = nullptr);

/// Decoded and repaired recording from masked raw frames.
AssembledStream decode_capture(std::span<const RawFrame> frames, const MaskKey& key,
                               double lsb_uv, std::size_t* warnings = nullptr);

/// Quantized, masked raw frames for a recording (the synthetic "wire").
std::vector<RawFrame> encode_recording(const EegRecording& rec, const MaskKey& key, double lsb_uv);

/// Baseline removal then the configured band-pass and optional notch.
EegRecording preprocess_for_analysis(const EegRecording& rec, const ExperimentConfig& config);

/// Eyes open vs eyes closed.
ExperimentReport run_experiment_one(const ExperimentConfig& config);
/// Eyes open vs eyes closed with distractor, plus the quiet eyes-closed reference.
ExperimentReport run_experiment_two(const ExperimentConfig& config);

/// `sensor.dat`: one `gyro_x<TAB>gyro_y` line per frame.
void export_sensor_log(std::span<const GyroSample> trace, const std::filesystem::path& path);
void export_sensor_log(const EegRecording& rec, const std::filesystem::path& path);
std::vector<GyroSample> import_sensor_log(const std::filesystem::path& path);

/// `t_s,AF3,...,AF4` rows.
std::string recording_csv(const EegRecording& rec);

/// Creates the directory (and parents); IoError naming the path on failure.
void ensure_directory(const std::filesystem::path& dir);

}  // namespace epoc
