#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "epoc/recording.hpp"

namespace epoc {

enum class Condition { EyesOpen, EyesClosed, EyesClosedDistractor };

std::string_view to_string(Condition condition);
Condition condition_from_string(std::string_view text);

/// Parameters of one synthetic subject. Amplitudes in uV, frequencies in Hz.
struct SubjectProfile {
  double alpha_freq{10.0};
  double alpha_amp_closed{20.0};
  double alpha_amp_open{4.0};
  double alpha_bw_jitter{1.0};  // std-dev of the per-sample frequency jitter
  double occipital_gain{1.0};   // O1, O2, P7, P8
  double frontal_gain{0.4};     // every other channel
  double noise_rms{8.0};
  double drift_amp{200.0};
  double drift_freq{0.3};
  // Eyes-closed-with-distractor: alpha amplitude and jitter multipliers.
  double distractor_amp_factor{0.6};
  double distractor_jitter_factor{2.0};
  std::uint64_t seed{0};

  /// Every violated constraint, empty when valid.
  std::vector<std::string> problems() const;
  void validate() const;

  double alpha_amplitude(Condition condition) const;
  double alpha_jitter(Condition condition) const;
};

struct GroundTruth {
  Condition condition{Condition::EyesOpen};
  std::vector<ArtifactEvent> artifact_events;  // ordered by t_start
  std::array<double, kNumChannels> alpha_amp_used{};
};

struct SyntheticRecording {
  EegRecording recording;
  GroundTruth truth;
};

bool is_occipital(std::size_t channel);
double spatial_gain(const SubjectProfile& profile, std::size_t channel);

/// Pink noise + common drift + alpha rhythm with per-sample frequency jitter.
/// Bit-identical for identical (profile, condition, duration, rate).
SyntheticRecording generate_recording(const SubjectProfile& profile, Condition condition,
                                      double duration_s, double rate = kSampleRateHz);

/// White Gaussian noise shaped to a 1/f power spectrum (flat below 0.5 Hz),
/// normalized to the requested RMS.
std::vector<double> pink_noise(std::size_t samples, double rate, double rms, std::uint64_t seed);

/// Adds amplitude * sin(2 pi freq t) to every channel, phase 0 at t = 0.
EegRecording inject_mains(EegRecording rec, double freq_hz, double amplitude_uv);

inline constexpr double kOcularDuration = 0.8;
inline constexpr double kMuscleDuration = 0.5;
inline constexpr double kMuscleNoiseFactor = 5.0;
inline constexpr double kDisconnectionDriftFactor = 10.0;

/// `amplitude_uv` is the ocular half-sine peak, the muscle burst RMS or the
/// disconnection level jump. An empty channel scope means every channel for
/// ocular and muscle artifacts; disconnections need exactly one channel.
struct ArtifactSpec {
  ArtifactKind kind{ArtifactKind::Ocular};
  double t0{0.0};
  std::vector<std::size_t> channels;
  double amplitude_uv{50.0};
  std::uint64_t seed{0};
};

double artifact_duration(ArtifactKind kind, double recording_duration_s, double t0);

/// Muscle: max(5 x background RMS, floor). Disconnection: max(10 x drift, floor).
/// Ocular: 50 uV.
double default_artifact_amplitude(ArtifactKind kind, const SubjectProfile& profile,
                                  double floor_uv = 10.0);

/// Adds the artifact to `rec`, records the event in `truth` (kept ordered by
/// t_start) and in the recording annotations, and returns it.
ArtifactEvent inject_artifact(EegRecording& rec, GroundTruth& truth, const ArtifactSpec& spec);

}  // namespace epoc
