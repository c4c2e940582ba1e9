#include "epoc/harness.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "epoc/errors.hpp"
#include "epoc/features.hpp"
#include "epoc/preprocess.hpp"

namespace epoc {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error([&] {
        std::string msg = "invalid configuration:";
        for (const auto& p : problems) msg += "\n  - " + p;
        return msg;
      }()),
      problems_(std::move(problems)) {}

std::vector<std::string> ExperimentConfig::problems() const {
  std::vector<std::string> out = profile.problems();
  const double nyquist = kSampleRateHz / 2.0;
  if (periods_per_condition < 2) out.push_back("periods_per_condition must be >= 2");
  if (!(period_len_s > 0.0)) out.push_back("period_len_s must be positive");
  if (!(lsb_uv > 0.0)) out.push_back("lsb_uv must be positive");
  if (mains_uv < 0.0) out.push_back("mains_uv must be >= 0");
  if (mains_uv > 0.0 && !(mains_hz > 0.0 && mains_hz < nyquist))
    out.push_back("mains_hz must lie in (0, 64)");
  if (!(highpass_hz > 0.0 && highpass_hz < nyquist)) out.push_back("highpass_hz must lie in (0, 64)");
  if (!(lowpass_hz > 0.0 && lowpass_hz < nyquist)) out.push_back("lowpass_hz must lie in (0, 64)");
  if (!(highpass_hz < lowpass_hz)) out.push_back("highpass_hz must be below lowpass_hz");
  if (notch_hz != 0.0 && !(notch_hz > 0.0 && notch_hz < nyquist))
    out.push_back("notch_hz must be 0 (off) or lie in (0, 64)");
  if (!(notch_q > 0.0)) out.push_back("notch_q must be positive");
  if (grid_n < 8) out.push_back("grid_n must be >= 8");
  if (folds < 2) out.push_back("folds must be >= 2");
  if (!(drop_rate >= 0.0 && drop_rate <= 0.5)) out.push_back("drop_rate must lie in [0, 0.5]");
  if (mlp.batch_size == 0) out.push_back("mlp batch_size must be >= 1");
  if (!(mlp.learning_rate > 0.0)) out.push_back("mlp learning_rate must be positive");
  if (!(linear.l2 >= 0.0)) out.push_back("linear l2 must be >= 0");
  return out;
}

void ExperimentConfig::validate() const {
  auto p = problems();
  if (!p.empty()) throw ConfigError(std::move(p));
}

namespace {

using boost::property_tree::ptree;

template <typename T>
void read_key(const ptree& section, const std::string& name, const std::string& key, T& target,
              std::set<std::string>& used, std::vector<std::string>& problems) {
  const auto value = section.get_optional<std::string>(key);
  used.insert(key);
  if (!value) return;
  std::istringstream in(*value);
  T parsed{};
  if (!(in >> parsed) || !(in >> std::ws).eof()) {
    problems.push_back("[" + name + "] " + key + ": cannot parse '" + *value + "'");
    return;
  }
  target = parsed;
}

void read_bool(const ptree& section, const std::string& name, const std::string& key, bool& target,
               std::set<std::string>& used, std::vector<std::string>& problems) {
  const auto value = section.get_optional<std::string>(key);
  used.insert(key);
  if (!value) return;
  if (*value == "true" || *value == "1" || *value == "yes") target = true;
  else if (*value == "false" || *value == "0" || *value == "no") target = false;
  else problems.push_back("[" + name + "] " + key + ": expected true/false, got '" + *value + "'");
}

void reject_unknown(const ptree& section, const std::string& name,
                    const std::set<std::string>& used, std::vector<std::string>& problems) {
  for (const auto& [key, child] : section)
    if (!used.count(key)) problems.push_back("[" + name + "] unknown key '" + key + "'");
}

}  // namespace

ExperimentConfig parse_config(std::string_view ini_text) {
  ptree root;
  try {
    std::istringstream in{std::string(ini_text)};
    boost::property_tree::ini_parser::read_ini(in, root);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError(e.line(), e.message());
  }

  ExperimentConfig cfg;
  std::vector<std::string> problems;
  for (const auto& [name, section] : root) {
    if (section.empty() && !section.data().empty()) {
      problems.push_back("key '" + name + "' outside of a section");
      continue;
    }
    std::set<std::string> used;
    if (name == "experiment") {
      read_key(section, name, "periods_per_condition", cfg.periods_per_condition, used, problems);
      read_key(section, name, "period_len_s", cfg.period_len_s, used, problems);
      read_key(section, name, "seed", cfg.seed, used, problems);
      std::string out = cfg.output_dir.string();
      read_key(section, name, "output_dir", out, used, problems);
      cfg.output_dir = out;
      read_key(section, name, "lsb_uv", cfg.lsb_uv, used, problems);
      std::string key_hex;
      read_key(section, name, "mask_key", key_hex, used, problems);
      if (!key_hex.empty()) {
        try {
          cfg.mask_key = parse_mask_key(key_hex);
        } catch (const std::exception& e) {
          problems.push_back("[experiment] mask_key: " + std::string(e.what()));
        }
      }
      read_key(section, name, "mains_hz", cfg.mains_hz, used, problems);
      read_key(section, name, "mains_uv", cfg.mains_uv, used, problems);
      read_key(section, name, "highpass_hz", cfg.highpass_hz, used, problems);
      read_key(section, name, "lowpass_hz", cfg.lowpass_hz, used, problems);
      read_key(section, name, "notch_hz", cfg.notch_hz, used, problems);
      read_key(section, name, "notch_q", cfg.notch_q, used, problems);
      read_key(section, name, "grid_n", cfg.grid_n, used, problems);
      read_key(section, name, "folds", cfg.folds, used, problems);
      read_key(section, name, "drop_rate", cfg.drop_rate, used, problems);
      read_bool(section, name, "classify", cfg.classify, used, problems);
      std::string elp;
      read_key(section, name, "elp", elp, used, problems);
      if (!elp.empty()) cfg.elp_path = elp;
      for (auto c : {Condition::EyesOpen, Condition::EyesClosed, Condition::EyesClosedDistractor}) {
        std::string path;
        const std::string key = "capture_" + std::string(to_string(c));
        read_key(section, name, key, path, used, problems);
        if (!path.empty()) cfg.captures[c] = path;
      }
    } else if (name == "profile") {
      auto& p = cfg.profile;
      read_key(section, name, "alpha_freq", p.alpha_freq, used, problems);
      read_key(section, name, "alpha_amp_closed", p.alpha_amp_closed, used, problems);
      read_key(section, name, "alpha_amp_open", p.alpha_amp_open, used, problems);
      read_key(section, name, "alpha_bw_jitter", p.alpha_bw_jitter, used, problems);
      read_key(section, name, "occipital_gain", p.occipital_gain, used, problems);
      read_key(section, name, "frontal_gain", p.frontal_gain, used, problems);
      read_key(section, name, "noise_rms", p.noise_rms, used, problems);
      read_key(section, name, "drift_amp", p.drift_amp, used, problems);
      read_key(section, name, "drift_freq", p.drift_freq, used, problems);
      read_key(section, name, "distractor_amp_factor", p.distractor_amp_factor, used, problems);
      read_key(section, name, "distractor_jitter_factor", p.distractor_jitter_factor, used,
               problems);
    } else if (name == "linear") {
      read_key(section, name, "l2", cfg.linear.l2, used, problems);
      read_key(section, name, "iterations", cfg.linear.iterations, used, problems);
      read_key(section, name, "initial_step", cfg.linear.initial_step, used, problems);
    } else if (name == "mlp") {
      read_key(section, name, "epochs", cfg.mlp.epochs, used, problems);
      read_key(section, name, "learning_rate", cfg.mlp.learning_rate, used, problems);
      read_key(section, name, "batch_size", cfg.mlp.batch_size, used, problems);
    } else {
      problems.push_back("unknown section [" + name + "]");
      continue;
    }
    reject_unknown(section, name, used, problems);
  }
  for (auto& p : cfg.problems()) problems.push_back(std::move(p));
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open config");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

// ---------------------------------------------------------------------------
// Files

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError(dir, "cannot create output directory");
}

void export_sensor_log(std::span<const GyroSample> trace, const fs::path& path) {
  std::string text;
  for (const auto& g : trace) text += std::to_string(g.x) + "\t" + std::to_string(g.y) + "\n";
  write_text_file(path, text);
}

void export_sensor_log(const EegRecording& rec, const fs::path& path) {
  if (rec.gyro.empty() && rec.num_samples() > 0)
    throw std::invalid_argument("recording carries no gyro trace");
  export_sensor_log(rec.gyro, path);
}

std::vector<GyroSample> import_sensor_log(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open sensor log");
  std::vector<GyroSample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError(line_no, "expected gyro_x<TAB>gyro_y in " + path.string());
    try {
      out.push_back({std::stoi(line.substr(0, tab)), std::stoi(line.substr(tab + 1))});
    } catch (const std::exception&) {
      throw ParseError(line_no, "non-integer gyro value in " + path.string());
    }
  }
  return out;
}

std::string recording_csv(const EegRecording& rec) {
  std::string out = "t_s";
  for (const auto& l : rec.labels) out += "," + l;
  out += "\n";
  for (std::size_t n = 0; n < rec.num_samples(); ++n) {
    out += format_number(static_cast<double>(n) / rec.rate);
    for (const auto& ch : rec.data) out += "," + format_number(ch[n]);
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline

std::vector<RawFrame> encode_recording(const EegRecording& rec, const MaskKey& key,
                                       double lsb_uv) {
  const auto frames = frames_from_recording(rec, lsb_uv);
  std::vector<RawFrame> raw;
  raw.reserve(frames.size());
  for (const auto& f : frames) raw.push_back(mask_frame(encode_frame(f), key));
  return raw;
}

AssembledStream decode_capture(std::span<const RawFrame> frames, const MaskKey& key, double lsb_uv,
                               std::size_t* warnings) {
  std::vector<DecodedFrame> decoded;
  decoded.reserve(frames.size());
  std::size_t warned = 0;
  for (const auto& raw : frames) {
    auto result = decode_frame(unmask_frame(raw, key));
    if (!result.ok()) ++warned;
    decoded.push_back(result.frame);
  }
  if (warnings) *warnings = warned;
  return assemble_stream(decoded, lsb_uv);
}

EegRecording preprocess_for_analysis(const EegRecording& rec, const ExperimentConfig& config) {
  auto out = remove_baseline(rec);
  out = apply_filter(std::move(out), FilterSpec::band_pass(config.highpass_hz, config.lowpass_hz));
  if (config.notch_hz > 0.0)
    out = apply_filter(std::move(out), FilterSpec::notch(config.notch_hz, config.notch_q));
  return out;
}

namespace {

// Drops interior frames at random without ever exceeding the repairable gap.
std::vector<RawFrame> drop_frames(const std::vector<RawFrame>& frames, double rate,
                                  std::uint64_t seed) {
  if (rate <= 0.0 || frames.size() < 3) return frames;
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution drop(rate);
  std::vector<RawFrame> out;
  out.push_back(frames.front());
  std::size_t run = 0;
  for (std::size_t i = 1; i + 1 < frames.size(); ++i) {
    if (run < kMaxRepairableGap && drop(rng)) {
      ++run;
      continue;
    }
    run = 0;
    out.push_back(frames[i]);
  }
  out.push_back(frames.back());
  return out;
}

int label_for(Condition c) {
  return c == Condition::EyesOpen ? kEyesOpenLabel : kEyesClosedLabel;
}

std::uint64_t condition_seed(std::uint64_t seed, Condition c) {
  return seed * 1000003ull + static_cast<std::uint64_t>(c) + 1;
}

fs::path emit(const fs::path& dir, const std::string& name, const std::string& contents,
              std::vector<fs::path>* files) {
  const fs::path path = dir / name;
  write_text_file(path, contents);
  if (files) files->push_back(path);
  return path;
}

}  // namespace

ConditionReport analyze_condition(const ExperimentConfig& config, Condition condition,
                                  std::vector<fs::path>* files) {
  config.validate();
  ensure_directory(config.output_dir);
  const fs::path& dir = config.output_dir;
  const std::string tag(to_string(condition));
  const Montage montage = config.elp_path ? load_elp(config.elp_path->string()) : default_montage();

  fs::path capture;
  if (auto it = config.captures.find(condition); it != config.captures.end()) {
    capture = it->second;
  } else {
    SubjectProfile profile = config.profile;
    profile.seed = config.seed;
    auto synth = generate_recording(profile, condition, config.condition_duration_s());
    EegRecording rec = std::move(synth.recording);
    if (config.mains_uv > 0.0) rec = inject_mains(std::move(rec), config.mains_hz, config.mains_uv);
    auto raw = encode_recording(rec, config.mask_key, config.lsb_uv);
    raw = drop_frames(raw, config.drop_rate, condition_seed(config.seed, condition));
    capture = dir / (tag + ".efr");
    write_capture(capture, raw);
    if (files) files->push_back(capture);
  }

  ConditionReport report;
  report.condition = condition;
  const auto raw = read_capture(capture);
  auto stream = decode_capture(raw, config.mask_key, config.lsb_uv, &report.decode_warnings);
  report.drops = stream.report;
  export_sensor_log(stream.recording, dir / (tag + "_sensor.dat"));
  if (files) files->push_back(dir / (tag + "_sensor.dat"));

  const EegRecording centered = remove_baseline(stream.recording);
  report.events = detect_all(centered);
  emit(dir, tag + "_events.csv", events_csv(report.events), files);

  const EegRecording clean = preprocess_for_analysis(stream.recording, config);
  const std::size_t o2 = channel_index("O2");
  const std::size_t f3 = channel_index("F3");
  emit(dir, tag + "_O2_spectrum.csv", spectrum_csv(amplitude_spectrum(clean.data[o2], clean.rate)),
       files);
  emit(dir, tag + "_F3_spectrum.csv", spectrum_csv(amplitude_spectrum(clean.data[f3], clean.rate)),
       files);

  for (std::size_t c = 0; c < kNumChannels; ++c) {
    const auto psd = welch_psd(clean.data[c], clean.rate);
    report.alpha_power[c] = band_power(psd, kAlphaLowHz, kAlphaHighHz);
    if (c == o2) {
      report.o2_peak = find_alpha_peak(psd);
      report.o2_prominence = alpha_prominence(psd);
      emit(dir, tag + "_O2_psd.csv", psd_csv(psd), files);
    }
  }

  report.alpha_map = topomap(report.alpha_power, montage, config.grid_n);
  emit(dir, tag + "_alpha_topomap.pgm", topomap_pgm(report.alpha_map), files);
  emit(dir, tag + "_alpha_topomap.csv", topomap_csv(report.alpha_map), files);

  report.features = extract_features(clean, label_for(condition));
  return report;
}

const ConditionReport& ExperimentReport::condition(Condition c) const {
  for (const auto& r : conditions)
    if (r.condition == c) return r;
  throw std::out_of_range("condition not in report: " + std::string(to_string(c)));
}

namespace {

void classify_conditions(const ExperimentConfig& config, ExperimentReport& report,
                         Condition positive) {
  LabeledFeatureSet features = report.condition(Condition::EyesOpen).features;
  features.append(report.condition(positive).features);
  emit(config.output_dir, "features.csv", features_csv(features), &report.files);
  if (!config.classify) return;

  // Short runs may hold fewer windows per class than configured folds.
  const std::size_t smallest = std::min(
      std::count(features.labels.begin(), features.labels.end(), kEyesOpenLabel),
      std::count(features.labels.begin(), features.labels.end(), kEyesClosedLabel));
  const KFold split{std::min(config.folds, static_cast<std::size_t>(smallest))};
  report.folds = split.k;
  const std::uint64_t seed = config.seed;
  for (auto kind : {LinearKind::Svm, LinearKind::LogReg}) {
    report.classifiers.push_back(
        {std::string(to_string(kind)),
         evaluate(linear_trainer(kind, config.linear), features, split, seed)});
    const auto model = train_linear(features, kind, config.linear);
    emit(config.output_dir, std::string(to_string(kind)) + ".model", serialize(model),
         &report.files);
  }
  MlpHyperparams mlp = config.mlp;
  mlp.seed = seed;
  report.classifiers.push_back({"mlp", evaluate(mlp_trainer(mlp), features, split, seed)});
  report.mlp_final_loss = train_mlp(features, mlp).final_loss;
}

void write_reports(const ExperimentConfig& config, ExperimentReport& report) {
  const fs::path& dir = config.output_dir;

  std::string alpha = "condition,channel,alpha_power_uv2\n";
  std::string peaks = "condition,o2_peak_hz,o2_prominence\n";
  std::string drops = "condition,expected_frames,received_frames,repaired,gaps,decode_warnings\n";
  for (const auto& c : report.conditions) {
    const std::string tag(to_string(c.condition));
    for (std::size_t ch = 0; ch < kNumChannels; ++ch)
      alpha += tag + "," + std::string(kChannelLabels[ch]) + "," + format_number(c.alpha_power[ch]) +
               "\n";
    peaks += tag + "," + (c.o2_peak ? format_number(c.o2_peak->freq) : std::string("none")) + "," +
             format_number(c.o2_prominence) + "\n";
    drops += tag + "," + std::to_string(c.drops.expected_frames) + "," +
             std::to_string(c.drops.received_frames) + "," + std::to_string(c.drops.repaired) +
             "," + std::to_string(c.drops.gaps.size()) + "," + std::to_string(c.decode_warnings) +
             "\n";
  }
  emit(dir, "alpha_power.csv", alpha, &report.files);
  emit(dir, "alpha_peaks.csv", peaks, &report.files);
  emit(dir, "drop_report.csv", drops, &report.files);

  if (!report.classifiers.empty()) {
    std::string acc = "classifier,accuracy,true_pos,true_neg,false_pos,false_neg\n";
    for (const auto& s : report.classifiers) {
      const auto& c = s.evaluation.confusion;
      acc += s.name + "," + format_number(s.evaluation.accuracy) + "," +
             std::to_string(c.true_pos) + "," + std::to_string(c.true_neg) + "," +
             std::to_string(c.false_pos) + "," + std::to_string(c.false_neg) + "\n";
    }
    emit(dir, "accuracy.csv", acc, &report.files);
  }

  std::ostringstream summary;
  summary << report.name << "\n";
  summary << "seed " << config.seed << ", " << config.periods_per_condition
          << " periods per condition\n\n";
  const std::size_t o2 = channel_index("O2");
  const std::size_t f3 = channel_index("F3");
  for (const auto& c : report.conditions) {
    const Point2 peak = c.alpha_map.argmax();
    summary << to_string(c.condition) << ": O2 alpha " << format_number(c.alpha_power[o2])
            << " uV^2, F3 alpha " << format_number(c.alpha_power[f3]) << " uV^2, O2 peak "
            << (c.o2_peak ? format_number(c.o2_peak->freq) + " Hz" : std::string("none"))
            << ", topomap max at (" << format_number(peak.x) << ", " << format_number(peak.y)
            << "), " << c.events.size() << " artifact events, " << c.drops.repaired
            << " repaired frames\n";
  }
  if (report.distractor_ratio)
    summary << "\ndistractor/quiet O2 alpha ratio " << format_number(*report.distractor_ratio)
            << "\n";
  if (!report.classifiers.empty()) {
    summary << "\n" << report.folds << "-fold accuracy:";
    for (const auto& s : report.classifiers)
      summary << " " << s.name << " " << format_number(s.evaluation.accuracy);
    summary << "\nmlp final training loss " << format_number(report.mlp_final_loss) << "\n";
  }
  emit(dir, "summary.txt", summary.str(), &report.files);

  // The manifest is the only output carrying a timestamp.
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  std::string manifest = std::string("generated ") + stamp + "\n";
  for (const auto& f : report.files) manifest += f.filename().string() + "\n";
  write_text_file(dir / "manifest.txt", manifest);
  report.files.push_back(dir / "manifest.txt");
}

ExperimentReport run_conditions(const ExperimentConfig& config, std::string name,
                                const std::vector<Condition>& conditions, Condition positive) {
  config.validate();
  ensure_directory(config.output_dir);
  ExperimentReport report;
  report.name = std::move(name);
  for (auto c : conditions) report.conditions.push_back(analyze_condition(config, c, &report.files));
  classify_conditions(config, report, positive);
  return report;
}

}  // namespace

ExperimentReport run_experiment_one(const ExperimentConfig& config) {
  auto report = run_conditions(config, "experiment one: eyes open vs eyes closed",
                               {Condition::EyesOpen, Condition::EyesClosed}, Condition::EyesClosed);
  write_reports(config, report);
  return report;
}

ExperimentReport run_experiment_two(const ExperimentConfig& config) {
  auto report = run_conditions(
      config, "experiment two: eyes open vs eyes closed with background conversation",
      {Condition::EyesOpen, Condition::EyesClosedDistractor, Condition::EyesClosed},
      Condition::EyesClosedDistractor);
  const std::size_t o2 = channel_index("O2");
  const double quiet = report.condition(Condition::EyesClosed).alpha_power[o2];
  const double distracted = report.condition(Condition::EyesClosedDistractor).alpha_power[o2];
  report.distractor_ratio = quiet > 0.0 ? distracted / quiet : 0.0;
  write_reports(config, report);
  return report;
}

}  // namespace epoc
