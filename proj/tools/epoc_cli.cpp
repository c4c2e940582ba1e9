// epoc: synthesize, decode, analyze and classify headset recordings.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "epoc/errors.hpp"
#include "epoc/features.hpp"
#include "epoc/harness.hpp"

namespace {

using namespace epoc;

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "; ";
      continue;
    }
    out += c;
  }
  return out;
}

int fail(std::string_view kind, std::string_view message) {
  std::cerr << "error: kind=" << kind << " message=\"" << escape(message) << "\"\n";
  return 1;
}

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("-c,--config", opts.config, "INI configuration file")->check(CLI::ExistingFile);
  cmd->add_option("-s,--seed", opts.seed, "Override the configured seed");
  cmd->add_option("-o,--out", opts.out, "Output directory");
}

ExperimentConfig resolve(const CommonOptions& opts) {
  ExperimentConfig cfg = opts.config.empty() ? ExperimentConfig{} : load_config(opts.config);
  if (opts.seed) cfg.seed = *opts.seed;
  if (!opts.out.empty()) cfg.output_dir = opts.out;
  cfg.validate();
  return cfg;
}

// kind:t0[:channel]
ArtifactSpec parse_artifact(const std::string& text, const SubjectProfile& profile,
                            std::uint64_t seed) {
  const auto first = text.find(':');
  if (first == std::string::npos) throw std::invalid_argument("artifact must be kind:t0[:channel]");
  const auto second = text.find(':', first + 1);
  ArtifactSpec spec;
  spec.kind = artifact_kind_from_string(text.substr(0, first));
  spec.t0 = std::stod(text.substr(first + 1, second - first - 1));
  if (second != std::string::npos) spec.channels.push_back(channel_index(text.substr(second + 1)));
  else if (spec.kind == ArtifactKind::Disconnection) spec.channels.push_back(channel_index("O1"));
  spec.amplitude_uv = default_artifact_amplitude(spec.kind, profile);
  spec.seed = seed;
  return spec;
}

void print_experiment(const ExperimentReport& report, const ExperimentConfig& cfg) {
  std::cout << report.name << "\n";
  const std::size_t o2 = channel_index("O2");
  for (const auto& c : report.conditions)
    std::cout << "  " << to_string(c.condition) << ": O2 alpha " << format_number(c.alpha_power[o2])
              << " uV^2, events " << c.events.size() << "\n";
  if (report.distractor_ratio)
    std::cout << "  distractor/quiet ratio " << format_number(*report.distractor_ratio) << "\n";
  for (const auto& s : report.classifiers)
    std::cout << "  " << s.name << " accuracy " << format_number(s.evaluation.accuracy) << "\n";
  std::cout << "outputs in " << cfg.output_dir.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Headset EEG capture, analysis and classification pipeline", "epoc"};
  app.require_subcommand(1);

  CommonOptions synth_opts, decode_opts, analyze_opts, exp1_opts, exp2_opts, classify_opts;

  auto* synth = app.add_subcommand("synth", "Synthesize a recording and write it as a masked capture");
  add_common(synth, synth_opts);
  std::string synth_condition = "eyes_closed";
  std::optional<double> synth_duration;
  std::vector<std::string> synth_artifacts;
  synth->add_option("--condition", synth_condition, "eyes_open, eyes_closed or eyes_closed_distractor");
  synth->add_option("--duration", synth_duration, "Seconds (default: periods * period length)");
  synth->add_option("--artifact", synth_artifacts, "kind:t0[:channel], repeatable");

  auto* decode = app.add_subcommand("decode", "Unmask and decode a capture file to CSV");
  add_common(decode, decode_opts);
  std::string decode_capture_path, decode_key;
  std::optional<double> decode_lsb;
  decode->add_option("capture", decode_capture_path, "Capture file (.efr)")->required()->check(CLI::ExistingFile);
  decode->add_option("-k,--key", decode_key, "Mask key, 32 hex digits (default: configured key)");
  decode->add_option("--lsb", decode_lsb, "Microvolts per count (default: configured lsb_uv)");

  auto* analyze = app.add_subcommand("analyze", "Analyze one condition (synthetic or from --capture)");
  add_common(analyze, analyze_opts);
  std::string analyze_condition_name = "eyes_closed";
  std::string analyze_capture;
  analyze->add_option("--condition", analyze_condition_name, "Condition to analyze");
  analyze->add_option("--capture", analyze_capture, "Analyze this capture instead of synthesizing")
      ->check(CLI::ExistingFile);

  auto* exp1 = app.add_subcommand("exp1", "Eyes open vs eyes closed");
  add_common(exp1, exp1_opts);
  auto* exp2 = app.add_subcommand("exp2", "Eyes open vs eyes closed with distractor");
  add_common(exp2, exp2_opts);

  auto* classify = app.add_subcommand("classify", "Cross-validate classifiers on a features CSV");
  add_common(classify, classify_opts);
  std::string features_path, model_name = "all";
  std::optional<std::size_t> folds;
  classify->add_option("features", features_path, "features.csv")->required()->check(CLI::ExistingFile);
  classify->add_option("-m,--model", model_name, "svm, logreg, mlp or all")
      ->check(CLI::IsMember({"svm", "logreg", "mlp", "all"}));
  classify->add_option("-k,--folds", folds, "Cross-validation folds (default: configured folds)")
      ->check(CLI::Range(2, 1000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail("usage", e.what());
    return 2;
  }

  try {
    if (*synth) {
      auto cfg = resolve(synth_opts);
      ensure_directory(cfg.output_dir);
      const Condition cond = condition_from_string(synth_condition);
      SubjectProfile profile = cfg.profile;
      profile.seed = cfg.seed;
      auto s = generate_recording(profile, cond, synth_duration.value_or(cfg.condition_duration_s()));
      std::uint64_t k = 0;
      for (const auto& a : synth_artifacts)
        inject_artifact(s.recording, s.truth, parse_artifact(a, profile, cfg.seed * 31 + ++k));
      if (cfg.mains_uv > 0.0) s.recording = inject_mains(std::move(s.recording), cfg.mains_hz, cfg.mains_uv);
      const std::string tag(to_string(cond));
      const auto capture = cfg.output_dir / (tag + ".efr");
      write_capture(capture, encode_recording(s.recording, cfg.mask_key, cfg.lsb_uv));
      export_sensor_log(s.recording, cfg.output_dir / (tag + "_sensor.dat"));
      write_text_file(cfg.output_dir / (tag + "_truth.csv"), events_csv(s.truth.artifact_events));
      std::cout << "wrote " << capture.string() << " (" << s.recording.num_samples() << " frames)\n";
    } else if (*decode) {
      const auto cfg = resolve(decode_opts);
      ensure_directory(cfg.output_dir);
      const MaskKey key = decode_key.empty() ? cfg.mask_key : parse_mask_key(decode_key);
      std::size_t warnings = 0;
      const auto frames = read_capture(decode_capture_path);
      auto stream = decode_capture(frames, key, decode_lsb.value_or(cfg.lsb_uv), &warnings);
      const std::filesystem::path& out = cfg.output_dir;
      write_text_file(out / "recording.csv", recording_csv(stream.recording));
      export_sensor_log(stream.recording, out / "sensor.dat");
      const auto& r = stream.report;
      std::cout << "frames expected " << r.expected_frames << ", received " << r.received_frames
                << ", repaired " << r.repaired << " in " << r.gaps.size() << " gaps, "
                << warnings << " frames with warnings";
      if (stream.battery_pct) std::cout << ", battery " << *stream.battery_pct << "%";
      std::cout << "\n";
    } else if (*analyze) {
      auto cfg = resolve(analyze_opts);
      const Condition cond = condition_from_string(analyze_condition_name);
      if (!analyze_capture.empty()) cfg.captures[cond] = analyze_capture;
      const auto report = analyze_condition(cfg, cond);
      const std::size_t o2 = channel_index("O2");
      std::cout << to_string(cond) << ": O2 alpha " << format_number(report.alpha_power[o2])
                << " uV^2, O2 peak "
                << (report.o2_peak ? format_number(report.o2_peak->freq) + " Hz" : std::string("none"))
                << ", " << report.events.size() << " artifact events, " << report.features.size()
                << " windows\n";
    } else if (*exp1) {
      const auto cfg = resolve(exp1_opts);
      print_experiment(run_experiment_one(cfg), cfg);
    } else if (*exp2) {
      const auto cfg = resolve(exp2_opts);
      print_experiment(run_experiment_two(cfg), cfg);
    } else if (*classify) {
      std::ifstream in(features_path);
      if (!in) throw IoError(features_path, "cannot open features");
      std::stringstream buf;
      buf << in.rdbuf();
      const auto cfg = resolve(classify_opts);
      const auto data = parse_features_csv(buf.str());
      const KFold split{folds.value_or(cfg.folds)};
      std::string csv = "classifier,accuracy\n";
      auto report = [&](const std::string& name, const Trainer& trainer) {
        const auto e = evaluate(trainer, data, split, cfg.seed);
        std::cout << name << " accuracy " << format_number(e.accuracy) << "\n";
        csv += name + "," + format_number(e.accuracy) + "\n";
      };
      if (model_name == "svm" || model_name == "all")
        report("svm", linear_trainer(LinearKind::Svm, cfg.linear));
      if (model_name == "logreg" || model_name == "all")
        report("logreg", linear_trainer(LinearKind::LogReg, cfg.linear));
      if (model_name == "mlp" || model_name == "all") {
        MlpHyperparams hp = cfg.mlp;
        hp.seed = cfg.seed;
        report("mlp", mlp_trainer(hp));
      }
      if (!classify_opts.out.empty()) {
        ensure_directory(cfg.output_dir);
        write_text_file(cfg.output_dir / "accuracy.csv", csv);
      }
    }
  } catch (const ConfigError& e) {
    std::string joined;
    for (const auto& p : e.problems()) joined += (joined.empty() ? "" : "; ") + p;
    return fail("config", joined);
  } catch (const IoError& e) {
    return fail("io", e.what());
  } catch (const ParseError& e) {
    return fail("parse", e.what());
  } catch (const std::invalid_argument& e) {
    return fail("invalid", e.what());
  } catch (const std::out_of_range& e) {
    return fail("invalid", e.what());
  } catch (const std::exception& e) {
    return fail("runtime", e.what());
  }
  return 0;
}
