#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "epoc/errors.hpp"
#include "epoc/features.hpp"
#include "epoc/harness.hpp"
#include "epoc/preprocess.hpp"
#include "test_util.hpp"

using namespace epoc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig small_config(const std::string& name) {
  ExperimentConfig cfg;
  cfg.periods_per_condition = 2;
  cfg.output_dir = testutil::scratch_dir(name) / "out";
  cfg.mlp.epochs = 3;
  return cfg;
}

}  // namespace

TEST_CASE("config defaults and overrides") {
  const auto d = parse_config("");
  CHECK(d.periods_per_condition == 100);
  CHECK(d.period_len_s == 1.0);
  CHECK(d.lsb_uv == doctest::Approx(1.95));
  CHECK(d.condition_duration_s() == 100.0);

  const auto c = parse_config(
      "[experiment]\nperiods_per_condition = 10\nseed = 99\noutput_dir = results\n"
      "notch_hz = 50\nclassify = false\nmask_key = 000102030405060708090a0b0c0d0e0f\n"
      "[profile]\nalpha_amp_closed = 30\ndistractor_amp_factor = 1.0\n"
      "[linear]\nl2 = 0.01\n[mlp]\nepochs = 7\n");
  CHECK(c.periods_per_condition == 10);
  CHECK(c.seed == 99);
  CHECK(c.output_dir == fs::path("results"));
  CHECK(c.notch_hz == 50.0);
  CHECK_FALSE(c.classify);
  CHECK(c.mask_key[1] == 1);
  CHECK(c.profile.alpha_amp_closed == 30.0);
  CHECK(c.profile.distractor_amp_factor == 1.0);
  CHECK(c.linear.l2 == 0.01);
  CHECK(c.mlp.epochs == 7);
}

TEST_CASE("config problems are listed together") {
  try {
    parse_config("[experiment]\nperiods_per_condition = 1\ngrid_n = 4\ncolour = blue\n"
                 "lowpass_hz = abc\n[profile]\nnoise_rms = -2\n[extra]\nx = 1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const auto& p = e.problems();
    auto has = [&](const std::string& s) {
      return std::any_of(p.begin(), p.end(), [&](const auto& x) { return x.find(s) != std::string::npos; });
    };
    CHECK(has("periods_per_condition"));
    CHECK(has("grid_n"));
    CHECK(has("colour"));
    CHECK(has("lowpass_hz"));
    CHECK(has("noise_rms"));
    CHECK(has("[extra]"));
  }
  CHECK_THROWS_AS(parse_config("[experiment\n"), ParseError);
  CHECK_THROWS_AS(load_config("/nonexistent/run.ini"), IoError);
}

TEST_CASE("sensor log format") {
  const auto dir = testutil::scratch_dir("sensor");
  const std::vector<GyroSample> trace{{0, 0}, {1, -1}};
  export_sensor_log(trace, dir / "sensor.dat");
  CHECK(slurp(dir / "sensor.dat") == "0\t0\n1\t-1\n");
  CHECK(import_sensor_log(dir / "sensor.dat") == trace);
  export_sensor_log(std::vector<GyroSample>{}, dir / "empty.dat");
  CHECK(slurp(dir / "empty.dat").empty());
  std::ofstream(dir / "bad.dat") << "1 2\n";
  CHECK_THROWS_AS(import_sensor_log(dir / "bad.dat"), ParseError);
}

TEST_CASE("output directory handling") {
  const auto dir = testutil::scratch_dir("dirs");
  ensure_directory(dir / "a" / "b");
  CHECK(fs::is_directory(dir / "a" / "b"));
  std::ofstream(dir / "file") << "x";
  try {
    ensure_directory(dir / "file" / "sub");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find((dir / "file" / "sub").string()) != std::string::npos);
  }
}

TEST_CASE("experiment one with two periods") {
  auto cfg = small_config("exp1_small");
  const auto report = run_experiment_one(cfg);
  REQUIRE(report.conditions.size() == 2);
  for (const auto& c : report.conditions) {
    CHECK(c.features.size() == 3);
    CHECK(c.drops.expected_frames == 256);
    CHECK(c.decode_warnings == 0);
  }
  CHECK(report.classifiers.size() == 3);
  CHECK(fs::exists(cfg.output_dir / "features.csv"));
  for (auto name : {"alpha_power.csv", "alpha_peaks.csv", "accuracy.csv", "summary.txt",
                    "manifest.txt", "eyes_closed.efr", "eyes_open_sensor.dat",
                    "eyes_closed_alpha_topomap.pgm", "eyes_closed_O2_spectrum.csv",
                    "eyes_closed_F3_spectrum.csv", "eyes_open_events.csv", "svm.model"})
    CHECK_MESSAGE(fs::exists(cfg.output_dir / name), name);
  CHECK(fs::file_size(cfg.output_dir / "eyes_open.efr") == 256 * 33);
  CHECK(parse_features_csv(slurp(cfg.output_dir / "features.csv")).size() == 6);
}

TEST_CASE("harness values come from the module operations") {
  auto cfg = small_config("reproduce");
  cfg.periods_per_condition = 6;
  const auto report = analyze_condition(cfg, Condition::EyesClosed);
  const auto stream = decode_capture(read_capture(cfg.output_dir / "eyes_closed.efr"), cfg.mask_key,
                                     cfg.lsb_uv);
  const auto clean = preprocess_for_analysis(stream.recording, cfg);
  for (std::size_t c = 0; c < kNumChannels; ++c)
    CHECK(report.alpha_power[c] == band_power(welch_psd(clean.data[c], 128.0), 8.0, 12.0));
  CHECK(report.features.features == extract_features(clean, 1).features);
}

TEST_CASE("frame round trip only costs quantization") {
  auto cfg = small_config("fidelity");
  cfg.periods_per_condition = 10;
  SubjectProfile p = cfg.profile;
  p.seed = 5;
  const auto rec = generate_recording(p, Condition::EyesClosed, 10.0).recording;
  const auto back = decode_capture(encode_recording(rec, cfg.mask_key, cfg.lsb_uv), cfg.mask_key, cfg.lsb_uv);
  for (std::size_t c = 0; c < kNumChannels; ++c)
    for (std::size_t n = 0; n < rec.num_samples(); ++n)
      REQUIRE(std::abs(back.recording.data[c][n] - rec.data[c][n]) <= cfg.lsb_uv / 2 + 1e-9);
  const auto a = preprocess_for_analysis(rec, cfg), b = preprocess_for_analysis(back.recording, cfg);
  const std::size_t o2 = channel_index("O2");
  const double pa = band_power(welch_psd(a.data[o2], 128.0), 8, 12);
  const double pb = band_power(welch_psd(b.data[o2], 128.0), 8, 12);
  CHECK(pb == doctest::Approx(pa).epsilon(0.01));
}

TEST_CASE("dropped frames are repaired") {
  auto cfg = small_config("drops");
  cfg.periods_per_condition = 10;
  cfg.drop_rate = 0.03;
  const auto report = analyze_condition(cfg, Condition::EyesOpen);
  CHECK(report.drops.repaired > 0);
  CHECK(report.drops.balanced());
  CHECK(report.drops.expected_frames == 1280);
  CHECK(fs::file_size(cfg.output_dir / "eyes_open.efr") < 1280 * 33);
}

TEST_CASE("captures replace synthesis") {
  auto cfg = small_config("captures");
  cfg.periods_per_condition = 3;
  analyze_condition(cfg, Condition::EyesOpen);
  auto second = cfg;
  second.output_dir = cfg.output_dir.parent_path() / "second";
  second.captures[Condition::EyesClosed] = cfg.output_dir / "eyes_open.efr";
  const auto a = analyze_condition(cfg, Condition::EyesOpen);
  const auto b = analyze_condition(second, Condition::EyesClosed);
  CHECK(a.alpha_power == b.alpha_power);
  CHECK_FALSE(fs::exists(second.output_dir / "eyes_closed.efr"));
  second.captures[Condition::EyesClosed] = cfg.output_dir / "missing.efr";
  CHECK_THROWS_AS(analyze_condition(second, Condition::EyesClosed), IoError);
}

TEST_CASE("distractor with neutral factors matches quiet closed eyes") {
  auto cfg = small_config("neutral");
  cfg.periods_per_condition = 100;
  cfg.classify = false;
  cfg.profile.distractor_amp_factor = 1.0;
  cfg.profile.distractor_jitter_factor = 1.0;
  const auto report = run_experiment_two(cfg);
  REQUIRE(report.distractor_ratio);
  CHECK(*report.distractor_ratio == doctest::Approx(1.0).epsilon(0.15));
  CHECK(report.conditions.size() == 3);
  CHECK(report.classifiers.empty());
}

TEST_CASE("recording csv") {
  auto rec = make_recording(2);
  rec.data[0] = {1.5, -2};
  const auto text = recording_csv(rec);
  CHECK(text.rfind("t_s,AF3,F7,F3,FC5,T7,P7,O1,O2,P8,T8,FC6,F4,F8,AF4\n0,1.5,0", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}
