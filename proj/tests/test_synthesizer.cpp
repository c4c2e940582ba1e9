#include <doctest.h>

#include <cmath>

#include "epoc/channel_layout.hpp"
#include "epoc/spectral.hpp"
#include "epoc/synthesizer.hpp"
#include "test_util.hpp"

using namespace epoc;

namespace {

SubjectProfile quiet_profile() {
  SubjectProfile p;
  p.noise_rms = 0.0;
  p.drift_amp = 0.0;
  p.alpha_bw_jitter = 0.0;
  return p;
}

// Least-squares fit of a*sin + b*cos at `freq`; returns amplitude and residual RMS.
std::pair<double, double> fit_tone(const std::vector<double>& x, double freq, double rate) {
  double ss = 0, sc = 0, cc = 0, xs = 0, xc = 0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double w = 2.0 * testutil::kPi * freq * static_cast<double>(n) / rate;
    const double s = std::sin(w), c = std::cos(w);
    ss += s * s;
    sc += s * c;
    cc += c * c;
    xs += x[n] * s;
    xc += x[n] * c;
  }
  const double det = ss * cc - sc * sc;
  const double a = (xs * cc - xc * sc) / det;
  const double b = (xc * ss - xs * sc) / det;
  double res = 0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double w = 2.0 * testutil::kPi * freq * static_cast<double>(n) / rate;
    const double e = x[n] - a * std::sin(w) - b * std::cos(w);
    res += e * e;
  }
  return {std::hypot(a, b), std::sqrt(res / static_cast<double>(x.size()))};
}

double alpha_power(const EegRecording& rec, std::size_t ch) {
  return band_power(welch_psd(rec.data[ch], rec.rate), 8.0, 12.0);
}

}  // namespace

TEST_CASE("silent profile gives a zero recording") {
  auto p = quiet_profile();
  p.alpha_amp_open = 0.0;
  const auto s = generate_recording(p, Condition::EyesOpen, 4.0);
  CHECK(s.recording.num_samples() == 512);
  for (const auto& ch : s.recording.data)
    for (double v : ch) REQUIRE(v == 0.0);
}

TEST_CASE("noise-free closed eyes is a pure alpha tone on O1") {
  const auto s = generate_recording(quiet_profile(), Condition::EyesClosed, 4.0);
  const auto [amp, residual] = fit_tone(s.recording.data[channel_index("O1")], 10.0, 128.0);
  CHECK(amp == doctest::Approx(20.0).epsilon(1e-9));
  CHECK(residual < 1e-9);
}

TEST_CASE("spatial gain ratio with noise off") {
  const auto s = generate_recording(quiet_profile(), Condition::EyesClosed, 2.0);
  const auto& o1 = s.recording.data[channel_index("O1")];
  const auto& f3 = s.recording.data[channel_index("F3")];
  for (std::size_t n = 0; n < o1.size(); ++n)
    if (std::abs(f3[n]) > 1e-6) REQUIRE(o1[n] / f3[n] == doctest::Approx(1.0 / 0.4));
  CHECK(s.truth.alpha_amp_used[channel_index("O1")] == doctest::Approx(20.0));
  CHECK(s.truth.alpha_amp_used[channel_index("F3")] == doctest::Approx(8.0));
}

TEST_CASE("closed over open alpha power matches the amplitude ratio squared") {
  auto p = quiet_profile();
  p.alpha_amp_open = 5.0;
  const auto closed = generate_recording(p, Condition::EyesClosed, 20.0);
  const auto open = generate_recording(p, Condition::EyesOpen, 20.0);
  const std::size_t o1 = channel_index("O1");
  CHECK(alpha_power(closed.recording, o1) / alpha_power(open.recording, o1) ==
        doctest::Approx(16.0).epsilon(0.02));
}

TEST_CASE("condition ordering on occipital channels") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SubjectProfile p;
    p.seed = seed;
    const auto o = generate_recording(p, Condition::EyesOpen, 100.0);
    const auto d = generate_recording(p, Condition::EyesClosedDistractor, 100.0);
    const auto c = generate_recording(p, Condition::EyesClosed, 100.0);
    for (auto label : {"O1", "O2"}) {
      const auto ch = channel_index(label);
      CHECK(alpha_power(o.recording, ch) < alpha_power(d.recording, ch));
      CHECK(alpha_power(d.recording, ch) < alpha_power(c.recording, ch));
    }
  }
}

TEST_CASE("determinism") {
  SubjectProfile p;
  p.seed = 42;
  const auto a = generate_recording(p, Condition::EyesClosed, 5.0);
  const auto b = generate_recording(p, Condition::EyesClosed, 5.0);
  CHECK(a.recording.data == b.recording.data);
  CHECK(a.recording.gyro == b.recording.gyro);
  p.seed = 43;
  const auto c = generate_recording(p, Condition::EyesClosed, 5.0);
  CHECK(a.recording.data != c.recording.data);
}

TEST_CASE("pink noise slope and scale") {
  const std::size_t n = 128 * 16;
  std::vector<double> mean_density;
  std::vector<double> freqs;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto x = pink_noise(n, 128.0, 3.0, seed);
    CHECK(testutil::rms(x) == doctest::Approx(3.0).epsilon(1e-9));
    const auto psd = welch_psd(x, 128.0);
    if (mean_density.empty()) {
      mean_density.assign(psd.density.size(), 0.0);
      freqs = psd.freqs;
    }
    for (std::size_t k = 0; k < psd.density.size(); ++k) mean_density[k] += psd.density[k];
  }
  // Least-squares slope of log10 density vs log10 frequency over 1-40 Hz.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    if (freqs[k] < 1.0 || freqs[k] > 40.0) continue;
    const double lx = std::log10(freqs[k]), ly = std::log10(mean_density[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  CHECK(slope == doctest::Approx(-1.0).epsilon(0.3));
}

TEST_CASE("mains injection") {
  auto rec = make_recording(256);
  CHECK(inject_mains(rec, 50.0, 0.0).data == rec.data);
  const auto hum = inject_mains(rec, 50.0, 0.7);
  const auto expected = testutil::sine(256, 50.0, 0.7);
  for (const auto& ch : hum.data)
    for (std::size_t n = 0; n < ch.size(); ++n) REQUIRE(ch[n] == doctest::Approx(expected[n]));
  CHECK_THROWS_AS(inject_mains(rec, 70.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(inject_mains(rec, 64.0, 1.0), std::invalid_argument);
}

TEST_CASE("ocular artifact polarity") {
  auto rec = make_recording(128 * 4);
  GroundTruth truth;
  const auto ev = inject_artifact(rec, truth, {ArtifactKind::Ocular, 1.0, {}, 50.0, 0});
  const std::size_t n = static_cast<std::size_t>(1.4 * 128);
  CHECK(rec.data[channel_index("F7")][n] > 0.0);
  CHECK(rec.data[channel_index("F8")][n] < 0.0);
  CHECK(rec.data[channel_index("F7")][n] == doctest::Approx(50.0).epsilon(0.01));
  CHECK(ev.t_start == 1.0);
  CHECK(ev.t_end == doctest::Approx(1.8));
  CHECK(truth.artifact_events.size() == 1);
  CHECK(rec.annotations.size() == 1);
}

TEST_CASE("disconnection step on P8 only") {
  SubjectProfile p;
  p.seed = 4;
  auto s = generate_recording(p, Condition::EyesClosed, 10.0);
  const auto before = s.recording.data;
  const std::size_t p8 = channel_index("P8");
  const double amp = default_artifact_amplitude(ArtifactKind::Disconnection, p);
  CHECK(amp == 2000.0);
  inject_artifact(s.recording, s.truth, {ArtifactKind::Disconnection, 6.0, {p8}, amp, 9});
  const std::size_t n0 = 6 * 128;
  // Step contributed by the artifact, separated from the background.
  const auto& x = s.recording.data[p8];
  const double step = (x[n0] - before[p8][n0]) - (x[n0 - 1] - before[p8][n0 - 1]);
  CHECK(std::abs(step) >= 10.0 * p.drift_amp);
  CHECK(x.back() - before[p8].back() == doctest::Approx(step));
  for (std::size_t c = 0; c < kNumChannels; ++c)
    if (c != p8) CHECK(s.recording.data[c] == before[c]);
  GroundTruth t;
  CHECK_THROWS(inject_artifact(s.recording, t, {ArtifactKind::Disconnection, 6.0, {}, amp, 0}));
}

TEST_CASE("muscle burst on silence has the floor RMS") {
  auto p = quiet_profile();
  auto rec = make_recording(128 * 3);
  GroundTruth truth;
  const double amp = default_artifact_amplitude(ArtifactKind::Muscle, p);
  CHECK(amp == 10.0);
  inject_artifact(rec, truth, {ArtifactKind::Muscle, 1.0, {channel_index("T7")}, amp, 3});
  const auto& x = rec.data[channel_index("T7")];
  std::vector<double> burst(x.begin() + 128, x.begin() + 192);
  CHECK(testutil::rms(burst) == doctest::Approx(10.0));
  CHECK(default_artifact_amplitude(ArtifactKind::Muscle, SubjectProfile{}) == 40.0);
}

TEST_CASE("artifact start outside the recording") {
  auto rec = make_recording(256);
  GroundTruth truth;
  CHECK_THROWS_AS(inject_artifact(rec, truth, {ArtifactKind::Ocular, 5.0, {}, 50.0, 0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(inject_artifact(rec, truth, {ArtifactKind::Ocular, -1.0, {}, 50.0, 0}),
                  std::invalid_argument);
}

TEST_CASE("ground truth stays ordered") {
  auto rec = make_recording(128 * 10);
  GroundTruth truth;
  inject_artifact(rec, truth, {ArtifactKind::Muscle, 5.0, {}, 10.0, 1});
  inject_artifact(rec, truth, {ArtifactKind::Ocular, 2.0, {}, 50.0, 2});
  REQUIRE(truth.artifact_events.size() == 2);
  CHECK(truth.artifact_events[0].t_start == 2.0);
  CHECK(truth.artifact_events[1].t_start == 5.0);
}

TEST_CASE("profile validation and condition names") {
  SubjectProfile p;
  p.alpha_freq = 20.0;
  p.noise_rms = -1.0;
  CHECK(p.problems().size() == 2);
  CHECK_THROWS_AS(generate_recording(p, Condition::EyesOpen, 1.0), std::invalid_argument);
  for (auto c : {Condition::EyesOpen, Condition::EyesClosed, Condition::EyesClosedDistractor})
    CHECK(condition_from_string(to_string(c)) == c);
  CHECK_THROWS(condition_from_string("asleep"));
  SubjectProfile d;
  CHECK(d.alpha_amplitude(Condition::EyesClosedDistractor) == doctest::Approx(12.0));
  CHECK(d.alpha_jitter(Condition::EyesClosedDistractor) == doctest::Approx(2.0));
}
