#include "epoc/synthesizer.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>

#include "epoc/channel_layout.hpp"
#include "epoc/fft.hpp"

namespace epoc {
namespace {

constexpr double kPinkCornerHz = 0.5;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

enum Stream : std::uint64_t { kAlphaStream = 100, kDriftStream = 101, kGyroStream = 102 };

void insert_ordered(std::vector<ArtifactEvent>& events, const ArtifactEvent& ev) {
  auto it = std::upper_bound(events.begin(), events.end(), ev,
                             [](const auto& a, const auto& b) { return a.t_start < b.t_start; });
  events.insert(it, ev);
}

}  // namespace

std::string_view to_string(Condition condition) {
  switch (condition) {
    case Condition::EyesOpen: return "eyes_open";
    case Condition::EyesClosed: return "eyes_closed";
    case Condition::EyesClosedDistractor: return "eyes_closed_distractor";
  }
  return "unknown";
}

Condition condition_from_string(std::string_view text) {
  if (text == "eyes_open") return Condition::EyesOpen;
  if (text == "eyes_closed") return Condition::EyesClosed;
  if (text == "eyes_closed_distractor") return Condition::EyesClosedDistractor;
  throw std::invalid_argument("unknown condition '" + std::string(text) + "'");
}

std::vector<std::string> SubjectProfile::problems() const {
  std::vector<std::string> out;
  if (!(alpha_freq >= 8.0 && alpha_freq <= 12.0))
    out.push_back("alpha_freq must lie in [8, 12] Hz");
  auto non_negative = [&](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) out.push_back(std::string(name) + " must be >= 0");
  };
  non_negative(alpha_amp_closed, "alpha_amp_closed");
  non_negative(alpha_amp_open, "alpha_amp_open");
  non_negative(alpha_bw_jitter, "alpha_bw_jitter");
  non_negative(occipital_gain, "occipital_gain");
  non_negative(frontal_gain, "frontal_gain");
  non_negative(noise_rms, "noise_rms");
  non_negative(drift_amp, "drift_amp");
  non_negative(drift_freq, "drift_freq");
  non_negative(distractor_amp_factor, "distractor_amp_factor");
  non_negative(distractor_jitter_factor, "distractor_jitter_factor");
  return out;
}

void SubjectProfile::validate() const {
  const auto p = problems();
  if (p.empty()) return;
  std::string msg = "invalid subject profile:";
  for (const auto& s : p) msg += " " + s + ";";
  throw std::invalid_argument(msg);
}

double SubjectProfile::alpha_amplitude(Condition condition) const {
  switch (condition) {
    case Condition::EyesOpen: return alpha_amp_open;
    case Condition::EyesClosed: return alpha_amp_closed;
    case Condition::EyesClosedDistractor: return alpha_amp_closed * distractor_amp_factor;
  }
  return 0.0;
}

double SubjectProfile::alpha_jitter(Condition condition) const {
  return condition == Condition::EyesClosedDistractor ? alpha_bw_jitter * distractor_jitter_factor
                                                      : alpha_bw_jitter;
}

bool is_occipital(std::size_t channel) {
  const auto label = kChannelLabels.at(channel);
  return label == "O1" || label == "O2" || label == "P7" || label == "P8";
}

double spatial_gain(const SubjectProfile& profile, std::size_t channel) {
  return is_occipital(channel) ? profile.occipital_gain : profile.frontal_gain;
}

std::vector<double> pink_noise(std::size_t samples, double rate, double rms, std::uint64_t seed) {
  if (samples == 0) return {};
  const std::size_t m = next_pow2(samples);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::complex<double>> buf(m);
  for (auto& v : buf) v = gauss(rng);
  fft_inplace(buf);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t folded = std::min(k, m - k);
    const double f = rate * static_cast<double>(folded) / static_cast<double>(m);
    buf[k] *= folded == 0 ? 0.0 : 1.0 / std::sqrt(std::max(f, kPinkCornerHz));
  }
  fft_inplace(buf, true);

  std::vector<double> out(samples);
  double mean = 0.0;
  for (std::size_t n = 0; n < samples; ++n) mean += out[n] = buf[n].real();
  mean /= static_cast<double>(samples);
  double energy = 0.0;
  for (double& v : out) {
    v -= mean;
    energy += v * v;
  }
  const double current = std::sqrt(energy / static_cast<double>(samples));
  const double scale = current > 0.0 ? rms / current : 0.0;
  for (double& v : out) v *= scale;
  return out;
}

SyntheticRecording generate_recording(const SubjectProfile& profile, Condition condition,
                                      double duration_s, double rate) {
  profile.validate();
  if (!(duration_s > 0.0)) throw std::invalid_argument("duration must be positive");
  if (!(rate > 0.0)) throw std::invalid_argument("sampling rate must be positive");
  const auto samples = static_cast<std::size_t>(std::llround(duration_s * rate));
  if (samples == 0) throw std::invalid_argument("duration shorter than one sample");

  const std::uint64_t base = mix_seed(profile.seed, static_cast<std::uint64_t>(condition));

  SyntheticRecording out;
  out.recording = make_recording(samples, rate);
  out.truth.condition = condition;
  auto& data = out.recording.data;

  // Common-mode slow drift of the zero level.
  std::mt19937_64 drift_rng(mix_seed(base, kDriftStream));
  const double drift_phase = std::uniform_real_distribution<double>(0.0, kTwoPi)(drift_rng);

  // One alpha generator, volume-conducted to every channel with a spatial gain.
  std::mt19937_64 alpha_rng(mix_seed(base, kAlphaStream));
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double amp = profile.alpha_amplitude(condition);
  const double jitter = profile.alpha_jitter(condition);
  double phase = std::uniform_real_distribution<double>(0.0, kTwoPi)(alpha_rng);
  std::vector<double> alpha(samples);
  for (std::size_t n = 0; n < samples; ++n) {
    alpha[n] = std::sin(phase);
    phase += kTwoPi * (profile.alpha_freq + jitter * gauss(alpha_rng)) / rate;
  }

  for (std::size_t c = 0; c < kNumChannels; ++c) {
    const double gain = amp * spatial_gain(profile, c);
    out.truth.alpha_amp_used[c] = gain;
    const auto noise = pink_noise(samples, rate, profile.noise_rms, mix_seed(base, c));
    for (std::size_t n = 0; n < samples; ++n) {
      const double t = static_cast<double>(n) / rate;
      data[c][n] = noise[n] +
                   profile.drift_amp * std::sin(kTwoPi * profile.drift_freq * t + drift_phase) +
                   gain * alpha[n];
    }
  }

  std::mt19937_64 gyro_rng(mix_seed(base, kGyroStream));
  std::normal_distribution<double> gyro_noise(0.0, 1.5);
  out.recording.gyro.resize(samples);
  for (auto& g : out.recording.gyro) {
    g.x = std::clamp(static_cast<int>(std::lround(gyro_noise(gyro_rng))), -128, 127);
    g.y = std::clamp(static_cast<int>(std::lround(gyro_noise(gyro_rng))), -128, 127);
  }
  return out;
}

EegRecording inject_mains(EegRecording rec, double freq_hz, double amplitude_uv) {
  if (!(freq_hz > 0.0) || !(freq_hz < rec.rate / 2.0))
    throw std::invalid_argument("mains frequency " + std::to_string(freq_hz) +
                                " Hz must lie in (0, " + std::to_string(rec.rate / 2.0) +
                                ") to avoid aliasing");
  if (amplitude_uv == 0.0) return rec;
  for (auto& ch : rec.data)
    for (std::size_t n = 0; n < ch.size(); ++n)
      ch[n] += amplitude_uv * std::sin(kTwoPi * freq_hz * static_cast<double>(n) / rec.rate);
  return rec;
}

double artifact_duration(ArtifactKind kind, double recording_duration_s, double t0) {
  switch (kind) {
    case ArtifactKind::Ocular: return kOcularDuration;
    case ArtifactKind::Muscle: return kMuscleDuration;
    case ArtifactKind::Disconnection: return recording_duration_s - t0;
  }
  return 0.0;
}

double default_artifact_amplitude(ArtifactKind kind, const SubjectProfile& profile,
                                  double floor_uv) {
  switch (kind) {
    case ArtifactKind::Ocular: return 50.0;
    case ArtifactKind::Muscle: return std::max(kMuscleNoiseFactor * profile.noise_rms, floor_uv);
    case ArtifactKind::Disconnection:
      return std::max(kDisconnectionDriftFactor * profile.drift_amp, floor_uv);
  }
  return 0.0;
}

ArtifactEvent inject_artifact(EegRecording& rec, GroundTruth& truth, const ArtifactSpec& spec) {
  validate(rec);
  const double length = rec.duration_s();
  if (!(spec.t0 >= 0.0) || !(spec.t0 < length))
    throw std::invalid_argument("artifact start " + std::to_string(spec.t0) +
                                " s outside recording of " + std::to_string(length) + " s");
  const double duration = artifact_duration(spec.kind, length, spec.t0);
  if (spec.t0 + duration > length + 1e-9)
    throw std::invalid_argument("artifact at " + std::to_string(spec.t0) + " s runs past the end");

  std::vector<std::size_t> scope = spec.channels;
  if (scope.empty() && spec.kind != ArtifactKind::Disconnection)
    for (std::size_t c = 0; c < kNumChannels; ++c) scope.push_back(c);
  for (auto c : scope)
    if (c >= kNumChannels) throw std::invalid_argument("artifact channel index out of range");
  std::sort(scope.begin(), scope.end());
  scope.erase(std::unique(scope.begin(), scope.end()), scope.end());

  const auto n0 = static_cast<std::size_t>(std::llround(spec.t0 * rec.rate));
  const std::size_t total = rec.num_samples();
  std::mt19937_64 rng(spec.seed);

  switch (spec.kind) {
    case ArtifactKind::Ocular: {
      const auto len = static_cast<std::size_t>(std::llround(kOcularDuration * rec.rate));
      const auto& montage = default_montage();
      for (auto c : scope) {
        const double sign = montage.locations[c].theta < 0.0 ? 1.0 : -1.0;
        for (std::size_t k = 0; k < len && n0 + k < total; ++k)
          rec.data[c][n0 + k] += sign * spec.amplitude_uv *
                                 std::sin(std::numbers::pi * static_cast<double>(k) /
                                          static_cast<double>(len));
      }
      break;
    }
    case ArtifactKind::Muscle: {
      const auto len = static_cast<std::size_t>(std::llround(kMuscleDuration * rec.rate));
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (auto c : scope) {
        std::vector<double> burst(len);
        double energy = 0.0;
        for (auto& v : burst) {
          v = gauss(rng);
          energy += v * v;
        }
        const double scale = spec.amplitude_uv / std::sqrt(energy / static_cast<double>(len));
        for (std::size_t k = 0; k < len && n0 + k < total; ++k)
          rec.data[c][n0 + k] += burst[k] * scale;
      }
      break;
    }
    case ArtifactKind::Disconnection: {
      if (scope.size() != 1)
        throw std::invalid_argument("a disconnection affects exactly one channel");
      const double sign = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
      for (std::size_t n = n0; n < total; ++n) rec.data[scope[0]][n] += sign * spec.amplitude_uv;
      break;
    }
  }

  ArtifactEvent ev;
  ev.kind = spec.kind;
  ev.t_start = spec.t0;
  ev.t_end = spec.t0 + duration;
  ev.channels = scope;
  insert_ordered(truth.artifact_events, ev);
  insert_ordered(rec.annotations, ev);
  return ev;
}

}  // namespace epoc
