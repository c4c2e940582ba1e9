#include "epoc/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace epoc {

void remove_mean(std::span<double> signal) {
  if (signal.empty()) return;
  const double mean =
      std::accumulate(signal.begin(), signal.end(), 0.0) / static_cast<double>(signal.size());
  for (double& v : signal) v -= mean;
}

EegRecording remove_baseline(EegRecording rec) {
  if (rec.data.empty() || rec.num_samples() == 0)
    throw std::invalid_argument("remove_baseline: empty recording");
  for (auto& ch : rec.data) remove_mean(ch);
  return rec;
}

FilterSpec FilterSpec::low_pass(double cutoff_hz) {
  FilterSpec s;
  s.kind = FilterKind::LowPass;
  s.f_hi = cutoff_hz;
  return s;
}

FilterSpec FilterSpec::high_pass(double cutoff_hz) {
  FilterSpec s;
  s.kind = FilterKind::HighPass;
  s.f_lo = cutoff_hz;
  return s;
}

FilterSpec FilterSpec::band_pass(double lo_hz, double hi_hz) {
  FilterSpec s;
  s.kind = FilterKind::BandPass;
  s.f_lo = lo_hz;
  s.f_hi = hi_hz;
  return s;
}

FilterSpec FilterSpec::notch(double freq_hz, double q) {
  FilterSpec s;
  s.kind = FilterKind::Notch;
  s.notch_freq = freq_hz;
  s.q = q;
  return s;
}

namespace {

struct Rbj {
  double cos_w0;
  double alpha;
};

Rbj rbj(double f0, double rate, double q) {
  const double w0 = 2.0 * std::numbers::pi * f0 / rate;
  return {std::cos(w0), std::sin(w0) / (2.0 * q)};
}

Biquad normalized(double b0, double b1, double b2, double a0, double a1, double a2) {
  return {b0 / a0, b1 / a0, b2 / a0, a1 / a0, a2 / a0};
}

void check_frequency(double f, double rate, const char* name) {
  if (!(f > 0.0) || !(f < rate / 2.0))
    throw std::invalid_argument(std::string(name) + " " + std::to_string(f) +
                                " Hz must lie in (0, " + std::to_string(rate / 2.0) + ")");
}

}  // namespace

Biquad Biquad::low_pass(double f0, double rate, double q) {
  const auto [c, alpha] = rbj(f0, rate, q);
  return normalized((1 - c) / 2, 1 - c, (1 - c) / 2, 1 + alpha, -2 * c, 1 - alpha);
}

Biquad Biquad::high_pass(double f0, double rate, double q) {
  const auto [c, alpha] = rbj(f0, rate, q);
  return normalized((1 + c) / 2, -(1 + c), (1 + c) / 2, 1 + alpha, -2 * c, 1 - alpha);
}

Biquad Biquad::notch(double f0, double rate, double q) {
  const auto [c, alpha] = rbj(f0, rate, q);
  return normalized(1, -2 * c, 1, 1 + alpha, -2 * c, 1 - alpha);
}

void Biquad::run(std::span<double> x) const {
  double z1 = 0.0, z2 = 0.0;
  for (double& v : x) {
    const double in = v;
    const double out = b0 * in + z1;
    z1 = b1 * in - a1 * out + z2;
    z2 = b2 * in - a2 * out;
    v = out;
  }
}

void validate(const FilterSpec& spec, double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("sampling rate must be positive");
  if (!(spec.q > 0.0)) throw std::invalid_argument("filter q must be positive");
  switch (spec.kind) {
    case FilterKind::LowPass: check_frequency(spec.f_hi, rate, "low-pass cutoff"); break;
    case FilterKind::HighPass: check_frequency(spec.f_lo, rate, "high-pass cutoff"); break;
    case FilterKind::BandPass:
      check_frequency(spec.f_lo, rate, "band-pass lower edge");
      check_frequency(spec.f_hi, rate, "band-pass upper edge");
      if (!(spec.f_lo < spec.f_hi)) throw std::invalid_argument("band-pass edges inverted");
      break;
    case FilterKind::Notch: check_frequency(spec.notch_freq, rate, "notch frequency"); break;
  }
}

std::vector<Biquad> design_sections(const FilterSpec& spec, double rate) {
  validate(spec, rate);
  switch (spec.kind) {
    case FilterKind::LowPass: return {Biquad::low_pass(spec.f_hi, rate, spec.q)};
    case FilterKind::HighPass: return {Biquad::high_pass(spec.f_lo, rate, spec.q)};
    case FilterKind::BandPass:
      return {Biquad::high_pass(spec.f_lo, rate, spec.q),
              Biquad::low_pass(spec.f_hi, rate, spec.q)};
    case FilterKind::Notch: return {Biquad::notch(spec.notch_freq, rate, spec.q)};
  }
  return {};
}

std::size_t padding_length(const FilterSpec& spec, double rate, std::size_t n) {
  // Settle length: one period of the slowest feature the filter resolves.
  double slowest = 0.0;
  switch (spec.kind) {
    case FilterKind::LowPass: slowest = spec.f_hi; break;
    case FilterKind::HighPass:
    case FilterKind::BandPass: slowest = spec.f_lo; break;
    case FilterKind::Notch: slowest = spec.notch_freq / spec.q; break;
  }
  const auto settle = static_cast<std::size_t>(std::ceil(rate / slowest));
  return n == 0 ? 0 : std::min(3 * settle, n - 1);
}

std::vector<double> filter_signal(std::span<const double> signal, double rate,
                                  const FilterSpec& spec) {
  const auto sections = design_sections(spec, rate);
  const std::size_t n = signal.size();
  if (n == 0) return {};
  const std::size_t pad = padding_length(spec, rate, n);

  std::vector<double> buf;
  buf.reserve(n + 2 * pad);
  for (std::size_t k = pad; k >= 1; --k) buf.push_back(2.0 * signal[0] - signal[k]);
  buf.insert(buf.end(), signal.begin(), signal.end());
  for (std::size_t k = 1; k <= pad; ++k) buf.push_back(2.0 * signal[n - 1] - signal[n - 1 - k]);

  for (const auto& s : sections) s.run(buf);
  std::reverse(buf.begin(), buf.end());
  for (const auto& s : sections) s.run(buf);
  std::reverse(buf.begin(), buf.end());

  return {buf.begin() + static_cast<std::ptrdiff_t>(pad),
          buf.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

EegRecording apply_filter(EegRecording rec, const FilterSpec& spec) {
  validate(spec, rec.rate);
  for (auto& ch : rec.data) ch = filter_signal(ch, rec.rate, spec);
  return rec;
}

}  // namespace epoc
