#include "epoc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "epoc/errors.hpp"
#include "epoc/fft.hpp"

namespace epoc {
namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid))) / 2.0;
  }
  return m;
}

}  // namespace

Spectrum amplitude_spectrum(std::span<const double> signal, double rate) {
  if (signal.size() < 2) throw std::invalid_argument("amplitude_spectrum needs >= 2 samples");
  if (!(rate > 0.0)) throw std::invalid_argument("sampling rate must be positive");
  const std::size_t L = signal.size();
  const std::size_t nfft = next_pow2(L);
  const auto Y = real_dft(signal, nfft);

  Spectrum s;
  s.nfft = nfft;
  s.source_len = L;
  const std::size_t bins = nfft / 2 + 1;
  s.freqs.resize(bins);
  s.amps.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    s.freqs[k] = rate / 2.0 * static_cast<double>(k) / static_cast<double>(bins - 1);
    const double mag = std::abs(Y[k]) / static_cast<double>(L);
    s.amps[k] = (k == 0 || k == bins - 1) ? mag : 2.0 * mag;
  }
  return s;
}

PsdEstimate welch_psd(std::span<const double> signal, double rate, std::size_t segment_len,
                      double overlap) {
  if (segment_len < 2) throw std::invalid_argument("welch segment must hold >= 2 samples");
  if (segment_len > signal.size())
    throw std::invalid_argument("welch segment (" + std::to_string(segment_len) +
                                ") longer than signal (" + std::to_string(signal.size()) + ")");
  if (!(overlap >= 0.0 && overlap < 1.0)) throw std::invalid_argument("overlap must be in [0, 1)");
  if (!(rate > 0.0)) throw std::invalid_argument("sampling rate must be positive");

  const std::size_t step = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(static_cast<double>(segment_len) * (1.0 - overlap))));
  const std::size_t segments = (signal.size() - segment_len) / step + 1;

  std::vector<double> window(segment_len);
  double window_power = 0.0;
  for (std::size_t n = 0; n < segment_len; ++n) {
    window[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                     static_cast<double>(segment_len));
    window_power += window[n] * window[n];
  }

  const std::size_t bins = segment_len / 2 + 1;
  PsdEstimate psd;
  psd.segment_len = segment_len;
  psd.overlap = overlap;
  psd.freqs.resize(bins);
  psd.density.assign(bins, 0.0);
  for (std::size_t k = 0; k < bins; ++k)
    psd.freqs[k] = rate * static_cast<double>(k) / static_cast<double>(segment_len);

  std::vector<double> seg(segment_len);
  for (std::size_t s = 0; s < segments; ++s) {
    const auto chunk = signal.subspan(s * step, segment_len);
    const double mean =
        std::accumulate(chunk.begin(), chunk.end(), 0.0) / static_cast<double>(segment_len);
    for (std::size_t n = 0; n < segment_len; ++n) seg[n] = (chunk[n] - mean) * window[n];
    const auto X = real_dft(seg, segment_len);
    for (std::size_t k = 0; k < bins; ++k) psd.density[k] += std::norm(X[k]);
  }

  const double scale = 1.0 / (rate * window_power * static_cast<double>(segments));
  const bool has_nyquist = segment_len % 2 == 0;
  for (std::size_t k = 0; k < bins; ++k) {
    const bool edge = k == 0 || (has_nyquist && k == bins - 1);
    psd.density[k] *= scale * (edge ? 1.0 : 2.0);
  }
  return psd;
}

double band_power(const PsdEstimate& psd, double f_lo, double f_hi) {
  if (psd.freqs.size() < 2) throw std::invalid_argument("band_power: empty PSD");
  const double top = psd.freqs.back();
  if (!(f_lo >= 0.0) || !(f_lo < f_hi) || f_hi > top + 1e-9)
    throw std::invalid_argument("band_power: band [" + std::to_string(f_lo) + ", " +
                                std::to_string(f_hi) + "] invalid for PSD up to " +
                                std::to_string(top) + " Hz");
  f_hi = std::min(f_hi, top);

  const auto& f = psd.freqs;
  const auto& d = psd.density;
  auto value_at = [&](double x) {
    auto it = std::upper_bound(f.begin(), f.end(), x);
    if (it == f.begin()) return d.front();
    if (it == f.end()) return d.back();
    const std::size_t i = static_cast<std::size_t>(it - f.begin());
    const double t = (x - f[i - 1]) / (f[i] - f[i - 1]);
    return d[i - 1] + t * (d[i] - d[i - 1]);
  };

  double total = 0.0;
  double x0 = f_lo;
  double y0 = value_at(f_lo);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] <= f_lo) continue;
    if (f[i] >= f_hi) break;
    total += 0.5 * (y0 + d[i]) * (f[i] - x0);
    x0 = f[i];
    y0 = d[i];
  }
  total += 0.5 * (y0 + value_at(f_hi)) * (f_hi - x0);
  return total;
}

double alpha_prominence(const PsdEstimate& psd) {
  double peak = -1.0;
  std::vector<double> flanks;
  for (std::size_t k = 0; k < psd.freqs.size(); ++k) {
    const double f = psd.freqs[k];
    if (f >= kAlphaLowHz && f <= kAlphaHighHz) peak = std::max(peak, psd.density[k]);
    if ((f >= 4.0 && f < kAlphaLowHz) || (f > kAlphaHighHz && f <= 16.0))
      flanks.push_back(psd.density[k]);
  }
  if (peak <= 0.0) return 0.0;
  const double base = median_of(std::move(flanks));
  if (base <= 0.0) return std::numeric_limits<double>::infinity();
  return peak / base;
}

std::optional<AlphaPeak> find_alpha_peak(const PsdEstimate& psd, double threshold) {
  std::size_t best = psd.freqs.size();
  for (std::size_t k = 0; k < psd.freqs.size(); ++k) {
    const double f = psd.freqs[k];
    if (f < kAlphaLowHz || f > kAlphaHighHz) continue;
    if (best == psd.freqs.size() || psd.density[k] > psd.density[best]) best = k;
  }
  if (best == psd.freqs.size()) return std::nullopt;
  const double prominence = alpha_prominence(psd);
  if (!(prominence >= threshold)) return std::nullopt;
  return AlphaPeak{psd.freqs[best], prominence};
}

Point2 TopoMap::cell_center(std::size_t row, std::size_t col) const {
  const double n = static_cast<double>(grid_n);
  return {-1.0 + (2.0 * static_cast<double>(col) + 1.0) / n,
          1.0 - (2.0 * static_cast<double>(row) + 1.0) / n};
}

Point2 TopoMap::argmax() const {
  std::size_t best = grid.size();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (std::isnan(grid[i])) continue;
    if (best == grid.size() || grid[i] > grid[best]) best = i;
  }
  if (best == grid.size()) throw std::logic_error("topomap has no inside-disk cells");
  return cell_center(best / grid_n, best % grid_n);
}

TopoMap topomap(std::span<const double> values, std::span<const Point2> positions,
                std::size_t grid_n, double band_lo, double band_hi) {
  if (grid_n < 8) throw std::invalid_argument("topomap grid must be at least 8x8");
  if (values.size() != positions.size() || values.empty())
    throw std::invalid_argument("topomap needs one value per electrode position");
  for (double v : values)
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument("topomap values must be finite and non-negative");

  TopoMap map;
  map.grid_n = grid_n;
  map.band_lo = band_lo;
  map.band_hi = band_hi;
  map.positions.assign(positions.begin(), positions.end());
  map.grid.assign(grid_n * grid_n, std::numeric_limits<double>::quiet_NaN());

  for (std::size_t r = 0; r < grid_n; ++r) {
    for (std::size_t c = 0; c < grid_n; ++c) {
      const Point2 p = map.cell_center(r, c);
      if (p.x * p.x + p.y * p.y > 1.0) continue;
      double num = 0.0, den = 0.0;
      bool exact = false;
      for (std::size_t e = 0; e < positions.size(); ++e) {
        const double dx = p.x - positions[e].x, dy = p.y - positions[e].y;
        const double d2 = dx * dx + dy * dy;
        if (d2 < 1e-24) {
          num = values[e];
          den = 1.0;
          exact = true;
          break;
        }
        num += values[e] / d2;
        den += 1.0 / d2;
      }
      map.grid[r * grid_n + c] = exact ? num : num / den;
    }
  }
  return map;
}

TopoMap topomap(std::span<const double> values, const Montage& montage, std::size_t grid_n,
                double band_lo, double band_hi) {
  const auto positions = project_montage(montage);
  return topomap(values, positions, grid_n, band_lo, band_hi);
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  return buf;
}

namespace {
std::string two_column_csv(const std::vector<double>& x, const std::vector<double>& y) {
  std::string out = "freq_hz,value\n";
  for (std::size_t i = 0; i < x.size(); ++i)
    out += format_number(x[i]) + "," + format_number(y[i]) + "\n";
  return out;
}
}  // namespace

std::string spectrum_csv(const Spectrum& spectrum) {
  return two_column_csv(spectrum.freqs, spectrum.amps);
}

std::string psd_csv(const PsdEstimate& psd) { return two_column_csv(psd.freqs, psd.density); }

std::string topomap_pgm(const TopoMap& map) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : map.grid)
    if (!std::isnan(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  std::ostringstream out;
  out << "P2\n" << map.grid_n << ' ' << map.grid_n << "\n255\n";
  for (std::size_t r = 0; r < map.grid_n; ++r) {
    for (std::size_t c = 0; c < map.grid_n; ++c) {
      const double v = map.at(r, c);
      int level = 0;
      if (!std::isnan(v))
        level = hi > lo ? 1 + static_cast<int>(std::lround((v - lo) / (hi - lo) * 254.0)) : 255;
      out << level << (c + 1 == map.grid_n ? '\n' : ' ');
    }
  }
  return out.str();
}

std::string topomap_csv(const TopoMap& map) {
  std::string out;
  for (std::size_t r = 0; r < map.grid_n; ++r) {
    for (std::size_t c = 0; c < map.grid_n; ++c) {
      out += format_number(map.at(r, c));
      out += c + 1 == map.grid_n ? '\n' : ',';
    }
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  out << contents;
  if (!out) throw IoError(path, "write failed");
}

}  // namespace epoc
