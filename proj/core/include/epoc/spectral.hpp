#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "epoc/channel_layout.hpp"

namespace epoc {

/// Single-sided amplitude spectrum, MATLAB `2*abs(fft(x,NFFT)/L)` convention
/// except that the DC and Nyquist bins are not doubled.
struct Spectrum {
  std::vector<double> freqs;
  std::vector<double> amps;
  std::size_t nfft{0};
  std::size_t source_len{0};
};

struct PsdEstimate {
  std::vector<double> freqs;
  std::vector<double> density;  // uV^2 / Hz
  std::size_t segment_len{0};
  double overlap{0.0};
  std::string window{"hann"};

  double resolution() const { return freqs.size() > 1 ? freqs[1] - freqs[0] : 0.0; }
};

inline constexpr std::size_t kDefaultSegmentLen = 128;
inline constexpr double kDefaultOverlap = 0.5;

/// NFFT is the next power of two >= signal length.
Spectrum amplitude_spectrum(std::span<const double> signal, double rate);

/// Hann-windowed Welch average with constant detrend per segment; one-sided
/// density normalized so that sum(density) * df equals the signal variance.
PsdEstimate welch_psd(std::span<const double> signal, double rate,
                      std::size_t segment_len = kDefaultSegmentLen,
                      double overlap = kDefaultOverlap);

/// Trapezoidal integral of the density over [f_lo, f_hi], interpolating
/// linearly at band edges that fall between bins.
double band_power(const PsdEstimate& psd, double f_lo, double f_hi);

struct AlphaPeak {
  double freq{0.0};
  double prominence{0.0};
};

inline constexpr double kAlphaLowHz = 8.0;
inline constexpr double kAlphaHighHz = 12.0;
inline constexpr double kAlphaProminenceThreshold = 2.0;

/// Density argmax in 8-12 Hz; prominence is its ratio to the median density
/// of the 4-8 Hz and 12-16 Hz flanks. Empty when prominence < threshold.
std::optional<AlphaPeak> find_alpha_peak(const PsdEstimate& psd,
                                         double threshold = kAlphaProminenceThreshold);
/// Prominence without thresholding (0 for a silent spectrum).
double alpha_prominence(const PsdEstimate& psd);

/// Band-power map over a grid_n x grid_n square covering the unit head disk.
/// Row 0 is the anterior edge (y = +1), column 0 the left edge (x = -1).
/// Cells outside the disk hold NaN.
struct TopoMap {
  std::size_t grid_n{0};
  std::vector<double> grid;  // row-major
  double band_lo{0.0};
  double band_hi{0.0};
  std::vector<Point2> positions;

  double at(std::size_t row, std::size_t col) const { return grid[row * grid_n + col]; }
  Point2 cell_center(std::size_t row, std::size_t col) const;
  /// Center of the largest inside-disk cell.
  Point2 argmax() const;
};

/// Inverse-distance-weighted (power 2) interpolation of per-channel values.
TopoMap topomap(std::span<const double> values, std::span<const Point2> positions,
                std::size_t grid_n, double band_lo = kAlphaLowHz, double band_hi = kAlphaHighHz);
TopoMap topomap(std::span<const double> values, const Montage& montage, std::size_t grid_n,
                double band_lo = kAlphaLowHz, double band_hi = kAlphaHighHz);

/// `freq_hz,value` rows with a header line.
std::string spectrum_csv(const Spectrum& spectrum);
std::string psd_csv(const PsdEstimate& psd);
/// Plain ASCII PGM (P2), 8-bit, outside-disk cells 0.
std::string topomap_pgm(const TopoMap& map);
/// grid_n rows of comma-separated values, `nan` outside the disk.
std::string topomap_csv(const TopoMap& map);

void write_text_file(const std::filesystem::path& path, const std::string& contents);
/// Fixed-format number used by all CSV writers so outputs are byte-stable.
std::string format_number(double value);

}  // namespace epoc
