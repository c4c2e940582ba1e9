#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "epoc/recording.hpp"

namespace epoc {

/// Subtracts each channel's mean. Throws std::invalid_argument when empty.
EegRecording remove_baseline(EegRecording rec);
void remove_mean(std::span<double> signal);

enum class FilterKind { BandPass, LowPass, HighPass, Notch };

/// Frequencies in Hz. LowPass uses f_hi, HighPass uses f_lo, BandPass uses
/// both, Notch uses notch_freq. `q` is the quality factor of every section.
struct FilterSpec {
  FilterKind kind{FilterKind::LowPass};
  double f_lo{0.0};
  double f_hi{0.0};
  double notch_freq{50.0};
  double q{0.70710678118654752};

  static FilterSpec low_pass(double cutoff_hz);
  static FilterSpec high_pass(double cutoff_hz);
  static FilterSpec band_pass(double lo_hz, double hi_hz);
  static FilterSpec notch(double freq_hz = 50.0, double q = 10.0);
};

/// Second-order section with normalized coefficients (a0 == 1).
struct Biquad {
  double b0{1.0}, b1{0.0}, b2{0.0}, a1{0.0}, a2{0.0};

  static Biquad low_pass(double f0, double rate, double q);
  static Biquad high_pass(double f0, double rate, double q);
  static Biquad notch(double f0, double rate, double q);

  /// Causal single pass, zero initial state.
  void run(std::span<double> signal) const;
};

/// Throws std::invalid_argument if any frequency is outside (0, rate/2), the
/// band is inverted or q <= 0.
void validate(const FilterSpec& spec, double rate);
std::vector<Biquad> design_sections(const FilterSpec& spec, double rate);

/// Samples of odd-reflection padding applied on each side before filtering:
/// three times the settle length, capped at n - 1.
std::size_t padding_length(const FilterSpec& spec, double rate, std::size_t n);

/// Zero-phase (forward then backward) filtering of one signal.
std::vector<double> filter_signal(std::span<const double> signal, double rate,
                                  const FilterSpec& spec);
EegRecording apply_filter(EegRecording rec, const FilterSpec& spec);

}  // namespace epoc
