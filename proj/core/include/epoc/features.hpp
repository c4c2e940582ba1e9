#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "epoc/recording.hpp"

namespace epoc {

inline constexpr std::size_t kDefaultWindowLen = 128;  // 1 s at 128 Hz
inline constexpr std::size_t kDefaultHop = kDefaultWindowLen / 2;

/// Window starts 0, hop, 2*hop, ...; floor((n - window_len) / hop) + 1 of them.
std::vector<std::size_t> window_starts(std::size_t n, std::size_t window_len, std::size_t hop);

struct RecordingWindow {
  std::size_t start{0};
  std::vector<std::span<const double>> channels;
};

/// Views into `rec`; the recording must outlive the result.
std::vector<RecordingWindow> sliding_windows(const EegRecording& rec,
                                             std::size_t window_len = kDefaultWindowLen,
                                             std::size_t hop = kDefaultHop);

using FeatureVector = std::array<double, 2>;

enum : int { kEyesOpenLabel = 0, kEyesClosedLabel = 1 };

/// (log10(1 + total PSD power of O1), same for O2) per window.
struct LabeledFeatureSet {
  std::vector<FeatureVector> features;
  std::vector<int> labels;
  std::size_t window_len{kDefaultWindowLen};
  std::size_t hop{kDefaultHop};

  std::size_t size() const { return features.size(); }
  bool empty() const { return features.empty(); }
  void append(const LabeledFeatureSet& other);
  void push_back(const FeatureVector& f, int label) {
    features.push_back(f);
    labels.push_back(label);
  }
};

/// log10(1 + total Welch power) of one window, single Hann segment.
double log_total_power(std::span<const double> window, double rate);

/// One label per window. Throws std::invalid_argument when the label count
/// does not match the window count.
LabeledFeatureSet extract_features(const EegRecording& rec, std::span<const int> labels,
                                   std::size_t window_len = kDefaultWindowLen,
                                   std::size_t hop = kDefaultHop);
/// Every window gets `label`.
LabeledFeatureSet extract_features(const EegRecording& rec, int label,
                                   std::size_t window_len = kDefaultWindowLen,
                                   std::size_t hop = kDefaultHop);

/// `psd_o1,psd_o2,label` with a header row.
std::string features_csv(const LabeledFeatureSet& set);
LabeledFeatureSet parse_features_csv(std::string_view text);

}  // namespace epoc
