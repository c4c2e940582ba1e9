#include "epoc/features.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "epoc/channel_layout.hpp"
#include "epoc/errors.hpp"
#include "epoc/spectral.hpp"

namespace epoc {

std::vector<std::size_t> window_starts(std::size_t n, std::size_t window_len, std::size_t hop) {
  if (window_len == 0) throw std::invalid_argument("window length must be positive");
  if (hop == 0) throw std::invalid_argument("hop must be at least 1");
  if (window_len > n)
    throw std::invalid_argument("window of " + std::to_string(window_len) +
                                " samples longer than recording of " + std::to_string(n));
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + window_len <= n; s += hop) starts.push_back(s);
  return starts;
}

std::vector<RecordingWindow> sliding_windows(const EegRecording& rec, std::size_t window_len,
                                             std::size_t hop) {
  std::vector<RecordingWindow> out;
  for (auto start : window_starts(rec.num_samples(), window_len, hop)) {
    RecordingWindow w;
    w.start = start;
    for (const auto& ch : rec.data)
      w.channels.push_back(std::span<const double>(ch).subspan(start, window_len));
    out.push_back(std::move(w));
  }
  return out;
}

void LabeledFeatureSet::append(const LabeledFeatureSet& other) {
  features.insert(features.end(), other.features.begin(), other.features.end());
  labels.insert(labels.end(), other.labels.begin(), other.labels.end());
}

double log_total_power(std::span<const double> window, double rate) {
  const auto psd = welch_psd(window, rate, window.size(), kDefaultOverlap);
  return std::log10(1.0 + band_power(psd, 0.0, rate / 2.0));
}

LabeledFeatureSet extract_features(const EegRecording& rec, std::span<const int> labels,
                                   std::size_t window_len, std::size_t hop) {
  if (rec.labels.size() != rec.data.size())
    throw std::invalid_argument("recording labels do not match its channels");
  auto find = [&](std::string_view name) {
    for (std::size_t c = 0; c < rec.labels.size(); ++c)
      if (rec.labels[c] == name) return c;
    throw std::invalid_argument("recording has no " + std::string(name) + " channel");
  };
  const std::size_t o1 = find("O1");
  const std::size_t o2 = find("O2");

  const auto starts = window_starts(rec.num_samples(), window_len, hop);
  if (labels.size() != starts.size())
    throw std::invalid_argument("expected " + std::to_string(starts.size()) +
                                " window labels, got " + std::to_string(labels.size()));
  LabeledFeatureSet set;
  set.window_len = window_len;
  set.hop = hop;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const auto a = std::span<const double>(rec.data[o1]).subspan(starts[i], window_len);
    const auto b = std::span<const double>(rec.data[o2]).subspan(starts[i], window_len);
    set.push_back({log_total_power(a, rec.rate), log_total_power(b, rec.rate)}, labels[i]);
  }
  return set;
}

LabeledFeatureSet extract_features(const EegRecording& rec, int label, std::size_t window_len,
                                   std::size_t hop) {
  const auto count = window_starts(rec.num_samples(), window_len, hop).size();
  const std::vector<int> labels(count, label);
  return extract_features(rec, labels, window_len, hop);
}

std::string features_csv(const LabeledFeatureSet& set) {
  std::string out = "psd_o1,psd_o2,label\n";
  for (std::size_t i = 0; i < set.size(); ++i)
    out += format_number(set.features[i][0]) + "," + format_number(set.features[i][1]) + "," +
           std::to_string(set.labels[i]) + "\n";
  return out;
}

LabeledFeatureSet parse_features_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  LabeledFeatureSet set;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "psd_o1,psd_o2,label")
        throw ParseError(line_no, "expected header 'psd_o1,psd_o2,label'");
      continue;
    }
    std::istringstream fields(line);
    std::string a, b, c, extra;
    if (!std::getline(fields, a, ',') || !std::getline(fields, b, ',') ||
        !std::getline(fields, c, ',') || std::getline(fields, extra, ','))
      throw ParseError(line_no, "expected 3 comma-separated fields");
    try {
      std::size_t used = 0;
      const double f1 = std::stod(a, &used);
      if (used != a.size()) throw std::invalid_argument(a);
      const double f2 = std::stod(b, &used);
      if (used != b.size()) throw std::invalid_argument(b);
      const int label = std::stoi(c, &used);
      if (used != c.size() || (label != 0 && label != 1)) throw std::invalid_argument(c);
      set.push_back({f1, f2}, label);
    } catch (const std::exception&) {
      throw ParseError(line_no, "malformed feature row '" + line + "'");
    }
  }
  return set;
}

}  // namespace epoc
