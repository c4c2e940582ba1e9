#include "epoc/artifacts.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "epoc/channel_layout.hpp"
#include "epoc/preprocess.hpp"
#include "epoc/spectral.hpp"

namespace epoc {
namespace {

double median_inplace(std::vector<double>& v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0)
    m = (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid))) / 2.0;
  return m;
}

double median_range(std::span<const double> x, std::vector<double>& scratch) {
  scratch.assign(x.begin(), x.end());
  return median_inplace(scratch);
}

std::size_t samples_for(double seconds, double rate) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(seconds * rate)));
}

void require_one_second(const EegRecording& rec) {
  validate(rec);
  if (rec.num_samples() < samples_for(1.0, rec.rate))
    throw std::invalid_argument("artifact detection needs at least 1 s of data");
}

struct WindowFlag {
  std::size_t window;
  std::vector<std::size_t> channels;
  double score;
};

// Merges runs of consecutive flagged windows into events.
std::vector<ArtifactEvent> merge_windows(std::vector<WindowFlag> flags, ArtifactKind kind,
                                         std::size_t win, std::size_t hop, double rate) {
  std::vector<ArtifactEvent> events;
  std::sort(flags.begin(), flags.end(),
            [](const auto& a, const auto& b) { return a.window < b.window; });
  std::size_t last_window = 0;
  for (const auto& f : flags) {
    const double start = static_cast<double>(f.window * hop) / rate;
    const double end = static_cast<double>(f.window * hop + win) / rate;
    if (!events.empty() && f.window <= last_window + 1) {
      auto& ev = events.back();
      ev.t_end = std::max(ev.t_end, end);
      ev.score = std::max(ev.score, f.score);
      ev.channels.insert(ev.channels.end(), f.channels.begin(), f.channels.end());
    } else {
      events.push_back({kind, start, end, f.channels, f.score});
    }
    last_window = f.window;
  }
  for (auto& ev : events) {
    std::sort(ev.channels.begin(), ev.channels.end());
    ev.channels.erase(std::unique(ev.channels.begin(), ev.channels.end()), ev.channels.end());
  }
  return events;
}

}  // namespace

std::vector<double> running_median(std::span<const double> signal, std::size_t width) {
  if (width == 0) throw std::invalid_argument("running median width must be positive");
  const std::size_t half = width / 2;
  std::vector<double> out(signal.size());
  std::vector<double> scratch;
  for (std::size_t n = 0; n < signal.size(); ++n) {
    const std::size_t lo = n >= half ? n - half : 0;
    const std::size_t hi = std::min(signal.size(), n + half + 1);
    out[n] = median_range(signal.subspan(lo, hi - lo), scratch);
  }
  return out;
}

std::vector<ArtifactEvent> detect_disconnection(const EegRecording& rec, double jump_threshold) {
  require_one_second(rec);
  const std::size_t win = samples_for(0.25, rec.rate);
  const std::size_t total = rec.num_samples();
  std::vector<ArtifactEvent> events;
  std::vector<double> scratch;

  for (std::size_t c = 0; c < rec.num_channels(); ++c) {
    const std::span<const double> x = rec.data[c];
    for (std::size_t n = win; n + win <= total; ++n) {
      const double before = median_range(x.subspan(n - win, win), scratch);
      if (!(std::abs(x[n] - before) > jump_threshold)) continue;
      const double after = median_range(x.subspan(n, win), scratch);
      const double shift = std::abs(after - before);
      if (!(shift > jump_threshold)) continue;
      events.push_back({ArtifactKind::Disconnection, static_cast<double>(n) / rec.rate,
                        static_cast<double>(n + win) / rec.rate, {c}, shift / jump_threshold});
      n += win - 1;
    }
  }
  std::sort(events.begin(), events.end(),
            [](const auto& a, const auto& b) { return a.t_start < b.t_start; });
  return events;
}

std::vector<ArtifactEvent> detect_ocular(const EegRecording& rec, double amp_threshold) {
  require_one_second(rec);
  static const std::array<std::size_t, 3> kLeft = {channel_index("AF3"), channel_index("F7"),
                                                   channel_index("F3")};
  static const std::array<std::size_t, 3> kRight = {channel_index("AF4"), channel_index("F8"),
                                                    channel_index("F4")};

  const std::size_t total = rec.num_samples();
  const auto spec = FilterSpec::band_pass(0.2, 5.0);
  std::vector<std::vector<double>> slow(rec.num_channels());
  for (std::size_t c = 0; c < rec.num_channels(); ++c)
    slow[c] = filter_signal(rec.data[c], rec.rate, spec);

  // Group median rather than mean: a level step on one electrode must not
  // read as a deflection of its whole side.
  auto median3 = [](double a, double b, double c) {
    return std::max(std::min(a, b), std::min(std::max(a, b), c));
  };
  std::vector<double> left(total, 0.0), right(total, 0.0);
  for (std::size_t n = 0; n < total; ++n) {
    double common = 0.0;
    for (const auto& ch : slow) common += ch[n];
    common /= static_cast<double>(slow.size());
    left[n] = median3(slow[kLeft[0]][n], slow[kLeft[1]][n], slow[kLeft[2]][n]) - common;
    right[n] = median3(slow[kRight[0]][n], slow[kRight[1]][n], slow[kRight[2]][n]) - common;
  }

  const std::size_t win = samples_for(0.125, rec.rate);
  const std::size_t hop = std::max<std::size_t>(1, win / 2);
  std::vector<WindowFlag> flags;
  std::vector<std::size_t> frontal(kLeft.begin(), kLeft.end());
  frontal.insert(frontal.end(), kRight.begin(), kRight.end());
  for (std::size_t w = 0; w * hop + win <= total; ++w) {
    double l = 0.0, r = 0.0;
    for (std::size_t k = 0; k < win; ++k) {
      l += left[w * hop + k];
      r += right[w * hop + k];
    }
    l /= static_cast<double>(win);
    r /= static_cast<double>(win);
    const bool opposite = (l > amp_threshold && r < -amp_threshold) ||
                          (l < -amp_threshold && r > amp_threshold);
    if (opposite)
      flags.push_back({w, frontal, std::min(std::abs(l), std::abs(r)) / amp_threshold});
  }
  return merge_windows(std::move(flags), ArtifactKind::Ocular, win, hop, rec.rate);
}

std::vector<ArtifactEvent> detect_muscle(const EegRecording& rec, double power_ratio) {
  require_one_second(rec);
  const std::size_t win = samples_for(0.25, rec.rate);
  const std::size_t total = rec.num_samples();
  const std::size_t windows = total / win;
  const auto spec = FilterSpec::band_pass(20.0, 45.0);

  std::vector<WindowFlag> per_window(windows);
  for (std::size_t w = 0; w < windows; ++w) per_window[w] = {w, {}, 0.0};

  for (std::size_t c = 0; c < rec.num_channels(); ++c) {
    const auto& x = rec.data[c];
    const auto baseline = running_median(x, 9);
    std::vector<double> residual(total);
    for (std::size_t n = 0; n < total; ++n) residual[n] = x[n] - baseline[n];
    const auto y = filter_signal(residual, rec.rate, spec);

    std::vector<double> power(windows, 0.0);
    for (std::size_t w = 0; w < windows; ++w) {
      for (std::size_t k = 0; k < win; ++k) power[w] += y[w * win + k] * y[w * win + k];
      power[w] /= static_cast<double>(win);
    }
    std::vector<double> sorted = power;
    const double median = median_inplace(sorted);
    for (std::size_t w = 0; w < windows; ++w) {
      if (power[w] > 0.0 && power[w] > power_ratio * median) {
        per_window[w].channels.push_back(c);
        const double ratio = median > 0.0 ? power[w] / median : power[w];
        per_window[w].score = std::max(per_window[w].score, ratio);
      }
    }
  }

  std::vector<WindowFlag> flags;
  for (auto& f : per_window)
    if (!f.channels.empty()) flags.push_back(std::move(f));
  return merge_windows(std::move(flags), ArtifactKind::Muscle, win, win, rec.rate);
}

std::vector<ArtifactEvent> detect_all(const EegRecording& rec) {
  auto events = detect_ocular(rec);
  auto muscle = detect_muscle(rec);
  auto disc = detect_disconnection(rec);
  events.insert(events.end(), muscle.begin(), muscle.end());
  events.insert(events.end(), disc.begin(), disc.end());
  std::stable_sort(events.begin(), events.end(),
                   [](const auto& a, const auto& b) { return a.t_start < b.t_start; });
  return events;
}

DetectionScore& DetectionScore::operator+=(const DetectionScore& o) {
  truth_total += o.truth_total;
  truth_found += o.truth_found;
  detected_total += o.detected_total;
  detected_correct += o.detected_correct;
  return *this;
}

DetectionScore score_detections(std::span<const ArtifactEvent> truth,
                                std::span<const ArtifactEvent> detected) {
  auto matches = [](const ArtifactEvent& a, const ArtifactEvent& b) {
    return a.kind == b.kind && a.overlaps(b);
  };
  DetectionScore s;
  s.truth_total = truth.size();
  s.detected_total = detected.size();
  for (const auto& t : truth)
    if (std::any_of(detected.begin(), detected.end(), [&](const auto& d) { return matches(t, d); }))
      ++s.truth_found;
  for (const auto& d : detected)
    if (std::any_of(truth.begin(), truth.end(), [&](const auto& t) { return matches(t, d); }))
      ++s.detected_correct;
  return s;
}

std::string events_csv(std::span<const ArtifactEvent> events) {
  std::string out = "kind,t_start,t_end,channels,score\n";
  for (const auto& ev : events) {
    out += std::string(to_string(ev.kind)) + "," + format_number(ev.t_start) + "," +
           format_number(ev.t_end) + ",";
    for (std::size_t i = 0; i < ev.channels.size(); ++i) {
      if (i) out += ';';
      out += kChannelLabels.at(ev.channels[i]);
    }
    out += "," + format_number(ev.score) + "\n";
  }
  return out;
}

}  // namespace epoc
