#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "epoc/recording.hpp"

namespace epoc {

inline constexpr double kDefaultJumpThresholdUv = 150.0;
inline constexpr double kDefaultOcularThresholdUv = 30.0;
inline constexpr double kDefaultMusclePowerRatio = 5.0;

/// Level shifts: |x[n] - median(previous 0.25 s)| above the threshold, with the
/// median of the following 0.25 s also shifted by more than the threshold.
/// One event per channel per shift.
std::vector<ArtifactEvent> detect_disconnection(const EegRecording& rec,
                                                double jump_threshold = kDefaultJumpThresholdUv);

/// Opposite-polarity slow deflections of the left ({AF3, F7, F3}) and right
/// ({AF4, F8, F4}) frontal groups, each summarized by its per-sample median.
/// The recording is band-passed to 0.2-5 Hz and re-referenced to the common
/// average before thresholding.
std::vector<ArtifactEvent> detect_ocular(const EegRecording& rec,
                                         double amp_threshold = kDefaultOcularThresholdUv);

/// 0.25 s windows whose 20-45 Hz power exceeds `power_ratio` times the
/// channel's median window power. A 9-sample running-median residual is used
/// as input so level steps do not register as broadband bursts.
std::vector<ArtifactEvent> detect_muscle(const EegRecording& rec,
                                         double power_ratio = kDefaultMusclePowerRatio);

/// All three detectors with default thresholds, ordered by t_start.
std::vector<ArtifactEvent> detect_all(const EegRecording& rec);

/// Interval-overlap matching of detections to ground truth of the same kind.
struct DetectionScore {
  std::size_t truth_total{0};
  std::size_t truth_found{0};
  std::size_t detected_total{0};
  std::size_t detected_correct{0};

  double recall() const { return truth_total ? double(truth_found) / double(truth_total) : 1.0; }
  double precision() const {
    return detected_total ? double(detected_correct) / double(detected_total) : 1.0;
  }
  DetectionScore& operator+=(const DetectionScore& o);
};

DetectionScore score_detections(std::span<const ArtifactEvent> truth,
                                std::span<const ArtifactEvent> detected);

/// `kind,t_start,t_end,channels,score`; channel labels joined with ';'.
std::string events_csv(std::span<const ArtifactEvent> events);

std::vector<double> running_median(std::span<const double> signal, std::size_t width);

}  // namespace epoc
