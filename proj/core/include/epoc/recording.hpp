#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace epoc {

inline constexpr std::size_t kNumChannels = 14;
inline constexpr double kSampleRateHz = 128.0;

/// Channel order of the headset data frame: starts in AF3, ends in AF4.
inline constexpr std::array<std::string_view, kNumChannels> kChannelLabels = {
    "AF3", "F7", "F3", "FC5", "T7", "P7", "O1",
    "O2",  "P8", "T8", "FC6", "F4", "F8", "AF4"};

enum class ArtifactKind { Ocular, Muscle, Disconnection };

std::string_view to_string(ArtifactKind kind);
ArtifactKind artifact_kind_from_string(std::string_view text);

/// A time interval flagged as artifact. Ground-truth events carry score 0.
struct ArtifactEvent {
  ArtifactKind kind{ArtifactKind::Ocular};
  double t_start{0.0};
  double t_end{0.0};
  std::vector<std::size_t> channels;
  double score{0.0};

  bool overlaps(const ArtifactEvent& other) const {
    return t_start < other.t_end && other.t_start < t_end;
  }
  bool operator==(const ArtifactEvent&) const = default;
};

struct GyroSample {
  int x{0};
  int y{0};
  bool operator==(const GyroSample&) const = default;
};

/// Channels x samples matrix in microvolts.
struct EegRecording {
  std::vector<std::vector<double>> data;
  double rate{kSampleRateHz};
  std::vector<std::string> labels;
  std::vector<ArtifactEvent> annotations;
  std::vector<GyroSample> gyro;  // one entry per sample when present

  std::size_t num_channels() const { return data.size(); }
  std::size_t num_samples() const { return data.empty() ? 0 : data.front().size(); }
  double duration_s() const { return static_cast<double>(num_samples()) / rate; }
};

/// Zero-filled 14-channel recording with the headset labels.
EegRecording make_recording(std::size_t samples, double rate = kSampleRateHz);

/// Throws std::invalid_argument if channel lengths differ, the rate is not
/// positive or the labels do not follow the headset order.
void validate(const EegRecording& rec);

}  // namespace epoc
