#include "epoc/recording.hpp"

#include <stdexcept>
#include <string>

namespace epoc {

std::string_view to_string(ArtifactKind kind) {
  switch (kind) {
    case ArtifactKind::Ocular: return "ocular";
    case ArtifactKind::Muscle: return "muscle";
    case ArtifactKind::Disconnection: return "disconnection";
  }
  return "unknown";
}

ArtifactKind artifact_kind_from_string(std::string_view text) {
  if (text == "ocular") return ArtifactKind::Ocular;
  if (text == "muscle") return ArtifactKind::Muscle;
  if (text == "disconnection") return ArtifactKind::Disconnection;
  throw std::invalid_argument("unknown artifact kind '" + std::string(text) + "'");
}

EegRecording make_recording(std::size_t samples, double rate) {
  EegRecording rec;
  rec.rate = rate;
  rec.data.assign(kNumChannels, std::vector<double>(samples, 0.0));
  rec.labels.assign(kChannelLabels.begin(), kChannelLabels.end());
  return rec;
}

void validate(const EegRecording& rec) {
  if (!(rec.rate > 0.0)) throw std::invalid_argument("recording rate must be positive");
  if (rec.data.size() != kNumChannels)
    throw std::invalid_argument("recording must have 14 channels, got " +
                                std::to_string(rec.data.size()));
  if (rec.labels.size() != kNumChannels)
    throw std::invalid_argument("recording must carry 14 channel labels");
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    if (rec.labels[c] != kChannelLabels[c])
      throw std::invalid_argument("channel " + std::to_string(c) + " is labelled '" +
                                  rec.labels[c] + "', expected '" +
                                  std::string(kChannelLabels[c]) + "'");
    if (rec.data[c].size() != rec.data[0].size())
      throw std::invalid_argument("channel " + rec.labels[c] + " has a different length");
  }
  if (!rec.gyro.empty() && rec.gyro.size() != rec.num_samples())
    throw std::invalid_argument("gyro trace length does not match sample count");
}

}  // namespace epoc
