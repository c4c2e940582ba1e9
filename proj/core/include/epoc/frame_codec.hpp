#pragma once

// Wire codec for the 33-octet headset frame. The bit layout is documented in
// FRAME_FORMAT.md at the repository root.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "epoc/recording.hpp"

namespace epoc {

inline constexpr std::size_t kFrameSize = 33;
inline constexpr std::size_t kMaskKeySize = 16;
inline constexpr int kCounterModulus = 128;
inline constexpr std::uint16_t kMaxCount = 16383;  // 14 usable bits
inline constexpr std::uint16_t kMidScaleCount = 8192;
inline constexpr double kDefaultLsbMicrovolts = 1.95;
inline constexpr std::size_t kMaxRepairableGap = 64;

using RawFrame = std::array<std::uint8_t, kFrameSize>;
using MaskKey = std::array<std::uint8_t, kMaskKeySize>;

struct DecodedFrame {
  int counter{0};           // 0..127, data frames only
  bool is_battery{false};
  int battery_pct{0};       // 0..100, battery frames only
  std::array<std::uint16_t, kNumChannels> channels{};
  int gyro_x{0};            // -128..127
  int gyro_y{0};            // -128..127
  int quality_channel{0};   // counter mod 14 (0 for battery frames)
  std::uint16_t quality_value{0};

  bool operator==(const DecodedFrame&) const = default;
};

/// Builds a data frame with the quality channel derived from the counter.
DecodedFrame make_data_frame(int counter, const std::array<std::uint16_t, kNumChannels>& channels,
                             int gyro_x = 0, int gyro_y = 0, std::uint16_t quality_value = 0);
DecodedFrame make_battery_frame(int battery_pct);

struct DecodeResult {
  DecodedFrame frame;
  std::vector<std::string> warnings;  // non-zero pad bits and similar
  bool ok() const { return warnings.empty(); }
};

/// Throws std::invalid_argument when a field is out of range.
RawFrame encode_frame(const DecodedFrame& frame);
DecodeResult decode_frame(const RawFrame& raw);

/// 33-octet keystream derived from the key with a splitmix64 generator.
RawFrame mask_keystream(const MaskKey& key);
RawFrame mask_frame(const RawFrame& raw, const MaskKey& key);
RawFrame unmask_frame(const RawFrame& raw, const MaskKey& key);

/// Parses 32 hex digits.
MaskKey parse_mask_key(const std::string& hex);
std::string format_mask_key(const MaskKey& key);

inline constexpr int next_counter(int counter) { return (counter + 1) % kCounterModulus; }

/// Number of frames from `from` to `to` under wrap-at-128 arithmetic (0..127).
inline constexpr int counter_distance(int from, int to) {
  return ((to - from) % kCounterModulus + kCounterModulus) % kCounterModulus;
}

double counts_to_microvolts(int count, double lsb_uv = kDefaultLsbMicrovolts);

/// Inverse of counts_to_microvolts with rounding and clamping to 0..16383.
std::uint16_t microvolts_to_counts(double microvolts, double lsb_uv = kDefaultLsbMicrovolts);

struct Gap {
  std::size_t position{0};  // sample index of the first missing frame
  std::size_t missing{0};
  bool operator==(const Gap&) const = default;
};

struct DropReport {
  std::size_t expected_frames{0};
  std::size_t received_frames{0};
  std::vector<Gap> gaps;
  std::size_t repaired{0};

  std::size_t missing_total() const;
  bool balanced() const { return expected_frames == received_frames + missing_total(); }
};

struct AssembledStream {
  EegRecording recording;
  DropReport report;
  std::optional<int> battery_pct;  // last battery level seen in the stream
};

/// Reorders nothing: frames are taken in arrival order. Gaps in the counter
/// sequence are filled by per-channel linear interpolation. Throws
/// std::invalid_argument on an empty stream and std::runtime_error when a gap
/// exceeds kMaxRepairableGap frames.
AssembledStream assemble_stream(std::span<const DecodedFrame> frames,
                                double lsb_uv = kDefaultLsbMicrovolts);

/// Quantizes a recording into consecutive data frames starting at `first_counter`.
std::vector<DecodedFrame> frames_from_recording(const EegRecording& rec,
                                                double lsb_uv = kDefaultLsbMicrovolts,
                                                int first_counter = 0,
                                                std::uint16_t quality_value = 0);

/// `.efr` capture files: concatenated raw frames, no header.
void write_capture(const std::filesystem::path& path, std::span<const RawFrame> frames);
std::vector<RawFrame> read_capture(const std::filesystem::path& path);

}  // namespace epoc
