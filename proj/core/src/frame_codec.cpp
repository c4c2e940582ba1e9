#include "epoc/frame_codec.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "epoc/errors.hpp"

namespace epoc {
namespace {

constexpr std::size_t kChannelBitOffset = 8;  // byte 1, MSB first
constexpr std::size_t kChannelBits = 14;
constexpr std::size_t kGyroXByte = 26;
constexpr std::size_t kGyroYByte = 27;
constexpr std::size_t kQualityByte = 28;
constexpr std::size_t kReservedByte = 30;

void put_bits(RawFrame& raw, std::size_t bit_offset, std::size_t width, std::uint32_t value) {
  for (std::size_t i = 0; i < width; ++i) {
    const std::size_t bit = bit_offset + i;
    const bool set = (value >> (width - 1 - i)) & 1u;
    if (set) raw[bit / 8] |= static_cast<std::uint8_t>(0x80u >> (bit % 8));
  }
}

std::uint32_t get_bits(const RawFrame& raw, std::size_t bit_offset, std::size_t width) {
  std::uint32_t value = 0;
  for (std::size_t i = 0; i < width; ++i) {
    const std::size_t bit = bit_offset + i;
    value = (value << 1) | ((raw[bit / 8] >> (7 - bit % 8)) & 1u);
  }
  return value;
}

std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t load_le64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

DecodedFrame make_data_frame(int counter, const std::array<std::uint16_t, kNumChannels>& channels,
                             int gyro_x, int gyro_y, std::uint16_t quality_value) {
  DecodedFrame f;
  f.counter = counter;
  f.channels = channels;
  f.gyro_x = gyro_x;
  f.gyro_y = gyro_y;
  f.quality_channel = counter % static_cast<int>(kNumChannels);
  f.quality_value = quality_value;
  return f;
}

DecodedFrame make_battery_frame(int battery_pct) {
  DecodedFrame f;
  f.is_battery = true;
  f.battery_pct = battery_pct;
  return f;
}

RawFrame encode_frame(const DecodedFrame& frame) {
  RawFrame raw{};
  if (frame.is_battery) {
    if (frame.battery_pct < 0 || frame.battery_pct > 100)
      throw std::invalid_argument("battery percentage out of range: " +
                                  std::to_string(frame.battery_pct));
    if (frame.counter != 0 || frame.quality_channel != 0)
      throw std::invalid_argument("battery frames carry no counter or quality channel");
    raw[0] = static_cast<std::uint8_t>(0x80 | frame.battery_pct);
  } else {
    if (frame.counter < 0 || frame.counter >= kCounterModulus)
      throw std::invalid_argument("counter out of range: " + std::to_string(frame.counter));
    if (frame.quality_channel != frame.counter % static_cast<int>(kNumChannels))
      throw std::invalid_argument("quality channel must equal counter mod 14");
    raw[0] = static_cast<std::uint8_t>(frame.counter);
  }
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    if (frame.channels[c] > kMaxCount)
      throw std::invalid_argument("channel " + std::string(kChannelLabels[c]) +
                                  " count exceeds 14 bits: " + std::to_string(frame.channels[c]));
    put_bits(raw, kChannelBitOffset + c * kChannelBits, kChannelBits, frame.channels[c]);
  }
  if (frame.gyro_x < -128 || frame.gyro_x > 127 || frame.gyro_y < -128 || frame.gyro_y > 127)
    throw std::invalid_argument("gyro value out of range");
  raw[kGyroXByte] = static_cast<std::uint8_t>(frame.gyro_x + 128);
  raw[kGyroYByte] = static_cast<std::uint8_t>(frame.gyro_y + 128);
  if (frame.quality_value > kMaxCount)
    throw std::invalid_argument("quality value exceeds 14 bits");
  raw[kQualityByte] = static_cast<std::uint8_t>(frame.quality_value >> 8);
  raw[kQualityByte + 1] = static_cast<std::uint8_t>(frame.quality_value & 0xFF);
  return raw;
}

DecodeResult decode_frame(const RawFrame& raw) {
  DecodeResult out;
  DecodedFrame& f = out.frame;
  if (raw[0] & 0x80) {
    f.is_battery = true;
    f.battery_pct = raw[0] & 0x7F;
    if (f.battery_pct > 100)
      out.warnings.push_back("battery percentage above 100: " + std::to_string(f.battery_pct));
  } else {
    f.counter = raw[0];
    f.quality_channel = f.counter % static_cast<int>(kNumChannels);
  }
  for (std::size_t c = 0; c < kNumChannels; ++c)
    f.channels[c] = static_cast<std::uint16_t>(
        get_bits(raw, kChannelBitOffset + c * kChannelBits, kChannelBits));
  if (raw[25] & 0x0F) out.warnings.push_back("non-zero channel padding bits in byte 25");
  f.gyro_x = static_cast<int>(raw[kGyroXByte]) - 128;
  f.gyro_y = static_cast<int>(raw[kGyroYByte]) - 128;
  if (raw[kQualityByte] & 0xC0) out.warnings.push_back("non-zero quality padding bits in byte 28");
  f.quality_value =
      static_cast<std::uint16_t>(((raw[kQualityByte] & 0x3F) << 8) | raw[kQualityByte + 1]);
  for (std::size_t i = kReservedByte; i < kFrameSize; ++i)
    if (raw[i] != 0) {
      out.warnings.push_back("non-zero reserved byte " + std::to_string(i));
    }
  return out;
}

RawFrame mask_keystream(const MaskKey& key) {
  std::uint64_t state = load_le64(key.data()) ^ splitmix64_mix(load_le64(key.data() + 8));
  RawFrame stream{};
  std::size_t pos = 0;
  while (pos < kFrameSize) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = splitmix64_mix(state);
    for (int b = 0; b < 8 && pos < kFrameSize; ++b, ++pos) {
      stream[pos] = static_cast<std::uint8_t>(z & 0xFF);
      z >>= 8;
    }
  }
  return stream;
}

RawFrame mask_frame(const RawFrame& raw, const MaskKey& key) {
  const RawFrame stream = mask_keystream(key);
  RawFrame out;
  for (std::size_t i = 0; i < kFrameSize; ++i) out[i] = raw[i] ^ stream[i];
  return out;
}

RawFrame unmask_frame(const RawFrame& raw, const MaskKey& key) { return mask_frame(raw, key); }

MaskKey parse_mask_key(const std::string& hex) {
  if (hex.size() != 2 * kMaskKeySize)
    throw std::invalid_argument("mask key must be 32 hex digits, got " +
                                std::to_string(hex.size()) + " characters");
  MaskKey key{};
  for (std::size_t i = 0; i < kMaskKeySize; ++i) {
    const std::string byte = hex.substr(2 * i, 2);
    if (!std::isxdigit(static_cast<unsigned char>(byte[0])) ||
        !std::isxdigit(static_cast<unsigned char>(byte[1])))
      throw std::invalid_argument("mask key contains a non-hex digit: '" + byte + "'");
    key[i] = static_cast<std::uint8_t>(std::stoul(byte, nullptr, 16));
  }
  return key;
}

std::string format_mask_key(const MaskKey& key) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (auto b : key) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

double counts_to_microvolts(int count, double lsb_uv) {
  if (count < 0 || count > kMaxCount)
    throw std::out_of_range("raw count out of 14-bit range: " + std::to_string(count));
  return static_cast<double>(count - kMidScaleCount) * lsb_uv;
}

std::uint16_t microvolts_to_counts(double microvolts, double lsb_uv) {
  if (!(lsb_uv > 0.0)) throw std::invalid_argument("lsb_uv must be positive");
  const double count = std::round(microvolts / lsb_uv) + kMidScaleCount;
  return static_cast<std::uint16_t>(std::clamp(count, 0.0, static_cast<double>(kMaxCount)));
}

std::size_t DropReport::missing_total() const {
  std::size_t total = 0;
  for (const auto& g : gaps) total += g.missing;
  return total;
}

AssembledStream assemble_stream(std::span<const DecodedFrame> frames, double lsb_uv) {
  if (frames.empty()) throw std::invalid_argument("assemble_stream: no frames");
  AssembledStream out;
  EegRecording& rec = out.recording;
  rec = make_recording(0);
  DropReport& report = out.report;

  const DecodedFrame* prev = nullptr;
  for (const DecodedFrame& f : frames) {
    if (f.is_battery) {
      out.battery_pct = f.battery_pct;
      continue;
    }
    if (prev) {
      const int distance = counter_distance(prev->counter, f.counter);
      const std::size_t missing = distance == 0 ? kCounterModulus - 1 : distance - 1;
      if (missing > kMaxRepairableGap)
        throw std::runtime_error("counter gap of " + std::to_string(missing) +
                                 " frames after counter " + std::to_string(prev->counter) +
                                 " exceeds the repairable limit (disconnection?)");
      if (missing > 0) {
        report.gaps.push_back({rec.num_samples(), missing});
        for (std::size_t k = 1; k <= missing; ++k) {
          const double frac = static_cast<double>(k) / static_cast<double>(missing + 1);
          for (std::size_t c = 0; c < kNumChannels; ++c) {
            const double a = counts_to_microvolts(prev->channels[c], lsb_uv);
            const double b = counts_to_microvolts(f.channels[c], lsb_uv);
            rec.data[c].push_back(a + (b - a) * frac);
          }
          rec.gyro.push_back({static_cast<int>(std::lround(prev->gyro_x + (f.gyro_x - prev->gyro_x) * frac)),
                              static_cast<int>(std::lround(prev->gyro_y + (f.gyro_y - prev->gyro_y) * frac))});
        }
        report.repaired += missing;
      }
    }
    for (std::size_t c = 0; c < kNumChannels; ++c)
      rec.data[c].push_back(counts_to_microvolts(f.channels[c], lsb_uv));
    rec.gyro.push_back({f.gyro_x, f.gyro_y});
    ++report.received_frames;
    prev = &f;
  }
  if (report.received_frames == 0)
    throw std::invalid_argument("assemble_stream: stream holds only battery frames");
  report.expected_frames = rec.num_samples();
  return out;
}

std::vector<DecodedFrame> frames_from_recording(const EegRecording& rec, double lsb_uv,
                                                int first_counter, std::uint16_t quality_value) {
  validate(rec);
  std::vector<DecodedFrame> frames;
  frames.reserve(rec.num_samples());
  int counter = first_counter % kCounterModulus;
  for (std::size_t n = 0; n < rec.num_samples(); ++n) {
    std::array<std::uint16_t, kNumChannels> counts{};
    for (std::size_t c = 0; c < kNumChannels; ++c)
      counts[c] = microvolts_to_counts(rec.data[c][n], lsb_uv);
    int gx = 0, gy = 0;
    if (!rec.gyro.empty()) {
      gx = std::clamp(rec.gyro[n].x, -128, 127);
      gy = std::clamp(rec.gyro[n].y, -128, 127);
    }
    frames.push_back(make_data_frame(counter, counts, gx, gy, quality_value));
    counter = next_counter(counter);
  }
  return frames;
}

void write_capture(const std::filesystem::path& path, std::span<const RawFrame> frames) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open capture for writing");
  for (const auto& f : frames)
    out.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(f.size()));
  if (!out) throw IoError(path, "write failed");
}

std::vector<RawFrame> read_capture(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open capture");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() % kFrameSize != 0)
    throw IoError(path, "capture size " + std::to_string(bytes.size()) +
                            " is not a multiple of 33 octets");
  std::vector<RawFrame> frames(bytes.size() / kFrameSize);
  for (std::size_t i = 0; i < frames.size(); ++i)
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(i * kFrameSize), kFrameSize,
                frames[i].begin());
  return frames;
}

}  // namespace epoc
