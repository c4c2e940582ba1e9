#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>

#include "epoc/errors.hpp"
#include "epoc/frame_codec.hpp"
#include "test_util.hpp"

using namespace epoc;

namespace {

using Counts = std::array<std::uint16_t, kNumChannels>;

// Bit-by-bit reference packer: channel c occupies payload bits 14c..14c+13,
// most significant bit first, payload starting at byte 1.
std::array<std::uint8_t, 25> reference_payload(const Counts& ch) {
  std::array<std::uint8_t, 25> out{};
  for (std::size_t c = 0; c < kNumChannels; ++c)
    for (int b = 0; b < 14; ++b) {
      const bool bit = (ch[c] >> (13 - b)) & 1;
      const std::size_t pos = c * 14 + static_cast<std::size_t>(b);
      if (bit) out[pos / 8] |= static_cast<std::uint8_t>(0x80 >> (pos % 8));
    }
  return out;
}

DecodedFrame random_frame(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(0, kMaxCount), ctr(0, 127), gyro(-128, 127),
      q(0, kMaxCount), pct(0, 100), kind(0, 9);
  if (kind(rng) == 0) return make_battery_frame(pct(rng));
  Counts ch{};
  for (auto& v : ch) v = static_cast<std::uint16_t>(count(rng));
  return make_data_frame(ctr(rng), ch, gyro(rng), gyro(rng), static_cast<std::uint16_t>(q(rng)));
}

DecodedFrame frame_with(int counter, std::uint16_t ch0) {
  Counts ch{};
  ch.fill(kMidScaleCount);
  ch[0] = ch0;
  return make_data_frame(counter, ch, 0, 0, 0);
}

MaskKey random_key(std::mt19937_64& rng) {
  MaskKey k{};
  for (auto& b : k) b = static_cast<std::uint8_t>(rng());
  return k;
}

}  // namespace

TEST_CASE("all-zero data frame") {
  const auto raw = encode_frame(make_data_frame(0, Counts{}, 0, 0, 0));
  CHECK(raw.size() == 33);
  CHECK(raw[0] == 0x00);
  for (std::size_t i = 1; i <= 25; ++i) CHECK(raw[i] == 0);
  CHECK(raw[26] == 0x80);
  CHECK(raw[27] == 0x80);
  for (std::size_t i = 28; i < 33; ++i) CHECK(raw[i] == 0);
}

TEST_CASE("counter 5 with channel 0 at full scale") {
  Counts ch{};
  ch[0] = 16383;
  const auto raw = encode_frame(make_data_frame(5, ch, 0, 0, 0));
  CHECK(raw[0] == 0x05);
  CHECK(raw[1] == 0xFF);
  CHECK(raw[2] == 0xFC);
  for (std::size_t i = 3; i <= 25; ++i) CHECK(raw[i] == 0);
}

TEST_CASE("battery frame byte") {
  const auto raw = encode_frame(make_battery_frame(100));
  CHECK(raw[0] == 0xE4);
  const auto back = decode_frame(raw);
  CHECK(back.ok());
  CHECK(back.frame.is_battery);
  CHECK(back.frame.battery_pct == 100);
}

TEST_CASE("payload matches reference bit packer") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> count(0, kMaxCount);
  for (int t = 0; t < 500; ++t) {
    Counts ch{};
    for (auto& v : ch) v = static_cast<std::uint16_t>(count(rng));
    const auto raw = encode_frame(make_data_frame(t % 128, ch, 3, -7, 0));
    const auto ref = reference_payload(ch);
    CHECK(std::equal(ref.begin(), ref.end(), raw.begin() + 1));
    CHECK(raw[26] == 131);
    CHECK(raw[27] == 121);
  }
}

TEST_CASE("decode quality field by hand") {
  RawFrame raw{};
  raw[0] = 0x07;
  raw[26] = 0x80;
  raw[27] = 0x80;
  raw[28] = 4000 >> 8;
  raw[29] = 4000 & 0xFF;
  const auto r = decode_frame(raw);
  CHECK(r.ok());
  CHECK(r.frame.counter == 7);
  CHECK(r.frame.quality_channel == 7);
  CHECK(r.frame.quality_value == 4000);
}

TEST_CASE("quality channel follows the counter") {
  const auto r = decode_frame(encode_frame(make_data_frame(20, Counts{}, 0, 0, 9)));
  CHECK(r.frame.quality_channel == 6);
  CHECK(r.frame.quality_value == 9);
}

TEST_CASE("decode flags non-zero pad and reserved bits") {
  auto raw = encode_frame(make_data_frame(1, Counts{}, 0, 0, 0));
  raw[25] |= 0x01;
  raw[31] = 0x10;
  raw[28] |= 0x80;
  const auto r = decode_frame(raw);
  CHECK(r.warnings.size() == 3);
  CHECK(r.frame.counter == 1);
}

TEST_CASE("encode rejects invalid frames") {
  Counts ch{};
  CHECK_THROWS_AS(encode_frame(make_data_frame(128, ch, 0, 0, 0)), std::invalid_argument);
  auto f = make_data_frame(3, ch, 0, 0, 0);
  f.channels[2] = 16384;
  CHECK_THROWS_AS(encode_frame(f), std::invalid_argument);
  f = make_data_frame(3, ch, 0, 0, 0);
  f.quality_channel = 4;
  CHECK_THROWS_AS(encode_frame(f), std::invalid_argument);
  f = make_data_frame(3, ch, 0, 0, 0);
  f.quality_value = 16384;
  CHECK_THROWS_AS(encode_frame(f), std::invalid_argument);
  f = make_data_frame(3, ch, 0, 0, 0);
  f.gyro_x = 128;
  CHECK_THROWS_AS(encode_frame(f), std::invalid_argument);
  CHECK_THROWS_AS(encode_frame(make_battery_frame(101)), std::invalid_argument);
}

TEST_CASE("round trip of 10000 random frames") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 10000; ++i) {
    const auto f = random_frame(rng);
    const auto r = decode_frame(encode_frame(f));
    REQUIRE(r.ok());
    REQUIRE(r.frame == f);
  }
}

TEST_CASE("counter wrap") {
  CHECK(next_counter(127) == 0);
  CHECK(next_counter(5) == 6);
  CHECK(counter_distance(127, 0) == 1);
  CHECK(counter_distance(120, 3) == 11);
}

TEST_CASE("keystream of the zero key is the splitmix64 sequence from seed 0") {
  // Published splitmix64 outputs for seed 0.
  const std::uint64_t expected[] = {0xE220A8397B1DCDAFull, 0x6E789E6AA1B965F4ull,
                                    0x06C45D188009454Full, 0xF88BB8A8724C81ECull,
                                    0x1B39896A51A8749Bull};
  const auto ks = mask_keystream(MaskKey{});
  for (std::size_t i = 0; i < kFrameSize; ++i)
    CHECK(ks[i] == static_cast<std::uint8_t>(expected[i / 8] >> (8 * (i % 8))));
  CHECK(mask_frame(RawFrame{}, MaskKey{}) == ks);
}

TEST_CASE("masking is an involution and key sensitive") {
  std::mt19937_64 rng(5);
  int distinct = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto raw = encode_frame(random_frame(rng));
    const auto k1 = random_key(rng);
    auto k2 = random_key(rng);
    CHECK(unmask_frame(mask_frame(raw, k1), k1) == raw);
    if (mask_frame(raw, k1) != mask_frame(raw, k2)) ++distinct;
  }
  CHECK(distinct == 1000);
}

TEST_CASE("mask key hex") {
  const std::string hex = "000102030405060708090a0b0c0d0e0f";
  const auto key = parse_mask_key(hex);
  CHECK(key[15] == 15);
  CHECK(format_mask_key(key) == hex);
  CHECK_THROWS(parse_mask_key("abc"));
  CHECK_THROWS(parse_mask_key("zz0102030405060708090a0b0c0d0e0f"));
}

TEST_CASE("counts to microvolts") {
  CHECK(counts_to_microvolts(8192) == doctest::Approx(0.0));
  CHECK(counts_to_microvolts(8193) == doctest::Approx(1.95));
  CHECK(counts_to_microvolts(0) == doctest::Approx(-15974.4));
  CHECK_THROWS_AS(counts_to_microvolts(16384), std::out_of_range);
  CHECK_THROWS_AS(counts_to_microvolts(-1), std::out_of_range);
  const double step = counts_to_microvolts(1) - counts_to_microvolts(0);
  for (int c = 1; c <= kMaxCount; ++c)
    REQUIRE(counts_to_microvolts(c) - counts_to_microvolts(c - 1) == doctest::Approx(step));
  CHECK(step > 0);
  CHECK(microvolts_to_counts(1.95) == 8193);
  CHECK(microvolts_to_counts(1e9) == kMaxCount);
  CHECK(microvolts_to_counts(-1e9) == 0);
}

TEST_CASE("assemble contiguous counters") {
  std::vector<DecodedFrame> frames{frame_with(5, 1), frame_with(6, 2), frame_with(7, 3)};
  const auto s = assemble_stream(frames);
  CHECK(s.recording.num_samples() == 3);
  CHECK(s.report.gaps.empty());
  CHECK(s.report.balanced());
}

TEST_CASE("assemble interpolates a single missing frame") {
  std::vector<DecodedFrame> frames{frame_with(5, 90), frame_with(6, 100), frame_with(8, 104)};
  const auto s = assemble_stream(frames);
  CHECK(s.recording.num_samples() == 4);
  CHECK(s.recording.data[0][2] == doctest::Approx(counts_to_microvolts(102)));
  REQUIRE(s.report.gaps.size() == 1);
  CHECK(s.report.gaps[0] == Gap{2, 1});
  CHECK(s.report.repaired == 1);
  CHECK(s.report.expected_frames == 4);
  CHECK(s.report.received_frames == 3);
}

TEST_CASE("assemble across the counter wrap") {
  std::vector<DecodedFrame> frames{frame_with(126, 1), frame_with(127, 2), frame_with(0, 3),
                                   frame_with(1, 4)};
  const auto s = assemble_stream(frames);
  CHECK(s.recording.num_samples() == 4);
  CHECK(s.report.gaps.empty());
}

TEST_CASE("battery frames carry no samples") {
  std::vector<DecodedFrame> frames{frame_with(1, 1), make_battery_frame(80), frame_with(2, 2)};
  const auto s = assemble_stream(frames);
  CHECK(s.recording.num_samples() == 2);
  REQUIRE(s.battery_pct);
  CHECK(*s.battery_pct == 80);
  std::vector<DecodedFrame> only{make_battery_frame(50)};
  CHECK_THROWS(assemble_stream(only));
  CHECK_THROWS(assemble_stream(std::vector<DecodedFrame>{}));
}

TEST_CASE("gap limit") {
  std::vector<DecodedFrame> ok{frame_with(0, 1), frame_with(65, 2)};
  CHECK(assemble_stream(ok).report.repaired == 64);
  std::vector<DecodedFrame> too_long{frame_with(0, 1), frame_with(66, 2)};
  CHECK_THROWS_AS(assemble_stream(too_long), std::runtime_error);
  std::vector<DecodedFrame> repeated{frame_with(4, 1), frame_with(4, 2)};
  CHECK_THROWS_AS(assemble_stream(repeated), std::runtime_error);
}

TEST_CASE("stream length and monotone repair over random drops") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> count(0, kMaxCount);
  std::bernoulli_distribution drop(0.05);
  for (int trial = 0; trial < 200; ++trial) {
    const int first = static_cast<int>(rng() % 128);
    std::vector<DecodedFrame> all, kept;
    int ctr = first;
    for (int i = 0; i < 300; ++i) {
      Counts ch{};
      for (auto& v : ch) v = static_cast<std::uint16_t>(count(rng));
      all.push_back(make_data_frame(ctr, ch, 0, 0, 0));
      ctr = next_counter(ctr);
    }
    for (std::size_t i = 0; i < all.size(); ++i)
      if (i == 0 || i + 1 == all.size() || !drop(rng)) kept.push_back(all[i]);
    const auto s = assemble_stream(kept);
    REQUIRE(s.recording.num_samples() == all.size());
    REQUIRE(s.report.balanced());
    CHECK(s.report.received_frames + s.report.repaired == s.recording.num_samples());
    for (const auto& g : s.report.gaps) {
      for (std::size_t c = 0; c < kNumChannels; ++c) {
        const double a = s.recording.data[c][g.position - 1];
        const double b = s.recording.data[c][g.position + g.missing];
        for (std::size_t k = 0; k < g.missing; ++k) {
          const double v = s.recording.data[c][g.position + k];
          REQUIRE(v >= std::min(a, b) - 1e-9);
          REQUIRE(v <= std::max(a, b) + 1e-9);
        }
      }
    }
  }
}

TEST_CASE("frames from recording start at the requested counter") {
  auto rec = make_recording(200);
  rec.data[3][10] = 19.5;
  const auto frames = frames_from_recording(rec, kDefaultLsbMicrovolts, 120, 7);
  CHECK(frames.front().counter == 120);
  CHECK(frames[8].counter == 0);
  CHECK(frames[10].channels[3] == 8202);
  const auto s = assemble_stream(frames);
  CHECK(s.recording.data[3][10] == doctest::Approx(19.5));
}

TEST_CASE("capture file round trip") {
  const auto dir = testutil::scratch_dir("capture");
  std::mt19937_64 rng(1);
  std::vector<RawFrame> frames;
  for (int i = 0; i < 50; ++i) frames.push_back(encode_frame(random_frame(rng)));
  write_capture(dir / "a.efr", frames);
  CHECK(std::filesystem::file_size(dir / "a.efr") == 50 * 33);
  CHECK(read_capture(dir / "a.efr") == frames);

  std::ofstream(dir / "bad.efr", std::ios::binary) << "short";
  CHECK_THROWS_AS(read_capture(dir / "bad.efr"), IoError);
  try {
    read_capture(dir / "missing.efr");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("missing.efr") != std::string::npos);
  }
}
