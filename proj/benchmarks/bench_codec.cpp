#include <benchmark/benchmark.h>

#include "epoc/frame_codec.hpp"
#include "epoc/harness.hpp"

namespace {

using namespace epoc;

std::vector<DecodedFrame> make_frames(std::size_t n) {
  std::vector<DecodedFrame> frames;
  int counter = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::array<std::uint16_t, kNumChannels> ch{};
    for (std::size_t c = 0; c < kNumChannels; ++c)
      ch[c] = static_cast<std::uint16_t>((i * 37 + c * 1031) % (kMaxCount + 1));
    frames.push_back(make_data_frame(counter, ch, 0, 0, 0));
    counter = next_counter(counter);
  }
  return frames;
}

void BM_EncodeMask(benchmark::State& state) {
  const auto frames = make_frames(1024);
  const auto key = parse_mask_key(std::string(kDefaultMaskKeyHex));
  for (auto _ : state)
    for (const auto& f : frames) benchmark::DoNotOptimize(mask_frame(encode_frame(f), key));
  state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_EncodeMask);

void BM_UnmaskDecode(benchmark::State& state) {
  const auto key = parse_mask_key(std::string(kDefaultMaskKeyHex));
  std::vector<RawFrame> raw;
  for (const auto& f : make_frames(1024)) raw.push_back(mask_frame(encode_frame(f), key));
  for (auto _ : state)
    for (const auto& r : raw) benchmark::DoNotOptimize(decode_frame(unmask_frame(r, key)));
  state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_UnmaskDecode);

void BM_AssembleWithGaps(benchmark::State& state) {
  auto frames = make_frames(static_cast<std::size_t>(state.range(0)));
  std::vector<DecodedFrame> kept;
  for (std::size_t i = 0; i < frames.size(); ++i)
    if (i % 10 != 5) kept.push_back(frames[i]);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_stream(kept));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AssembleWithGaps)->Arg(12800);

}  // namespace
