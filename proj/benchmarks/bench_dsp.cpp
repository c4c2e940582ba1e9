#include <benchmark/benchmark.h>

#include <random>

#include "epoc/fft.hpp"
#include "epoc/preprocess.hpp"
#include "epoc/spectral.hpp"

namespace {

using namespace epoc;

std::vector<double> noise(std::size_t n) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> d;
  std::vector<double> x(n);
  for (auto& v : x) v = d(rng);
  return x;
}

void BM_Fft(benchmark::State& state) {
  const auto x = noise(static_cast<std::size_t>(state.range(0)));
  std::vector<std::complex<double>> buf(x.begin(), x.end());
  for (auto _ : state) {
    auto work = buf;
    fft_inplace(work, false);
    benchmark::DoNotOptimize(work.data());
  }
}
BENCHMARK(BM_Fft)->RangeMultiplier(4)->Range(256, 65536);

void BM_Welch(benchmark::State& state) {
  const auto x = noise(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(welch_psd(x, 128.0));
}
BENCHMARK(BM_Welch)->Arg(12800);

void BM_BandPass(benchmark::State& state) {
  const auto x = noise(static_cast<std::size_t>(state.range(0)));
  const auto spec = FilterSpec::band_pass(1.0, 45.0);
  for (auto _ : state) benchmark::DoNotOptimize(filter_signal(x, 128.0, spec));
}
BENCHMARK(BM_BandPass)->Arg(12800);

}  // namespace
