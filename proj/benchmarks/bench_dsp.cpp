#include <benchmark/benchmark.h>

#include <affect/dsp.hpp>
#include <affect/ica.hpp>
#include <affect/rng.hpp>

#include <cmath>

using affect::Rng;
using affect::dsp::Signal;

namespace {

Signal noise_signal(int channels, int n, double fs, std::uint64_t seed) {
  Rng rng(seed);
  Signal s = Signal::zeros(channels, n, fs);
  for (auto& v : s.samples) v = rng.normal();
  return s;
}

}  // namespace

static void BM_fir_bandpass(benchmark::State& state) {
  Signal x = noise_signal(1, static_cast<int>(state.range(0)), 256.0, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(affect::dsp::fir_bandpass_zero_phase(x, 1.0, 45.0));
  }
}
BENCHMARK(BM_fir_bandpass)->Arg(512)->Arg(2048)->Arg(8192);

static void BM_butter_filtfilt(benchmark::State& state) {
  Signal x = noise_signal(1, static_cast<int>(state.range(0)), 128.0, 2);
  const auto& alpha = affect::dsp::canonical_bands()[2];
  for (auto _ : state) {
    benchmark::DoNotOptimize(affect::dsp::butter_sos_filtfilt(x, alpha, 4));
  }
}
BENCHMARK(BM_butter_filtfilt)->Arg(256)->Arg(1024)->Arg(4096);

static void BM_welch_psd(benchmark::State& state) {
  Signal x = noise_signal(1, static_cast<int>(state.range(0)), 128.0, 3);
  const auto cfg = affect::dsp::WelchConfig::defaults(128.0, x.length());
  for (auto _ : state) {
    benchmark::DoNotOptimize(affect::dsp::welch_psd(x, cfg));
  }
}
BENCHMARK(BM_welch_psd)->Arg(256)->Arg(1024)->Arg(4096);

static void BM_resample_halve(benchmark::State& state) {
  Signal x = noise_signal(1, static_cast<int>(state.range(0)), 256.0, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(affect::dsp::resample(x, 128.0));
  }
}
BENCHMARK(BM_resample_halve)->Arg(512)->Arg(8192);

static void BM_fastica_14ch(benchmark::State& state) {
  // identifiable mixture: sparse bursty sources through a fixed mixing
  Rng rng(5);
  const int n = static_cast<int>(state.range(0));
  const double fs = 256.0;
  std::vector<std::vector<double>> sources(14, std::vector<double>(static_cast<std::size_t>(n)));
  for (int j = 0; j < 14; ++j) {
    const double freq = 2.0 + 3.0 * j;
    for (int i = 0; i < n; ++i) {
      const double t = i / fs;
      const double u = rng.uniform() - 0.5;
      sources[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] =
          std::sin(2.0 * M_PI * freq * t) * (0.3 + std::exp(-0.5 * std::pow(std::fmod(t, 1.0) - 0.5, 2) / 0.01)) +
          0.4 * ((u < 0 ? 1.0 : -1.0) * std::log(1.0 - 2.0 * std::abs(u)));
    }
  }
  Signal x = Signal::zeros(14, n, fs);
  Rng mix(7);
  std::vector<double> a(14 * 14);
  for (int i = 0; i < 14 * 14; ++i) a[static_cast<std::size_t>(i)] = (i % 15 == 0 ? 1.0 : 0.0) + 0.3 * mix.normal();
  for (int c = 0; c < 14; ++c) {
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j < 14; ++j) acc += a[static_cast<std::size_t>(c * 14 + j)] * sources[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
      x.channel(c)[static_cast<std::size_t>(i)] = acc;
    }
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(affect::dsp::fastica(x, 14, 200, 1e-4));
  }
}
BENCHMARK(BM_fastica_14ch)->Arg(4096)->Arg(8192)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
