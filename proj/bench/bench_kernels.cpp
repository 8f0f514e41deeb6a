// Truncated convolution: serial reference vs OpenMP gather vs FFT, and the
// end-to-end T_n law with each method forced.
//
//   ./build/bench/bench_kernels --benchmark_filter=convolve

#include <cstddef>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "subord/catalog.hpp"
#include "subord/kernels.hpp"
#include "subord/subordinator.hpp"

namespace {

std::vector<double> random_pmf(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  double s = 0.0;
  for (auto& x : v) s += (x = u(rng));
  for (auto& x : v) x /= s;
  return v;
}

template <class Kernel>
void run_kernel(benchmark::State& state, Kernel kernel) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_pmf(n, 1), b = random_pmf(n, 2);
  std::vector<double> out(2 * n - 1);
  for (auto _ : state) {
    kernel(a, b, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetComplexityN(static_cast<benchmark::IterationCount>(n));
}

void convolve_serial(benchmark::State& state) {
  run_kernel(state, [](auto& a, auto& b, auto& out) { subord::kernels::convolve_serial(a, b, out); });
}
void convolve_parallel(benchmark::State& state) {
  run_kernel(state, [](auto& a, auto& b, auto& out) { subord::kernels::convolve_parallel(a, b, out); });
}
void convolve_fft(benchmark::State& state) {
  run_kernel(state, [](auto& a, auto& b, auto& out) { subord::kernels::convolve_fft(a, b, out); });
}

BENCHMARK(convolve_serial)->RangeMultiplier(4)->Range(256, 16384)->Complexity();
BENCHMARK(convolve_parallel)->RangeMultiplier(4)->Range(256, 16384)->Complexity();
BENCHMARK(convolve_fft)->RangeMultiplier(4)->Range(256, 1 << 20)->Complexity();

void t_n_law(benchmark::State& state, subord::ConvolutionMethod method) {
  const auto step = subord::step_law(subord::catalog::make("stable:0.5"),
                                     static_cast<std::size_t>(state.range(0)));
  subord::ConvolutionOptions opts;
  opts.method = method;
  for (auto _ : state) {
    const auto law = subord::t_n_law(step, 16, opts);
    benchmark::DoNotOptimize(law.pmf.data());
  }
}
BENCHMARK_CAPTURE(t_n_law, direct, subord::ConvolutionMethod::direct)->Arg(1024)->Arg(4096);
BENCHMARK_CAPTURE(t_n_law, fft, subord::ConvolutionMethod::fft)->Arg(1024)->Arg(4096)->Arg(1 << 16);

}  // namespace

BENCHMARK_MAIN();
