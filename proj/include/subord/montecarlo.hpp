#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "subord/rng.hpp"

namespace subord {

struct MonteCarloMean {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Sample mean of draw(rng). Samples are cut into fixed-size chunks, chunk c
/// using stream c + 1 of `seed`, and partial sums are reduced in chunk order,
/// so the result is independent of the number of threads.
template <class Draw>
MonteCarloMean chunked_mean(std::size_t samples, std::uint64_t seed, Draw draw) {
  constexpr std::size_t chunk = std::size_t{1} << 14;
  const std::size_t chunks = (samples + chunk - 1) / chunk;
  std::vector<long double> sum(chunks, 0), sum_sq(chunks, 0);
  const auto count = static_cast<std::ptrdiff_t>(chunks);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t c = 0; c < count; ++c) {
    Rng rng(seed, static_cast<std::uint64_t>(c) + 1);
    const std::size_t begin = static_cast<std::size_t>(c) * chunk;
    const std::size_t end = std::min(samples, begin + chunk);
    long double s = 0, s2 = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const double v = draw(rng);
      s += v;
      s2 += static_cast<long double>(v) * v;
    }
    sum[c] = s;
    sum_sq[c] = s2;
  }
  long double s = 0, s2 = 0;
  for (std::size_t c = 0; c < chunks; ++c) {
    s += sum[c];
    s2 += sum_sq[c];
  }
  MonteCarloMean out;
  out.samples = samples;
  if (samples == 0) return out;
  const long double N = static_cast<long double>(samples);
  const long double mean = s / N;
  const long double var =
      samples > 1 ? std::max<long double>(0, (s2 - N * mean * mean) / (N - 1)) : 0;
  out.mean = static_cast<double>(mean);
  out.std_error = static_cast<double>(std::sqrt(var / N));
  return out;
}

}  // namespace subord
