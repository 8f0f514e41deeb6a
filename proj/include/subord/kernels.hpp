#pragma once

// Truncated convolution kernels: out[k] = sum_{i+j=k} a[i] b[j] for
// k < out.size(). The serial versions are the reference the parallel and
// FFT versions are tested and benchmarked against.

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace subord::kernels {

/// Scatter-form double loop. Reference implementation.
void convolve_serial(std::span<const double> a, std::span<const double> b, std::span<double> out);

/// Gather form, OpenMP over output indices, SIMD inner reduction.
void convolve_parallel(std::span<const double> a, std::span<const double> b,
                       std::span<double> out);

/// Sup-norm error bound of one FFT convolution of length n (power of two):
/// 8 eps log2(n) min(|a|_1 |b|_2, |a|_2 |b|_1).
double fft_error_bound(std::span<const double> a, std::span<const double> b, std::size_t n);

/// Repeated convolution against a fixed kernel b, through real-to-complex
/// FFTs of a fixed power-of-two length. Negative outputs (pure round-off)
/// are clamped to zero; the returned value bounds the sup-norm error.
class FftConvolver {
 public:
  /// Accepts inputs a with a.size() + b.size() - 1 <= transform length.
  FftConvolver(std::span<const double> kernel, std::size_t max_input);
  ~FftConvolver();
  FftConvolver(const FftConvolver&) = delete;
  FftConvolver& operator=(const FftConvolver&) = delete;

  double convolve(std::span<const double> a, std::span<double> out);
  std::size_t length() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot FFT convolution; returns the error bound.
double convolve_fft(std::span<const double> a, std::span<const double> b, std::span<double> out);

/// Expected cost of the direct kernel, in multiply-adds.
double direct_cost(std::size_t na, std::size_t nb, std::size_t nout);

}  // namespace subord::kernels
