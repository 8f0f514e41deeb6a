#include "subord/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <limits>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>

namespace subord::kernels {
namespace {

// FFTW's planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

double norm1(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += std::abs(x);
  return s;
}

double norm2(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

void convolve_serial(std::span<const double> a, std::span<const double> b,
                     std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t nout = out.size();
  for (std::size_t i = 0; i < a.size() && i < nout; ++i) {
    const double ai = a[i];
    const std::size_t jmax = std::min(b.size(), nout - i);
    for (std::size_t j = 0; j < jmax; ++j) out[i + j] += ai * b[j];
  }
}

void convolve_parallel(std::span<const double> a, std::span<const double> b,
                       std::span<double> out) {
  const std::ptrdiff_t na = static_cast<std::ptrdiff_t>(a.size());
  const std::ptrdiff_t nb = static_cast<std::ptrdiff_t>(b.size());
  const std::ptrdiff_t nout = static_cast<std::ptrdiff_t>(out.size());
  if (na == 0 || nb == 0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  std::vector<double> reversed(b.rbegin(), b.rend());
  const double* pa = a.data();
  const double* pr = reversed.data();
  double* po = out.data();

#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t k = 0; k < nout; ++k) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, k - nb + 1);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(k, na - 1);
    const std::ptrdiff_t shift = nb - 1 - k;  // b[k - i] == reversed[i + shift]
    double s = 0.0;
#pragma omp simd reduction(+ : s)
    for (std::ptrdiff_t i = lo; i <= hi; ++i) s += pa[i] * pr[i + shift];
    po[k] = s;
  }
}

double fft_error_bound(std::span<const double> a, std::span<const double> b, std::size_t n) {
  const double eps = std::numeric_limits<double>::epsilon();
  const double levels = std::log2(static_cast<double>(std::max<std::size_t>(n, 2)));
  const double mix = std::min(norm1(a) * norm2(b), norm2(a) * norm1(b));
  return 8.0 * eps * levels * mix;
}

double direct_cost(std::size_t na, std::size_t nb, std::size_t nout) {
  const double full = static_cast<double>(na) * static_cast<double>(nb);
  const double band = static_cast<double>(nout) * static_cast<double>(std::min(na, nb));
  return std::min(full, band);
}

struct FftConvolver::Impl {
  std::size_t n = 0;
  std::size_t max_input = 0;
  std::vector<double> kernel;
  double* real = nullptr;
  fftw_complex* spectrum = nullptr;
  fftw_complex* kernel_spectrum = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
    fftw_free(real);
    fftw_free(spectrum);
    fftw_free(kernel_spectrum);
  }
};

FftConvolver::FftConvolver(std::span<const double> kernel, std::size_t max_input)
    : impl_(std::make_unique<Impl>()) {
  auto& s = *impl_;
  s.kernel.assign(kernel.begin(), kernel.end());
  s.max_input = max_input;
  s.n = next_pow2(std::max<std::size_t>(2, max_input + kernel.size()));
  const std::size_t half = s.n / 2 + 1;
  s.real = fftw_alloc_real(s.n);
  s.spectrum = fftw_alloc_complex(half);
  s.kernel_spectrum = fftw_alloc_complex(half);
  if (!s.real || !s.spectrum || !s.kernel_spectrum) throw std::bad_alloc();
  {
    // ESTIMATE plans are deterministic, which keeps outputs reproducible.
    std::lock_guard lock(planner_mutex());
    s.forward = fftw_plan_dft_r2c_1d(static_cast<int>(s.n), s.real, s.spectrum, FFTW_ESTIMATE);
    s.backward = fftw_plan_dft_c2r_1d(static_cast<int>(s.n), s.spectrum, s.real, FFTW_ESTIMATE);
  }
  std::fill(s.real, s.real + s.n, 0.0);
  std::copy(kernel.begin(), kernel.end(), s.real);
  fftw_execute(s.forward);
  std::memcpy(s.kernel_spectrum, s.spectrum, sizeof(fftw_complex) * half);
}

FftConvolver::~FftConvolver() = default;

std::size_t FftConvolver::length() const noexcept { return impl_->n; }

double FftConvolver::convolve(std::span<const double> a, std::span<double> out) {
  auto& s = *impl_;
  if (a.size() > s.max_input || out.size() > s.n)
    throw std::length_error("FftConvolver: input longer than the planned transform");
  std::fill(s.real, s.real + s.n, 0.0);
  std::copy(a.begin(), a.end(), s.real);
  fftw_execute(s.forward);
  const std::size_t half = s.n / 2 + 1;
  for (std::size_t k = 0; k < half; ++k) {
    const double re = s.spectrum[k][0] * s.kernel_spectrum[k][0] -
                      s.spectrum[k][1] * s.kernel_spectrum[k][1];
    const double im = s.spectrum[k][0] * s.kernel_spectrum[k][1] +
                      s.spectrum[k][1] * s.kernel_spectrum[k][0];
    s.spectrum[k][0] = re;
    s.spectrum[k][1] = im;
  }
  fftw_execute(s.backward);
  const double inv = 1.0 / static_cast<double>(s.n);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::max(0.0, s.real[k] * inv);
  return fft_error_bound(a, s.kernel, s.n);
}

double convolve_fft(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  FftConvolver conv(b, a.size());
  return conv.convolve(a, out);
}

}  // namespace subord::kernels
