#pragma once

// Discrete-time subordinator T_n = R_1 + ... + R_n with i.i.d. steps
//
//   P(R = m) = c(phi, m) = b 1{m=1} + (1/m!) \int y^m e^{-y} nu(dy),  m >= 1,
//
// for a normalized Bernstein function phi. Laws are stored truncated; every
// truncation is accounted for so that expectations of monotone functionals
// come with certified brackets.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "subord/bernstein.hpp"
#include "subord/montecarlo.hpp"
#include "subord/rng.hpp"

namespace subord {

enum class StepMethod { automatic, closed, quadrature };

struct StepLawOptions {
  StepMethod method = StepMethod::automatic;
  /// Largest tolerated residual for light-tailed laws. Heavy-tailed laws
  /// (certificate on phi) carry their residual instead.
  double residual_ceiling = 1e-6;
  /// Relative accuracy demanded of each quadrature-computed c(phi, m).
  double rel_tol = 1e-12;
};

struct StepLaw {
  std::string source;
  std::size_t M = 0;
  std::vector<double> pmf;  // pmf[m - 1] = c(phi, m), m = 1..M
  double residual = 0.0;    // 1 - sum_{m <= M} c(phi, m)
  /// Componentwise bound |pmf - exact| <= rel_error * exact.
  double rel_error = 0.0;
  bool closed_form = false;
  bool heavy_tail = false;

  double c(std::size_t m) const { return m >= 1 && m <= M ? pmf[m - 1] : 0.0; }
  double mass() const;
};

/// Throws TruncationError when a light-tailed law leaves more than the
/// ceiling outside {1..M}; QuadratureError when c(phi, m) cannot be computed.
StepLaw step_law(const BernsteinFunction& phi, std::size_t M, const StepLawOptions& opts = {});

/// c(phi, m) by quadrature of the Levy measure, bypassing closed forms.
double step_pmf_quadrature(const BernsteinFunction& phi, std::size_t m, double rel_tol = 1e-12);

/// |sum_{m <= M} c(phi, m) s^m - (1 - phi(1 - s))|.
double pgf_residual(const StepLaw& law, const BernsteinFunction& phi, double s);

/// Truncated law of T_n. Entry k of `pmf` approximates
/// P(T_n = n + k, every step <= M, T_n < n + pmf.size()); all other outcomes
/// satisfy T_n >= tail_start.
struct SubordinatorLaw {
  std::string source;
  std::size_t n = 0;
  std::size_t M = 0;
  std::vector<double> pmf;
  /// Nominal mass outside the stored support: 1 - (1 - r)^n plus mass cut
  /// off by the support cap.
  double residual = 0.0;
  std::size_t tail_start = 0;
  /// |pmf[k] - exact[k]| <= rel_error * exact[k] + abs_error.
  double rel_error = 0.0;
  double abs_error = 0.0;
  bool capped = false;

  double probability(std::size_t m) const {
    return m >= n && m - n < pmf.size() ? pmf[m - n] : 0.0;
  }
  std::size_t first() const { return n; }
  std::size_t last() const { return n + pmf.size() - 1; }
  double mass() const;
};

enum class ConvolutionMethod { automatic, direct, fft };

struct ConvolutionOptions {
  /// Number of stored support points (0: keep the full support n(M-1)+1).
  std::size_t cap = 0;
  ConvolutionMethod method = ConvolutionMethod::automatic;
  /// Largest support a law may occupy, in entries.
  std::size_t budget = std::size_t{1} << 25;
  /// Automatic mode switches to FFT above this many multiply-adds.
  double direct_limit = 4e7;
};

/// Law of T_n by binary powering of the step pmf. Throws BudgetError when
/// the requested support exceeds the budget.
SubordinatorLaw t_n_law(const StepLaw& step, std::size_t n, const ConvolutionOptions& opts = {});

/// Law of T_a + T_b' for independent laws (used for the semigroup check).
SubordinatorLaw convolve_laws(const SubordinatorLaw& a, const SubordinatorLaw& b,
                              const ConvolutionOptions& opts = {});

/// Calls visit(law_n) for n = 1..n_max, each law one convolution with the
/// step pmf away from the previous one.
void for_each_t_n(const StepLaw& step, std::size_t n_max, const ConvolutionOptions& opts,
                  const std::function<void(const SubordinatorLaw&)>& visit);

struct ExpectationBracket {
  double lower = 0.0;
  double upper = 0.0;
  std::string note;

  double width() const { return upper - lower; }
  double mid() const { return 0.5 * (lower + upper); }
};

/// Certified bracket for E g(T_n), g nonincreasing and nonnegative on
/// [n, inf). Throws ContractError if g increases or goes negative on the
/// stored support.
ExpectationBracket expect_monotone(const SubordinatorLaw& law,
                                   const std::function<double(double)>& g);

/// Inverse-CDF sampler. Draws from {1..M} use the stored pmf. When `exact`
/// is given and has a closed-form step tail, draws beyond M invert that tail
/// (capped at 2^62), so the law is sampled without truncation; otherwise the
/// law is renormalized to {1..M} and the bias is at most the residual per step.
class StepSampler {
 public:
  explicit StepSampler(const StepLaw& law, const BernsteinFunction* exact = nullptr);
  std::uint64_t draw(Rng& rng) const;
  bool exact_tail() const noexcept { return static_cast<bool>(tail_); }

 private:
  std::uint64_t tail_draw(double v) const;

  std::vector<double> cdf_;
  std::size_t M_ = 0;
  std::function<double(std::uint64_t)> tail_;
};

/// Path (T_1, ..., T_n).
std::vector<std::uint64_t> sample_T(const StepLaw& law, std::size_t n, std::uint64_t seed,
                                    const BernsteinFunction* exact = nullptr);

/// Mean of g(T_n) over independent draws (see chunked_mean).
MonteCarloMean mc_mean_T(const StepLaw& law, std::size_t n, std::size_t samples,
                         std::uint64_t seed, const std::function<double(double)>& g,
                         const BernsteinFunction* exact = nullptr);

}  // namespace subord
