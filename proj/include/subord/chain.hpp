#pragma once

// Finite-state Markov chains, their n-step kernels and the subordinated
// kernel P_phi^n(x, .) = sum_m P^m(x, .) P(T_n = m).

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "subord/subordinator.hpp"

namespace subord {

using Distribution = std::vector<double>;

class FiniteChain {
 public:
  /// Row-major K x K kernel. Throws DomainError unless rows are stochastic
  /// within 1e-12, entries are nonnegative, and f >= 1 (empty f means f = 1).
  FiniteChain(std::vector<double> kernel, std::size_t states, std::vector<double> f = {},
              std::string label = "chain");

  std::size_t size() const noexcept { return k_; }
  double operator()(std::size_t i, std::size_t j) const { return p_[i * k_ + j]; }
  std::span<const double> row(std::size_t i) const { return {p_.data() + i * k_, k_}; }
  std::span<const double> kernel() const noexcept { return p_; }
  std::span<const double> f() const noexcept { return f_; }
  double max_f() const noexcept;
  const std::string& label() const noexcept { return label_; }

  FiniteChain with_f(std::vector<double> f) const;

  /// mu P.
  Distribution step(std::span<const double> mu) const;

 private:
  std::size_t k_ = 0;
  std::vector<double> p_;
  std::vector<double> f_;
  std::string label_;
};

/// True when every state reaches every other along positive entries.
bool irreducible(const FiniteChain& chain);

/// Unique invariant distribution with |pi P - pi|_1 <= 1e-12. Power
/// iteration, restarted on the lazy kernel (P + I)/2 if it stalls (periodic
/// chains). Throws ReducibleChainError for reducible chains and NumericError
/// if the tolerance is not reached.
Distribution stationary(const FiniteChain& chain);

/// Row x of P^n.
Distribution n_step(const FiniteChain& chain, std::size_t x, std::size_t n);

struct SubordinatedDistribution {
  std::size_t x = 0;
  std::size_t n = 0;
  Distribution weights;
  /// Mass of T_n outside the stored support; it enters distances as a
  /// total-variation bracket and is never assigned to states.
  double residual = 0.0;
};

SubordinatedDistribution subordinate(const FiniteChain& chain, std::size_t x,
                                     const SubordinatorLaw& law);

/// sum_y f(y) |mu(y)|, the supremum of |mu(g)| over |g| <= f.
double f_norm(std::span<const double> mu, std::span<const double> f);
/// f = 1.
double tv_norm(std::span<const double> mu);

/// | sum_x pi(x) P_phi^n(x, .) - pi |_TV. Should not exceed the law's
/// residual by more than rounding.
double invariance_check(const FiniteChain& chain, const SubordinatorLaw& law);

/// Renewal-age chain on {0..K}: P(j, j+1) = h(j+1)/h(j), P(j, 0) = 1 - h(j+1)/h(j),
/// P(K, 0) = 1, with h(j) = (1 + j)^{-kappa}. Needs kappa > 1, K >= 1.
FiniteChain backward_recurrence_chain(double kappa, std::size_t K);

/// [[1-a, a], [b, 1-b]].
FiniteChain two_state_chain(double a, double b);

/// Builder ids:
///   two-state               [[0.9, 0.1], [0.2, 0.8]]
///   two-state:a:b           [[1-a, a], [b, 1-b]]
///   backward                backward recurrence, kappa = 2.5, K = 50
///   backward:kappa:K
///   lazy-cycle:K            1/2 stay, 1/2 move to j+1 mod K (doubly stochastic)
/// Throws DomainError for unknown ids or bad parameters.
FiniteChain make_chain(std::string_view id);

/// Control functions: "1" (default), "linear" (1 + j), "power:p" ((1 + j)^p),
/// or a comma list with one value per state.
std::vector<double> control_function(std::string_view spec, std::size_t states);

/// CSV: meta lines "label", "K" (largest state index) and "f", then one
/// kernel row per line.
void write_chain_csv(const std::string& path, const FiniteChain& chain);
FiniteChain read_chain_csv(const std::string& path);

}  // namespace subord
