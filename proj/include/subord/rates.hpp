#pragma once

// Convergence of a chain and of its subordinated version in the f-norm:
//
//   d(n)     = |P^n(x, .) - pi|_f
//   d_phi(n) = |P_phi^n(x, .) - pi|_f  <=  sum_m d(m) P(T_n = m)
//
// and the subordinated rate shapes for r(n) in the three standard families.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "subord/bernstein.hpp"
#include "subord/chain.hpp"
#include "subord/cm.hpp"
#include "subord/subordinator.hpp"

namespace subord {

struct RateSpec {
  CmFamily family = CmFamily::poly;
  double theta = 1.0;
  double delta = 0.5;
  double beta = 1.0;
  double gamma = 1.0;

  /// Validating constructors (DomainError): theta > 0, 0 < delta <= 1, beta > 0, gamma > 0.
  static RateSpec subexp(double theta, double delta);
  static RateSpec poly(double beta);
  static RateSpec log(double gamma);

  /// exp(-theta n^delta), n^{-beta} or log^{-gamma}(2 + n).
  double r(double n) const;
  std::string label() const;
};

/// d(0..N) with one running power of P. Needs a stationary distribution.
std::vector<double> empirical_decay(const FiniteChain& chain, std::size_t x, std::size_t N);

/// Rows Delta_m = P^m(x, .) - pi for m = 0..m_max, with d(m) in the chain's
/// f-norm and the total variation tv(m).
struct DecayTable {
  std::size_t x = 0;
  std::size_t states = 0;
  Distribution pi;
  std::vector<double> f;
  std::vector<double> delta;  // row-major, (m_max + 1) x states
  std::vector<double> d;
  std::vector<double> tv;

  std::size_t m_max() const { return d.size() - 1; }
  std::span<const double> row(std::size_t m) const { return {delta.data() + m * states, states}; }
};

DecayTable decay_table(const FiniteChain& chain, std::size_t x, std::size_t m_max);
DecayTable decay_table(const FiniteChain& chain, std::size_t x, std::size_t m_max,
                       const Distribution& pi);

/// Largest index a table needs to serve these laws.
std::size_t decay_horizon(const std::vector<SubordinatorLaw>& laws);

struct MixtureRow {
  std::size_t n = 0;
  double d = 0.0;
  /// Distance of the stored (truncated) mixture to pi; the quantity checked.
  double d_phi = 0.0;
  /// Bracket on the distance for the untruncated law.
  double d_phi_lower = 0.0;
  double d_phi_upper = 0.0;
  /// sum_m d(m) P(T_n = m) + 2 residual max f, summed in the same order as
  /// d_phi so that rounding cannot break an inequality that holds exactly.
  double mixture_bound = 0.0;
  double residual = 0.0;
  bool ok = false;
};

struct MixtureReport {
  std::string chain;
  std::string source;
  std::size_t x = 0;
  std::vector<MixtureRow> rows;
  bool all_ok = true;
};

/// One row per law. Throws ConsistencyError on a violation unless
/// `throw_on_violation` is false.
MixtureReport mixture_bound_check(const DecayTable& table, const std::vector<SubordinatorLaw>& laws,
                                  bool throw_on_violation = true);
MixtureReport mixture_bound_check(const FiniteChain& chain, std::size_t x,
                                  const std::vector<SubordinatorLaw>& laws,
                                  bool throw_on_violation = true);

/// r_phi(n) with every unknown constant set to 1:
///   subexp  exp(-n^{delta / (alpha (1 - delta) + delta)})   needs a Levy lower-bound certificate
///   poly    [phi^{-1}(1/n)]^beta                             needs the growth and scaling certificate
///   log     log^{-gamma}(2 + n)                              needs a Levy lower-bound certificate
/// Throws PreconditionError when the certificate is missing.
double theoretical_rate(const RateSpec& spec, const BernsteinFunction& phi, double n);

struct ConstantFit {
  double C = 0.0;
  std::size_t argmax = 0;  // n attaining C
  double C_half = 0.0;     // same fit over the first half of the range
  double stability = 0.0;  // |C - C_half| / C_half
};

/// C = max_n upper(n) / r(n) over paired sequences indexed by `ns`.
ConstantFit fit_constant(std::span<const std::size_t> ns, std::span<const double> upper,
                         std::span<const double> rate);

struct RateRow {
  MixtureRow mixture;
  double theoretical = 0.0;
  double ratio = 0.0;  // d_phi_upper / theoretical
};

struct RateReport {
  std::string chain;
  std::string source;
  std::string spec;
  std::size_t x = 0;
  std::size_t M = 0;
  std::vector<RateRow> rows;
  ConstantFit fit;
  bool mixture_ok = true;
};

/// Builds T_n for n = 1..N and assembles the report.
RateReport rate_report(const FiniteChain& chain, std::size_t x, const BernsteinFunction& phi,
                       const StepLaw& step, const RateSpec& spec, std::size_t N,
                       const ConvolutionOptions& opts = {});

/// The T_n laws for n = 1..N.
std::vector<SubordinatorLaw> t_n_laws(const StepLaw& step, std::size_t N,
                                      const ConvolutionOptions& opts = {});

}  // namespace subord
