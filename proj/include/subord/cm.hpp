#pragma once

// Completely monotone test functions g(x) = \int e^{-xt} mu(dt) and the
// continuous-time subordinator moments E g(S_n) = \int e^{-n phi(t)} mu(dt).
//
//   subexp(theta, delta)   g(x) = exp(-theta x^delta)   mu = Pollard density, atom at theta if delta = 1
//   poly(beta)             g(x) = x^{-beta}             mu(dt) = t^{beta-1} / Gamma(beta) dt
//   log(gamma)             g(x) = log^{-gamma}(1 + x)   mu(dt) = e^{-t} / Gamma(gamma) \int t^{s-1} s^{gamma-1} / Gamma(s) ds dt

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "subord/bernstein.hpp"
#include "subord/quadrature.hpp"
#include "subord/rng.hpp"
#include "subord/subordinator.hpp"

namespace subord {

enum class CmFamily { subexp, poly, log };

struct CmRepresentation {
  CmFamily family = CmFamily::poly;
  double theta = 1.0;
  double delta = 0.5;
  double beta = 1.0;
  double gamma = 1.0;

  /// Validating constructors; DomainError outside theta > 0, 0 < delta <= 1,
  /// beta > 0, gamma > 0.
  static CmRepresentation subexp(double theta, double delta);
  static CmRepresentation poly(double beta);
  static CmRepresentation log(double gamma);

  /// The function g itself.
  double g(double x) const;
  bool has_atom() const { return family == CmFamily::subexp && delta == 1.0; }
  std::string label() const;
};

/// Density of mu at t > 0 (zero for the pure-atom case).
double cm_density(const CmRepresentation& rep, double t);

/// E g(S_n) for one (phi, g) pair and many n. The outer quadrature uses
/// breakpoints that do not depend on n, so its nodes repeat between calls
/// and the (expensive) density of mu is memoized. Safe to share between
/// threads.
class ContinuousMoments {
 public:
  ContinuousMoments(BernsteinFunction phi, CmRepresentation rep,
                    const quad::Options& opts = {1e-14, 1e-9});
  ContinuousMoments(ContinuousMoments&&) noexcept;
  ~ContinuousMoments();

  /// n > 0 may be fractional.
  double operator()(double n) const;
  const CmRepresentation& representation() const noexcept;
  const BernsteinFunction& phi() const noexcept;
  std::size_t cached_densities() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// E g(S_n) = \int e^{-n phi(t)} mu(dt); n > 0 may be fractional. Returns
/// +inf when the integral diverges at t -> inf (phi of logarithmic growth
/// against a large beta or gamma).
double continuous_moment(const BernsteinFunction& phi, double n, const CmRepresentation& rep,
                         const quad::Options& opts = {1e-14, 1e-9});

struct DominanceReport {
  std::size_t n = 0;
  ExpectationBracket discrete;  // E g(T_n)
  double continuous = 0.0;      // E g(S_n)
  double margin = 0.0;          // continuous - discrete.lower
  bool holds = false;
};

/// Checks lower(E g(T_n)) <= E g(S_n) + tol; throws DominanceViolation
/// otherwise.
DominanceReport dominance_check(const BernsteinFunction& phi, std::size_t n,
                                const CmRepresentation& rep, const SubordinatorLaw& law,
                                double tol = 1e-6);
DominanceReport dominance_check(const ContinuousMoments& continuous, std::size_t n,
                                const SubordinatorLaw& law, double tol = 1e-6);

/// One draw of S_t for phi(x) = x^alpha (Kanter's representation).
double sample_stable_S(double alpha, double t, Rng& rng);
double sample_stable_S(double alpha, double t, std::uint64_t seed);

/// Mean of g(S_t) over independent Kanter draws, chunked like mc_mean_T.
MonteCarloMean mc_mean_stable(double alpha, double t, std::size_t samples, std::uint64_t seed,
                              const std::function<double(double)>& g);

}  // namespace subord
