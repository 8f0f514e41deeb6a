#include "subord/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "subord/error.hpp"

namespace subord::quad {
namespace {

namespace bq = boost::math::quadrature;

// Per-thread rule objects: the abscissa tables grow lazily.
bq::tanh_sinh<double>& tanh_sinh_rule() {
  static thread_local bq::tanh_sinh<double> rule(15);
  return rule;
}

bq::exp_sinh<double>& exp_sinh_rule() {
  static thread_local bq::exp_sinh<double> rule(12);
  return rule;
}

double termination(const Options& opts) {
  return std::max(opts.rel_tol, 4 * std::numeric_limits<double>::epsilon());
}

// Boost's stopping rule is relative to the L1 norm. A cheap coarse pass
// estimates that norm so an absolute target can stop refinement early on
// integrals that are small compared with it. jac converts the rule's error
// back to the caller's variable.
template <class Rule, class F>
double integrate(Rule& rule, F&& f, const Options& opts, double jac, double* error, double* l1) {
  constexpr double coarse = 1e-3;
  double tol = termination(opts);
  const double abs_tol = opts.abs_tol / jac;
  if (abs_tol > 1e-200) {
    double e0 = 0, l0 = 0;
    const double v0 = rule.integrate(f, coarse, &e0, &l0);
    if (l0 > 0 && std::isfinite(l0)) {
      tol = std::max(tol, std::min(coarse, abs_tol / l0));
      if (tol >= coarse && e0 <= abs_tol) {
        *error = e0;
        *l1 = l0;
        return v0;
      }
    }
  }
  return rule.integrate(f, tol, error, l1);
}

}  // namespace

void require(const Result& r, const Options& opts, const char* what) {
  const double allowed = std::max(opts.abs_tol, opts.rel_tol * r.l1);
  if (!(r.error <= allowed) || !std::isfinite(r.value)) {
    throw QuadratureError(std::string("quadrature did not converge: ") + what, r.error);
  }
}

Result finite(const Integrand& f, double a, double b, const Options& opts) {
  Result r;
  if (!(b > a)) return r;
  // Map (-1, 1) onto (a, b) using the distance-to-endpoint argument so that
  // abscissas crowding an endpoint keep full relative precision.
  const double half = 0.5 * (b - a);
  auto mapped = [&](double x, double xc) {
    const double pos = x < 0 ? a - half * xc : b - half * xc;
    if (!(pos > a && pos < b)) return 0.0;
    return f(pos);
  };
  try {
    r.value = half * integrate(tanh_sinh_rule(), mapped, opts, half, &r.error, &r.l1);
    r.error *= half;
    r.l1 *= half;
  } catch (const std::exception& e) {
    throw QuadratureError(std::string("finite-interval rule failed: ") + e.what(),
                          std::numeric_limits<double>::infinity());
  }
  return r;
}

Result to_infinity(const Integrand& f, double a, const Options& opts) {
  Result r;
  try {
    if (a == 0.0) {
      r.value = integrate(exp_sinh_rule(), f, opts, 1.0, &r.error, &r.l1);
    } else {
      auto shifted = [&](double u) { return f(a + u); };
      r.value = integrate(exp_sinh_rule(), shifted, opts, 1.0, &r.error, &r.l1);
    }
  } catch (const std::exception& e) {
    throw QuadratureError(std::string("half-line rule failed: ") + e.what(),
                          std::numeric_limits<double>::infinity());
  }
  return r;
}

Result piecewise(const Integrand& f, std::span<const double> points, const Options& opts) {
  Result total;
  // Piece errors add up, so each gets a share of the absolute budget.
  Options share = opts;
  if (points.size() > 2) share.abs_tol /= double(points.size() - 1);
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const double a = points[i];
    const double b = points[i + 1];
    if (!(b > a)) continue;
    // Slivers of relative width ~eps carry no mass and confuse the rules.
    if (!std::isinf(b) && b - a <= 1e-12 * std::max(std::abs(a), std::abs(b))) continue;
    const Result piece = std::isinf(b) ? to_infinity(f, a, share) : finite(f, a, b, share);
    total.value += piece.value;
    total.error += piece.error;
    total.l1 += piece.l1;
  }
  return total;
}

}  // namespace subord::quad
