#pragma once

#include <functional>
#include <span>

namespace subord::quad {

using Integrand = std::function<double(double)>;

struct Options {
  double abs_tol = 1e-10;
  double rel_tol = 1e-12;
};

struct Result {
  double value = 0.0;
  double error = 0.0;  // estimate reported by the rule
  double l1 = 0.0;     // integral of |f|, used for the relative test
};

/// Integral over the finite interval [a, b]. Endpoint singularities are fine;
/// interior ones must be split out by the caller.
Result finite(const Integrand& f, double a, double b, const Options& opts = {});

/// Integral over [a, +inf).
Result to_infinity(const Integrand& f, double a, const Options& opts = {});

/// Sum of integrals over consecutive pieces [p0,p1], [p1,p2], ... The last
/// point may be +inf. Points must be nondecreasing; empty pieces are skipped.
Result piecewise(const Integrand& f, std::span<const double> points, const Options& opts = {});

/// Throws QuadratureError when the estimate misses both tolerances.
void require(const Result& r, const Options& opts, const char* what);

}  // namespace subord::quad
