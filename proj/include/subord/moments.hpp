#pragma once

// Moment sequences E g(T_n) against their comparator rates:
//
//   subexp   E exp(-theta T_n^delta)      vs  exp(-C n^kappa), kappa = delta / (alpha(1-delta) + delta)
//   poly     E T_n^{-beta}                vs  C [phi^{-1}(1/n)]^beta
//   log      E log^{-gamma}(1 + T_n)      vs  C log^{-gamma}(1 + n)
//
// The constants C are not known; each report fits one over a declared range
// of n and measures how much it moves when the range is doubled.

#include <cstddef>
#include <string>
#include <vector>

#include "subord/bernstein.hpp"
#include "subord/cm.hpp"
#include "subord/subordinator.hpp"

namespace subord {

struct MomentRow {
  std::size_t n = 0;
  ExpectationBracket bracket;
  double comparator = 0.0;
  /// subexp: -log(upper) / n^kappa. poly, log: upper / comparator.
  double ratio = 0.0;
};

/// Closed range of n used for a constant fit.
struct FitRange {
  std::size_t lo = 1;
  std::size_t hi = 1;
};

struct MomentOptions {
  std::vector<std::size_t> n_grid;  // sorted, distinct, >= 1
  /// Empty ranges (hi == 0) pick defaults from the grid: [N/4, N/2] and
  /// [N/2, N] for subexp, [1, N/2] and [1, N] otherwise (N = max grid n).
  FitRange base{0, 0};
  FitRange doubled{0, 0};
  double stability_tol = 0.05;
  /// Relative rounding allowance for comparisons that are equalities for
  /// the identity (T_n = n); never covers truncation.
  double rounding_slack = 1e-12;
  /// The certificate is a hypothesis of the rate statement, not of the
  /// pointwise bound T_n >= n; log_report may skip it when asked.
  bool require_certificate = true;
  ConvolutionOptions convolution;
};

struct MomentReport {
  std::string source;
  CmRepresentation g;
  std::vector<MomentRow> rows;
  double kappa = 0.0;  // subexp only
  FitRange base, doubled;
  double fitted_C = 0.0;  // over the doubled range
  double base_C = 0.0;
  double stability = 0.0;  // |fitted_C - base_C| / |base_C|
  std::size_t onset = 0;    // first n of the longest monotone tail of ratios
  bool positive = false;
  bool nonincreasing = false;
  bool trivial_bound = true;  // subexp: -log(upper) >= theta n^delta for every n
  bool pass = false;
  std::string note;
};

/// Throws PreconditionError when phi has no Levy lower-bound certificate.
MomentReport subexp_report(const BernsteinFunction& phi, const StepLaw& step, double theta,
                           double delta, const MomentOptions& opts);

/// Throws PreconditionError when phi is not certified for the growth and
/// scaling condition.
MomentReport poly_report(const BernsteinFunction& phi, const StepLaw& step, double beta,
                         const MomentOptions& opts);

/// Throws PreconditionError when phi has no Levy lower-bound certificate
/// (unless opts.require_certificate is false).
MomentReport log_report(const BernsteinFunction& phi, const StepLaw& step, double gamma,
                        const MomentOptions& opts);

/// First n of the longest tail of `rows` along which the ratio is monotone.
std::size_t ratio_onset(const std::vector<MomentRow>& rows);

std::vector<std::size_t> n_range(std::size_t lo, std::size_t hi);

}  // namespace subord
