#pragma once

// Bernstein functions without killing term,
//
//   phi(x) = b x + \int_{(0,inf)} (1 - e^{-xy}) nu(dy),
//
// described by a drift b >= 0 and a Levy measure nu with density rho. Two
// ways of supplying rho are supported: directly, or through a Stieltjes
// weight w >= 0 with rho(y) = \int_0^inf e^{-ty} w(t) dt. The second form is
// natural for complete Bernstein functions, where w(t) = Im phi(-t + i0)/pi,
// and it turns every Levy integral into a single quadrature over t.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "subord/quadrature.hpp"

namespace subord {

/// Certificate rho(y) >= c y^{-1-alpha} on all of (0, inf).
struct LevyLowerBound {
  double c = 0.0;
  double alpha = 0.0;
};

class LevyMeasure {
 public:
  using Fn = std::function<double(double)>;
  enum class Kind { none, density, stieltjes };

  LevyMeasure() = default;

  static LevyMeasure from_density(Fn rho, std::optional<LevyLowerBound> cert = std::nullopt);

  /// `breaks` lists the points where w is not smooth (quadrature splits there).
  static LevyMeasure from_stieltjes(Fn w, std::vector<double> breaks,
                                    std::optional<LevyLowerBound> cert = std::nullopt);

  Kind kind() const noexcept { return kind_; }
  bool empty() const noexcept { return kind_ == Kind::none; }

  /// rho(y); evaluated by quadrature for the Stieltjes form.
  double density(double y) const;

  /// w(t) for the Stieltjes form (scaled); zero otherwise.
  double stieltjes_weight(double t) const;
  std::span<const double> breaks() const noexcept { return breaks_; }

  const std::optional<LevyLowerBound>& lower_bound() const noexcept { return cert_; }

  /// The measure k * nu.
  LevyMeasure scaled(double k) const;

 private:
  Kind kind_ = Kind::none;
  Fn fn_;
  std::vector<double> breaks_;
  double scale_ = 1.0;
  std::optional<LevyLowerBound> cert_;
};

/// Analytic shortcuts attached to catalog entries. All are optional and all
/// describe the *unscaled* function.
struct ClosedForm {
  std::function<double(double)> phi;
  /// c(phi, m) for m >= 1.
  std::function<double(std::size_t)> step_pmf;
  /// sum_{k > m} c(phi, k).
  std::function<double(std::size_t)> step_tail;
  /// Relative accuracy of step_pmf.
  double step_rel_error = 1e-13;
};

/// Analytic facts recorded by the catalog; finite sampling cannot decide them.
struct Certificates {
  /// liminf phi(x)/log x > 0 and limsup_{x->0} phi(lambda x)/phi(x) > 1.
  bool log_growth_and_scaling = false;
  /// Step law decays polynomially; truncation residuals are carried, not bounded.
  bool heavy_tail = false;
};

enum class EvalMode { automatic, quadrature };

class BernsteinFunction {
 public:
  /// Throws DomainError for negative drift and DegenerateError when the
  /// function is identically zero.
  BernsteinFunction(std::string id, double drift, LevyMeasure levy, ClosedForm closed = {},
                    Certificates certs = {});

  const std::string& id() const noexcept { return id_; }
  double drift() const noexcept { return scale_ * drift_; }
  LevyMeasure levy() const { return levy_.scaled(scale_); }
  bool has_triplet() const noexcept { return has_triplet_; }
  bool has_closed_form() const noexcept { return static_cast<bool>(closed_.phi); }
  bool normalized() const noexcept { return normalized_; }
  const Certificates& certificates() const noexcept { return certs_; }
  std::optional<LevyLowerBound> lower_bound() const;

  /// Closed-form step-law pieces, already scaled. Empty when unavailable.
  std::optional<double> closed_step_pmf(std::size_t m) const;
  std::optional<double> closed_step_tail(std::size_t m) const;
  double closed_step_rel_error() const noexcept { return closed_.step_rel_error; }

  double operator()(double x) const { return eval(x); }
  double eval(double x, EvalMode mode = EvalMode::automatic,
              const quad::Options& opts = {}) const;

  /// Copy scaled by k > 0.
  BernsteinFunction scaled(double k) const;
  /// Same function with a new identifier.
  BernsteinFunction renamed(std::string id) const;
  BernsteinFunction with_normalized_flag() const;

 private:
  double eval_levy(double x, const quad::Options& opts) const;

  std::string id_;
  double drift_ = 0.0;
  LevyMeasure levy_;
  ClosedForm closed_;
  Certificates certs_;
  double scale_ = 1.0;
  bool normalized_ = false;
  bool has_triplet_ = false;
};

/// phi(x); x >= 0.
double eval_phi(const BernsteinFunction& phi, double x, const quad::Options& opts = {});

/// The x > 0 with phi(x) = y, by bracketing bisection and safeguarded Newton.
/// Throws RangeError when y is not in (0, phi(inf)).
double invert_phi(const BernsteinFunction& phi, double y);

/// phi / phi(1). Idempotent on normalized input.
BernsteinFunction normalize(const BernsteinFunction& phi);

enum class Verdict { pass, fail, inconclusive };
const char* to_string(Verdict v);

struct ConditionDiagnostic {
  std::string condition_id;  // log-growth | scaling-limsup | levy-lower-bound | monotone | concavity
  std::vector<double> grid;
  std::vector<double> witness;  // the per-point quantity checked
  double extremum = 0.0;        // min or max of witness, whichever the verdict uses
  Verdict verdict = Verdict::inconclusive;
  std::string note;
};

struct ConditionThresholds {
  double log_growth_min = 1e-3;
  double scaling_margin = 1e-6;
};

/// Heuristic finite-grid diagnostics for the asymptotic growth/scaling
/// conditions and for the Levy lower-bound certificate. One diagnostic for
/// log-growth, one per lambda for scaling, one for the certificate.
std::vector<ConditionDiagnostic> check_conditions(const BernsteinFunction& phi,
                                                  std::span<const double> grid,
                                                  std::span<const double> lambdas,
                                                  const ConditionThresholds& thresholds = {});

/// Nondecreasing and concave on the (sorted) grid; slack scales with |phi|.
ConditionDiagnostic check_shape_monotone(const BernsteinFunction& phi, std::span<const double> grid);
ConditionDiagnostic check_shape_concave(const BernsteinFunction& phi, std::span<const double> grid);

struct InequalityScan {
  double min_value = 0.0;
  double argmin = 0.0;
  double max_deviation = 0.0;  // max |Phi(x) - 1|
};

/// min over the grid of e^{-phi(x)} + phi(1 - e^{-x}). Throws
/// InequalityViolation if it drops below 1 - tol.
InequalityScan appendix_inequality_scan(const BernsteinFunction& phi, std::span<const double> grid,
                                        double tol = 1e-12);

/// phi(t x) >= t phi(x) - 1e-12.
bool subadditivity_check(const BernsteinFunction& phi, double t, double x);

/// Log-spaced points in [lo, hi].
std::vector<double> log_grid(double lo, double hi, std::size_t count);

}  // namespace subord
