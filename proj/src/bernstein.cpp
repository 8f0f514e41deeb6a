#include "subord/bernstein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "subord/error.hpp"

namespace subord {
namespace {

// Split points for a Levy integral whose integrand changes scale near 1/x.
std::vector<double> levy_points(double x, std::span<const double> extra) {
  std::vector<double> pts{0.0, 1.0};
  if (x > 0 && std::isfinite(1.0 / x)) pts.push_back(1.0 / x);
  for (double b : extra)
    if (b > 0 && std::isfinite(b)) pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  pts.push_back(std::numeric_limits<double>::infinity());
  return pts;
}

}  // namespace

// ---------------------------------------------------------------- LevyMeasure

LevyMeasure LevyMeasure::from_density(Fn rho, std::optional<LevyLowerBound> cert) {
  LevyMeasure m;
  m.kind_ = Kind::density;
  m.fn_ = std::move(rho);
  m.cert_ = cert;
  return m;
}

LevyMeasure LevyMeasure::from_stieltjes(Fn w, std::vector<double> breaks,
                                        std::optional<LevyLowerBound> cert) {
  LevyMeasure m;
  m.kind_ = Kind::stieltjes;
  m.fn_ = std::move(w);
  m.breaks_ = std::move(breaks);
  m.cert_ = cert;
  return m;
}

double LevyMeasure::density(double y) const {
  switch (kind_) {
    case Kind::none:
      return 0.0;
    case Kind::density:
      return scale_ * fn_(y);
    case Kind::stieltjes: {
      auto integrand = [&](double t) {
        const double w = fn_(t);
        return w == 0.0 ? 0.0 : std::exp(-t * y) * w;
      };
      const auto pts = levy_points(y, breaks_);
      const quad::Options opts{1e-300, 1e-12};
      const auto r = quad::piecewise(integrand, pts, opts);
      quad::require(r, opts, "Levy density from Stieltjes weight");
      return scale_ * r.value;
    }
  }
  return 0.0;
}

double LevyMeasure::stieltjes_weight(double t) const {
  return kind_ == Kind::stieltjes ? scale_ * fn_(t) : 0.0;
}

LevyMeasure LevyMeasure::scaled(double k) const {
  LevyMeasure m = *this;
  m.scale_ *= k;
  if (m.cert_) m.cert_->c *= k;
  return m;
}

// ---------------------------------------------------------- BernsteinFunction

BernsteinFunction::BernsteinFunction(std::string id, double drift, LevyMeasure levy,
                                     ClosedForm closed, Certificates certs)
    : id_(std::move(id)),
      drift_(drift),
      levy_(std::move(levy)),
      closed_(std::move(closed)),
      certs_(certs) {
  if (!(drift_ >= 0.0) || !std::isfinite(drift_))
    throw DomainError("Bernstein function '" + id_ + "': drift must be a finite number >= 0");
  has_triplet_ = drift_ > 0.0 || !levy_.empty();
  if (!has_triplet_ && !closed_.phi)
    throw DegenerateError("Bernstein function '" + id_ + "' vanishes identically");
}

std::optional<LevyLowerBound> BernsteinFunction::lower_bound() const {
  auto cert = levy_.lower_bound();
  if (cert) cert->c *= scale_;
  return cert;
}

std::optional<double> BernsteinFunction::closed_step_pmf(std::size_t m) const {
  if (!closed_.step_pmf) return std::nullopt;
  return scale_ * closed_.step_pmf(m);
}

std::optional<double> BernsteinFunction::closed_step_tail(std::size_t m) const {
  if (!closed_.step_tail) return std::nullopt;
  return scale_ * closed_.step_tail(m);
}

double BernsteinFunction::eval_levy(double x, const quad::Options& opts) const {
  switch (levy_.kind()) {
    case LevyMeasure::Kind::none:
      return 0.0;
    case LevyMeasure::Kind::density: {
      auto integrand = [&](double y) {
        // Below the overflow point of rho the neglected mass is O(x y^{1-alpha}).
        const double r = levy_.density(y);
        if (r == 0.0 || !std::isfinite(r)) return 0.0;
        return -std::expm1(-x * y) * r;
      };
      const auto r = quad::piecewise(integrand, levy_points(x, {}), opts);
      quad::require(r, opts, "Levy-Khintchine integral");
      return r.value;
    }
    case LevyMeasure::Kind::stieltjes: {
      // int (1 - e^{-xy}) e^{-ty} dy = x / (t (x + t))
      auto integrand = [&](double t) {
        const double w = levy_.stieltjes_weight(t);
        return w == 0.0 ? 0.0 : w * (x / (t * (x + t)));
      };
      std::vector<double> extra(levy_.breaks().begin(), levy_.breaks().end());
      extra.push_back(x);
      std::vector<double> pts{0.0};
      for (double b : extra)
        if (b > 0 && std::isfinite(b)) pts.push_back(b);
      std::sort(pts.begin(), pts.end());
      pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
      pts.push_back(std::numeric_limits<double>::infinity());
      const auto r = quad::piecewise(integrand, pts, opts);
      quad::require(r, opts, "Stieltjes representation integral");
      return r.value;
    }
  }
  return 0.0;
}

double BernsteinFunction::eval(double x, EvalMode mode, const quad::Options& opts) const {
  if (!(x >= 0.0)) throw DomainError("phi is defined on [0, inf); got x = " + std::to_string(x));
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) {
    if (closed_.phi) return scale_ * closed_.phi(x);
    if (drift_ > 0) return x;
    throw RangeError("phi(inf) requested for a function without closed form");
  }
  if (mode == EvalMode::automatic && closed_.phi) return scale_ * closed_.phi(x);
  if (!has_triplet_)
    throw PreconditionError("'" + id_ + "' has no Levy triplet to integrate");
  // levy_ is unscaled here; scale_ is applied once at the end.
  return scale_ * (drift_ * x + eval_levy(x, opts));
}

BernsteinFunction BernsteinFunction::scaled(double k) const {
  if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("scale factor must be positive");
  BernsteinFunction out = *this;
  out.scale_ *= k;
  out.normalized_ = false;
  return out;
}

BernsteinFunction BernsteinFunction::renamed(std::string id) const {
  BernsteinFunction out = *this;
  out.id_ = std::move(id);
  return out;
}

BernsteinFunction BernsteinFunction::with_normalized_flag() const {
  BernsteinFunction out = *this;
  out.normalized_ = true;
  return out;
}

// ------------------------------------------------------------------ operations

double eval_phi(const BernsteinFunction& phi, double x, const quad::Options& opts) {
  return phi.eval(x, EvalMode::automatic, opts);
}

double invert_phi(const BernsteinFunction& phi, double y) {
  if (!(y > 0.0) || !std::isfinite(y))
    throw RangeError("invert_phi: y must lie in (0, phi(inf)); got " + std::to_string(y));

  // A bounded phi can round to its supremum, which the search below would
  // then report as a root.
  if (phi.has_closed_form() && !(y < phi(std::numeric_limits<double>::infinity())))
    throw RangeError("invert_phi: y exceeds the range of phi");

  double lo = 0.0;
  double hi = std::max(1.0, y);
  double f_hi = phi(hi);
  while (f_hi < y) {
    lo = hi;
    hi *= 4.0;
    if (hi > 1e300) throw RangeError("invert_phi: y exceeds the range of phi");
    f_hi = phi(hi);
  }
  if (f_hi == y) return hi;

  // For concave phi with phi(0) = 0 the root sits at most at y / phi'(...);
  // y itself is a good first guess whenever it lies in the bracket.
  double x = (y > lo && y < hi) ? y : 0.5 * (lo + hi);
  for (int iter = 0; iter < 400; ++iter) {
    const double fx = phi(x) - y;
    if (std::abs(fx) <= 1e-13 * std::max(1.0, y)) return x;
    if (fx < 0) lo = x; else hi = x;
    if (hi - lo <= 4 * std::numeric_limits<double>::epsilon() * hi) return 0.5 * (lo + hi);

    const double h = 1e-6 * x;
    const double slope = (phi(x + h) - phi(x - h)) / (2 * h);
    double next = (slope > 0 && std::isfinite(slope)) ? x - fx / slope : lo - 1.0;
    if (!(next > lo && next < hi)) {
      // Bisect, geometrically while the lower end is still 0.
      next = lo > 0 ? 0.5 * (lo + hi) : (x < hi ? 0.5 * x : 0.5 * hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    }
    x = next;
  }
  return x;
}

BernsteinFunction normalize(const BernsteinFunction& phi) {
  const double v = phi(1.0);
  if (!(v > 0.0) || !std::isfinite(v))
    throw DegenerateError("cannot normalize '" + phi.id() + "': phi(1) = " + std::to_string(v));
  if (phi.normalized() && std::abs(v - 1.0) <= 1e-12) return phi;
  return phi.scaled(1.0 / v).with_normalized_flag();
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

std::vector<ConditionDiagnostic> check_conditions(const BernsteinFunction& phi,
                                                  std::span<const double> grid,
                                                  std::span<const double> lambdas,
                                                  const ConditionThresholds& thresholds) {
  std::vector<ConditionDiagnostic> out;

  ConditionDiagnostic growth;
  growth.condition_id = "log-growth";
  growth.extremum = std::numeric_limits<double>::infinity();
  for (double x : grid) {
    if (x < 10.0) continue;
    const double w = phi(x) / std::log(x);
    growth.grid.push_back(x);
    growth.witness.push_back(w);
    growth.extremum = std::min(growth.extremum, w);
  }
  if (growth.grid.empty()) {
    growth.note = "grid has no points >= 10";
  } else {
    growth.verdict = growth.extremum >= thresholds.log_growth_min ? Verdict::pass : Verdict::fail;
    growth.note = "min phi(x)/log x over x >= 10";
  }
  out.push_back(std::move(growth));

  for (double lambda : lambdas) {
    ConditionDiagnostic scaling;
    scaling.condition_id = "scaling-limsup";
    scaling.extremum = -std::numeric_limits<double>::infinity();
    for (double x : grid) {
      if (x > 0.1 || x <= 0.0) continue;
      const double base = phi(x);
      if (!(base > 0.0)) continue;
      const double w = phi(lambda * x) / base;
      scaling.grid.push_back(x);
      scaling.witness.push_back(w);
      scaling.extremum = std::max(scaling.extremum, w);
    }
    scaling.note = "max phi(lambda x)/phi(x) over x <= 0.1, lambda = " + std::to_string(lambda);
    if (!(lambda > 1.0)) {
      scaling.note += " (lambda must exceed 1)";
    } else if (!scaling.grid.empty()) {
      scaling.verdict =
          scaling.extremum >= 1.0 + thresholds.scaling_margin ? Verdict::pass : Verdict::fail;
    }
    out.push_back(std::move(scaling));
  }

  ConditionDiagnostic cert;
  cert.condition_id = "levy-lower-bound";
  const auto bound = phi.lower_bound();
  if (!bound || !phi.has_triplet()) {
    cert.note = "no certificate attached";
  } else {
    const LevyMeasure levy = phi.levy();
    cert.extremum = std::numeric_limits<double>::infinity();
    for (double y : grid) {
      if (y <= 0.0) continue;
      const double ratio = levy.density(y) / (bound->c * std::pow(y, -1.0 - bound->alpha));
      cert.grid.push_back(y);
      cert.witness.push_back(ratio);
      cert.extremum = std::min(cert.extremum, ratio);
    }
    cert.verdict = cert.extremum >= 1.0 - 1e-12 ? Verdict::pass : Verdict::fail;
    cert.note = "min rho(y) / (c y^{-1-alpha})";
  }
  out.push_back(std::move(cert));
  return out;
}

ConditionDiagnostic check_shape_monotone(const BernsteinFunction& phi,
                                         std::span<const double> grid) {
  ConditionDiagnostic d;
  d.condition_id = "monotone";
  d.grid.assign(grid.begin(), grid.end());
  d.verdict = Verdict::pass;
  d.extremum = std::numeric_limits<double>::infinity();
  double prev = grid.empty() ? 0.0 : phi(grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double cur = phi(grid[i]);
    const double slack = 1e-10 * std::max(1.0, std::abs(cur));
    d.witness.push_back(cur - prev);
    d.extremum = std::min(d.extremum, cur - prev);
    if (cur < prev - slack) d.verdict = Verdict::fail;
    prev = cur;
  }
  d.note = "min phi(x_{i+1}) - phi(x_i)";
  return d;
}

ConditionDiagnostic check_shape_concave(const BernsteinFunction& phi,
                                        std::span<const double> grid) {
  ConditionDiagnostic d;
  d.condition_id = "concavity";
  d.grid.assign(grid.begin(), grid.end());
  d.verdict = Verdict::pass;
  d.extremum = std::numeric_limits<double>::infinity();
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = phi(grid[i]);
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    const double x = grid[i - 1], y = grid[i], z = grid[i + 1];
    const double interp = v[i - 1] + (v[i + 1] - v[i - 1]) * (y - x) / (z - x);
    const double excess = v[i] - interp;  // >= 0 for concave phi
    d.witness.push_back(excess);
    d.extremum = std::min(d.extremum, excess);
    if (excess < -1e-10 * std::max(1.0, std::abs(v[i + 1]))) d.verdict = Verdict::fail;
  }
  d.note = "min phi(y) - chord(x, z)(y) over consecutive triples";
  return d;
}

InequalityScan appendix_inequality_scan(const BernsteinFunction& phi,
                                        std::span<const double> grid, double tol) {
  InequalityScan scan;
  scan.min_value = std::numeric_limits<double>::infinity();
  for (double x : grid) {
    const double value = std::exp(-phi(x)) + phi(-std::expm1(-x));
    if (value < scan.min_value) {
      scan.min_value = value;
      scan.argmin = x;
    }
    scan.max_deviation = std::max(scan.max_deviation, std::abs(value - 1.0));
  }
  if (scan.min_value < 1.0 - tol)
    throw InequalityViolation("e^{-phi(x)} + phi(1 - e^{-x}) = " + std::to_string(scan.min_value) +
                              " < 1 at x = " + std::to_string(scan.argmin) + " for '" +
                              phi.id() + "'");
  return scan;
}

bool subadditivity_check(const BernsteinFunction& phi, double t, double x) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("subadditivity_check: t must lie in [0, 1]");
  if (!(x >= 0.0)) throw DomainError("subadditivity_check: x must be >= 0");
  return phi(t * x) >= t * phi(x) - 1e-12;
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  std::vector<double> g(count);
  if (count == 1) {
    g[0] = lo;
    return g;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i)
    g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

}  // namespace subord
