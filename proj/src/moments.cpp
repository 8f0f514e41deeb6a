#include "subord/moments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "subord/error.hpp"

namespace subord {
namespace {

enum class Fit { min, max };

struct Family {
  CmRepresentation g;
  std::function<double(std::size_t)> comparator;
  std::function<double(const ExpectationBracket&, std::size_t)> ratio;
  Fit fit;
};

void validate_grid(const std::vector<std::size_t>& grid) {
  if (grid.empty()) throw DomainError("moment report: empty n grid");
  if (grid.front() == 0) throw DomainError("moment report: n must be >= 1");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (grid[i] <= grid[i - 1]) throw DomainError("moment report: n grid must be increasing");
}

double fit_over(const std::vector<MomentRow>& rows, FitRange r, Fit fit) {
  double c = fit == Fit::min ? std::numeric_limits<double>::infinity() : 0.0;
  bool any = false;
  for (const auto& row : rows) {
    if (row.n < r.lo || row.n > r.hi) continue;
    c = fit == Fit::min ? std::min(c, row.ratio) : std::max(c, row.ratio);
    any = true;
  }
  if (!any) throw DomainError("moment report: fit range holds no grid point");
  return c;
}

MomentReport run(const BernsteinFunction& phi, const StepLaw& step, const Family& fam,
                 const MomentOptions& opts, bool subexp_defaults) {
  validate_grid(opts.n_grid);
  if (step.source != phi.id())
    throw DomainError("moment report: step law was built from '" + step.source + "', not '" +
                      phi.id() + "'");

  MomentReport rep;
  rep.source = phi.id();
  rep.g = fam.g;

  const std::size_t N = opts.n_grid.back();
  rep.base = opts.base;
  rep.doubled = opts.doubled;
  if (rep.base.hi == 0) rep.base = subexp_defaults ? FitRange{N / 4, N / 2} : FitRange{1, N / 2};
  if (rep.doubled.hi == 0) rep.doubled = subexp_defaults ? FitRange{N / 2, N} : FitRange{1, N};

  std::size_t next = 0;
  for_each_t_n(step, N, opts.convolution, [&](const SubordinatorLaw& law) {
    if (next >= opts.n_grid.size() || law.n != opts.n_grid[next]) return;
    ++next;
    MomentRow row;
    row.n = law.n;
    row.bracket = expect_monotone(law, [&](double x) { return fam.g.g(x); });
    row.comparator = fam.comparator(law.n);
    row.ratio = fam.ratio(row.bracket, law.n);
    rep.rows.push_back(std::move(row));
  });

  rep.positive = std::all_of(rep.rows.begin(), rep.rows.end(),
                             [](const MomentRow& r) { return r.bracket.lower > 0.0; });
  // Nonincreasing as far as the brackets can tell: each interval must reach
  // below the upper end of its predecessor.
  rep.nonincreasing = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    if (rep.rows[i].bracket.lower > rep.rows[i - 1].bracket.upper) rep.nonincreasing = false;

  rep.fitted_C = fit_over(rep.rows, rep.doubled, fam.fit);
  rep.base_C = fit_over(rep.rows, rep.base, fam.fit);
  rep.stability = std::abs(rep.fitted_C - rep.base_C) / std::abs(rep.base_C);
  rep.onset = ratio_onset(rep.rows);
  return rep;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

std::vector<std::size_t> n_range(std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> out;
  for (std::size_t n = lo; n <= hi; ++n) out.push_back(n);
  return out;
}

std::size_t ratio_onset(const std::vector<MomentRow>& rows) {
  if (rows.empty()) return 0;
  std::size_t i = rows.size() - 1;
  int dir = 0;  // +1 increasing, -1 decreasing, 0 undecided
  while (i > 0) {
    const double d = rows[i].ratio - rows[i - 1].ratio;
    const int s = d > 0 ? 1 : (d < 0 ? -1 : 0);
    if (dir == 0) dir = s;
    else if (s != 0 && s != dir) break;
    --i;
  }
  return rows[i].n;
}

MomentReport subexp_report(const BernsteinFunction& phi, const StepLaw& step, double theta,
                           double delta, const MomentOptions& opts) {
  const auto cert = phi.lower_bound();
  if (!cert)
    throw PreconditionError("subexp_report: '" + phi.id() +
                            "' carries no Levy lower-bound certificate");
  Family fam;
  fam.g = CmRepresentation::subexp(theta, delta);
  const double kappa = delta / (cert->alpha * (1.0 - delta) + delta);
  fam.comparator = [kappa](std::size_t n) {
    return std::exp(-std::pow(static_cast<double>(n), kappa));
  };
  fam.ratio = [kappa](const ExpectationBracket& b, std::size_t n) {
    return -std::log(b.upper) / std::pow(static_cast<double>(n), kappa);
  };
  fam.fit = Fit::min;

  MomentReport rep = run(phi, step, fam, opts, true);
  rep.kappa = kappa;
  for (const auto& row : rep.rows) {
    // T_n >= n gives E exp(-theta T_n^delta) <= exp(-theta n^delta).
    const double bound = std::exp(-theta * std::pow(static_cast<double>(row.n), delta));
    if (row.bracket.upper > bound * (1.0 + opts.rounding_slack)) {
      if (rep.trivial_bound)
        rep.note += "trivial bound fails at n = " + std::to_string(row.n) + "; ";
      rep.trivial_bound = false;
    }
  }
  const bool stable = rep.stability <= opts.stability_tol;
  rep.pass = rep.fitted_C > 0.0 && stable && rep.trivial_bound && rep.positive &&
             rep.nonincreasing;
  rep.note += "kappa = " + fmt(kappa) + ", C = " + fmt(rep.fitted_C) + " (base " +
              fmt(rep.base_C) + ", change " + fmt(rep.stability) + ")";
  return rep;
}

MomentReport poly_report(const BernsteinFunction& phi, const StepLaw& step, double beta,
                         const MomentOptions& opts) {
  if (!phi.certificates().log_growth_and_scaling)
    throw PreconditionError("poly_report: '" + phi.id() +
                            "' is not certified for the growth and scaling condition");
  Family fam;
  fam.g = CmRepresentation::poly(beta);
  fam.comparator = [&phi, beta](std::size_t n) {
    return std::pow(invert_phi(phi, 1.0 / static_cast<double>(n)), beta);
  };
  fam.ratio = [&fam](const ExpectationBracket& b, std::size_t n) {
    return b.upper / fam.comparator(n);
  };
  fam.fit = Fit::max;

  MomentReport rep = run(phi, step, fam, opts, false);
  const bool bounded = std::isfinite(rep.fitted_C);
  const bool stable = rep.stability <= opts.stability_tol;
  rep.pass = bounded && stable && rep.positive && rep.nonincreasing;
  rep.note = "C = " + fmt(rep.fitted_C) + " (base " + fmt(rep.base_C) + ", change " +
             fmt(rep.stability) + ")";
  return rep;
}

MomentReport log_report(const BernsteinFunction& phi, const StepLaw& step, double gamma,
                        const MomentOptions& opts) {
  if (opts.require_certificate && !phi.lower_bound())
    throw PreconditionError("log_report: '" + phi.id() +
                            "' carries no Levy lower-bound certificate");
  Family fam;
  fam.g = CmRepresentation::log(gamma);
  fam.comparator = [gamma](std::size_t n) {
    return std::pow(std::log1p(static_cast<double>(n)), -gamma);
  };
  fam.ratio = [&fam](const ExpectationBracket& b, std::size_t n) {
    return b.upper / fam.comparator(n);
  };
  fam.fit = Fit::max;

  MomentReport rep = run(phi, step, fam, opts, false);
  // The ratio cannot exceed 1 because T_n >= n; this is a consistency check.
  rep.pass = rep.fitted_C <= 1.0 + opts.rounding_slack && rep.positive && rep.nonincreasing;
  rep.note = "max ratio " + fmt(rep.fitted_C);
  return rep;
}

}  // namespace subord
