#include "subord/cm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include <boost/math/special_functions/gamma.hpp>

#include "subord/error.hpp"

namespace subord {
namespace {

using std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> ordered(std::vector<double> pts) {
  pts.erase(std::remove_if(pts.begin(), pts.end(),
                           [](double p) { return !(p >= 0.0) || !std::isfinite(p); }),
            pts.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  pts.push_back(kInf);
  return pts;
}

// int_a^inf f through t = e^u, for integrands decaying like t^{-1-q} with q
// possibly tiny, where exp_sinh stalls. Past the overflow point the rest is
// taken as the power law f(t) t / q.
quad::Result power_tail(const std::function<double(double)>& f, double a, double q,
                        const quad::Options& opts) {
  const double u_end = 709.0;
  std::vector<double> us{std::log(a)};
  for (double step = 1.0; us.back() + step < u_end; step *= 2.0) us.push_back(us.back() + step);
  us.push_back(u_end);
  auto in_u = [&](double u) {
    const double t = std::exp(u);
    const double v = f(t);
    return v == 0.0 ? 0.0 : v * t;
  };
  auto r = quad::piecewise(in_u, us, opts);
  if (q > 0.0 && std::isfinite(q)) r.value += in_u(u_end) / q;
  return r;
}

// Density of the measure with Laplace transform exp(-theta x^delta), through
// Zolotarev's integral: for theta = 1 and a = delta,
//
//   m(x) = a / ((1-a) pi x) \int_0^pi w e^{-w} dphi,   w = A(phi) x^{-a/(1-a)},
//   A(phi) = (sin(a phi) / sin phi)^{1/(1-a)} sin((1-a) phi) / sin(a phi).
//
// The integrand is positive and bounded by 1/e, so there is no cancellation;
// the half near pi is written in pi - phi to keep sin(phi) accurate.
double pollard(double theta, double delta, double t) {
  const double scale = std::pow(theta, -1.0 / delta);
  const double x = scale * t;
  const double a = delta, b = 1.0 - delta;
  if (std::pow(x, -a) <= 0.3) {
    // Far tail: m(x) = 1/(pi x) sum_k (-1)^{k+1} Gamma(k a + 1) / k! sin(k pi a) x^{-k a}.
    const double log_y = -a * std::log(x);
    double sum = 0.0;
    for (int k = 1; k < 200; ++k) {
      const double mag = std::exp(std::lgamma(k * a + 1.0) - std::lgamma(k + 1.0) + k * log_y);
      sum += (k % 2 ? 1.0 : -1.0) * mag * std::sin(k * pi * a);
      if (mag < 1e-18 * std::abs(sum)) break;
    }
    return scale * std::max(0.0, sum) / (pi * x);
  }
  const double log_z = -(a / b) * std::log(x);
  auto log_w = [&](double sin_p, double sin_ap, double sin_bp) {
    return std::log(sin_ap / sin_p) / b + std::log(sin_bp / sin_ap) + log_z;
  };
  auto term = [](double lw) { return lw > 709.0 ? 0.0 : std::exp(lw - std::exp(lw)); };
  // log w increases with phi; in pi - phi it decreases.
  auto lw_low = [&](double p) { return log_w(std::sin(p), std::sin(a * p), std::sin(b * p)); };
  auto lw_high = [&](double e) {
    return log_w(std::sin(e), std::sin(a * (pi - e)), std::sin(b * (pi - e)));
  };
  auto low = [&](double p) { return p > 0.0 ? term(lw_low(p)) : 0.0; };
  auto high = [&](double e) { return e > 0.0 ? term(lw_high(e)) : 0.0; };

  // For delta near 1 the integrand is a spike of relative width ~ 1 - delta;
  // split both halves where log w crosses fixed levels around the peak.
  std::vector<double> low_pts{0.0, pi / 2}, high_pts{0.0, pi / 2};
  const double mid = lw_low(pi / 2);
  for (double level : {-30.0, -6.0, -2.0, -0.5, 0.0, 0.5, 1.5, 3.0, 6.0}) {
    const bool in_low = level < mid;
    if (in_low && !(level > lw_low(1e-300))) continue;
    double lo = 1e-300, hi = pi / 2;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double m = 0.5 * (lo + hi);
      const double v = in_low ? lw_low(m) : lw_high(m);
      ((v < level) == in_low ? lo : hi) = m;
    }
    (in_low ? low_pts : high_pts).push_back(0.5 * (lo + hi));
  }
  std::sort(low_pts.begin(), low_pts.end());
  std::sort(high_pts.begin(), high_pts.end());
  // log w carries a rounding error of ~eps / (1 - delta), hence the looser
  // target as delta approaches 1.
  const quad::Options opts{1e-300, std::max(1e-12, 1e-14 / b)};
  auto r = quad::piecewise(low, low_pts, opts);
  const auto h = quad::piecewise(high, high_pts, opts);
  r.value += h.value;
  r.error += h.error;
  r.l1 += h.l1;
  quad::require(r, opts, "stable density");
  return scale * a / (b * pi * x) * r.value;
}

// t m(t) for the log family, as a function of log t so that t may underflow:
// e^{-t} / Gamma(gamma) \int_0^inf exp(s log t + (gamma-1) log s - lgamma(s)) ds.
// For t > 1 the exponent cancels badly, so the Gamma(s) density at t is
// taken from boost instead. Beyond 1e10 the Gamma(s) densities at t
// integrate to 1 up to O(1/t) and m(t) = t^{gamma-1} / Gamma(gamma).
double log_family_tm(double log_t, double gamma) {
  const double t = std::exp(log_t);
  if (t > 1e10) return std::exp(gamma * log_t - std::lgamma(gamma));
  std::function<double(double)> integrand;
  if (t > 1.0) {
    integrand = [&](double s) {
      if (s == 0.0) return 0.0;
      return t * std::pow(s, gamma - 1.0) * boost::math::gamma_p_derivative(s, t);
    };
  } else {
    integrand = [&](double s) {
      if (s == 0.0) return 0.0;
      return std::exp(s * log_t - t + (gamma - 1.0) * std::log(s) - std::lgamma(s));
    };
  }
  std::vector<double> pts{0.0, 1.0};
  for (double s = 1.0 / std::max(1.0, std::abs(log_t)); s < 1.0; s *= 4.0) pts.push_back(s);
  if (t > 1.0) {
    const double spread = 8.0 * std::sqrt(t);
    pts.insert(pts.end(), {t, std::max(1.0, t - spread), t + spread});
  }
  const quad::Options opts{1e-300, 1e-11};
  const auto r = quad::piecewise(integrand, ordered(std::move(pts)), opts);
  quad::require(r, opts, "log-family representation density");
  return r.value / std::tgamma(gamma);
}

}  // namespace

CmRepresentation CmRepresentation::subexp(double theta, double delta) {
  if (!(theta > 0.0) || !std::isfinite(theta))
    throw DomainError("subexp: theta must be > 0");
  if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("subexp: delta must lie in (0, 1]");
  CmRepresentation r;
  r.family = CmFamily::subexp;
  r.theta = theta;
  r.delta = delta;
  return r;
}

CmRepresentation CmRepresentation::poly(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("poly: beta must be > 0");
  CmRepresentation r;
  r.family = CmFamily::poly;
  r.beta = beta;
  return r;
}

CmRepresentation CmRepresentation::log(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("log: gamma must be > 0");
  CmRepresentation r;
  r.family = CmFamily::log;
  r.gamma = gamma;
  return r;
}

double CmRepresentation::g(double x) const {
  switch (family) {
    case CmFamily::subexp: return std::exp(-theta * std::pow(x, delta));
    case CmFamily::poly: return std::pow(x, -beta);
    case CmFamily::log: return std::pow(std::log1p(x), -gamma);
  }
  return 0.0;
}

std::string CmRepresentation::label() const {
  std::ostringstream os;
  switch (family) {
    case CmFamily::subexp: os << "subexp(theta=" << theta << ",delta=" << delta << ")"; break;
    case CmFamily::poly: os << "poly(beta=" << beta << ")"; break;
    case CmFamily::log: os << "log(gamma=" << gamma << ")"; break;
  }
  return os.str();
}

double cm_density(const CmRepresentation& rep, double t) {
  if (!(t > 0.0)) throw DomainError("cm_density: t must be > 0");
  switch (rep.family) {
    case CmFamily::subexp:
      if (rep.has_atom()) return 0.0;
      return pollard(rep.theta, rep.delta, t);
    case CmFamily::poly:
      return std::exp((rep.beta - 1.0) * std::log(t) - std::lgamma(rep.beta));
    case CmFamily::log:
      return log_family_tm(std::log(t), rep.gamma) / t;
  }
  return 0.0;
}

struct ContinuousMoments::Impl {
  BernsteinFunction phi;
  CmRepresentation rep;
  quad::Options opts;
  std::vector<double> points;  // outer breakpoints (in u = -log t for the log family)
  mutable std::mutex mutex;
  mutable std::unordered_map<double, double> memo;

  Impl(BernsteinFunction f, CmRepresentation r, quad::Options o)
      : phi(std::move(f)), rep(r), opts(o) {}

  // Memoized density of mu (t m(t) as a function of u for the log family).
  template <class F>
  double cached(double key, F&& compute) const {
    {
      std::lock_guard lock(mutex);
      if (auto it = memo.find(key); it != memo.end()) return it->second;
    }
    const double v = compute();
    std::lock_guard lock(mutex);
    memo.emplace(key, v);
    return v;
  }
};

ContinuousMoments::ContinuousMoments(BernsteinFunction phi, CmRepresentation rep,
                                     const quad::Options& opts)
    : impl_(std::make_unique<Impl>(std::move(phi), rep, opts)) {
  auto& s = *impl_;
  if (rep.family == CmFamily::log) {
    s.points = {0.0};
    for (double u = 0.5; u < 1024.0; u *= 2.0) s.points.push_back(u);
    s.points.push_back(kInf);
  } else if (rep.family == CmFamily::subexp && !rep.has_atom()) {
    // mu[0, t_c] <= e^{x t_c} exp(-theta x^delta) for every x > 0. With
    // t_c = theta delta x^{delta-1} the bound is exp(-theta (1-delta) x^delta),
    // chosen here as e^{-80}; below t_c the density is pure rounding noise.
    const double x = std::pow(80.0 / (rep.theta * (1.0 - rep.delta)), 1.0 / rep.delta);
    const double t_c = rep.theta * rep.delta * std::pow(x, rep.delta - 1.0);
    for (double t = t_c; t < 1e4; t *= 4.0) s.points.push_back(t);
    s.points.push_back(std::pow(rep.theta, 1.0 / rep.delta));
    s.points = ordered(std::move(s.points));
  }
}

ContinuousMoments::ContinuousMoments(ContinuousMoments&&) noexcept = default;
ContinuousMoments::~ContinuousMoments() = default;

const CmRepresentation& ContinuousMoments::representation() const noexcept { return impl_->rep; }
const BernsteinFunction& ContinuousMoments::phi() const noexcept { return impl_->phi; }

std::size_t ContinuousMoments::cached_densities() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->memo.size();
}

double ContinuousMoments::operator()(double n) const {
  if (!(n > 0.0)) throw DomainError("continuous_moment: n must be > 0");
  const auto& s = *impl_;
  const auto& rep = s.rep;
  const auto& phi = s.phi;
  if (rep.has_atom()) return std::exp(-n * phi(rep.theta));
  double tail_decay = kInf;

  // mu(dt) ~ t^{p-1} dt / Gamma(p) at infinity for the power and log
  // families, so the moment is infinite once e^{-n phi(t)} t^p stops decaying.
  // The slope of n phi against log t is read off far out.
  if (rep.family != CmFamily::subexp) {
    const double p = rep.family == CmFamily::poly ? rep.beta : rep.gamma;
    const double slope = n * (phi(1e300) - phi(1e299)) / std::numbers::ln10;
    if (std::isfinite(slope) && p - slope >= 0.0) return kInf;
    tail_decay = slope - p;
  }

  if (rep.family == CmFamily::log) {
    // (0, 1] through t = e^{-u}; the density decays only like 1/(t log^2 t) there.
    auto near_zero = [&](double u) {
      const double tm = s.cached(-u, [&] { return log_family_tm(-u, rep.gamma); });
      return tm == 0.0 ? 0.0 : std::exp(-n * phi(std::exp(-u))) * tm;
    };
    auto above_one = [&](double t) {
      const double decay = std::exp(-n * phi(t));
      if (decay == 0.0) return 0.0;
      const double log_t = std::log(t);
      const double tm = s.cached(log_t, [&] { return log_family_tm(log_t, rep.gamma); });
      return decay * (tm / t);
    };
    const auto a = quad::piecewise(near_zero, s.points, s.opts);
    quad::require(a, s.opts, "continuous moment near t = 0");
    const auto b = power_tail(above_one, 1.0, tail_decay, s.opts);
    quad::require(b, s.opts, "continuous moment for t >= 1");
    return a.value + b.value;
  }

  if (rep.family == CmFamily::subexp) {
    auto integrand = [&](double t) {
      const double decay = std::exp(-n * phi(t));
      if (decay == 0.0) return 0.0;
      const double m = s.cached(t, [&] { return pollard(rep.theta, rep.delta, t); });
      return decay * m;
    };
    const auto r = quad::piecewise(integrand, s.points, s.opts);
    quad::require(r, s.opts, "continuous moment");
    return r.value;
  }

  // Power family: the density is explicit, so breakpoints may follow n.
  double pivot = 1.0;
  try {
    pivot = invert_phi(phi, 1.0 / n);
  } catch (const RangeError&) {
  }
  auto integrand = [&](double t) {
    const double m = cm_density(rep, t);
    return m == 0.0 ? 0.0 : std::exp(-n * phi(t)) * m;
  };
  auto pts = ordered({0.0, 1.0, pivot / 16.0, pivot, 16.0 * pivot});
  pts.pop_back();
  const auto r = quad::piecewise(integrand, pts, s.opts);
  quad::require(r, s.opts, "continuous moment");
  const auto tail = power_tail(integrand, pts.back(), tail_decay, s.opts);
  quad::require(tail, s.opts, "continuous moment tail");
  return r.value + tail.value;
}

double continuous_moment(const BernsteinFunction& phi, double n, const CmRepresentation& rep,
                         const quad::Options& opts) {
  return ContinuousMoments(phi, rep, opts)(n);
}

DominanceReport dominance_check(const ContinuousMoments& continuous, std::size_t n,
                                const SubordinatorLaw& law, double tol) {
  if (law.n != n) throw DomainError("dominance_check: law is for a different n");
  const auto& phi = continuous.phi();
  if (law.source != phi.id())
    throw DomainError("dominance_check: law was built from '" + law.source + "', not '" +
                      phi.id() + "'");
  const auto& rep = continuous.representation();
  DominanceReport out;
  out.n = n;
  out.discrete = expect_monotone(law, [&](double x) { return rep.g(x); });
  out.continuous = continuous(static_cast<double>(n));
  out.margin = out.continuous - out.discrete.lower;
  out.holds = out.discrete.lower <= out.continuous + tol;
  if (!out.holds)
    throw DominanceViolation("E g(T_n) lower bracket " + std::to_string(out.discrete.lower) +
                             " exceeds E g(S_n) = " + std::to_string(out.continuous) + " for " +
                             rep.label() + ", n = " + std::to_string(n) + ", phi '" + phi.id() +
                             "'");
  return out;
}

DominanceReport dominance_check(const BernsteinFunction& phi, std::size_t n,
                                const CmRepresentation& rep, const SubordinatorLaw& law,
                                double tol) {
  return dominance_check(ContinuousMoments(phi, rep), n, law, tol);
}

double sample_stable_S(double alpha, double t, Rng& rng) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DomainError("sample_stable_S: alpha must lie in the open interval (0,1)");
  if (!(t > 0.0)) throw DomainError("sample_stable_S: t must be > 0");
  const double u = pi * rng.uniform();
  const double e = rng.exponential();
  const double x = std::sin(alpha * u) / std::pow(std::sin(u), 1.0 / alpha) *
                   std::pow(std::sin((1.0 - alpha) * u) / e, (1.0 - alpha) / alpha);
  return std::pow(t, 1.0 / alpha) * x;
}

double sample_stable_S(double alpha, double t, std::uint64_t seed) {
  Rng rng(seed);
  return sample_stable_S(alpha, t, rng);
}

MonteCarloMean mc_mean_stable(double alpha, double t, std::size_t samples, std::uint64_t seed,
                              const std::function<double(double)>& g) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DomainError("mc_mean_stable: alpha must lie in the open interval (0,1)");
  return chunked_mean(samples, seed,
                      [&](Rng& rng) { return g(sample_stable_S(alpha, t, rng)); });
}

}  // namespace subord
