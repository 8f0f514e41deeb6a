#include "subord/subordinator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <optional>

#include "subord/error.hpp"
#include "subord/kernels.hpp"

namespace subord {
namespace {

constexpr double kUnit = std::numeric_limits<double>::epsilon() / 2;
constexpr long double kUnitLong = std::numeric_limits<long double>::epsilon() / 2;

// Error factor of a floating sum of k nonnegative products.
double gamma_k(std::size_t k) {
  const double ku = static_cast<double>(k + 1) * kUnit;
  return ku / (1.0 - ku);
}

std::vector<double> sorted_points(std::vector<double> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  pts.push_back(std::numeric_limits<double>::infinity());
  return pts;
}

// (1/m!) \int y^m e^{-y} rho(y) dy
double levy_moment(const LevyMeasure& levy, std::size_t m, double rel_tol) {
  const double md = static_cast<double>(m);
  const quad::Options opts{1e-300, rel_tol};
  quad::Result r;
  if (levy.kind() == LevyMeasure::Kind::density) {
    const double log_fact = std::lgamma(md + 1.0);
    auto integrand = [&](double y) {
      const double rho = levy.density(y);
      if (rho == 0.0 || !std::isfinite(rho)) return 0.0;
      return std::exp(md * std::log(y) - y - log_fact) * rho;
    };
    const double spread = 8.0 * std::sqrt(md + 1.0);
    std::vector<double> pts{0.0, 1.0, md};
    if (md - spread > 1.0) pts.push_back(md - spread);
    pts.push_back(md + spread + 8.0);
    r = quad::piecewise(integrand, sorted_points(std::move(pts)), opts);
  } else {
    // rho(y) = \int e^{-ty} w(t) dt turns the moment into \int w(t) (1+t)^{-m-1} dt.
    auto integrand = [&](double t) {
      const double w = levy.stieltjes_weight(t);
      return w == 0.0 ? 0.0 : w * std::exp(-(md + 1.0) * std::log1p(t));
    };
    std::vector<double> pts{0.0, 1.0};
    for (double t = 1.0 / (md + 1.0); t < 1.0; t *= 4.0) pts.push_back(t);
    for (double b : levy.breaks())
      if (b > 0 && std::isfinite(b)) pts.push_back(b);
    r = quad::piecewise(integrand, sorted_points(std::move(pts)), opts);
  }
  quad::require(r, opts, "step probability c(phi, m)");
  return r.value;
}

// Working representation of a truncated law: p[k] ~ P(X = offset + k).
struct Seq {
  std::vector<double> p;
  std::size_t offset = 0;
  std::size_t tail_start = 0;
  double residual = 0.0;
  double rel = 0.0;
  double abs = 0.0;
  bool capped = false;
};

double sum_of(const std::vector<double>& v) {
  long double s = 0;
  for (double x : v) s += x;
  return static_cast<double>(s);
}

Seq from_step(const StepLaw& step) {
  Seq s;
  s.p = step.pmf;
  s.offset = 1;
  s.tail_start = step.M + 1;
  s.residual = step.residual;
  s.rel = step.rel_error;
  return s;
}

bool use_fft(ConvolutionMethod method, std::size_t la, std::size_t lb, std::size_t lout,
             double limit) {
  switch (method) {
    case ConvolutionMethod::direct: return false;
    case ConvolutionMethod::fft: return true;
    case ConvolutionMethod::automatic: return kernels::direct_cost(la, lb, lout) > limit;
  }
  return false;
}

std::size_t output_length(std::size_t la, std::size_t lb, const ConvolutionOptions& opts) {
  const std::size_t full = la + lb - 1;
  const std::size_t len = opts.cap > 0 ? std::min(full, opts.cap) : full;
  if (len > opts.budget)
    throw BudgetError("T_n support of " + std::to_string(len) + " entries exceeds the budget of " +
                      std::to_string(opts.budget) + "; lower M or n, or set a support cap");
  return len;
}

// Combines everything except the convolution values themselves.
Seq combine_meta(const Seq& a, const Seq& b, std::vector<double> out, double round_rel,
                 double round_abs) {
  Seq c;
  const std::size_t len = out.size();
  const bool cut = len < a.p.size() + b.p.size() - 1;
  c.offset = a.offset + b.offset;
  c.tail_start = std::min(a.tail_start + b.offset, a.offset + b.tail_start);
  if (cut) c.tail_start = std::min(c.tail_start, c.offset + len);
  c.capped = a.capped || b.capped || cut;

  const double mass_a = sum_of(a.p), mass_b = sum_of(b.p);
  c.p = std::move(out);
  const double dropped = cut ? std::max(0.0, mass_a * mass_b - sum_of(c.p)) : 0.0;
  c.residual = std::min(1.0, 1.0 - (1.0 - a.residual) * (1.0 - b.residual) + dropped);

  const double delta = a.rel + b.rel + a.rel * b.rel;
  const double cross = b.abs * (1.0 + a.rel) + a.abs * (1.0 + b.rel) +
                       a.abs * b.abs * static_cast<double>(std::min(a.p.size(), b.p.size()));
  c.rel = delta + round_rel * (1.0 + delta);
  c.abs = cross * (1.0 + round_rel) + round_abs;
  return c;
}

Seq convolve_seq(const Seq& a, const Seq& b, const ConvolutionOptions& opts) {
  const std::size_t len = output_length(a.p.size(), b.p.size(), opts);
  std::vector<double> out(len);
  if (use_fft(opts.method, a.p.size(), b.p.size(), len, opts.direct_limit)) {
    const double bound = kernels::convolve_fft(a.p, b.p, out);
    return combine_meta(a, b, std::move(out), 0.0, bound);
  }
  kernels::convolve_parallel(a.p, b.p, out);
  return combine_meta(a, b, std::move(out), gamma_k(std::min(a.p.size(), b.p.size())), 0.0);
}

SubordinatorLaw to_law(Seq s, const std::string& source, std::size_t n, std::size_t M) {
  SubordinatorLaw law;
  law.source = source;
  law.n = n;
  law.M = M;
  law.pmf = std::move(s.p);
  law.residual = s.residual;
  law.tail_start = s.tail_start;
  law.rel_error = s.rel;
  law.abs_error = s.abs;
  law.capped = s.capped;
  return law;
}

Seq from_law(const SubordinatorLaw& law) {
  Seq s;
  s.p = law.pmf;
  s.offset = law.n;
  s.tail_start = law.tail_start;
  s.residual = law.residual;
  s.rel = law.rel_error;
  s.abs = law.abs_error;
  s.capped = law.capped;
  return s;
}

}  // namespace

double StepLaw::mass() const { return sum_of(pmf); }
double SubordinatorLaw::mass() const { return sum_of(pmf); }

double step_pmf_quadrature(const BernsteinFunction& phi, std::size_t m, double rel_tol) {
  if (m == 0) return 0.0;
  if (!phi.has_triplet())
    throw PreconditionError("'" + phi.id() + "' has no Levy triplet; c(phi, m) is undefined");
  double c = levy_moment(phi.levy(), m, rel_tol);
  if (m == 1) c += phi.drift();
  return c;
}

StepLaw step_law(const BernsteinFunction& phi, std::size_t M, const StepLawOptions& opts) {
  if (M == 0) throw DomainError("step_law: truncation M must be >= 1");
  if (!phi.normalized() && std::abs(phi(1.0) - 1.0) > 1e-12)
    throw PreconditionError("step_law: '" + phi.id() + "' is not normalized (phi(1) != 1)");

  StepLaw law;
  law.source = phi.id();
  law.M = M;
  law.pmf.assign(M, 0.0);
  law.heavy_tail = phi.certificates().heavy_tail;

  const bool have_closed = phi.closed_step_pmf(1).has_value();
  if (opts.method == StepMethod::closed && !have_closed)
    throw PreconditionError("step_law: '" + phi.id() + "' has no closed-form step law");
  const bool closed = have_closed && opts.method != StepMethod::quadrature;

  if (closed) {
    for (std::size_t m = 1; m <= M; ++m) law.pmf[m - 1] = *phi.closed_step_pmf(m);
    law.closed_form = true;
    law.rel_error = phi.closed_step_rel_error();
    law.residual = phi.closed_step_tail(M).value_or(std::max(0.0, 1.0 - law.mass()));
  } else {
    if (!phi.has_triplet())
      throw PreconditionError("'" + phi.id() + "' has no Levy triplet; c(phi, m) is undefined");
    const LevyMeasure levy = phi.levy();
    std::exception_ptr failure;
    const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(M);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      try {
        law.pmf[i] = levy_moment(levy, static_cast<std::size_t>(i) + 1, opts.rel_tol);
      } catch (...) {
#pragma omp critical(step_law_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    law.pmf[0] += phi.drift();
    law.rel_error = opts.rel_tol;
    law.residual = std::max(0.0, 1.0 - law.mass());
  }

  if (!law.heavy_tail && law.residual > opts.residual_ceiling)
    throw TruncationError("step law of '" + phi.id() + "' leaves residual " +
                          std::to_string(law.residual) + " beyond M = " + std::to_string(M) +
                          " (ceiling " + std::to_string(opts.residual_ceiling) +
                          "); increase M");
  return law;
}

double pgf_residual(const StepLaw& law, const BernsteinFunction& phi, double s) {
  if (!(s >= 0.0 && s < 1.0)) throw DomainError("pgf_residual: s must lie in [0, 1)");
  long double sum = 0;
  double power = 1.0;
  for (std::size_t m = 1; m <= law.M; ++m) {
    power *= s;
    if (power == 0.0) break;
    sum += static_cast<long double>(law.pmf[m - 1]) * power;
  }
  return std::abs(static_cast<double>(sum) - (1.0 - phi(1.0 - s)));
}

SubordinatorLaw t_n_law(const StepLaw& step, std::size_t n, const ConvolutionOptions& opts) {
  if (n == 0) throw DomainError("t_n_law: n must be >= 1");
  std::optional<Seq> result;
  Seq base = from_step(step);
  if (opts.cap > 0 && base.p.size() > opts.cap) {
    // The step law itself is cut: its dropped mass joins the tail.
    const double before = sum_of(base.p);
    base.p.resize(opts.cap);
    base.residual = std::min(1.0, base.residual + std::max(0.0, before - sum_of(base.p)));
    base.tail_start = std::min(base.tail_start, base.offset + opts.cap);
    base.capped = true;
  }
  std::size_t k = n;
  while (true) {
    if (k & 1) result = result ? convolve_seq(*result, base, opts) : base;
    k >>= 1;
    if (k == 0) break;
    base = convolve_seq(base, base, opts);
  }
  return to_law(std::move(*result), step.source, n, step.M);
}

SubordinatorLaw convolve_laws(const SubordinatorLaw& a, const SubordinatorLaw& b,
                              const ConvolutionOptions& opts) {
  Seq c = convolve_seq(from_law(a), from_law(b), opts);
  return to_law(std::move(c), a.source, a.n + b.n, std::max(a.M, b.M));
}

void for_each_t_n(const StepLaw& step, std::size_t n_max, const ConvolutionOptions& opts,
                  const std::function<void(const SubordinatorLaw&)>& visit) {
  if (n_max == 0) return;
  SubordinatorLaw first = t_n_law(step, 1, opts);
  visit(first);
  if (n_max == 1) return;

  const Seq kernel = from_law(first);
  Seq cur = kernel;
  std::unique_ptr<kernels::FftConvolver> fft;
  const std::size_t widest = opts.cap > 0 ? opts.cap : n_max * (kernel.p.size() - 1) + 1;

  for (std::size_t n = 2; n <= n_max; ++n) {
    const std::size_t len = output_length(cur.p.size(), kernel.p.size(), opts);
    std::vector<double> out(len);
    if (use_fft(opts.method, cur.p.size(), kernel.p.size(), len, opts.direct_limit)) {
      if (!fft) fft = std::make_unique<kernels::FftConvolver>(kernel.p, widest);
      const double bound = fft->convolve(cur.p, out);
      cur = combine_meta(cur, kernel, std::move(out), 0.0, bound);
    } else {
      kernels::convolve_parallel(cur.p, kernel.p, out);
      cur = combine_meta(cur, kernel, std::move(out),
                         gamma_k(std::min(cur.p.size(), kernel.p.size())), 0.0);
    }
    SubordinatorLaw law = to_law(cur, step.source, n, step.M);
    visit(law);
  }
}

ExpectationBracket expect_monotone(const SubordinatorLaw& law,
                                   const std::function<double(double)>& g) {
  const std::size_t L = law.pmf.size();
  std::vector<double> gv(L);
  for (std::size_t k = 0; k < L; ++k) {
    const double v = g(static_cast<double>(law.n + k));
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ContractError("expect_monotone: g(" + std::to_string(law.n + k) +
                          ") is negative or not finite");
    if (k > 0 && v > gv[k - 1] * (1.0 + 8 * kUnit))
      throw ContractError("expect_monotone: g increases between " +
                          std::to_string(law.n + k - 1) + " and " + std::to_string(law.n + k));
    gv[k] = v;
  }
  const double g_tail = g(static_cast<double>(law.tail_start));
  if (!(g_tail >= 0.0) || !std::isfinite(g_tail) ||
      (L > 0 && law.tail_start > law.last() && g_tail > gv[L - 1] * (1.0 + 8 * kUnit)))
    throw ContractError("expect_monotone: g is not nonincreasing up to the tail start");

  // Componentwise bounds on the exact truncated probabilities.
  const double rel = law.rel_error, abs = law.abs_error;
  if (!(rel < 1.0)) throw NumericError("expect_monotone: error model is too loose to bracket");
  long double lower = 0, upper = 0, mass_lo = 0;
  for (std::size_t k = 0; k < L; ++k) {
    const double p = law.pmf[k];
    const double lo = std::max(0.0, (p - abs) / (1.0 + rel));
    const double hi = (p + abs) / (1.0 - rel);
    lower += static_cast<long double>(gv[k]) * lo;
    upper += static_cast<long double>(gv[k]) * hi;
    mass_lo += lo;
  }
  // Rounding of the divisions, products and long double sums.
  const double guard = 4 * kUnit + 2 * static_cast<double>(L + 1) * static_cast<double>(kUnitLong);
  const double tail_mass = std::max(0.0, 1.0 - static_cast<double>(mass_lo) * (1.0 - guard));

  ExpectationBracket b;
  b.lower = static_cast<double>(lower) * (1.0 - guard);
  b.upper = (static_cast<double>(upper) + g_tail * tail_mass) * (1.0 + guard);
  b.note = "stored mass " + std::to_string(static_cast<double>(mass_lo)) + ", tail mass <= " +
           std::to_string(tail_mass) + " at T_n >= " + std::to_string(law.tail_start);
  return b;
}

StepSampler::StepSampler(const StepLaw& law, const BernsteinFunction* exact)
    : cdf_(law.pmf.size()), M_(law.M) {
  if (law.pmf.empty()) throw DegenerateError("StepSampler: empty step law");
  long double acc = 0;
  for (std::size_t i = 0; i < law.pmf.size(); ++i) {
    acc += law.pmf[i];
    cdf_[i] = static_cast<double>(acc);
  }
  if (!(acc > 0)) throw DegenerateError("StepSampler: step law has no mass");
  if (exact && exact->id() == law.source && exact->closed_step_tail(1) && law.residual > 0) {
    const BernsteinFunction phi = *exact;
    tail_ = [phi](std::uint64_t m) { return *phi.closed_step_tail(static_cast<std::size_t>(m)); };
  } else {
    for (double& c : cdf_) c = static_cast<double>(c / acc);
    cdf_.back() = 1.0;
  }
}

// Smallest m > M with P(R > m) < v, by doubling and bisection.
std::uint64_t StepSampler::tail_draw(double v) const {
  constexpr std::uint64_t cap = std::uint64_t{1} << 62;
  std::uint64_t lo = M_, hi = std::max<std::uint64_t>(2 * M_, 2);
  while (tail_(hi) >= v) {
    if (hi >= cap) return cap;
    lo = hi;
    hi = std::min(cap, 2 * hi);
  }
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    (tail_(mid) >= v ? lo : hi) = mid;
  }
  return hi;
}

std::uint64_t StepSampler::draw(Rng& rng) const {
  const double u = rng.uniform();
  if (tail_ && u >= cdf_.back()) return tail_draw(1.0 - u);
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()),
                                         cdf_.size() - 1);
  return idx + 1;
}

std::vector<std::uint64_t> sample_T(const StepLaw& law, std::size_t n, std::uint64_t seed,
                                    const BernsteinFunction* exact) {
  StepSampler sampler(law, exact);
  Rng rng(seed);
  std::vector<std::uint64_t> path(n);
  std::uint64_t t = 0;
  for (auto& v : path) {
    t += sampler.draw(rng);
    v = t;
  }
  return path;
}

MonteCarloMean mc_mean_T(const StepLaw& law, std::size_t n, std::size_t samples,
                         std::uint64_t seed, const std::function<double(double)>& g,
                         const BernsteinFunction* exact) {
  const StepSampler sampler(law, exact);
  return chunked_mean(samples, seed, [&](Rng& rng) {
    double t = 0;
    for (std::size_t k = 0; k < n; ++k) t += static_cast<double>(sampler.draw(rng));
    return g(t);
  });
}

}  // namespace subord
