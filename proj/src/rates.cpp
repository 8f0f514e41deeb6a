#include "subord/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "subord/error.hpp"

namespace subord {
namespace {

constexpr double kUnit = std::numeric_limits<double>::epsilon() / 2;

}  // namespace

RateSpec RateSpec::subexp(double theta, double delta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw DomainError("rate subexp: theta must be > 0");
  if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("rate subexp: delta must lie in (0, 1]");
  RateSpec s;
  s.family = CmFamily::subexp;
  s.theta = theta;
  s.delta = delta;
  return s;
}

RateSpec RateSpec::poly(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("rate poly: beta must be > 0");
  RateSpec s;
  s.family = CmFamily::poly;
  s.beta = beta;
  return s;
}

RateSpec RateSpec::log(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("rate log: gamma must be > 0");
  RateSpec s;
  s.family = CmFamily::log;
  s.gamma = gamma;
  return s;
}

double RateSpec::r(double n) const {
  switch (family) {
    case CmFamily::subexp: return std::exp(-theta * std::pow(n, delta));
    case CmFamily::poly: return std::pow(n, -beta);
    case CmFamily::log: return std::pow(std::log(2.0 + n), -gamma);
  }
  return 0.0;
}

std::string RateSpec::label() const {
  std::ostringstream os;
  switch (family) {
    case CmFamily::subexp: os << "subexp(theta=" << theta << ",delta=" << delta << ")"; break;
    case CmFamily::poly: os << "poly(beta=" << beta << ")"; break;
    case CmFamily::log: os << "log(gamma=" << gamma << ")"; break;
  }
  return os.str();
}

DecayTable decay_table(const FiniteChain& chain, std::size_t x, std::size_t m_max,
                       const Distribution& pi) {
  if (x >= chain.size()) throw DomainError("decay table: start state out of range");
  DecayTable t;
  t.x = x;
  t.states = chain.size();
  t.pi = pi;
  t.f.assign(chain.f().begin(), chain.f().end());
  t.delta.resize((m_max + 1) * t.states);
  t.d.resize(m_max + 1);
  t.tv.resize(m_max + 1);
  Distribution power(t.states, 0.0);
  power[x] = 1.0;
  for (std::size_t m = 0; m <= m_max; ++m) {
    if (m > 0) power = chain.step(power);
    double* row = t.delta.data() + m * t.states;
    for (std::size_t y = 0; y < t.states; ++y) row[y] = power[y] - pi[y];
    t.d[m] = f_norm({row, t.states}, t.f);
    t.tv[m] = tv_norm({row, t.states});
  }
  return t;
}

DecayTable decay_table(const FiniteChain& chain, std::size_t x, std::size_t m_max) {
  return decay_table(chain, x, m_max, stationary(chain));
}

std::vector<double> empirical_decay(const FiniteChain& chain, std::size_t x, std::size_t N) {
  return decay_table(chain, x, N).d;
}

std::size_t decay_horizon(const std::vector<SubordinatorLaw>& laws) {
  std::size_t h = 0;
  for (const auto& law : laws) h = std::max({h, law.n + law.pmf.size(), law.tail_start});
  return h;
}

MixtureReport mixture_bound_check(const DecayTable& table, const std::vector<SubordinatorLaw>& laws,
                                  bool throw_on_violation) {
  MixtureReport rep;
  rep.x = table.x;
  const std::size_t K = table.states;
  const double max_f = *std::max_element(table.f.begin(), table.f.end());
  std::vector<double> e(K), E(K);

  for (const auto& law : laws) {
    if (law.n + law.pmf.size() - 1 > table.m_max())
      throw DomainError("mixture check: decay table is too short for T_" + std::to_string(law.n));
    if (rep.source.empty()) rep.source = law.source;
    MixtureRow row;
    row.n = law.n;
    row.d = table.d[law.n];
    row.residual = law.residual;

    // e = sum_m p_m Delta_m and E = sum_m p_m |Delta_m|, term by term in the
    // same order: rounding is monotone, so |e| <= E survives in floating point.
    std::fill(e.begin(), e.end(), 0.0);
    std::fill(E.begin(), E.end(), 0.0);
    double err_terms = 0.0;  // sum_m |p_m - exact_m| d(m)
    double mass_lo = 0.0;
    for (std::size_t k = 0; k < law.pmf.size(); ++k) {
      const double p = law.pmf[k];
      const std::size_t m = law.n + k;
      const double hi = (p + law.abs_error) / (1.0 - law.rel_error);
      err_terms += (law.rel_error * hi + law.abs_error) * table.d[m];
      mass_lo += std::max(0.0, (p - law.abs_error) / (1.0 + law.rel_error));
      if (p == 0.0) continue;
      const auto delta = table.row(m);
      for (std::size_t y = 0; y < K; ++y) {
        const double t = p * delta[y];
        e[y] += t;
        E[y] += std::abs(t);
      }
    }

    // Bracket for the untruncated law: stored terms are off by at most
    // err_terms and the missing mass sits at T_n >= tail_start, where
    // d(m) <= max f * tv(m) <= max f * tv(tail_start) since tv is nonincreasing.
    const double v = f_norm(e, table.f);
    const std::size_t ts = std::min(law.tail_start, table.m_max());
    const double tail_mass = std::max(0.0, 1.0 - mass_lo);
    double sum_pd = 0.0;
    for (std::size_t k = 0; k < law.pmf.size(); ++k) sum_pd += law.pmf[k] * table.d[law.n + k];
    const double guard =
        8.0 * static_cast<double>(law.pmf.size() + K) * kUnit * (sum_pd + v + tail_mass * max_f);
    const double half_width = err_terms + tail_mass * max_f * table.tv[ts] + guard;
    row.d_phi_lower = std::max(0.0, v - half_width);
    row.d_phi_upper = v + half_width;

    // The truncated mixture misses mass `residual`: w - pi = e - residual * pi.
    for (std::size_t y = 0; y < K; ++y) {
      const double t = law.residual * table.pi[y];
      e[y] -= t;
      E[y] += t;
    }
    row.d_phi = f_norm(e, table.f);
    double bound = 0.0;
    for (std::size_t y = 0; y < K; ++y) bound += table.f[y] * E[y];
    row.mixture_bound = bound + law.residual * max_f;
    row.ok = row.d_phi <= row.mixture_bound;
    if (!row.ok) {
      rep.all_ok = false;
      if (throw_on_violation) {
        std::ostringstream os;
        os.precision(17);
        os << "mixture inequality violated at n = " << row.n << " from x = " << table.x
           << ": d_phi = " << row.d_phi << " > bound " << row.mixture_bound;
        throw ConsistencyError(os.str());
      }
    }
    rep.rows.push_back(row);
  }
  return rep;
}

MixtureReport mixture_bound_check(const FiniteChain& chain, std::size_t x,
                                  const std::vector<SubordinatorLaw>& laws,
                                  bool throw_on_violation) {
  const DecayTable table = decay_table(chain, x, decay_horizon(laws));
  MixtureReport rep = mixture_bound_check(table, laws, throw_on_violation);
  rep.chain = chain.label();
  return rep;
}

double theoretical_rate(const RateSpec& spec, const BernsteinFunction& phi, double n) {
  if (!(n > 0.0)) throw DomainError("theoretical_rate: n must be > 0");
  switch (spec.family) {
    case CmFamily::subexp: {
      const auto cert = phi.lower_bound();
      if (!cert)
        throw PreconditionError("theoretical_rate: subexponential rate needs a Levy lower-bound "
                                "certificate, which '" + phi.id() + "' lacks");
      const double kappa = spec.delta / (cert->alpha * (1.0 - spec.delta) + spec.delta);
      return std::exp(-std::pow(n, kappa));
    }
    case CmFamily::poly:
      if (!phi.certificates().log_growth_and_scaling)
        throw PreconditionError("theoretical_rate: polynomial rate needs the growth and scaling "
                                "certificate, which '" + phi.id() + "' lacks");
      return std::pow(invert_phi(phi, 1.0 / n), spec.beta);
    case CmFamily::log:
      if (!phi.lower_bound())
        throw PreconditionError("theoretical_rate: logarithmic rate needs a Levy lower-bound "
                                "certificate, which '" + phi.id() + "' lacks");
      return std::pow(std::log(2.0 + n), -spec.gamma);
  }
  return 0.0;
}

ConstantFit fit_constant(std::span<const std::size_t> ns, std::span<const double> upper,
                         std::span<const double> rate) {
  if (ns.empty() || ns.size() != upper.size() || ns.size() != rate.size())
    throw DomainError("fit_constant: sequences must be nonempty and of equal length");
  ConstantFit fit;
  const std::size_t half_n = ns.back() / 2;
  fit.C = -1.0;
  fit.C_half = -1.0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (!(rate[i] > 0.0)) throw DomainError("fit_constant: rates must be > 0");
    const double c = upper[i] / rate[i];
    if (c > fit.C) {
      fit.C = c;
      fit.argmax = ns[i];
    }
    if (ns[i] <= half_n) fit.C_half = std::max(fit.C_half, c);
  }
  if (fit.C_half < 0.0) fit.C_half = fit.C;
  fit.stability = fit.C_half > 0.0 ? std::abs(fit.C - fit.C_half) / fit.C_half
                                   : (fit.C == fit.C_half ? 0.0 : 1.0);
  return fit;
}

std::vector<SubordinatorLaw> t_n_laws(const StepLaw& step, std::size_t N,
                                      const ConvolutionOptions& opts) {
  std::vector<SubordinatorLaw> laws;
  laws.reserve(N);
  for_each_t_n(step, N, opts, [&](const SubordinatorLaw& law) { laws.push_back(law); });
  return laws;
}

RateReport rate_report(const FiniteChain& chain, std::size_t x, const BernsteinFunction& phi,
                       const StepLaw& step, const RateSpec& spec, std::size_t N,
                       const ConvolutionOptions& opts) {
  if (N == 0) throw DomainError("rate_report: N must be >= 1");
  if (step.source != phi.id())
    throw DomainError("rate_report: step law was built from '" + step.source + "', not '" +
                      phi.id() + "'");
  RateReport rep;
  rep.chain = chain.label();
  rep.source = phi.id();
  rep.spec = spec.label();
  rep.x = x;
  rep.M = step.M;

  const auto laws = t_n_laws(step, N, opts);
  const auto mix = mixture_bound_check(chain, x, laws, false);
  rep.mixture_ok = mix.all_ok;

  std::vector<std::size_t> ns;
  std::vector<double> upper, rate;
  for (const auto& m : mix.rows) {
    RateRow row;
    row.mixture = m;
    row.theoretical = theoretical_rate(spec, phi, static_cast<double>(m.n));
    row.ratio = m.d_phi_upper / row.theoretical;
    ns.push_back(m.n);
    upper.push_back(m.d_phi_upper);
    rate.push_back(row.theoretical);
    rep.rows.push_back(row);
  }
  rep.fit = fit_constant(ns, upper, rate);
  return rep;
}

}  // namespace subord
