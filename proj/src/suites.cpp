#include "subord/suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include "subord/bernstein.hpp"
#include "subord/catalog.hpp"
#include "subord/chain.hpp"
#include "subord/cm.hpp"
#include "subord/error.hpp"
#include "subord/moments.hpp"
#include "subord/rates.hpp"
#include "subord/subordinator.hpp"

namespace subord::suites {
namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

Check make_check(bool pass, double value, double limit, std::string detail = {}) {
  Check c;
  c.pass = pass;
  c.value = value;
  c.limit = limit;
  c.detail = std::move(detail);
  return c;
}

// Runs one check; any library error becomes a failure of that check.
template <class F>
void attempt(SuiteResult& r, const std::string& name, F&& body) {
  Check c;
  try {
    c = body();
  } catch (const std::exception& e) {
    c = make_check(false, 0.0, 0.0, e.what());
  }
  c.name = name;
  r.checks.push_back(std::move(c));
}

std::vector<double> shape_grid() { return log_grid(1e-6, 1e6, 241); }

// Builds phi and confirms it is Bernstein-shaped on the grid. On failure the
// violated shape condition is recorded and nullopt returned.
std::optional<BernsteinFunction> usable(SuiteResult& r, const std::string& id) {
  try {
    BernsteinFunction phi = catalog::make(id);
    const auto grid = shape_grid();
    const auto mono = check_shape_monotone(phi, grid);
    if (mono.verdict == Verdict::fail) {
      r.checks.push_back(make_check(false, mono.extremum, 0.0, mono.note));
      r.checks.back().name = "monotone:" + id;
      return std::nullopt;
    }
    const auto conc = check_shape_concave(phi, grid);
    if (conc.verdict == Verdict::fail) {
      r.checks.push_back(make_check(false, conc.extremum, 0.0, conc.note));
      r.checks.back().name = "concavity:" + id;
      return std::nullopt;
    }
    return phi;
  } catch (const std::exception& e) {
    r.checks.push_back(make_check(false, 0.0, 0.0, e.what()));
    r.checks.back().name = "construct:" + id;
    return std::nullopt;
  }
}

bool has_levy(const BernsteinFunction& phi) { return phi.has_triplet() && !phi.levy().empty(); }

// ---------------------------------------------------------------- bernstein

void bernstein_suite(SuiteResult& r, const Config& cfg) {
  const auto grid = shape_grid();
  std::vector<double> scan_grid{0.0};
  for (double x : log_grid(1e-10, 50.0, 9999)) scan_grid.push_back(x);
  const std::vector<double> lambdas{2.0, 4.0};

  for (const auto& id : cfg.phis) {
    std::optional<BernsteinFunction> phi;
    attempt(r, "construct:" + id, [&] {
      phi = catalog::make(id);
      return make_check(true, 0.0, 0.0);
    });
    if (!phi) continue;
    attempt(r, "normalized:" + id, [&] {
      const double dev = std::abs((*phi)(1.0) - 1.0);
      return make_check(dev <= 1e-12, dev, 1e-12);
    });
    attempt(r, "monotone:" + id, [&] {
      const auto d = check_shape_monotone(*phi, grid);
      return make_check(d.verdict != Verdict::fail, d.extremum, 0.0, d.note);
    });
    attempt(r, "concavity:" + id, [&] {
      const auto d = check_shape_concave(*phi, grid);
      return make_check(d.verdict != Verdict::fail, d.extremum, 0.0, d.note);
    });
    attempt(r, "appendix-inequality:" + id, [&] {
      const auto s = appendix_inequality_scan(*phi, scan_grid, 1e-12);
      bool ok = s.min_value >= 1.0 - 1e-12;
      std::string detail = "min at x = " + fmt(s.argmin);
      if (id == "identity") {
        ok = ok && s.max_deviation <= 1e-14;
        detail += ", max deviation " + fmt(s.max_deviation);
      }
      return make_check(ok, s.min_value, 1.0 - 1e-12, detail);
    });
    attempt(r, "appendix-inequality-at-0:" + id, [&] {
      const double zero = 0.0;
      const auto s = appendix_inequality_scan(*phi, std::span<const double>(&zero, 1), 1e-12);
      return make_check(s.max_deviation <= 1e-14, s.max_deviation, 1e-14);
    });
    attempt(r, "subadditivity:" + id, [&] {
      bool ok = true;
      for (double t : {0.1, 0.5, 0.9})
        for (double x : {0.5, 2.0, 10.0}) ok = ok && subadditivity_check(*phi, t, x);
      return make_check(ok, 0.0, 0.0, "phi(t x) >= t phi(x) for t in {0.1,0.5,0.9}");
    });
    if (phi->certificates().log_growth_and_scaling) {
      attempt(r, "growth-scaling:" + id, [&] {
        const auto diags = check_conditions(*phi, log_grid(1e-8, 1e8, 161), lambdas);
        std::string failed;
        for (const auto& d : diags)
          if (d.verdict == Verdict::fail) failed += d.condition_id + " ";
        return make_check(failed.empty(), 0.0, 0.0,
                          failed.empty() ? "certified conditions hold on the grid"
                                         : "certified but failing: " + failed);
      });
    }
  }
}

// ---------------------------------------------------------------- steplaw

void steplaw_suite(SuiteResult& r, const Config& cfg) {
  for (double alpha : {0.25, 0.5, 0.75}) {
    const std::string id = "stable:" + fmt(alpha);
    attempt(r, "sibuya-oracle:" + id, [&] {
      const auto phi = catalog::make(id);
      double worst = 0.0;
      for (std::size_t m = 1; m <= 100; ++m) {
        const double md = static_cast<double>(m);
        const double oracle = std::exp(std::log(alpha) - std::lgamma(1.0 - alpha) +
                                       std::lgamma(md - alpha) - std::lgamma(md + 1.0));
        worst = std::max(worst, std::abs(step_pmf_quadrature(phi, m) - oracle));
      }
      return make_check(worst <= 1e-12, worst, 1e-12, "max |quadrature - closed form|, m <= 100");
    });
  }
  for (const auto& id : cfg.phis) {
    const auto phi = usable(r, id);
    if (!phi) continue;
    attempt(r, "pgf-identity:" + id, [&] {
      const auto law = step_law(*phi, cfg.pgf_M);
      double worst = 0.0;
      for (int k = 0; k <= 9; ++k) worst = std::max(worst, pgf_residual(law, *phi, 0.1 * k));
      return make_check(worst <= 1e-8, worst, 1e-8, "M = " + std::to_string(cfg.pgf_M));
    });
    attempt(r, "mass-balance:" + id, [&] {
      const auto law = step_law(*phi, 1024);
      const double dev = std::abs(law.mass() + law.residual - 1.0);
      return make_check(dev <= 1e-12, dev, 1e-12, "sum + residual - 1 at M = 1024");
    });
    attempt(r, "semigroup:" + id, [&] {
      const auto step = step_law(*phi, 256);
      const auto t3 = t_n_law(step, 3), t4 = t_n_law(step, 4), t7 = t_n_law(step, 7);
      const auto c = convolve_laws(t3, t4);
      double worst = 0.0;
      for (std::size_t k = 0; k < std::min(c.pmf.size(), t7.pmf.size()); ++k)
        worst = std::max(worst, std::abs(c.pmf[k] - t7.pmf[k]));
      return make_check(worst <= 1e-14, worst, 1e-14, "T_3 + T_4' against T_7");
    });
  }
}

// ---------------------------------------------------------------- dominance

void dominance_suite(SuiteResult& r, const Config& cfg) {
  const std::vector<CmRepresentation> reps{CmRepresentation::subexp(1.0, 0.5),
                                           CmRepresentation::poly(1.0), CmRepresentation::log(1.0)};
  for (const auto& id : cfg.dominance_phis) {
    const auto phi = usable(r, id);
    if (!phi) continue;
    std::optional<StepLaw> step;
    attempt(r, "step-law:" + id, [&] {
      step = step_law(*phi, cfg.dominance_M);
      return make_check(true, step->residual, 0.0, "residual at M = " + fmt(cfg.dominance_M));
    });
    if (!step) continue;
    for (const auto& rep : reps) {
      attempt(r, "dominance:" + id + ":" + rep.label(), [&] {
        const ContinuousMoments continuous(*phi, rep);
        ConvolutionOptions opts;
        opts.cap = cfg.dominance_M;
        double min_margin = std::numeric_limits<double>::infinity();
        std::size_t worst_n = 0;
        for_each_t_n(*step, cfg.dominance_n, opts, [&](const SubordinatorLaw& law) {
          const auto d = dominance_check(continuous, law.n, law, cfg.tol);
          if (d.margin < min_margin) {
            min_margin = d.margin;
            worst_n = law.n;
          }
        });
        return make_check(min_margin >= -cfg.tol, min_margin, -cfg.tol,
                          "E g(S_n) - lower E g(T_n), smallest at n = " + std::to_string(worst_n));
      });
    }
    if (id == "stable:0.5") {
      attempt(r, "spot:E[1/T_1]", [&] {
        const auto law = t_n_law(*step, 1);
        const auto b = expect_monotone(law, [](double x) { return 1.0 / x; });
        const double exact = 2.0 * (1.0 - std::numbers::ln2);
        const double miss = std::max({0.0, b.lower - exact, exact - b.upper});
        const bool ok = miss == 0.0 && b.width() <= 2e-5;
        return make_check(ok, b.mid(), exact,
                          "bracket [" + fmt(b.lower) + ", " + fmt(b.upper) + "]");
      });
      attempt(r, "spot:E[1/S_1]", [&] {
        const double v = continuous_moment(*phi, 1.0, CmRepresentation::poly(1.0));
        return make_check(std::abs(v - 2.0) <= 1e-8, v, 2.0);
      });
    }
  }
}

// ---------------------------------------------------------------- moments

struct MomentSetup {
  std::size_t M;
  ConvolutionOptions conv;
};

MomentSetup moment_setup(const BernsteinFunction& phi, std::size_t heavy_M, std::size_t light_M,
                         std::size_t light_cap, ConvolutionMethod heavy_method) {
  MomentSetup s;
  if (phi.certificates().heavy_tail) {
    s.M = heavy_M;
    s.conv.cap = heavy_M;
    s.conv.method = heavy_method;
  } else {
    s.M = light_M;
    s.conv.cap = light_cap;
    s.conv.method = ConvolutionMethod::direct;
  }
  return s;
}

void moments_suite(SuiteResult& r, const Config& cfg) {
  const std::size_t N = cfg.moments_n;

  for (const auto& id : cfg.poly_phis) {
    const auto phi = usable(r, id);
    if (!phi) continue;
    attempt(r, "poly-rate:" + id, [&] {
      const auto s = moment_setup(*phi, std::size_t{1} << 20, 256, 4096, ConvolutionMethod::fft);
      const auto step = step_law(*phi, s.M);
      MomentOptions o;
      o.n_grid = n_range(1, N);
      o.convolution = s.conv;
      const auto rep = poly_report(*phi, step, 1.0, o);
      return make_check(rep.pass, rep.stability, o.stability_tol,
                        rep.note + ", onset n = " + std::to_string(rep.onset));
    });
  }

  if (std::find(cfg.dominance_phis.begin(), cfg.dominance_phis.end(), "stable:0.5") !=
      cfg.dominance_phis.end()) {
    attempt(r, "subexp-rate:stable:0.5", [&] {
      const auto phi = catalog::make("stable:0.5");
      const std::size_t L = 8192;
      const auto step = step_law(phi, L);
      MomentOptions o;
      o.n_grid = n_range(1, N);
      o.convolution.cap = L;
      o.convolution.method = ConvolutionMethod::direct;  // relative accuracy for tiny moments
      const auto rep = subexp_report(phi, step, 1.0, 0.5, o);
      return make_check(rep.pass, rep.stability, o.stability_tol, rep.note);
    });
  }

  for (const auto& id : cfg.phis) {
    const auto phi = usable(r, id);
    if (!phi || !has_levy(*phi)) continue;
    attempt(r, "log-bound:" + id, [&] {
      const auto s = moment_setup(*phi, 2048, 256, 2048, ConvolutionMethod::automatic);
      const auto step = step_law(*phi, s.M);
      MomentOptions o;
      o.n_grid = n_range(1, N);
      o.convolution = s.conv;
      o.require_certificate = false;
      const auto rep = log_report(*phi, step, 1.0, o);
      // T_n >= n: the upper bracket must sit below the comparator without slack.
      double worst = -std::numeric_limits<double>::infinity();
      std::size_t at = 0;
      for (const auto& row : rep.rows) {
        const double excess = row.bracket.upper - row.comparator;
        if (excess > worst) {
          worst = excess;
          at = row.n;
        }
      }
      return make_check(worst <= 0.0 && rep.positive && rep.nonincreasing, worst, 0.0,
                        "largest upper - log^{-1}(1+n) at n = " + std::to_string(at));
    });
  }
}

// ---------------------------------------------------------------- chains

std::vector<SubordinatorLaw> chain_laws(const BernsteinFunction& phi, std::size_t M,
                                        std::size_t N) {
  const auto step = step_law(phi, M);
  ConvolutionOptions opts;
  opts.cap = M;
  return t_n_laws(step, N, opts);
}

void chains_suite(SuiteResult& r, const Config& cfg) {
  std::vector<std::string> ids = cfg.chains;
  ids.push_back("lazy-cycle:6");
  for (const auto& cid : ids) {
    std::optional<FiniteChain> chain;
    attempt(r, "stationary:" + cid, [&] {
      chain = make_chain(cid);
      const auto pi = stationary(*chain);
      const auto next = chain->step(pi);
      double err = 0.0;
      for (std::size_t i = 0; i < pi.size(); ++i) err += std::abs(next[i] - pi[i]);
      return make_check(err <= 1e-12, err, 1e-12, "|pi P - pi|_1");
    });
    if (!chain) continue;
    attempt(r, "semigroup:" + cid, [&] {
      double worst = 0.0;
      for (std::size_t x = 0; x < chain->size(); ++x) {
        auto composed = n_step(*chain, x, 7);
        for (int i = 0; i < 5; ++i) composed = chain->step(composed);
        const auto direct = n_step(*chain, x, 12);
        for (std::size_t y = 0; y < direct.size(); ++y)
          worst = std::max(worst, std::abs(direct[y] - composed[y]));
      }
      return make_check(worst <= 1e-12, worst, 1e-12, "P^12 against P^7 P^5");
    });
    attempt(r, "identity-mixture:" + cid, [&] {
      const auto step = step_law(catalog::make("identity"), 1);
      double worst = 0.0;
      for (std::size_t n = 1; n <= 10; ++n) {
        const auto law = t_n_law(step, n);
        for (std::size_t x = 0; x < chain->size(); ++x) {
          const auto sub = subordinate(*chain, x, law);
          const auto direct = n_step(*chain, x, n);
          for (std::size_t y = 0; y < direct.size(); ++y)
            worst = std::max(worst, std::abs(sub.weights[y] - direct[y]));
        }
      }
      return make_check(worst <= 1e-14, worst, 1e-14, "subordinated identity against P^n");
    });
  }

  for (const auto& id : cfg.phis) {
    const auto phi = usable(r, id);
    if (!phi) continue;
    std::vector<SubordinatorLaw> laws;
    attempt(r, "laws:" + id, [&] {
      laws = chain_laws(*phi, cfg.chain_M, cfg.invariance_n);
      return make_check(true, laws.back().residual, 0.0, "residual of the last law");
    });
    if (laws.empty()) continue;
    for (const auto& cid : cfg.chains) {
      attempt(r, "invariance:" + cid + ":" + id, [&] {
        const auto chain = make_chain(cid);
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& law : laws)
          worst = std::max(worst, invariance_check(chain, law) - law.residual);
        return make_check(worst <= 1e-10, worst, 1e-10,
                          "max over n of |pi P_phi^n - pi|_TV - residual");
      });
    }
  }
}

// ---------------------------------------------------------------- rates

void rates_suite(SuiteResult& r, const Config& cfg) {
  std::map<std::string, std::vector<SubordinatorLaw>> laws;
  for (const auto& id : cfg.phis) {
    const auto phi = usable(r, id);
    if (!phi) continue;
    attempt(r, "laws:" + id, [&] {
      laws[id] = chain_laws(*phi, cfg.chain_M, cfg.rates_n);
      return make_check(true, laws[id].back().residual, 0.0, "residual of the last law");
    });
  }

  for (const auto& cid : cfg.chains) {
    for (const auto& fspec : cfg.f_specs) {
      std::optional<FiniteChain> chain;
      std::vector<DecayTable> tables;
      attempt(r, "decay:" + cid + ":f=" + fspec, [&] {
        const auto base = make_chain(cid);
        chain = base.with_f(control_function(fspec, base.size()));
        const auto pi = stationary(*chain);
        std::size_t horizon = 0;
        for (const auto& [id, ls] : laws) horizon = std::max(horizon, decay_horizon(ls));
        for (std::size_t x = 0; x < chain->size(); ++x)
          tables.push_back(decay_table(*chain, x, horizon, pi));
        return make_check(true, static_cast<double>(horizon), 0.0, "largest power of P used");
      });
      if (tables.empty()) continue;
      for (const auto& [id, ls] : laws) {
        attempt(r, "mixture:" + cid + ":f=" + fspec + ":" + id, [&] {
          double min_slack = std::numeric_limits<double>::infinity();
          bool equal = true;
          for (const auto& t : tables) {
            const auto rep = mixture_bound_check(t, ls, true);
            for (const auto& row : rep.rows) {
              min_slack = std::min(min_slack, row.mixture_bound - row.d_phi);
              equal = equal && row.d_phi == row.d && row.d_phi == row.mixture_bound;
            }
          }
          const bool ok = id == "identity" ? equal : min_slack >= 0.0;
          return make_check(ok, min_slack, 0.0,
                            id == "identity" ? "identity: d_phi, d and bound must coincide"
                                             : "smallest bound - d_phi over x and n");
        });
        attempt(r, "mixture-monotone:" + cid + ":f=" + fspec + ":" + id, [&] {
          // E d(T_n) is nonincreasing in n whenever d is.
          std::size_t checked = 0;
          double worst = -std::numeric_limits<double>::infinity();
          for (const auto& t : tables) {
            const auto& d = t.d;
            if (!std::is_sorted(d.rbegin(), d.rend())) continue;
            ++checked;
            auto g = [&](double m) {
              return d[std::min(static_cast<std::size_t>(m), d.size() - 1)];
            };
            double prev_upper = std::numeric_limits<double>::infinity();
            for (const auto& law : ls) {
              const auto b = expect_monotone(law, g);
              worst = std::max(worst, b.lower - prev_upper);
              prev_upper = b.upper;
            }
          }
          return make_check(worst <= 0.0 || checked == 0, checked ? worst : 0.0, 0.0,
                            std::to_string(checked) + " start states with monotone d");
        });
      }
    }
  }

  attempt(r, "pipeline:two-state:stable:0.5:poly", [&] {
    const auto phi = catalog::make("stable:0.5");
    const auto step = step_law(phi, cfg.chain_M);
    ConvolutionOptions opts;
    opts.cap = cfg.chain_M;
    const auto rep =
        rate_report(make_chain("two-state"), 0, phi, step, RateSpec::poly(1.0), 50, opts);
    const bool ok = rep.mixture_ok && std::isfinite(rep.fit.C) && rep.fit.stability <= 0.10;
    return make_check(ok, rep.fit.stability, 0.10,
                      "C = " + fmt(rep.fit.C) + " at n = " + std::to_string(rep.fit.argmax) +
                          ", C over n <= 25 = " + fmt(rep.fit.C_half));
  });
}

// ---------------------------------------------------------------- montecarlo

void montecarlo_suite(SuiteResult& r, const Config& cfg) {
  const auto phi = catalog::make("stable:0.5");
  std::optional<StepLaw> step;
  attempt(r, "step-law:stable:0.5", [&] {
    step = step_law(phi, cfg.mc_M);
    return make_check(true, step->residual, 0.0, "residual at M = " + fmt(cfg.mc_M));
  });
  if (step) {
    for (std::size_t n : {std::size_t{1}, std::size_t{5}}) {
      attempt(r, "mc-mean-1/T_" + std::to_string(n), [&] {
        ConvolutionOptions opts;
        opts.cap = cfg.mc_M;
        const auto law = t_n_law(*step, n, opts);
        const auto g = [](double x) { return 1.0 / x; };
        const auto b = expect_monotone(law, g);
        const auto mc = mc_mean_T(*step, n, cfg.mc_samples, cfg.seed + n, g, &phi);
        const double miss = std::max({0.0, b.lower - mc.mean, mc.mean - b.upper});
        const double z = mc.std_error > 0 ? miss / mc.std_error : (miss > 0 ? 1e300 : 0.0);
        return make_check(z <= 4.0, z, 4.0,
                          "mean " + fmt(mc.mean) + " +- " + fmt(mc.std_error) + " vs [" +
                              fmt(b.lower) + ", " + fmt(b.upper) + "]");
      });
    }
  }
  attempt(r, "kanter-mean-exp(-S_1)", [&] {
    const auto mc = mc_mean_stable(0.5, 1.0, cfg.mc_samples, cfg.seed,
                                   [](double x) { return std::exp(-x); });
    const double z = std::abs(mc.mean - std::exp(-1.0)) / mc.std_error;
    return make_check(z <= 4.0, z, 4.0, "mean " + fmt(mc.mean) + " +- " + fmt(mc.std_error));
  });
}

}  // namespace

Config::Config() : phis(catalog::standard_ids()) {}

bool SuiteResult::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::string SuiteResult::first_failure() const {
  for (const auto& c : checks)
    if (!c.pass) return c.name + (c.detail.empty() ? "" : " (" + c.detail + ")");
  return {};
}

csv::Table SuiteResult::table() const {
  csv::Table t;
  t.add_meta("suite", name);
  t.columns = {"check", "pass", "value", "limit", "detail"};
  for (const auto& c : checks) {
    std::string detail = c.detail;
    std::replace(detail.begin(), detail.end(), ',', ';');
    std::replace(detail.begin(), detail.end(), '\n', ' ');
    t.rows.push_back({c.name, c.pass ? "ok" : "FAIL", csv::number(c.value), csv::number(c.limit),
                      detail});
  }
  return t;
}

const std::vector<std::string>& names() {
  static const std::vector<std::string> n{"bernstein", "steplaw", "dominance", "moments",
                                          "chains",    "rates",   "montecarlo"};
  return n;
}

SuiteResult run(const std::string& name, const Config& config) {
  SuiteResult r;
  r.name = name;
  const auto start = std::chrono::steady_clock::now();
  if (name == "bernstein") bernstein_suite(r, config);
  else if (name == "steplaw") steplaw_suite(r, config);
  else if (name == "dominance") dominance_suite(r, config);
  else if (name == "moments") moments_suite(r, config);
  else if (name == "chains") chains_suite(r, config);
  else if (name == "rates") rates_suite(r, config);
  else if (name == "montecarlo") montecarlo_suite(r, config);
  else throw DomainError("unknown suite '" + name + "'");
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace subord::suites
