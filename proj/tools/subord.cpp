// Command-line front end: builds laws, runs the verification suites and
// writes CSV with '#' provenance lines.
//
// Exit codes: 0 success, 1 a checked inequality or suite failed,
// 2 invalid configuration, 3 numerical failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "subord/catalog.hpp"
#include "subord/chain.hpp"
#include "subord/cm.hpp"
#include "subord/csv.hpp"
#include "subord/error.hpp"
#include "subord/moments.hpp"
#include "subord/rates.hpp"
#include "subord/subordinator.hpp"
#include "subord/suites.hpp"

#ifndef SUBORD_VERSION
#define SUBORD_VERSION "dev"
#endif

namespace {

using namespace subord;

constexpr int kOk = 0, kFailed = 1, kConfig = 2, kNumeric = 3;

// Raised for a failed check, as opposed to bad input or a numerical breakdown.
struct CheckFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string phi = "stable:0.5";
  std::size_t M = 4096;
  std::size_t n_max = 50;
  std::size_t cap = 0;
  std::string family = "poly";
  double theta = 1.0, delta = 0.5, beta = 1.0, gamma = 1.0;
  std::string chain;
  std::size_t x = 0;
  std::string f = "1";
  std::optional<std::uint64_t> seed;
  std::string out;
  double tol = 1e-6;
};

void add_phi(CLI::App* app, Common& c) {
  app->add_option("--phi", c.phi, "Bernstein function id (see README)")->capture_default_str();
}
void add_M(CLI::App* app, Common& c) {
  app->add_option("--M", c.M, "Step-law truncation M")->capture_default_str()->check(
      CLI::PositiveNumber);
}
void add_n(CLI::App* app, Common& c) {
  app->add_option("--n-max", c.n_max, "Largest n")->capture_default_str()->check(
      CLI::PositiveNumber);
}
void add_family(CLI::App* app, Common& c) {
  app->add_option("--family", c.family, "g / rate family")
      ->capture_default_str()
      ->check(CLI::IsMember({"subexp", "poly", "log"}));
  app->add_option("--theta", c.theta, "subexp theta > 0")->capture_default_str();
  app->add_option("--delta", c.delta, "subexp delta in (0,1]")->capture_default_str();
  app->add_option("--beta", c.beta, "poly beta > 0")->capture_default_str();
  app->add_option("--gamma", c.gamma, "log gamma > 0")->capture_default_str();
}
void add_out(CLI::App* app, Common& c) {
  app->add_option("--out", c.out, "Output path (default: stdout)");
}
void add_cap(CLI::App* app, Common& c) {
  app->add_option("--cap", c.cap, "Support cap for T_n (0 = full support)")->capture_default_str();
}

void emit(const Common& c, csv::Table t) {
  t.meta.insert(t.meta.begin(), {"tool", std::string("subord ") + SUBORD_VERSION});
  if (c.seed) t.add_meta("seed", std::to_string(*c.seed));
  const std::string text = csv::to_string(t);
  if (c.out.empty() || c.out == "-") std::cout << text;
  else csv::write_file(c.out, text);
}

CmRepresentation representation(const Common& c) {
  if (c.family == "subexp") return CmRepresentation::subexp(c.theta, c.delta);
  if (c.family == "log") return CmRepresentation::log(c.gamma);
  return CmRepresentation::poly(c.beta);
}

RateSpec rate_spec(const Common& c) {
  if (c.family == "subexp") return RateSpec::subexp(c.theta, c.delta);
  if (c.family == "log") return RateSpec::log(c.gamma);
  return RateSpec::poly(c.beta);
}

ConvolutionOptions conv(const Common& c) {
  ConvolutionOptions o;
  o.cap = c.cap;
  return o;
}

// ------------------------------------------------------------- subcommands

int cmd_steplaw(const Common& c) {
  const auto phi = catalog::make(c.phi);
  const auto law = step_law(phi, c.M);
  csv::Table t;
  t.add_meta("phi", phi.id());
  t.add_meta("M", std::to_string(law.M));
  t.add_meta("residual", csv::number(law.residual));
  t.add_meta("closed_form", law.closed_form ? "yes" : "no");
  t.columns = {"m", "c"};
  // Trailing exact zeros (identity and other finite laws) carry no information.
  std::size_t last = law.pmf.size();
  while (last > 1 && law.pmf[last - 1] == 0.0) --last;
  for (std::size_t m = 1; m <= last; ++m)
    t.rows.push_back({csv::number(m), csv::number(law.pmf[m - 1])});
  emit(c, std::move(t));
  return kOk;
}

int cmd_tnlaw(const Common& c, std::size_t n) {
  const auto phi = catalog::make(c.phi);
  const auto law = t_n_law(step_law(phi, c.M), n, conv(c));
  csv::Table t;
  t.add_meta("phi", phi.id());
  t.add_meta("M", std::to_string(c.M));
  t.add_meta("n", std::to_string(n));
  t.add_meta("residual", csv::number(law.residual));
  t.add_meta("tail_start", std::to_string(law.tail_start));
  t.add_meta("rel_error", csv::number(law.rel_error));
  t.add_meta("abs_error", csv::number(law.abs_error));
  t.columns = {"m", "p"};
  for (std::size_t k = 0; k < law.pmf.size(); ++k)
    t.rows.push_back({csv::number(law.n + k), csv::number(law.pmf[k])});
  emit(c, std::move(t));
  return kOk;
}

int cmd_moments(const Common& c) {
  const auto phi = catalog::make(c.phi);
  const auto step = step_law(phi, c.M);
  MomentOptions o;
  o.n_grid = n_range(1, c.n_max);
  o.convolution = conv(c);
  MomentReport rep;
  if (c.family == "subexp") {
    o.convolution.method = ConvolutionMethod::direct;
    rep = subexp_report(phi, step, c.theta, c.delta, o);
  } else if (c.family == "log") {
    rep = log_report(phi, step, c.gamma, o);
  } else {
    rep = poly_report(phi, step, c.beta, o);
  }
  csv::Table t;
  t.add_meta("phi", phi.id());
  t.add_meta("M", std::to_string(c.M));
  t.add_meta("g", rep.g.label());
  t.add_meta("fitted_C", csv::number(rep.fitted_C));
  t.add_meta("base_C", csv::number(rep.base_C));
  t.add_meta("stability", csv::number(rep.stability));
  t.add_meta("onset", std::to_string(rep.onset));
  t.add_meta("pass", rep.pass ? "yes" : "no");
  t.columns = {"n", "lower", "upper", "comparator", "ratio"};
  for (const auto& row : rep.rows)
    t.rows.push_back({csv::number(row.n), csv::number(row.bracket.lower),
                      csv::number(row.bracket.upper), csv::number(row.comparator),
                      csv::number(row.ratio)});
  emit(c, std::move(t));
  return kOk;
}

int cmd_dominance(const Common& c) {
  const auto phi = catalog::make(c.phi);
  const auto step = step_law(phi, c.M);
  const ContinuousMoments continuous(phi, representation(c));
  csv::Table t;
  t.add_meta("phi", phi.id());
  t.add_meta("M", std::to_string(c.M));
  t.add_meta("g", continuous.representation().label());
  t.add_meta("tol", csv::number(c.tol));
  t.columns = {"n", "discrete_lower", "discrete_upper", "continuous", "margin"};
  for_each_t_n(step, c.n_max, conv(c), [&](const SubordinatorLaw& law) {
    const auto d = dominance_check(continuous, law.n, law, c.tol);
    t.rows.push_back({csv::number(d.n), csv::number(d.discrete.lower),
                      csv::number(d.discrete.upper), csv::number(d.continuous),
                      csv::number(d.margin)});
  });
  emit(c, std::move(t));
  return kOk;
}

int cmd_rates(const Common& c) {
  const auto phi = catalog::make(c.phi);
  const auto base = c.chain.size() > 4 && c.chain.substr(c.chain.size() - 4) == ".csv"
                        ? read_chain_csv(c.chain)
                        : make_chain(c.chain);
  const auto chain = base.with_f(control_function(c.f, base.size()));
  if (c.x >= chain.size()) throw DomainError("--x is not a state of the chain");
  const auto step = step_law(phi, c.M);
  ConvolutionOptions o = conv(c);
  if (o.cap == 0) o.cap = c.M;
  const auto rep = rate_report(chain, c.x, phi, step, rate_spec(c), c.n_max, o);
  csv::Table t;
  t.add_meta("chain", rep.chain);
  t.add_meta("phi", rep.source);
  t.add_meta("M", std::to_string(rep.M));
  t.add_meta("x", std::to_string(rep.x));
  t.add_meta("f", c.f);
  t.add_meta("rate", rep.spec);
  t.add_meta("fitted_C", csv::number(rep.fit.C));
  t.add_meta("C_argmax", std::to_string(rep.fit.argmax));
  t.add_meta("C_stability", csv::number(rep.fit.stability));
  t.columns = {"n",           "d",           "d_phi",       "d_phi_lower", "d_phi_upper",
               "mixture_bound", "theoretical", "ratio",       "mixture_ok"};
  for (const auto& row : rep.rows) {
    const auto& m = row.mixture;
    t.rows.push_back({csv::number(m.n), csv::number(m.d), csv::number(m.d_phi),
                      csv::number(m.d_phi_lower),
                      csv::number(m.d_phi_upper), csv::number(m.mixture_bound),
                      csv::number(row.theoretical), csv::number(row.ratio),
                      m.ok ? "ok" : "violated"});
  }
  emit(c, std::move(t));
  if (!rep.mixture_ok) throw CheckFailed("mixture inequality violated (see CSV)");
  return kOk;
}

int cmd_scan(const Common& c, std::size_t points, double x_max, double tol) {
  const auto phi = catalog::make(c.phi);
  std::vector<double> grid{0.0};
  for (double x : log_grid(1e-10, x_max, points - 1)) grid.push_back(x);
  csv::Table t;
  t.add_meta("phi", phi.id());
  t.columns = {"x", "value"};
  for (double x : grid)
    t.rows.push_back({csv::number(x), csv::number(std::exp(-phi(x)) + phi(-std::expm1(-x)))});
  InequalityScan s;
  std::string violation;
  try {
    s = appendix_inequality_scan(phi, grid, tol);
  } catch (const InequalityViolation& e) {
    violation = e.what();
  }
  if (violation.empty()) {
    t.add_meta("min", csv::number(s.min_value));
    t.add_meta("argmin", csv::number(s.argmin));
  }
  emit(c, std::move(t));
  if (!violation.empty()) throw CheckFailed(violation);
  return kOk;
}

int cmd_verify(const Common& c, const std::vector<std::string>& only,
               const std::vector<std::string>& phis, const std::vector<std::string>& inject) {
  suites::Config cfg;
  if (!phis.empty()) cfg.phis = phis;
  cfg.phis.insert(cfg.phis.end(), inject.begin(), inject.end());
  if (c.seed) cfg.seed = *c.seed;
  cfg.tol = c.tol;
  for (const auto& s : only)
    if (std::find(suites::names().begin(), suites::names().end(), s) == suites::names().end())
      throw DomainError("unknown suite '" + s + "'");
  const std::vector<std::string>& names = only.empty() ? suites::names() : only;
  const std::string dir = c.out.empty() ? "verify-out" : c.out;

  csv::Table summary;
  summary.add_meta("tool", std::string("subord ") + SUBORD_VERSION);
  summary.add_meta("seed", std::to_string(cfg.seed));
  summary.columns = {"suite", "pass", "checks", "failed", "first_failure"};
  bool all = true;
  for (const auto& name : names) {
    const auto r = suites::run(name, cfg);
    auto table = r.table();
    table.meta.insert(table.meta.begin(), {"tool", std::string("subord ") + SUBORD_VERSION});
    table.add_meta("seed", std::to_string(cfg.seed));
    csv::write(dir + "/" + name + ".csv", table);
    std::size_t failed = 0;
    for (const auto& ch : r.checks) failed += !ch.pass;
    std::string first = r.first_failure();
    std::printf("%-10s %s  %zu checks, %.1f s%s%s\n", name.c_str(), r.pass() ? "PASS" : "FAIL",
                r.checks.size(), r.seconds, first.empty() ? "" : "  first failure: ",
                first.c_str());
    std::fflush(stdout);
    for (char& ch : first)
      if (ch == ',' || ch == '\n') ch = ';';
    summary.rows.push_back({name, r.pass() ? "ok" : "FAIL", std::to_string(r.checks.size()),
                            std::to_string(failed), first});
    all = all && r.pass();
  }
  csv::write(dir + "/summary.csv", summary);
  if (!all) {
    std::string failing;
    for (const auto& row : summary.rows)
      if (row[1] != "ok") failing += "\n  " + row[0] + ": " + row[4];
    throw CheckFailed("verification failed:" + failing);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-time subordinators: step laws, moment brackets and chain rates"};
  app.set_version_flag("--version", std::string("subord ") + SUBORD_VERSION);
  app.set_config("--config", "", "Config file (TOML/INI; keys are the long flag names)");
  app.require_subcommand(1);
  Common c;
  std::size_t tn = 1, points = 10000;
  double x_max = 50.0;
  std::vector<std::string> only, phis, inject;

  auto* steplaw = app.add_subcommand("steplaw", "Write the step law c(phi, m), m <= M");
  add_phi(steplaw, c);
  add_M(steplaw, c);
  add_out(steplaw, c);

  auto* tnlaw = app.add_subcommand("tnlaw", "Write the truncated law of T_n");
  add_phi(tnlaw, c);
  add_M(tnlaw, c);
  add_cap(tnlaw, c);
  tnlaw->add_option("--n", tn, "n")->capture_default_str()->check(CLI::PositiveNumber);
  add_out(tnlaw, c);

  auto* moments = app.add_subcommand("moments", "Moment brackets E g(T_n) against rate shapes");
  add_phi(moments, c);
  add_M(moments, c);
  add_n(moments, c);
  add_cap(moments, c);
  add_family(moments, c);
  add_out(moments, c);

  auto* dominance = app.add_subcommand("dominance", "Compare E g(T_n) with E g(S_n)");
  add_phi(dominance, c);
  add_M(dominance, c);
  add_n(dominance, c);
  add_cap(dominance, c);
  add_family(dominance, c);
  dominance->add_option("--tol", c.tol, "Allowed excess")->capture_default_str();
  add_out(dominance, c);

  auto* rates = app.add_subcommand("rates", "Chain convergence and the mixture inequality");
  add_phi(rates, c);
  add_M(rates, c);
  add_n(rates, c);
  add_cap(rates, c);
  add_family(rates, c);
  rates->add_option("--chain", c.chain, "Chain id or chain CSV file")->required();
  rates->add_option("--x", c.x, "Start state")->capture_default_str();
  rates->add_option("--f", c.f, "Control function: 1, linear, power:p or a list")
      ->capture_default_str();
  add_out(rates, c);

  auto* verify = app.add_subcommand("verify", "Run the verification suites");
  verify->add_option("--suite", only, "Run only these suites (repeatable)");
  verify->add_option("--phi", phis, "Replace the list of Bernstein functions");
  verify->add_option("--inject", inject, "Append Bernstein functions (fault injection)");
  verify->add_option("--seed", c.seed, "Monte Carlo seed (default 20240601)");
  verify->add_option("--tol", c.tol, "Dominance tolerance")->capture_default_str();
  verify->add_option("--out", c.out, "Output directory")->capture_default_str();

  auto* scan = app.add_subcommand("inequality-scan",
                                  "min over x of exp(-phi(x)) + phi(1 - exp(-x))");
  add_phi(scan, c);
  scan->add_option("--points", points, "Grid size")->capture_default_str()->check(
      CLI::Range(2, 100000000));
  scan->add_option("--x-max", x_max, "Upper end of the grid")->capture_default_str()->check(
      CLI::PositiveNumber);
  double scan_tol = 1e-12;
  scan->add_option("--tol", scan_tol, "Allowed dip below 1")->capture_default_str();
  add_out(scan, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*steplaw) return cmd_steplaw(c);
    if (*tnlaw) return cmd_tnlaw(c, tn);
    if (*moments) return cmd_moments(c);
    if (*dominance) return cmd_dominance(c);
    if (*rates) return cmd_rates(c);
    if (*scan) return cmd_scan(c, points, x_max, scan_tol);
    if (*verify) return cmd_verify(c, only, phis, inject);
  } catch (const CheckFailed& e) {
    std::cerr << "FAILED: " << e.what() << '\n';
    return kFailed;
  } catch (const InequalityViolation& e) {
    std::cerr << "FAILED: " << e.what() << '\n';
    return kFailed;
  } catch (const DominanceViolation& e) {
    std::cerr << "FAILED: " << e.what() << '\n';
    return kFailed;
  } catch (const ConsistencyError& e) {
    std::cerr << "FAILED: " << e.what() << '\n';
    return kFailed;
  } catch (const DomainError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kConfig;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumeric;
  }
  return kConfig;
}
