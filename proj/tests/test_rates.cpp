#include <cmath>
#include <vector>

#include <doctest.h>

#include "fixtures.hpp"
#include "gen.hpp"
#include "subord/catalog.hpp"
#include "subord/error.hpp"
#include "subord/rates.hpp"

using namespace subord;

TEST_CASE("rate specs") {
  CHECK(RateSpec::poly(2.0).r(4.0) == doctest::Approx(1.0 / 16.0));
  CHECK(RateSpec::log(1.0).r(8.0) == doctest::Approx(1.0 / std::log(10.0)));
  CHECK(RateSpec::subexp(1.0, 0.5).r(4.0) == doctest::Approx(std::exp(-2.0)));
  CHECK_THROWS_AS(RateSpec::subexp(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(RateSpec::poly(0.0), DomainError);
  CHECK_THROWS_AS(RateSpec::log(-1.0), DomainError);
}

TEST_CASE("theoretical rates") {
  CHECK(theoretical_rate(RateSpec::poly(2.0), catalog::make("log2"), 1.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(theoretical_rate(RateSpec::log(1.0), catalog::make("stable:0.5"), 8.0) ==
        doctest::Approx(0.434294).epsilon(1e-6));
  // kappa = 2/3 for delta = alpha = 1/2
  CHECK(theoretical_rate(RateSpec::subexp(1.0, 0.5), catalog::make("stable:0.5"), 8.0) ==
        doctest::Approx(std::exp(-4.0)).epsilon(1e-12));
  CHECK_THROWS_AS(theoretical_rate(RateSpec::subexp(1.0, 0.5), catalog::make("log2"), 2.0),
                  PreconditionError);
  CHECK_THROWS_AS(theoretical_rate(RateSpec::poly(1.0), fixtures::bounded_phi(), 2.0),
                  PreconditionError);
}

TEST_CASE("constant fits") {
  const std::vector<std::size_t> ns{1, 2, 3, 4};
  const std::vector<double> r{1.0, 0.5, 0.25, 0.125};
  const auto same = fit_constant(ns, r, r);
  CHECK(same.C == 1.0);
  CHECK(same.stability == 0.0);
  std::vector<double> twice(r);
  for (auto& v : twice) v *= 2.0;
  CHECK(fit_constant(ns, twice, r).C == 2.0);
  CHECK_THROWS_AS(fit_constant(ns, r, std::vector<double>{1.0}), DomainError);
}

TEST_CASE("empirical decay shrinks") {
  const auto d = empirical_decay(make_chain("two-state"), 0, 40);
  CHECK(d[1] == doctest::Approx(0.466667).epsilon(1e-6));
  CHECK(d[40] < d[1]);
  // two-state: d(n) = 2 pi(1) 0.7^n from state 0
  for (std::size_t n = 0; n <= 40; ++n)
    CHECK(d[n] == doctest::Approx(2.0 / 3.0 * std::pow(0.7, double(n))).epsilon(1e-9));
}

TEST_CASE("identity gives equality in the mixture inequality") {
  for (const char* chain : {"two-state", "backward"}) {
    const auto c = make_chain(chain);
    const auto laws = t_n_laws(step_law(catalog::make("identity"), 2), 30);
    for (std::size_t x = 0; x < c.size(); x += 7) {
      const auto rep = mixture_bound_check(c, x, laws);
      CHECK(rep.all_ok);
      for (const auto& row : rep.rows) {
        CHECK(row.d_phi == row.d);
        CHECK(row.mixture_bound == row.d);
      }
    }
  }
}

TEST_CASE("property: mixture inequality with no tolerance") {
  gen::Gen g(1313);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t k = g.index(2, 10);
    const auto f = g.coin() ? std::vector<double>(k, 1.0) : control_function("power:1.5", k);
    const FiniteChain c(g.stochastic(k), k, f);
    const auto id = g.phi_id();
    const auto laws = t_n_laws(step_law(catalog::make(id), g.coin() ? 64 : 1024), g.index(1, 25));
    const std::size_t x = g.index(0, k - 1);
    INFO(id, " k = ", k, " x = ", x);
    const auto rep = mixture_bound_check(c, x, laws, false);
    CHECK(rep.all_ok);
    for (const auto& row : rep.rows) {
      CHECK(row.d_phi <= row.mixture_bound);
      CHECK(row.d_phi_lower <= row.d_phi_upper);
    }
  }
}

TEST_CASE("property: the bracket holds the untruncated distance") {
  // A law truncated at small M is bracketed around a reference from a much
  // larger M; both brackets must overlap.
  gen::Gen g(1414);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t k = g.index(2, 6);
    const FiniteChain c(g.stochastic(k), k);
    const auto phi = catalog::make(g.coin() ? "stable:0.5" : "rational:0.4");
    const std::size_t n = g.index(1, 6);
    ConvolutionOptions opts;
    const auto small = mixture_bound_check(c, 0, t_n_laws(step_law(phi, 64), n, opts), false);
    const auto big = mixture_bound_check(c, 0, t_n_laws(step_law(phi, 8192), n, opts), false);
    for (std::size_t i = 0; i < n; ++i) {
      INFO(phi.id(), " n = ", i + 1);
      CHECK(small.rows[i].d_phi_lower <= big.rows[i].d_phi_upper);
      CHECK(big.rows[i].d_phi_lower <= small.rows[i].d_phi_upper);
    }
  }
}

TEST_CASE("rate report pipeline") {
  const auto phi = catalog::make("stable:0.5");
  const auto step = step_law(phi, 4096);
  const auto rep = rate_report(make_chain("two-state"), 0, phi, step, RateSpec::poly(1.0), 50,
                               ConvolutionOptions{4096});
  CHECK(rep.rows.size() == 50);
  CHECK(rep.mixture_ok);
  CHECK(rep.fit.C > 0.0);
  CHECK_THROWS_AS(rate_report(make_chain("two-state"), 0, catalog::make("log2"), step,
                              RateSpec::poly(1.0), 5),
                  DomainError);
}
