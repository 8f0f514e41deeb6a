#include <cmath>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <doctest.h>

#include "fixtures.hpp"
#include "gen.hpp"
#include "subord/bernstein.hpp"
#include "subord/catalog.hpp"
#include "subord/error.hpp"

using namespace subord;

TEST_CASE("drift and closed forms") {
  CHECK(catalog::make("identity")(3.5) == 3.5);
  CHECK(catalog::make("stable:0.5")(4.0) == doctest::Approx(2.0).epsilon(1e-15));
  const auto phi = catalog::make("log2");
  CHECK(phi(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(phi(0.0) == 0.0);
}

TEST_CASE("stable Levy quadrature agrees with x^a") {
  // rho(y) = a / Gamma(1 - a) y^{-1-a}, no closed form attached.
  const double a = 0.5;
  const double k = a / std::tgamma(1.0 - a);
  const BernsteinFunction phi(
      "stable-quad", 0.0,
      LevyMeasure::from_density([k, a](double y) { return k * std::pow(y, -1.0 - a); }));
  CHECK(std::abs(phi.eval(4.0, EvalMode::quadrature) - 2.0) <= 1e-8);
  CHECK(std::abs(phi.eval(0.3, EvalMode::quadrature) - std::sqrt(0.3)) <= 1e-8);
}

TEST_CASE("every catalog entry matches its Levy triplet") {
  for (const auto& id : catalog::standard_ids()) {
    const auto phi = catalog::make(id);
    if (!phi.has_triplet() || !phi.has_closed_form()) continue;
    for (double x : {1e-3, 0.1, 1.0, 7.0, 250.0}) {
      const double closed = phi(x);
      const double quad = phi.eval(x, EvalMode::quadrature);
      INFO(id, " x = ", x);
      CHECK(std::abs(quad - closed) <= 1e-9 * std::max(1.0, closed));
    }
  }
}

TEST_CASE("log2 Levy density integrates to phi") {
  // nu(dy) = e^{-y} / (y log 2) dy; independent check by boost exp_sinh.
  boost::math::quadrature::exp_sinh<double> integrator;
  const double x = 3.0;
  const double ref = integrator.integrate([x](double y) {
    return -std::expm1(-x * y) * std::exp(-y) / (y * std::log(2.0));
  });
  CHECK(catalog::make("log2").eval(x, EvalMode::quadrature) == doctest::Approx(ref).epsilon(1e-10));
  CHECK(ref == doctest::Approx(2.0).epsilon(1e-12));  // log 4 / log 2
}

TEST_CASE("invert_phi") {
  CHECK(invert_phi(catalog::make("stable:0.5"), 0.1) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(invert_phi(catalog::make("log2"), 1.0 / 3.0) ==
        doctest::Approx(std::cbrt(2.0) - 1.0).epsilon(1e-12));
  const auto bounded = fixtures::bounded_phi();
  CHECK(invert_phi(bounded, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bounded.eval(3.0, EvalMode::quadrature) == doctest::Approx(1.5).epsilon(1e-10));
  CHECK_THROWS_AS(invert_phi(bounded, 2.0), RangeError);
  CHECK_THROWS_AS(invert_phi(catalog::make("identity"), -1.0), RangeError);
}

TEST_CASE("normalize") {
  const BernsteinFunction twice("2x", 2.0, LevyMeasure{});
  const auto n = normalize(twice);
  CHECK(n(1.0) == 1.0);
  CHECK(n(5.0) == doctest::Approx(5.0));
  const auto again = normalize(n);
  CHECK(again(3.7) == n(3.7));
  CHECK_THROWS_AS(BernsteinFunction("zero", 0.0, LevyMeasure{}), DegenerateError);
  CHECK_THROWS_AS(BernsteinFunction("neg", -1.0, LevyMeasure{}), DomainError);
}

TEST_CASE("catalog rejects bad parameters") {
  CHECK_THROWS_AS(catalog::make("stable:1.5"), DomainError);
  CHECK_THROWS_AS(catalog::make("stable:0"), DomainError);
  CHECK_THROWS_AS(catalog::make("stable-log:0.5:0.6"), DomainError);
  CHECK_THROWS_AS(catalog::make("stable-invlog:0.5:0.5"), DomainError);
  CHECK_THROWS_AS(catalog::make("rational:1"), DomainError);
  CHECK_THROWS_AS(catalog::make("stable"), DomainError);
  CHECK_THROWS_AS(catalog::make("nope"), DomainError);
  try {
    catalog::make("stable:1.5");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("(0,1)") != std::string::npos);
  }
}

TEST_CASE("growth and scaling diagnostics") {
  const auto grid = log_grid(1e-6, 1e6, 61);
  const std::vector<double> lambdas{2.0};
  auto find = [](const std::vector<ConditionDiagnostic>& ds, const std::string& id) {
    for (const auto& d : ds)
      if (d.condition_id == id) return d;
    FAIL("missing diagnostic ", id);
    return ConditionDiagnostic{};
  };

  const auto stable = check_conditions(catalog::make("stable:0.5"), grid, lambdas);
  const auto sc = find(stable, "scaling-limsup");
  CHECK(sc.verdict == Verdict::pass);
  for (double w : sc.witness) CHECK(w == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  const auto id = check_conditions(catalog::make("identity"), grid, lambdas);
  CHECK(find(id, "log-growth").verdict == Verdict::pass);
  CHECK(find(id, "scaling-limsup").verdict == Verdict::pass);

  // log(1+x)/(log 2 log x) at x = 1e6, close to 1/log 2
  const double v = std::log1p(1e6) / (std::log(2.0) * std::log(1e6));
  CHECK(v == doctest::Approx(1.0 / std::log(2.0)).epsilon(1e-3));
  CHECK(catalog::make("log2")(1e6) / std::log(1e6) == doctest::Approx(v).epsilon(1e-13));

  // bounded phi: phi / log x -> 0, but only slowly, so a finite grid needs
  // a threshold above 2 / log 1e6.
  const ConditionThresholds strict{0.2};
  const auto bd = check_conditions(fixtures::bounded_phi(), grid, lambdas, strict);
  CHECK(find(bd, "log-growth").verdict == Verdict::fail);
  CHECK(find(check_conditions(catalog::make("log2"), grid, lambdas, strict), "log-growth").verdict ==
        Verdict::pass);
}

TEST_CASE("shape gates flag a non-Bernstein function") {
  const auto grid = log_grid(1e-3, 1e3, 200);
  const auto bad = catalog::make("nonconcave");
  CHECK(check_shape_concave(bad, grid).verdict == Verdict::fail);
  for (const auto& id : catalog::standard_ids()) {
    const auto phi = catalog::make(id);
    CHECK(check_shape_concave(phi, grid).verdict == Verdict::pass);
    CHECK(check_shape_monotone(phi, grid).verdict == Verdict::pass);
  }
}

TEST_CASE("appendix inequality examples") {
  const auto grid = log_grid(1e-4, 50.0, 1000);
  const auto id = appendix_inequality_scan(catalog::make("identity"), grid);
  CHECK(id.max_deviation <= 1e-14);
  const double x = 1.0;
  const double v = std::exp(-1.0) + std::sqrt(1.0 - std::exp(-x));
  CHECK(v == doctest::Approx(1.16294).epsilon(1e-5));
  const std::vector<double> one{1.0};
  CHECK(appendix_inequality_scan(catalog::make("stable:0.5"), one).min_value ==
        doctest::Approx(v).epsilon(1e-15));
  const std::vector<double> zero{0.0};
  CHECK(appendix_inequality_scan(catalog::make("log2"), zero).min_value == 1.0);
  CHECK_THROWS_AS(appendix_inequality_scan(catalog::make("nonconcave"), grid), InequalityViolation);
}

TEST_CASE("property: appendix inequality for random phi and x") {
  gen::Gen g(101);
  for (int trial = 0; trial < 200; ++trial) {
    const auto id = g.phi_id();
    const auto phi = catalog::make(id);
    const std::vector<double> xs{g.log_uniform(1e-6, 50.0), g.uniform(0.0, 5.0)};
    INFO(id);
    CHECK(appendix_inequality_scan(phi, xs).min_value >= 1.0 - 1e-12);
  }
}

TEST_CASE("property: phi(tx) >= t phi(x) on [0,1]") {
  gen::Gen g(202);
  CHECK(subadditivity_check(catalog::make("stable:0.5"), 0.25, 1.0));
  CHECK(catalog::make("stable:0.5")(0.25) == 0.5);
  for (int trial = 0; trial < 300; ++trial) {
    const auto id = g.phi_id();
    const auto phi = catalog::make(id);
    const double t = g.coin(0.1) ? (g.coin() ? 0.0 : 1.0) : g.uniform(0.0, 1.0);
    const double x = g.log_uniform(1e-4, 1e4);
    INFO(id, " t = ", t, " x = ", x);
    CHECK(subadditivity_check(phi, t, x));
  }
}

TEST_CASE("property: catalog functions are normalized, increasing and concave") {
  gen::Gen g(303);
  for (int trial = 0; trial < 100; ++trial) {
    const auto id = g.phi_id();
    const auto phi = catalog::make(id);
    INFO(id);
    CHECK(phi(1.0) == doctest::Approx(1.0).epsilon(1e-14));
    const double x = g.log_uniform(1e-3, 1e3), h = x * g.uniform(0.01, 0.5);
    const double a = phi(x - h), b = phi(x), c = phi(x + h);
    CHECK(a <= b);
    CHECK(b <= c);
    CHECK(b - a >= (c - b) * (1.0 - 1e-9) - 1e-15);
  }
}
