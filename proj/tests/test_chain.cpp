#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>

#include <doctest.h>

#include "gen.hpp"
#include "subord/catalog.hpp"
#include "subord/chain.hpp"
#include "subord/error.hpp"

using namespace subord;

namespace {

// pi of a 2x2 chain [[1-a, a], [b, 1-b]]: (b, a) / (a + b).
std::vector<double> two_state_pi(double a, double b) { return {b / (a + b), a / (a + b)}; }

double l1_residual(const FiniteChain& c, const Distribution& pi) {
  const auto next = c.step(pi);
  double s = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) s += std::abs(next[i] - pi[i]);
  return s;
}

}  // namespace

TEST_CASE("stationary distributions") {
  const auto half = stationary(two_state_chain(0.5, 0.5));
  CHECK(half[0] == doctest::Approx(0.5).epsilon(1e-13));
  const auto pi = stationary(make_chain("two-state"));
  CHECK(pi[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(pi[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK_THROWS_AS(stationary(FiniteChain({1, 0, 0, 1}, 2)), ReducibleChainError);
  CHECK_FALSE(irreducible(FiniteChain({1, 0, 0, 1}, 2)));
  // Periodic chain: plain power iteration oscillates.
  const auto flip = stationary(FiniteChain({0, 1, 1, 0}, 2));
  CHECK(flip[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("n-step rows") {
  const auto c = make_chain("two-state");
  CHECK(n_step(c, 0, 0) == Distribution{1.0, 0.0});
  CHECK(n_step(c, 1, 1) == Distribution{0.2, 0.8});
  const auto two = n_step(c, 0, 2);
  CHECK(two[0] == doctest::Approx(0.83).epsilon(1e-15));
  CHECK(two[1] == doctest::Approx(0.17).epsilon(1e-15));
}

TEST_CASE("f-norm") {
  const std::vector<double> mu{0.3, -0.3}, f{1.0, 2.0};
  CHECK(f_norm(mu, f) == doctest::Approx(0.9));
  CHECK(tv_norm(mu) == doctest::Approx(0.6));
  CHECK(tv_norm(std::vector<double>{0.0, 0.0}) == 0.0);
}

TEST_CASE("backward recurrence chain") {
  const double kappa = 2.5;
  const auto k1 = backward_recurrence_chain(kappa, 1);
  CHECK(k1(0, 1) == doctest::Approx(std::pow(2.0, -kappa)).epsilon(1e-15));
  CHECK(k1(1, 0) == 1.0);

  const auto c = backward_recurrence_chain(kappa, 50);
  CHECK(c.size() == 51);
  const auto pi = stationary(c);
  // pi(j) is proportional to h(j) = (1 + j)^{-kappa}.
  double z = 0.0;
  for (std::size_t j = 0; j <= 50; ++j) z += std::pow(1.0 + double(j), -kappa);
  for (std::size_t j = 0; j <= 50; ++j)
    CHECK(pi[j] == doctest::Approx(std::pow(1.0 + double(j), -kappa) / z).epsilon(1e-10));
  CHECK_THROWS_AS(backward_recurrence_chain(1.0, 5), DomainError);
  CHECK_THROWS_AS(backward_recurrence_chain(2.5, 0), DomainError);
}

TEST_CASE("validation and builders") {
  CHECK_THROWS_AS(FiniteChain({0.5, 0.6, 0.5, 0.5}, 2), DomainError);
  CHECK_THROWS_AS(FiniteChain({1.5, -0.5, 0.5, 0.5}, 2), DomainError);
  CHECK_THROWS_AS(FiniteChain({1, 0, 0, 1}, 2, {0.5, 1.0}), DomainError);
  CHECK_THROWS_AS(make_chain("three-state"), DomainError);
  CHECK_THROWS_AS(make_chain("two-state:1.5:0.1"), DomainError);
  CHECK(make_chain("two-state:0.3:0.4")(0, 1) == 0.3);
  CHECK(make_chain("backward:3:4").size() == 5);
  CHECK(make_chain("lazy-cycle:4")(3, 0) == 0.5);
  CHECK(control_function("linear", 3) == std::vector<double>{1, 2, 3});
  CHECK(control_function("1", 2) == std::vector<double>{1, 1});
  CHECK(control_function("power:2", 3) == std::vector<double>{1, 4, 9});
  CHECK(control_function("1,2.5", 2) == std::vector<double>{1, 2.5});
  CHECK_THROWS_AS(control_function("1,2", 3), DomainError);
  CHECK_THROWS_AS(control_function("0.5,2", 2), DomainError);
}

TEST_CASE("chain CSV round trip") {
  const auto path = (std::filesystem::temp_directory_path() / "subord_chain_test.csv").string();
  const auto c = make_chain("backward:2.5:6").with_f(control_function("linear", 7));
  write_chain_csv(path, c);
  const auto back = read_chain_csv(path);
  std::filesystem::remove(path);
  REQUIRE(back.size() == c.size());
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = 0; j < c.size(); ++j) CHECK(back(i, j) == c(i, j));
  CHECK(std::vector<double>(back.f().begin(), back.f().end()) ==
        std::vector<double>(c.f().begin(), c.f().end()));
  CHECK(back.label() == c.label());
}

TEST_CASE("subordination") {
  const auto c = make_chain("two-state");
  const auto id = catalog::make("identity");
  const auto idstep = step_law(id, 2);
  for (std::size_t n = 1; n <= 6; ++n) {
    const auto s = subordinate(c, 0, t_n_law(idstep, n));
    CHECK(s.weights == n_step(c, 0, n));
    CHECK(invariance_check(c, t_n_law(idstep, n)) <= 1e-12);
  }
  const auto st = step_law(catalog::make("stable:0.5"), 1024);
  const auto law = t_n_law(st, 2);
  CHECK(invariance_check(c, law) <= law.residual + 1e-10);
  // Doubly stochastic chain: uniform pi is preserved by every power.
  CHECK(invariance_check(make_chain("lazy-cycle:5"), law) <= law.residual + 1e-12);
}

TEST_CASE("property: stationary distribution of random chains") {
  gen::Gen g(1111);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t k = g.index(2, 12);
    const FiniteChain c(g.stochastic(k), k);
    const auto pi = stationary(c);
    INFO("k = ", k, " trial ", trial);
    CHECK(l1_residual(c, pi) <= 1e-12);
    CHECK(std::accumulate(pi.begin(), pi.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-13));
    for (double p : pi) CHECK(p >= 0.0);
  }
  for (int trial = 0; trial < 40; ++trial) {
    const double a = g.uniform(0.01, 1.0), b = g.uniform(0.01, 1.0);
    const auto pi = stationary(two_state_chain(a, b));
    const auto ref = two_state_pi(a, b);
    CHECK(pi[0] == doctest::Approx(ref[0]).epsilon(1e-11));
  }
}

TEST_CASE("property: subordinated kernel keeps pi up to the residual") {
  gen::Gen g(1212);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t k = g.index(2, 8);
    const FiniteChain c(g.stochastic(k), k);
    const auto id = g.phi_id();
    const auto step = step_law(catalog::make(id), 512);
    const auto law = t_n_law(step, g.index(1, 10));
    INFO(id, " k = ", k, " n = ", law.n);
    CHECK(invariance_check(c, law) <= law.residual + 1e-10);
    const auto s = subordinate(c, g.index(0, k - 1), law);
    const double mass = std::accumulate(s.weights.begin(), s.weights.end(), 0.0);
    CHECK(mass + s.residual == doctest::Approx(1.0).epsilon(1e-12));
  }
}
