#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "gen.hpp"
#include "subord/catalog.hpp"
#include "subord/error.hpp"
#include "subord/kernels.hpp"
#include "subord/subordinator.hpp"

using namespace subord;

namespace {

// (a / Gamma(1-a)) Gamma(m-a) / m!, through lgamma.
double sibuya(double a, std::size_t m) {
  const double md = static_cast<double>(m);
  return a / std::tgamma(1.0 - a) * std::exp(std::lgamma(md - a) - std::lgamma(md + 1.0));
}

// log2 steps: c(m) = 1 / (log 2 m 2^m).
double log_series(std::size_t m) {
  return 1.0 / (std::numbers::ln2 * static_cast<double>(m) * std::ldexp(1.0, static_cast<int>(m)));
}

}  // namespace

TEST_CASE("identity step law is a point mass") {
  const auto law = step_law(catalog::make("identity"), 8);
  CHECK(law.c(1) == 1.0);
  CHECK(law.residual == 0.0);
  for (std::size_t m = 2; m <= 8; ++m) CHECK(law.c(m) == 0.0);
}

TEST_CASE("Sibuya values") {
  const auto law = step_law(catalog::make("stable:0.5"), 16);
  CHECK(law.c(1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(law.c(2) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(law.c(3) == doctest::Approx(0.0625).epsilon(1e-15));
}

TEST_CASE("quadrature step law agrees with the Sibuya oracle") {
  StepLawOptions quad;
  quad.method = StepMethod::quadrature;
  for (double a : {0.25, 0.5, 0.75}) {
    char id[32];
    std::snprintf(id, sizeof id, "stable:%g", a);
    const auto law = step_law(catalog::make(id), 100, quad);
    for (std::size_t m = 1; m <= 100; ++m) {
      INFO(id, " m = ", m);
      CHECK(std::abs(law.c(m) - sibuya(a, m)) <= 1e-12);
    }
  }
}

TEST_CASE("log2 steps follow the logarithmic series") {
  StepLawOptions quad;
  quad.method = StepMethod::quadrature;
  const auto phi = catalog::make("log2");
  const auto law = step_law(phi, 60, quad);
  for (std::size_t m = 1; m <= 60; ++m) {
    INFO("m = ", m);
    CHECK(law.c(m) == doctest::Approx(log_series(m)).epsilon(1e-11));
  }
}

TEST_CASE("step law errors") {
  CHECK_THROWS_AS(step_law(catalog::make("log2"), 10), TruncationError);
  const auto heavy = step_law(catalog::make("stable:0.5"), 10);
  CHECK(heavy.heavy_tail);
  CHECK(heavy.residual > 0.0);
  CHECK(heavy.residual == doctest::Approx(1.0 - heavy.mass()).epsilon(1e-12));
}

TEST_CASE("PGF identity examples") {
  const auto phi = catalog::make("stable:0.5");
  const auto law = step_law(phi, std::size_t{1} << 14);
  CHECK(pgf_residual(law, phi, 0.0) == 0.0);
  CHECK(pgf_residual(law, phi, 0.75) <= 1e-8);
  const auto id = catalog::make("identity");
  CHECK(pgf_residual(step_law(id, 4), id, 0.3) <= 1e-16);
}

TEST_CASE("property: PGF identity for random phi and s") {
  gen::Gen g(404);
  for (int trial = 0; trial < 40; ++trial) {
    const auto id = g.phi_id();
    const auto phi = catalog::make(id);
    const auto law = step_law(phi, std::size_t{1} << 12);
    const double s = g.uniform(0.0, 0.9);
    INFO(id, " s = ", s);
    CHECK(pgf_residual(law, phi, s) <= 1e-8);
    CHECK(law.residual >= 0.0);
  }
}

TEST_CASE("T_2 of the Sibuya law by enumeration") {
  const auto step = step_law(catalog::make("stable:0.5"), 64);
  const auto law = t_n_law(step, 2);
  CHECK(law.probability(2) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(law.probability(3) == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(law.probability(4) == doctest::Approx(0.078125).epsilon(1e-14));
  for (std::size_t m = 2; m <= 60; ++m) {
    double direct = 0.0;
    for (std::size_t a = 1; a < m; ++a) direct += step.c(a) * step.c(m - a);
    CHECK(law.probability(m) == doctest::Approx(direct).epsilon(1e-13));
  }
}

TEST_CASE("T_1 is the step law and identity gives T_n = n") {
  const auto step = step_law(catalog::make("stable:0.3"), 256);
  const auto t1 = t_n_law(step, 1);
  for (std::size_t m = 1; m <= 256; ++m) CHECK(t1.probability(m) == step.c(m));
  const auto id = t_n_law(step_law(catalog::make("identity"), 4), 7);
  CHECK(id.probability(7) == 1.0);
  CHECK(id.mass() == 1.0);
  CHECK(sample_T(step_law(catalog::make("identity"), 4), 5, 1) ==
        std::vector<std::uint64_t>{1, 2, 3, 4, 5});
}

TEST_CASE("budget error") {
  ConvolutionOptions opts;
  opts.budget = 1000;
  const auto step = step_law(catalog::make("stable:0.5"), 512);
  CHECK_THROWS_AS(t_n_law(step, 10, opts), BudgetError);
  opts.cap = 500;
  CHECK_NOTHROW(t_n_law(step, 10, opts));
}

TEST_CASE("property: semigroup T_a * T_b = T_{a+b}") {
  gen::Gen g(505);
  for (int trial = 0; trial < 12; ++trial) {
    const auto id = g.phi_id();
    const auto step = step_law(catalog::make(id), 256);
    const std::size_t a = g.index(1, 6), b = g.index(1, 6);
    const auto lhs = convolve_laws(t_n_law(step, a), t_n_law(step, b));
    const auto rhs = t_n_law(step, a + b);
    INFO(id, " a = ", a, " b = ", b);
    REQUIRE(lhs.n == rhs.n);
    double err = 0.0;
    for (std::size_t m = rhs.first(); m <= rhs.last(); ++m)
      err = std::max(err, std::abs(lhs.probability(m) - rhs.probability(m)));
    CHECK(err <= 1e-14);
  }
}

TEST_CASE("property: truncated laws account for all mass") {
  gen::Gen g(606);
  for (int trial = 0; trial < 20; ++trial) {
    const auto id = g.phi_id();
    const auto step = step_law(catalog::make(id), g.coin() ? 128 : 1024);
    ConvolutionOptions opts;
    opts.cap = g.coin() ? 0 : g.index(50, 2000);
    const std::size_t n = g.index(1, 30);
    const auto law = t_n_law(step, n, opts);
    INFO(id, " n = ", n, " cap = ", opts.cap);
    CHECK(law.mass() + law.residual == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(law.residual >= -1e-15);
    CHECK(*std::min_element(law.pmf.begin(), law.pmf.end()) >= 0.0);
    // Missing mass needs a step beyond the step-law support or beyond the cap.
    CHECK(law.tail_start >= std::min(law.last() + 1, step.M + n));
  }
}

TEST_CASE("expectation brackets") {
  const auto step = step_law(catalog::make("stable:0.5"), std::size_t{1} << 16);
  const auto law = t_n_law(step, 1);
  const auto one = expect_monotone(law, [](double) { return 1.0; });
  CHECK(one.upper >= 1.0);
  CHECK(one.upper <= 1.0 + 1e-12);
  CHECK(one.lower <= 1.0 - law.residual + 1e-14);

  // E 1/T_1 = \int_0^1 (1 - sqrt(1 - s)) / s ds = 2 (1 - log 2)
  const double exact = 2.0 * (1.0 - std::numbers::ln2);
  const auto b = expect_monotone(law, [](double x) { return 1.0 / x; });
  CHECK(b.lower <= exact);
  CHECK(exact <= b.upper);
  CHECK(b.width() <= 1e-5);

  // log2: E 1/T_1 = Li_2(1/2) / log 2
  const double li2 = std::numbers::pi * std::numbers::pi / 12.0 - 0.5 * std::pow(std::numbers::ln2, 2);
  const auto lb = expect_monotone(t_n_law(step_law(catalog::make("log2"), 64), 1),
                                  [](double x) { return 1.0 / x; });
  CHECK(lb.lower <= li2 / std::numbers::ln2 + 1e-15);
  CHECK(lb.upper >= li2 / std::numbers::ln2 - 1e-15);
  CHECK(lb.width() <= 1e-12);

  const auto id = t_n_law(step_law(catalog::make("identity"), 4), 5);
  const auto p = expect_monotone(id, [](double x) { return std::pow(x, -1.5); });
  CHECK(p.lower == doctest::Approx(std::pow(5.0, -1.5)).epsilon(1e-15));
  CHECK(p.upper == doctest::Approx(std::pow(5.0, -1.5)).epsilon(1e-15));

  CHECK_THROWS_AS(expect_monotone(law, [](double x) { return x; }), ContractError);
}

TEST_CASE("property: brackets nest as M grows") {
  // Bigger M can only tighten the certified interval around the same value.
  gen::Gen g(707);
  for (int trial = 0; trial < 10; ++trial) {
    const auto id = g.phi_id();
    const auto phi = catalog::make(id);
    const std::size_t n = g.index(1, 8);
    const auto small = expect_monotone(t_n_law(step_law(phi, 512), n), [](double x) { return 1.0 / x; });
    const auto big = expect_monotone(t_n_law(step_law(phi, 4096), n), [](double x) { return 1.0 / x; });
    INFO(id, " n = ", n);
    CHECK(big.lower <= small.upper);
    CHECK(small.lower <= big.upper);
    // Up to the rounding guard, which grows with the support.
    CHECK(big.width() <= small.width() + 1e-11);
  }
}

TEST_CASE("sampler") {
  const auto step = step_law(catalog::make("stable:0.5"), 1024);
  const auto phi = catalog::make("stable:0.5");
  const auto mc = mc_mean_T(step, 1, 1000000, 99, [](double x) { return x == 1.0 ? 1.0 : 0.0; }, &phi);
  CHECK(std::abs(mc.mean - 0.5) <= 4.0 * std::sqrt(0.25 / 1e6));
  CHECK(StepSampler(step, &phi).exact_tail());
  CHECK_FALSE(StepSampler(step).exact_tail());

  const auto path = sample_T(step, 200, 5, &phi);
  for (std::size_t k = 0; k < path.size(); ++k) {
    CHECK(path[k] >= k + 1);
    if (k > 0) CHECK(path[k] > path[k - 1]);
  }
}

TEST_CASE("exact tail sampling reaches beyond M") {
  // P(R > 16) for the Sibuya law with a = 1/2 is about 0.14; draws above 16
  // must appear with that frequency.
  const auto phi = catalog::make("stable:0.5");
  const auto step = step_law(phi, 16);
  const double tail = *phi.closed_step_tail(16);
  const auto mc =
      mc_mean_T(step, 1, 400000, 3, [](double x) { return x > 16.0 ? 1.0 : 0.0; }, &phi);
  CHECK(std::abs(mc.mean - tail) <= 4.0 * mc.std_error);
  // Mean of 1/R matches the full law, not the truncated one.
  const auto inv = mc_mean_T(step, 1, 400000, 4, [](double x) { return 1.0 / x; }, &phi);
  CHECK(std::abs(inv.mean - 2.0 * (1.0 - std::numbers::ln2)) <= 4.0 * inv.std_error);
}

TEST_CASE("property: convolution kernels agree") {
  gen::Gen g(808);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t na = g.index(1, 700), nb = g.index(1, 700);
    const std::size_t nout = g.index(1, na + nb - 1);
    std::vector<double> a(na), b(nb);
    for (auto& v : a) v = g.uniform(0.0, 1.0);
    for (auto& v : b) v = g.uniform(0.0, 1.0);
    std::vector<double> ref(nout), par(nout), fft(nout);
    kernels::convolve_serial(a, b, ref);
    kernels::convolve_parallel(a, b, par);
    const double bound = kernels::convolve_fft(a, b, fft);
    INFO("na = ", na, " nb = ", nb, " nout = ", nout);
    for (std::size_t k = 0; k < nout; ++k) {
      CHECK(std::abs(par[k] - ref[k]) <= 1e-12 * std::max(1.0, ref[k]));
      CHECK(std::abs(fft[k] - ref[k]) <= bound + 1e-12 * ref[k]);
    }
  }
}
