#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <doctest.h>

#include "gen.hpp"
#include "subord/catalog.hpp"
#include "subord/cm.hpp"
#include "subord/error.hpp"
#include "subord/quadrature.hpp"

using namespace subord;

namespace {

// E g(S_t) for phi(x) = x^{1/2}: S_t has density t / (2 sqrt(pi)) s^{-3/2} e^{-t^2 / (4s)}.
template <class G>
double half_stable_moment(double t, G g) {
  boost::math::quadrature::exp_sinh<double> integrator;
  const double log_k = std::log(t / (2.0 * std::sqrt(std::numbers::pi)));
  return integrator.integrate(
      [&](double s) {
        if (!(s > 0.0)) return 0.0;
        const double log_density = log_k - 1.5 * std::log(s) - t * t / (4.0 * s);
        return log_density < -745.0 ? 0.0 : g(s) * std::exp(log_density);
      },
      1e-13);
}

}  // namespace

TEST_CASE("representation densities") {
  CHECK(cm_density(CmRepresentation::poly(1.0), 0.7) == 1.0);
  CHECK(cm_density(CmRepresentation::poly(2.0), 3.0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK_THROWS_AS(CmRepresentation::subexp(0.0, 0.5), DomainError);
  CHECK_THROWS_AS(CmRepresentation::subexp(1.0, 1.5), DomainError);
  CHECK_THROWS_AS(CmRepresentation::poly(-1.0), DomainError);
  CHECK_THROWS_AS(CmRepresentation::log(0.0), DomainError);
}

TEST_CASE("Pollard density is a probability density with the right transform") {
  const auto rep = CmRepresentation::subexp(1.0, 0.5);
  const auto dens = [&](double t) { return t > 0.0 ? cm_density(rep, t) : 0.0; };
  const std::vector<double> pts{0.0, 0.01, 0.1, 1.0, 10.0, 1e3, INFINITY};
  const auto total = quad::piecewise(dens, pts, {1e-13, 1e-10});
  CHECK(total.value == doctest::Approx(1.0).epsilon(1e-6));
  const auto lap = quad::piecewise([&](double t) { return std::exp(-t) * dens(t); }, pts,
                                   {1e-13, 1e-10});
  CHECK(lap.value == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
}

TEST_CASE("log representation reproduces g") {
  // The density is ~1 / (t log^2 t) at 0: mass below 1e-100 is still ~1/230.
  // Differences g(x) - g(1) cancel it.
  const auto rep = CmRepresentation::log(1.0);
  const std::vector<double> pts{0.0, 0.01, 0.1, 1.0, 10.0, 100.0, INFINITY};
  for (double x : {0.5, 4.0, 20.0}) {
    const auto r = quad::piecewise(
        [&](double t) {
          return t > 0.0 ? (std::exp(-x * t) - std::exp(-t)) * cm_density(rep, t) : 0.0;
        },
        pts, {1e-14, 1e-10});
    INFO("x = ", x);
    CHECK(r.value == doctest::Approx(1.0 / std::log1p(x) - 1.0 / std::log(2.0)).epsilon(1e-7));
  }
}

TEST_CASE("continuous moments: identity and Gamma oracle") {
  const auto id = catalog::make("identity");
  for (double beta : {0.5, 1.0, 2.0})
    for (double n : {1.0, 3.0, 10.0}) {
      INFO("beta = ", beta, " n = ", n);
      CHECK(continuous_moment(id, n, CmRepresentation::poly(beta)) ==
            doctest::Approx(std::pow(n, -beta)).epsilon(1e-9));
    }
  const auto st = catalog::make("stable:0.5");
  // E S_t^{-1} = Gamma(3) / Gamma(2) t^{-2}
  for (double t : {1.0, 4.0, 50.0}) {
    INFO("t = ", t);
    CHECK(continuous_moment(st, t, CmRepresentation::poly(1.0)) ==
          doctest::Approx(2.0 / (t * t)).epsilon(1e-8));
  }
  // log2: S_t ~ Gamma(t / log 2, 1), so E S_t^{-beta} = Gamma(k - beta) / Gamma(k).
  // beta close to k leaves a t^{-1.04} tail.
  const auto lg = catalog::make("log2");
  for (double beta : {0.5, 1.2, 1.398}) {
    const double k = 1.0 / std::numbers::ln2;
    INFO("beta = ", beta);
    CHECK(continuous_moment(lg, 1.0, CmRepresentation::poly(beta)) ==
          doctest::Approx(std::exp(std::lgamma(k - beta) - std::lgamma(k))).epsilon(1e-8));
  }
  CHECK(std::isinf(continuous_moment(lg, 1.0, CmRepresentation::poly(1.5))));
}

TEST_CASE("continuous moments against the explicit half-stable density") {
  const auto st = catalog::make("stable:0.5");
  const ContinuousMoments sub(st, CmRepresentation::subexp(1.0, 0.5));
  const ContinuousMoments lg(st, CmRepresentation::log(1.0));
  for (double n : {1.0, 4.0, 13.5}) {
    const double ref_sub = half_stable_moment(n, [](double s) { return std::exp(-std::sqrt(s)); });
    const double ref_log = half_stable_moment(n, [](double s) { return 1.0 / std::log1p(s); });
    INFO("n = ", n);
    CHECK(sub(n) == doctest::Approx(ref_sub).epsilon(1e-8));
    CHECK(lg(n) == doctest::Approx(ref_log).epsilon(1e-7));
  }
  CHECK(sub(1.0) == doctest::Approx(0.337066437791).epsilon(1e-9));
  CHECK(sub.cached_densities() > 0);
}

TEST_CASE("dominance examples") {
  const auto st = catalog::make("stable:0.5");
  const auto step = step_law(st, std::size_t{1} << 16);
  const auto r = dominance_check(st, 1, CmRepresentation::poly(1.0), t_n_law(step, 1));
  CHECK(r.holds);
  CHECK(r.continuous == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(r.discrete.lower == doctest::Approx(2.0 * (1.0 - std::numbers::ln2)).epsilon(1e-5));

  const auto id = catalog::make("identity");
  const auto idlaw = t_n_law(step_law(id, 2), 6);
  for (const auto& rep : {CmRepresentation::poly(1.0), CmRepresentation::subexp(1.0, 0.5),
                          CmRepresentation::log(1.0)}) {
    const auto d = dominance_check(id, 6, rep, idlaw);
    INFO(rep.label());
    CHECK(std::abs(d.margin) <= 1e-8);
  }
}

TEST_CASE("property: E g(T_n) <= E g(S_n)") {
  gen::Gen g(909);
  for (int trial = 0; trial < 8; ++trial) {
    const auto id = g.phi_id();
    const auto phi = catalog::make(id);
    const auto step = step_law(phi, 4096);
    const std::size_t n = g.index(1, 20);
    const auto law = t_n_law(step, n);
    const CmRepresentation reps[] = {CmRepresentation::poly(g.uniform(0.3, 2.0)),
                                     CmRepresentation::subexp(g.uniform(0.5, 2.0), g.uniform(0.3, 1.0)),
                                     CmRepresentation::log(g.uniform(0.5, 2.0))};
    for (const auto& rep : reps) {
      INFO(id, " n = ", n, " ", rep.label());
      const auto d = dominance_check(phi, n, rep, law);
      CHECK(d.holds);
    }
  }
}

TEST_CASE("Kanter sampler") {
  const auto mc = mc_mean_stable(0.5, 1.0, 1000000, 11, [](double s) { return std::exp(-s); });
  CHECK(std::abs(mc.mean - std::exp(-1.0)) <= 4.0 * mc.std_error);
  // E e^{-u S_t} = e^{-t u^a} for another (a, t, u)
  const auto m2 = mc_mean_stable(0.3, 2.0, 200000, 12, [](double s) { return std::exp(-0.5 * s); });
  CHECK(std::abs(m2.mean - std::exp(-2.0 * std::pow(0.5, 0.3))) <= 4.0 * m2.std_error);
  CHECK(sample_stable_S(0.5, 1.0, 7) == sample_stable_S(0.5, 1.0, 7));
  CHECK_THROWS_AS(sample_stable_S(1.0, 1.0, 7), DomainError);
}
