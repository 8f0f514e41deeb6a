#include "subord/catalog.hpp"

#include <charconv>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "subord/error.hpp"

namespace subord::catalog {
namespace {

using std::numbers::ln2;
using std::numbers::pi;

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_number(std::string_view text, std::string_view id) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw DomainError("Bernstein id '" + std::string(id) + "': cannot parse number '" +
                      std::string(text) + "'");
  return v;
}

void expect_arity(const std::vector<std::string_view>& parts, std::size_t n, std::string_view id,
                  const char* usage) {
  if (parts.size() != n)
    throw DomainError("Bernstein id '" + std::string(id) + "': expected " + usage);
}

// Series tail sum_{k > m} pmf(k) for pmfs with at least geometric decay 1/2.
double geometric_tail(const std::function<double(std::size_t)>& pmf, std::size_t m) {
  double sum = 0.0;
  for (std::size_t k = m + 1; k < m + 2000; ++k) {
    const double term = pmf(k);
    sum += term;
    if (term <= 1e-18 * sum || term == 0.0) break;
  }
  return sum;
}

BernsteinFunction identity() {
  ClosedForm cf;
  cf.phi = [](double x) { return x; };
  cf.step_pmf = [](std::size_t m) { return m == 1 ? 1.0 : 0.0; };
  cf.step_tail = [](std::size_t) { return 0.0; };
  cf.step_rel_error = 0.0;
  return BernsteinFunction("identity", 1.0, LevyMeasure{}, cf, Certificates{true, false})
      .with_normalized_flag();
}

BernsteinFunction stable(double a, std::string id) {
  if (!(a > 0.0 && a < 1.0))
    throw DomainError("stable: alpha must lie in the open interval (0,1); got " +
                      std::to_string(a));
  const double c = a / std::tgamma(1.0 - a);
  auto levy = LevyMeasure::from_density([a, c](double y) { return c * std::pow(y, -1.0 - a); },
                                        LevyLowerBound{c, a});
  ClosedForm cf;
  cf.phi = [a](double x) { return std::pow(x, a); };
  // Sibuya law: c(m) = a Gamma(m - a) / (Gamma(1 - a) m!)
  cf.step_pmf = [a, c](std::size_t m) {
    return c * boost::math::tgamma_delta_ratio(static_cast<double>(m) - a, 1.0 + a);
  };
  cf.step_tail = [a](std::size_t m) {
    return boost::math::tgamma_delta_ratio(static_cast<double>(m) + 1.0 - a, a) /
           std::tgamma(1.0 - a);
  };
  return BernsteinFunction(std::move(id), 0.0, std::move(levy), cf, Certificates{true, true})
      .with_normalized_flag();
}

BernsteinFunction log2_family() {
  auto levy = LevyMeasure::from_density([](double y) { return std::exp(-y) / (y * ln2); });
  auto pmf = [](std::size_t m) {
    return std::ldexp(1.0, -static_cast<int>(std::min<std::size_t>(m, 2000))) /
           (static_cast<double>(m) * ln2);
  };
  ClosedForm cf;
  cf.phi = [](double x) { return std::log1p(x) / ln2; };
  cf.step_pmf = pmf;
  cf.step_tail = [pmf](std::size_t m) { return geometric_tail(pmf, m); };
  return BernsteinFunction("log2", 0.0, std::move(levy), cf, Certificates{true, false})
      .with_normalized_flag();
}

// Stieltjes weight of x^a log^p(1+x) at x = -t + i0, divided by pi.
double stable_log_weight(double t, double a, double p) {
  if (t <= 0.0) return 0.0;
  const double ta = std::pow(t, a);
  if (t < 1.0) {
    const double l = -std::log1p(-t);  // |log(1 - t)|
    return ta * std::pow(l, p) * std::sin(pi * (a + p)) / pi;
  }
  if (t == 1.0) return 0.0;
  const std::complex<double> z(std::log(t - 1.0), pi);
  return ta * std::pow(std::abs(z), p) * std::sin(pi * a + p * std::arg(z)) / pi;
}

BernsteinFunction stable_log(double a, double b, std::string id) {
  if (!(a > 0.0 && a < 1.0))
    throw DomainError("stable-log: alpha must lie in the open interval (0,1)");
  if (!(b >= 0.0 && b < 1.0 - a))
    throw DomainError("stable-log: beta must lie in [0, 1 - alpha)");
  const double norm = std::pow(ln2, b);
  auto levy = LevyMeasure::from_stieltjes(
      [a, b, norm](double t) { return stable_log_weight(t, a, b) / norm; }, {1.0});
  ClosedForm cf;
  cf.phi = [a, b, norm](double x) {
    return std::isinf(x) ? x : std::pow(x, a) * std::pow(std::log1p(x), b) / norm;
  };
  return BernsteinFunction(std::move(id), 0.0, std::move(levy), cf, Certificates{true, true})
      .with_normalized_flag();
}

BernsteinFunction stable_invlog(double a, double b, std::string id) {
  if (!(a > 0.0 && a < 1.0))
    throw DomainError("stable-invlog: alpha must lie in the open interval (0,1)");
  if (!(b > 0.0 && b < a)) throw DomainError("stable-invlog: beta must lie in (0, alpha)");
  const double norm = std::pow(ln2, -b);
  auto levy = LevyMeasure::from_stieltjes(
      [a, b, norm](double t) { return stable_log_weight(t, a, -b) / norm; }, {1.0});
  ClosedForm cf;
  cf.phi = [a, b, norm](double x) {
    return std::isinf(x) ? x : std::pow(x, a) * std::pow(std::log1p(x), -b) / norm;
  };
  return BernsteinFunction(std::move(id), 0.0, std::move(levy), cf, Certificates{true, true})
      .with_normalized_flag();
}

BernsteinFunction rational(double a, std::string id) {
  if (!(a > 0.0 && a < 1.0))
    throw DomainError("rational: alpha must lie in the open interval (0,1)");
  const double k = std::pow(2.0, a);
  const double ga = std::tgamma(a);
  // rho(y) = 2^a e^{-y} y^{a-2} (y + 1 - a) / Gamma(a)
  auto levy = LevyMeasure::from_density([a, k, ga](double y) {
    return k * std::exp(-y) * std::pow(y, a - 2.0) * (y + 1.0 - a) / ga;
  });
  // c(m) = Gamma(m + a - 1) (m + 1 - a) / (Gamma(a) m! 2^m)
  auto pmf = [a, ga](std::size_t m) {
    const double md = static_cast<double>(m);
    const double ratio = boost::math::tgamma_delta_ratio(md + a - 1.0, 2.0 - a);
    return std::ldexp(ratio * (md + 1.0 - a) / ga,
                      -static_cast<int>(std::min<std::size_t>(m, 2000)));
  };
  ClosedForm cf;
  cf.phi = [a, k](double x) { return std::isinf(x) ? x : k * x * std::pow(1.0 + x, -a); };
  cf.step_pmf = pmf;
  cf.step_tail = [pmf](std::size_t m) { return geometric_tail(pmf, m); };
  return BernsteinFunction(std::move(id), 0.0, std::move(levy), cf, Certificates{true, false})
      .with_normalized_flag();
}

BernsteinFunction nonconcave() {
  ClosedForm cf;
  cf.phi = [](double x) { return x * x; };
  return BernsteinFunction("nonconcave", 0.0, LevyMeasure{}, cf, Certificates{})
      .with_normalized_flag();
}

}  // namespace

BernsteinFunction make(std::string_view id) {
  const auto parts = split(id, ':');
  const std::string_view family = parts.front();
  const std::string name(id);

  if (family == "identity") {
    expect_arity(parts, 1, id, "'identity'");
    return identity();
  }
  if (family == "log2") {
    expect_arity(parts, 1, id, "'log2'");
    return log2_family();
  }
  if (family == "nonconcave") {
    expect_arity(parts, 1, id, "'nonconcave'");
    return nonconcave();
  }
  if (family == "stable") {
    expect_arity(parts, 2, id, "'stable:<alpha>'");
    return stable(parse_number(parts[1], id), name);
  }
  if (family == "rational") {
    expect_arity(parts, 2, id, "'rational:<alpha>'");
    return rational(parse_number(parts[1], id), name);
  }
  if (family == "stable-log") {
    expect_arity(parts, 3, id, "'stable-log:<alpha>:<beta>'");
    return stable_log(parse_number(parts[1], id), parse_number(parts[2], id), name);
  }
  if (family == "stable-invlog") {
    expect_arity(parts, 3, id, "'stable-invlog:<alpha>:<beta>'");
    return stable_invlog(parse_number(parts[1], id), parse_number(parts[2], id), name);
  }
  throw DomainError("unknown Bernstein function id '" + name +
                    "' (known: identity, stable:a, log2, stable-log:a:b, stable-invlog:a:b, "
                    "rational:a)");
}

std::vector<std::string> standard_ids() {
  return {"identity",          "stable:0.25",          "stable:0.5", "stable:0.75", "log2",
          "stable-log:0.5:0.25", "stable-invlog:0.5:0.25", "rational:0.5"};
}

std::vector<std::string> levy_ids() {
  auto ids = standard_ids();
  ids.erase(ids.begin());
  return ids;
}

}  // namespace subord::catalog
