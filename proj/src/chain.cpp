#include "subord/chain.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "subord/csv.hpp"
#include "subord/error.hpp"

namespace subord {
namespace {

constexpr double kRowTol = 1e-12;

double parse_number(std::string_view text, const char* what) {
  std::string s(text);
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty())
    throw DomainError(std::string(what) + ": '" + s + "' is not a number");
  return v;
}

std::vector<std::string_view> fields(std::string_view id, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = id.find(sep, start);
    out.push_back(id.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::size_t parse_count(std::string_view text, const char* what) {
  const double v = parse_number(text, what);
  if (!(v >= 0) || v != std::floor(v) || v > 1e7)
    throw DomainError(std::string(what) + ": '" + std::string(text) +
                      "' is not a nonnegative integer");
  return static_cast<std::size_t>(v);
}

// Reachability from `from` along positive entries, forwards or backwards.
std::vector<char> reach(const FiniteChain& c, std::size_t from, bool backwards) {
  const std::size_t k = c.size();
  std::vector<char> seen(k, 0);
  std::vector<std::size_t> stack{from};
  seen[from] = 1;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    for (std::size_t j = 0; j < k; ++j) {
      const double p = backwards ? c(j, i) : c(i, j);
      if (p > 0 && !seen[j]) {
        seen[j] = 1;
        stack.push_back(j);
      }
    }
  }
  return seen;
}

double l1_change(const FiniteChain& c, const Distribution& pi) {
  const Distribution next = c.step(pi);
  double s = 0;
  for (std::size_t i = 0; i < pi.size(); ++i) s += std::abs(next[i] - pi[i]);
  return s;
}

// Power iteration; returns false if the target is not met in `limit` steps.
bool power_iterate(const FiniteChain& c, Distribution& pi, double target, std::size_t limit) {
  for (std::size_t it = 0; it < limit; ++it) {
    Distribution next = c.step(pi);
    const double total = std::accumulate(next.begin(), next.end(), 0.0);
    for (double& v : next) v /= total;
    double change = 0;
    for (std::size_t i = 0; i < pi.size(); ++i) change += std::abs(next[i] - pi[i]);
    pi = std::move(next);
    if (change <= target) return true;
  }
  return false;
}

}  // namespace

FiniteChain::FiniteChain(std::vector<double> kernel, std::size_t states, std::vector<double> f,
                         std::string label)
    : k_(states), p_(std::move(kernel)), f_(std::move(f)), label_(std::move(label)) {
  if (k_ == 0) throw DomainError("chain: needs at least one state");
  if (p_.size() != k_ * k_)
    throw DomainError("chain: kernel has " + std::to_string(p_.size()) + " entries, expected " +
                      std::to_string(k_ * k_));
  for (std::size_t i = 0; i < k_; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < k_; ++j) {
      const double v = p_[i * k_ + j];
      if (!(v >= 0.0) || !std::isfinite(v))
        throw DomainError("chain: entry (" + std::to_string(i) + "," + std::to_string(j) +
                          ") is negative or not finite");
      s += v;
    }
    if (std::abs(s - 1.0) > kRowTol)
      throw DomainError("chain: row " + std::to_string(i) + " sums to " + std::to_string(s) +
                        ", not 1");
  }
  if (f_.empty()) f_.assign(k_, 1.0);
  if (f_.size() != k_) throw DomainError("chain: f needs one value per state");
  for (double v : f_)
    if (!(v >= 1.0) || !std::isfinite(v)) throw DomainError("chain: f must be >= 1 everywhere");
}

double FiniteChain::max_f() const noexcept { return *std::max_element(f_.begin(), f_.end()); }

FiniteChain FiniteChain::with_f(std::vector<double> f) const {
  return FiniteChain(p_, k_, std::move(f), label_);
}

Distribution FiniteChain::step(std::span<const double> mu) const {
  Distribution out(k_, 0.0);
  for (std::size_t i = 0; i < k_; ++i) {
    const double m = mu[i];
    if (m == 0.0) continue;
    const double* r = p_.data() + i * k_;
    for (std::size_t j = 0; j < k_; ++j) out[j] += m * r[j];
  }
  return out;
}

bool irreducible(const FiniteChain& chain) {
  const auto fwd = reach(chain, 0, false);
  const auto bwd = reach(chain, 0, true);
  return std::all_of(fwd.begin(), fwd.end(), [](char c) { return c; }) &&
         std::all_of(bwd.begin(), bwd.end(), [](char c) { return c; });
}

Distribution stationary(const FiniteChain& chain) {
  if (!irreducible(chain))
    throw ReducibleChainError("stationary: chain '" + chain.label() +
                              "' is reducible, so its invariant distribution is not unique");
  const std::size_t k = chain.size();
  const double target = 1e-13;
  const std::size_t limit = 200000;
  Distribution pi(k, 1.0 / static_cast<double>(k));
  if (!power_iterate(chain, pi, target, limit)) {
    // Periodic chains oscillate; the lazy kernel has the same invariant law.
    std::vector<double> lazy(chain.kernel().begin(), chain.kernel().end());
    for (double& v : lazy) v *= 0.5;
    for (std::size_t i = 0; i < k; ++i) lazy[i * k + i] += 0.5;
    const FiniteChain half(std::move(lazy), k, {}, chain.label());
    pi.assign(k, 1.0 / static_cast<double>(k));
    power_iterate(half, pi, target, limit);
  }
  const double err = l1_change(chain, pi);
  if (!(err <= 1e-12))
    throw NumericError("stationary: |pi P - pi|_1 = " + std::to_string(err) +
                       " after power iteration on '" + chain.label() + "'");
  return pi;
}

Distribution n_step(const FiniteChain& chain, std::size_t x, std::size_t n) {
  if (x >= chain.size()) throw DomainError("n_step: state out of range");
  Distribution mu(chain.size(), 0.0);
  mu[x] = 1.0;
  for (std::size_t i = 0; i < n; ++i) mu = chain.step(mu);
  return mu;
}

SubordinatedDistribution subordinate(const FiniteChain& chain, std::size_t x,
                                     const SubordinatorLaw& law) {
  SubordinatedDistribution out;
  out.x = x;
  out.n = law.n;
  out.residual = law.residual;
  out.weights.assign(chain.size(), 0.0);
  Distribution power = n_step(chain, x, law.n);
  for (std::size_t k = 0; k < law.pmf.size(); ++k) {
    if (k > 0) power = chain.step(power);
    const double p = law.pmf[k];
    if (p == 0.0) continue;
    for (std::size_t y = 0; y < chain.size(); ++y) out.weights[y] += p * power[y];
  }
  return out;
}

double f_norm(std::span<const double> mu, std::span<const double> f) {
  if (mu.size() != f.size()) throw DomainError("f_norm: measure and f differ in length");
  double s = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) s += f[i] * std::abs(mu[i]);
  return s;
}

double tv_norm(std::span<const double> mu) {
  double s = 0;
  for (double v : mu) s += std::abs(v);
  return s;
}

double invariance_check(const FiniteChain& chain, const SubordinatorLaw& law) {
  const Distribution pi = stationary(chain);
  // By linearity sum_x pi(x) P_phi^n(x, .) = sum_m P(T_n = m) pi P^m.
  Distribution power = pi;
  for (std::size_t i = 0; i < law.n; ++i) power = chain.step(power);
  Distribution mix(chain.size(), 0.0);
  for (std::size_t k = 0; k < law.pmf.size(); ++k) {
    if (k > 0) power = chain.step(power);
    for (std::size_t y = 0; y < chain.size(); ++y) mix[y] += law.pmf[k] * power[y];
  }
  for (std::size_t y = 0; y < chain.size(); ++y) mix[y] -= pi[y];
  return tv_norm(mix);
}

FiniteChain backward_recurrence_chain(double kappa, std::size_t K) {
  if (!(kappa > 1.0) || !std::isfinite(kappa))
    throw DomainError("backward recurrence chain: kappa must be > 1");
  if (K < 1) throw DomainError("backward recurrence chain: K must be >= 1");
  const std::size_t k = K + 1;
  std::vector<double> p(k * k, 0.0);
  for (std::size_t j = 0; j < K; ++j) {
    const double up = std::pow((1.0 + j) / (2.0 + j), kappa);  // h(j+1)/h(j)
    p[j * k + j + 1] = up;
    p[j * k] = 1.0 - up;
  }
  p[K * k] = 1.0;
  std::ostringstream label;
  label << "backward(kappa=" << kappa << ",K=" << K << ")";
  return FiniteChain(std::move(p), k, {}, label.str());
}

FiniteChain two_state_chain(double a, double b) {
  if (!(a >= 0.0 && a <= 1.0) || !(b >= 0.0 && b <= 1.0))
    throw DomainError("two-state chain: transition probabilities must lie in [0, 1]");
  std::ostringstream label;
  label << "two-state(" << a << "," << b << ")";
  return FiniteChain({1.0 - a, a, b, 1.0 - b}, 2, {}, label.str());
}

FiniteChain make_chain(std::string_view id) {
  const auto f = fields(id, ':');
  const std::string_view name = f[0];
  if (name == "two-state") {
    if (f.size() == 1) return two_state_chain(0.1, 0.2);
    if (f.size() == 3)
      return two_state_chain(parse_number(f[1], "two-state a"), parse_number(f[2], "two-state b"));
  } else if (name == "backward") {
    if (f.size() == 1) return backward_recurrence_chain(2.5, 50);
    if (f.size() == 3)
      return backward_recurrence_chain(parse_number(f[1], "backward kappa"),
                                       parse_count(f[2], "backward K"));
  } else if (name == "lazy-cycle" && f.size() == 2) {
    const std::size_t k = parse_count(f[1], "lazy-cycle K");
    if (k < 2) throw DomainError("lazy-cycle: K must be >= 2");
    std::vector<double> p(k * k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      p[j * k + j] += 0.5;
      p[j * k + (j + 1) % k] += 0.5;
    }
    return FiniteChain(std::move(p), k, {}, "lazy-cycle(" + std::to_string(k) + ")");
  } else {
    throw DomainError("unknown chain id '" + std::string(id) +
                      "' (expected two-state, backward or lazy-cycle)");
  }
  throw DomainError("chain id '" + std::string(id) + "' has the wrong number of parameters");
}

std::vector<double> control_function(std::string_view spec, std::size_t states) {
  std::vector<double> f(states, 1.0);
  if (spec.empty() || spec == "1" || spec == "one") return f;
  if (spec == "linear") {
    for (std::size_t j = 0; j < states; ++j) f[j] = 1.0 + static_cast<double>(j);
    return f;
  }
  if (spec.substr(0, 6) == "power:") {
    const double p = parse_number(spec.substr(6), "f power");
    if (!(p >= 0.0)) throw DomainError("f power must be >= 0");
    for (std::size_t j = 0; j < states; ++j) f[j] = std::pow(1.0 + static_cast<double>(j), p);
    return f;
  }
  const auto parts = fields(spec, ',');
  if (parts.size() != states)
    throw DomainError("f list has " + std::to_string(parts.size()) + " values for " +
                      std::to_string(states) + " states");
  for (std::size_t j = 0; j < states; ++j) {
    f[j] = parse_number(parts[j], "f value");
    if (!(f[j] >= 1.0)) throw DomainError("f must be >= 1 everywhere");
  }
  return f;
}

void write_chain_csv(const std::string& path, const FiniteChain& chain) {
  csv::Table t;
  t.add_meta("label", chain.label());
  t.add_meta("K", std::to_string(chain.size() - 1));
  std::string fs;
  for (std::size_t j = 0; j < chain.size(); ++j) fs += (j ? "," : "") + csv::number(chain.f()[j]);
  t.add_meta("f", fs);
  for (std::size_t j = 0; j < chain.size(); ++j) t.columns.push_back("p" + std::to_string(j));
  for (std::size_t i = 0; i < chain.size(); ++i) {
    std::vector<std::string> row;
    for (double v : chain.row(i)) row.push_back(csv::number(v));
    t.rows.push_back(std::move(row));
  }
  csv::write(path, t);
}

FiniteChain read_chain_csv(const std::string& path) {
  const csv::Table t = csv::read(path);
  const std::string k_text = t.meta_value("K");
  if (k_text.empty()) throw DomainError("chain CSV " + path + ": missing '# K:' line");
  const std::size_t k = parse_count(k_text, "chain CSV K") + 1;
  if (t.rows.size() != k) throw DomainError("chain CSV " + path + ": expected K+1 kernel rows");
  std::vector<double> p;
  for (const auto& row : t.rows) {
    if (row.size() != k) throw DomainError("chain CSV " + path + ": ragged kernel row");
    for (const auto& cell : row) p.push_back(parse_number(cell, "chain CSV entry"));
  }
  const std::string f_text = t.meta_value("f");
  std::string label = t.meta_value("label");
  if (label.empty()) label = path;
  return FiniteChain(std::move(p), k, control_function(f_text, k), label);
}

}  // namespace subord
