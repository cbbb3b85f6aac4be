#include "core/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "core/errors.hpp"

namespace plab {

namespace {

// exp guard: fields never legitimately reach t = 700; past it we refuse to
// evaluate rather than hand back inf.
constexpr double kExpGuard = 700.0;

double checked_exp(double t) {
  if (t > kExpGuard) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "nonlinearity: e^t saturates at t = %.6g (guard 700)", t);
    throw SaturationError(buf);
  }
  return std::exp(t);
}

bool is_integer(double p) { return std::abs(p - std::round(p)) < 1e-12; }

double parse_num(const std::string& s, const std::string& ctx) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument("nonlinearity spec: cannot parse number '" + s + "' in '" + ctx + "'");
  }
}

}  // namespace

Nonlinearity Nonlinearity::exponential(double delta) {
  Nonlinearity n;
  n.family_ = Family::exp_family;
  n.delta_ = delta;
  return n;
}

Nonlinearity Nonlinearity::power(double p) {
  if (!(p > 1.0)) throw InvalidArgument("nonlinearity: power family needs p > 1");
  Nonlinearity n;
  n.family_ = Family::power;
  n.p_ = p;
  return n;
}

Nonlinearity Nonlinearity::cubic() {
  Nonlinearity n;
  n.family_ = Family::cubic;
  return n;
}

Nonlinearity Nonlinearity::linear(double mu) {
  Nonlinearity n;
  n.family_ = Family::linear;
  n.mu_ = mu;
  return n;
}

Nonlinearity Nonlinearity::polynomial(std::vector<double> coeffs) {
  if (coeffs.empty()) throw InvalidArgument("nonlinearity: polynomial needs at least one coefficient");
  Nonlinearity n;
  n.family_ = Family::polynomial;
  n.coeffs_ = std::move(coeffs);
  return n;
}

Nonlinearity Nonlinearity::parse(const std::string& text) {
  std::string name = text, body;
  if (auto colon = text.find(':'); colon != std::string::npos) {
    name = text.substr(0, colon);
    body = text.substr(colon + 1);
  }
  auto want_kv = [&](const std::string& key) -> double {
    auto eq = body.find('=');
    if (eq == std::string::npos || body.substr(0, eq) != key)
      throw InvalidArgument("nonlinearity spec: expected '" + name + ":" + key + "=VALUE', got '" + text + "'");
    return parse_num(body.substr(eq + 1), text);
  };
  if (name == "exp") return exponential(want_kv("delta"));
  if (name == "power") return power(want_kv("p"));
  if (name == "cubic") {
    if (!body.empty()) throw InvalidArgument("nonlinearity spec: cubic takes no parameters");
    return cubic();
  }
  if (name == "linear") return linear(want_kv("mu"));
  if (name == "poly") {
    std::vector<double> coeffs;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) coeffs.push_back(parse_num(item, text));
    return polynomial(std::move(coeffs));
  }
  throw InvalidArgument("nonlinearity spec: unknown family '" + name + "'");
}

Triple Nonlinearity::eval(double t) const {
  if (!std::isfinite(t)) throw InvalidArgument("nonlinearity: non-finite argument");
  switch (family_) {
    case Family::exp_family: {
      double a = 1.0 + delta_;
      double et = checked_exp(t);
      return {et - 1.0 - a * t, et - a, et - 1.0 - t - 0.5 * a * t * t};
    }
    case Family::power: {
      if (t < 0.0 && !is_integer(p_))
        throw InvalidArgument("nonlinearity: t^p undefined for t < 0 with non-integer p");
      double tp, tpm1;
      if (is_integer(p_)) {
        double ip = std::round(p_);
        tp = std::pow(std::abs(t), ip);
        if (t < 0 && std::fmod(ip, 2.0) != 0.0) tp = -tp;
        tpm1 = (t == 0.0) ? 0.0 : tp / t;
        if (t == 0.0 && ip == 1.0) tpm1 = 1.0;
      } else {
        tp = std::pow(t, p_);
        tpm1 = (t == 0.0) ? 0.0 : std::pow(t, p_ - 1.0);
      }
      return {tp - t, p_ * tpm1 - 1.0, tp * t / (p_ + 1.0) - 0.5 * t * t};
    }
    case Family::cubic:
      return {-t * t * t, -3.0 * t * t, -0.25 * t * t * t * t};
    case Family::linear:
      return {mu_ * t, mu_, 0.5 * mu_ * t * t};
    case Family::polynomial: {
      double f = 0.0, fp = 0.0, F = 0.0;
      for (std::size_t k = coeffs_.size(); k-- > 0;) {
        f = f * t + coeffs_[k];
        if (k > 0) fp = fp * t + static_cast<double>(k) * coeffs_[k];
      }
      for (std::size_t k = coeffs_.size(); k-- > 0;) F = F * t + coeffs_[k] / static_cast<double>(k + 1);
      F *= t;
      return {f, fp, F};
    }
  }
  throw InvalidArgument("nonlinearity: bad family");
}

std::string Nonlinearity::describe() const {
  char buf[96];
  switch (family_) {
    case Family::exp_family:
      std::snprintf(buf, sizeof buf, "exp:delta=%g", delta_);
      return buf;
    case Family::power:
      std::snprintf(buf, sizeof buf, "power:p=%g", p_);
      return buf;
    case Family::cubic:
      return "cubic";
    case Family::linear:
      std::snprintf(buf, sizeof buf, "linear:mu=%g", mu_);
      return buf;
    case Family::polynomial: {
      std::string s = "poly:";
      for (std::size_t k = 0; k < coeffs_.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%s%g", k ? "," : "", coeffs_[k]);
        s += buf;
      }
      return s;
    }
  }
  return "?";
}

std::vector<double> Nonlinearity::known_roots() const {
  switch (family_) {
    case Family::exp_family:
      if (delta_ > 0.0) return {0.0, find_positive_root(*this)};
      return {0.0};
    case Family::power:
      return {0.0, 1.0};
    case Family::cubic:
    case Family::linear:
      return {0.0};
    case Family::polynomial:
      if (!coeffs_.empty() && coeffs_[0] == 0.0) return {0.0};
      return {};
  }
  return {};
}

double find_positive_root(const Nonlinearity& spec) {
  if (spec.family() == Family::power) return 1.0;
  if (spec.family() != Family::exp_family)
    throw InvalidArgument("find_positive_root: only exp and power families have a catalogued positive root");
  double delta = spec.delta();
  if (!(delta > 0.0))
    throw InvalidArgument("find_positive_root: exp family has no positive root for delta <= 0 (f >= 0 on t >= 0)");

  auto f = [&](double t) { return spec.f(t); };
  double lo = 1e-6, hi = 10.0 + 10.0 * delta;
  // f < 0 just right of 0 (f ~ -delta t), f > 0 for large t
  while (f(lo) > 0.0) lo *= 0.5;
  while (f(hi) < 0.0) hi *= 1.5;
  for (int it = 0; it < 200 && (hi - lo) > 1e-15 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  double xi = 0.5 * (lo + hi);
  for (int it = 0; it < 8; ++it) {
    Triple e = spec.eval(xi);
    if (e.fp == 0.0) break;
    double step = e.f / e.fp;
    double next = xi - step;
    if (!(next > 0.0)) break;
    xi = next;
    if (std::abs(step) < 1e-16 * xi) break;
  }
  if (!(std::abs(spec.f(xi)) <= 1e-12 * std::max(1.0, std::exp(xi))))
    throw NoConvergence("find_positive_root: bisection failed to meet tolerance");
  return xi;
}

double k_xi_identity_form(double xi) {
  double e = std::exp(xi);
  return 0.5 * e * xi - e + 1.0 + 0.5 * xi;
}

double k_xi(double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("k_xi: needs delta > 0");
  double xi = find_positive_root(Nonlinearity::exponential(delta));
  return 0.5 * (1.0 + delta) * xi * xi - (std::exp(xi) - 1.0 - xi);
}

ConditionReport check_rigidity_condition(const Nonlinearity& spec, double xi, double lo, double hi,
                                         int n) {
  if (!(lo < hi)) throw InvalidArgument("check_rigidity_condition: needs lo < hi");
  if (n < 100) throw InvalidArgument("check_rigidity_condition: needs n >= 100 samples");
  double worst_t = lo, worst = -std::numeric_limits<double>::infinity();
  double scale = 0.0;
  for (int i = 0; i < n; ++i) {
    double t = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    double v = spec.f(t) * (t - xi);
    scale = std::max(scale, std::abs(v));
    if (v > worst) {
      worst = v;
      worst_t = t;
    }
  }
  return {worst <= 1e-12 * std::max(1.0, scale), worst_t, worst, lo, hi, n};
}

SignReport check_fixed_sign(const Nonlinearity& spec, double lo, double hi, int n) {
  if (!(lo < hi)) throw InvalidArgument("check_fixed_sign: needs lo < hi");
  if (n < 100) throw InvalidArgument("check_fixed_sign: needs n >= 100 samples");
  double vmin = std::numeric_limits<double>::infinity();
  double vmax = -vmin;
  double scale = 0.0;
  for (int i = 0; i < n; ++i) {
    double t = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    double v = spec.f(t);
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
    scale = std::max(scale, std::abs(v));
  }
  double tol = 1e-12 * std::max(1.0, scale);
  bool nonneg = vmin >= -tol, nonpos = vmax <= tol;
  int sign = nonneg && nonpos ? 0 : nonneg ? 1 : nonpos ? -1 : 0;
  return {nonneg || nonpos, sign, vmin, vmax, lo, hi, n};
}

}  // namespace plab
