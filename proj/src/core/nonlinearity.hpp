#pragma once

// Catalog of reaction terms f with derivative and exact antiderivative
// (F' = f, F(0) = 0), root finding for the positive zero xi, and sampled
// checkers for the structural sign conditions that decide whether patterns
// can exist.

#include <string>
#include <vector>

namespace plab {

enum class Family { exp_family, power, cubic, linear, polynomial };

struct Triple {
  double f, fp, F;
};

class Nonlinearity {
 public:
  // f(t) = e^t - 1 - (1+delta) t
  static Nonlinearity exponential(double delta);
  // f(t) = t^p - t
  static Nonlinearity power(double p);
  // f(t) = -t^3
  static Nonlinearity cubic();
  // f(t) = mu t
  static Nonlinearity linear(double mu);
  // f(t) = sum_k coeffs[k] t^k
  static Nonlinearity polynomial(std::vector<double> coeffs);

  // "exp:delta=1", "power:p=3", "cubic", "linear:mu=-1", "poly:c0,c1,..."
  static Nonlinearity parse(const std::string& text);

  Triple eval(double t) const;  // throws SaturationError past the exp guard
  double f(double t) const { return eval(t).f; }
  double fprime(double t) const { return eval(t).fp; }
  double antiderivative(double t) const { return eval(t).F; }

  Family family() const { return family_; }
  double delta() const { return delta_; }
  double exponent() const { return p_; }
  double slope() const { return mu_; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  std::string describe() const;

  // Constant solutions we know in closed form, used to seed start strategies.
  // exp: {0, xi} (xi only when delta > 0); power: {0, 1}; cubic/linear: {0}.
  std::vector<double> known_roots() const;

 private:
  Nonlinearity() = default;
  Family family_ = Family::cubic;
  double delta_ = 0.0, p_ = 2.0, mu_ = 1.0;
  std::vector<double> coeffs_;
};

// Unique positive root of f. Bracketing bisection then Newton polish;
// |f(xi)| <= 1e-12 * max(1, e^xi). Throws InvalidArgument when the family has
// no positive root (exp with delta <= 0, cubic, linear).
double find_positive_root(const Nonlinearity& spec);

// Energy density of the constant solution xi for the exp family:
// K_xi = (1+delta)/2 xi^2 - (e^xi - 1 - xi). Strictly positive for delta > 0.
double k_xi(double delta);
// Equivalent closed form (e^x/2) x - e^x + 1 + x/2 evaluated at x = xi,
// kept separate as an algebraic cross-check of k_xi.
double k_xi_identity_form(double xi);

// Sampled check of f(t)(t - xi) <= 0 on [lo, hi] (n uniform points). A
// heuristic, not a proof: reports the worst sample.
struct ConditionReport {
  bool holds;
  double worst_t;
  double worst_value;
  double lo, hi;
  int n;
};
ConditionReport check_rigidity_condition(const Nonlinearity& spec, double xi, double lo, double hi,
                                         int n);

// Sampled check that f does not change sign on [lo, hi]. sign is +1, -1, or 0
// (identically ~0 on the samples); holds is false when both signs appear.
struct SignReport {
  bool holds;
  int sign;
  double min_value, max_value;
  double lo, hi;
  int n;
};
SignReport check_fixed_sign(const Nonlinearity& spec, double lo, double hi, int n);

}  // namespace plab
