#include "core/operators.hpp"

#include <cmath>

#include "core/errors.hpp"
#include "core/summation.hpp"

namespace plab {

namespace {

void check_field(const Mask& mask, const Field& u, const char* what) {
  if (u.size() != static_cast<std::size_t>(mask.cell_count()))
    throw InvalidArgument(std::string(what) + ": field length does not match the mask's active cell count");
}

}  // namespace

Problem::Problem(const Mask& m, Nonlinearity f, double eps)
    : mask(&m), nonlin(std::move(f)), epsilon(eps) {
  if (!(eps > 0.0)) throw InvalidArgument("problem: diffusion epsilon must be positive");
}

Field constant_field(const Mask& mask, double value) {
  return Field(static_cast<std::size_t>(mask.cell_count()), value);
}

void laplacian_apply(const Mask& mask, const Field& u, Field& out) {
  check_field(mask, u, "laplacian");
  out.assign(u.size(), 0.0);
  for (const Face& f : mask.faces()) {
    double d = u[f.a] - u[f.b];
    out[f.a] += d;
    out[f.b] -= d;
  }
}

Field laplacian_apply(const Mask& mask, const Field& u) {
  Field out;
  laplacian_apply(mask, u, out);
  return out;
}

double dirichlet_sum(const Mask& mask, const Field& u) {
  check_field(mask, u, "dirichlet_sum");
  CompensatedSum s;
  for (const Face& f : mask.faces()) {
    double d = u[f.a] - u[f.b];
    s.add(d * d);
  }
  return s.value();
}

double energy(const Problem& p, const Field& u) {
  const Mask& mask = *p.mask;
  check_field(mask, u, "energy");
  double h2 = mask.spacing() * mask.spacing();
  CompensatedSum bulk;
  for (double v : u) bulk.add(p.nonlin.antiderivative(v));
  return 0.5 * p.epsilon * dirichlet_sum(mask, u) - h2 * bulk.value();
}

void gradient(const Problem& p, const Field& u, Field& out) {
  const Mask& mask = *p.mask;
  check_field(mask, u, "gradient");
  laplacian_apply(mask, u, out);
  double h2 = mask.spacing() * mask.spacing();
  for (std::size_t c = 0; c < u.size(); ++c)
    out[c] = p.epsilon * out[c] - h2 * p.nonlin.f(u[c]);
}

Field gradient(const Problem& p, const Field& u) {
  Field out;
  gradient(p, u, out);
  return out;
}

void hessian_apply(const Problem& p, const Field& u, const Field& v, Field& out) {
  const Mask& mask = *p.mask;
  check_field(mask, u, "hessian");
  check_field(mask, v, "hessian");
  laplacian_apply(mask, v, out);
  double h2 = mask.spacing() * mask.spacing();
  for (std::size_t c = 0; c < u.size(); ++c)
    out[c] = p.epsilon * out[c] - h2 * p.nonlin.fprime(u[c]) * v[c];
}

Field hessian_apply(const Problem& p, const Field& u, const Field& v) {
  Field out;
  hessian_apply(p, u, v, out);
  return out;
}

double integrate(const Mask& mask, const Field& u, const std::function<double(double)>& g) {
  check_field(mask, u, "integrate");
  CompensatedSum s;
  for (double v : u) s.add(g(v));
  return mask.spacing() * mask.spacing() * s.value();
}

std::vector<double> hessian_diag(const Problem& p, const Field& u) {
  const Mask& mask = *p.mask;
  check_field(mask, u, "hessian_diag");
  double h2 = mask.spacing() * mask.spacing();
  std::vector<double> d(u.size());
  for (std::size_t c = 0; c < u.size(); ++c)
    d[c] = p.epsilon * mask.degree()[c] - h2 * p.nonlin.fprime(u[c]);
  return d;
}

double dot(const Field& a, const Field& b) {
  if (a.size() != b.size()) throw InvalidArgument("dot: length mismatch");
  return compensated_dot(a, b);
}

double norm2(const Field& a) { return std::sqrt(compensated_dot(a, a)); }

double mean(const Field& a) {
  if (a.empty()) return 0.0;
  CompensatedSum s;
  for (double v : a) s.add(v);
  return s.value() / static_cast<double>(a.size());
}

}  // namespace plab
