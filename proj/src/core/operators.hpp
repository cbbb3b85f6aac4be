#pragma once

// Structure-preserving finite-volume discretization of
//     -eps Lap(u) = f(u) in Omega,  du/dnu = 0 on the boundary.
//
// The graph Laplacian over active faces, (Lu)_c = sum_{n~c} (u_c - u_n), has
// zero-flux boundaries built in: missing neighbors simply contribute nothing.
// L kills constants exactly and sum_c (Lu)_c telescopes to zero, so the
// discrete problem inherits the divergence-theorem and rigidity identities of
// the continuous one.
//
// Energy    Phi_h(u) = (eps/2) sum_faces (u_i - u_j)^2 - h^2 sum_c F(u_c)
// Gradient  g_c      = eps (Lu)_c - h^2 f(u_c)          (exact differential)
// Hessian   (Hv)_c   = eps (Lv)_c - h^2 f'(u_c) v_c

#include <functional>
#include <vector>

#include "core/mask.hpp"
#include "core/nonlinearity.hpp"

namespace plab {

// One scalar per active cell, indexed like Mask's compact cells.
using Field = std::vector<double>;

struct Problem {
  const Mask* mask = nullptr;
  Nonlinearity nonlin = Nonlinearity::cubic();
  double epsilon = 1.0;

  Problem() = default;
  Problem(const Mask& m, Nonlinearity f, double eps);
};

Field constant_field(const Mask& mask, double value);

// (Lu)_c = sum over faces of cell c of (u_c - u_n)
Field laplacian_apply(const Mask& mask, const Field& u);
void laplacian_apply(const Mask& mask, const Field& u, Field& out);

double energy(const Problem& p, const Field& u);
Field gradient(const Problem& p, const Field& u);
void gradient(const Problem& p, const Field& u, Field& out);
void hessian_apply(const Problem& p, const Field& u, const Field& v, Field& out);
Field hessian_apply(const Problem& p, const Field& u, const Field& v);

// h^2 sum_c g(u_c)
double integrate(const Mask& mask, const Field& u, const std::function<double(double)>& g);

// sum over faces of (u_i - u_j)^2, the discrete Dirichlet integral
double dirichlet_sum(const Mask& mask, const Field& u);

// diagonal of eps L - h^2 diag f'(u), cheap Jacobi data for the solvers
std::vector<double> hessian_diag(const Problem& p, const Field& u);

// compensated Euclidean helpers
double dot(const Field& a, const Field& b);
double norm2(const Field& a);
double mean(const Field& a);

}  // namespace plab
