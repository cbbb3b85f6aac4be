#pragma once

// Matrix-free symmetric linear algebra: preconditioned CG and MINRES solves,
// and extremal eigenpairs of the operators assembled by the variational core.
//
// Eigenpairs: operators below a size threshold are assembled and diagonalized
// directly (cyclic Jacobi). Above it, positive-semidefinite operators with a
// constant kernel (Neumann Laplacians) use inverse subspace iteration with
// mean-zero-projected CG; general symmetric operators (linearizations at a
// solution, possibly indefinite) use block LOBPCG with Jacobi preconditioning.

#include <cstdint>
#include <functional>
#include <vector>

#include "core/operators.hpp"

namespace plab {

struct LinearOperator {
  int n = 0;
  std::function<void(const double* x, double* y)> apply;  // y = A x, A symmetric
  bool psd_constant_kernel = false;  // A >= 0 and A*(constant) = 0
  std::vector<double> jacobi;        // diagonal of A when cheaply available
  double norm_hint = 0.0;            // upper bound on ||A||_2 when known

  void operator()(const Field& x, Field& y) const {
    y.resize(x.size());
    apply(x.data(), y.data());
  }
};

LinearOperator make_laplacian_operator(const Mask& mask);
// eps L - h^2 diag f'(u), the second variation at u
LinearOperator make_hessian_operator(const Problem& p, const Field& u);
// (eps L - h^2 diag f'(u)) / h^2, the grid-independent stability operator
LinearOperator make_stability_operator(const Problem& p, const Field& u);

void project_mean_zero(Field& v);

struct CgResult {
  Field x;
  double relative_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool indefinite = false;  // encountered nonpositive curvature and stopped
};

// Solve A x = rhs with preconditioned CG; ||A x - rhs|| <= tol * ||rhs||.
// With project_mean_zero set, A must map mean-zero to mean-zero (constant
// kernel) and rhs must have zero mean; every iterate stays mean-zero.
CgResult cg_solve(const LinearOperator& op, const Field& rhs, double tol, int maxit,
                  bool project_mean_zero);

struct MinresResult {
  Field x;
  double relative_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Symmetric (possibly indefinite) solve, Jacobi(|diag|) preconditioned.
MinresResult minres_solve(const LinearOperator& op, const Field& rhs, double tol, int maxit);

struct EigenPair {
  double value;
  Field vector;
};

struct EigenOptions {
  int k = 1;
  double tol = 1e-8;
  int maxit = 600;
  int densify_threshold = 160;  // assemble + Jacobi-diagonalize below this n
  int block_extra = 2;          // guard vectors beyond k
  std::vector<Field> initial;   // optional starting subspace
  std::uint64_t seed = 0x5eedULL;
};

struct EigenResult {
  std::vector<EigenPair> pairs;     // ascending eigenvalues
  std::vector<double> residuals;    // ||A v - theta v|| per pair
  double op_norm_estimate = 0.0;
  int iterations = 0;
  bool converged = false;
};

EigenResult smallest_eigenpairs(const LinearOperator& op, const EigenOptions& opt);

// Cyclic Jacobi diagonalization of a dense symmetric matrix (row-major n*n).
// values ascending; vectors[j*n + i] is component i of eigenvector j.
void dense_symmetric_eig(std::vector<double> a, int n, std::vector<double>& values,
                         std::vector<double>& vectors);

}  // namespace plab
