#pragma once

// Damped Newton for the discrete Euler-Lagrange system g(u) = 0 with
// g = eps L u - h^2 f(u), plus seeded multistart search with deduplication.
//
// The merit function is ||g||_2. Newton directions come from CG on the
// Hessian; when CG reports indefiniteness (solutions of interest are often
// saddles) the step falls back to MINRES and finally to a preconditioned
// gradient-descent step on the energy. Convergence:
//     ||g||_2 <= tol * h * max(1, ||f(u)||_2).

#include <cstdint>
#include <string>
#include <vector>

#include "core/operators.hpp"

namespace plab {

struct SolveOptions {
  double tol = 1e-8;
  int maxit = 80;
  int linear_maxit = 0;  // 0: pick from problem size
  bool compute_stability = true;
  double stability_tol = 1e-8;
  int stability_maxit = 1200;
};

struct SolveReport {
  Field u;
  bool converged = false;
  int iterations = 0;
  double residual_norm = 0.0;   // ||g||_2 at exit
  double residual_scale = 1.0;  // h * max(1, ||f(u)||_2)
  double energy = 0.0;
  bool constant = false;
  double constant_value = 0.0;  // mean(u), meaningful when constant
  double stability_index = 0.0;
  bool stability_converged = false;
  bool positive = false;  // min u > -1e-8
  double min_u = 0.0, max_u = 0.0;
  int hits = 1;  // multistart: how many starts converged to this solution
  std::string message;
};

// (max - min) <= 1e-6 * max(1, |mean|); well above solver tolerance, well
// below pattern amplitude. value receives the mean.
bool classify_constant(const Field& u, double* value);

SolveReport newton_solve(const Problem& p, const Field& initial, const SolveOptions& opt = {});

enum class StartStrategy { constants, random_fields, spikes, eigen_perturbed };

StartStrategy parse_strategy(const std::string& name);
const char* strategy_name(StartStrategy s);

// n seeded solves; converged solutions deduplicated by
// ||u - v||_2 <= 1e-5 (1 + ||u||_2) and sorted by (energy, ||u||_2); failed
// starts are appended after the distinct solutions. Deterministic per seed.
std::vector<SolveReport> multistart(const Problem& p, StartStrategy strategy, int n,
                                    std::uint64_t seed, const SolveOptions& opt = {});

}  // namespace plab
