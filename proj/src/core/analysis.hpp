#pragma once

// Spectral and rigidity diagnostics: the first nonzero Neumann eigenvalue,
// stability indices, the discrete rigidity identity, analytic constants of
// the existence construction, and epsilon sweeps.

#include <cstdint>
#include <string>
#include <vector>

#include "core/linear.hpp"
#include "core/mountain.hpp"
#include "core/newton.hpp"

namespace plab {

struct SpectralReport {
  double lambda1 = 0.0;  // 0 up to roundoff (constant mode)
  double lambda2 = 0.0;  // first nonzero eigenvalue of L/h^2
  Field eigenvector2;
  bool converged = false;
  int iterations = 0;
};

// On eigenvalue clusters (square domains are exactly degenerate) the reported
// eigenvector is the cluster representative best aligned with the x moment,
// a deterministic convention.
SpectralReport neumann_lambda2(const Mask& mask, double tol = 1e-8, int maxit = 400);

// smallest eigenvalue of (eps L - h^2 diag f'(u)) / h^2; >= 0 means stable
double stability_index(const Problem& p, const Field& u, double tol = 1e-8,
                       bool* converged = nullptr);

struct RigidityReport {
  double dirichlet_term;  // sum_faces (u_i - u_j)^2
  double pairing_term;    // (h^2/eps) sum f(u_c)(u_c - xi)
  double gap;             // dirichlet - pairing; ~0 at any solution
};
RigidityReport rigidity_check(const Problem& p, const Field& u, double xi);

struct AnalyticConstants {
  double delta;
  double xi;          // positive root of e^t - 1 - (1+delta) t
  double k_xi;        // energy density of the constant solution xi
  double f_prime_xi;  // e^xi - (1+delta) > 0
  double A;           // pi/2 (1 + delta/6)
  double B;           // 2 pi
  double x_star;      // 80 A / B, argmax of the cubic cap
  double C2;          // 6400 A^3 / (3 B^2), max of the cubic cap
};
AnalyticConstants analytic_constants(double delta);

// eps below f'(xi)/lambda2 is where the linearization at xi admits patterns;
// a heuristic onset indicator, never exact
double epsilon_threshold(double delta, double lambda2);

struct SweepRow {
  double epsilon = 0.0;
  double c_epsilon = 0.0;  // mountain-pass energy estimate (NaN on failure)
  int distinct_count = 0;
  bool has_nonconstant = false;
  double threshold_ratio = 0.0;  // eps * lambda2 / f'(xi)
  bool mpa_converged = false;
  std::string note;
};

struct SweepOptions {
  int multistart_n = 20;
  std::uint64_t seed = 1;
  StartStrategy strategy = StartStrategy::spikes;
  SolveOptions solve;
  MpaOptions mpa;
};

// Per epsilon: mountain-pass energy, a solution census (the polished
// mountain-pass solution joins the census pool), and the threshold ratio.
// Row failures are recorded in the note; the sweep continues.
std::vector<SweepRow> epsilon_sweep(const Mask& mask, const Nonlinearity& nonlin,
                                    const std::vector<double>& epsilons, const SweepOptions& opt);

}  // namespace plab
