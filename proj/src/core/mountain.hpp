#pragma once

// The explicit variational objects of the existence construction and a
// numerical mountain-pass path algorithm.
//
// Tent profile (support radius sqrt(eps), peak 1/eps):
//     w_eps(x) = (1/eps)(1 - |x|/sqrt(eps))_+
// Closed-form moments:
//     int w^k      = [2 pi / ((k+2)(k+1))] eps^{1-k}
//     int |grad w|^2 = pi / eps^2
// Energy along the tent ray, exp family (series in x = t/eps):
//     g_eps(t) = pi/(2 eps)(1 + delta/6) t^2 - 2 pi eps sum_{k>=3} (t/eps)^k/(k+2)!
// and its scaled profile eta(x) = g_eps(eps x), with the cubic cap
//     eta(x)/eps <= A x^2 - B x^3/120 =: h_M(x),  A = pi/2 (1 + delta/6), B = 2 pi,
// whose maximum is C2 = 6400 A^3 / (3 B^2) at x* = 80 A / B.

#include <cstdint>
#include <iosfwd>
#include <string>

#include "core/newton.hpp"
#include "core/operators.hpp"

namespace plab {

// Tent sampled at cell centers. Every lattice cell whose center lies in the
// support disk must be an active cell, otherwise InvalidArgument.
Field build_tent(const Mask& mask, double eps, double cx, double cy);

// Default placement: the active-set centroid itself when the support fits
// there, else the deepest cell center. Using the exact centroid keeps the
// tent on the domain's symmetry point, so spike translation modes stay
// unexcited and the polish does not drift. InvalidArgument when no tent of
// this eps fits anywhere reasonable.
std::pair<double, double> default_tent_center(const Mask& mask, double eps);

struct TentMoments {
  double mass_k;   // int w^k
  double grad_sq;  // int |grad w|^2
};
TentMoments tent_moments(double eps, int k);

// Partial sum of the tent-ray energy series; adaptive term count, capped at
// max_terms. Throws SaturationError for t/eps past the exp guard.
double g_series(double delta, double eps, double t, int max_terms = 2000);

struct EtaPair {
  double eta_over_eps;  // exact scaled ray profile (series-consistent form)
  double cap;           // the cubic bound h_M(x)
};
EtaPair eta_and_cap(double delta, double x);

struct MpaOptions {
  int path_points = 40;
  double tol = 1e-8;
  int max_path_iters = 300;
  int resample_every = 5;
  std::uint64_t seed = 0;      // nonzero: randomize the tent center
  std::ostream* trace = nullptr;  // per-iteration CSV: iter,max_index,max_energy,grad_norm_at_max
  SolveOptions newton;
};

struct MpaResult {
  SolveReport report;        // polished critical point; energy estimates c_eps
  int path_iterations = 0;
  double path_max_energy = 0.0;  // max energy along the final path
  bool tent_path = true;         // false when the constant segment was used
  std::string note;
};

// Initial path along the tent ray (or along constants when no tent fits),
// then repeated descent of the maximal vertex with periodic arclength
// resampling, then a Newton polish from the best vertex.
MpaResult mpa_run(const Problem& p, const MpaOptions& opt = {});

}  // namespace plab
