/*
 * patternlab: a numerical laboratory for semilinear elliptic Neumann problems
 *     -eps Lap(u) = f(u) in Omega,  du/dnu = 0 on the boundary,
 * on masked Cartesian grids: finite-volume energy machinery, damped Newton
 * with seeded multistart, a mountain-pass path algorithm, and spectral
 * stability diagnostics.
 *
 * C API over an opaque-handle core. Every function that can fail returns a
 * pl_status; PL_OK is zero. On failure, pl_last_error() returns a
 * thread-local description of what went wrong. Handles are created by
 * pl_*_create-style calls and released with the matching pl_*_destroy (null
 * is always safe to destroy). Handles may be shared across threads only for
 * concurrent reads.
 */

#ifndef PATTERNLAB_H
#define PATTERNLAB_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pl_status {
  PL_OK = 0,
  PL_ERR_INVALID_ARGUMENT = 1, /* bad input or violated precondition */
  PL_ERR_SATURATION = 2,       /* e^t past the overflow guard */
  PL_ERR_NO_CONVERGENCE = 3,   /* an iteration stopped short of tolerance */
  PL_ERR_IO = 4,               /* file access or format problem */
  PL_ERR_INTERNAL = 5
} pl_status;

const char* pl_status_name(pl_status status);
const char* pl_last_error(void); /* thread-local, valid until the next failing call */
const char* pl_version(void);

/* ------------------------------------------------------------------ masks */

typedef struct pl_mask pl_mask;

/* shape: "rect:WxH" | "square" | "disk:r=R" | "annulus:rin=A,rout=B" |
 * "lshape:s=S" (bare names take unit defaults); h: cell side length.
 * The active set is the cells whose centers fall inside the shape and must
 * come out edge-connected. */
pl_status pl_mask_create(const char* shape, double h, pl_mask** out);
void pl_mask_destroy(pl_mask* mask);

int pl_mask_nx(const pl_mask* mask);
int pl_mask_ny(const pl_mask* mask);
double pl_mask_spacing(const pl_mask* mask);
int pl_mask_cell_count(const pl_mask* mask);
int pl_mask_face_count(const pl_mask* mask);
double pl_mask_area(const pl_mask* mask);
/* plain-text dump: header "nx ny h", then 1/0 per cell, top row first */
pl_status pl_mask_write_text(const pl_mask* mask, const char* path);

/* -------------------------------------------------------- nonlinearities */

typedef struct pl_nonlinearity pl_nonlinearity;

/* spec: "exp:delta=D" (e^t - 1 - (1+D)t) | "power:p=P" (t^p - t) | "cubic"
 * (-t^3) | "linear:mu=M" (M t) | "poly:c0,c1,..." */
pl_status pl_nonlinearity_create(const char* spec, pl_nonlinearity** out);
void pl_nonlinearity_destroy(pl_nonlinearity* nl);

/* f, f', and the antiderivative F with F(0) = 0 */
pl_status pl_nonlinearity_eval(const pl_nonlinearity* nl, double t, double* f, double* fprime,
                               double* antiderivative);
/* unique positive root xi of f (exp family with delta > 0, or power) */
pl_status pl_nonlinearity_positive_root(const pl_nonlinearity* nl, double* xi);
/* energy density of the constant solution xi for the exp family */
pl_status pl_exp_k_xi(double delta, double* k_xi);

/* sampled check of f(t)(t - xi) <= 0 on [lo, hi]; a heuristic, not a proof */
pl_status pl_check_rigidity_condition(const pl_nonlinearity* nl, double xi, double lo, double hi,
                                      int n, int* holds, double* worst_t, double* worst_value);
/* sampled single-sign check; sign is +1, -1, or 0 when holds */
pl_status pl_check_fixed_sign(const pl_nonlinearity* nl, double lo, double hi, int n, int* holds,
                              int* sign);

/* --------------------------------------------------------------- problems */

typedef struct pl_problem pl_problem;

pl_status pl_problem_create(const pl_mask* mask, const pl_nonlinearity* nl, double epsilon,
                            pl_problem** out);
void pl_problem_destroy(pl_problem* problem);

/* ----------------------------------------------------------------- fields */

typedef struct pl_field pl_field;

pl_status pl_field_constant(const pl_mask* mask, double value, pl_field** out);
/* tent of support radius sqrt(eps) and peak 1/eps centered at (cx, cy);
 * the support must lie inside the domain */
pl_status pl_field_tent(const pl_mask* mask, double eps, double cx, double cy, pl_field** out);
/* tent at the canonical center (domain centroid, else the deepest cell) */
pl_status pl_field_tent_auto(const pl_mask* mask, double eps, pl_field** out);
/* read a dump produced by pl_field_write_text; lattice must match the mask */
pl_status pl_field_read(const pl_mask* mask, const char* path, pl_field** out);
pl_status pl_field_scale(pl_field* field, double factor);
void pl_field_destroy(pl_field* field);

int pl_field_size(const pl_field* field);
/* borrowed pointer, valid until the field is destroyed or scaled */
const double* pl_field_values(const pl_field* field);
/* header "nx ny h", then row-major values top row first, nan when inactive */
pl_status pl_field_write_text(const pl_field* field, const char* path);
/* 8-bit binary PGM, linear min..max scaling, inactive cells black */
pl_status pl_field_write_pgm(const pl_field* field, const char* path);

/* --------------------------------------------------------- energy algebra */

pl_status pl_energy(const pl_problem* problem, const pl_field* u, double* out);
pl_status pl_gradient_norm(const pl_problem* problem, const pl_field* u, double* out);

/* ---------------------------------------------------------------- solvers */

typedef struct pl_report pl_report;
typedef struct pl_report_list pl_report_list;

/* damped Newton; converged means ||grad|| <= tol * h * max(1, ||f(u)||_2).
 * tol <= 0 or maxit <= 0 pick the defaults (1e-8, 80). */
pl_status pl_newton_solve(const pl_problem* problem, const pl_field* initial, double tol,
                          int maxit, pl_report** out);

/* strategy: "constants" | "random" | "spikes" | "eigen-perturbed".
 * n seeded starts; distinct converged solutions first (sorted by energy,
 * then norm), failures after them. Deterministic for a fixed seed. */
pl_status pl_multistart(const pl_problem* problem, const char* strategy, int n, uint64_t seed,
                        double tol, int maxit, pl_report_list** out);

/* mountain-pass run: tent-ray (or constant-segment) initial path, descent of
 * the maximal vertex, Newton polish. trace_csv_path may be null; seed 0 keeps
 * the canonical tent center. The report's energy estimates the pass level. */
pl_status pl_mpa_run(const pl_problem* problem, int path_points, double tol, uint64_t seed,
                     const char* trace_csv_path, pl_report** out);

void pl_report_destroy(pl_report* report);
int pl_report_converged(const pl_report* report);
int pl_report_iterations(const pl_report* report);
double pl_report_residual(const pl_report* report);
double pl_report_energy(const pl_report* report);
int pl_report_is_constant(const pl_report* report);
double pl_report_constant_value(const pl_report* report);
double pl_report_stability_index(const pl_report* report);
int pl_report_positive(const pl_report* report);
double pl_report_min(const pl_report* report);
double pl_report_max(const pl_report* report);
const char* pl_report_message(const pl_report* report);
pl_status pl_report_field(const pl_report* report, pl_field** out);

void pl_report_list_destroy(pl_report_list* list);
int pl_report_list_size(const pl_report_list* list);
/* borrowed pointer owned by the list; do not destroy it separately */
const pl_report* pl_report_list_get(const pl_report_list* list, int index);
/* columns: index,converged,classification,constant_value,energy,residual,
 * stability_index,positive,min_u,max_u */
pl_status pl_report_list_write_csv(const pl_report_list* list, const char* path);

/* ---------------------------------------------------------------- analysis */

/* two smallest eigenvalues of L/h^2 (lambda1 ~ 0 for the constant mode);
 * eigenvector2 may be null when the vector is not needed */
pl_status pl_lambda2(const pl_mask* mask, double tol, double* lambda1, double* lambda2,
                     pl_field** eigenvector2);
/* smallest eigenvalue of (eps L - h^2 diag f'(u)) / h^2; >= 0 means stable */
pl_status pl_stability_index(const pl_problem* problem, const pl_field* u, double tol,
                             double* out);
/* dirichlet = sum_faces (u_i-u_j)^2, pairing = (h^2/eps) sum f(u)(u - xi) */
pl_status pl_rigidity_check(const pl_problem* problem, const pl_field* u, double xi,
                            double* dirichlet, double* pairing, double* gap);

typedef struct pl_constants {
  double delta;
  double xi;          /* positive root (nan at delta = 0) */
  double k_xi;        /* energy density of the constant solution xi */
  double f_prime_xi;  /* e^xi - (1+delta) */
  double cap_a;       /* pi/2 (1 + delta/6) */
  double cap_b;       /* 2 pi */
  double x_star;      /* argmax of the cubic cap: 80 A / B */
  double c2;          /* max of the cubic cap: 6400 A^3 / (3 B^2) */
} pl_constants;
pl_status pl_analytic_constants(double delta, pl_constants* out);
/* heuristic pattern-onset diffusion: f'(xi) / lambda2 */
pl_status pl_epsilon_threshold(double delta, double lambda2, double* out);

/* closed-form tent moments: int w^k and int |grad w|^2 */
pl_status pl_tent_moments(double eps, int k, double* mass_k, double* grad_sq);
/* energy along the tent ray (series form) */
pl_status pl_g_series(double delta, double eps, double t, double* out);
/* scaled ray profile eta(x)/eps and its cubic cap */
pl_status pl_eta_and_cap(double delta, double x, double* eta_over_eps, double* cap);

/* ------------------------------------------------------------------ sweeps */

typedef struct pl_sweep pl_sweep;

/* per epsilon: mountain-pass energy, a census of distinct solutions (the
 * pass solution joins the census pool), and the threshold ratio
 * eps * lambda2 / f'(xi). Row failures are recorded; the sweep continues. */
pl_status pl_sweep_run(const pl_mask* mask, const pl_nonlinearity* nl, const double* epsilons,
                       int n_eps, const char* strategy, int multistart_n, uint64_t seed,
                       double tol, pl_sweep** out);
void pl_sweep_destroy(pl_sweep* sweep);
int pl_sweep_size(const pl_sweep* sweep);
double pl_sweep_epsilon(const pl_sweep* sweep, int row);
double pl_sweep_c_epsilon(const pl_sweep* sweep, int row);
int pl_sweep_distinct_count(const pl_sweep* sweep, int row);
int pl_sweep_has_nonconstant(const pl_sweep* sweep, int row);
double pl_sweep_threshold_ratio(const pl_sweep* sweep, int row);
const char* pl_sweep_note(const pl_sweep* sweep, int row);
/* columns: epsilon,c_epsilon,distinct_count,has_nonconstant,threshold_ratio */
pl_status pl_sweep_write_csv(const pl_sweep* sweep, const char* path);

/* --------------------------------------------------------------- rendering */

/* render a field dump file to a PGM heatmap */
pl_status pl_render_pgm(const char* field_dump_path, const char* pgm_path);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* PATTERNLAB_H */
