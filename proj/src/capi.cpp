// extern-C surface over the core. Exceptions stop here: every entry point
// traps, records the message in a thread-local slot, and returns a status.

#include "patternlab.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "core/analysis.hpp"
#include "core/errors.hpp"
#include "core/io.hpp"
#include "core/linear.hpp"
#include "core/mask.hpp"
#include "core/mountain.hpp"
#include "core/newton.hpp"
#include "core/nonlinearity.hpp"
#include "core/operators.hpp"

struct pl_mask {
  std::shared_ptr<const plab::Mask> m;
};
struct pl_nonlinearity {
  plab::Nonlinearity f = plab::Nonlinearity::cubic();
};
struct pl_problem {
  std::shared_ptr<const plab::Mask> m;
  plab::Nonlinearity f = plab::Nonlinearity::cubic();
  double eps = 1.0;
  plab::Problem view() const { return plab::Problem(*m, f, eps); }
};
struct pl_field {
  std::shared_ptr<const plab::Mask> m;
  plab::Field u;
};
struct pl_report {
  std::shared_ptr<const plab::Mask> m;
  plab::SolveReport rep;
};
struct pl_report_list {
  std::vector<pl_report> items;
};
struct pl_sweep {
  std::vector<plab::SweepRow> rows;
};

namespace {

thread_local std::string t_error;

template <class Fn>
pl_status guarded(Fn&& fn) {
  try {
    fn();
    return PL_OK;
  } catch (const plab::InvalidArgument& e) {
    t_error = e.what();
    return PL_ERR_INVALID_ARGUMENT;
  } catch (const plab::SaturationError& e) {
    t_error = e.what();
    return PL_ERR_SATURATION;
  } catch (const plab::NoConvergence& e) {
    t_error = e.what();
    return PL_ERR_NO_CONVERGENCE;
  } catch (const plab::IoError& e) {
    t_error = e.what();
    return PL_ERR_IO;
  } catch (const std::exception& e) {
    t_error = e.what();
    return PL_ERR_INTERNAL;
  } catch (...) {
    t_error = "unknown failure";
    return PL_ERR_INTERNAL;
  }
}

pl_status fail_arg(const char* what) {
  t_error = what;
  return PL_ERR_INVALID_ARGUMENT;
}

bool bad(const void* p) { return p == nullptr; }

plab::SolveOptions solve_options(double tol, int maxit) {
  plab::SolveOptions opt;
  if (tol > 0.0) opt.tol = tol;
  if (maxit > 0) opt.maxit = maxit;
  return opt;
}

}  // namespace

extern "C" {

const char* pl_status_name(pl_status status) {
  switch (status) {
    case PL_OK: return "ok";
    case PL_ERR_INVALID_ARGUMENT: return "invalid argument";
    case PL_ERR_SATURATION: return "saturation";
    case PL_ERR_NO_CONVERGENCE: return "no convergence";
    case PL_ERR_IO: return "io error";
    case PL_ERR_INTERNAL: return "internal error";
  }
  return "?";
}

const char* pl_last_error(void) { return t_error.c_str(); }

const char* pl_version(void) { return "1.0.0"; }

/* masks */

pl_status pl_mask_create(const char* shape, double h, pl_mask** out) {
  if (bad(shape) || bad(out)) return fail_arg("pl_mask_create: null argument");
  return guarded([&] {
    auto mask = std::make_shared<plab::Mask>(plab::Mask::build(plab::ShapeSpec::parse(shape), h));
    *out = new pl_mask{std::move(mask)};
  });
}

void pl_mask_destroy(pl_mask* mask) { delete mask; }

int pl_mask_nx(const pl_mask* mask) { return mask ? mask->m->nx() : 0; }
int pl_mask_ny(const pl_mask* mask) { return mask ? mask->m->ny() : 0; }
double pl_mask_spacing(const pl_mask* mask) { return mask ? mask->m->spacing() : 0.0; }
int pl_mask_cell_count(const pl_mask* mask) { return mask ? mask->m->cell_count() : 0; }
int pl_mask_face_count(const pl_mask* mask) {
  return mask ? static_cast<int>(mask->m->faces().size()) : 0;
}
double pl_mask_area(const pl_mask* mask) { return mask ? mask->m->area() : 0.0; }

pl_status pl_mask_write_text(const pl_mask* mask, const char* path) {
  if (bad(mask) || bad(path)) return fail_arg("pl_mask_write_text: null argument");
  return guarded([&] { mask->m->dump_file(path); });
}

/* nonlinearities */

pl_status pl_nonlinearity_create(const char* spec, pl_nonlinearity** out) {
  if (bad(spec) || bad(out)) return fail_arg("pl_nonlinearity_create: null argument");
  return guarded([&] { *out = new pl_nonlinearity{plab::Nonlinearity::parse(spec)}; });
}

void pl_nonlinearity_destroy(pl_nonlinearity* nl) { delete nl; }

pl_status pl_nonlinearity_eval(const pl_nonlinearity* nl, double t, double* f, double* fprime,
                               double* antiderivative) {
  if (bad(nl)) return fail_arg("pl_nonlinearity_eval: null handle");
  return guarded([&] {
    plab::Triple tr = nl->f.eval(t);
    if (f) *f = tr.f;
    if (fprime) *fprime = tr.fp;
    if (antiderivative) *antiderivative = tr.F;
  });
}

pl_status pl_nonlinearity_positive_root(const pl_nonlinearity* nl, double* xi) {
  if (bad(nl) || bad(xi)) return fail_arg("pl_nonlinearity_positive_root: null argument");
  return guarded([&] { *xi = plab::find_positive_root(nl->f); });
}

pl_status pl_exp_k_xi(double delta, double* k_xi) {
  if (bad(k_xi)) return fail_arg("pl_exp_k_xi: null argument");
  return guarded([&] { *k_xi = plab::k_xi(delta); });
}

pl_status pl_check_rigidity_condition(const pl_nonlinearity* nl, double xi, double lo, double hi,
                                      int n, int* holds, double* worst_t, double* worst_value) {
  if (bad(nl)) return fail_arg("pl_check_rigidity_condition: null handle");
  return guarded([&] {
    plab::ConditionReport rep = plab::check_rigidity_condition(nl->f, xi, lo, hi, n);
    if (holds) *holds = rep.holds ? 1 : 0;
    if (worst_t) *worst_t = rep.worst_t;
    if (worst_value) *worst_value = rep.worst_value;
  });
}

pl_status pl_check_fixed_sign(const pl_nonlinearity* nl, double lo, double hi, int n, int* holds,
                              int* sign) {
  if (bad(nl)) return fail_arg("pl_check_fixed_sign: null handle");
  return guarded([&] {
    plab::SignReport rep = plab::check_fixed_sign(nl->f, lo, hi, n);
    if (holds) *holds = rep.holds ? 1 : 0;
    if (sign) *sign = rep.sign;
  });
}

/* problems */

pl_status pl_problem_create(const pl_mask* mask, const pl_nonlinearity* nl, double epsilon,
                            pl_problem** out) {
  if (bad(mask) || bad(nl) || bad(out)) return fail_arg("pl_problem_create: null argument");
  return guarded([&] {
    if (!(epsilon > 0.0)) throw plab::InvalidArgument("pl_problem_create: epsilon must be positive");
    *out = new pl_problem{mask->m, nl->f, epsilon};
  });
}

void pl_problem_destroy(pl_problem* problem) { delete problem; }

/* fields */

/* Throwing work happens before the aggregate-init below: initializing a
 * handle with an expression that throws mid-list leaks the shared_ptr member
 * under gcc 11 (aggregate members are not unwound). */

pl_status pl_field_constant(const pl_mask* mask, double value, pl_field** out) {
  if (bad(mask) || bad(out)) return fail_arg("pl_field_constant: null argument");
  return guarded([&] {
    plab::Field u = plab::constant_field(*mask->m, value);
    *out = new pl_field{mask->m, std::move(u)};
  });
}

pl_status pl_field_tent(const pl_mask* mask, double eps, double cx, double cy, pl_field** out) {
  if (bad(mask) || bad(out)) return fail_arg("pl_field_tent: null argument");
  return guarded([&] {
    plab::Field u = plab::build_tent(*mask->m, eps, cx, cy);
    *out = new pl_field{mask->m, std::move(u)};
  });
}

pl_status pl_field_tent_auto(const pl_mask* mask, double eps, pl_field** out) {
  if (bad(mask) || bad(out)) return fail_arg("pl_field_tent_auto: null argument");
  return guarded([&] {
    auto [cx, cy] = plab::default_tent_center(*mask->m, eps);
    plab::Field u = plab::build_tent(*mask->m, eps, cx, cy);
    *out = new pl_field{mask->m, std::move(u)};
  });
}

pl_status pl_field_read(const pl_mask* mask, const char* path, pl_field** out) {
  if (bad(mask) || bad(path) || bad(out)) return fail_arg("pl_field_read: null argument");
  return guarded([&] {
    plab::Field u = plab::field_from_dump(*mask->m, plab::read_field_file(path));
    *out = new pl_field{mask->m, std::move(u)};
  });
}

pl_status pl_field_scale(pl_field* field, double factor) {
  if (bad(field)) return fail_arg("pl_field_scale: null handle");
  for (double& v : field->u) v *= factor;
  return PL_OK;
}

void pl_field_destroy(pl_field* field) { delete field; }

int pl_field_size(const pl_field* field) {
  return field ? static_cast<int>(field->u.size()) : 0;
}

const double* pl_field_values(const pl_field* field) {
  return field ? field->u.data() : nullptr;
}

pl_status pl_field_write_text(const pl_field* field, const char* path) {
  if (bad(field) || bad(path)) return fail_arg("pl_field_write_text: null argument");
  return guarded([&] { plab::write_field_file(path, *field->m, field->u); });
}

pl_status pl_field_write_pgm(const pl_field* field, const char* path) {
  if (bad(field) || bad(path)) return fail_arg("pl_field_write_pgm: null argument");
  return guarded([&] { plab::write_pgm_file(path, *field->m, field->u); });
}

/* energy algebra */

pl_status pl_energy(const pl_problem* problem, const pl_field* u, double* out) {
  if (bad(problem) || bad(u) || bad(out)) return fail_arg("pl_energy: null argument");
  return guarded([&] { *out = plab::energy(problem->view(), u->u); });
}

pl_status pl_gradient_norm(const pl_problem* problem, const pl_field* u, double* out) {
  if (bad(problem) || bad(u) || bad(out)) return fail_arg("pl_gradient_norm: null argument");
  return guarded([&] { *out = plab::norm2(plab::gradient(problem->view(), u->u)); });
}

/* solvers */

pl_status pl_newton_solve(const pl_problem* problem, const pl_field* initial, double tol,
                          int maxit, pl_report** out) {
  if (bad(problem) || bad(initial) || bad(out)) return fail_arg("pl_newton_solve: null argument");
  return guarded([&] {
    plab::SolveReport rep = plab::newton_solve(problem->view(), initial->u, solve_options(tol, maxit));
    *out = new pl_report{problem->m, std::move(rep)};
  });
}

pl_status pl_multistart(const pl_problem* problem, const char* strategy, int n, uint64_t seed,
                        double tol, int maxit, pl_report_list** out) {
  if (bad(problem) || bad(strategy) || bad(out)) return fail_arg("pl_multistart: null argument");
  return guarded([&] {
    std::vector<plab::SolveReport> reps = plab::multistart(
        problem->view(), plab::parse_strategy(strategy), n, seed, solve_options(tol, maxit));
    auto list = std::make_unique<pl_report_list>();
    list->items.reserve(reps.size());
    for (plab::SolveReport& r : reps) list->items.push_back(pl_report{problem->m, std::move(r)});
    *out = list.release();
  });
}

pl_status pl_mpa_run(const pl_problem* problem, int path_points, double tol, uint64_t seed,
                     const char* trace_csv_path, pl_report** out) {
  if (bad(problem) || bad(out)) return fail_arg("pl_mpa_run: null argument");
  return guarded([&] {
    plab::MpaOptions opt;
    if (path_points > 0) opt.path_points = path_points;
    if (tol > 0.0) opt.tol = tol;
    opt.seed = seed;
    std::ofstream trace;
    if (trace_csv_path) {
      trace.open(trace_csv_path);
      if (!trace) throw plab::IoError(std::string("pl_mpa_run: cannot open '") + trace_csv_path + "'");
      opt.trace = &trace;
    }
    plab::MpaResult res = plab::mpa_run(problem->view(), opt);
    if (!res.note.empty())
      res.report.message = res.report.message.empty() ? res.note : res.report.message + "; " + res.note;
    *out = new pl_report{problem->m, std::move(res.report)};
  });
}

void pl_report_destroy(pl_report* report) { delete report; }

int pl_report_converged(const pl_report* r) { return r && r->rep.converged ? 1 : 0; }
int pl_report_iterations(const pl_report* r) { return r ? r->rep.iterations : 0; }
double pl_report_residual(const pl_report* r) { return r ? r->rep.residual_norm : 0.0; }
double pl_report_energy(const pl_report* r) { return r ? r->rep.energy : 0.0; }
int pl_report_is_constant(const pl_report* r) { return r && r->rep.constant ? 1 : 0; }
double pl_report_constant_value(const pl_report* r) { return r ? r->rep.constant_value : 0.0; }
double pl_report_stability_index(const pl_report* r) { return r ? r->rep.stability_index : 0.0; }
int pl_report_positive(const pl_report* r) { return r && r->rep.positive ? 1 : 0; }
double pl_report_min(const pl_report* r) { return r ? r->rep.min_u : 0.0; }
double pl_report_max(const pl_report* r) { return r ? r->rep.max_u : 0.0; }
const char* pl_report_message(const pl_report* r) { return r ? r->rep.message.c_str() : ""; }

pl_status pl_report_field(const pl_report* report, pl_field** out) {
  if (bad(report) || bad(out)) return fail_arg("pl_report_field: null argument");
  return guarded([&] {
    plab::Field u = report->rep.u;
    *out = new pl_field{report->m, std::move(u)};
  });
}

void pl_report_list_destroy(pl_report_list* list) { delete list; }

int pl_report_list_size(const pl_report_list* list) {
  return list ? static_cast<int>(list->items.size()) : 0;
}

const pl_report* pl_report_list_get(const pl_report_list* list, int index) {
  if (!list || index < 0 || index >= static_cast<int>(list->items.size())) return nullptr;
  return &list->items[static_cast<std::size_t>(index)];
}

pl_status pl_report_list_write_csv(const pl_report_list* list, const char* path) {
  if (bad(list) || bad(path)) return fail_arg("pl_report_list_write_csv: null argument");
  return guarded([&] {
    std::vector<const plab::SolveReport*> rows;
    rows.reserve(list->items.size());
    for (const pl_report& r : list->items) rows.push_back(&r.rep);
    std::ofstream f(path);
    if (!f) throw plab::IoError(std::string("write_reports_csv: cannot open '") + path + "'");
    plab::write_reports_csv(f, rows);
    if (!f) throw plab::IoError(std::string("write_reports_csv: write to '") + path + "' failed");
  });
}

/* analysis */

pl_status pl_lambda2(const pl_mask* mask, double tol, double* lambda1, double* lambda2,
                     pl_field** eigenvector2) {
  if (bad(mask)) return fail_arg("pl_lambda2: null handle");
  return guarded([&] {
    plab::SpectralReport rep = plab::neumann_lambda2(*mask->m, tol > 0.0 ? tol : 1e-8);
    if (!rep.converged)
      throw plab::NoConvergence("pl_lambda2: eigensolver stopped before tolerance");
    if (lambda1) *lambda1 = rep.lambda1;
    if (lambda2) *lambda2 = rep.lambda2;
    if (eigenvector2) *eigenvector2 = new pl_field{mask->m, std::move(rep.eigenvector2)};
  });
}

pl_status pl_stability_index(const pl_problem* problem, const pl_field* u, double tol,
                             double* out) {
  if (bad(problem) || bad(u) || bad(out)) return fail_arg("pl_stability_index: null argument");
  return guarded([&] {
    bool converged = false;
    *out = plab::stability_index(problem->view(), u->u, tol > 0.0 ? tol : 1e-8, &converged);
    if (!converged)
      throw plab::NoConvergence("pl_stability_index: eigensolver stopped before tolerance");
  });
}

pl_status pl_rigidity_check(const pl_problem* problem, const pl_field* u, double xi,
                            double* dirichlet, double* pairing, double* gap) {
  if (bad(problem) || bad(u)) return fail_arg("pl_rigidity_check: null argument");
  return guarded([&] {
    plab::RigidityReport rep = plab::rigidity_check(problem->view(), u->u, xi);
    if (dirichlet) *dirichlet = rep.dirichlet_term;
    if (pairing) *pairing = rep.pairing_term;
    if (gap) *gap = rep.gap;
  });
}

pl_status pl_analytic_constants(double delta, pl_constants* out) {
  if (bad(out)) return fail_arg("pl_analytic_constants: null argument");
  return guarded([&] {
    plab::AnalyticConstants c = plab::analytic_constants(delta);
    out->delta = c.delta;
    out->xi = c.xi;
    out->k_xi = c.k_xi;
    out->f_prime_xi = c.f_prime_xi;
    out->cap_a = c.A;
    out->cap_b = c.B;
    out->x_star = c.x_star;
    out->c2 = c.C2;
  });
}

pl_status pl_epsilon_threshold(double delta, double lambda2, double* out) {
  if (bad(out)) return fail_arg("pl_epsilon_threshold: null argument");
  return guarded([&] { *out = plab::epsilon_threshold(delta, lambda2); });
}

pl_status pl_tent_moments(double eps, int k, double* mass_k, double* grad_sq) {
  return guarded([&] {
    plab::TentMoments m = plab::tent_moments(eps, k);
    if (mass_k) *mass_k = m.mass_k;
    if (grad_sq) *grad_sq = m.grad_sq;
  });
}

pl_status pl_g_series(double delta, double eps, double t, double* out) {
  if (bad(out)) return fail_arg("pl_g_series: null argument");
  return guarded([&] { *out = plab::g_series(delta, eps, t); });
}

pl_status pl_eta_and_cap(double delta, double x, double* eta_over_eps, double* cap) {
  return guarded([&] {
    plab::EtaPair e = plab::eta_and_cap(delta, x);
    if (eta_over_eps) *eta_over_eps = e.eta_over_eps;
    if (cap) *cap = e.cap;
  });
}

/* sweeps */

pl_status pl_sweep_run(const pl_mask* mask, const pl_nonlinearity* nl, const double* epsilons,
                       int n_eps, const char* strategy, int multistart_n, uint64_t seed,
                       double tol, pl_sweep** out) {
  if (bad(mask) || bad(nl) || bad(epsilons) || bad(out))
    return fail_arg("pl_sweep_run: null argument");
  return guarded([&] {
    if (n_eps < 1) throw plab::InvalidArgument("pl_sweep_run: need at least one epsilon");
    plab::SweepOptions opt;
    opt.multistart_n = multistart_n > 0 ? multistart_n : 20;
    opt.seed = seed;
    if (strategy) opt.strategy = plab::parse_strategy(strategy);
    if (tol > 0.0) opt.solve.tol = tol;
    std::vector<double> eps(epsilons, epsilons + n_eps);
    *out = new pl_sweep{plab::epsilon_sweep(*mask->m, nl->f, eps, opt)};
  });
}

void pl_sweep_destroy(pl_sweep* sweep) { delete sweep; }

int pl_sweep_size(const pl_sweep* sweep) {
  return sweep ? static_cast<int>(sweep->rows.size()) : 0;
}

static const plab::SweepRow* sweep_row(const pl_sweep* sweep, int row) {
  if (!sweep || row < 0 || row >= static_cast<int>(sweep->rows.size())) return nullptr;
  return &sweep->rows[static_cast<std::size_t>(row)];
}

double pl_sweep_epsilon(const pl_sweep* sweep, int row) {
  const plab::SweepRow* r = sweep_row(sweep, row);
  return r ? r->epsilon : 0.0;
}
double pl_sweep_c_epsilon(const pl_sweep* sweep, int row) {
  const plab::SweepRow* r = sweep_row(sweep, row);
  return r ? r->c_epsilon : 0.0;
}
int pl_sweep_distinct_count(const pl_sweep* sweep, int row) {
  const plab::SweepRow* r = sweep_row(sweep, row);
  return r ? r->distinct_count : 0;
}
int pl_sweep_has_nonconstant(const pl_sweep* sweep, int row) {
  const plab::SweepRow* r = sweep_row(sweep, row);
  return r && r->has_nonconstant ? 1 : 0;
}
double pl_sweep_threshold_ratio(const pl_sweep* sweep, int row) {
  const plab::SweepRow* r = sweep_row(sweep, row);
  return r ? r->threshold_ratio : 0.0;
}
const char* pl_sweep_note(const pl_sweep* sweep, int row) {
  const plab::SweepRow* r = sweep_row(sweep, row);
  return r ? r->note.c_str() : "";
}

pl_status pl_sweep_write_csv(const pl_sweep* sweep, const char* path) {
  if (bad(sweep) || bad(path)) return fail_arg("pl_sweep_write_csv: null argument");
  return guarded([&] { plab::write_sweep_csv_file(path, sweep->rows); });
}

/* rendering */

pl_status pl_render_pgm(const char* field_dump_path, const char* pgm_path) {
  if (bad(field_dump_path) || bad(pgm_path)) return fail_arg("pl_render_pgm: null argument");
  return guarded([&] { plab::write_pgm_file(pgm_path, plab::read_field_file(field_dump_path)); });
}

} /* extern "C" */
