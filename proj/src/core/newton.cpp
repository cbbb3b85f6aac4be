#include "core/newton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/errors.hpp"
#include "core/linear.hpp"
#include "core/mountain.hpp"
#include "core/rng.hpp"
#include "core/summation.hpp"

namespace plab {

namespace {

constexpr double kFieldGuard = 600.0;  // below the 700 exp guard on purpose

struct GradEval {
  double gnorm = 0.0;
  double fnorm = 0.0;
  bool ok = false;
};

// gradient, ||g||_2 and ||f(u)||_2 in one pass; false on saturation
GradEval eval_gradient(const Problem& p, const Field& u, Field& g) {
  GradEval out;
  const Mask& mask = *p.mask;
  try {
    laplacian_apply(mask, u, g);
    double h2 = mask.spacing() * mask.spacing();
    CompensatedSum g2, f2;
    for (std::size_t c = 0; c < u.size(); ++c) {
      double fv = p.nonlin.f(u[c]);
      g[c] = p.epsilon * g[c] - h2 * fv;
      g2.add(g[c] * g[c]);
      f2.add(fv * fv);
    }
    out.gnorm = std::sqrt(g2.value());
    out.fnorm = std::sqrt(f2.value());
    out.ok = std::isfinite(out.gnorm) && std::isfinite(out.fnorm);
  } catch (const SaturationError&) {
    out.ok = false;
  }
  return out;
}

double max_abs(const Field& u) {
  double m = 0.0;
  for (double v : u) m = std::max(m, std::abs(v));
  return m;
}

double energy_or_inf(const Problem& p, const Field& u) {
  try {
    double e = energy(p, u);
    return std::isfinite(e) ? e : std::numeric_limits<double>::infinity();
  } catch (const SaturationError&) {
    return std::numeric_limits<double>::infinity();
  }
}

void finalize_report(const Problem& p, SolveReport& rep, const SolveOptions& opt) {
  rep.energy = energy_or_inf(p, rep.u);
  rep.min_u = rep.u.empty() ? 0.0 : *std::min_element(rep.u.begin(), rep.u.end());
  rep.max_u = rep.u.empty() ? 0.0 : *std::max_element(rep.u.begin(), rep.u.end());
  rep.positive = rep.min_u > -1e-8;
  rep.constant = classify_constant(rep.u, &rep.constant_value);
  if (opt.compute_stability && rep.converged) {
    LinearOperator stab = make_stability_operator(p, rep.u);
    EigenOptions eo;
    eo.k = 1;
    eo.tol = opt.stability_tol;
    eo.maxit = opt.stability_maxit;
    eo.block_extra = 3;
    EigenResult er = smallest_eigenpairs(stab, eo);
    if (!er.pairs.empty()) {
      rep.stability_index = er.pairs.front().value;
      rep.stability_converged = er.converged;
      if (!er.converged && rep.message.empty())
        rep.message = "stability eigensolve hit maxit; index is a Ritz estimate";
    } else {
      rep.stability_index = std::numeric_limits<double>::quiet_NaN();
      rep.stability_converged = false;
    }
  }
}

}  // namespace

bool classify_constant(const Field& u, double* value) {
  if (u.empty()) return false;
  double lo = u[0], hi = u[0];
  for (double v : u) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double m = mean(u);
  if (value) *value = m;
  return (hi - lo) <= 1e-6 * std::max(1.0, std::abs(m));
}

SolveReport newton_solve(const Problem& p, const Field& initial, const SolveOptions& opt) {
  const Mask& mask = *p.mask;
  if (initial.size() != static_cast<std::size_t>(mask.cell_count()))
    throw InvalidArgument("newton_solve: initial field does not match the mask");
  if (!(opt.tol > 0.0)) throw InvalidArgument("newton_solve: tol must be positive");
  for (double v : initial)
    if (!std::isfinite(v)) throw InvalidArgument("newton_solve: initial field has non-finite entries");

  SolveReport rep;
  rep.u = initial;
  double h = mask.spacing();
  int lin_maxit = opt.linear_maxit > 0
                      ? opt.linear_maxit
                      : std::min(mask.cell_count(),
                                 300 + 12 * static_cast<int>(std::sqrt(double(mask.cell_count()))));

  Field g, trial, gt;
  GradEval ge;
  if (max_abs(rep.u) > kFieldGuard) {
    rep.message = "diverged: field magnitude exceeded the saturation guard";
    finalize_report(p, rep, opt);
    return rep;
  }
  ge = eval_gradient(p, rep.u, g);
  if (!ge.ok) {
    rep.message = "diverged: field saturates the nonlinearity";
    finalize_report(p, rep, opt);
    return rep;
  }

  for (int it = 0; it < opt.maxit; ++it) {
    rep.residual_scale = h * std::max(1.0, ge.fnorm);
    rep.residual_norm = ge.gnorm;
    if (ge.gnorm <= opt.tol * rep.residual_scale) {
      rep.converged = true;
      break;
    }
    if (max_abs(rep.u) > kFieldGuard) {
      rep.message = "diverged: field magnitude exceeded the saturation guard";
      break;
    }

    LinearOperator hess = make_hessian_operator(p, rep.u);
    Field rhs(g.size());
    for (std::size_t c = 0; c < g.size(); ++c) rhs[c] = -g[c];
    // inexact Newton; tighten near the solution for a sharp finish
    double lin_tol = ge.gnorm <= 1e3 * opt.tol * rep.residual_scale ? 1e-6 : 1e-2;

    Field dir;
    bool have_dir = false;
    CgResult cg = cg_solve(hess, rhs, lin_tol, lin_maxit, false);
    if (cg.converged) {
      dir = std::move(cg.x);
      have_dir = true;
    } else {
      // saddle territory (indefinite Hessian) or a hard system: MINRES
      MinresResult mr = minres_solve(hess, rhs, lin_tol, 2 * lin_maxit);
      if (mr.relative_residual < 0.9) {
        dir = std::move(mr.x);
        have_dir = true;
      }
    }

    bool stepped = false;
    if (have_dir) {
      double t = 1.0;
      for (int bt = 0; bt <= 30 && !stepped; ++bt, t *= 0.5) {
        trial.resize(rep.u.size());
        for (std::size_t c = 0; c < rep.u.size(); ++c) trial[c] = rep.u[c] + t * dir[c];
        GradEval gtrial = eval_gradient(p, trial, gt);
        if (!gtrial.ok) continue;
        if (gtrial.gnorm <= (1.0 - 1e-4 * t) * ge.gnorm) {
          rep.u.swap(trial);
          g.swap(gt);
          ge = gtrial;
          stepped = true;
        }
      }
    }

    if (!stepped) {
      // preconditioned descent on the residual norm: direction -T H T g is a
      // descent direction for ||g||^2 in the T metric and works at saddles
      double dmax = 0.0;
      for (double d : hess.jacobi) dmax = std::max(dmax, std::abs(d));
      double floor = std::max(dmax * 1e-14, std::numeric_limits<double>::min());
      Field tg(g.size());
      for (std::size_t c = 0; c < g.size(); ++c)
        tg[c] = g[c] / std::max(std::abs(hess.jacobi[c]), floor);
      Field htg(g.size());
      hess(tg, htg);
      Field desc(g.size());
      for (std::size_t c = 0; c < g.size(); ++c)
        desc[c] = -htg[c] / std::max(std::abs(hess.jacobi[c]), floor);
      double t = 1.0;
      for (int bt = 0; bt <= 40 && !stepped; ++bt, t *= 0.5) {
        trial.resize(rep.u.size());
        for (std::size_t c = 0; c < rep.u.size(); ++c) trial[c] = rep.u[c] + t * desc[c];
        GradEval gtrial = eval_gradient(p, trial, gt);
        if (!gtrial.ok) continue;
        if (gtrial.gnorm <= (1.0 - 1e-6 * t) * ge.gnorm) {
          rep.u.swap(trial);
          g.swap(gt);
          ge = gtrial;
          stepped = true;
        }
      }
    }

    if (!stepped) {
      // last resort: preconditioned gradient-descent step on the energy
      std::vector<double> diag = hessian_diag(p, rep.u);
      double dmax = 0.0;
      for (double d : diag) dmax = std::max(dmax, std::abs(d));
      double floor = std::max(dmax * 1e-14, std::numeric_limits<double>::min());
      Field desc(g.size());
      double slope = 0.0;
      for (std::size_t c = 0; c < g.size(); ++c) {
        desc[c] = -g[c] / std::max(std::abs(diag[c]), floor);
        slope += g[c] * desc[c];
      }
      double phi0 = energy_or_inf(p, rep.u);
      double t = 1.0;
      for (int bt = 0; bt <= 30 && !stepped; ++bt, t *= 0.5) {
        trial.resize(rep.u.size());
        for (std::size_t c = 0; c < rep.u.size(); ++c) trial[c] = rep.u[c] + t * desc[c];
        double phi = energy_or_inf(p, trial);
        if (phi <= phi0 + 1e-4 * t * slope) {
          GradEval gtrial = eval_gradient(p, trial, gt);
          if (!gtrial.ok) continue;
          rep.u.swap(trial);
          g.swap(gt);
          ge = gtrial;
          stepped = true;
        }
      }
      if (!stepped) {
        rep.message = "stalled: neither Newton nor descent step reduced the residual";
        break;
      }
    }
    rep.iterations = it + 1;
  }

  rep.residual_norm = ge.gnorm;
  rep.residual_scale = h * std::max(1.0, ge.fnorm);
  if (!rep.converged && ge.gnorm <= opt.tol * rep.residual_scale) rep.converged = true;
  if (!rep.converged && rep.message.empty()) rep.message = "maxit exceeded";
  finalize_report(p, rep, opt);
  return rep;
}

StartStrategy parse_strategy(const std::string& name) {
  if (name == "constants") return StartStrategy::constants;
  if (name == "random") return StartStrategy::random_fields;
  if (name == "spikes") return StartStrategy::spikes;
  if (name == "eigen-perturbed" || name == "eigen") return StartStrategy::eigen_perturbed;
  throw InvalidArgument("multistart: unknown strategy '" + name +
                        "' (constants | random | spikes | eigen-perturbed)");
}

const char* strategy_name(StartStrategy s) {
  switch (s) {
    case StartStrategy::constants: return "constants";
    case StartStrategy::random_fields: return "random";
    case StartStrategy::spikes: return "spikes";
    case StartStrategy::eigen_perturbed: return "eigen-perturbed";
  }
  return "?";
}

std::vector<SolveReport> multistart(const Problem& p, StartStrategy strategy, int n,
                                    std::uint64_t seed, const SolveOptions& opt) {
  if (n < 1) throw InvalidArgument("multistart: n must be >= 1");
  const Mask& mask = *p.mask;
  std::vector<double> roots = p.nonlin.known_roots();
  double root_max = 0.0;
  for (double r : roots) root_max = std::max(root_max, std::abs(r));

  // lambda2 mode of the bare Laplacian, used by the eigen-perturbed strategy
  Field pattern_mode;
  if (strategy == StartStrategy::eigen_perturbed) {
    LinearOperator lap = make_laplacian_operator(mask);
    EigenOptions eo;
    eo.k = 2;
    eo.tol = 1e-6;
    eo.maxit = 200;
    Field xs(mask.cell_count()), ys(mask.cell_count());
    for (int c = 0; c < mask.cell_count(); ++c) {
      xs[c] = mask.cell_x(c);
      ys[c] = mask.cell_y(c);
    }
    eo.initial = {xs, ys};
    EigenResult er = smallest_eigenpairs(lap, eo);
    if (er.pairs.size() >= 2) {
      pattern_mode = er.pairs[1].vector;
      double amp = max_abs(pattern_mode);
      if (amp > 0) for (double& v : pattern_mode) v /= amp;
    }
  }

  const double spike_heights[] = {1.0, 2.0, 4.0};

  std::vector<SolveReport> reports;
  reports.reserve(n);
  for (int i = 0; i < n; ++i) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
    Field init;
    std::string note;
    switch (strategy) {
      case StartStrategy::constants: {
        double lo = -2.0, hi = std::max(2.5, 2.0 * root_max);
        double c = n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * static_cast<double>(i) / (n - 1);
        init = constant_field(mask, c);
        break;
      }
      case StartStrategy::random_fields: {
        init.resize(mask.cell_count());
        for (double& v : init) v = rng.uniform(0.0, 2.0);
        break;
      }
      case StartStrategy::spikes: {
        // anchor the census at the known constants, then scaled tents. The
        // first tents sit at the canonical center (interior spikes pin to the
        // deepest point; off-center starts only crawl toward it), the rest at
        // random admissible cells for exploration.
        if (i < static_cast<int>(roots.size())) {
          init = constant_field(mask, roots[i]);
          break;
        }
        int k = i - static_cast<int>(roots.size());
        double height = spike_heights[k % std::size(spike_heights)];
        bool placed = false;
        if (k < static_cast<int>(std::size(spike_heights))) {
          try {
            auto [cx, cy] = default_tent_center(mask, p.epsilon);
            init = build_tent(mask, p.epsilon, cx, cy);
            placed = true;
          } catch (const InvalidArgument&) {
          }
        }
        for (int attempt = 0; attempt < 60 && !placed; ++attempt) {
          std::int32_t c = static_cast<std::int32_t>(rng.next_u64() % mask.cell_count());
          try {
            init = build_tent(mask, p.epsilon, mask.cell_x(c), mask.cell_y(c));
            placed = true;
          } catch (const InvalidArgument&) {
          }
        }
        if (placed) {
          for (double& v : init) v *= height * p.epsilon;  // peak value = height
        } else {
          init = constant_field(mask, roots.empty() ? 0.0 : roots[i % roots.size()]);
          note = "no admissible tent support; used a constant start";
        }
        break;
      }
      case StartStrategy::eigen_perturbed: {
        double root = roots.empty() ? 0.0 : roots[i % std::max<std::size_t>(roots.size(), 1)];
        double amp = (0.3 + 0.4 * ((i / std::max<std::size_t>(roots.size(), 1)) % 5)) *
                     std::max(1.0, std::abs(root));
        if (rng.uniform() < 0.5) amp = -amp;
        init = constant_field(mask, root);
        if (!pattern_mode.empty())
          for (std::size_t c = 0; c < init.size(); ++c) init[c] += amp * pattern_mode[c];
        break;
      }
    }
    SolveReport rep = newton_solve(p, init, opt);
    if (!note.empty()) rep.message = rep.message.empty() ? note : rep.message + "; " + note;
    reports.push_back(std::move(rep));
  }

  // dedupe converged solutions, keep failures at the tail
  std::vector<SolveReport> conv, fail;
  for (SolveReport& r : reports) (r.converged ? conv : fail).push_back(std::move(r));
  std::stable_sort(conv.begin(), conv.end(), [](const SolveReport& a, const SolveReport& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    return norm2(a.u) < norm2(b.u);
  });
  std::vector<SolveReport> out;
  for (SolveReport& r : conv) {
    bool dup = false;
    for (SolveReport& kept : out) {
      Field diff = r.u;
      for (std::size_t c = 0; c < diff.size(); ++c) diff[c] -= kept.u[c];
      if (norm2(diff) <= 1e-5 * (1.0 + norm2(kept.u))) {
        ++kept.hits;
        dup = true;
        break;
      }
    }
    if (!dup) out.push_back(std::move(r));
  }
  for (SolveReport& r : fail) out.push_back(std::move(r));
  return out;
}

}  // namespace plab
