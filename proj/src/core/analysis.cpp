#include "core/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "core/errors.hpp"
#include "core/summation.hpp"

namespace plab {

namespace {
constexpr double kPi = std::numbers::pi;
}

SpectralReport neumann_lambda2(const Mask& mask, double tol, int maxit) {
  LinearOperator lap = make_laplacian_operator(mask);
  EigenOptions eo;
  eo.k = std::min(3, mask.cell_count());  // constant + two nonzero (cluster detection)
  eo.tol = tol;
  eo.maxit = maxit;
  Field xs(mask.cell_count()), ys(mask.cell_count());
  for (std::int32_t c = 0; c < mask.cell_count(); ++c) {
    xs[c] = mask.cell_x(c);
    ys[c] = mask.cell_y(c);
  }
  eo.initial = {xs, ys};
  EigenResult er = smallest_eigenpairs(lap, eo);
  if (er.pairs.size() < 2) throw NoConvergence("neumann_lambda2: eigensolver returned too few pairs");

  SpectralReport rep;
  double h2 = mask.spacing() * mask.spacing();
  rep.lambda1 = er.pairs[0].value / h2;
  rep.lambda2 = er.pairs[1].value / h2;
  rep.converged = er.converged;
  rep.iterations = er.iterations;
  rep.eigenvector2 = er.pairs[1].vector;

  // degenerate cluster: pick the representative aligned with the x moment
  if (er.pairs.size() >= 3 &&
      er.pairs[2].value - er.pairs[1].value <= 1e-8 * std::max(1.0, std::abs(er.pairs[2].value))) {
    Field xm = xs;
    project_mean_zero(xm);
    double a = dot(xm, er.pairs[1].vector);
    double b = dot(xm, er.pairs[2].vector);
    double nrm = std::hypot(a, b);
    if (nrm > 1e-10 * norm2(xm)) {
      Field mix(mask.cell_count());
      for (std::int32_t c = 0; c < mask.cell_count(); ++c)
        mix[c] = (a * er.pairs[1].vector[c] + b * er.pairs[2].vector[c]) / nrm;
      rep.eigenvector2 = std::move(mix);
    }
  }
  return rep;
}

double stability_index(const Problem& p, const Field& u, double tol, bool* converged) {
  LinearOperator stab = make_stability_operator(p, u);
  EigenOptions eo;
  eo.k = 1;
  eo.tol = tol;
  eo.maxit = 1200;
  eo.block_extra = 3;
  EigenResult er = smallest_eigenpairs(stab, eo);
  if (converged) *converged = er.converged;
  if (er.pairs.empty()) throw NoConvergence("stability_index: eigensolver returned nothing");
  return er.pairs.front().value;
}

RigidityReport rigidity_check(const Problem& p, const Field& u, double xi) {
  const Mask& mask = *p.mask;
  double dirichlet = dirichlet_sum(mask, u);
  double h2 = mask.spacing() * mask.spacing();
  CompensatedSum s;
  for (double v : u) s.add(p.nonlin.f(v) * (v - xi));
  double pairing = h2 / p.epsilon * s.value();
  return {dirichlet, pairing, dirichlet - pairing};
}

AnalyticConstants analytic_constants(double delta) {
  if (!(delta >= 0.0)) throw InvalidArgument("analytic_constants: needs delta >= 0");
  AnalyticConstants c;
  c.delta = delta;
  if (delta > 0.0) {
    c.xi = find_positive_root(Nonlinearity::exponential(delta));
    c.k_xi = k_xi(delta);
    c.f_prime_xi = std::exp(c.xi) - (1.0 + delta);
  } else {
    // no nonzero constant solution at delta = 0; the cap constants still exist
    c.xi = c.k_xi = c.f_prime_xi = std::numeric_limits<double>::quiet_NaN();
  }
  c.A = 0.5 * kPi * (1.0 + delta / 6.0);
  c.B = 2.0 * kPi;
  c.x_star = 80.0 * c.A / c.B;
  c.C2 = 6400.0 * c.A * c.A * c.A / (3.0 * c.B * c.B);
  return c;
}

double epsilon_threshold(double delta, double lambda2) {
  if (!(lambda2 > 0.0)) throw InvalidArgument("epsilon_threshold: lambda2 must be positive");
  AnalyticConstants c = analytic_constants(delta);
  return c.f_prime_xi / lambda2;
}

namespace {

// f'(at the positive root), where the family has one
double f_prime_at_positive_root(const Nonlinearity& nl) {
  if (nl.family() == Family::exp_family && nl.delta() > 0.0) {
    double xi = find_positive_root(nl);
    return std::exp(xi) - (1.0 + nl.delta());
  }
  if (nl.family() == Family::power) return nl.exponent() - 1.0;
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::vector<SweepRow> epsilon_sweep(const Mask& mask, const Nonlinearity& nonlin,
                                    const std::vector<double>& epsilons, const SweepOptions& opt) {
  if (epsilons.empty()) throw InvalidArgument("epsilon_sweep: empty epsilon list");
  SpectralReport spectral = neumann_lambda2(mask);
  double fpxi = f_prime_at_positive_root(nonlin);

  std::vector<SweepRow> rows;
  for (double eps : epsilons) {
    SweepRow row;
    row.epsilon = eps;
    row.threshold_ratio = eps * spectral.lambda2 / fpxi;
    Problem p(mask, nonlin, eps);

    std::vector<SolveReport> census;
    try {
      census = multistart(p, opt.strategy, opt.multistart_n, opt.seed, opt.solve);
    } catch (const Error& e) {
      row.note = std::string("multistart failed: ") + e.what();
    }

    try {
      MpaOptions mo = opt.mpa;
      mo.tol = opt.solve.tol;
      MpaResult mpa = mpa_run(p, mo);
      row.mpa_converged = mpa.report.converged;
      row.c_epsilon = mpa.report.converged ? mpa.report.energy
                                           : std::numeric_limits<double>::quiet_NaN();
      if (!mpa.note.empty()) row.note += (row.note.empty() ? "" : "; ") + mpa.note;
      if (mpa.report.converged) {
        // the polished pass solution joins the census pool
        bool dup = false;
        for (SolveReport& kept : census) {
          if (!kept.converged) continue;
          Field diff = mpa.report.u;
          for (std::size_t c = 0; c < diff.size(); ++c) diff[c] -= kept.u[c];
          if (norm2(diff) <= 1e-5 * (1.0 + norm2(kept.u))) {
            ++kept.hits;
            dup = true;
            break;
          }
        }
        if (!dup) census.push_back(mpa.report);
      }
    } catch (const Error& e) {
      row.c_epsilon = std::numeric_limits<double>::quiet_NaN();
      row.note += (row.note.empty() ? "" : "; ") + std::string("mpa failed: ") + e.what();
    }

    for (const SolveReport& r : census) {
      if (!r.converged) continue;
      ++row.distinct_count;
      if (!r.constant) row.has_nonconstant = true;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace plab
