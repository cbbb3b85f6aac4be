#include "core/mountain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

#include "core/errors.hpp"
#include "core/rng.hpp"
#include "core/summation.hpp"

namespace plab {

namespace {

constexpr double kPi = std::numbers::pi;

// e^x - 1 - x - x^2/2 - x^3/6 - x^4/24, stable near 0
double exp_remainder4(double x) {
  if (x > 700.0) throw SaturationError("exp_remainder4: argument past the exp guard");
  if (std::abs(x) < 1.0) {
    CompensatedSum s;
    double term = x * x * x * x * x / 120.0;  // x^5/5!
    for (int k = 5; std::abs(term) > 1e-20 * (std::abs(s.value()) + 1e-300) || k < 8; ++k) {
      s.add(term);
      term *= x / (k + 1);
      if (k > 60) break;
    }
    return s.value();
  }
  return std::exp(x) - 1.0 - x - 0.5 * x * x - x * x * x / 6.0 - x * x * x * x / 24.0;
}

}  // namespace

Field build_tent(const Mask& mask, double eps, double cx, double cy) {
  if (!(eps > 0.0)) throw InvalidArgument("build_tent: eps must be positive");
  double rad = std::sqrt(eps);
  double h = mask.spacing();
  Field out = constant_field(mask, 0.0);

  int i_lo = static_cast<int>(std::floor((cx - rad - mask.origin_x()) / h)) - 1;
  int i_hi = static_cast<int>(std::ceil((cx + rad - mask.origin_x()) / h)) + 1;
  int j_lo = static_cast<int>(std::floor((cy - rad - mask.origin_y()) / h)) - 1;
  int j_hi = static_cast<int>(std::ceil((cy + rad - mask.origin_y()) / h)) + 1;
  for (int j = j_lo; j <= j_hi; ++j)
    for (int i = i_lo; i <= i_hi; ++i) {
      double x = mask.origin_x() + (i + 0.5) * h - cx;
      double y = mask.origin_y() + (j + 0.5) * h - cy;
      double r = std::sqrt(x * x + y * y);
      if (r >= rad) continue;
      std::int32_t c = mask.cell_index(i, j);
      if (c < 0) {
        char buf[128];
        std::snprintf(buf, sizeof buf,
                      "build_tent: support disk of radius %.4g at (%.4g, %.4g) leaves the domain",
                      rad, cx, cy);
        throw InvalidArgument(buf);
      }
      out[c] = (1.0 - r / rad) / eps;
    }
  return out;
}

std::pair<double, double> default_tent_center(const Mask& mask, double eps) {
  CompensatedSum sx, sy;
  for (std::int32_t c = 0; c < mask.cell_count(); ++c) {
    sx.add(mask.cell_x(c));
    sy.add(mask.cell_y(c));
  }
  double n = static_cast<double>(mask.cell_count());
  std::int32_t deep = mask.deepest_cell();
  std::pair<double, double> candidates[] = {{sx.value() / n, sy.value() / n},
                                            {mask.cell_x(deep), mask.cell_y(deep)}};
  for (auto [cx, cy] : candidates) {
    try {
      build_tent(mask, eps, cx, cy);
      return {cx, cy};
    } catch (const InvalidArgument&) {
    }
  }
  throw InvalidArgument("default_tent_center: no tent support of this eps fits the domain");
}

TentMoments tent_moments(double eps, int k) {
  if (!(eps > 0.0)) throw InvalidArgument("tent_moments: eps must be positive");
  if (k < 1) throw InvalidArgument("tent_moments: k must be >= 1");
  double mass = 2.0 * kPi / (static_cast<double>(k + 2) * (k + 1)) * std::pow(eps, 1.0 - k);
  return {mass, kPi / (eps * eps)};
}

double g_series(double delta, double eps, double t, int max_terms) {
  if (!(eps > 0.0)) throw InvalidArgument("g_series: eps must be positive");
  if (t < 0.0) throw InvalidArgument("g_series: t must be >= 0");
  double x = t / eps;
  if (x > 700.0) throw SaturationError("g_series: t/eps past the exp guard");
  double quad = kPi / (2.0 * eps) * (1.0 + delta / 6.0) * t * t;
  if (x == 0.0) return 0.0;
  CompensatedSum tail;
  double term = x * x * x / 120.0;  // x^3/(3+2)!
  int k = 3;
  for (; k <= max_terms; ++k) {
    tail.add(term);
    double next = term * x / (k + 3);
    if (next <= 1e-16 * std::abs(tail.value()) && x < k + 3) break;
    term = next;
  }
  if (k > max_terms)
    throw NoConvergence("g_series: series did not settle within the term cap");
  return quad - 2.0 * kPi * eps * tail.value();
}

EtaPair eta_and_cap(double delta, double x) {
  if (x < 0.0) throw InvalidArgument("eta_and_cap: x must be >= 0");
  double A = 0.5 * kPi * (1.0 + delta / 6.0);
  double B = 2.0 * kPi;
  if (x == 0.0) return {0.0, 0.0};
  double eta = A * x * x - (2.0 * kPi / (x * x)) * exp_remainder4(x);
  double cap = A * x * x - B * x * x * x / 120.0;
  return {eta, cap};
}

namespace {

struct Path {
  std::vector<Field> v;
  std::vector<double> e;

  int max_index() const {
    int m = 0;
    for (std::size_t i = 1; i < e.size(); ++i)
      if (e[i] > e[m]) m = static_cast<int>(i);
    return m;
  }
};

double safe_energy(const Problem& p, const Field& u) {
  try {
    double e = energy(p, u);
    return std::isfinite(e) ? e : std::numeric_limits<double>::infinity();
  } catch (const SaturationError&) {
    return std::numeric_limits<double>::infinity();
  }
}

// uniform arclength resampling of the polygonal path, endpoints pinned
void resample_uniform(const Problem& p, Path& path) {
  int np = static_cast<int>(path.v.size());
  std::vector<double> cum(np, 0.0);
  for (int i = 1; i < np; ++i) {
    Field d = path.v[i];
    for (std::size_t c = 0; c < d.size(); ++c) d[c] -= path.v[i - 1][c];
    cum[i] = cum[i - 1] + norm2(d);
  }
  if (cum.back() <= 0.0) return;
  Path out;
  out.v.resize(np);
  out.e.resize(np);
  out.v.front() = path.v.front();
  out.v.back() = path.v.back();
  int seg = 0;
  for (int i = 1; i + 1 < np; ++i) {
    double target = cum.back() * static_cast<double>(i) / (np - 1);
    while (seg + 2 < np && cum[seg + 1] < target) ++seg;
    double span = cum[seg + 1] - cum[seg];
    double w = span > 0.0 ? (target - cum[seg]) / span : 0.0;
    Field mix = path.v[seg];
    for (std::size_t c = 0; c < mix.size(); ++c)
      mix[c] = (1.0 - w) * mix[c] + w * path.v[seg + 1][c];
    out.v[i] = std::move(mix);
  }
  out.e.front() = path.e.front();
  out.e.back() = path.e.back();
  for (int i = 1; i + 1 < np; ++i) out.e[i] = safe_energy(p, out.v[i]);
  path = std::move(out);
}

}  // namespace

MpaResult mpa_run(const Problem& p, const MpaOptions& opt) {
  const Mask& mask = *p.mask;
  if (opt.path_points < 4) throw InvalidArgument("mpa_run: need at least 4 path points");
  if (p.nonlin.family() == Family::exp_family) {
    if (!(p.nonlin.delta() > 0.0))
      throw InvalidArgument("mpa_run: exp family needs delta > 0 for mountain geometry");
  } else if (p.nonlin.family() != Family::power) {
    throw InvalidArgument("mpa_run: only the exp and power families have the required geometry");
  }

  MpaResult result;
  int np = opt.path_points + 1;
  Path path;

  // tent-ray initial path when a tent fits, else the constant segment to the
  // first constant with negative energy
  Field tent;
  bool have_tent = false;
  try {
    if (opt.seed != 0) {
      Rng rng(opt.seed);
      for (int attempt = 0; attempt < 80 && !have_tent; ++attempt) {
        std::int32_t c = static_cast<std::int32_t>(rng.next_u64() % mask.cell_count());
        try {
          tent = build_tent(mask, p.epsilon, mask.cell_x(c), mask.cell_y(c));
          have_tent = true;
        } catch (const InvalidArgument&) {
        }
      }
    }
    if (!have_tent) {
      auto [cx, cy] = default_tent_center(mask, p.epsilon);
      tent = build_tent(mask, p.epsilon, cx, cy);
      have_tent = true;
    }
  } catch (const InvalidArgument&) {
    have_tent = false;
  }

  double t_end = 0.0;
  if (have_tent) {
    // scale the ray until the far endpoint is downhill
    double t = p.epsilon;
    bool found = false;
    Field trial(tent.size());
    for (int d = 0; d < 10; ++d, t *= 2.0) {
      if (t / p.epsilon > 500.0) break;
      for (std::size_t c = 0; c < tent.size(); ++c) trial[c] = t * tent[c];
      if (safe_energy(p, trial) < 0.0) {
        t_end = t;
        found = true;
        break;
      }
    }
    have_tent = found;
  }

  if (have_tent) {
    result.tent_path = true;
    path.v.resize(np);
    path.e.resize(np);
    for (int i = 0; i < np; ++i) {
      double t = t_end * static_cast<double>(i) / (np - 1);
      path.v[i] = tent;
      for (double& x : path.v[i]) x *= t;
      path.e[i] = safe_energy(p, path.v[i]);
    }
  } else {
    result.tent_path = false;
    result.note = "no tent ray reaches negative energy; using the constant segment";
    double kbar = 0.0;
    bool found = false;
    for (double k = 0.5; k <= 400.0; k += 0.5) {
      if (safe_energy(p, constant_field(mask, k)) < 0.0) {
        kbar = k;
        found = true;
        break;
      }
    }
    if (!found)
      throw NoConvergence("mpa_run: no constant with negative energy found (no pass geometry?)");
    path.v.resize(np);
    path.e.resize(np);
    for (int i = 0; i < np; ++i) {
      path.v[i] = constant_field(mask, kbar * static_cast<double>(i) / (np - 1));
      path.e[i] = safe_energy(p, path.v[i]);
    }
  }

  if (!(path.e.back() < 0.0))
    throw NoConvergence("mpa_run: endpoint energy is not negative after path setup");

  if (opt.trace) *opt.trace << "iter,max_index,max_energy,grad_norm_at_max\n";

  double h = mask.spacing();
  Field grad_m, trial;
  double plateau_ref = std::numeric_limits<double>::infinity();
  int plateau_age = 0;
  int iter = 0;
  for (; iter < opt.max_path_iters; ++iter) {
    int m = path.max_index();
    if (m == 0 || m == np - 1) {
      result.note += (result.note.empty() ? "" : "; ");
      result.note += "path maximum hit an endpoint";
      break;
    }
    gradient(p, path.v[m], grad_m);
    double gn = norm2(grad_m);
    double fnorm = 0.0;
    {
      CompensatedSum f2;
      for (double x : path.v[m]) f2.add(p.nonlin.f(x) * p.nonlin.f(x));
      fnorm = std::sqrt(f2.value());
    }
    if (opt.trace) {
      char line[128];
      std::snprintf(line, sizeof line, "%d,%d,%.12g,%.12g\n", iter, m, path.e[m], gn);
      *opt.trace << line;
    }
    if (gn <= 10.0 * opt.tol * h * std::max(1.0, fnorm)) break;

    // runner-up energy: descend the max vertex until a neighbor overtakes it
    double second = -std::numeric_limits<double>::infinity();
    for (int i = 1; i + 1 < np; ++i)
      if (i != m) second = std::max(second, path.e[i]);
    double pre_step_max = path.e[m];

    bool moved = false;
    for (int sub = 0; sub < 12; ++sub) {
      std::vector<double> diag = hessian_diag(p, path.v[m]);
      double dmax = 0.0;
      for (double d : diag) dmax = std::max(dmax, std::abs(d));
      double step = 1.0 / (1.0 + dmax);
      bool sub_moved = false;
      for (int bt = 0; bt < 45; ++bt, step *= 0.5) {
        trial = path.v[m];
        for (std::size_t c = 0; c < trial.size(); ++c) trial[c] -= step * grad_m[c];
        double e_trial = safe_energy(p, trial);
        if (e_trial <= path.e[m] - 1e-4 * step * gn * gn) {
          path.v[m].swap(trial);
          path.e[m] = e_trial;
          sub_moved = true;
          break;
        }
        if (step * gn < 1e-14 * (1.0 + norm2(path.v[m]))) break;
      }
      if (!sub_moved) break;
      moved = true;
      if (path.e[m] <= second) break;
      gradient(p, path.v[m], grad_m);
      gn = norm2(grad_m);
    }
    if (!moved) {
      result.note += (result.note.empty() ? "" : "; ");
      result.note += "descent stalled at the max vertex";
      break;
    }

    if (opt.resample_every > 0 && (iter + 1) % opt.resample_every == 0) {
      Path backup = path;
      resample_uniform(p, path);
      double new_max = path.e[path.max_index()];
      if (new_max > pre_step_max + 1e-12 * std::max(1.0, std::abs(pre_step_max)))
        path = std::move(backup);  // interpolation must not raise the pass estimate
    }

    // plateau exit: the polish handles the sharp finish
    double cur_max = path.e[path.max_index()];
    if (cur_max > plateau_ref - 1e-10 * std::max(1.0, std::abs(plateau_ref))) {
      if (++plateau_age >= 25) {
        ++iter;
        break;
      }
    } else {
      plateau_ref = cur_max;
      plateau_age = 0;
    }
  }
  result.path_iterations = iter;

  int best = path.max_index();
  result.path_max_energy = path.e[best];
  SolveOptions nopt = opt.newton;
  nopt.tol = opt.tol;
  result.report = newton_solve(p, path.v[best], nopt);
  return result;
}

}  // namespace plab
