#include "core/linear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "core/errors.hpp"
#include "core/rng.hpp"
#include "core/summation.hpp"

namespace plab {

namespace {

double vec_dot(const std::vector<double>& a, const std::vector<double>& b) {
  return compensated_dot(a, b);
}

double vec_norm(const std::vector<double>& a) { return std::sqrt(vec_dot(a, a)); }

void axpy(double alpha, const Field& x, Field& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

void scale(Field& x, double alpha) {
  for (double& v : x) v *= alpha;
}

// SPD Jacobi preconditioner from a (possibly indefinite) diagonal
std::vector<double> abs_jacobi(const std::vector<double>& diag, std::size_t n) {
  std::vector<double> m(n, 1.0);
  if (diag.empty()) return m;
  double dmax = 0.0;
  for (double d : diag) dmax = std::max(dmax, std::abs(d));
  double floor = std::max(dmax * 1e-14, std::numeric_limits<double>::min());
  for (std::size_t i = 0; i < n; ++i) m[i] = 1.0 / std::max(std::abs(diag[i]), floor);
  return m;
}

}  // namespace

LinearOperator make_laplacian_operator(const Mask& mask) {
  LinearOperator op;
  op.n = mask.cell_count();
  op.psd_constant_kernel = true;
  op.jacobi.assign(mask.degree().begin(), mask.degree().end());
  int dmax = 0;
  for (int d : mask.degree()) dmax = std::max(dmax, d);
  op.norm_hint = 2.0 * dmax;
  op.apply = [&mask](const double* x, double* y) {
    int n = mask.cell_count();
    std::fill(y, y + n, 0.0);
    for (const Face& f : mask.faces()) {
      double d = x[f.a] - x[f.b];
      y[f.a] += d;
      y[f.b] -= d;
    }
  };
  return op;
}

LinearOperator make_hessian_operator(const Problem& p, const Field& u) {
  LinearOperator op;
  const Mask& mask = *p.mask;
  op.n = mask.cell_count();
  op.jacobi = hessian_diag(p, u);
  double dmax = 0.0;
  for (double d : op.jacobi) dmax = std::max(dmax, std::abs(d));
  int degmax = 0;
  for (int d : mask.degree()) degmax = std::max(degmax, d);
  op.norm_hint = dmax + p.epsilon * degmax;  // Gershgorin
  double eps = p.epsilon, h2 = mask.spacing() * mask.spacing();
  // capture f'(u) once; the nonlinearity evaluation is the expensive part
  auto fp = std::make_shared<std::vector<double>>(u.size());
  for (std::size_t c = 0; c < u.size(); ++c) (*fp)[c] = p.nonlin.fprime(u[c]);
  op.apply = [&mask, eps, h2, fp](const double* x, double* y) {
    int n = mask.cell_count();
    std::fill(y, y + n, 0.0);
    for (const Face& f : mask.faces()) {
      double d = x[f.a] - x[f.b];
      y[f.a] += d;
      y[f.b] -= d;
    }
    for (int c = 0; c < n; ++c) y[c] = eps * y[c] - h2 * (*fp)[c] * x[c];
  };
  return op;
}

LinearOperator make_stability_operator(const Problem& p, const Field& u) {
  // same operator scaled by 1/h^2 so indices are comparable across grids
  LinearOperator op = make_hessian_operator(p, u);
  double h2 = p.mask->spacing() * p.mask->spacing();
  auto inner = op.apply;
  op.apply = [inner, h2, n = op.n](const double* x, double* y) {
    inner(x, y);
    for (int c = 0; c < n; ++c) y[c] /= h2;
  };
  for (double& d : op.jacobi) d /= h2;
  op.norm_hint /= h2;
  return op;
}

void project_mean_zero(Field& v) {
  double m = mean(v);
  for (double& x : v) x -= m;
}

CgResult cg_solve(const LinearOperator& op, const Field& rhs, double tol, int maxit,
                  bool project) {
  if (static_cast<int>(rhs.size()) != op.n) throw InvalidArgument("cg_solve: rhs size mismatch");
  CgResult res;
  double bnorm = vec_norm(rhs);
  if (project) {
    double m = mean(rhs);
    if (std::abs(m) * std::sqrt(static_cast<double>(op.n)) > 1e-10 * std::max(bnorm, 1e-300))
      throw InvalidArgument("cg_solve: projection requested but rhs does not have zero mean");
  }
  res.x.assign(op.n, 0.0);
  if (bnorm == 0.0) {
    res.converged = true;
    return res;
  }

  std::vector<double> prec = abs_jacobi(op.jacobi, rhs.size());
  Field r = rhs, z(op.n), p(op.n), Ap(op.n);
  if (project) project_mean_zero(r);
  for (int i = 0; i < op.n; ++i) z[i] = prec[i] * r[i];
  if (project) project_mean_zero(z);
  p = z;
  double rz = vec_dot(r, z);
  double rnorm = vec_norm(r);

  for (int it = 0; it < maxit && rnorm > tol * bnorm; ++it) {
    op(p, Ap);
    if (project) project_mean_zero(Ap);
    double pAp = vec_dot(p, Ap);
    if (!(pAp > 0.0)) {
      res.indefinite = true;
      break;
    }
    double alpha = rz / pAp;
    axpy(alpha, p, res.x);
    axpy(-alpha, Ap, r);
    if (project) project_mean_zero(res.x);
    for (int i = 0; i < op.n; ++i) z[i] = prec[i] * r[i];
    if (project) project_mean_zero(z);
    double rz_next = vec_dot(r, z);
    double beta = rz_next / rz;
    rz = rz_next;
    for (int i = 0; i < op.n; ++i) p[i] = z[i] + beta * p[i];
    rnorm = vec_norm(r);
    res.iterations = it + 1;
  }

  // true residual, not the recurrence
  op(res.x, Ap);
  if (project) project_mean_zero(Ap);
  for (int i = 0; i < op.n; ++i) Ap[i] -= rhs[i];
  res.relative_residual = vec_norm(Ap) / bnorm;
  res.converged = !res.indefinite && res.relative_residual <= tol * 1.000001;
  return res;
}

MinresResult minres_solve(const LinearOperator& op, const Field& rhs, double tol, int maxit) {
  if (static_cast<int>(rhs.size()) != op.n) throw InvalidArgument("minres_solve: rhs size mismatch");
  MinresResult res;
  res.x.assign(op.n, 0.0);
  double bnorm = vec_norm(rhs);
  if (bnorm == 0.0) {
    res.converged = true;
    return res;
  }
  std::vector<double> prec = abs_jacobi(op.jacobi, rhs.size());
  auto apply_prec = [&prec](const Field& v, Field& out) {
    out.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = prec[i] * v[i];
  };

  // Paige-Saunders MINRES with SPD preconditioning
  Field r1 = rhs, r2 = rhs, y(op.n), v(op.n), w(op.n, 0.0), w1(op.n, 0.0), w2(op.n, 0.0), tmp(op.n);
  apply_prec(r1, y);
  double beta1 = vec_dot(r1, y);
  if (beta1 < 0.0) throw InvalidArgument("minres_solve: preconditioner is not positive definite");
  beta1 = std::sqrt(beta1);
  if (beta1 == 0.0) {
    res.converged = true;
    return res;
  }
  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0, oldeps = 0.0;

  for (int itn = 1; itn <= maxit; ++itn) {
    double s = 1.0 / beta;
    for (int i = 0; i < op.n; ++i) v[i] = s * y[i];
    op(v, tmp);
    if (itn >= 2) axpy(-beta / oldb, r1, tmp);
    double alfa = vec_dot(v, tmp);
    axpy(-alfa / beta, r2, tmp);
    r1 = r2;
    r2 = tmp;
    apply_prec(r2, y);
    oldb = beta;
    double bb = vec_dot(r2, y);
    if (bb < 0.0) throw NoConvergence("minres_solve: preconditioner lost positive definiteness");
    beta = std::sqrt(bb);

    oldeps = epsln;
    double delta = cs * dbar + sn * alfa;
    double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    double gamma = std::sqrt(gbar * gbar + beta * beta);
    gamma = std::max(gamma, std::numeric_limits<double>::epsilon());
    cs = gbar / gamma;
    sn = beta / gamma;
    double phi = cs * phibar;
    phibar = sn * phibar;

    w1 = w2;
    w2 = w;
    for (int i = 0; i < op.n; ++i) w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
    axpy(phi, w, res.x);
    res.iterations = itn;
    if (phibar <= tol * beta1) break;
  }

  op(res.x, tmp);
  for (int i = 0; i < op.n; ++i) tmp[i] -= rhs[i];
  res.relative_residual = vec_norm(tmp) / bnorm;
  res.converged = res.relative_residual <= tol * 10.0;  // preconditioned estimate vs true norm
  return res;
}

void dense_symmetric_eig(std::vector<double> a, int n, std::vector<double>& values,
                         std::vector<double>& vectors) {
  vectors.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) vectors[static_cast<std::size_t>(i) * n + i] = 1.0;
  auto at = [&a, n](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };
  auto vt = [&vectors, n](int i, int j) -> double& {
    return vectors[static_cast<std::size_t>(j) * n + i];  // column j = eigenvector j
  };

  double fro = 0.0;
  for (double x : a) fro += x * x;
  fro = std::sqrt(fro);
  double stop = std::max(1e-28 * fro, 1e-300);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
    off = std::sqrt(2.0 * off);
    if (off <= std::max(1e-14 * fro, stop)) break;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) {
        double apq = at(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        double app = at(p, p), aqq = at(q, q);
        double tau = (aqq - app) / (2.0 * apq);
        double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = t * c;
        for (int i = 0; i < n; ++i) {
          double aip = at(i, p), aiq = at(i, q);
          at(i, p) = c * aip - s * aiq;
          at(i, q) = s * aip + c * aiq;
        }
        for (int j = 0; j < n; ++j) {
          double apj = at(p, j), aqj = at(q, j);
          at(p, j) = c * apj - s * aqj;
          at(q, j) = s * apj + c * aqj;
        }
        for (int i = 0; i < n; ++i) {
          double vip = vt(i, p), viq = vt(i, q);
          vt(i, p) = c * vip - s * viq;
          vt(i, q) = s * vip + c * viq;
        }
      }
  }

  // sort ascending by eigenvalue, permuting eigenvector columns along
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return at(i, i) < at(j, j); });
  values.resize(n);
  std::vector<double> sorted(vectors.size());
  for (int j = 0; j < n; ++j) {
    values[j] = at(order[j], order[j]);
    for (int i = 0; i < n; ++i)
      sorted[static_cast<std::size_t>(j) * n + i] = vectors[static_cast<std::size_t>(order[j]) * n + i];
  }
  vectors.swap(sorted);
}

namespace {

// Modified Gram-Schmidt (two passes), dropping near-dependent columns.
// Columns with an optional mean-zero constraint stay in that subspace.
void orthonormalize(std::vector<Field>& cols, bool keep_mean_zero, double drop_tol = 1e-10) {
  std::vector<Field> out;
  for (Field& c : cols) {
    if (keep_mean_zero) project_mean_zero(c);
    double before = vec_norm(c);
    if (before == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass)
      for (const Field& q : out) axpy(-vec_dot(q, c), q, c);
    double after = vec_norm(c);
    if (after <= drop_tol * before) continue;
    scale(c, 1.0 / after);
    out.push_back(std::move(c));
  }
  cols.swap(out);
}

void fill_random_columns(std::vector<Field>& cols, int want, int n, std::uint64_t seed,
                         bool keep_mean_zero) {
  std::uint64_t stream = 0;
  while (static_cast<int>(cols.size()) < want) {
    Rng rng = Rng::stream(seed, 1000 + stream++);
    Field v(n);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    cols.push_back(std::move(v));
    orthonormalize(cols, keep_mean_zero);
    if (stream > static_cast<std::uint64_t>(4 * want + 16)) break;  // n exhausted
  }
}

struct RitzOut {
  std::vector<double> values;
  std::vector<Field> vectors;
};

// Rayleigh-Ritz on an orthonormal basis; returns ascending pairs.
RitzOut rayleigh_ritz(const LinearOperator& op, const std::vector<Field>& basis,
                      std::vector<Field>* a_vectors_out) {
  int m = static_cast<int>(basis.size());
  std::vector<Field> ab(m);
  for (int i = 0; i < m; ++i) op(basis[i], ab[i]);
  std::vector<double> g(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) {
      double v = vec_dot(basis[i], ab[j]);
      g[static_cast<std::size_t>(i) * m + j] = v;
      g[static_cast<std::size_t>(j) * m + i] = v;
    }
  std::vector<double> values, rot;
  dense_symmetric_eig(std::move(g), m, values, rot);
  RitzOut out;
  out.values = values;
  out.vectors.assign(m, Field(basis.empty() ? 0 : basis[0].size(), 0.0));
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      double cij = rot[static_cast<std::size_t>(j) * m + i];
      if (cij != 0.0) axpy(cij, basis[i], out.vectors[j]);
    }
  if (a_vectors_out) {
    a_vectors_out->assign(m, Field(basis.empty() ? 0 : basis[0].size(), 0.0));
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i) {
        double cij = rot[static_cast<std::size_t>(j) * m + i];
        if (cij != 0.0) axpy(cij, ab[i], (*a_vectors_out)[j]);
      }
  }
  return out;
}

EigenResult dense_path(const LinearOperator& op, const EigenOptions& opt) {
  int n = op.n;
  std::vector<double> a(static_cast<std::size_t>(n) * n);
  Field e(n, 0.0), col(n);
  for (int j = 0; j < n; ++j) {
    e[j] = 1.0;
    op(e, col);
    e[j] = 0.0;
    for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i) * n + j] = col[i];
  }
  std::vector<double> values, vectors;
  dense_symmetric_eig(std::move(a), n, values, vectors);
  EigenResult res;
  res.converged = true;
  res.op_norm_estimate = std::max(std::abs(values.front()), std::abs(values.back()));
  int k = std::min(opt.k, n);
  for (int j = 0; j < k; ++j) {
    Field v(vectors.begin() + static_cast<std::ptrdiff_t>(j) * n,
            vectors.begin() + static_cast<std::ptrdiff_t>(j + 1) * n);
    res.pairs.push_back({values[j], std::move(v)});
    res.residuals.push_back(0.0);
  }
  return res;
}

// Block LOBPCG for a general symmetric operator.
EigenResult lobpcg(const LinearOperator& op, const EigenOptions& opt) {
  int n = op.n;
  int k = std::min(opt.k, n);
  int b = std::min(n, k + std::max(0, opt.block_extra));
  std::vector<double> prec = abs_jacobi(op.jacobi, static_cast<std::size_t>(n));

  std::vector<Field> X = opt.initial;
  X.resize(std::min<std::size_t>(X.size(), static_cast<std::size_t>(b)));
  X.push_back(Field(n, 1.0));  // constants are often near-extremal here
  orthonormalize(X, false);
  fill_random_columns(X, b, n, opt.seed, false);

  std::vector<Field> P;
  EigenResult res;
  std::vector<Field> ax;

  for (int iter = 0; iter < opt.maxit; ++iter) {
    res.iterations = iter + 1;
    RitzOut rr = rayleigh_ritz(op, X, &ax);
    int m = static_cast<int>(rr.values.size());
    res.op_norm_estimate = std::max({res.op_norm_estimate, std::abs(rr.values.front()),
                                     std::abs(rr.values.back())});
    double norm_scale = std::max(res.op_norm_estimate, 1e-300);

    std::vector<Field> W;
    res.residuals.assign(k, 0.0);
    bool all_ok = true;
    std::vector<Field> R(m);
    for (int j = 0; j < m; ++j) {
      R[j] = ax[j];
      axpy(-rr.values[j], rr.vectors[j], R[j]);
      double rn = vec_norm(R[j]);
      if (j < k) {
        res.residuals[j] = rn;
        if (rn > opt.tol * norm_scale) all_ok = false;
      }
    }
    if (all_ok) {
      res.converged = true;
      for (int j = 0; j < k; ++j) res.pairs.push_back({rr.values[j], rr.vectors[j]});
      return res;
    }

    for (int j = 0; j < std::min(m, b); ++j) {
      Field w = R[j];
      for (int i = 0; i < n; ++i) w[i] *= prec[i];
      W.push_back(std::move(w));
    }

    std::vector<Field> S;
    for (int j = 0; j < std::min<int>(m, b); ++j) S.push_back(rr.vectors[j]);
    int x_cols = static_cast<int>(S.size());
    for (Field& w : W) S.push_back(std::move(w));
    for (Field& p : P) S.push_back(std::move(p));
    orthonormalize(S, false);

    RitzOut rr2 = rayleigh_ritz(op, S, nullptr);
    int keep = std::min<int>(b, static_cast<int>(rr2.values.size()));
    std::vector<Field> Xn(rr2.vectors.begin(), rr2.vectors.begin() + keep);

    // implicit P: the part of the new block outside the previous X span
    P.clear();
    for (int j = 0; j < keep; ++j) {
      Field pj = Xn[j];
      for (int i = 0; i < x_cols; ++i) axpy(-vec_dot(S[i], pj), S[i], pj);
      P.push_back(std::move(pj));
    }
    orthonormalize(P, false);
    if (static_cast<int>(P.size()) > b) P.resize(b);

    X.swap(Xn);
    orthonormalize(X, false);
    if (static_cast<int>(X.size()) < k) fill_random_columns(X, b, n, opt.seed + iter + 1, false);
  }

  // not converged: report best Ritz estimates
  RitzOut rr = rayleigh_ritz(op, X, nullptr);
  for (int j = 0; j < std::min<int>(k, static_cast<int>(rr.values.size())); ++j)
    res.pairs.push_back({rr.values[j], rr.vectors[j]});
  res.converged = false;
  return res;
}

// Inverse subspace iteration for PSD operators with a constant kernel.
// Returns k pairs with the exact (0, constant) pair first.
EigenResult inverse_iteration_kernel(const LinearOperator& op, const EigenOptions& opt) {
  int n = op.n;
  int k = std::min(opt.k, n);
  EigenResult res;
  double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  Field ones(n, inv_sqrt_n);
  {
    Field a0;
    op(ones, a0);
    res.pairs.push_back({vec_dot(ones, a0), ones});
    res.residuals.push_back(vec_norm(a0));
  }
  res.op_norm_estimate = std::max(op.norm_hint, 1e-300);
  if (k == 1) {
    res.converged = true;
    return res;
  }

  int want = k - 1;
  int b = std::min(n - 1, want + std::max(1, opt.block_extra));
  std::vector<Field> X = opt.initial;
  orthonormalize(X, true);
  fill_random_columns(X, b, n, opt.seed, true);

  double cg_tol = 1e-6;
  for (int iter = 0; iter < opt.maxit; ++iter) {
    res.iterations = iter + 1;
    std::vector<Field> Y;
    for (const Field& x : X) {
      CgResult cg = cg_solve(op, x, cg_tol, 40 * static_cast<int>(std::sqrt(double(n))) + 200, true);
      Y.push_back(std::move(cg.x));
    }
    orthonormalize(Y, true);
    if (Y.empty()) break;
    RitzOut rr = rayleigh_ritz(op, Y, nullptr);

    bool all_ok = static_cast<int>(rr.values.size()) >= want;
    std::vector<double> resid(rr.values.size());
    Field av;
    for (std::size_t j = 0; j < rr.values.size(); ++j) {
      op(rr.vectors[j], av);
      axpy(-rr.values[j], rr.vectors[j], av);
      resid[j] = vec_norm(av);
      if (static_cast<int>(j) < want && resid[j] > opt.tol * res.op_norm_estimate) all_ok = false;
    }
    X = rr.vectors;
    if (all_ok) {
      for (int j = 0; j < want; ++j) {
        res.pairs.push_back({rr.values[j], rr.vectors[j]});
        res.residuals.push_back(resid[j]);
      }
      res.converged = true;
      return res;
    }
    // tighten the inner solves as the outer iteration closes in
    double worst = 0.0;
    for (int j = 0; j < std::min<int>(want, static_cast<int>(resid.size())); ++j)
      worst = std::max(worst, resid[j] / res.op_norm_estimate);
    cg_tol = std::clamp(0.05 * worst, 1e-13, 1e-6);
  }

  if (!X.empty()) {
    RitzOut rr = rayleigh_ritz(op, X, nullptr);
    for (int j = 0; j < std::min<int>(want, static_cast<int>(rr.values.size())); ++j)
      res.pairs.push_back({rr.values[j], rr.vectors[j]});
  }
  res.converged = false;
  return res;
}

}  // namespace

EigenResult smallest_eigenpairs(const LinearOperator& op, const EigenOptions& opt) {
  if (op.n <= 0) throw InvalidArgument("smallest_eigenpairs: empty operator");
  if (opt.k < 1) throw InvalidArgument("smallest_eigenpairs: k must be >= 1");
  int block = opt.k + std::max(0, opt.block_extra);
  if (op.n <= std::max(opt.densify_threshold, 3 * block + 2)) return dense_path(op, opt);
  if (op.psd_constant_kernel) return inverse_iteration_kernel(op, opt);
  return lobpcg(op, opt);
}

}  // namespace plab
