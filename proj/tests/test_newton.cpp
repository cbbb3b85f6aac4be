#include <cmath>
#include <limits>
#include <sstream>

#include "core/analysis.hpp"
#include "core/errors.hpp"
#include "core/io.hpp"
#include "core/newton.hpp"
#include "core/rng.hpp"
#include "core/summation.hpp"
#include "doctest.h"

using namespace plab;

namespace {

Field random_field(const Mask& m, Rng& rng, double lo, double hi) {
  Field u(m.cell_count());
  for (double& v : u) v = rng.uniform(lo, hi);
  return u;
}

// |h^2 sum f(u)| must be explained by the residual via the telescoping sum
void check_divergence_identity(const Problem& p, const SolveReport& rep) {
  CompensatedSum s;
  for (double v : rep.u) s.add(p.nonlin.f(v));
  double h2 = p.mask->spacing() * p.mask->spacing();
  double lhs = std::abs(h2 * s.value());
  double n = static_cast<double>(p.mask->cell_count());
  CHECK(lhs <= std::sqrt(n) * rep.residual_norm * 1.01 + 1e-12);
}

}  // namespace

TEST_CASE("starting at the constant root converges immediately") {
  Mask m = Mask::build(ShapeSpec::parse("rect:1x1"), 1.0 / 32.0);
  Nonlinearity nl = Nonlinearity::exponential(1.0);
  Problem p(m, nl, 0.1);
  double xi = find_positive_root(nl);
  SolveReport rep = newton_solve(p, constant_field(m, xi));
  CHECK(rep.converged);
  CHECK(rep.iterations <= 1);
  CHECK(rep.constant);
  CHECK(rep.constant_value == doctest::Approx(xi).epsilon(1e-10));
  CHECK(rep.energy == doctest::Approx(k_xi(1.0) * m.area()).epsilon(1e-10));
  // xi is always unstable: the constant direction has -f'(xi) < 0
  CHECK(rep.stability_index == doctest::Approx(-(std::exp(xi) - 2.0)).epsilon(1e-8));
  check_divergence_identity(p, rep);
}

TEST_CASE("rigid nonlinearities drive every start to the constant zero") {
  Mask m = Mask::build(ShapeSpec::parse("lshape"), 1.0 / 16.0);
  Rng rng(88);
  for (Nonlinearity nl : {Nonlinearity::cubic(), Nonlinearity::linear(-1.0)}) {
    Problem p(m, nl, 0.05);
    SolveOptions opt;
    opt.tol = 1e-11;
    SolveReport rep = newton_solve(p, random_field(m, rng, -1.0, 2.0), opt);
    CHECK(rep.converged);
    CHECK(rep.constant);
    // the cubic root is degenerate (f'(0) = 0), so the converged constant
    // scatters like tol^(1/3); only its scale is meaningful
    CHECK(std::abs(rep.constant_value) <= 1e-3);
    RigidityReport rig = rigidity_check(p, rep.u, 0.0);
    CHECK(std::abs(rig.dirichlet_term) <= 1e-8);
    CHECK(std::abs(rig.pairing_term) <= 1e-8);
    // a zero of f with f'(0) <= 0 is spectrally stable
    CHECK(rep.stability_index >= -1e-10);
    check_divergence_identity(p, rep);
  }
}

TEST_CASE("stability index at the trivial solution equals delta") {
  Mask m = Mask::build(ShapeSpec::parse("rect:1x1"), 1.0 / 24.0);
  Problem p(m, Nonlinearity::exponential(0.7), 0.05);
  SolveReport rep = newton_solve(p, constant_field(m, 0.0));
  CHECK(rep.converged);
  CHECK(rep.iterations == 0);
  CHECK(rep.stability_index == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("saturating starts are reported, never silent") {
  Mask m = Mask::build(ShapeSpec::parse("rect:1x1"), 0.25);
  Problem p(m, Nonlinearity::exponential(1.0), 0.1);
  SolveReport rep = newton_solve(p, constant_field(m, 800.0));
  CHECK_FALSE(rep.converged);
  CHECK(rep.message.find("guard") != std::string::npos);

  // below the field guard but ||f(u)||^2 overflows: the saturation branch
  SolveReport sat = newton_solve(p, constant_field(m, 500.0));
  CHECK_FALSE(sat.converged);
  CHECK(sat.message.find("saturat") != std::string::npos);

  Field bad = constant_field(m, 0.0);
  bad[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(newton_solve(p, bad), InvalidArgument);
}

TEST_CASE("constants strategy finds exactly the two constant solutions") {
  Mask m = Mask::build(ShapeSpec::parse("rect:1x1"), 1.0 / 16.0);
  Nonlinearity nl = Nonlinearity::exponential(1.0);
  Problem p(m, nl, 1.0);  // far above threshold: constants only
  std::vector<SolveReport> reps = multistart(p, StartStrategy::constants, 16, 4);
  int converged = 0;
  for (const SolveReport& r : reps) converged += r.converged;
  REQUIRE(converged == 2);
  CHECK(reps[0].constant);
  CHECK(std::abs(reps[0].constant_value) <= 1e-8);
  CHECK(reps[1].constant);
  CHECK(reps[1].constant_value == doctest::Approx(find_positive_root(nl)).epsilon(1e-8));
  CHECK(reps[0].energy < reps[1].energy);  // sorted by energy
  CHECK(reps[0].hits + reps[1].hits == 16);
}

TEST_CASE("single-signed exp nonlinearity admits only the trivial solution") {
  Mask m = Mask::build(ShapeSpec::parse("rect:1x1"), 1.0 / 16.0);
  for (double delta : {0.0, -0.5}) {
    Problem p(m, Nonlinearity::exponential(delta), 0.5);
    SolveOptions opt;
    opt.tol = 1e-10;  // the delta=0 root is degenerate, keep the scatter small
    std::vector<SolveReport> reps = multistart(p, StartStrategy::random_fields, 12, 21, opt);
    int converged = 0;
    for (const SolveReport& r : reps)
      if (r.converged) {
        ++converged;
        CHECK(r.constant);
        CHECK(std::abs(r.constant_value) <= 1e-4);
      }
    CHECK(converged >= 1);
  }
}

TEST_CASE("multistart is deterministic for a fixed seed") {
  Mask m = Mask::build(ShapeSpec::parse("lshape"), 0.1);
  Problem p(m, Nonlinearity::cubic(), 0.05);
  auto run = [&] {
    std::ostringstream csv;
    write_reports_csv(csv, multistart(p, StartStrategy::random_fields, 8, 7));
    return csv.str();
  };
  std::string a = run(), b = run();
  CHECK(a == b);
  std::ostringstream other;
  write_reports_csv(other, multistart(p, StartStrategy::random_fields, 8, 8));
  CHECK(other.str().substr(0, 5) == "index");
}

TEST_CASE("classification thresholds") {
  Mask m = Mask::build(ShapeSpec::parse("rect:1x1"), 0.125);
  double xi = 1.2564312086261696;
  Field u = constant_field(m, xi);
  double value = 0.0;
  CHECK(classify_constant(u, &value));
  CHECK(value == doctest::Approx(xi).epsilon(1e-14));
  Rng rng(5);
  Field noisy = u;
  for (double& v : noisy) v += 1e-9 * rng.uniform(-1.0, 1.0);
  CHECK(classify_constant(noisy, &value));
  Field spread = u;
  spread[0] += 0.5;
  CHECK_FALSE(classify_constant(spread, &value));
}

TEST_CASE("random positive-times-nonincreasing products census to constants") {
  // f(t) = (a + b t^2)(c - d t) with a, b, c, d > 0 passes the sampled
  // rigidity condition at xi = c/d; every converged solution must classify
  // constant, whatever the start
  Mask m = Mask::build(ShapeSpec::parse("lshape"), 1.0 / 12.0);
  Rng rng(314);
  for (int trial = 0; trial < 5; ++trial) {
    double a = rng.uniform(0.2, 2.0), b = rng.uniform(0.2, 2.0);
    double d = rng.uniform(0.5, 1.5), c = rng.uniform(0.3, 1.0) * d;  // xi = c/d <= 1
    // (a + b t^2)(c - d t) = ac - ad t + bc t^2 - bd t^3
    Nonlinearity f = Nonlinearity::polynomial({a * c, -a * d, b * c, -b * d});
    double xi = c / d;
    CHECK(check_rigidity_condition(f, xi, -10.0, 10.0, 2000).holds);
    Problem p(m, f, 0.05);
    std::vector<SolveReport> reps = multistart(p, StartStrategy::random_fields, 6, 1000 + trial);
    int converged = 0;
    for (const SolveReport& r : reps) {
      if (!r.converged) continue;
      ++converged;
      CHECK(r.constant);
    }
    CHECK(converged >= 1);
  }
}

TEST_CASE("spikes census on the disk finds both constants and a pattern") {
  Mask m = Mask::build(ShapeSpec::parse("disk:r=1"), 1.0 / 64.0);
  Nonlinearity nl = Nonlinearity::exponential(1.0);
  Problem p(m, nl, 0.01);
  std::vector<SolveReport> reps = multistart(p, StartStrategy::spikes, 12, 7);
  double xi = find_positive_root(nl);
  double k_area = k_xi(1.0) * m.area();
  bool saw_zero = false, saw_xi = false, saw_pattern = false;
  int distinct = 0;
  for (const SolveReport& r : reps) {
    if (!r.converged) continue;
    ++distinct;
    if (r.constant && std::abs(r.constant_value) <= 1e-6) saw_zero = true;
    if (r.constant && std::abs(r.constant_value - xi) <= 1e-6) saw_xi = true;
    if (!r.constant) {
      saw_pattern = true;
      CHECK(r.energy > 0.0);
      CHECK(r.energy < k_area);
      CHECK(r.positive);
      CHECK(r.stability_index < 0.0);
    }
  }
  CHECK(distinct >= 3);
  CHECK(saw_zero);
  CHECK(saw_xi);
  CHECK(saw_pattern);
}

TEST_CASE("eigen-perturbed starts relax back to constants above threshold") {
  Mask m = Mask::build(ShapeSpec::parse("rect:1x1"), 1.0 / 16.0);
  Nonlinearity nl = Nonlinearity::exponential(1.0);
  Problem p(m, nl, 1.0);
  std::vector<SolveReport> reps = multistart(p, StartStrategy::eigen_perturbed, 8, 3);
  int converged = 0;
  for (const SolveReport& r : reps)
    if (r.converged) {
      ++converged;
      CHECK(r.constant);
    }
  CHECK(converged >= 1);
}
