// Exercises the extern-C surface only, the way an external client would.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "patternlab.h"

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("capi_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream out;
  out << f.rdbuf();
  return out.str();
}

}  // namespace

TEST_CASE("mask lifecycle and geometry through the C surface") {
  pl_mask* mask = nullptr;
  REQUIRE(pl_mask_create("rect:1x1", 0.1, &mask) == PL_OK);
  CHECK(pl_mask_nx(mask) == 10);
  CHECK(pl_mask_ny(mask) == 10);
  CHECK(pl_mask_cell_count(mask) == 100);
  CHECK(pl_mask_face_count(mask) == 180);
  CHECK(pl_mask_area(mask) == doctest::Approx(1.0));
  TempFile dump("mask.txt");
  CHECK(pl_mask_write_text(mask, dump.path.c_str()) == PL_OK);
  CHECK(slurp(dump.path).substr(0, 9) == "10 10 0.1");
  pl_mask_destroy(mask);
  pl_mask_destroy(nullptr);  // always safe
}

TEST_CASE("errors come back as codes with messages") {
  pl_mask* mask = nullptr;
  pl_status st = pl_mask_create("blob:r=1", 0.1, &mask);
  CHECK(st == PL_ERR_INVALID_ARGUMENT);
  CHECK(std::string(pl_last_error()).find("blob") != std::string::npos);
  CHECK(std::string(pl_status_name(st)) == "invalid argument");

  pl_nonlinearity* nl = nullptr;
  REQUIRE(pl_nonlinearity_create("exp:delta=1", &nl) == PL_OK);
  double f = 0.0;
  CHECK(pl_nonlinearity_eval(nl, 705.0, &f, nullptr, nullptr) == PL_ERR_SATURATION);
  pl_nonlinearity_destroy(nl);

  CHECK(pl_mask_create(nullptr, 0.1, &mask) == PL_ERR_INVALID_ARGUMENT);
}

TEST_CASE("nonlinearity values and roots") {
  pl_nonlinearity* nl = nullptr;
  REQUIRE(pl_nonlinearity_create("exp:delta=1", &nl) == PL_OK);
  double f = 0, fp = 0, F = 0;
  REQUIRE(pl_nonlinearity_eval(nl, 1.0, &f, &fp, &F) == PL_OK);
  double e = std::exp(1.0);
  CHECK(f == doctest::Approx(e - 3.0).epsilon(1e-14));
  CHECK(fp == doctest::Approx(e - 2.0).epsilon(1e-14));
  CHECK(F == doctest::Approx(e - 3.0).epsilon(1e-14));

  double xi = 0.0;
  REQUIRE(pl_nonlinearity_positive_root(nl, &xi) == PL_OK);
  CHECK(xi == doctest::Approx(1.25643).epsilon(2e-5));
  double k = 0.0;
  REQUIRE(pl_exp_k_xi(1.0, &k) == PL_OK);
  CHECK(k == doctest::Approx(0.32213).epsilon(1e-3));

  int holds = -1;
  double worst_t = 0, worst_v = 0;
  REQUIRE(pl_check_rigidity_condition(nl, 0.0, -10.0, 10.0, 10000, &holds, &worst_t, &worst_v) ==
          PL_OK);
  CHECK(holds == 0);
  int sign = 9;
  REQUIRE(pl_check_fixed_sign(nl, -10.0, 10.0, 10000, &holds, &sign) == PL_OK);
  CHECK(holds == 0);
  pl_nonlinearity_destroy(nl);

  pl_nonlinearity* cubic = nullptr;
  REQUIRE(pl_nonlinearity_create("cubic", &cubic) == PL_OK);
  REQUIRE(pl_check_rigidity_condition(cubic, 0.0, -10.0, 10.0, 10000, &holds, nullptr, nullptr) ==
          PL_OK);
  CHECK(holds == 1);
  CHECK(pl_nonlinearity_positive_root(cubic, &xi) == PL_ERR_INVALID_ARGUMENT);
  pl_nonlinearity_destroy(cubic);
}

TEST_CASE("solve, report, field round trip, render") {
  pl_mask* mask = nullptr;
  pl_nonlinearity* nl = nullptr;
  pl_problem* problem = nullptr;
  REQUIRE(pl_mask_create("lshape", 1.0 / 16.0, &mask) == PL_OK);
  REQUIRE(pl_nonlinearity_create("cubic", &nl) == PL_OK);
  REQUIRE(pl_problem_create(mask, nl, 0.05, &problem) == PL_OK);

  pl_field* init = nullptr;
  REQUIRE(pl_field_constant(mask, 0.9, &init) == PL_OK);
  pl_report* report = nullptr;
  REQUIRE(pl_newton_solve(problem, init, 1e-10, 0, &report) == PL_OK);
  CHECK(pl_report_converged(report) == 1);
  CHECK(pl_report_is_constant(report) == 1);
  CHECK(std::abs(pl_report_constant_value(report)) <= 1e-3);
  CHECK(pl_report_stability_index(report) >= -1e-10);

  double dirichlet = -1, pairing = -1, gap = -1;
  pl_field* solution = nullptr;
  REQUIRE(pl_report_field(report, &solution) == PL_OK);
  REQUIRE(pl_rigidity_check(problem, solution, 0.0, &dirichlet, &pairing, &gap) == PL_OK);
  CHECK(std::abs(dirichlet) <= 1e-8);
  CHECK(std::abs(pairing) <= 1e-8);

  TempFile dump("solution.txt"), image("solution.pgm");
  REQUIRE(pl_field_write_text(solution, dump.path.c_str()) == PL_OK);
  pl_field* back = nullptr;
  REQUIRE(pl_field_read(mask, dump.path.c_str(), &back) == PL_OK);
  CHECK(pl_field_size(back) == pl_mask_cell_count(mask));
  REQUIRE(pl_render_pgm(dump.path.c_str(), image.path.c_str()) == PL_OK);
  CHECK(slurp(image.path).substr(0, 3) == "P5\n");

  pl_field_destroy(back);
  pl_field_destroy(solution);
  pl_report_destroy(report);
  pl_field_destroy(init);
  pl_problem_destroy(problem);
  pl_nonlinearity_destroy(nl);
  pl_mask_destroy(mask);
}

TEST_CASE("multistart census with deterministic CSV bytes") {
  pl_mask* mask = nullptr;
  pl_nonlinearity* nl = nullptr;
  pl_problem* problem = nullptr;
  REQUIRE(pl_mask_create("square", 1.0 / 16.0, &mask) == PL_OK);
  REQUIRE(pl_nonlinearity_create("exp:delta=1", &nl) == PL_OK);
  REQUIRE(pl_problem_create(mask, nl, 1.0, &problem) == PL_OK);

  std::string first;
  for (int run = 0; run < 2; ++run) {
    pl_report_list* list = nullptr;
    REQUIRE(pl_multistart(problem, "constants", 10, 42, 0.0, 0, &list) == PL_OK);
    REQUIRE(pl_report_list_size(list) >= 2);
    const pl_report* r0 = pl_report_list_get(list, 0);
    const pl_report* r1 = pl_report_list_get(list, 1);
    REQUIRE(r0 != nullptr);
    REQUIRE(r1 != nullptr);
    CHECK(pl_report_is_constant(r0) == 1);
    CHECK(pl_report_is_constant(r1) == 1);
    CHECK(pl_report_energy(r0) < pl_report_energy(r1));
    TempFile csv("census.csv");
    REQUIRE(pl_report_list_write_csv(list, csv.path.c_str()) == PL_OK);
    std::string bytes = slurp(csv.path);
    if (run == 0)
      first = bytes;
    else
      CHECK(bytes == first);
    pl_report_list_destroy(list);
  }
  CHECK(pl_report_list_get(nullptr, 0) == nullptr);

  pl_problem_destroy(problem);
  pl_nonlinearity_destroy(nl);
  pl_mask_destroy(mask);
}

TEST_CASE("mountain pass and spectral analysis through the C surface") {
  pl_mask* mask = nullptr;
  pl_nonlinearity* nl = nullptr;
  pl_problem* problem = nullptr;
  REQUIRE(pl_mask_create("disk:r=1", 1.0 / 48.0, &mask) == PL_OK);
  REQUIRE(pl_nonlinearity_create("exp:delta=1", &nl) == PL_OK);
  REQUIRE(pl_problem_create(mask, nl, 0.04, &problem) == PL_OK);

  TempFile trace("trace.csv");
  pl_report* report = nullptr;
  REQUIRE(pl_mpa_run(problem, 0, 0.0, 0, trace.path.c_str(), &report) == PL_OK);
  CHECK(pl_report_converged(report) == 1);
  CHECK(pl_report_is_constant(report) == 0);
  CHECK(pl_report_positive(report) == 1);
  CHECK(pl_report_energy(report) > 0.0);
  CHECK(pl_report_stability_index(report) < 0.0);
  CHECK(slurp(trace.path).substr(0, 4) == "iter");

  pl_constants constants;
  REQUIRE(pl_analytic_constants(1.0, &constants) == PL_OK);
  CHECK(pl_report_energy(report) < constants.c2 * 0.04);

  double lambda1 = -1, lambda2 = -1;
  REQUIRE(pl_lambda2(mask, 0.0, &lambda1, &lambda2, nullptr) == PL_OK);
  CHECK(std::abs(lambda1) <= 1e-10);
  double threshold = 0.0;
  REQUIRE(pl_epsilon_threshold(1.0, lambda2, &threshold) == PL_OK);
  CHECK(threshold > 0.04);  // patterns live below the onset diffusion here

  pl_field* u = nullptr;
  REQUIRE(pl_report_field(report, &u) == PL_OK);
  double index = 0.0;
  REQUIRE(pl_stability_index(problem, u, 0.0, &index) == PL_OK);
  CHECK(index == doctest::Approx(pl_report_stability_index(report)).epsilon(1e-6));

  pl_field_destroy(u);
  pl_report_destroy(report);
  pl_problem_destroy(problem);
  pl_nonlinearity_destroy(nl);
  pl_mask_destroy(mask);
}

TEST_CASE("tent helpers and scalar formulas") {
  double mass = 0, grad = 0;
  REQUIRE(pl_tent_moments(1.0, 2, &mass, &grad) == PL_OK);
  CHECK(mass == doctest::Approx(3.14159265 / 6.0).epsilon(1e-8));
  CHECK(grad == doctest::Approx(3.14159265).epsilon(1e-8));

  double g = -1.0;
  REQUIRE(pl_g_series(1.0, 0.05, 0.0, &g) == PL_OK);
  CHECK(g == 0.0);
  CHECK(pl_g_series(1.0, 0.001, 1.0, &g) == PL_ERR_SATURATION);

  double eta = 0, cap = 0;
  REQUIRE(pl_eta_and_cap(0.0, 20.0, &eta, &cap) == PL_OK);
  CHECK(cap == doctest::Approx(200.0 * 3.14159265358979 / 3.0).epsilon(1e-9));
  CHECK(eta <= cap);

  pl_mask* mask = nullptr;
  REQUIRE(pl_mask_create("disk:r=1", 1.0 / 32.0, &mask) == PL_OK);
  pl_field* tent = nullptr;
  REQUIRE(pl_field_tent_auto(mask, 0.09, &tent) == PL_OK);
  CHECK(pl_field_size(tent) == pl_mask_cell_count(mask));
  const double* values = pl_field_values(tent);
  double peak = 0.0;
  for (int i = 0; i < pl_field_size(tent); ++i) peak = std::max(peak, values[i]);
  CHECK(peak == doctest::Approx(1.0 / 0.09).epsilon(0.1));
  CHECK(pl_field_scale(tent, 0.5) == PL_OK);
  CHECK(pl_field_values(tent)[0] == doctest::Approx(0.5 * values[0]).epsilon(1e-14));

  pl_field* off = nullptr;
  CHECK(pl_field_tent(mask, 0.09, 0.9, 0.0, &off) == PL_ERR_INVALID_ARGUMENT);
  pl_field_destroy(tent);
  pl_mask_destroy(mask);
}

TEST_CASE("sweep rows through the C surface") {
  pl_mask* mask = nullptr;
  pl_nonlinearity* nl = nullptr;
  REQUIRE(pl_mask_create("disk:r=1", 1.0 / 24.0, &mask) == PL_OK);
  REQUIRE(pl_nonlinearity_create("exp:delta=1", &nl) == PL_OK);
  double epsilons[2] = {0.08, 10.0};
  pl_sweep* sweep = nullptr;
  REQUIRE(pl_sweep_run(mask, nl, epsilons, 2, "spikes", 5, 9, 0.0, &sweep) == PL_OK);
  REQUIRE(pl_sweep_size(sweep) == 2);
  CHECK(pl_sweep_epsilon(sweep, 0) == doctest::Approx(0.08));
  CHECK(pl_sweep_has_nonconstant(sweep, 0) == 1);
  CHECK(pl_sweep_has_nonconstant(sweep, 1) == 0);
  CHECK(pl_sweep_threshold_ratio(sweep, 1) > 1.0);
  TempFile csv("sweep.csv");
  REQUIRE(pl_sweep_write_csv(sweep, csv.path.c_str()) == PL_OK);
  CHECK(slurp(csv.path).substr(0, 7) == "epsilon");
  pl_sweep_destroy(sweep);
  pl_nonlinearity_destroy(nl);
  pl_mask_destroy(mask);
}
