// plab: command-line front end over the patternlab C API.
//
// Subcommands: solve, multistart, mpa, sweep, eigen, verify, oracle, render.
// Flags are --key value (or --key=value); an optional --config FILE holds
// "key = value" lines that flags override. All randomness flows from --seed;
// repeated invocations write byte-identical artifacts.
//
// Exit codes: 0 success, 1 solver non-convergence, 2 invalid input.

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "patternlab.h"

namespace {

struct UsageError {
  std::string message;
};
struct SolverFailure {
  std::string message;
};

void usage(std::FILE* to) {
  std::fputs(
      "usage: plab <command> [--flag value ...]\n"
      "\n"
      "commands:\n"
      "  solve       run one damped-Newton solve from a chosen start\n"
      "  multistart  seeded census of solutions, deduplicated\n"
      "  mpa         mountain-pass run (tent path + descent + polish)\n"
      "  sweep       mpa + census across a list of diffusion values\n"
      "  eigen       first nonzero Neumann eigenvalue and eigenvector\n"
      "  verify      sampled rigidity-condition check plus a census\n"
      "  oracle      closed-form constants and onset thresholds\n"
      "  render      turn a field dump into a PGM heatmap\n"
      "\n"
      "common flags (defaults in brackets):\n"
      "  --config PATH     key = value file, overridden by flags\n"
      "  --shape SPEC      rect:WxH | square | disk:r=R | annulus:rin=A,rout=B |\n"
      "                    lshape:s=S  [square]\n"
      "  --h VALUE         cell size [0.015625]\n"
      "  --f SPEC          exp:delta=D | power:p=P | cubic | linear:mu=M |\n"
      "                    poly:c0,c1,...  [exp:delta=1]\n"
      "  --eps VALUE       diffusion epsilon [0.05]\n"
      "  --tol VALUE       solver tolerance [1e-8]\n"
      "  --maxit N         Newton iteration cap [80]\n"
      "  --seed N          random seed [0]; for mpa, 0 keeps the canonical\n"
      "                    tent center and nonzero randomizes it\n"
      "  --n N             number of starts [50]\n"
      "  --out DIR         output directory [.]\n"
      "\n"
      "per command:\n"
      "  solve       --init constant:V | tent:PEAK | file:PATH  [constant:0]\n"
      "  multistart  --strategy constants|random|spikes|eigen-perturbed  [spikes]\n"
      "  mpa         --path-points N  [40]\n"
      "  sweep       --eps-list V1,V2,...   --strategy ...  [spikes]\n"
      "  verify      --strategy ...  [random]   --xi VALUE  [positive root or 0]\n"
      "  oracle      --delta D  [1]   (thresholds use --h)\n"
      "  render      --in DUMP --to IMAGE.pgm\n",
      to);
}

class Options {
 public:
  Options(int argc, char** argv) {
    // pass 1: find --config, load it; pass 2: flags override
    for (int i = 0; i < argc; ++i) {
      if (std::strcmp(argv[i], "--config") == 0 && i + 1 < argc) load_config(argv[i + 1]);
    }
    for (int i = 0; i < argc; ++i) {
      std::string arg = argv[i];
      if (arg.rfind("--", 0) != 0) throw UsageError{"unexpected argument '" + arg + "'"};
      std::string key = arg.substr(2), value;
      if (auto eq = key.find('='); eq != std::string::npos) {
        value = key.substr(eq + 1);
        key = key.substr(0, eq);
      } else {
        if (i + 1 >= argc) throw UsageError{"flag '" + arg + "' needs a value"};
        value = argv[++i];
      }
      if (key.empty()) throw UsageError{"empty flag name"};
      map_[key] = value;
    }
    map_.erase("config");
  }

  std::string str(const std::string& key, const std::string& fallback) {
    used_.insert(key);
    auto it = map_.find(key);
    return it == map_.end() ? fallback : it->second;
  }

  double num(const std::string& key, double fallback) {
    used_.insert(key);
    auto it = map_.find(key);
    if (it == map_.end()) return fallback;
    return parse_number(it->second, key);
  }

  long integer(const std::string& key, long fallback) {
    double v = num(key, static_cast<double>(fallback));
    long n = static_cast<long>(v);
    if (static_cast<double>(n) != v) throw UsageError{"flag --" + key + " wants an integer"};
    return n;
  }

  std::vector<double> list(const std::string& key) {
    used_.insert(key);
    auto it = map_.find(key);
    if (it == map_.end()) return {};
    std::vector<double> out;
    std::string item;
    std::stringstream ss(it->second);
    while (std::getline(ss, item, ',')) out.push_back(parse_number(item, key));
    return out;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : map_)
      if (!used_.count(key)) throw UsageError{"unknown flag '--" + key + "'"};
  }

 private:
  static double parse_number(const std::string& text, const std::string& key) {
    try {
      std::size_t pos = 0;
      double v = std::stod(text, &pos);
      if (pos != text.size()) throw std::invalid_argument(text);
      return v;
    } catch (const std::exception&) {
      throw UsageError{"cannot parse number '" + text + "' for --" + key};
    }
  }

  void load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw UsageError{"cannot open config file '" + path + "'"};
    std::string line;
    while (std::getline(f, line)) {
      if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto trim = [](std::string s) {
        s.erase(0, s.find_first_not_of(" \t\r"));
        if (auto last = s.find_last_not_of(" \t\r"); last != std::string::npos) s.resize(last + 1);
        return s;
      };
      std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
      if (!key.empty()) map_[key] = value;
    }
  }

  std::map<std::string, std::string> map_;
  mutable std::set<std::string> used_;
};

[[noreturn]] void fail_status(pl_status status, const std::string& context) {
  std::string message = context + ": " + pl_last_error();
  if (status == PL_ERR_INVALID_ARGUMENT || status == PL_ERR_IO) throw UsageError{message};
  throw SolverFailure{message};
}

void check(pl_status status, const std::string& context) {
  if (status != PL_OK) fail_status(status, context);
}

// RAII over the C handles
template <class T, void (*Destroy)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  explicit Handle(T* p) : ptr(p) {}
  ~Handle() { Destroy(ptr); }
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  Handle(Handle&& other) noexcept : ptr(std::exchange(other.ptr, nullptr)) {}
  Handle& operator=(Handle&& other) noexcept {
    if (this != &other) {
      Destroy(ptr);
      ptr = std::exchange(other.ptr, nullptr);
    }
    return *this;
  }
  T** out() { return &ptr; }
  operator T*() const { return ptr; }
};
using MaskH = Handle<pl_mask, pl_mask_destroy>;
using NonlinH = Handle<pl_nonlinearity, pl_nonlinearity_destroy>;
using ProblemH = Handle<pl_problem, pl_problem_destroy>;
using FieldH = Handle<pl_field, pl_field_destroy>;
using ReportH = Handle<pl_report, pl_report_destroy>;
using ListH = Handle<pl_report_list, pl_report_list_destroy>;
using SweepH = Handle<pl_sweep, pl_sweep_destroy>;

struct Workspace {
  MaskH mask;
  NonlinH nonlin;
  ProblemH problem;
  double eps = 0.0;
  double tol = 0.0;
  long maxit = 0;
  std::uint64_t seed = 0;
  long n = 0;
  std::string out_dir;
  std::string f_spec;
  std::string shape_spec;
};

Workspace common_setup(Options& opt, bool need_problem = true) {
  Workspace ws;
  ws.shape_spec = opt.str("shape", "square");
  ws.f_spec = opt.str("f", "exp:delta=1");
  double h = opt.num("h", 1.0 / 64.0);
  ws.eps = opt.num("eps", 0.05);
  ws.tol = opt.num("tol", 1e-8);
  ws.maxit = opt.integer("maxit", 80);
  ws.seed = static_cast<std::uint64_t>(opt.integer("seed", 0));
  ws.n = opt.integer("n", 50);
  ws.out_dir = opt.str("out", ".");
  std::error_code ec;
  std::filesystem::create_directories(ws.out_dir, ec);
  if (ec) throw UsageError{"cannot create output directory '" + ws.out_dir + "'"};

  check(pl_mask_create(ws.shape_spec.c_str(), h, ws.mask.out()), "building the mask");
  check(pl_nonlinearity_create(ws.f_spec.c_str(), ws.nonlin.out()), "parsing the nonlinearity");
  if (need_problem)
    check(pl_problem_create(ws.mask, ws.nonlin, ws.eps, ws.problem.out()), "assembling the problem");
  return ws;
}

std::string joined(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void print_report(const char* label, const pl_report* report) {
  std::printf("%s: converged=%d iterations=%d residual=%.12g energy=%.12g\n", label,
              pl_report_converged(report), pl_report_iterations(report),
              pl_report_residual(report), pl_report_energy(report));
  std::printf("  classification=%s constant_value=%.12g stability_index=%.12g\n",
              pl_report_is_constant(report) ? "constant" : "nonconstant",
              pl_report_constant_value(report), pl_report_stability_index(report));
  std::printf("  positive=%d min_u=%.12g max_u=%.12g\n", pl_report_positive(report),
              pl_report_min(report), pl_report_max(report));
  if (pl_report_message(report)[0]) std::printf("  note: %s\n", pl_report_message(report));
}

void dump_solution(const Workspace& ws, const pl_report* report) {
  FieldH field;
  check(pl_report_field(report, field.out()), "extracting the solution field");
  std::string txt = joined(ws.out_dir, "solution.txt");
  std::string pgm = joined(ws.out_dir, "solution.pgm");
  check(pl_field_write_text(field, txt.c_str()), "writing " + txt);
  check(pl_field_write_pgm(field, pgm.c_str()), "writing " + pgm);
  std::printf("wrote %s and %s\n", txt.c_str(), pgm.c_str());
}

int cmd_solve(Options& opt) {
  Workspace ws = common_setup(opt);
  std::string init_spec = opt.str("init", "constant:0");
  opt.reject_unknown();

  auto parse_value = [&](const std::string& text) {
    try {
      std::size_t pos = 0;
      double v = std::stod(text, &pos);
      if (pos != text.size()) throw std::invalid_argument(text);
      return v;
    } catch (const std::exception&) {
      throw UsageError{"cannot parse number '" + text + "' in --init " + init_spec};
    }
  };
  FieldH init;
  if (init_spec.rfind("constant:", 0) == 0) {
    check(pl_field_constant(ws.mask, parse_value(init_spec.substr(9)), init.out()),
          "building the initial field");
  } else if (init_spec.rfind("tent:", 0) == 0) {
    double peak = parse_value(init_spec.substr(5));
    check(pl_field_tent_auto(ws.mask, ws.eps, init.out()), "building the tent start");
    check(pl_field_scale(init, peak * ws.eps), "scaling the tent start");
  } else if (init_spec.rfind("file:", 0) == 0) {
    check(pl_field_read(ws.mask, init_spec.substr(5).c_str(), init.out()),
          "reading the initial field");
  } else {
    throw UsageError{"--init wants constant:V, tent:PEAK, or file:PATH"};
  }

  ReportH report;
  check(pl_newton_solve(ws.problem, init, ws.tol, static_cast<int>(ws.maxit), report.out()),
        "newton solve");
  print_report("solve", report);
  dump_solution(ws, report);
  return pl_report_converged(report) ? 0 : 1;
}

int cmd_multistart(Options& opt) {
  Workspace ws = common_setup(opt);
  std::string strategy = opt.str("strategy", "spikes");
  opt.reject_unknown();

  ListH list;
  check(pl_multistart(ws.problem, strategy.c_str(), static_cast<int>(ws.n), ws.seed, ws.tol,
                      static_cast<int>(ws.maxit), list.out()),
        "multistart");
  std::string csv = joined(ws.out_dir, "results.csv");
  check(pl_report_list_write_csv(list, csv.c_str()), "writing " + csv);

  int converged = 0, nonconstant = 0;
  for (int i = 0; i < pl_report_list_size(list); ++i) {
    const pl_report* r = pl_report_list_get(list, i);
    if (pl_report_converged(r)) {
      ++converged;
      if (!pl_report_is_constant(r)) ++nonconstant;
    }
  }
  std::printf("%d starts -> %d distinct converged solutions (%d nonconstant), %d failures\n",
              static_cast<int>(ws.n), converged, nonconstant,
              pl_report_list_size(list) - converged);
  for (int i = 0; i < pl_report_list_size(list); ++i) {
    const pl_report* r = pl_report_list_get(list, i);
    if (!pl_report_converged(r)) continue;
    std::printf("  #%d %s value=%.12g energy=%.12g stability=%.12g\n", i,
                pl_report_is_constant(r) ? "constant" : "nonconstant",
                pl_report_constant_value(r), pl_report_energy(r), pl_report_stability_index(r));
  }
  std::printf("wrote %s\n", csv.c_str());
  return converged > 0 ? 0 : 1;
}

int cmd_mpa(Options& opt) {
  Workspace ws = common_setup(opt);
  long path_points = opt.integer("path-points", 40);
  opt.reject_unknown();

  std::string trace = joined(ws.out_dir, "trace.csv");
  ReportH report;
  check(pl_mpa_run(ws.problem, static_cast<int>(path_points), ws.tol, ws.seed, trace.c_str(),
                   report.out()),
        "mountain-pass run");
  print_report("mpa", report);

  // position the pass energy against the constant-solution level
  double xi = 0.0, k = 0.0;
  if (pl_nonlinearity_positive_root(ws.nonlin, &xi) == PL_OK) {
    double f = 0, fp = 0, F = 0;
    check(pl_nonlinearity_eval(ws.nonlin, xi, &f, &fp, &F), "evaluating at the root");
    k = -F;  // energy density of the constant xi
    double e = pl_report_energy(report);
    double area = pl_mask_area(ws.mask);
    std::printf("pass level vs constants: 0 %s %.12g %s K_xi*area = %.12g\n",
                e > 0.0 ? "<" : ">=", e, e < k * area ? "<" : ">=", k * area);
  }
  std::printf("wrote %s\n", trace.c_str());
  dump_solution(ws, report);
  return pl_report_converged(report) ? 0 : 1;
}

int cmd_sweep(Options& opt) {
  Workspace ws = common_setup(opt, false);
  std::vector<double> epsilons = opt.list("eps-list");
  std::string strategy = opt.str("strategy", "spikes");
  opt.reject_unknown();
  if (epsilons.empty()) throw UsageError{"sweep needs --eps-list V1,V2,..."};

  SweepH sweep;
  check(pl_sweep_run(ws.mask, ws.nonlin, epsilons.data(), static_cast<int>(epsilons.size()),
                     strategy.c_str(), static_cast<int>(ws.n), ws.seed, ws.tol, sweep.out()),
        "sweep");
  std::string csv = joined(ws.out_dir, "sweep.csv");
  check(pl_sweep_write_csv(sweep, csv.c_str()), "writing " + csv);
  std::printf("%-18s %-18s %-8s %-11s %s\n", "epsilon", "c_epsilon", "distinct", "nonconstant",
              "threshold_ratio");
  for (int i = 0; i < pl_sweep_size(sweep); ++i) {
    std::printf("%-18.12g %-18.12g %-8d %-11d %.12g\n", pl_sweep_epsilon(sweep, i),
                pl_sweep_c_epsilon(sweep, i), pl_sweep_distinct_count(sweep, i),
                pl_sweep_has_nonconstant(sweep, i), pl_sweep_threshold_ratio(sweep, i));
    if (!pl_sweep_has_nonconstant(sweep, i))
      std::printf("  exploratory: no nonconstant solution found in %d starts "
                  "(absence of evidence, not nonexistence)\n",
                  static_cast<int>(ws.n));
    if (pl_sweep_note(sweep, i)[0]) std::printf("  note: %s\n", pl_sweep_note(sweep, i));
  }
  std::printf("wrote %s\n", csv.c_str());
  return 0;
}

int cmd_eigen(Options& opt) {
  Workspace ws = common_setup(opt, false);
  opt.reject_unknown();

  double lambda1 = 0, lambda2 = 0;
  FieldH evec;
  check(pl_lambda2(ws.mask, ws.tol, &lambda1, &lambda2, evec.out()), "eigensolve");
  std::printf("lambda1 = %.12g\nlambda2 = %.12g\n", lambda1, lambda2);
  std::string txt = joined(ws.out_dir, "eigenvector2.txt");
  std::string pgm = joined(ws.out_dir, "eigenvector2.pgm");
  check(pl_field_write_text(evec, txt.c_str()), "writing " + txt);
  check(pl_field_write_pgm(evec, pgm.c_str()), "writing " + pgm);
  std::printf("wrote %s and %s\n", txt.c_str(), pgm.c_str());
  return 0;
}

int cmd_verify(Options& opt) {
  Workspace ws = common_setup(opt);
  std::string strategy = opt.str("strategy", "random");
  double xi = opt.num("xi", std::numeric_limits<double>::quiet_NaN());
  opt.reject_unknown();

  if (std::isnan(xi)) {
    if (pl_nonlinearity_positive_root(ws.nonlin, &xi) != PL_OK) xi = 0.0;
  }
  int holds = 0;
  double worst_t = 0, worst_value = 0;
  check(pl_check_rigidity_condition(ws.nonlin, xi, -10.0, 10.0, 10001, &holds, &worst_t,
                                    &worst_value),
        "condition check");
  std::printf("f = %s on %s, eps = %.12g\n", ws.f_spec.c_str(), ws.shape_spec.c_str(), ws.eps);
  std::printf("sampled f(t)(t-xi) <= 0 at xi = %.12g on [-10, 10]: %s (worst %.12g at t = %.12g)\n",
              xi, holds ? "holds" : "fails", worst_value, worst_t);

  ListH list;
  check(pl_multistart(ws.problem, strategy.c_str(), static_cast<int>(ws.n), ws.seed, ws.tol,
                      static_cast<int>(ws.maxit), list.out()),
        "census");
  std::string csv = joined(ws.out_dir, "results.csv");
  check(pl_report_list_write_csv(list, csv.c_str()), "writing " + csv);

  int converged = 0;
  bool all_constant = true;
  std::printf("%-4s %-12s %-20s %-20s %-20s %-20s\n", "#", "class", "value", "energy",
              "dirichlet", "pairing");
  for (int i = 0; i < pl_report_list_size(list); ++i) {
    const pl_report* r = pl_report_list_get(list, i);
    if (!pl_report_converged(r)) continue;
    ++converged;
    FieldH u;
    check(pl_report_field(r, u.out()), "extracting a census field");
    double dirichlet = 0, pairing = 0, gap = 0;
    check(pl_rigidity_check(ws.problem, u, xi, &dirichlet, &pairing, &gap), "rigidity check");
    bool constant = pl_report_is_constant(r);
    all_constant = all_constant && constant;
    std::printf("%-4d %-12s %-20.12g %-20.12g %-20.12g %-20.12g\n", i,
                constant ? "constant" : "nonconstant", pl_report_constant_value(r),
                pl_report_energy(r), dirichlet, pairing);
  }
  std::printf("converged %d of %d starts; all constant: %s\n", converged, static_cast<int>(ws.n),
              all_constant ? "yes" : "no");
  if (holds && !all_constant)
    std::printf("NOTE: the sampled condition holds but a nonconstant solution was found\n");
  std::printf("wrote %s\n", csv.c_str());
  return converged > 0 ? 0 : 1;
}

int cmd_oracle(Options& opt) {
  double delta = opt.num("delta", 1.0);
  double h = opt.num("h", 1.0 / 64.0);
  opt.reject_unknown();

  pl_constants c;
  check(pl_analytic_constants(delta, &c), "computing constants");
  std::printf("delta        = %.12g\n", c.delta);
  std::printf("xi           = %.12g\n", c.xi);
  std::printf("K_xi         = %.12g\n", c.k_xi);
  std::printf("f'(xi)       = %.12g\n", c.f_prime_xi);
  std::printf("A            = %.12g\n", c.cap_a);
  std::printf("B            = %.12g\n", c.cap_b);
  std::printf("x_star       = %.12g\n", c.x_star);
  std::printf("C2           = %.12g\n", c.c2);

  if (c.xi == c.xi) {  // thresholds need the root
    std::printf("\nonset thresholds at h = %.12g (eps below ~threshold admits patterns):\n", h);
    std::printf("%-24s %-16s %-16s\n", "shape", "lambda2", "threshold");
    for (const char* shape : {"square", "rect:2x1", "disk:r=1"}) {
      pl_mask* mask = nullptr;
      check(pl_mask_create(shape, h, &mask), std::string("building ") + shape);
      double l1 = 0, l2 = 0, thr = 0;
      pl_status st = pl_lambda2(mask, 1e-8, &l1, &l2, nullptr);
      if (st == PL_OK) {
        check(pl_epsilon_threshold(delta, l2, &thr), "threshold");
        std::printf("%-24s %-16.10g %-16.10g\n", shape, l2, thr);
      } else {
        std::printf("%-24s (eigensolve failed: %s)\n", shape, pl_last_error());
      }
      pl_mask_destroy(mask);
    }
  }
  return 0;
}

int cmd_render(Options& opt) {
  std::string in = opt.str("in", "");
  std::string to = opt.str("to", "");
  opt.reject_unknown();
  if (in.empty() || to.empty()) throw UsageError{"render needs --in DUMP --to IMAGE.pgm"};
  check(pl_render_pgm(in.c_str(), to.c_str()), "rendering");
  std::printf("wrote %s\n", to.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    usage(stderr);
    return 2;
  }
  std::string command = argv[1];
  if (command == "--help" || command == "help" || command == "-h") {
    usage(stdout);
    return 0;
  }
  try {
    Options opt(argc - 2, argv + 2);
    if (command == "solve") return cmd_solve(opt);
    if (command == "multistart") return cmd_multistart(opt);
    if (command == "mpa") return cmd_mpa(opt);
    if (command == "sweep") return cmd_sweep(opt);
    if (command == "eigen") return cmd_eigen(opt);
    if (command == "verify") return cmd_verify(opt);
    if (command == "oracle") return cmd_oracle(opt);
    if (command == "render") return cmd_render(opt);
    throw UsageError{"unknown command '" + command + "'"};
  } catch (const UsageError& e) {
    std::fprintf(stderr, "plab: %s\n", e.message.c_str());
    std::fprintf(stderr, "run 'plab --help' for usage\n");
    return 2;
  } catch (const SolverFailure& e) {
    std::fprintf(stderr, "plab: %s\n", e.message.c_str());
    return 1;
  }
}
