#pragma once

#include "sparseplq/bench.hpp"
#include "sparseplq/data.hpp"
#include "sparseplq/ipadmm.hpp"
#include "sparseplq/pmm.hpp"
#include "sparseplq/problem.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparseplq::cli {

/// Malformed flag value (exit code 2).
class FlagError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CliConfig {
  // instance source
  std::string libsvm;
  std::string instance;
  Eigen::Index n = 200;
  Eigen::Index p = 1000;
  std::string cov = "ar:0.8";
  std::string signal = "fixed16";
  std::string noise = "gauss:2";
  double corrupt = 0.1;
  std::optional<Eigen::Index> corrupt_count;
  std::uint64_t seed = 1;
  std::optional<double> max_noise_inf;
  bool text = false;
  // model and solvers
  std::string solver = "pmm";
  std::optional<double> lambda;
  std::optional<double> lambda_factor;
  double a = 6.0;
  double mu = 1e-8;
  std::optional<double> rho;
  double eps = 0.7;
  std::optional<double> sigma;
  double tol = 1e-6;
  double tol_sparse = 1e-4;
  int k_max = 200;
  int admm_k_max = 20000;
  double eps_admm = 1e-5;
  double gamma1 = 0.1;
  double gamma2 = 0.1;
  double varrho = 0.8;
  // experiments
  std::string kind = "sparsity";
  std::vector<double> values;
  int seeds = 10;
  int threads = 1;
  std::vector<std::string> cells;
  Eigen::Index table1_p = 5000;
  std::vector<std::string> solvers{"pmm", "ipadmm"};
  bool eps_search = false;
  double eps_lo = 0.1;
  double eps_hi = 2.0;
  int grid = 20;
  std::optional<Eigen::Index> target_nz;
  // output
  std::string out;
  bool verbose = false;
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

inline double to_num(const std::string& s, const std::string& flag) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw FlagError("invalid number '" + s + "' in " + flag);
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// ar:<r> | cs:<alpha>
inline Covariance parse_cov(const std::string& s) {
  const auto f = detail::split(s, ':');
  if (f.size() == 2 && f[0] == "ar") return CovAR{detail::to_num(f[1], "--cov")};
  if (f.size() == 2 && f[0] == "cs") return CovCS{detail::to_num(f[1], "--cov")};
  throw FlagError("--cov expects ar:<r> or cs:<alpha>, got '" + s + "'");
}

/// fixed16 | gauss:<s*>:<variance>
inline Signal parse_signal(const std::string& s) {
  if (s == "fixed16") return SignalFixed16{};
  const auto f = detail::split(s, ':');
  if (f.size() == 3 && f[0] == "gauss") {
    const double sv = detail::to_num(f[1], "--signal");
    if (sv < 0 || sv != std::floor(sv)) throw FlagError("--signal sparsity must be a nonnegative integer");
    return SignalGaussian{static_cast<Eigen::Index>(sv), detail::to_num(f[2], "--signal")};
  }
  throw FlagError("--signal expects fixed16 or gauss:<s>:<var>, got '" + s + "'");
}

/// gauss:<var> | t:<scale>:<dof> | mn | laplace | cauchy | cauchy-scaled
inline NoiseSpec parse_noise(const std::string& s) {
  const auto f = detail::split(s, ':');
  NoiseSpec ns;
  if (f.size() == 2 && f[0] == "gauss") {
    ns.kind = NoiseKind::gaussian;
    ns.variance = detail::to_num(f[1], "--noise");
    if (!(ns.variance >= 0.0)) throw FlagError("--noise variance must be nonnegative");
    return ns;
  }
  if (f.size() == 3 && f[0] == "t") {
    ns.kind = NoiseKind::scaled_t;
    ns.scale = detail::to_num(f[1], "--noise");
    const double dof = detail::to_num(f[2], "--noise");
    if (!(dof >= 1.0) || dof != std::floor(dof)) throw FlagError("--noise t degrees of freedom must be a positive integer");
    ns.dof = static_cast<int>(dof);
    return ns;
  }
  if (f.size() == 1) {
    if (s == "mn") return NoiseSpec{NoiseKind::mixture_normal};
    if (s == "laplace") return NoiseSpec{NoiseKind::laplace};
    if (s == "cauchy") return NoiseSpec{NoiseKind::cauchy};
    if (s == "cauchy-scaled") return NoiseSpec{NoiseKind::cauchy_scaled_to_signal};
  }
  throw FlagError("--noise expects gauss:<var>, t:<scale>:<dof>, mn, laplace, cauchy or cauchy-scaled, got '" + s + "'");
}

inline SyntheticSpec synthetic_spec(const CliConfig& c) {
  SyntheticSpec s;
  s.n = c.n;
  s.p = c.p;
  s.cov = parse_cov(c.cov);
  s.signal = parse_signal(c.signal);
  s.noise = parse_noise(c.noise);
  if (c.corrupt_count) {
    s.corrupt_count = *c.corrupt_count;
  } else {
    if (!(c.corrupt >= 0.0 && c.corrupt <= 1.0)) throw FlagError("--corrupt is a fraction in [0,1]");
    s.corrupt_count = static_cast<Eigen::Index>(std::floor(c.corrupt * static_cast<double>(c.n)));
  }
  s.seed = c.seed;
  s.mu = c.mu;
  s.max_noise_inf = c.max_noise_inf;
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw FlagError(e.what());
  }
  return s;
}

inline PMMConfig pmm_config(const CliConfig& c) {
  PMMConfig p;
  p.gamma1_0 = c.gamma1;
  p.gamma2_0 = c.gamma2;
  p.varrho = c.varrho;
  p.tol = c.tol;
  p.tol_sparse = c.tol_sparse;
  p.k_max = c.k_max;
  return p;
}

inline ADMMConfig admm_config(const CliConfig& c) {
  ADMMConfig a;
  a.eps_smooth = c.eps;
  a.sigma = c.sigma;
  a.k_max = c.admm_k_max;
  a.eps_admm = c.eps_admm;
  return a;
}

/// Loaded problem with optional ground truth.
struct LoadedProblem {
  std::string label;
  std::optional<SyntheticInstance> synthetic;
  std::optional<ProblemInstance> plain;

  const ProblemInstance& inst() const { return synthetic ? synthetic->inst : *plain; }
  const Vector* x_true() const {
    return synthetic && synthetic->x_true.size() && synthetic->x_true.norm() > 0.0 ? &synthetic->x_true : nullptr;
  }
};

inline LoadedProblem load_problem(const CliConfig& c) {
  LoadedProblem lp;
  if (!c.libsvm.empty()) {
    lp.label = c.libsvm;
    lp.plain = load_libsvm(c.libsvm, c.mu);
  } else if (!c.instance.empty()) {
    lp.label = c.instance;
    SyntheticInstance si = load_instance(c.instance);
    if (si.inst.mu() != c.mu) si.inst = si.inst.with_mu(c.mu);
    lp.synthetic = std::move(si);
  } else {
    const SyntheticSpec s = synthetic_spec(c);
    std::ostringstream label;
    label << "synthetic/n=" << s.n << "/p=" << s.p << "/seed=" << s.seed;
    lp.label = label.str();
    lp.synthetic = make_instance(s);
  }
  return lp;
}

inline double default_lambda_factor(const CliConfig& c) {
  if (c.lambda_factor) return *c.lambda_factor;
  return c.libsvm.empty() ? 0.2 : 0.1;
}

inline void print_summary(std::ostream& out, const RunRecord& r) {
  out << "solver=" << r.solver << " nz=" << r.nz << " loss=" << std::setprecision(6) << r.loss;
  if (r.l2err) out << " l2err=" << *r.l2err << " fp=" << *r.fp << " fn=" << *r.fn;
  out << " lambda=" << r.lambda << " rho=" << r.rho;
  if (r.eps) out << " eps=" << *r.eps;
  out << " iters=" << r.iters << " termination=" << r.termination << " time=" << r.time_s << "s\n";
}

inline std::string defaults_text() {
  const CliConfig c;
  const PMMConfig p;
  const SNCGConfig& s = p.sncg;
  std::ostringstream os;
  os << "a = " << c.a << "\nmu = " << c.mu << "\nlambda-factor = 0.2 (synthetic), 0.12 (table1), 0.1 (libsvm)"
     << "\nlambda floor = 0.05\ngamma1 = " << p.gamma1_0 << "\ngamma2 = " << p.gamma2_0 << "\ngamma-min = " << p.gamma1_min
     << "\nvarrho = " << p.varrho << "\ntol = " << p.tol << "\ntol-sparse = " << p.tol_sparse << "\nk-max = " << p.k_max
     << "\neps-sncg (x0 problem) = " << p.eps_sncg_x0 << "\neps-sncg schedule = max(" << p.eps_sncg_floor << ", " << p.eps_sncg_decay << "^k * " << p.eps_sncg_start << ")"
     << "\nsncg: tau-bar = " << s.tau_bar << ", eta-bar = " << s.eta_bar << ", delta = " << s.delta
     << ", armijo = " << s.armijo_c << ", j-max = " << s.j_max << " (x0 problem: " << p.x0_jmax << ")" << ", direct-max = " << s.direct_max
     << "\nrho rule = max(1, 25/6 / ||x0||_inf) if n <= p, "
     << "max(1, 25/4 / ||x0||_inf) otherwise\neps = " << c.eps << "\nsigma = 4.5/eps\nadmm-k-max = " << c.admm_k_max
     << "\neps-admm = " << c.eps_admm << '\n';
  return os.str();
}

/// Reads `key = value` lines ('#' starts a comment) into flag arguments,
/// skipping keys already given explicitly on the command line.
inline std::vector<std::string> config_args(const std::string& path, const std::set<std::string>& explicit_keys) {
  std::ifstream in(path);
  if (!in) throw FlagError("cannot open config file " + path);
  std::vector<std::string> args;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FlagError(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw FlagError(path + ":" + std::to_string(lineno) + ": empty key");
    if (explicit_keys.count(key)) continue;
    if (value == "true") {
      args.push_back("--" + key);
    } else {
      args.push_back("--" + key);
      args.push_back(value);
    }
  }
  return args;
}

namespace detail {

inline void add_source_options(CLI::App* app, CliConfig& c) {
  auto* lib = app->add_option("--libsvm", c.libsvm, "LIBSVM data file (no normalization applied)");
  auto* ins = app->add_option("--instance", c.instance, "instance file written by 'gen'");
  std::vector<CLI::Option*> synth{
      app->add_option("--n", c.n, "number of samples")->capture_default_str(),
      app->add_option("--p", c.p, "number of features")->capture_default_str(),
      app->add_option("--cov", c.cov, "design covariance: ar:<r> | cs:<alpha>")->capture_default_str(),
      app->add_option("--signal", c.signal, "true signal: fixed16 | gauss:<s*>:<variance>")->capture_default_str(),
      app->add_option("--noise", c.noise, "noise: gauss:<var> | t:<scale>:<dof> | mn | laplace | cauchy | cauchy-scaled")
          ->capture_default_str(),
      app->add_option("--corrupt", c.corrupt, "fraction of corrupted observations |I|/n")->capture_default_str(),
      app->add_option("--corrupt-count", c.corrupt_count, "number of corrupted observations (overrides --corrupt)"),
      app->add_option("--max-noise-inf", c.max_noise_inf, "redraw noise until its sup-norm is below this bound"),
  };
  for (auto* o : synth) {
    o->excludes(lib);
    o->excludes(ins);
  }
  lib->excludes(ins);
  app->add_option("--seed", c.seed, "random seed")->capture_default_str();
}

inline void add_model_options(CLI::App* app, CliConfig& c) {
  app->add_option("--lambda", c.lambda, "penalty parameter (default: max(0.05, factor*||A||_1/n))");
  app->add_option("--lambda-factor", c.lambda_factor, "factor of the lambda rule (0.2 synthetic, 0.1 libsvm)");
  app->add_option("--a", c.a, "surrogate shape parameter a > 1")->capture_default_str();
  app->add_option("--mu", c.mu, "ridge parameter")->capture_default_str();
  app->add_option("--rho", c.rho, "override rho (default: max(1, c/||x0||_inf))");
  app->add_option("--eps", c.eps, "Moreau smoothing parameter of iPADMM")->capture_default_str();
  app->add_option("--sigma", c.sigma, "iPADMM penalty (default 4.5/eps)");
  app->add_option("--tol", c.tol, "PMMSN residual tolerance")->capture_default_str();
  app->add_option("--tol-sparse", c.tol_sparse, "PMMSN sparsity-stability tolerance")->capture_default_str();
  app->add_option("--k-max", c.k_max, "PMMSN outer iteration limit")->capture_default_str();
  app->add_option("--admm-k-max", c.admm_k_max, "iPADMM iteration limit")->capture_default_str();
  app->add_option("--eps-admm", c.eps_admm, "iPADMM stopping tolerance")->capture_default_str();
  app->add_option("--gamma1", c.gamma1, "initial proximal parameter gamma_1")->capture_default_str();
  app->add_option("--gamma2", c.gamma2, "initial proximal parameter gamma_2")->capture_default_str();
  app->add_option("--varrho", c.varrho, "proximal parameter decay")->capture_default_str();
}

inline void validate_model(const CliConfig& c) {
  try {
    (void)PenaltyParams(c.a, c.lambda.value_or(1.0), c.rho.value_or(1.0));
    pmm_config(c).validate();
    admm_config(c).validate();
  } catch (const std::invalid_argument& e) {
    throw FlagError(e.what());
  }
  if (!(c.mu >= 0.0)) throw FlagError("--mu must be nonnegative");
}

inline int cmd_gen(const CliConfig& c, std::ostream& out) {
  if (c.out.empty()) throw FlagError("gen requires --out");
  const SyntheticSpec s = synthetic_spec(c);
  const SyntheticInstance si = make_instance(s);
  save_instance(c.out, si, c.text);
  out << "wrote " << c.out << " n=" << s.n << " p=" << s.p << " nnz(x*)=" << si.support.size()
      << " corrupted=" << si.corrupt_set.size() << '\n';
  return 0;
}

inline int cmd_solve(const CliConfig& c, std::ostream& out) {
  validate_model(c);
  if (c.solver != "pmm" && c.solver != "ipadmm") throw FlagError("--solver must be pmm or ipadmm");
  const LoadedProblem lp = load_problem(c);
  const ProblemInstance& inst = lp.inst();
  ExperimentOptions o;
  o.a = c.a;
  o.lambda = c.lambda ? *c.lambda : lambda_rule(inst, default_lambda_factor(c));
  o.pmm = pmm_config(c);
  o.admm = admm_config(c);
  o.run_pmm = c.solver == "pmm";
  o.run_admm = c.solver == "ipadmm";

  SharedStart st = compute_start(inst, *o.lambda, o.pmm);
  if (c.rho) st.rho = *c.rho;
  const PenaltyParams pp(o.a, *o.lambda, st.rho);
  RunRecord rec;
  if (o.run_pmm) {
    const SolveReport rep = pmm_solve(inst, pp, o.pmm, st.x0);
    rec = make_record(lp.label, "pmm", inst, rep, o.a, std::nullopt, st.seconds + rep.wall_time, lp.x_true());
  } else {
    const ADMMState s0{st.x0, residual(inst, st.x0), Vector::Zero(inst.n())};
    const ADMMReport rep = admm_solve(inst, pp, o.admm, s0, o.pmm);
    rec = make_record(lp.label, "ipadmm", inst, rep, o.a, o.admm.eps_smooth, st.seconds + rep.wall_time, lp.x_true());
  }
  print_summary(out, rec);
  if (!c.out.empty()) write_csv(c.out, std::vector<RunRecord>{rec});
  return 0;
}

inline ExperimentOptions experiment_options(const CliConfig& c) {
  ExperimentOptions o;
  o.a = c.a;
  o.lambda_factor = default_lambda_factor(c);
  o.lambda = c.lambda;
  o.pmm = pmm_config(c);
  o.admm = admm_config(c);
  o.threads = c.threads;
  o.run_pmm = o.run_admm = false;
  for (const auto& s : c.solvers) {
    if (s == "pmm") o.run_pmm = true;
    else if (s == "ipadmm") o.run_admm = true;
    else throw FlagError("--solvers accepts pmm and ipadmm");
  }
  return o;
}

inline int cmd_sweep(const CliConfig& c, std::ostream& out) {
  validate_model(c);
  if (c.values.empty()) throw FlagError("sweep requires --values");
  if (c.kind != "sparsity" && c.kind != "lambda") throw FlagError("--kind must be sparsity or lambda");
  if (c.seeds < 1) throw FlagError("--seeds must be positive");
  const SweepKind kind = c.kind == "sparsity" ? SweepKind::sparsity : SweepKind::lambda;
  const auto rows = run_sweep(kind, synthetic_spec(c), c.values, c.seeds, experiment_options(c), c.out);
  if (c.out.empty()) write_csv(out, rows);
  else out << "wrote " << rows.size() << " rows to " << c.out << '\n';
  return 0;
}

inline int cmd_table1(const CliConfig& c, std::ostream& out) {
  validate_model(c);
  if (c.seeds < 1) throw FlagError("--reps must be positive");
  Table1Config t;
  t.p = c.table1_p;
  t.seed = c.seed;
  t.cells = c.cells;
  t.options = experiment_options(c);
  t.eps_search = c.eps_search;
  t.eps_grid = c.grid;
  const auto rows = run_table1(t, c.seeds, c.out);
  if (c.out.empty()) write_csv(out, rows);
  for (const auto& r : rows) {
    if (r.termination == "mean") {
      out << r.problem << ' ';
      print_summary(out, r);
    }
  }
  return 0;
}

inline int cmd_eps_search(const CliConfig& c, std::ostream& out) {
  validate_model(c);
  const LoadedProblem lp = load_problem(c);
  const ProblemInstance& inst = lp.inst();
  const double lambda = c.lambda ? *c.lambda : lambda_rule(inst, default_lambda_factor(c));
  PMMConfig pc = pmm_config(c);
  SharedStart st = compute_start(inst, lambda, pc);
  if (c.rho) st.rho = *c.rho;
  const PenaltyParams pp(c.a, lambda, st.rho);
  Eigen::Index target = 0;
  if (c.target_nz) {
    target = *c.target_nz;
  } else if (lp.x_true()) {
    target = static_cast<Eigen::Index>(support_of(*lp.x_true()).size());
  } else {
    target = nnz_approx(pmm_solve(inst, pp, pc, st.x0).x_out);
  }
  const ADMMState s0{st.x0, residual(inst, st.x0), Vector::Zero(inst.n())};
  const auto res = eps_grid_search(inst, pp, c.eps_lo, c.eps_hi, c.grid, target, s0, admm_config(c), lp.x_true(), lp.label);
  out << "eps_opt=" << res.eps_opt << " target_nz=" << target << '\n';
  if (!c.out.empty()) write_csv(c.out, res.records);
  return 0;
}

}  // namespace detail

/// Entry point: returns 0 on success, 2 on flag errors (with usage), 1 on
/// runtime failures.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CliConfig c;
  CLI::App app{"sparseplq: zero-norm regularized l1-loss regression (PMMSN and iPADMM)", "sparseplq"};
  app.require_subcommand(0, 1);
  bool show_defaults = false;
  std::string config_path;
  app.add_flag("--show-defaults", show_defaults, "print the default parameter values and exit");

  auto* gen = app.add_subcommand("gen", "generate a synthetic instance file");
  auto* solve = app.add_subcommand("solve", "solve one instance with PMMSN or iPADMM");
  auto* sweep = app.add_subcommand("sweep", "sparsity-rate or lambda sweep with both solvers");
  auto* table1 = app.add_subcommand("table1", "sparse-noise benchmark family (10 covariance/noise cells)");
  auto* epss = app.add_subcommand("eps-search", "grid search of the iPADMM smoothing parameter");

  for (auto* sc : {gen, solve, sweep, table1, epss}) {
    sc->add_option("--config", config_path, "key = value file; explicit flags take precedence");
    sc->add_option("--out", c.out, "output path (instance file for gen, CSV otherwise)");
    sc->add_flag("--verbose", c.verbose, "verbose output");
  }
  detail::add_source_options(gen, c);
  gen->add_flag("--text", c.text, "write the text instance format instead of binary");
  detail::add_source_options(solve, c);
  detail::add_model_options(solve, c);
  solve->add_option("--solver", c.solver, "pmm | ipadmm")->capture_default_str();

  for (auto* sc : {sweep, table1}) {
    detail::add_model_options(sc, c);
    sc->add_option("--solvers", c.solvers, "solvers to run")->delimiter(',')->capture_default_str();
    sc->add_option("--threads", c.threads, "parallel replications")->capture_default_str();
  }
  detail::add_source_options(sweep, c);
  sweep->add_option("--kind", c.kind, "sparsity | lambda")->capture_default_str();
  sweep->add_option("--values", c.values, "comma-separated |I|/n or lambda values")->delimiter(',');
  sweep->add_option("--seeds", c.seeds, "replications per value (seeds seed..seed+k-1)")->capture_default_str();

  table1->add_option("--p", c.table1_p, "number of features (s* = floor(sqrt(p)/2), n = floor(2 s* ln p))")
      ->capture_default_str();
  table1->add_option("--seed", c.seed, "first replication seed")->capture_default_str();
  table1->add_option("--reps", c.seeds, "replications per cell")->capture_default_str();
  table1->add_option("--cells", c.cells, "';'-separated cell names, e.g. 'AR0.5|N(0,100);CS0.6|MN' (default: all)")
      ->delimiter(';');
  table1->add_flag("--eps-search", c.eps_search, "search eps per replication instead of using the reported eps_opt");
  table1->add_option("--grid", c.grid, "eps grid size for --eps-search")->capture_default_str();

  detail::add_source_options(epss, c);
  detail::add_model_options(epss, c);
  epss->add_option("--eps-lo", c.eps_lo, "lower end of the eps interval")->capture_default_str();
  epss->add_option("--eps-hi", c.eps_hi, "upper end of the eps interval")->capture_default_str();
  epss->add_option("--grid", c.grid, "number of equispaced eps values")->capture_default_str();
  epss->add_option("--target-nz", c.target_nz, "target sparsity (default: true support size, or PMMSN Nz on real data)");

  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);

  try {
    // Expand --config before parsing so explicit flags win.
    for (std::size_t i = 0; i < args.size(); ++i) {
      std::string path;
      std::size_t erase = 0;
      if (args[i] == "--config" && i + 1 < args.size()) {
        path = args[i + 1];
        erase = 2;
      } else if (args[i].rfind("--config=", 0) == 0) {
        path = args[i].substr(9);
        erase = 1;
      }
      if (erase == 0) continue;
      std::set<std::string> explicit_keys;
      for (const auto& a : args) {
        if (a.rfind("--", 0) == 0) explicit_keys.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
      }
      const auto extra = config_args(path, explicit_keys);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + erase));
      args.insert(args.begin() + static_cast<std::ptrdiff_t>(i), extra.begin(), extra.end());
      break;
    }
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return 2;
  } catch (const FlagError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  if (show_defaults) {
    out << defaults_text();
    return 0;
  }
  const auto subs = app.get_subcommands();
  if (subs.empty()) {
    err << "error: a command is required\n\n" << app.help();
    return 2;
  }
  const std::string cmd = subs.front()->get_name();
  try {
    if (cmd == "gen") return detail::cmd_gen(c, out);
    if (cmd == "solve") return detail::cmd_solve(c, out);
    if (cmd == "sweep") return detail::cmd_sweep(c, out);
    if (cmd == "table1") return detail::cmd_table1(c, out);
    return detail::cmd_eps_search(c, out);
  } catch (const FlagError& e) {
    err << "error: " << e.what() << "\n\n" << subs.front()->help();
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace sparseplq::cli
