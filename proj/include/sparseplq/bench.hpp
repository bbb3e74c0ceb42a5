#pragma once

#include "sparseplq/data.hpp"
#include "sparseplq/ipadmm.hpp"
#include "sparseplq/metrics.hpp"
#include "sparseplq/penalty.hpp"
#include "sparseplq/pmm.hpp"
#include "sparseplq/problem.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace sparseplq {

/// λ = max(0.05, factor · n⁻¹⫴A⫴₁). Factors used in the experiments: 0.2 for
/// the sparsity and λ sweeps, 0.12 for the Table-1 family, 0.1 for LIBSVM data.
inline double lambda_rule(const ProblemInstance& inst, double factor = 0.2) {
  return std::max(0.05, factor * inst.col_sum_norm() / static_cast<double>(inst.n()));
}

/// One solver run. Counts are stored as doubles so that averaged rows use
/// the same type; absent values (eps for PMMSN, truth-based metrics on real
/// data) are empty optionals and empty CSV fields.
struct RunRecord {
  std::string problem;
  std::string solver;
  double lambda = 0.0;
  double rho = 0.0;
  double a = 0.0;
  std::optional<double> eps;
  double nz = 0.0;
  double loss = 0.0;
  std::optional<double> l2err;
  std::optional<double> fp;
  std::optional<double> fn;
  double time_s = 0.0;
  double iters = 0.0;
  std::string termination;

  bool operator==(const RunRecord&) const = default;
};

inline constexpr const char* kCsvHeader = "problem,solver,lambda,rho,a,eps,nz,loss,l2err,fp,fn,time_s,iters,termination";

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
inline std::string fmt_opt(const std::optional<double>& v) { return v ? fmt17(*v) : std::string(); }

/// RFC 4180 field splitting: fields may be wrapped in double quotes, with
/// "" standing for a literal quote inside them.
inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (quoted) throw std::runtime_error("unterminated quoted CSV field");
  out.push_back(cur);
  return out;
}

inline double parse_num(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::runtime_error("bad numeric CSV field '" + s + "'");
  return v;
}
inline std::optional<double> parse_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_num(s);
}

/// Labels are quoted when they contain a separator or a quote; line breaks
/// are rejected.
inline std::string csv_label(const std::string& s) {
  if (s.find_first_of("\n\r") != std::string::npos) throw std::invalid_argument("CSV label contains a line break: " + s);
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + '"';
}

}  // namespace detail

inline std::string to_csv_row(const RunRecord& r) {
  std::ostringstream os;
  os << detail::csv_label(r.problem) << ',' << detail::csv_label(r.solver) << ',' << detail::fmt17(r.lambda) << ',' << detail::fmt17(r.rho) << ','
     << detail::fmt17(r.a) << ',' << detail::fmt_opt(r.eps) << ',' << detail::fmt17(r.nz) << ','
     << detail::fmt17(r.loss) << ',' << detail::fmt_opt(r.l2err) << ',' << detail::fmt_opt(r.fp) << ','
     << detail::fmt_opt(r.fn) << ',' << detail::fmt17(r.time_s) << ',' << detail::fmt17(r.iters) << ','
     << detail::csv_label(r.termination);
  return os.str();
}

inline RunRecord parse_csv_row(const std::string& line) {
  const auto f = detail::split_csv(line);
  if (f.size() != 14) throw std::runtime_error("expected 14 CSV fields, got " + std::to_string(f.size()));
  RunRecord r;
  r.problem = f[0];
  r.solver = f[1];
  r.lambda = detail::parse_num(f[2]);
  r.rho = detail::parse_num(f[3]);
  r.a = detail::parse_num(f[4]);
  r.eps = detail::parse_opt(f[5]);
  r.nz = detail::parse_num(f[6]);
  r.loss = detail::parse_num(f[7]);
  r.l2err = detail::parse_opt(f[8]);
  r.fp = detail::parse_opt(f[9]);
  r.fn = detail::parse_opt(f[10]);
  r.time_s = detail::parse_num(f[11]);
  r.iters = detail::parse_num(f[12]);
  r.termination = f[13];
  return r;
}

inline void write_csv(std::ostream& out, const std::vector<RunRecord>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) out << to_csv_row(r) << '\n';
}

inline void write_csv(const std::string& path, const std::vector<RunRecord>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write CSV to " + path);
  write_csv(out, rows);
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::vector<RunRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::runtime_error("missing or unexpected CSV header");
  std::vector<RunRecord> rows;
  while (std::getline(in, line)) {
    if (!line.empty()) rows.push_back(parse_csv_row(line));
  }
  return rows;
}

/// Record for one solver output; truth-based fields only when x_true is known.
inline RunRecord make_record(std::string problem, std::string solver, const ProblemInstance& inst,
                             const SolveReport& rep, double a, std::optional<double> eps, double time_s,
                             const Vector* x_true) {
  RunRecord r;
  r.problem = std::move(problem);
  r.solver = std::move(solver);
  r.lambda = rep.lambda;
  r.rho = rep.rho;
  r.a = a;
  r.eps = eps;
  r.nz = static_cast<double>(nnz_approx(rep.x_out));
  r.loss = loss_value(inst, rep.x_out);
  if (x_true != nullptr && x_true->norm() > 0.0) {
    r.l2err = l2err(rep.x_out, *x_true);
    const auto e = fp_fn(rep.x_out, *x_true);
    r.fp = static_cast<double>(e.fp);
    r.fn = static_cast<double>(e.fn);
  }
  r.time_s = time_s;
  r.iters = rep.iterations;
  r.termination = to_string(rep.termination);
  return r;
}

/// Component-wise mean of a group of records; labels taken from the arguments.
inline RunRecord average_records(const std::vector<RunRecord>& rows, std::string problem, std::string solver) {
  if (rows.empty()) throw std::invalid_argument("cannot average an empty group");
  RunRecord m;
  m.problem = std::move(problem);
  m.solver = std::move(solver);
  m.termination = "mean";
  const double k = static_cast<double>(rows.size());
  auto mean_opt = [&](auto field) -> std::optional<double> {
    double s = 0.0;
    for (const auto& r : rows) {
      if (!(r.*field)) return std::nullopt;
      s += *(r.*field);
    }
    return s / k;
  };
  for (const auto& r : rows) {
    m.lambda += r.lambda;
    m.rho += r.rho;
    m.a += r.a;
    m.nz += r.nz;
    m.loss += r.loss;
    m.time_s += r.time_s;
    m.iters += r.iters;
  }
  for (double* f : {&m.lambda, &m.rho, &m.a, &m.nz, &m.loss, &m.time_s, &m.iters}) *f /= k;
  m.eps = mean_opt(&RunRecord::eps);
  m.l2err = mean_opt(&RunRecord::l2err);
  m.fp = mean_opt(&RunRecord::fp);
  m.fn = mean_opt(&RunRecord::fn);
  return m;
}

// ---------------------------------------------------------------------------
// Experiment drivers
// ---------------------------------------------------------------------------

struct ExperimentOptions {
  double a = 6.0;
  double lambda_factor = 0.2;
  std::optional<double> lambda;  // overrides the factor rule
  PMMConfig pmm{};
  ADMMConfig admm{0.7, std::nullopt};
  bool run_pmm = true;
  bool run_admm = true;
  int threads = 1;
};

/// Shared start for both solvers: x⁰ from the starting-point problem and ρ
/// from choose_rho.
struct SharedStart {
  Vector x0;
  double rho = 1.0;
  double seconds = 0.0;
};

inline SharedStart compute_start(const ProblemInstance& inst, double lambda, const PMMConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  SharedStart s;
  s.x0 = init_x0(inst, lambda, cfg);
  s.rho = choose_rho(s.x0, inst.n(), inst.p());
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return s;
}

/// Runs the enabled solvers on one instance from a shared start. Reported
/// times include the start computation.
inline std::vector<RunRecord> run_solvers(const std::string& label, const ProblemInstance& inst, const Vector* x_true,
                                          const ExperimentOptions& opt) {
  const double lambda = opt.lambda ? *opt.lambda : lambda_rule(inst, opt.lambda_factor);
  const SharedStart start = compute_start(inst, lambda, opt.pmm);
  const PenaltyParams pp(opt.a, lambda, start.rho);
  std::vector<RunRecord> rows;
  if (opt.run_pmm) {
    const SolveReport rep = pmm_solve(inst, pp, opt.pmm, start.x0);
    rows.push_back(make_record(label, "pmm", inst, rep, opt.a, std::nullopt, start.seconds + rep.wall_time, x_true));
  }
  if (opt.run_admm) {
    const ADMMState st{start.x0, residual(inst, start.x0), Vector::Zero(inst.n())};
    const ADMMReport rep = admm_solve(inst, pp, opt.admm, st, opt.pmm);
    rows.push_back(make_record(label, "ipadmm", inst, rep, opt.a, opt.admm.eps_smooth, start.seconds + rep.wall_time, x_true));
  }
  return rows;
}

namespace detail {

/// Runs job(i) for i in [0, count) on up to `threads` workers.
inline void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& job) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads))));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::mutex m;
  std::size_t next = 0;
  std::exception_ptr err;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        std::size_t i = 0;
        {
          std::lock_guard lock(m);
          if (next >= count || err) return;
          i = next++;
        }
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(m);
          if (!err) err = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace detail

struct EpsSearchResult {
  double eps_opt = 0.0;
  std::vector<double> grid;
  std::vector<Eigen::Index> nz;
  std::vector<RunRecord> records;
};

/// iPADMM at `grid` equispaced ε in [lo, hi]; picks the smallest ε whose
/// output sparsity is closest to target_nz.
inline EpsSearchResult eps_grid_search(const ProblemInstance& inst, const PenaltyParams& params, double lo, double hi,
                                       int grid, Eigen::Index target_nz, const ADMMState& start,
                                       const ADMMConfig& base = ADMMConfig{}, const Vector* x_true = nullptr,
                                       const std::string& label = "eps-search") {
  if (!(lo < hi)) throw std::invalid_argument("eps interval must satisfy lo < hi");
  if (grid < 2) throw std::invalid_argument("eps grid needs at least 2 points");
  EpsSearchResult res;
  Eigen::Index best_dist = std::numeric_limits<Eigen::Index>::max();
  for (int i = 0; i < grid; ++i) {
    const double eps = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid - 1);
    ADMMConfig cfg = base;
    cfg.eps_smooth = eps;
    cfg.sigma.reset();
    const ADMMReport rep = admm_solve(inst, params, cfg, start);
    const Eigen::Index nz = nnz_approx(rep.x_out);
    res.grid.push_back(eps);
    res.nz.push_back(nz);
    res.records.push_back(make_record(label, "ipadmm", inst, rep, params.a(), eps, rep.wall_time, x_true));
    const Eigen::Index dist = nz > target_nz ? nz - target_nz : target_nz - nz;
    if (dist < best_dist) {
      best_dist = dist;
      res.eps_opt = eps;
    }
  }
  return res;
}

enum class SweepKind { sparsity, lambda };

/// Figure-style sweep: for every value × seed, build the instance (the
/// sparsity sweep sets |I| = ⌊value·n⌋, the λ sweep sets λ = value), run
/// both solvers and emit one row per solver run. Seeds are base.seed + r.
inline std::vector<RunRecord> run_sweep(SweepKind kind, const SyntheticSpec& base, const std::vector<double>& values,
                                        int seeds, const ExperimentOptions& opt, const std::string& out_path = "") {
  if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
  if (seeds < 1) throw std::invalid_argument("sweep needs at least one seed");
  const std::size_t jobs = values.size() * static_cast<std::size_t>(seeds);
  std::vector<std::vector<RunRecord>> per_job(jobs);
  detail::parallel_for(jobs, opt.threads, [&](std::size_t j) {
    const double value = values[j / static_cast<std::size_t>(seeds)];
    const int r = static_cast<int>(j % static_cast<std::size_t>(seeds));
    SyntheticSpec spec = base;
    spec.seed = base.seed + static_cast<std::uint64_t>(r);
    ExperimentOptions o = opt;
    std::ostringstream label;
    if (kind == SweepKind::sparsity) {
      spec.corrupt_count = static_cast<Eigen::Index>(std::floor(value * static_cast<double>(spec.n)));
      label << "sparsity=" << value;
    } else {
      o.lambda = value;
      label << "lambda=" << value;
    }
    label << "/seed=" << spec.seed;
    const SyntheticInstance si = make_instance(spec);
    per_job[j] = run_solvers(label.str(), si.inst, &si.x_true, o);
  });
  std::vector<RunRecord> rows;
  for (auto& v : per_job) rows.insert(rows.end(), v.begin(), v.end());
  if (!out_path.empty()) write_csv(out_path, rows);
  return rows;
}

/// One (Σ, noise) cell of the Table-1 family with its ε search interval and
/// reported ε_opt.
struct Table1Cell {
  std::string name;
  Covariance cov;
  NoiseSpec noise;
  double eps_lo;
  double eps_hi;
  double eps_opt;
};

inline std::vector<Table1Cell> table1_cells() {
  const NoiseSpec gauss100{NoiseKind::gaussian, 100.0};
  const NoiseSpec t4{NoiseKind::scaled_t, 0.0, std::sqrt(2.0), 4};
  const NoiseSpec mn{NoiseKind::mixture_normal};
  const NoiseSpec lap{NoiseKind::laplace};
  const NoiseSpec cau{NoiseKind::cauchy};
  return {
      {"AR0.5|N(0,100)", CovAR{0.5}, gauss100, 15, 30, 25},
      {"AR0.5|sqrt2*t4", CovAR{0.5}, t4, 10, 30, 15},
      {"AR0.5|MN", CovAR{0.5}, mn, 10, 30, 20},
      {"AR0.5|Laplace", CovAR{0.5}, lap, 10, 30, 15},
      {"AR0.5|Cauchy", CovAR{0.5}, cau, 20, 35, 27},
      {"CS0.6|N(0,100)", CovCS{0.6}, gauss100, 1600, 2000, 1800},
      {"CS0.6|sqrt2*t4", CovCS{0.6}, t4, 1000, 1500, 1225},
      {"CS0.6|MN", CovCS{0.6}, mn, 1000, 1500, 1350},
      {"CS0.6|Laplace", CovCS{0.6}, lap, 1000, 1500, 1150},
      {"CS0.6|Cauchy", CovCS{0.6}, cau, 1200, 1800, 1500},
  };
}

struct Table1Config {
  Eigen::Index p = 5000;
  std::uint64_t seed = 1;
  std::vector<std::string> cells;  // empty = all
  ExperimentOptions options{};
  /// Search ε per replication over the cell interval (20 points) instead of
  /// using the reported ε_opt.
  bool eps_search = false;
  int eps_grid = 20;
};

/// Sparse-noise family: p given, s* = ⌊√p/2⌋, n = ⌊2s* ln p⌋, |I| = ⌊0.3n⌋,
/// x* entries N(0,4), λ = max(0.05, 0.12 n⁻¹⫴A⫴₁). Cauchy noise is redrawn
/// until ‖ϖ‖∞ < 1000. Emits per-run rows followed by one mean row per cell
/// and solver.
inline std::vector<RunRecord> run_table1(const Table1Config& cfg, int seeds_per_cell = 10, const std::string& out_path = "") {
  if (seeds_per_cell < 1) throw std::invalid_argument("need at least one replication per cell");
  const auto sizes = table1_sizes(cfg.p);
  std::vector<Table1Cell> cells;
  for (const auto& c : table1_cells()) {
    if (cfg.cells.empty() || std::find(cfg.cells.begin(), cfg.cells.end(), c.name) != cfg.cells.end()) cells.push_back(c);
  }
  if (cells.empty()) throw std::invalid_argument("no Table-1 cell matches the selection");

  ExperimentOptions base = cfg.options;
  base.lambda_factor = 0.12;
  base.lambda.reset();

  std::vector<RunRecord> rows;
  for (const auto& cell : cells) {
    std::vector<std::vector<RunRecord>> per_rep(static_cast<std::size_t>(seeds_per_cell));
    detail::parallel_for(per_rep.size(), base.threads, [&](std::size_t r) {
      SyntheticSpec spec;
      spec.n = sizes.n;
      spec.p = cfg.p;
      spec.cov = cell.cov;
      spec.signal = SignalGaussian{sizes.s_star, 4.0};
      spec.noise = cell.noise;
      spec.corrupt_count = static_cast<Eigen::Index>(std::floor(0.3 * static_cast<double>(sizes.n)));
      spec.seed = cfg.seed + r;
      spec.mu = 1e-8;
      if (cell.noise.kind == NoiseKind::cauchy) spec.max_noise_inf = 1000.0;
      const SyntheticInstance si = make_instance(spec);
      const std::string label = cell.name + "/seed=" + std::to_string(spec.seed);

      ExperimentOptions o = base;
      o.admm.eps_smooth = cell.eps_opt;
      o.admm.sigma.reset();
      if (o.run_admm && cfg.eps_search) {
        const double lambda = lambda_rule(si.inst, o.lambda_factor);
        const SharedStart st = compute_start(si.inst, lambda, o.pmm);
        const PenaltyParams pp(o.a, lambda, st.rho);
        const ADMMState s0{st.x0, residual(si.inst, st.x0), Vector::Zero(si.inst.n())};
        o.admm.eps_smooth = eps_grid_search(si.inst, pp, cell.eps_lo, cell.eps_hi, cfg.eps_grid,
                                            static_cast<Eigen::Index>(si.support.size()), s0, o.admm)
                                .eps_opt;
      }
      per_rep[r] = run_solvers(label, si.inst, &si.x_true, o);
    });
    std::vector<RunRecord> pmm_rows, admm_rows;
    for (const auto& rep_rows : per_rep) {
      for (const auto& row : rep_rows) {
        rows.push_back(row);
        (row.solver == "pmm" ? pmm_rows : admm_rows).push_back(row);
      }
    }
    if (!pmm_rows.empty()) rows.push_back(average_records(pmm_rows, cell.name + "/mean", "pmm"));
    if (!admm_rows.empty()) rows.push_back(average_records(admm_rows, cell.name + "/mean", "ipadmm"));
  }
  if (!out_path.empty()) write_csv(out_path, rows);
  return rows;
}

}  // namespace sparseplq
