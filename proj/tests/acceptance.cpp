// Acceptance runner: evaluates the fifteen acceptance criteria and prints one
// PASS/FAIL line per criterion. Exit status is nonzero if any criterion fails.
// Progress and per-criterion diagnostics go to stderr.

#include "oracles.hpp"
#include "sparseplq/bench.hpp"
#include "sparseplq/data.hpp"
#include "sparseplq/ipadmm.hpp"
#include "sparseplq/pmm.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

using namespace sparseplq;
using oracle::quad;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::map<int, Outcome> g_results;

void record(int id, bool pass, const std::string& detail) {
  g_results[id] = {pass, detail};
  std::fprintf(stderr, "[criterion %2d] %s: %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------
// Criterion 6 bookkeeping: every PMM run made here is checked for the
// descent inequality and a nonincreasing Θ trace.
// ---------------------------------------------------------------------------
struct DescentLog {
  int runs = 0;
  int violations = 0;
  double worst_rel_gap = std::numeric_limits<double>::infinity();  // min gap/scale
  double worst_rel_increase = -std::numeric_limits<double>::infinity();
};
DescentLog g_descent;

void check_descent(const SolveReport& rep, const ProblemInstance& inst, const PenaltyParams& pp) {
  const double scale = 1.0 + std::abs(rep.objective_trace.front());
  bool ok = true;
  for (double g : descent_gap(rep, inst, pp)) {
    g_descent.worst_rel_gap = std::min(g_descent.worst_rel_gap, g / scale);
    ok = ok && g >= -1e-8 * scale;
  }
  for (std::size_t k = 1; k < rep.objective_trace.size(); ++k) {
    const double inc = (rep.objective_trace[k] - rep.objective_trace[k - 1]) / scale;
    g_descent.worst_rel_increase = std::max(g_descent.worst_rel_increase, inc);
    ok = ok && inc <= 1e-8;
  }
  ++g_descent.runs;
  if (!ok) ++g_descent.violations;
}

// Criterion 12 bookkeeping for iPADMM runs.
struct AdmmLog {
  int runs = 0;
  int violations = 0;
  double worst_rel_gap_k1 = std::numeric_limits<double>::infinity();  // k ≥ 1, default start
  double worst_rel_gap_k0 = std::numeric_limits<double>::infinity();  // k = 0, default start (reported only)
  double worst_rel_gap_consistent = std::numeric_limits<double>::infinity();
  std::string constants;
};
AdmmLog g_admm;

void check_admm(const ADMMReport& rep, const PenaltyParams& pp, const ProblemInstance& inst, bool consistent_start) {
  const double scale = 1.0 + std::abs(rep.objective_trace.front());
  bool ok = true;
  for (std::size_t k = 0; k < rep.descent_gaps.size(); ++k) {
    const double rel = rep.descent_gaps[k] / scale;
    if (consistent_start) {
      g_admm.worst_rel_gap_consistent = std::min(g_admm.worst_rel_gap_consistent, rel);
      ok = ok && rel >= -1e-8;
    } else if (k == 0) {
      g_admm.worst_rel_gap_k0 = std::min(g_admm.worst_rel_gap_k0, rel);
    } else {
      g_admm.worst_rel_gap_k1 = std::min(g_admm.worst_rel_gap_k1, rel);
      ok = ok && rel >= -1e-8;
    }
  }
  if (g_admm.constants.empty()) {
    const double a = pp.a();
    const double cz = rep.sigma / 2.0 - 4.0 / (rep.sigma * rep.eps_smooth * rep.eps_smooth);
    const double cx = (pp.lambda() * (a + 1.0) * pp.rho() - 2.0 * (a - 1.0) * inst.mu()) / (4.0 * (a - 1.0));
    g_admm.constants = fmt("sigma=%.4g eps=%.3g coef_z=%.4g coef_x=%.4g", rep.sigma, rep.eps_smooth, cz, cx);
  }
  ++g_admm.runs;
  if (!ok) ++g_admm.violations;
}

Vector vec1(double v) { return Vector::Constant(1, v); }

// ---------------------------------------------------------------------------
// 1. Prox oracles
// ---------------------------------------------------------------------------
void criterion1() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> U(0, 1);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double z = -5 + 10 * U(rng), w = 2 * U(rng), mu = U(rng), g = 0.1 + 3 * U(rng);
    const double got = prox_weighted_l1_ridge(vec1(z), vec1(w), mu, g)[0];
    const double ref = oracle::golden_min(
        [&](quad t) { return quad(w) * oracle::qabs(t) + quad(mu) / 2 * t * t + quad(g) / 2 * (t - z) * (t - z); }, -6, 6);
    worst = std::max(worst, std::abs(got - ref));
  }
  for (int k = 0; k < 1000; ++k) {
    const double v = -3 + 6 * U(rng), g = 0.05 + 5 * U(rng);
    const int n = 1 + static_cast<int>(20 * U(rng));
    const double got = prox_l1_scaled(vec1(v), n, g)[0];
    const double ref =
        oracle::golden_min([&](quad t) { return oracle::qabs(t) / n + quad(g) / 2 * (t - v) * (t - v); }, -4, 4);
    worst = std::max(worst, std::abs(got - ref));
  }
  for (int k = 0; k < 1000; ++k) {
    const double eta = -4 + 8 * U(rng), eps = 0.05 + 2 * U(rng), sigma = 0.1 + 5 * U(rng);
    const int n = 1 + static_cast<int>(10 * U(rng));
    const double got = prox_moreau_l1(vec1(eta), eps, sigma, n)[0];
    const double ref = oracle::golden_min(
        [&](quad t) {
          const quad at = oracle::qabs(t);
          const quad env = at > quad(eps) / n ? at / n - quad(eps) / (2 * quad(n) * n) : t * t / (2 * quad(eps));
          return env + quad(sigma) / 2 * (t - eta) * (t - eta);
        },
        -5, 5);
    worst = std::max(worst, std::abs(got - ref));
  }
  for (int k = 0; k < 1000; ++k) {
    const double lambda = 0.05 + 2 * U(rng), rho = 1 + 9 * U(rng), a = 2 + 8 * U(rng);
    const PenaltyParams pp(a, lambda, rho);
    const double c = pp.concavity() * (1.05 + 3 * U(rng));
    const double s = (-2 + 4 * U(rng)) * pp.t_hi() * 1.5;
    const double got = prox_vartheta(s, pp, c);
    const double span = std::abs(s) + 2 * pp.t_hi() + 1;
    const double ref = oracle::golden_min(
        [&](quad t) {
          const quad at = oracle::qabs(t);
          const quad pen = quad(lambda) * at - quad(lambda) / quad(rho) * oracle::psi_star_q(quad(rho) * at, quad(a));
          return pen + quad(c) / 2 * (t - s) * (t - s);
        },
        -span, span, 4000);
    worst = std::max(worst, std::abs(got - ref));
  }
  const double secs = seconds_since(t0);
  record(1, worst <= 1e-8 && secs < 5.0, fmt("4x1000 inputs, max |prox - oracle| = %.2e, %.2f s", worst, secs));
}

// ---------------------------------------------------------------------------
// 2. Gradient consistency
// ---------------------------------------------------------------------------
void criterion2() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> U(0, 1);
  const double h = 1e-6;
  double worst_g = 0.0;
  int points_g = 0;
  while (points_g < 50) {
    const PenaltyParams pp(2 + 6 * U(rng), 0.1 + U(rng), 1 + 4 * U(rng));
    const Vector x = oracle::gaussian_vector(6, rng, 0.6);
    bool near_kink = false;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double at = std::abs(x[i]);
      near_kink = near_kink || at < 1e-4 || std::abs(at - pp.t_lo()) < 1e-4 || std::abs(at - pp.t_hi()) < 1e-4;
    }
    if (near_kink) continue;
    const Vector g = grad_g_rho(x, pp);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      Vector xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      worst_g = std::max(worst_g, std::abs(g[i] - (g_rho(xp, pp) - g_rho(xm, pp)) / (2 * h)));
    }
    ++points_g;
  }
  double worst_d = 0.0;
  int points_d = 0;
  while (points_d < 50) {
    const Eigen::Index n = 8, p = 12;
    const ProblemInstance inst(oracle::gaussian_matrix(n, p, rng), oracle::gaussian_vector(n, rng), 1e-3);
    SubproblemSpec s;
    s.inst = &inst;
    s.x_ref = oracle::gaussian_vector(p, rng);
    s.z_ref = residual(inst, s.x_ref);
    s.omega = Vector(p);
    for (auto& w : s.omega) w = 0.3 * U(rng);
    s.mu = inst.mu();
    s.gamma1 = 0.1 + U(rng);
    s.gamma2 = 0.1 + U(rng);
    const Vector u = oracle::gaussian_vector(n, rng, 0.5);
    // kink avoidance: every prox argument stays off its threshold by a margin
    const Vector Atu = inst.A().transpose() * u;
    const double thr = 1.0 / (static_cast<double>(n) * s.gamma2);
    bool near_kink = false;
    for (Eigen::Index i = 0; i < n; ++i) near_kink = near_kink || std::abs(std::abs(s.z_ref[i] + u[i] / s.gamma2) - thr) < 1e-3;
    for (Eigen::Index j = 0; j < p; ++j)
      near_kink = near_kink || std::abs(std::abs(s.gamma1 * s.x_ref[j] - Atu[j]) - s.omega[j]) < 1e-3 * (1 + inst.col_sum_norm());
    if (near_kink) continue;
    const Vector g = dual_gradient(u, s);
    for (Eigen::Index i = 0; i < n; ++i) {
      Vector up = u, um = u;
      up[i] += h;
      um[i] -= h;
      worst_d = std::max(worst_d, std::abs(g[i] - (dual_value(up, s) - dual_value(um, s)) / (2 * h)));
    }
    ++points_d;
  }
  const double secs = seconds_since(t0);
  record(2, worst_g <= 1e-5 && worst_d <= 1e-5 && secs < 5.0,
         fmt("grad_g_rho max err %.2e, dual_gradient max err %.2e (50 points each), %.2f s", worst_g, worst_d, secs));
}

// ---------------------------------------------------------------------------
// 3. Lemma A.1 bitwise identity
// ---------------------------------------------------------------------------
void criterion3() {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> U(0, 1);
  int mismatches = 0;
  for (int k = 0; k < 10000; ++k) {
    const PenaltyParams pp(1.5 + 9 * U(rng), 0.01 + U(rng), 1 + 20 * U(rng));
    double t = (-2 + 4 * U(rng)) * pp.t_hi();
    if (k % 10 == 0) t = (k % 20 == 0 ? 1 : -1) * (k % 30 == 0 ? pp.t_lo() : pp.t_hi());
    if (k % 97 == 0) t = 0.0;
    const Vector x = vec1(t);
    const double lhs = grad_g_rho(x, pp)[0];
    const double rhs = w_rho(x, pp)[0] * sign(t);
    if (!(lhs == rhs)) ++mismatches;
  }
  record(3, mismatches == 0, fmt("10^4 scalars incl. breakpoints, %d bitwise mismatches", mismatches));
}

// ---------------------------------------------------------------------------
// 4. Penalty sandwich and Θ ≤ zero-norm objective
// ---------------------------------------------------------------------------
void criterion4() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> U(0, 1);
  int bad = 0;
  for (int k = 0; k < 10000; ++k) {
    const PenaltyParams pp(1.5 + 9 * U(rng), 0.01 + U(rng), 1 + 20 * U(rng));
    double t = (-2 + 4 * U(rng)) * pp.t_hi();
    switch (k % 8) {
      case 0: t = pp.t_hi(); break;
      case 1: t = -pp.t_lo(); break;
      case 2: t = std::nextafter(pp.t_hi(), 0.0); break;
      case 3: t = 0.0; break;
      default: break;
    }
    const double v = surrogate_penalty(t, pp);
    const bool at_cap = std::abs(t) >= pp.t_hi();
    if (!(v >= 0.0 && v <= pp.nu())) ++bad;
    if (at_cap && v != pp.nu()) ++bad;
    // strictly below ν inside the band; within one rounding unit of ν just
    // below t_hi, where ν(1 − d²/…) is representable only as ν
    if (!at_cap && v > pp.nu()) ++bad;
    if (!at_cap && std::abs(t) < pp.t_hi() * (1 - 1e-6) && v == pp.nu()) ++bad;
  }
  int theta_bad = 0;
  for (int k = 0; k < 100; ++k) {
    const Eigen::Index n = 5 + static_cast<Eigen::Index>(10 * U(rng)), p = 5 + static_cast<Eigen::Index>(10 * U(rng));
    const ProblemInstance inst(oracle::gaussian_matrix(n, p, rng), oracle::gaussian_vector(n, rng), 1e-3 * U(rng));
    const PenaltyParams pp(2 + 6 * U(rng), 0.05 + U(rng), 1 + 5 * U(rng));
    Vector x = oracle::gaussian_vector(p, rng);
    for (Eigen::Index j = 0; j < p; ++j)
      if (U(rng) < 0.4) x[j] = 0.0;
    if (theta_objective(x, inst, pp) > zero_norm_objective(x, inst, pp.nu()) + 1e-14) ++theta_bad;
  }
  record(4, bad == 0 && theta_bad == 0,
         fmt("10^4 t: %d sandwich violations; 100 (x, instance) pairs: %d with Theta > zero-norm objective", bad,
             theta_bad));
}

// ---------------------------------------------------------------------------
// 5. SNCG strong duality and agreement with a first-order reference
// ---------------------------------------------------------------------------
void criterion5() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> U(0, 1);
  int bad = 0;
  double worst_grad = 0.0, worst_gap = 0.0, worst_x = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Eigen::Index n = 5 + static_cast<Eigen::Index>(45 * U(rng)), p = 5 + static_cast<Eigen::Index>(45 * U(rng));
    const ProblemInstance inst(oracle::gaussian_matrix(n, p, rng), oracle::gaussian_vector(n, rng, 2.0), 1e-3);
    SubproblemSpec s;
    s.inst = &inst;
    s.x_ref = oracle::gaussian_vector(p, rng);
    s.z_ref = k % 2 ? residual(inst, s.x_ref) : oracle::gaussian_vector(n, rng);
    s.omega = Vector(p);
    for (auto& w : s.omega) w = 0.05 + 0.3 * U(rng);
    s.mu = inst.mu();
    s.gamma1 = 0.05 + U(rng);
    s.gamma2 = 0.05 + U(rng);
    SNCGConfig cfg;
    cfg.eps_sncg = 1e-8;
    const auto res = solve_subproblem(s, cfg, Vector::Zero(n));
    const double scale = 1.0 + inst.norm_b();
    const double gap = std::abs(res.gap) / scale;
    const Vector ref = oracle::first_order_reference(s, 100000);
    const double dx = (res.x - ref).cwiseAbs().maxCoeff();
    worst_grad = std::max(worst_grad, res.grad_norm);
    worst_gap = std::max(worst_gap, gap);
    worst_x = std::max(worst_x, dx);
    if (res.status != SubproblemStatus::converged || res.grad_norm > 1e-8 || gap > 1e-8 || dx > 1e-6) ++bad;
  }
  const double secs = seconds_since(t0);
  record(5, bad == 0 && secs < 30.0,
         fmt("20 instances: max grad %.1e, max gap %.1e, max |x - ref| %.1e, %d failures, %.1f s", worst_grad, worst_gap,
             worst_x, bad, secs));
}

// ---------------------------------------------------------------------------
// 7. Exact-penalty desk check against support enumeration
// ---------------------------------------------------------------------------
void criterion7() {
  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> U(0, 1);
  int below = 0, matches = 0;
  double worst_below = 0.0;
  std::string log;
  for (int i = 0; i < 10; ++i) {
    const Eigen::Index n = 10 + static_cast<Eigen::Index>(6 * U(rng)), p = 6 + static_cast<Eigen::Index>(5 * U(rng));
    const Matrix A = oracle::gaussian_matrix(n, p, rng);
    Vector xs = Vector::Zero(p);
    std::vector<Eigen::Index> cols(static_cast<std::size_t>(p));
    std::iota(cols.begin(), cols.end(), 0);
    std::shuffle(cols.begin(), cols.end(), rng);
    for (int j = 0; j < 2; ++j) xs[cols[static_cast<std::size_t>(j)]] = (U(rng) < 0.5 ? -1 : 1) * (1 + 2 * U(rng));
    Vector b = A * xs;
    for (int j = 0; j < 2; ++j) b[static_cast<Eigen::Index>(U(rng) * static_cast<double>(n))] += 10 * (U(rng) - 0.5);
    const ProblemInstance inst(A, b, 1e-8);
    const PenaltyParams pp(6, 2.0 * inst.col_sum_norm() / static_cast<double>(n), 10.0);
    const auto en = oracle::zero_norm_global_min(A, b, inst.mu(), pp.nu());
    PMMConfig cfg;
    cfg.keep_history = true;
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < 20; ++s) {
      const Vector x0 = s == 0 ? init_x0(inst, pp.lambda(), cfg) : oracle::gaussian_vector(p, rng, 2.0);
      const auto rep = pmm_solve(inst, pp, cfg, x0);
      check_descent(rep, inst, pp);
      best = std::min(best, theta_objective(rep.x_out, inst, pp));
    }
    const double diff = best - en.value;
    if (diff < -1e-6) ++below;
    worst_below = std::min(worst_below, diff);
    if (std::abs(diff) <= 1e-6) ++matches;
    log += fmt(" %+.1e", diff);
  }
  std::fprintf(stderr, "  multistart best Theta - enumeration minimum per instance:%s\n", log.c_str());
  record(7, below == 0,
         fmt("hard: %d/10 below enumeration minimum (worst %.1e); soft: matches %d/10 (need >= 7: %s)", below,
             worst_below, matches, matches >= 7 ? "met" : "NOT met"));
}

// ---------------------------------------------------------------------------
// Example 5.1 runs shared by criteria 8, 9, 14 (and 6)
// ---------------------------------------------------------------------------
struct Ex51Run {
  double level = 0.0;
  bool converged = false;
  bool local_opt = false;
  double l2 = 0.0;
  Eigen::Index fp = 0, fn = 0;
  std::vector<double> tail;
};

std::vector<Ex51Run> g_ex51;
std::map<double, double> g_ex51_secs;

void run_ex51() {
  for (double level : {0.1, 0.2, 0.3}) {
    const auto t0 = Clock::now();
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      SyntheticSpec spec;  // (n, p) = (200, 1000), AR(0.8), fixed 16-sparse x*, N(0, 2) outliers
      spec.corrupt_count = static_cast<Eigen::Index>(std::floor(level * static_cast<double>(spec.n)));
      spec.seed = seed;
      const auto si = make_instance(spec);
      const double lambda = lambda_rule(si.inst, 0.2);
      PMMConfig cfg;
      cfg.keep_history = true;
      const auto st = compute_start(si.inst, lambda, cfg);
      const PenaltyParams pp(6, lambda, st.rho);
      const auto rep = pmm_solve(si.inst, pp, cfg, st.x0);
      check_descent(rep, si.inst, pp);
      Ex51Run r;
      r.level = level;
      r.converged = rep.termination == Termination::residual_tol || rep.termination == Termination::sparsity_stable;
      r.local_opt = check_local_opt_condition(rep.x_out, pp).holds;
      r.l2 = l2err(rep.x_out, si.x_true);
      const auto e = fp_fn(rep.x_out, si.x_true);
      r.fp = e.fp;
      r.fn = e.fn;
      r.tail = tail_ratios(rep, 5);
      g_ex51.push_back(r);
    }
    g_ex51_secs[level] = seconds_since(t0);
  }
}

void criterion8() {
  int converged = 0, flagged = 0;
  for (const auto& r : g_ex51) {
    if (!r.converged) continue;
    ++converged;
    flagged += r.local_opt;
  }
  // ≥ 8/10 of the converged runs, i.e. 24 of 30 when all converge
  const bool pass = converged > 0 && 10 * flagged >= 8 * converged;
  record(8, pass, fmt("local-opt flag true on %d of %d converged runs (|I|/n in {0.1,0.2,0.3})", flagged, converged));
}

void criterion9() {
  bool pass = true;
  std::string detail;
  for (double level : {0.1, 0.2, 0.3}) {
    int good = 0;
    double worst = 0.0;
    for (const auto& r : g_ex51) {
      if (r.level != level) continue;
      good += r.l2 <= 1e-2 && r.fp == 0 && r.fn == 0;
      worst = std::max(worst, r.l2);
    }
    const double secs = g_ex51_secs[level];
    pass = pass && good >= 8 && secs < 180.0;
    detail += fmt("|I|/n=%.1f: %d/10 ok (max L2err %.1e, %.1f s); ", level, good, worst, secs);
  }
  record(9, pass, detail);
}

void criterion14() {
  int good = 0, runs = 0, above_one = 0;
  double worst = 0.0;
  for (const auto& r : g_ex51) {
    if (!r.converged) continue;
    ++runs;
    double m = 0.0;
    for (double q : r.tail) m = std::max(m, q);
    worst = std::max(worst, m);
    good += m <= 0.95;
    above_one += m > 1.0;
  }
  record(14, runs > 0 && 10 * good >= 8 * runs && above_one == 0,
         fmt("last-5 ratios <= 0.95 on %d of %d converged runs; %d runs above 1.0; worst ratio %.3f", good, runs,
             above_one, worst));
}

// ---------------------------------------------------------------------------
// 10. PMMSN vs iPADMM at heavy corruption (iPADMM runs also feed criterion 12)
// ---------------------------------------------------------------------------
double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

void criterion10() {
  bool pass = true;
  std::string detail;
  for (double level : {0.4, 0.5}) {
    std::vector<double> e_pmm, e_admm;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      SyntheticSpec spec;
      spec.corrupt_count = static_cast<Eigen::Index>(std::floor(level * static_cast<double>(spec.n)));
      spec.seed = seed;
      const auto si = make_instance(spec);
      const double lambda = lambda_rule(si.inst, 0.2);
      PMMConfig cfg;
      cfg.keep_history = true;
      const auto st = compute_start(si.inst, lambda, cfg);
      const PenaltyParams pp(6, lambda, st.rho);
      const auto rep = pmm_solve(si.inst, pp, cfg, st.x0);
      check_descent(rep, si.inst, pp);
      e_pmm.push_back(l2err(rep.x_out, si.x_true));
      const ADMMConfig acfg{0.7, std::nullopt};
      const ADMMState s0{st.x0, residual(si.inst, st.x0), Vector::Zero(si.inst.n())};
      const auto arep = admm_solve(si.inst, pp, acfg, s0);
      check_admm(arep, pp, si.inst, false);
      e_admm.push_back(l2err(arep.x_out, si.x_true));
    }
    const double mp = median(e_pmm), ma = median(e_admm);
    pass = pass && mp <= ma;
    detail += fmt("|I|/n=%.1f: median L2err pmm %.3e vs ipadmm %.3e; ", level, mp, ma);
  }
  record(10, pass, detail);
}

// ---------------------------------------------------------------------------
// 11. Table-1 cell at paper scale plus the desk-scale fallback
// ---------------------------------------------------------------------------
struct CellStats {
  double nz = 0, l2 = 0, fp = 0, fn = 0, secs = 0;
  int exact = 0;
};

CellStats run_cell(Eigen::Index p, int reps) {
  const auto t0 = Clock::now();
  const auto sizes = table1_sizes(p);
  CellStats out;
  for (int r = 0; r < reps; ++r) {
    SyntheticSpec spec;
    spec.n = sizes.n;
    spec.p = p;
    spec.cov = CovAR{0.5};
    spec.signal = SignalGaussian{sizes.s_star, 4.0};
    spec.noise = NoiseSpec{NoiseKind::gaussian, 100.0};
    spec.corrupt_count = static_cast<Eigen::Index>(std::floor(0.3 * static_cast<double>(sizes.n)));
    spec.seed = 1 + static_cast<std::uint64_t>(r);
    spec.mu = 1e-8;
    const auto si = make_instance(spec);
    const double lambda = lambda_rule(si.inst, 0.12);
    PMMConfig cfg;
    cfg.keep_history = true;
    const auto st = compute_start(si.inst, lambda, cfg);
    const PenaltyParams pp(6, lambda, st.rho);
    const auto rep = pmm_solve(si.inst, pp, cfg, st.x0);
    check_descent(rep, si.inst, pp);
    const auto e = fp_fn(rep.x_out, si.x_true);
    out.nz += static_cast<double>(nnz_approx(rep.x_out)) / reps;
    out.l2 += l2err(rep.x_out, si.x_true) / reps;
    out.fp += static_cast<double>(e.fp) / reps;
    out.fn += static_cast<double>(e.fn) / reps;
    out.exact += e.fp == 0 && e.fn == 0;
  }
  out.secs = seconds_since(t0);
  return out;
}

void criterion11() {
  const CellStats paper = run_cell(5000, 10);
  const bool paper_ok = paper.nz >= 33 && paper.nz <= 37 && paper.l2 <= 1e-4 && paper.fp <= 0.5 && paper.fn <= 0.5 &&
                        paper.secs <= 900.0;
  const CellStats desk = run_cell(1000, 10);
  const bool desk_ok = desk.exact >= 8 && desk.secs < 120.0;
  record(11, paper_ok && desk_ok,
         fmt("p=5000: avg Nz %.1f, L2err %.2e, FP %.1f, FN %.1f, %.0f s; desk p=1000: FP=FN=0 in %d/10, %.1f s",
             paper.nz, paper.l2, paper.fp, paper.fn, paper.secs, desk.exact, desk.secs));
}

// ---------------------------------------------------------------------------
// 12. Lemma 5.1 descent for iPADMM
// ---------------------------------------------------------------------------
void criterion12() {
  // consistent starts y⁰ = ∇e_ε f(z⁰): the lemma applies from the first step
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    SyntheticSpec spec;
    spec.corrupt_count = 40;
    spec.seed = seed;
    const auto si = make_instance(spec);
    const double lambda = lambda_rule(si.inst, 0.2);
    const auto st = compute_start(si.inst, lambda, PMMConfig{});
    const PenaltyParams pp(6, lambda, st.rho);
    const ADMMConfig acfg{0.7, std::nullopt};
    const Vector z0 = residual(si.inst, st.x0);
    const ADMMState s0{st.x0, z0, moreau_l1_grad(z0, acfg.eps_smooth, si.inst.n())};
    check_admm(admm_solve(si.inst, pp, acfg, s0), pp, si.inst, true);
  }
  std::fprintf(stderr, "  iPADMM constants: %s\n", g_admm.constants.c_str());
  record(12, g_admm.runs > 0 && g_admm.violations == 0,
         fmt("%d runs (%s): worst gap/scale k>=1 %.2e, consistent starts all k %.2e; k=0 with y0=0 (reported) %.2e",
             g_admm.runs, g_admm.constants.c_str(), g_admm.worst_rel_gap_k1, g_admm.worst_rel_gap_consistent,
             g_admm.worst_rel_gap_k0));
}

// ---------------------------------------------------------------------------
// 13. Starting-point error bound
// ---------------------------------------------------------------------------
void criterion13() {
  int bad = 0;
  double worst_ratio = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SyntheticSpec spec;
    spec.n = 100;
    spec.p = 200;
    spec.signal = SignalGaussian{5, 4.0};
    spec.corrupt_count = 10;
    spec.seed = 1300 + seed;
    const auto si = make_instance(spec);
    PMMConfig cfg;
    cfg.eps_sncg_x0 = 1e-10;
    const double eps = 1e-2;  // bound on the subgradient residual of the approximate x⁰
    const double n = static_cast<double>(si.inst.n());
    const double lambda = 2.0 * (si.inst.col_sum_norm() / n + cfg.gamma1_0 * si.x_true.cwiseAbs().maxCoeff() +
                                 cfg.gamma2_0 * (si.inst.A().transpose() * si.noise).cwiseAbs().maxCoeff() + eps);
    const Vector x0 = init_x0(si.inst, lambda, cfg);
    const double bound = 3.0 * lambda * std::sqrt(static_cast<double>(si.support.size())) / (2.0 * cfg.gamma1_0);
    const double err = (x0 - si.x_true).norm();
    worst_ratio = std::max(worst_ratio, err / bound);
    bad += err > bound;
  }
  record(13, bad == 0, fmt("10 instances: %d bound violations, max ||x0 - x*|| / bound = %.3f", bad, worst_ratio));
}

// ---------------------------------------------------------------------------
// 15. Determinism
// ---------------------------------------------------------------------------
std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void criterion15() {
  const auto dir = std::filesystem::temp_directory_path();
  const std::string p1 = (dir / "sparseplq_accept_a.bin").string(), p2 = (dir / "sparseplq_accept_b.bin").string();
  SyntheticSpec spec;
  spec.n = 100;
  spec.p = 300;
  spec.corrupt_count = 15;
  spec.seed = 1515;
  save_instance(p1, make_instance(spec));
  save_instance(p2, make_instance(spec));
  const std::string a = slurp(p1), b = slurp(p2);
  const bool files_same = !a.empty() && a == b;
  const auto si = load_instance(p1);
  ExperimentOptions opt;
  opt.admm.k_max = 2000;
  auto r1 = run_solvers("det", si.inst, &si.x_true, opt);
  auto r2 = run_solvers("det", si.inst, &si.x_true, opt);
  for (auto* rows : {&r1, &r2})
    for (auto& r : *rows) r.time_s = 0.0;
  const bool records_same = r1 == r2;
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
  record(15, files_same && records_same,
         fmt("instance files %s (%zu bytes); RunRecords (excluding time_s) %s", files_same ? "identical" : "DIFFER",
             a.size(), records_same ? "identical" : "DIFFER"));
}

void criterion6() {
  record(6, g_descent.runs > 0 && g_descent.violations == 0,
         fmt("%d PMM runs: %d violations, worst gap/scale %.2e, worst Theta increase/scale %.2e", g_descent.runs,
             g_descent.violations, g_descent.worst_rel_gap, g_descent.worst_rel_increase));
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  const std::vector<std::pair<const char*, std::function<void()>>> steps = {
      {"1", criterion1},   {"2", criterion2},   {"3", criterion3},   {"4", criterion4},
      {"5", criterion5},   {"7", criterion7},   {"Ex5.1", run_ex51}, {"8", criterion8},
      {"9", criterion9},   {"14", criterion14}, {"10", criterion10}, {"12", criterion12},
      {"13", criterion13}, {"11", criterion11}, {"15", criterion15}, {"6", criterion6},
  };
  for (const auto& [name, fn] : steps) {
    std::fprintf(stderr, "-- running %s (t = %.1f s)\n", name, seconds_since(t0));
    try {
      fn();
    } catch (const std::exception& e) {
      const int id = std::atoi(name);
      if (id > 0) record(id, false, std::string("exception: ") + e.what());
      std::fprintf(stderr, "  step %s threw: %s\n", name, e.what());
    }
  }
  int failed = 0;
  for (int id = 1; id <= 15; ++id) {
    const auto it = g_results.find(id);
    const bool pass = it != g_results.end() && it->second.pass;
    failed += !pass;
    std::printf("Criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL",
                it != g_results.end() ? it->second.detail.c_str() : "not evaluated");
  }
  std::printf("%d/15 criteria passed in %.1f s\n", 15 - failed, seconds_since(t0));
  return failed == 0 ? 0 : 1;
}
