#pragma once

#include "sparseplq/metrics.hpp"
#include "sparseplq/penalty.hpp"
#include "sparseplq/problem.hpp"
#include "sparseplq/sncg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace sparseplq {

struct PMMConfig {
  double gamma1_0 = 0.1;
  double gamma2_0 = 0.1;
  double gamma1_min = 1e-8;
  double gamma2_min = 1e-8;
  double varrho = 0.8;
  double tol = 1e-6;
  double tol_sparse = 1e-4;
  int k_max = 200;
  // Inner solves for the MM subproblems get a larger Newton budget than the
  // starting-point problem: once γ is small, a subproblem whose active set
  // changes a lot can need a few hundred damped Newton steps, and accepting an
  // unconverged iterate breaks the descent of Θ.
  SNCGConfig sncg = [] {
    SNCGConfig c;
    c.j_max = 500;
    return c;
  }();
  /// Tolerance of the starting-point problem (4.3).
  double eps_sncg_x0 = 1e-5;
  // Inner tolerance schedule: ε_k = max(floor, decay^k · start). Tight enough
  // that the descent inequality holds within 1e-8 relative slack.
  double eps_sncg_start = 1e-8;
  double eps_sncg_decay = 0.1;
  double eps_sncg_floor = 1e-10;
  int x0_jmax = 50;
  /// Keep every iterate (needed by descent_gap and tail_ratios).
  bool keep_history = false;

  void validate() const {
    if (!(gamma1_0 > 0.0 && gamma2_0 > 0.0 && gamma1_min > 0.0 && gamma2_min > 0.0)) {
      throw std::invalid_argument("proximal parameters must be positive");
    }
    if (!(varrho > 0.0 && varrho <= 1.0)) throw std::invalid_argument("varrho must lie in (0,1]");
    if (k_max < 0 || x0_jmax < 0) throw std::invalid_argument("iteration limits must be nonnegative");
    if (!(eps_sncg_x0 > 0.0 && eps_sncg_start > 0.0 && eps_sncg_floor > 0.0 && eps_sncg_decay > 0.0 && eps_sncg_decay <= 1.0)) {
      throw std::invalid_argument("bad inner tolerance schedule");
    }
  }
};

enum class Termination { residual_tol, sparsity_stable, max_iters, stalled };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::residual_tol: return "residual_tol";
    case Termination::sparsity_stable: return "sparsity_stable";
    case Termination::max_iters: return "max_iters";
    case Termination::stalled: return "stalled";
  }
  return "unknown";
}

/// Output of either solver. For iPADMM the objective trace holds augmented
/// Lagrangian values and err_trace holds max(pinf, dinf).
struct SolveReport {
  Vector x_out;
  std::vector<double> objective_trace;  // k = 0..iterations
  std::vector<double> err_trace;        // k = 1..iterations
  std::vector<Eigen::Index> nz_trace;   // k = 0..iterations
  std::vector<double> gamma1_trace;     // modulus used to produce x^{k+1}
  std::vector<double> gamma2_trace;
  std::vector<Vector> history;          // x^0..x^K when requested
  int iterations = 0;
  double wall_time = 0.0;
  Termination termination = Termination::max_iters;
  bool local_opt_flag = false;
  double rho = 1.0;
  double lambda = 0.0;
  int inner_iterations = 0;
  int inner_stalls = 0;
};

/// Starting-point problem
///   min f(Ax − b) + λ‖x‖₁ + (γ₁₀/2)‖x‖² + (γ₂₀/2)‖Ax − b‖²
/// solved by SNCG from u = 0.
inline SubproblemResult solve_x0_problem(const ProblemInstance& inst, double lambda, const PMMConfig& cfg) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  SubproblemSpec spec;
  spec.inst = &inst;
  spec.x_ref = Vector::Zero(inst.p());
  spec.z_ref = Vector::Zero(inst.n());
  spec.omega = Vector::Constant(inst.p(), lambda);
  spec.mu = 0.0;
  spec.gamma1 = cfg.gamma1_0;
  spec.gamma2 = cfg.gamma2_0;
  SNCGConfig sc = cfg.sncg;
  sc.eps_sncg = cfg.eps_sncg_x0;
  sc.j_max = cfg.x0_jmax;
  return solve_subproblem(spec, sc, Vector::Zero(inst.n()));
}

inline Vector init_x0(const ProblemInstance& inst, double lambda, const PMMConfig& cfg) {
  return solve_x0_problem(inst, lambda, cfg).x;
}

/// ρ = max(1, c/‖x⁰‖∞) with c = 25/6 when n ≤ p and 25/4 when n > p.
inline double choose_rho(const Vector& x0, Eigen::Index n, Eigen::Index p) {
  const double xinf = x0.size() ? x0.cwiseAbs().maxCoeff() : 0.0;
  if (xinf == 0.0) return 1.0;
  const double c = n <= p ? 25.0 / 6.0 : 25.0 / 4.0;
  return std::max(1.0, c / xinf);
}

/// Err_k = ‖λ(w_prev − w_cur) + (γ₁I + γ₂AᵀA)(x_prev − x_cur)‖ / (1 + ‖b‖)
inline double err_k(const Vector& w_prev, const Vector& w_cur, const Vector& x_prev, const Vector& x_cur,
                    double gamma1, double gamma2, const ProblemInstance& inst, double lambda) {
  const Vector dx = x_prev - x_cur;
  const Vector Adx = inst.A() * dx;
  Vector v = lambda * (w_prev - w_cur) + gamma1 * dx;
  v.noalias() += gamma2 * (inst.A().transpose() * Adx);
  return v.norm() / (1.0 + inst.norm_b());
}

/// Proximal majorization-minimization with SNCG inner solves.
///
/// When x0 is absent it is computed by init_x0 and ρ is replaced by
/// choose_rho(x0); otherwise params are used as given.
inline SolveReport pmm_solve(const ProblemInstance& inst, const PenaltyParams& params_in, const PMMConfig& cfg,
                             const std::optional<Vector>& x0_opt = std::nullopt) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  Vector x;
  PenaltyParams params = params_in;
  if (x0_opt) {
    if (x0_opt->size() != inst.p()) throw DimensionError("x0 must have length p");
    x = *x0_opt;
  } else {
    x = init_x0(inst, params_in.lambda(), cfg);
    params = params_in.with_rho(choose_rho(x, inst.n(), inst.p()));
  }
  const double lambda = params.lambda();

  SolveReport rep;
  rep.rho = params.rho();
  rep.lambda = lambda;
  rep.objective_trace.push_back(theta_objective(x, inst, params));
  rep.nz_trace.push_back(nnz_approx(x));
  if (cfg.keep_history) rep.history.push_back(x);

  Vector w = w_rho(x, params);
  Vector u = Vector::Zero(inst.n());
  double g1 = cfg.gamma1_0;
  double g2 = cfg.gamma2_0;
  double eps = cfg.eps_sncg_start;
  int consecutive_stalls = 0;

  SubproblemSpec spec;
  spec.inst = &inst;
  spec.mu = inst.mu();
  SNCGConfig sc = cfg.sncg;

  int k = 0;
  while (true) {
    if (k >= cfg.k_max) {
      rep.termination = Termination::max_iters;
      break;
    }
    spec.x_ref = x;
    spec.z_ref = residual(inst, x);
    spec.omega = lambda * (Vector::Ones(inst.p()) - w);
    spec.gamma1 = g1;
    spec.gamma2 = g2;
    sc.eps_sncg = eps;
    SubproblemResult sub = solve_subproblem(spec, sc, u);
    rep.inner_iterations += sub.iterations;

    Vector x_new = std::move(sub.x);
    Vector w_new = w_rho(x_new, params);
    const double err = err_k(w, w_new, x, x_new, g1, g2, inst, lambda);
    rep.gamma1_trace.push_back(g1);
    rep.gamma2_trace.push_back(g2);

    x = std::move(x_new);
    w = std::move(w_new);
    u = std::move(sub.u);
    ++k;
    rep.err_trace.push_back(err);
    rep.objective_trace.push_back(theta_objective(x, inst, params));
    rep.nz_trace.push_back(nnz_approx(x));
    if (cfg.keep_history) rep.history.push_back(x);

    g1 = std::max(cfg.gamma1_min, cfg.varrho * g1);
    g2 = std::max(cfg.gamma2_min, cfg.varrho * g2);
    eps = std::max(cfg.eps_sncg_floor, cfg.eps_sncg_decay * eps);

    if (sub.status == SubproblemStatus::stalled) {
      ++rep.inner_stalls;
      if (++consecutive_stalls >= 2) {
        rep.termination = Termination::stalled;
        break;
      }
    } else {
      consecutive_stalls = 0;
    }

    if (err <= cfg.tol) {
      rep.termination = Termination::residual_tol;
      break;
    }
    if (k >= 3 && err <= cfg.tol_sparse) {
      const auto& nz = rep.nz_trace;
      bool stable = true;
      for (int j = 0; j < 3; ++j) {
        const auto diff = nz[static_cast<std::size_t>(k - j)] - nz[static_cast<std::size_t>(k - j - 1)];
        stable = stable && std::abs(diff) <= 2;
      }
      if (stable) {
        rep.termination = Termination::sparsity_stable;
        break;
      }
    }
  }

  rep.iterations = k;
  rep.x_out = std::move(x);
  rep.local_opt_flag = check_local_opt_condition(rep.x_out, params).holds;
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

/// Θ(x^k) − Θ(x^{k+1}) − ‖x^{k+1} − x^k‖²_{γ₁I+γ₂AᵀA} for every step; the
/// descent lemma says each entry is nonnegative up to inner-solve error.
inline std::vector<double> descent_gap(const SolveReport& rep, const ProblemInstance& inst, const PenaltyParams& params) {
  if (rep.history.size() != rep.objective_trace.size()) {
    throw std::invalid_argument("descent_gap needs a report produced with keep_history");
  }
  const PenaltyParams pp = params.with_rho(rep.rho);
  std::vector<double> gaps;
  for (std::size_t k = 0; k + 1 < rep.history.size(); ++k) {
    const Vector d = rep.history[k + 1] - rep.history[k];
    const double m = rep.gamma1_trace[k] * d.squaredNorm() + rep.gamma2_trace[k] * (inst.A() * d).squaredNorm();
    gaps.push_back(theta_objective(rep.history[k], inst, pp) - theta_objective(rep.history[k + 1], inst, pp) - m);
  }
  return gaps;
}

/// ‖x^{k+1} − x_out‖/‖x^k − x_out‖ over the last `count` steps that have a
/// nonzero denominator (requires history).
inline std::vector<double> tail_ratios(const SolveReport& rep, std::size_t count = 5) {
  std::vector<double> out;
  const auto& h = rep.history;
  if (h.size() < 2) return out;
  for (std::size_t k = h.size() - 1; k-- > 0 && out.size() < count;) {
    const double den = (h[k] - rep.x_out).norm();
    const double num = (h[k + 1] - rep.x_out).norm();
    if (den == 0.0) continue;
    out.push_back(num / den);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace sparseplq
