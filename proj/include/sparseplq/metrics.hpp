#pragma once

#include "sparseplq/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace sparseplq {

/// Approximate sparsity: entries with |x_i| > 1e-6‖x‖∞.
inline Eigen::Index nnz_approx(const Vector& x) {
  if (x.size() == 0) return 0;
  const double thr = 1e-6 * x.cwiseAbs().maxCoeff();
  Eigen::Index c = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) c += std::abs(x[i]) > thr;
  return c;
}

/// ‖x_out − x_true‖ / ‖x_true‖
inline double l2err(const Vector& x_out, const Vector& x_true) {
  if (x_out.size() != x_true.size()) throw DimensionError("l2err: length mismatch");
  const double nt = x_true.norm();
  if (nt == 0.0) throw std::invalid_argument("l2err: true signal is zero");
  return (x_out - x_true).norm() / nt;
}

struct SupportErrors {
  Eigen::Index fp = 0;  // detected but truly zero
  Eigen::Index fn = 0;  // truly nonzero but not detected
};

/// Support comparison with detection by the nnz_approx rule.
inline SupportErrors fp_fn(const Vector& x_out, const Vector& x_true) {
  if (x_out.size() != x_true.size()) throw DimensionError("fp_fn: length mismatch");
  SupportErrors e;
  const double thr = x_out.size() ? 1e-6 * x_out.cwiseAbs().maxCoeff() : 0.0;
  for (Eigen::Index i = 0; i < x_out.size(); ++i) {
    const bool detected = std::abs(x_out[i]) > thr;
    const bool truth = x_true[i] != 0.0;
    e.fp += detected && !truth;
    e.fn += !detected && truth;
  }
  return e;
}

/// (1/n)‖Ax − b‖₁
inline double loss_value(const ProblemInstance& inst, const Vector& x) { return l1_loss(residual(inst, x)); }

}  // namespace sparseplq
