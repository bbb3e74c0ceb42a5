#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sparseplq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

inline double power_iteration_sq(const Matrix& A, bool* converged) {
  const Eigen::Index p = A.cols();
  // All-ones start with a deterministic perturbation so that no eigenvector
  // of AᵀA is orthogonal to it by symmetry.
  Vector v(p);
  for (Eigen::Index j = 0; j < p; ++j) v[j] = 1.0 + 1e-3 * std::sin(static_cast<double>(j + 1));
  v.normalize();
  double estimate = 0.0;
  *converged = false;
  Vector Av(A.rows());
  for (int it = 0; it < 1000; ++it) {
    Av.noalias() = A * v;
    Vector w = A.transpose() * Av;
    const double rq = v.dot(w);
    const double wn = w.norm();
    if (wn == 0.0) {
      *converged = true;
      return 0.0;
    }
    v = w / wn;
    if (it > 0 && std::abs(rq - estimate) <= 1e-6 * std::abs(rq)) {
      // One more Rayleigh quotient on the updated vector.
      Av.noalias() = A * v;
      estimate = std::max(rq, Av.squaredNorm());
      *converged = true;
      return estimate;
    }
    estimate = rq;
  }
  return estimate;
}

}  // namespace detail

/// Squared spectral norm ‖A‖² by power iteration on AᵀA.
///
/// The raw Rayleigh-quotient estimate is exposed for testing; callers that
/// need an upper bound (the iPADMM step parameter) use spectral_norm_sq.
inline double spectral_norm_sq_raw(const Matrix& A, bool* converged = nullptr) {
  bool ok = false;
  const double est = detail::power_iteration_sq(A, &ok);
  if (converged) *converged = ok;
  return est;
}

inline double spectral_norm_sq(const Matrix& A) {
  bool ok = false;
  const double est = detail::power_iteration_sq(A, &ok);
  return ok ? est * 1.001 : est * 1.01;
}

/// Averaged ℓ1 loss (1/n)Σ|z_i|.
inline double l1_loss(const Vector& z) {
  if (z.size() == 0) return 0.0;
  return z.lpNorm<1>() / static_cast<double>(z.size());
}

/// Design matrix, observations and ridge weight of one problem. Immutable
/// after construction.
class ProblemInstance {
 public:
  ProblemInstance(Matrix A, Vector b, double mu = 1e-8) : A_(std::move(A)), b_(std::move(b)), mu_(mu) {
    if (A_.rows() < 1 || A_.cols() < 1) throw DimensionError("design matrix must be at least 1x1");
    if (A_.rows() != b_.size()) throw DimensionError("rows of A and length of b differ");
    if (!(mu_ >= 0.0) || !std::isfinite(mu_)) throw std::invalid_argument("mu must be finite and nonnegative");
    if (!A_.allFinite() || !b_.allFinite()) throw std::invalid_argument("A and b must be finite");
    col_sum_norm_ = A_.cwiseAbs().colwise().sum().maxCoeff();
    max_abs_ = A_.cwiseAbs().maxCoeff();
    norm_b_ = b_.norm();
    spec_norm_sq_ = max_abs_ == 0.0 ? 0.0 : spectral_norm_sq(A_);
  }

  const Matrix& A() const noexcept { return A_; }
  const Vector& b() const noexcept { return b_; }
  double mu() const noexcept { return mu_; }
  Eigen::Index n() const noexcept { return A_.rows(); }
  Eigen::Index p() const noexcept { return A_.cols(); }

  /// ‖A‖² with the safety margin applied.
  double spec_norm_sq() const noexcept { return spec_norm_sq_; }
  /// max_j Σ_i |A_ij|
  double col_sum_norm() const noexcept { return col_sum_norm_; }
  /// max_ij |A_ij|
  double max_abs() const noexcept { return max_abs_; }
  double norm_b() const noexcept { return norm_b_; }

  ProblemInstance with_mu(double mu) const { return ProblemInstance(A_, b_, mu); }

 private:
  Matrix A_;
  Vector b_;
  double mu_;
  double spec_norm_sq_ = 0.0;
  double col_sum_norm_ = 0.0;
  double max_abs_ = 0.0;
  double norm_b_ = 0.0;
};

/// Ax − b
inline Vector residual(const ProblemInstance& inst, const Vector& x) {
  if (x.size() != inst.p()) {
    throw DimensionError("x has length " + std::to_string(x.size()) + ", expected " + std::to_string(inst.p()));
  }
  return inst.A() * x - inst.b();
}

// ---------------------------------------------------------------------------
// LIBSVM text format
// ---------------------------------------------------------------------------

namespace detail {

inline double parse_double(const std::string& tok, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    throw ParseError(line, "non-numeric token '" + tok + "'");
  }
  if (used != tok.size()) throw ParseError(line, "non-numeric token '" + tok + "'");
  if (!std::isfinite(v)) throw ParseError(line, "non-finite value '" + tok + "'");
  return v;
}

inline long parse_index(const std::string& tok, std::size_t line) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(tok, &used);
  } catch (const std::exception&) {
    throw ParseError(line, "bad feature index '" + tok + "'");
  }
  if (used != tok.size() || v < 1) throw ParseError(line, "bad feature index '" + tok + "'");
  return v;
}

}  // namespace detail

/// Parses LIBSVM sparse text (`label idx:val ...`, 1-based increasing
/// indices) into a dense instance. p is the largest index seen.
inline ProblemInstance parse_libsvm(std::istream& in, double mu = 1e-8) {
  struct Row {
    double label;
    std::vector<std::pair<long, double>> entries;
  };
  std::vector<Row> rows;
  long p = 0;
  std::string text;
  std::size_t lineno = 0;
  while (std::getline(in, text)) {
    ++lineno;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    std::istringstream ls(text);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank line
    if (tok.front() == '#') throw ParseError(lineno, "comments are not supported");
    Row row{detail::parse_double(tok, lineno), {}};
    long last = 0;
    while (ls >> tok) {
      if (tok.front() == '#') throw ParseError(lineno, "comments are not supported");
      const auto colon = tok.find(':');
      if (colon == std::string::npos) throw ParseError(lineno, "expected idx:val, got '" + tok + "'");
      const long idx = detail::parse_index(tok.substr(0, colon), lineno);
      const double val = detail::parse_double(tok.substr(colon + 1), lineno);
      if (idx <= last) throw ParseError(lineno, "feature indices must be strictly increasing");
      last = idx;
      row.entries.emplace_back(idx, val);
    }
    p = std::max(p, last);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(lineno, "no samples in input");
  if (p == 0) throw ParseError(lineno, "no features in input");

  Matrix A = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), p);
  Vector b(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    b[r] = rows[i].label;
    for (const auto& [idx, val] : rows[i].entries) A(r, idx - 1) = val;
  }
  return ProblemInstance(std::move(A), std::move(b), mu);
}

inline ProblemInstance load_libsvm(const std::string& path, double mu = 1e-8) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_libsvm(in, mu);
}

/// Writes nonzero entries only, with full double precision.
inline void write_libsvm(std::ostream& out, const Matrix& A, const Vector& b) {
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    out << b[i];
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (A(i, j) != 0.0) out << ' ' << (j + 1) << ':' << A(i, j);
    }
    out << '\n';
  }
}

}  // namespace sparseplq
