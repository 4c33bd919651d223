#pragma once

// Banded symmetric positive definite systems and Gaussian draws from a
// banded precision (Gauss-Markov random field) parameterisation.

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "msdsp/error.hpp"
#include "msdsp/rng.hpp"

namespace msdsp {

/// Lower band storage: entry (i, j) with 0 <= i - j <= bandwidth.
class BandedMatrix {
 public:
  BandedMatrix(Eigen::Index n, Eigen::Index bandwidth)
      : n_(n), bw_(bandwidth), data_(static_cast<std::size_t>(n * (bandwidth + 1)), 0.0) {}

  [[nodiscard]] Eigen::Index size() const { return n_; }
  [[nodiscard]] Eigen::Index bandwidth() const { return bw_; }

  double& operator()(Eigen::Index i, Eigen::Index j) { return data_[slot(i, j)]; }
  [[nodiscard]] double operator()(Eigen::Index i, Eigen::Index j) const { return data_[slot(i, j)]; }

  [[nodiscard]] Eigen::MatrixXd dense() const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_, n_);
    for (Eigen::Index i = 0; i < n_; ++i)
      for (Eigen::Index j = std::max<Eigen::Index>(0, i - bw_); j <= i; ++j) out(i, j) = out(j, i) = (*this)(i, j);
    return out;
  }

 private:
  [[nodiscard]] std::size_t slot(Eigen::Index i, Eigen::Index j) const {
    return static_cast<std::size_t>(i * (bw_ + 1) + (i - j));
  }
  Eigen::Index n_;
  Eigen::Index bw_;
  std::vector<double> data_;
};

/// In-place banded Cholesky, Q = L L'. Throws NonConvergentCholesky on a
/// nonpositive pivot.
class BandedCholesky {
 public:
  explicit BandedCholesky(BandedMatrix q) : l_(std::move(q)) {
    const Eigen::Index n = l_.size(), bw = l_.bandwidth();
    for (Eigen::Index j = 0; j < n; ++j) {
      double d = l_(j, j);
      for (Eigen::Index k = std::max<Eigen::Index>(0, j - bw); k < j; ++k) d -= l_(j, k) * l_(j, k);
      if (!(d > 0.0) || !std::isfinite(d))
        throw Error(ErrorCode::NonConvergentCholesky, "nonpositive pivot at index " + std::to_string(j));
      const double ljj = std::sqrt(d);
      l_(j, j) = ljj;
      const Eigen::Index last = std::min(n - 1, j + bw);
      for (Eigen::Index i = j + 1; i <= last; ++i) {
        double v = l_(i, j);
        for (Eigen::Index k = std::max<Eigen::Index>(0, i - bw); k < j; ++k) v -= l_(i, k) * l_(j, k);
        l_(i, j) = v / ljj;
      }
    }
  }

  /// Solves L x = b.
  [[nodiscard]] Eigen::VectorXd solve_lower(Eigen::VectorXd b) const {
    const Eigen::Index n = l_.size(), bw = l_.bandwidth();
    for (Eigen::Index i = 0; i < n; ++i) {
      double v = b[i];
      for (Eigen::Index k = std::max<Eigen::Index>(0, i - bw); k < i; ++k) v -= l_(i, k) * b[k];
      b[i] = v / l_(i, i);
    }
    return b;
  }

  /// Solves L' x = b.
  [[nodiscard]] Eigen::VectorXd solve_upper(Eigen::VectorXd b) const {
    const Eigen::Index n = l_.size(), bw = l_.bandwidth();
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      double v = b[i];
      const Eigen::Index last = std::min(n - 1, i + bw);
      for (Eigen::Index k = i + 1; k <= last; ++k) v -= l_(k, i) * b[k];
      b[i] = v / l_(i, i);
    }
    return b;
  }

  [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& b) const { return solve_upper(solve_lower(b)); }

  [[nodiscard]] double log_determinant() const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < l_.size(); ++i) s += std::log(l_(i, i));
    return 2.0 * s;
  }

 private:
  BandedMatrix l_;
};

/// Draws x ~ N(Q^{-1} b, Q^{-1}) for banded precision Q. The factorisation
/// runs on the index-reversed system: callers put weakly identified nodes
/// (diffuse initial states) first, and eliminating them last keeps the pivots
/// away from cancellation.
inline Eigen::VectorXd sample_gmrf(const BandedMatrix& precision, const Eigen::VectorXd& linear, Rng& rng) {
  const Eigen::Index n = precision.size(), bw = precision.bandwidth();
  BandedMatrix rev(n, bw);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = std::max<Eigen::Index>(0, i - bw); j <= i; ++j) rev(n - 1 - j, n - 1 - i) = precision(i, j);
  BandedCholesky chol(std::move(rev));
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.normal();
  const Eigen::VectorXd x = chol.solve(linear.reverse()) + chol.solve_upper(std::move(z));
  return x.reverse();
}

/// Mean and draw of an AR(1)-type chain with tridiagonal precision given as
/// diagonal and subdiagonal vectors.
inline Eigen::VectorXd sample_tridiagonal_gmrf(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub,
                                               const Eigen::VectorXd& linear, Rng& rng) {
  BandedMatrix q(diag.size(), 1);
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    q(i, i) = diag[i];
    if (i > 0) q(i, i - 1) = sub[i - 1];
  }
  return sample_gmrf(q, linear, rng);
}

}  // namespace msdsp
