#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "lspd/errors.hpp"

namespace lspd {

enum class ScatterMode { Full, Diagonal, Identity };

/// A per-class standardization operator: applies the inverse symmetric
/// square root of a scatter estimate (Full), reciprocal per-coordinate
/// standard deviations (Diagonal), or nothing (Identity).
class Whitener {
public:
  Whitener() = default;

  static Whitener identity(int dim) {
    Whitener w;
    w.mode_ = ScatterMode::Identity;
    w.dim_ = dim;
    return w;
  }

  static Whitener diagonal(Eigen::VectorXd inv_sd) {
    Whitener w;
    w.mode_ = ScatterMode::Diagonal;
    w.dim_ = static_cast<int>(inv_sd.size());
    w.diag_ = std::move(inv_sd);
    return w;
  }

  static Whitener full(Eigen::MatrixXd transform, double log_det_scatter) {
    Whitener w;
    w.mode_ = ScatterMode::Full;
    w.dim_ = static_cast<int>(transform.rows());
    w.matrix_ = std::move(transform);
    w.log_det_ = log_det_scatter;
    return w;
  }

  ScatterMode mode() const { return mode_; }
  int dim() const { return dim_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  const Eigen::VectorXd& diag() const { return diag_; }

  /// log|Sigma| of the (floored) scatter estimate; used by QDA.
  double log_det_scatter() const { return log_det_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& t) const {
    if (static_cast<int>(t.size()) != dim_)
      throw ShapeError("whiten: vector length does not match whitener dim");
    switch (mode_) {
      case ScatterMode::Identity:
        return t;
      case ScatterMode::Diagonal:
        return diag_.cwiseProduct(t);
      case ScatterMode::Full:
        return matrix_ * t;
    }
    return t;
  }

  /// Whitens every row of a matrix of difference vectors in place.
  void apply_rows(Eigen::MatrixXd& rows) const {
    if (static_cast<int>(rows.cols()) != dim_)
      throw ShapeError("whiten: row length does not match whitener dim");
    switch (mode_) {
      case ScatterMode::Identity:
        break;
      case ScatterMode::Diagonal:
        rows = rows.array().rowwise() * diag_.transpose().array();
        break;
      case ScatterMode::Full:
        rows = rows * matrix_;  // matrix_ is symmetric
        break;
    }
  }

private:
  ScatterMode mode_ = ScatterMode::Identity;
  int dim_ = 0;
  Eigen::MatrixXd matrix_;  // Full: symmetric positive definite
  Eigen::VectorXd diag_;    // Diagonal: strictly positive entries
  double log_det_ = 0.0;
};

/// Default mode rule used by the higher layers: full scatter when the class
/// holds comfortably more observations than 2d, per-coordinate standard
/// deviations otherwise, identity as the last resort.
inline ScatterMode default_scatter_mode(int n_class, int dim) {
  if (n_class > 2 * dim) return ScatterMode::Full;
  if (n_class >= 2) return ScatterMode::Diagonal;
  return ScatterMode::Identity;
}

/// Estimates a whitening operator from an n x d sample. Full mode inverts the
/// symmetric square root of the sample covariance (denominator n-1), with
/// eigenvalues floored at 1e-8 * trace/d so degenerate scatter stays finite.
inline Whitener estimate_scatter(const Eigen::MatrixXd& data, ScatterMode mode) {
  const int n = static_cast<int>(data.rows());
  const int d = static_cast<int>(data.cols());
  if (mode == ScatterMode::Identity) return Whitener::identity(d);
  if (n < 2) throw InsufficientDataError("estimate_scatter: need at least 2 rows");
  if (!data.allFinite()) throw InvalidDataError("estimate_scatter: non-finite input");

  const Eigen::RowVectorXd mean = data.colwise().mean();
  const Eigen::MatrixXd centered = data.rowwise() - mean;

  if (mode == ScatterMode::Diagonal) {
    Eigen::VectorXd var = centered.array().square().colwise().sum() / double(n - 1);
    const double tr = var.sum();
    const double floor = 1e-8 * (tr > 0.0 ? tr / d : 1.0);
    Eigen::VectorXd inv_sd(d);
    for (int k = 0; k < d; ++k) inv_sd[k] = 1.0 / std::sqrt(std::max(var[k], floor));
    return Whitener::diagonal(std::move(inv_sd));
  }

  const Eigen::MatrixXd cov =
      (centered.transpose() * centered) / double(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success)
    throw NumericalError("estimate_scatter: eigendecomposition failed");
  const double tr = cov.trace();
  const double floor = 1e-8 * (tr > 0.0 ? tr / d : 1.0);
  Eigen::VectorXd lam = es.eigenvalues();
  double log_det = 0.0;
  Eigen::VectorXd inv_sqrt(d);
  for (int k = 0; k < d; ++k) {
    const double lk = std::max(lam[k], floor);
    log_det += std::log(lk);
    inv_sqrt[k] = 1.0 / std::sqrt(lk);
  }
  Eigen::MatrixXd w =
      es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
  return Whitener::full(std::move(w), log_det);
}

/// True if any eigenvalue of the Full-mode scatter hit the floor (the sample
/// covariance was singular or nearly so).
inline bool scatter_was_floored(const Eigen::MatrixXd& data) {
  const int n = static_cast<int>(data.rows());
  const int d = static_cast<int>(data.cols());
  if (n < 2) return true;
  const Eigen::RowVectorXd mean = data.colwise().mean();
  const Eigen::MatrixXd centered = data.rowwise() - mean;
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / double(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const double tr = cov.trace();
  const double floor = 1e-8 * (tr > 0.0 ? tr / d : 1.0);
  return es.eigenvalues().minCoeff() <= floor;
}

/// Estimates the pooled within-class whitener used by the reference
/// classifiers: class-centered residuals pooled with denominator n - J.
inline Whitener estimate_pooled_scatter(const std::vector<Eigen::MatrixXd>& perclass,
                                        ScatterMode mode) {
  if (perclass.empty()) throw InsufficientDataError("pooled scatter: no classes");
  const int d = static_cast<int>(perclass.front().cols());
  if (mode == ScatterMode::Identity) return Whitener::identity(d);
  int n = 0;
  for (const auto& m : perclass) n += static_cast<int>(m.rows());
  const int J = static_cast<int>(perclass.size());
  if (n - J < 1) throw InsufficientDataError("pooled scatter: need n > J rows");

  // Stack class-centered residuals and reuse estimate_scatter on them with a
  // matched denominator: scale residuals so that (n_res - 1) == (n - J).
  Eigen::MatrixXd residuals(n, d);
  int at = 0;
  for (const auto& m : perclass) {
    const Eigen::RowVectorXd mu = m.colwise().mean();
    residuals.middleRows(at, m.rows()) = m.rowwise() - mu;
    at += static_cast<int>(m.rows());
  }
  const double scale = std::sqrt(double(n - 1) / double(n - J));
  residuals *= scale;
  return estimate_scatter(residuals, mode);
}

}  // namespace lspd
