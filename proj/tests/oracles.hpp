// Independent reference implementations used only by tests. Each oracle is
// deliberately written as a literal transcription of the defining formula,
// not by calling the library code it checks.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

// --- Symmetric eigendecomposition by cyclic Jacobi rotations. ---------------

struct EigenSym {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // columns
};

inline EigenSym jacobi_eigensym(Eigen::MatrixXd a) {
  const int n = static_cast<int>(a.rows());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(n, n);
        rot(p, p) = c;
        rot(q, q) = c;
        rot(p, q) = s;
        rot(q, p) = -s;
        a = rot.transpose() * a * rot;
        v = v * rot;
      }
    }
  }
  EigenSym out;
  out.values = a.diagonal();
  out.vectors = v;
  return out;
}

/// V diag(max(lambda, floor))^{-1/2} V^T of the sample covariance.
inline Eigen::MatrixXd inverse_sqrt_cov(const Eigen::MatrixXd& data) {
  const int n = static_cast<int>(data.rows());
  const int d = static_cast<int>(data.cols());
  Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(d);
  for (int i = 0; i < n; ++i) mean += data.row(i);
  mean /= n;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    const Eigen::RowVectorXd c = data.row(i) - mean;
    cov += c.transpose() * c;
  }
  cov /= (n - 1);
  const auto es = jacobi_eigensym(cov);
  const double floor = 1e-8 * cov.trace() / d;
  Eigen::MatrixXd lam = Eigen::MatrixXd::Zero(d, d);
  for (int k = 0; k < d; ++k)
    lam(k, k) = 1.0 / std::sqrt(std::max(es.values[k], floor));
  return es.vectors * lam * es.vectors.transpose();
}

// --- Literal spatial depth / kernel sums. -----------------------------------

inline double spd_brute(const Eigen::VectorXd& x, const Eigen::MatrixXd& data,
                        const Eigen::MatrixXd& whiten_full) {
  const int n = static_cast<int>(data.rows());
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(x.size());
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd t = whiten_full * (x - data.row(i).transpose());
    const double nm = t.norm();
    if (nm >= 1e-12) acc += t / nm;
  }
  return 1.0 - (acc / n).norm();
}

/// Plain Gaussian KDE on whitened differences: the first term of the local
/// depth, computed literally as h^{-d} (2 pi)^{-d/2} exp(-r^2 / (2 h^2)).
inline double kde_at(const Eigen::VectorXd& x, const Eigen::MatrixXd& data,
                     double h) {
  const int n = static_cast<int>(data.rows());
  const int d = static_cast<int>(x.size());
  double acc = 0.0;
  const double norm =
      std::pow(h, -d) * std::pow(2.0 * std::numbers::pi, -0.5 * d);
  for (int i = 0; i < n; ++i) {
    const double r2 = (x - data.row(i).transpose()).squaredNorm();
    acc += norm * std::exp(-r2 / (2.0 * h * h));
  }
  return acc / n;
}

/// Unnormalized empirical z_h entry: mean g(r/h) - || mean g(r/h) u ||,
/// the h > 1 branch with kernel profile g(s) = exp(-s^2/2).
inline double lspd_profile_brute(const Eigen::VectorXd& x, const Eigen::MatrixXd& data,
                                 double h) {
  const int n = static_cast<int>(data.rows());
  double s0 = 0.0;
  Eigen::VectorXd sv = Eigen::VectorXd::Zero(x.size());
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd t = x - data.row(i).transpose();
    const double r = t.norm();
    const double g = std::exp(-0.5 * (r / h) * (r / h));
    s0 += g;
    if (r >= 1e-12) sv += g * t / r;
  }
  return s0 / n - (sv / n).norm();
}

// --- Recursive Cox-de Boor B-spline basis. -----------------------------------

inline double bspline_recursive(const std::vector<double>& knots, int i, int order,
                                double x) {
  if (order == 1)
    return (knots[i] <= x && x < knots[i + 1]) ? 1.0 : 0.0;
  double left = 0.0, right = 0.0;
  const double dl = knots[i + order - 1] - knots[i];
  const double dr = knots[i + order] - knots[i + 1];
  if (dl > 0.0) left = (x - knots[i]) / dl * bspline_recursive(knots, i, order - 1, x);
  if (dr > 0.0)
    right = (knots[i + order] - x) / dr * bspline_recursive(knots, i + 1, order - 1, x);
  return left + right;
}

// --- Plain two-class logistic regression (Newton, no penalty). ---------------

/// Fits P(y=1|x) = sigmoid(b' [1 x]) for labels in {1, 2} (class 1 is the
/// "positive" outcome, matching the reference-class convention).
inline Eigen::VectorXd logistic_newton(const Eigen::MatrixXd& X,
                                       const Eigen::VectorXi& labels) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols()) + 1;
  Eigen::MatrixXd D(n, p);
  D.col(0).setOnes();
  D.rightCols(p - 1) = X;
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = labels[i] == 1 ? 1.0 : 0.0;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  for (int iter = 0; iter < 200; ++iter) {
    const Eigen::VectorXd eta = D * b;
    Eigen::VectorXd mu(n), w(n);
    for (int i = 0; i < n; ++i) {
      mu[i] = 1.0 / (1.0 + std::exp(-eta[i]));
      w[i] = mu[i] * (1.0 - mu[i]);
    }
    const Eigen::VectorXd g = D.transpose() * (y - mu);
    if (g.cwiseAbs().maxCoeff() < 1e-10) break;
    const Eigen::MatrixXd H = D.transpose() * w.asDiagonal() * D;
    b += H.ldlt().solve(g);
  }
  return b;
}

// --- Exhaustive k-NN. ---------------------------------------------------------

inline int knn_brute(const Eigen::MatrixXd& train, const Eigen::VectorXi& labels,
                     int num_classes, const Eigen::VectorXd& q, int k,
                     bool squared_distance) {
  const int n = static_cast<int>(train.rows());
  std::vector<std::pair<double, int>> d(n);
  for (int i = 0; i < n; ++i) {
    const double dist2 = (train.row(i).transpose() - q).squaredNorm();
    d[i] = {squared_distance ? dist2 : std::sqrt(dist2), i};
  }
  std::sort(d.begin(), d.end());
  std::vector<int> votes(num_classes, 0);
  for (int r = 0; r < k; ++r) ++votes[labels[d[r].second] - 1];
  int best = 0;
  for (int j = 1; j < num_classes; ++j)
    if (votes[j] > votes[best]) best = j;
  return best + 1;
}

}  // namespace oracle
