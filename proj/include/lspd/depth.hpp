#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "lspd/errors.hpp"
#include "lspd/numerics.hpp"

namespace lspd {

// Norm threshold below which a difference vector counts as zero; the sign of
// the zero vector is the zero vector.
inline constexpr double kZeroNormTol = 1e-12;

enum class KernelFamily { Gaussian };

/// Radial kernel K(t) = g(||t||); Gaussian: K(t) = (2*pi)^{-d/2} exp(-||t||^2/2).
struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;
  int dim = 1;

  double log_k0() const { return -0.5 * dim * std::log(2.0 * std::numbers::pi); }
  double k0() const { return std::exp(log_k0()); }

  /// Unnormalized profile g(s) = exp(-s^2/2).
  static double profile(double s) { return std::exp(-0.5 * s * s); }
};

/// The per-class depth covariate vector z(x) (SPD) or z_h(x) (LSPD).
struct DepthFeatures {
  Eigen::VectorXd values;            // length J
  std::optional<double> bandwidth;   // nullopt for SPD
  int num_classes() const { return static_cast<int>(values.size()); }
};

/// Multivariate sign: t/||t|| away from the origin, 0 at the origin.
inline Eigen::VectorXd sign_vector(const Eigen::VectorXd& t) {
  if (!t.allFinite()) throw InvalidDataError("sign_vector: non-finite input");
  const double norm = t.norm();
  if (norm < kZeroNormTol) return Eigen::VectorXd::Zero(t.size());
  return t / norm;
}

namespace detail {

/// One query point evaluated against one class sample: SPD plus LSPD at each
/// requested bandwidth, and (when self_row >= 0) the same values with the
/// query's own row removed from the sums. The self row must be the query
/// point itself; it contributes u = 0 and kernel weight K_h(0).
struct DepthScan {
  double spd = 0.0;
  double spd_loo = 0.0;
  Eigen::VectorXd lspd;      // per bandwidth
  Eigen::VectorXd lspd_loo;  // per bandwidth, when self_row >= 0
};

inline double clamp_unit(double v) { return std::min(1.0, std::max(0.0, v)); }

/// Rescales exp(log_scale) * nu, falling back to a log-space product when the
/// plain scale factor leaves double range. Saturates at DBL_MAX.
inline double scaled_exp(double log_scale, double nu) {
  if (nu <= 0.0) return 0.0;
  const double scale = std::exp(log_scale);
  if (std::isfinite(scale)) return scale * nu;
  const double lv = log_scale + std::log(nu);
  if (lv > 709.0) return std::numeric_limits<double>::max();
  return std::exp(lv);
}

inline DepthScan depth_scan(const Eigen::VectorXd& x, const Eigen::MatrixXd& data,
                            const Whitener& w, const std::vector<double>& bandwidths,
                            int self_row = -1) {
  const int m = static_cast<int>(data.rows());
  const int d = static_cast<int>(data.cols());
  if (m == 0) throw InsufficientDataError("depth: empty class sample");
  if (static_cast<int>(x.size()) != d)
    throw ShapeError("depth: query dimension does not match sample");
  if (self_row >= 0 && m < 2)
    throw InsufficientDataError("depth: leave-one-out needs a class of size >= 2");

  Eigen::MatrixXd diffs = (-data).rowwise() + x.transpose();
  w.apply_rows(diffs);
  const Eigen::VectorXd r = diffs.rowwise().norm();

  // Unit rows; zero rows stay zero.
  for (int i = 0; i < m; ++i) {
    if (r[i] >= kZeroNormTol)
      diffs.row(i) /= r[i];
    else
      diffs.row(i).setZero();
  }

  DepthScan out;
  const Eigen::VectorXd usum = diffs.colwise().sum();
  out.spd = clamp_unit(1.0 - usum.norm() / m);
  if (self_row >= 0) out.spd_loo = clamp_unit(1.0 - usum.norm() / (m - 1));

  const int M = static_cast<int>(bandwidths.size());
  out.lspd.resize(M);
  if (self_row >= 0) out.lspd_loo.resize(M);
  if (M == 0) return out;

  const double log_2pi = std::log(2.0 * std::numbers::pi);
  const Eigen::ArrayXd r2 = r.array().square();
  Eigen::ArrayXd ew(m);

  for (int k = 0; k < M; ++k) {
    const double h = bandwidths[k];
    if (!(h > 0.0)) throw InvalidParameterError("lspd: bandwidth must be positive");
    // log K_h(t_i) = -d log h - (d/2) log 2pi - r_i^2 / (2 h^2); the shared
    // maximum is factored out so intermediate sums never overflow.
    const double inv2h2 = 0.5 / (h * h);
    const double vmax = -r2.minCoeff() * inv2h2;
    ew = (-r2 * inv2h2 - vmax).exp();
    const double s0 = ew.sum();
    const Eigen::VectorXd sv = diffs.transpose() * ew.matrix();
    const double log_scale = (h > 1.0)
                                 ? -0.5 * d * log_2pi + vmax
                                 : -d * std::log(h) - 0.5 * d * log_2pi + vmax;
    const double nu = std::max(0.0, (s0 - sv.norm()) / m);
    out.lspd[k] = scaled_exp(log_scale, nu);
    if (self_row >= 0) {
      // The self term has r = 0 and u = 0: it carries the maximal kernel
      // weight exp(0 - vmax) into s0 and nothing into the sign sum.
      const double s0_loo = s0 - std::exp(-vmax);
      const double nu_loo = std::max(0.0, (s0_loo - sv.norm()) / (m - 1));
      out.lspd_loo[k] = scaled_exp(log_scale, nu_loo);
    }
  }
  return out;
}

}  // namespace detail

/// Empirical spatial depth of x with respect to a class sample:
/// 1 - || mean_i u(W (x - x_i)) ||, always in [0, 1].
inline double spd(const Eigen::VectorXd& x, const Eigen::MatrixXd& data,
                  const Whitener& w) {
  return detail::depth_scan(x, data, w, {}).spd;
}

/// Empirical localized spatial depth at bandwidth h (kernel-weighted sign
/// sums, rescaled by h^d for h > 1). Nonnegative; continuous in h at h = 1.
inline double local_spd(const Eigen::VectorXd& x, const Eigen::MatrixXd& data,
                   const Whitener& w, double h, const KernelSpec& kernel) {
  if (!(h > 0.0)) throw InvalidParameterError("lspd: bandwidth must be positive");
  if (kernel.dim != static_cast<int>(data.cols()))
    throw ShapeError("lspd: kernel dimension does not match data");
  return detail::depth_scan(x, data, w, {h}).lspd[0];
}

/// Kernel mean (1/n) sum_i K_h(W (x - x_i)): the first term of the localized
/// depth, identical to a Gaussian kernel density estimate on whitened
/// differences.
inline double lspd_first_term(const Eigen::VectorXd& x, const Eigen::MatrixXd& data,
                              const Whitener& w, double h) {
  if (!(h > 0.0)) throw InvalidParameterError("lspd: bandwidth must be positive");
  const int m = static_cast<int>(data.rows());
  const int d = static_cast<int>(data.cols());
  if (m == 0) throw InsufficientDataError("depth: empty class sample");
  Eigen::MatrixXd diffs = (-data).rowwise() + x.transpose();
  w.apply_rows(diffs);
  const Eigen::ArrayXd r2 = diffs.rowwise().squaredNorm().array();
  const double inv2h2 = 0.5 / (h * h);
  const double vmax = -r2.minCoeff() * inv2h2;
  const double s0 = (-r2 * inv2h2 - vmax).exp().sum();
  const double log_scale =
      -d * std::log(h) - 0.5 * d * std::log(2.0 * std::numbers::pi) + vmax;
  return detail::scaled_exp(log_scale, s0 / m);
}

/// Per-class depth features z(x) (scale = nullopt) or z_h(x) (scale = h).
inline DepthFeatures depth_features(const Eigen::VectorXd& x,
                                    const std::vector<Eigen::MatrixXd>& perclass,
                                    const std::vector<Whitener>& whiteners,
                                    std::optional<double> scale) {
  const int J = static_cast<int>(perclass.size());
  if (J < 2) throw InvalidParameterError("depth_features: need at least 2 classes");
  if (static_cast<int>(whiteners.size()) != J)
    throw ShapeError("depth_features: one whitener per class required");
  DepthFeatures f;
  f.values.resize(J);
  f.bandwidth = scale;
  std::vector<double> hs;
  if (scale) hs.push_back(*scale);
  for (int j = 0; j < J; ++j) {
    const auto scan = detail::depth_scan(x, perclass[j], whiteners[j], hs);
    f.values[j] = scale ? scan.lspd[0] : scan.spd;
  }
  return f;
}

/// Leave-one-out features for training point (self_class, self_row): the
/// point is removed from its own class's empirical sums, other classes are
/// untouched, and whiteners are not re-estimated.
inline DepthFeatures depth_features_loo(int self_class, int self_row,
                                        const std::vector<Eigen::MatrixXd>& perclass,
                                        const std::vector<Whitener>& whiteners,
                                        std::optional<double> scale) {
  const int J = static_cast<int>(perclass.size());
  if (J < 2) throw InvalidParameterError("depth_features: need at least 2 classes");
  if (self_class < 0 || self_class >= J)
    throw InvalidParameterError("depth_features_loo: bad class index");
  if (perclass[self_class].rows() < 2)
    throw InsufficientDataError("depth_features_loo: class has fewer than 2 members");
  const Eigen::VectorXd x = perclass[self_class].row(self_row);
  DepthFeatures f;
  f.values.resize(J);
  f.bandwidth = scale;
  std::vector<double> hs;
  if (scale) hs.push_back(*scale);
  for (int j = 0; j < J; ++j) {
    const int self = (j == self_class) ? self_row : -1;
    const auto scan = detail::depth_scan(x, perclass[j], whiteners[j], hs, self);
    if (j == self_class)
      f.values[j] = scale ? scan.lspd_loo[0] : scan.spd_loo;
    else
      f.values[j] = scale ? scan.lspd[0] : scan.spd;
  }
  return f;
}

// ---------------------------------------------------------------------------
// Large-d limit constants of the depth features.

/// Coordinate-moment limits of standardized class distributions as the
/// dimension grows: a_j = lim d^-1 sum_k E(X^(k))^2 within class j and
/// b_ji the matching cross-class product limits.
struct HdlssParams {
  Eigen::VectorXd a;       // length J
  Eigen::MatrixXd b;       // J x J, symmetric
  Eigen::VectorXd sigma2;  // sigma_j^2 = a_j - b_jj, all positive
  Eigen::MatrixXd nu;      // nu_ji = b_jj - 2 b_ji + b_ii, >= 0, zero diagonal

  static HdlssParams from_ab(const Eigen::VectorXd& a, const Eigen::MatrixXd& b) {
    const int J = static_cast<int>(a.size());
    if (J < 2 || b.rows() != J || b.cols() != J)
      throw InvalidParameterError("hdlss: need J >= 2 and a J x J moment matrix");
    if (!a.allFinite() || !b.allFinite())
      throw InvalidParameterError("hdlss: non-finite moment limits");
    if (!b.isApprox(b.transpose(), 1e-10))
      throw InvalidParameterError("hdlss: b must be symmetric");
    HdlssParams p;
    p.a = a;
    p.b = b;
    p.sigma2.resize(J);
    p.nu.resize(J, J);
    for (int j = 0; j < J; ++j) {
      p.sigma2[j] = a[j] - b(j, j);
      if (!(p.sigma2[j] > 0.0))
        throw InvalidParameterError("hdlss: sigma_j^2 must be positive");
    }
    for (int j = 0; j < J; ++j)
      for (int i = 0; i < J; ++i) {
        double v = b(j, j) - 2.0 * b(j, i) + b(i, i);
        if (v < -1e-10) throw InvalidParameterError("hdlss: nu_ji must be nonnegative");
        p.nu(j, i) = std::max(0.0, v);
      }
    return p;
  }

  /// Convenience for centered classes: b_jj = 0 and off-diagonals from the
  /// mean-difference limits nu (zero diagonal required).
  static HdlssParams from_sigma_nu(const Eigen::VectorXd& sigma2,
                                   const Eigen::MatrixXd& nu) {
    if (nu.diagonal().cwiseAbs().maxCoeff() > 0.0)
      throw InvalidParameterError("hdlss: nu must have a zero diagonal");
    Eigen::MatrixXd b = -0.5 * nu;
    return from_ab(sigma2, b);
  }
};

/// Limit matrix c of the SPD features: row j is the limit of z(X) for X from
/// class j. Diagonal 1 - sqrt(1/2); off-diagonal
/// c_ji = 1 - sqrt((sigma_j^2 + nu_ji) / (sigma_j^2 + sigma_i^2 + nu_ji)).
inline Eigen::MatrixXd hdlss_spd_limits(const HdlssParams& p) {
  const int J = static_cast<int>(p.a.size());
  Eigen::MatrixXd c(J, J);
  for (int j = 0; j < J; ++j)
    for (int i = 0; i < J; ++i) {
      if (i == j) {
        c(j, i) = 1.0 - std::sqrt(0.5);
      } else {
        const double num = p.sigma2[j] + p.nu(j, i);
        const double den = p.sigma2[j] + p.sigma2[i] + p.nu(j, i);
        c(j, i) = 1.0 - std::sqrt(num / den);
      }
    }
  return c;
}

/// Limit matrix of the LSPD features when h and d grow with sqrt(d)/h -> A:
/// entrywise g(e_ji * A) * c_ji with e_jj = sqrt(2) sigma_j and
/// e_ji = sqrt(sigma_j^2 + sigma_i^2 + nu_ji). A = 0 encodes sqrt(d)/h -> 0;
/// A = +inf encodes the degenerate regime where every entry vanishes.
/// The kernel profile is the unnormalized g(s) = exp(-s^2/2) unless
/// `normalized` asks for the (2 pi)^{-d/2} factor of the configured dim.
inline Eigen::MatrixXd hdlss_lspd_limits(const HdlssParams& p, double A,
                                         const KernelSpec& kernel,
                                         bool normalized = false) {
  if (std::isnan(A) || A < 0.0)
    throw InvalidParameterError("hdlss_lspd_limits: A must be >= 0 (or +inf)");
  const int J = static_cast<int>(p.a.size());
  if (std::isinf(A)) return Eigen::MatrixXd::Zero(J, J);
  const double norm = normalized ? kernel.k0() : 1.0;
  Eigen::MatrixXd c = hdlss_spd_limits(p);
  for (int j = 0; j < J; ++j)
    for (int i = 0; i < J; ++i) {
      const double e = (i == j) ? std::sqrt(2.0 * p.sigma2[j])
                                : std::sqrt(p.sigma2[j] + p.sigma2[i] + p.nu(j, i));
      c(j, i) *= norm * KernelSpec::profile(e * A);
    }
  return c;
}

}  // namespace lspd
