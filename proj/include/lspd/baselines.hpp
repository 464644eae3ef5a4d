#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "lspd/dataset.hpp"
#include "lspd/errors.hpp"
#include "lspd/numerics.hpp"

namespace lspd {

enum class BaselineKind { LDA, QDA, KNN, KDE };

struct BaselineConfig {
  std::optional<ScatterMode> scatter;  // empty = auto rule on the pooled size
};

/// Reference classifiers: Gaussian discriminants (LDA pooled, QDA per-class)
/// and memory-based k-NN / KDE on pooled-whitened coordinates with
/// leave-one-out tuning of k and the bandwidth.
struct BaselineModel {
  BaselineKind kind = BaselineKind::LDA;
  int num_classes = 0;
  int dim = 0;
  Eigen::VectorXd log_priors;

  // LDA / QDA
  std::vector<Eigen::VectorXd> means;
  std::vector<Whitener> whiteners;  // one shared (LDA) or per class (QDA)
  std::vector<double> log_dets;

  // KNN / KDE
  Whitener pooled;
  Eigen::MatrixXd train_points;  // whitened
  Eigen::VectorXi train_labels;
  int k = 1;
  double bandwidth = 1.0;

  std::vector<std::string> warnings;

  Eigen::VectorXd discriminants(const Eigen::VectorXd& x) const {
    if (static_cast<int>(x.size()) != dim)
      throw ShapeError("baseline: dimension mismatch");
    const int J = num_classes;
    Eigen::VectorXd score(J);
    switch (kind) {
      case BaselineKind::LDA:
      case BaselineKind::QDA: {
        for (int j = 0; j < J; ++j) {
          const Whitener& w = whiteners[kind == BaselineKind::LDA ? 0 : j];
          const double maha2 = w.apply(x - means[j]).squaredNorm();
          score[j] = log_priors[j] - 0.5 * log_dets[j] - 0.5 * maha2;
        }
        return score;
      }
      case BaselineKind::KNN: {
        const Eigen::VectorXd q = pooled.apply(x);
        const int n = static_cast<int>(train_points.rows());
        std::vector<std::pair<double, int>> dist(n);
        for (int i = 0; i < n; ++i)
          dist[i] = {(train_points.row(i).transpose() - q).squaredNorm(), i};
        std::sort(dist.begin(), dist.end());
        score.setZero();
        for (int r = 0; r < std::min(k, n); ++r)
          score[train_labels[dist[r].second] - 1] += 1.0;
        return score;
      }
      case BaselineKind::KDE: {
        const Eigen::VectorXd q = pooled.apply(x);
        const double inv2h2 = 0.5 / (bandwidth * bandwidth);
        for (int j = 0; j < J; ++j) {
          double m = -std::numeric_limits<double>::infinity();
          std::vector<double> ex;
          for (int i = 0; i < train_points.rows(); ++i) {
            if (train_labels[i] != j + 1) continue;
            const double e =
                -(train_points.row(i).transpose() - q).squaredNorm() * inv2h2;
            ex.push_back(e);
            m = std::max(m, e);
          }
          double s = 0.0;
          for (double e : ex) s += std::exp(e - m);
          score[j] = log_priors[j] + m + std::log(s) - std::log(double(ex.size()));
        }
        return score;
      }
    }
    return score;
  }

  int classify(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd s = discriminants(x);
    int best = 0;
    for (int j = 1; j < num_classes; ++j)
      if (s[j] > s[best]) best = j;
    return best + 1;
  }

  /// Softmax posterior of the Gaussian discriminants (LDA/QDA only).
  Eigen::VectorXd predict_posterior(const Eigen::VectorXd& x) const {
    if (kind != BaselineKind::LDA && kind != BaselineKind::QDA)
      throw InvalidParameterError("posterior only defined for LDA/QDA");
    Eigen::VectorXd s = discriminants(x);
    s.array() -= s.maxCoeff();
    Eigen::VectorXd p = s.array().exp();
    return p / p.sum();
  }
};

namespace detail {

inline double whitener_log_det(const Whitener& w) {
  switch (w.mode()) {
    case ScatterMode::Identity:
      return 0.0;
    case ScatterMode::Diagonal: {
      // diag holds 1/sd, so log|Sigma| = -2 sum log(diag).
      return -2.0 * w.diag().array().log().sum();
    }
    case ScatterMode::Full:
      return w.log_det_scatter();
  }
  return 0.0;
}

/// Leave-one-out error of k-NN over the candidate k grid, all at once.
inline std::vector<int> knn_loo_errors(const Eigen::MatrixXd& pts,
                                       const Eigen::VectorXi& labels, int J,
                                       const std::vector<int>& k_grid) {
  const int n = static_cast<int>(pts.rows());
  const int kmax = k_grid.back();
  std::vector<int> errors(k_grid.size(), 0);
  std::vector<std::pair<double, int>> dist(n - 1);
  std::vector<int> votes(J);
  for (int i = 0; i < n; ++i) {
    int at = 0;
    for (int t = 0; t < n; ++t) {
      if (t == i) continue;
      dist[at++] = {(pts.row(t) - pts.row(i)).squaredNorm(), t};
    }
    std::partial_sort(dist.begin(), dist.begin() + std::min(kmax, n - 1), dist.end());
    std::fill(votes.begin(), votes.end(), 0);
    int r = 0;
    for (std::size_t g = 0; g < k_grid.size(); ++g) {
      const int k = std::min(k_grid[g], n - 1);
      for (; r < k; ++r) ++votes[labels[dist[r].second] - 1];
      int best = 0;
      for (int j = 1; j < J; ++j)
        if (votes[j] > votes[best]) best = j;
      if (best + 1 != labels[i]) ++errors[g];
    }
  }
  return errors;
}

}  // namespace detail

inline BaselineModel fit_baseline(BaselineKind kind, const LabeledDataset& train,
                                  const BaselineConfig& cfg = {}) {
  const int n = train.n();
  const int d = train.dim();
  const int J = train.num_classes;
  if (J < 2) throw InvalidDataError("fit_baseline: need at least 2 classes");

  BaselineModel m;
  m.kind = kind;
  m.num_classes = J;
  m.dim = d;
  m.log_priors.resize(J);
  const auto perclass = train.split_by_class();
  for (int j = 0; j < J; ++j) {
    if (perclass[j].rows() < 1)
      throw InsufficientDataError("fit_baseline: empty class");
    m.log_priors[j] = std::log(double(perclass[j].rows()) / double(n));
  }
  const ScatterMode pooled_mode =
      cfg.scatter ? *cfg.scatter : default_scatter_mode(n, d);

  switch (kind) {
    case BaselineKind::LDA: {
      m.whiteners.push_back(estimate_pooled_scatter(perclass, pooled_mode));
      const double ld = detail::whitener_log_det(m.whiteners[0]);
      for (int j = 0; j < J; ++j) {
        m.means.push_back(perclass[j].colwise().mean());
        m.log_dets.push_back(ld);
      }
      return m;
    }
    case BaselineKind::QDA: {
      ScatterMode mode = cfg.scatter
                             ? *cfg.scatter
                             : default_scatter_mode(
                                   static_cast<int>(perclass[0].rows()), d);
      if (mode == ScatterMode::Full) {
        for (int j = 0; j < J; ++j) {
          if (perclass[j].rows() < 2 || scatter_was_floored(perclass[j])) {
            mode = ScatterMode::Diagonal;
            m.warnings.push_back("qda: singular class scatter, diagonal fallback");
            break;
          }
        }
      }
      for (int j = 0; j < J; ++j) {
        m.means.push_back(perclass[j].colwise().mean());
        m.whiteners.push_back(estimate_scatter(perclass[j], mode));
        m.log_dets.push_back(detail::whitener_log_det(m.whiteners[j]));
      }
      return m;
    }
    case BaselineKind::KNN:
    case BaselineKind::KDE: {
      m.pooled = estimate_pooled_scatter(perclass, pooled_mode);
      m.train_points.resize(n, d);
      m.train_labels = train.labels;
      for (int i = 0; i < n; ++i)
        m.train_points.row(i) = m.pooled.apply(train.points.row(i));
      if (kind == BaselineKind::KNN) {
        // Odd k up to sqrt(n), leave-one-out tuned; smallest k wins ties.
        int kmax = static_cast<int>(std::lround(std::sqrt(double(n))));
        if (kmax % 2 == 0) --kmax;
        kmax = std::max(1, std::min(kmax, n - 1));
        std::vector<int> grid;
        for (int k = 1; k <= kmax; k += 2) grid.push_back(k);
        const auto errors =
            detail::knn_loo_errors(m.train_points, m.train_labels, J, grid);
        std::size_t best = 0;
        for (std::size_t g = 1; g < grid.size(); ++g)
          if (errors[g] < errors[best]) best = g;
        m.k = grid[best];
      } else {
        // Single spherical bandwidth tuned by leave-one-out error over a
        // 10-point log grid around the pilot n^{-1/(d+4)}.
        const double pilot = std::pow(double(n), -1.0 / double(d + 4));
        std::vector<double> grid(10);
        for (int g = 0; g < 10; ++g)
          grid[g] = pilot * std::pow(10.0, -1.0 + 2.0 * g / 9.0);
        int best_err = n + 1;
        double best_h = grid[0];
        std::vector<double> ex;
        for (double h : grid) {
          const double inv2h2 = 0.5 / (h * h);
          int err = 0;
          for (int i = 0; i < n; ++i) {
            double best_score = -std::numeric_limits<double>::infinity();
            int best_j = 0;
            for (int j = 0; j < J; ++j) {
              double mx = -std::numeric_limits<double>::infinity();
              ex.clear();
              for (int t = 0; t < n; ++t) {
                if (t == i || m.train_labels[t] != j + 1) continue;
                const double e =
                    -(m.train_points.row(t) - m.train_points.row(i)).squaredNorm() *
                    inv2h2;
                ex.push_back(e);
                mx = std::max(mx, e);
              }
              if (ex.empty()) continue;
              double s = 0.0;
              for (double e : ex) s += std::exp(e - mx);
              const double score = m.log_priors[j] + mx + std::log(s) -
                                   std::log(double(ex.size()));
              if (score > best_score) {
                best_score = score;
                best_j = j;
              }
            }
            if (best_j + 1 != m.train_labels[i]) ++err;
          }
          if (err < best_err) {
            best_err = err;
            best_h = h;
          }
        }
        m.bandwidth = best_h;
      }
      return m;
    }
  }
  throw InvalidParameterError("fit_baseline: unknown kind");
}

inline int predict_baseline(const BaselineModel& m, const Eigen::VectorXd& x) {
  return m.classify(x);
}

}  // namespace lspd
