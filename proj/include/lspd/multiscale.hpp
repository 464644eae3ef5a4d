#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "lspd/dataset.hpp"
#include "lspd/depth.hpp"
#include "lspd/errors.hpp"
#include "lspd/gam.hpp"
#include "lspd/numerics.hpp"
#include "lspd/rng.hpp"

namespace lspd {

enum class CvMode { LooFeatures, KFold };

struct MultiscaleConfig {
  int M = 25;                  // number of sampled bandwidths
  double cauchy_scale = 100.0; // scale of the positive Cauchy bandwidth draw
  int df = 5;
  double lambda = 1e-3;
  std::uint64_t seed = 1;
  CvMode cv_mode = CvMode::LooFeatures;
  std::optional<ScatterMode> scatter;    // empty = per-class auto rule
  std::vector<double> fixed_bandwidths;  // overrides sampling when nonempty
};

inline constexpr double kBandwidthMin = 1e-3;
inline constexpr double kBandwidthMax = 1e6;

/// Quantile transform of the positive-half Cauchy: u in [0,1) maps to
/// scale * |tan(pi (u - 1/2))|, clamped to [1e-3, 1e6].
inline double half_cauchy_bandwidth(double u, double scale) {
  const double h = scale * std::abs(std::tan(std::numbers::pi * (u - 0.5)));
  return std::min(kBandwidthMax, std::max(kBandwidthMin, h));
}

/// M i.i.d. positive Cauchy draws from the seeded stream.
inline std::vector<double> sample_bandwidths(int M, double scale, std::uint64_t seed) {
  if (M < 1) throw InvalidParameterError("sample_bandwidths: M must be >= 1");
  if (!(scale > 0.0)) throw InvalidParameterError("sample_bandwidths: scale must be > 0");
  Rng rng(seed);
  std::vector<double> hs(M);
  for (int i = 0; i < M; ++i) hs[i] = half_cauchy_bandwidth(rng.next_unit(), scale);
  return hs;
}

/// Exponential risk weights: W(h) = exp(-n (risk - best)^2 / (2 best (1-best)))
/// with best = min risk, so the minimizing bandwidth always gets weight 1.
/// When best is 0 or 1 the variance guard best*(1-best) is floored at 1/(4n).
inline Eigen::VectorXd compute_weights(const Eigen::VectorXd& risks, int n) {
  if (risks.size() == 0) throw InvalidParameterError("compute_weights: empty risks");
  if (n < 1) throw InvalidParameterError("compute_weights: n must be >= 1");
  for (int i = 0; i < risks.size(); ++i)
    if (!(risks[i] >= 0.0 && risks[i] <= 1.0))
      throw InvalidParameterError("compute_weights: risks must lie in [0, 1]");
  const double best = risks.minCoeff();
  const double var = std::max(best * (1.0 - best), 1.0 / (4.0 * n));
  Eigen::VectorXd w(risks.size());
  for (int i = 0; i < risks.size(); ++i) {
    const double diff = risks[i] - best;
    w[i] = std::exp(-0.5 * n * diff * diff / var);
  }
  return w;
}

namespace detail {

/// Depth features of every training point at every requested scale, both
/// including the point itself (full) and with it left out of its own class's
/// sums (loo). Rows are stacked class by class; `labels` matches that order.
struct DepthFeatureTable {
  Eigen::VectorXi labels;
  Eigen::MatrixXd spd_full, spd_loo;             // n x J when include_spd
  std::vector<Eigen::MatrixXd> lspd_full, lspd_loo;  // per bandwidth, n x J
};

inline DepthFeatureTable training_depth_table(
    const std::vector<Eigen::MatrixXd>& perclass,
    const std::vector<Whitener>& whiteners, const std::vector<double>& hs,
    bool include_spd) {
  const int J = static_cast<int>(perclass.size());
  const int M = static_cast<int>(hs.size());
  int n = 0;
  for (const auto& m : perclass) n += static_cast<int>(m.rows());

  DepthFeatureTable t;
  t.labels.resize(n);
  if (include_spd) {
    t.spd_full.resize(n, J);
    t.spd_loo.resize(n, J);
  }
  t.lspd_full.assign(M, Eigen::MatrixXd(n, J));
  t.lspd_loo.assign(M, Eigen::MatrixXd(n, J));

  int row = 0;
  for (int c = 0; c < J; ++c) {
    if (perclass[c].rows() < 2)
      throw InsufficientDataError("training features: every class needs >= 2 points");
    for (int i = 0; i < perclass[c].rows(); ++i, ++row) {
      const Eigen::VectorXd x = perclass[c].row(i);
      t.labels[row] = c + 1;
      for (int j = 0; j < J; ++j) {
        const int self = (j == c) ? i : -1;
        const auto scan = depth_scan(x, perclass[j], whiteners[j], hs, self);
        if (include_spd) {
          t.spd_full(row, j) = scan.spd;
          t.spd_loo(row, j) = (self >= 0) ? scan.spd_loo : scan.spd;
        }
        for (int k = 0; k < M; ++k) {
          t.lspd_full[k](row, j) = scan.lspd[k];
          t.lspd_loo[k](row, j) = (self >= 0) ? scan.lspd_loo[k] : scan.lspd[k];
        }
      }
    }
  }
  return t;
}

inline double error_rate(const GamModel& gam, const Eigen::MatrixXd& Z,
                         const Eigen::VectorXi& labels) {
  int wrong = 0;
  for (int i = 0; i < Z.rows(); ++i)
    if (gam.classify(Z.row(i)) != labels[i]) ++wrong;
  return double(wrong) / double(Z.rows());
}

/// Risk of one scale given the training feature matrices. LooFeatures fits a
/// single model on the full features and scores it on the leave-one-out
/// rows; KFold refits the model per fold (10 folds, round-robin) on the full
/// features of the complement and scores held-out points on their
/// leave-one-out rows.
inline double risk_from_features(const Eigen::MatrixXd& full,
                                 const Eigen::MatrixXd& loo,
                                 const Eigen::VectorXi& labels, int df,
                                 double lambda, CvMode mode) {
  const int n = static_cast<int>(full.rows());
  if (mode == CvMode::LooFeatures) {
    const GamModel gam = fit_gam(full, labels, df, lambda);
    return error_rate(gam, loo, labels);
  }
  const int k = std::min(10, n);
  int wrong = 0;
  for (int fold = 0; fold < k; ++fold) {
    std::vector<int> in, out;
    for (int i = 0; i < n; ++i) ((i % k == fold) ? out : in).push_back(i);
    Eigen::MatrixXd Zin(static_cast<int>(in.size()), full.cols());
    Eigen::VectorXi yin(static_cast<int>(in.size()));
    for (int r = 0; r < static_cast<int>(in.size()); ++r) {
      Zin.row(r) = full.row(in[r]);
      yin[r] = labels[in[r]];
    }
    const GamModel gam = fit_gam(Zin, yin, df, lambda);
    for (int i : out)
      if (gam.classify(loo.row(i)) != labels[i]) ++wrong;
  }
  return double(wrong) / double(n);
}

}  // namespace detail

inline std::vector<Whitener> class_whiteners(const std::vector<Eigen::MatrixXd>& perclass,
                                             std::optional<ScatterMode> mode) {
  std::vector<Whitener> out;
  for (const auto& m : perclass) {
    const ScatterMode resolved =
        mode ? *mode
             : default_scatter_mode(static_cast<int>(m.rows()),
                                    static_cast<int>(m.cols()));
    out.push_back(estimate_scatter(m, resolved));
  }
  return out;
}

/// Leave-one-out risk estimate of the single-bandwidth classifier.
inline double cv_risk(double h, const LabeledDataset& train,
                      const MultiscaleConfig& cfg) {
  if (!(h > 0.0)) throw InvalidParameterError("cv_risk: bandwidth must be > 0");
  const auto perclass = train.split_by_class();
  const auto whiteners = class_whiteners(perclass, cfg.scatter);
  const auto table = detail::training_depth_table(perclass, whiteners, {h}, false);
  return detail::risk_from_features(table.lspd_full[0], table.lspd_loo[0],
                                    table.labels, cfg.df, cfg.lambda, cfg.cv_mode);
}

/// Classifier built on depth features at one fixed scale: SPD when
/// `bandwidth` is empty, LSPD_h otherwise.
struct SingleScaleModel {
  std::optional<double> bandwidth;
  std::vector<Eigen::MatrixXd> train_by_class;
  std::vector<Whitener> whiteners;
  GamModel gam;
  double risk = 0.0;  // leave-one-out risk estimate on the training set

  Eigen::VectorXd posterior(const Eigen::VectorXd& x) const {
    const DepthFeatures f = depth_features(x, train_by_class, whiteners, bandwidth);
    return gam.predict_posterior(f.values);
  }

  int classify(const Eigen::VectorXd& x) const {
    const DepthFeatures f = depth_features(x, train_by_class, whiteners, bandwidth);
    return gam.classify(f.values);
  }
};

inline SingleScaleModel fit_single_scale(const LabeledDataset& train,
                                         std::optional<double> bandwidth,
                                         const MultiscaleConfig& cfg) {
  SingleScaleModel m;
  m.bandwidth = bandwidth;
  m.train_by_class = train.split_by_class();
  m.whiteners = class_whiteners(m.train_by_class, cfg.scatter);
  std::vector<double> hs;
  if (bandwidth) hs.push_back(*bandwidth);
  const auto table =
      detail::training_depth_table(m.train_by_class, m.whiteners, hs, !bandwidth);
  const Eigen::MatrixXd& full = bandwidth ? table.lspd_full[0] : table.spd_full;
  const Eigen::MatrixXd& loo = bandwidth ? table.lspd_loo[0] : table.spd_loo;
  m.gam = fit_gam(full, table.labels, cfg.df, cfg.lambda);
  m.risk = detail::error_rate(m.gam, loo, table.labels);
  return m;
}

/// The multiscale classifier: per-bandwidth models plus their risks and
/// aggregation weights.
struct MultiscaleModel {
  std::vector<double> bandwidths;
  std::vector<GamModel> gams;                // one per bandwidth
  std::vector<Eigen::MatrixXd> train_by_class;
  std::vector<Whitener> whiteners;
  Eigen::VectorXd risks;    // leave-one-out risk per bandwidth
  Eigen::VectorXd weights;  // max entry 1
  int n_train = 0;
  double cauchy_scale = 100.0;

  /// Weighted-posterior aggregate: label = argmax_j sum_i W(h_i) p(j|z_{h_i});
  /// the returned posterior is the normalized aggregate.
  std::pair<int, Eigen::VectorXd> classify(const Eigen::VectorXd& x) const {
    const int J = static_cast<int>(train_by_class.size());
    const int M = static_cast<int>(bandwidths.size());
    Eigen::MatrixXd z(M, J);  // z_h(x) per bandwidth, one scan per class
    for (int j = 0; j < J; ++j) {
      const auto scan =
          detail::depth_scan(x, train_by_class[j], whiteners[j], bandwidths);
      z.col(j) = scan.lspd;
    }
    Eigen::VectorXd agg = Eigen::VectorXd::Zero(J);
    for (int k = 0; k < M; ++k)
      agg += weights[k] * gams[k].predict_posterior(z.row(k));
    int best = 0;
    for (int j = 1; j < J; ++j)
      if (agg[j] > agg[best]) best = j;
    return {best + 1, agg / agg.sum()};
  }

  /// Diagnostic table of (h, risk, weight) rows.
  std::string summary() const {
    std::string out = "       h        risk      weight\n";
    char buf[80];
    for (std::size_t k = 0; k < bandwidths.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "%12.6g  %8.4f  %10.6f\n", bandwidths[k],
                    risks[static_cast<int>(k)], weights[static_cast<int>(k)]);
      out += buf;
    }
    return out;
  }
};

inline MultiscaleModel fit_multiscale(const LabeledDataset& train,
                                      const MultiscaleConfig& cfg) {
  MultiscaleModel m;
  m.bandwidths = cfg.fixed_bandwidths.empty()
                     ? sample_bandwidths(cfg.M, cfg.cauchy_scale,
                                         derive_stream(cfg.seed, 0xba5du))
                     : cfg.fixed_bandwidths;
  m.train_by_class = train.split_by_class();
  m.whiteners = class_whiteners(m.train_by_class, cfg.scatter);
  m.n_train = train.n();
  m.cauchy_scale = cfg.cauchy_scale;

  const auto table =
      detail::training_depth_table(m.train_by_class, m.whiteners, m.bandwidths, false);
  const int M = static_cast<int>(m.bandwidths.size());
  m.risks.resize(M);
  m.gams.resize(M);
  for (int k = 0; k < M; ++k) {
    m.gams[k] = fit_gam(table.lspd_full[k], table.labels, cfg.df, cfg.lambda);
    if (cfg.cv_mode == CvMode::LooFeatures) {
      m.risks[k] = detail::error_rate(m.gams[k], table.lspd_loo[k], table.labels);
    } else {
      m.risks[k] =
          detail::risk_from_features(table.lspd_full[k], table.lspd_loo[k],
                                     table.labels, cfg.df, cfg.lambda, cfg.cv_mode);
    }
  }
  m.weights = compute_weights(m.risks, m.n_train);
  return m;
}

}  // namespace lspd
