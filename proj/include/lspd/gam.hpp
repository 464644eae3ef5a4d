#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lspd/depth.hpp"
#include "lspd/errors.hpp"
#include "lspd/spline.hpp"

namespace lspd {

/// Additive multinomial logistic model on depth features. Class J is the
/// reference with predictor fixed at zero; row j of `coef` holds the
/// intercept and stacked per-feature spline coefficients of the j-th
/// predictor.
class GamModel {
public:
  int num_classes = 0;                  // J
  int requested_df = 1;
  double lambda = 0.0;
  std::vector<FeatureBasis> basis;      // one per feature (J features)
  Eigen::MatrixXd coef;                 // (J-1) x (1 + sum of per-feature df)
  std::vector<double> fit_trace;        // penalized log-likelihood per step

  int design_size() const {
    int p = 1;
    for (const auto& b : basis) p += b.df;
    return p;
  }

  Eigen::VectorXd design_row(const Eigen::VectorXd& z) const {
    if (static_cast<int>(z.size()) != num_classes)
      throw ShapeError("gam: feature vector length must equal J");
    if (!z.allFinite()) throw InvalidDataError("gam: non-finite features");
    Eigen::VectorXd row(design_size());
    row[0] = 1.0;
    int at = 1;
    for (int f = 0; f < num_classes; ++f) {
      basis[f].evaluate(z[f], row.data() + at);
      at += basis[f].df;
    }
    return row;
  }

  /// Posterior probabilities (p(1|z), ..., p(J|z)); positive, summing to 1.
  Eigen::VectorXd predict_posterior(const Eigen::VectorXd& z) const {
    const Eigen::VectorXd x = design_row(z);
    Eigen::VectorXd eta(num_classes);
    eta.head(num_classes - 1) = coef * x;
    eta[num_classes - 1] = 0.0;
    const double m = eta.maxCoeff();
    Eigen::VectorXd p = (eta.array() - m).exp();
    return p / p.sum();
  }

  /// Argmax-posterior label in 1..J; ties go to the lowest class index.
  int classify(const Eigen::VectorXd& z) const {
    const Eigen::VectorXd p = predict_posterior(z);
    int best = 0;
    for (int j = 1; j < num_classes; ++j)
      if (p[j] > p[best]) best = j;
    return best + 1;
  }

  void save(std::ostream& out) const {
    char buf[40];
    auto fmt = [&](double v) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      return std::string(buf);
    };
    out << "gamodel v1 J=" << num_classes << " df=" << requested_df
        << " lambda=" << fmt(lambda) << "\n";
    for (int f = 0; f < num_classes; ++f) {
      const auto& b = basis[f];
      out << "feature " << f << " df " << b.df << " boundary " << fmt(b.lo) << " "
          << fmt(b.hi) << " knots";
      for (double k : b.interior) out << " " << fmt(k);
      out << "\n";
    }
    for (int j = 0; j < coef.rows(); ++j) {
      out << "coef";
      for (int c = 0; c < coef.cols(); ++c) out << " " << fmt(coef(j, c));
      out << "\n";
    }
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IngestError("gam: cannot open " + path);
    save(out);
  }

  static GamModel load(std::istream& in) {
    GamModel m;
    std::string line;
    if (!std::getline(in, line)) throw IngestError("gam: empty model file");
    {
      std::istringstream hs(line);
      std::string magic, ver, kv;
      hs >> magic >> ver;
      if (magic != "gamodel" || ver != "v1")
        throw IngestError("gam: unrecognized model header");
      while (hs >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
        if (key == "J") m.num_classes = std::stoi(val);
        if (key == "df") m.requested_df = std::stoi(val);
        if (key == "lambda") m.lambda = std::stod(val);
      }
    }
    if (m.num_classes < 2) throw IngestError("gam: bad J in model header");
    m.basis.resize(m.num_classes);
    for (int f = 0; f < m.num_classes; ++f) {
      if (!std::getline(in, line)) throw IngestError("gam: truncated model");
      std::istringstream fs(line);
      std::string word;
      int idx;
      FeatureBasis b;
      fs >> word >> idx >> word >> b.df >> word >> b.lo >> b.hi >> word;
      double k;
      while (fs >> k) b.interior.push_back(k);
      b.order = b.df == 1 ? 0 : std::min(4, b.df);
      m.basis[f] = std::move(b);
    }
    m.coef.resize(m.num_classes - 1, m.design_size());
    for (int j = 0; j < m.coef.rows(); ++j) {
      if (!std::getline(in, line)) throw IngestError("gam: truncated coefficients");
      std::istringstream cs(line);
      std::string word;
      cs >> word;
      for (int c = 0; c < m.coef.cols(); ++c)
        if (!(cs >> m.coef(j, c))) throw IngestError("gam: short coefficient row");
    }
    return m;
  }

  static GamModel load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("gam: cannot open " + path);
    return load(in);
  }
};

namespace detail {

struct MultinomialObjective {
  const Eigen::MatrixXd& X;       // n x P design
  const Eigen::VectorXi& labels;  // 1..J
  int J;
  Eigen::VectorXd ridge;          // per-column penalty weight, 0 for intercept

  // Penalized log-likelihood.
  double value(const Eigen::MatrixXd& B) const {
    const int n = static_cast<int>(X.rows());
    double ll = 0.0;
    Eigen::VectorXd eta(J - 1);
    for (int i = 0; i < n; ++i) {
      eta.noalias() = B * X.row(i).transpose();
      const double m = std::max(0.0, eta.maxCoeff());
      double denom = std::exp(-m);
      for (int j = 0; j < J - 1; ++j) denom += std::exp(eta[j] - m);
      const double log_denom = m + std::log(denom);
      if (labels[i] < J) ll += eta[labels[i] - 1];
      ll -= log_denom;
    }
    double pen = 0.0;
    for (int j = 0; j < J - 1; ++j)
      pen += (B.row(j).transpose().array().square() * ridge.array()).sum();
    return ll - 0.5 * pen;
  }

  // Class probabilities (columns 1..J-1) for every row.
  Eigen::MatrixXd probabilities(const Eigen::MatrixXd& B) const {
    const int n = static_cast<int>(X.rows());
    Eigen::MatrixXd P(n, J - 1);
    Eigen::VectorXd eta(J - 1);
    for (int i = 0; i < n; ++i) {
      eta.noalias() = B * X.row(i).transpose();
      const double m = std::max(0.0, eta.maxCoeff());
      double denom = std::exp(-m);
      for (int j = 0; j < J - 1; ++j) denom += std::exp(eta[j] - m);
      for (int j = 0; j < J - 1; ++j) P(i, j) = std::exp(eta[j] - m) / denom;
    }
    return P;
  }

  Eigen::MatrixXd gradient(const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& P) const {
    const int n = static_cast<int>(X.rows());
    Eigen::MatrixXd R = -P;  // residuals: indicator minus probability
    for (int i = 0; i < n; ++i)
      if (labels[i] < J) R(i, labels[i] - 1) += 1.0;
    Eigen::MatrixXd G = R.transpose() * X;
    for (int j = 0; j < J - 1; ++j)
      G.row(j) -= (B.row(j).transpose().array() * ridge.array()).matrix();
    return G;
  }
};

}  // namespace detail

/// Fits the additive multinomial logistic model by damped Newton iterations
/// (iteratively reweighted least squares). Converges when the gradient
/// max-norm drops below 1e-6, capped at 100 iterations; the ridge weight
/// keeps the optimum finite under perfect separation.
inline GamModel fit_gam(const Eigen::MatrixXd& Z, const Eigen::VectorXi& labels,
                        int df = 5, double lambda = 1e-3) {
  const int n = static_cast<int>(Z.rows());
  const int J = static_cast<int>(Z.cols());
  if (J < 2) throw InvalidParameterError("fit_gam: need J >= 2 feature columns");
  if (static_cast<int>(labels.size()) != n)
    throw ShapeError("fit_gam: labels length must match rows of Z");
  if (n < J * df + 1)
    throw InsufficientDataError("fit_gam: need n >= J*df + 1 observations");
  if (!Z.allFinite()) throw InvalidDataError("fit_gam: non-finite features");
  std::vector<bool> seen(J, false);
  for (int i = 0; i < n; ++i) {
    if (labels[i] < 1 || labels[i] > J)
      throw InvalidDataError("fit_gam: label outside 1..J");
    seen[labels[i] - 1] = true;
  }
  for (int j = 0; j < J; ++j)
    if (!seen[j]) throw InvalidDataError("fit_gam: class missing from labels");

  GamModel model;
  model.num_classes = J;
  model.requested_df = df;
  model.lambda = lambda;
  model.basis.resize(J);

  std::vector<Eigen::MatrixXd> blocks(J);
  for (int f = 0; f < J; ++f) {
    try {
      auto [b, block] = build_basis(Z.col(f), df);
      model.basis[f] = std::move(b);
      blocks[f] = std::move(block);
    } catch (const DegenerateFeatureError&) {
      auto [b, block] = build_basis(Z.col(f), 1);
      model.basis[f] = std::move(b);
      blocks[f] = std::move(block);
    }
  }

  const int P = model.design_size();
  Eigen::MatrixXd X(n, P);
  X.col(0).setOnes();
  {
    int at = 1;
    for (int f = 0; f < J; ++f) {
      X.middleCols(at, model.basis[f].df) = blocks[f];
      at += model.basis[f].df;
    }
  }

  // The Newton solve runs on columns standardized to mean 0, sd 1; the ridge
  // weights below make the standardized objective equal the raw one
  // (lambda/2 * ||non-intercept coefficients||^2 in raw coordinates), and the
  // fitted coefficients are mapped back afterwards.
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(P);
  Eigen::VectorXd sd = Eigen::VectorXd::Ones(P);
  Eigen::MatrixXd Xs = X;
  for (int c = 1; c < P; ++c) {
    mu[c] = X.col(c).mean();
    const double v = (X.col(c).array() - mu[c]).square().sum() / std::max(1, n - 1);
    sd[c] = v > 0.0 ? std::sqrt(v) : 1.0;
    Xs.col(c) = (X.col(c).array() - mu[c]) / sd[c];
  }
  Eigen::VectorXd ridge = Eigen::VectorXd::Zero(P);
  for (int c = 1; c < P; ++c) ridge[c] = lambda / (sd[c] * sd[c]);

  detail::MultinomialObjective obj{Xs, labels, J, ridge};
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(J - 1, P);
  double cur = obj.value(B);
  model.fit_trace.push_back(cur);

  const int dim = (J - 1) * P;
  Eigen::MatrixXd fisher(dim, dim);
  for (int iter = 0; iter < 100; ++iter) {
    const Eigen::MatrixXd P_ = obj.probabilities(B);
    const Eigen::MatrixXd G = obj.gradient(B, P_);
    if (G.cwiseAbs().maxCoeff() < 1e-6) break;

    // Fisher information blocks F_{jl} = X' diag(p_j (delta_jl - p_l)) X,
    // plus the ridge.
    fisher.setZero();
    Eigen::VectorXd wcol(n);
    for (int j = 0; j < J - 1; ++j) {
      for (int l = j; l < J - 1; ++l) {
        if (j == l)
          wcol = (P_.col(j).array() * (1.0 - P_.col(j).array())).matrix();
        else
          wcol = (-P_.col(j).array() * P_.col(l).array()).matrix();
        const Eigen::MatrixXd block = Xs.transpose() * wcol.asDiagonal() * Xs;
        fisher.block(j * P, l * P, P, P) = block;
        if (l != j) fisher.block(l * P, j * P, P, P) = block;
      }
    }
    for (int j = 0; j < J - 1; ++j)
      for (int c = 0; c < P; ++c) fisher(j * P + c, j * P + c) += ridge[c];

    Eigen::VectorXd g(dim);
    for (int j = 0; j < J - 1; ++j) g.segment(j * P, P) = G.row(j);
    const Eigen::VectorXd step = fisher.ldlt().solve(g);
    if (!step.allFinite())
      throw NumericalError("fit_gam: singular penalized Hessian");

    Eigen::MatrixXd D(J - 1, P);
    for (int j = 0; j < J - 1; ++j) D.row(j) = step.segment(j * P, P);

    double alpha = 1.0;
    double next = obj.value(B + alpha * D);
    int halvings = 0;
    while (next < cur && halvings < 50) {
      alpha *= 0.5;
      next = obj.value(B + alpha * D);
      ++halvings;
    }
    if (next < cur) break;  // no ascent direction left
    B += alpha * D;
    cur = next;
    model.fit_trace.push_back(cur);
  }

  // Back to raw coordinates: beta_c = b_c / sd_c, intercept absorbs the means.
  model.coef.resize(J - 1, P);
  for (int j = 0; j < J - 1; ++j) {
    double intercept = B(j, 0);
    for (int c = 1; c < P; ++c) {
      model.coef(j, c) = B(j, c) / sd[c];
      intercept -= B(j, c) * mu[c] / sd[c];
    }
    model.coef(j, 0) = intercept;
  }
  return model;
}

}  // namespace lspd
