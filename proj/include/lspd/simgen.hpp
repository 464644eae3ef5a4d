#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "lspd/dataset.hpp"
#include "lspd/errors.hpp"
#include "lspd/rng.hpp"

namespace lspd {

enum class ExampleId { E1, E2, E3, E4, E5 };

inline ExampleId parse_example_id(const std::string& s) {
  if (s == "E1" || s == "e1") return ExampleId::E1;
  if (s == "E2" || s == "e2") return ExampleId::E2;
  if (s == "E3" || s == "e3") return ExampleId::E3;
  if (s == "E4" || s == "e4") return ExampleId::E4;
  if (s == "E5" || s == "e5") return ExampleId::E5;
  throw InvalidParameterError("unknown example id: " + s);
}

inline std::string example_name(ExampleId id) {
  switch (id) {
    case ExampleId::E1: return "E1";
    case ExampleId::E2: return "E2";
    case ExampleId::E3: return "E3";
    case ExampleId::E4: return "E4";
    case ExampleId::E5: return "E5";
  }
  return "?";
}

/// Two-class synthetic benchmark family with equal priors.
///   E1: 0.5 N(0,I) + 0.5 N(0,10I)  vs  N(0,5I)
///   E2: uniform shells 0.5 U(0,1) + 0.5 U(2,3)  vs  0.5 U(1,2) + 0.5 U(3,4)
///   E3: N(0,I)  vs  N(1,4I)
///   E4: trimodal normal mixtures at 0,2,4 vs 1,3,5 (times the ones vector),
///       all components 0.25 I
///   E5: independent exponentials, scale d/(d-i+1) vs d/(2i), second class
///       shifted so the mean difference is (1/d) * ones
struct ExampleSpec {
  ExampleId id = ExampleId::E1;
  int d = 2;
};

namespace detail {

/// Class-2 shift for E5 (1-based coordinate i): delta_i = m1_i - m2_i + 1/d
/// so that mean(class2) - mean(class1) = (1/d) ones.
inline double e5_shift(int d, int i1) {
  const double m1 = double(d) / double(d - i1 + 1);
  const double m2 = double(d) / double(2 * i1);
  return m1 - m2 + 1.0 / double(d);
}

inline Eigen::VectorXd gaussian_vector(int d, Rng& rng) {
  Eigen::VectorXd x(d);
  for (int k = 0; k < d; ++k) x[k] = rng.next_normal();
  return x;
}

}  // namespace detail

/// Uniform draw from the shell {r1 <= ||x|| <= r2}: direction from a
/// normalized Gaussian vector, radius by inverse CDF of r^d.
inline Eigen::VectorXd sample_uniform_shell(int d, double r1, double r2, Rng& rng) {
  if (!(r1 >= 0.0 && r1 < r2))
    throw InvalidParameterError("sample_uniform_shell: need 0 <= r1 < r2");
  Eigen::VectorXd dir = detail::gaussian_vector(d, rng);
  double norm = dir.norm();
  while (norm < 1e-300) {  // essentially impossible; redraw keeps the law exact
    dir = detail::gaussian_vector(d, rng);
    norm = dir.norm();
  }
  dir /= norm;
  const double u = rng.next_unit();
  // (r1^d + u (r2^d - r1^d))^(1/d), computed with the ratio (r1/r2)^d so
  // large d cannot overflow.
  const double q = std::pow(r1 / r2, d);
  const double radius = r2 * std::pow(q + u * (1.0 - q), 1.0 / d);
  return radius * dir;
}

inline Eigen::VectorXd sample_uniform_shell(int d, double r1, double r2,
                                            std::uint64_t seed) {
  Rng rng(seed);
  return sample_uniform_shell(d, r1, r2, rng);
}

/// One observation from class `cls` (1 or 2) of the example, drawn from its
/// own stream so generation order never affects values.
inline Eigen::VectorXd sample_example_point(const ExampleSpec& spec, int cls, Rng& rng) {
  const int d = spec.d;
  switch (spec.id) {
    case ExampleId::E1: {
      if (cls == 1) {
        const double sd = rng.next_unit() < 0.5 ? 1.0 : std::sqrt(10.0);
        return sd * detail::gaussian_vector(d, rng);
      }
      return std::sqrt(5.0) * detail::gaussian_vector(d, rng);
    }
    case ExampleId::E2: {
      const bool inner = rng.next_unit() < 0.5;
      if (cls == 1)
        return inner ? sample_uniform_shell(d, 0.0, 1.0, rng)
                     : sample_uniform_shell(d, 2.0, 3.0, rng);
      return inner ? sample_uniform_shell(d, 1.0, 2.0, rng)
                   : sample_uniform_shell(d, 3.0, 4.0, rng);
    }
    case ExampleId::E3: {
      if (cls == 1) return detail::gaussian_vector(d, rng);
      return Eigen::VectorXd::Ones(d) + 2.0 * detail::gaussian_vector(d, rng);
    }
    case ExampleId::E4: {
      const int comp = std::min(2, static_cast<int>(3.0 * rng.next_unit()));
      const double center = (cls == 1) ? 2.0 * comp : 2.0 * comp + 1.0;
      return Eigen::VectorXd::Constant(d, center) +
             0.5 * detail::gaussian_vector(d, rng);
    }
    case ExampleId::E5: {
      Eigen::VectorXd x(d);
      if (cls == 1) {
        for (int k = 0; k < d; ++k)
          x[k] = rng.next_exponential(double(d) / double(d - k));
      } else {
        for (int k = 0; k < d; ++k)
          x[k] = rng.next_exponential(double(d) / double(2 * (k + 1))) +
                 detail::e5_shift(d, k + 1);
      }
      return x;
    }
  }
  throw InvalidParameterError("sample_example_point: unknown example");
}

/// n_per_class observations from each class; point (class, index) is drawn
/// from stream derive_stream(seed, class, index).
inline LabeledDataset generate(const ExampleSpec& spec, int n_per_class,
                               std::uint64_t seed) {
  if (n_per_class < 1)
    throw InvalidParameterError("generate: n_per_class must be >= 1");
  if (spec.d < 1) throw InvalidParameterError("generate: d must be >= 1");
  LabeledDataset ds;
  ds.points.resize(2 * n_per_class, spec.d);
  ds.labels.resize(2 * n_per_class);
  ds.num_classes = 2;
  ds.class_names = {"1", "2"};
  for (int cls = 1; cls <= 2; ++cls) {
    for (int i = 0; i < n_per_class; ++i) {
      Rng rng(derive_stream(seed, static_cast<std::uint64_t>(cls),
                            static_cast<std::uint64_t>(i)));
      const int row = (cls - 1) * n_per_class + i;
      ds.points.row(row) = sample_example_point(spec, cls, rng);
      ds.labels[row] = cls;
    }
  }
  return ds;
}

namespace detail {

inline double log_spherical_normal(double sqnorm, int d, double variance) {
  return -0.5 * d * std::log(2.0 * std::numbers::pi * variance) -
         0.5 * sqnorm / variance;
}

inline double logsumexp2(double a, double b) {
  const double m = std::max(a, b);
  if (std::isinf(m) && m < 0) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

/// log density of the example's class, up to a constant shared by both
/// classes of the same example.
inline double example_log_density(const ExampleSpec& spec, int cls,
                                  const Eigen::VectorXd& x) {
  const int d = spec.d;
  const double neg_inf = -std::numeric_limits<double>::infinity();
  switch (spec.id) {
    case ExampleId::E1: {
      const double r2 = x.squaredNorm();
      if (cls == 1)
        return logsumexp2(std::log(0.5) + log_spherical_normal(r2, d, 1.0),
                          std::log(0.5) + log_spherical_normal(r2, d, 10.0));
      return log_spherical_normal(r2, d, 5.0);
    }
    case ExampleId::E2: {
      // Uniform shell density 1 / vol; the dimensional constant of the ball
      // volume cancels between classes, so (r2^d - r1^d) suffices. Work with
      // log radii to stay finite at large d.
      const double r = x.norm();
      auto shell = [&](double r1, double r2) -> double {
        if (r < r1 || r > r2) return neg_inf;
        const double q = std::pow(r1 / r2, d);
        return -(d * std::log(r2) + std::log1p(-q));
      };
      if (cls == 1)
        return logsumexp2(std::log(0.5) + shell(0.0, 1.0),
                          std::log(0.5) + shell(2.0, 3.0));
      return logsumexp2(std::log(0.5) + shell(1.0, 2.0),
                        std::log(0.5) + shell(3.0, 4.0));
    }
    case ExampleId::E3: {
      if (cls == 1) return log_spherical_normal(x.squaredNorm(), d, 1.0);
      const double r2 = (x - Eigen::VectorXd::Ones(d)).squaredNorm();
      return log_spherical_normal(r2, d, 4.0);
    }
    case ExampleId::E4: {
      double acc = neg_inf;
      for (int comp = 0; comp < 3; ++comp) {
        const double center = (cls == 1) ? 2.0 * comp : 2.0 * comp + 1.0;
        const double r2 =
            (x - Eigen::VectorXd::Constant(d, center)).squaredNorm();
        acc = logsumexp2(acc, std::log(1.0 / 3.0) +
                                  log_spherical_normal(r2, d, 0.25));
      }
      return acc;
    }
    case ExampleId::E5: {
      double ll = 0.0;
      for (int k = 0; k < d; ++k) {
        const double scale = (cls == 1) ? double(d) / double(d - k)
                                        : double(d) / double(2 * (k + 1));
        const double v = (cls == 1) ? x[k] : x[k] - e5_shift(d, k + 1);
        if (v < 0.0) return neg_inf;
        ll += -std::log(scale) - v / scale;
      }
      return ll;
    }
  }
  throw InvalidParameterError("example_log_density: unknown example");
}

}  // namespace detail

/// Exact Bayes rule for the example (equal priors): argmax of the class
/// densities, class 1 on ties and outside both supports.
inline int bayes_label(const ExampleSpec& spec, const Eigen::VectorXd& x) {
  if (static_cast<int>(x.size()) != spec.d)
    throw ShapeError("bayes_label: dimension mismatch");
  if (!x.allFinite()) throw InvalidDataError("bayes_label: non-finite point");
  const double l1 = detail::example_log_density(spec, 1, x);
  const double l2 = detail::example_log_density(spec, 2, x);
  if (std::isinf(l1) && std::isinf(l2) && l1 < 0 && l2 < 0) return 1;
  return l1 >= l2 ? 1 : 2;
}

struct BayesRiskEstimate {
  double risk = 0.0;        // error fraction in [0, 1]
  double std_error = 0.0;   // binomial standard error
  long total = 0;
};

/// Monte Carlo Bayes risk: N fresh points per class classified by the exact
/// rule against their generating class.
inline BayesRiskEstimate bayes_risk_mc(const ExampleSpec& spec, int n_per_class,
                                       std::uint64_t seed) {
  if (n_per_class < 1) throw InvalidParameterError("bayes_risk_mc: N must be >= 1");
  long wrong = 0;
  for (int cls = 1; cls <= 2; ++cls) {
    for (int i = 0; i < n_per_class; ++i) {
      Rng rng(derive_stream(seed, static_cast<std::uint64_t>(cls),
                            static_cast<std::uint64_t>(i)));
      const Eigen::VectorXd x = sample_example_point(spec, cls, rng);
      if (bayes_label(spec, x) != cls) ++wrong;
    }
  }
  BayesRiskEstimate est;
  est.total = 2L * n_per_class;
  est.risk = double(wrong) / double(est.total);
  est.std_error = std::sqrt(est.risk * (1.0 - est.risk) / double(est.total));
  return est;
}

}  // namespace lspd
