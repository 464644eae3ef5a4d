#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "lspd/errors.hpp"

namespace lspd {

/// B-spline basis over the training range of one feature. df is the number
/// of basis functions: df = 1 is the raw (linear) column; df >= 2 uses a
/// spline of order min(4, df) with df - order interior knots at equally
/// spaced quantiles. Evaluation clamps to the boundary, so predictions
/// extrapolate as constants.
struct FeatureBasis {
  int df = 1;
  int order = 0;                 // 0 for the linear df = 1 basis
  double lo = 0.0, hi = 1.0;     // boundary knots (training min/max)
  std::vector<double> interior;  // strictly increasing, inside (lo, hi)

  /// Evaluates the df basis functions at x (clamped to [lo, hi]).
  void evaluate(double x, double* out) const {
    x = std::min(hi, std::max(lo, x));
    if (df == 1) {
      out[0] = x;
      return;
    }
    const int k = order;
    const int ni = static_cast<int>(interior.size());
    // Full clamped knot vector: lo repeated k times, interior, hi repeated k.
    auto knot = [&](int i) -> double {
      if (i < k) return lo;
      if (i < k + ni) return interior[i - k];
      return hi;
    };
    // Span index mu: knot(mu) <= x < knot(mu+1), last span closed at hi.
    int mu = k - 1;
    while (mu < k + ni - 1 && x >= knot(mu + 1)) ++mu;

    // Cox-de Boor triangle for the k nonzero basis functions at x.
    double N[8], left[8], right[8];
    N[0] = 1.0;
    for (int j = 1; j < k; ++j) {
      left[j] = x - knot(mu + 1 - j);
      right[j] = knot(mu + j) - x;
      double saved = 0.0;
      for (int r = 0; r < j; ++r) {
        const double tmp = N[r] / (right[r + 1] + left[j - r]);
        N[r] = saved + right[r + 1] * tmp;
        saved = left[j - r] * tmp;
      }
      N[j] = saved;
    }
    std::fill(out, out + df, 0.0);
    for (int r = 0; r < k; ++r) out[mu - k + 1 + r] = N[r];
  }

  Eigen::VectorXd evaluate(double x) const {
    Eigen::VectorXd row(df);
    evaluate(x, row.data());
    return row;
  }
};

namespace detail {

/// Linear-interpolation quantile of a sorted vector (R type 7).
inline double sorted_quantile(const std::vector<double>& sorted, double p) {
  const int n = static_cast<int>(sorted.size());
  const double pos = p * (n - 1);
  const int lo = static_cast<int>(std::floor(pos));
  const int hi = std::min(lo + 1, n - 1);
  const double frac = pos - lo;
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

/// Builds the basis for one training column and returns it with the
/// evaluated n x df design block. Throws DegenerateFeatureError when the
/// column has too few distinct values for the requested df.
inline std::pair<FeatureBasis, Eigen::MatrixXd> build_basis(
    const Eigen::VectorXd& values, int df) {
  if (df < 1) throw InvalidParameterError("build_basis: df must be >= 1");
  const int n = static_cast<int>(values.size());
  if (n == 0) throw InsufficientDataError("build_basis: empty column");
  if (!values.allFinite()) throw InvalidDataError("build_basis: non-finite values");

  FeatureBasis basis;
  basis.df = df;
  basis.lo = values.minCoeff();
  basis.hi = values.maxCoeff();

  if (df == 1) {
    basis.order = 0;
    return {basis, values};
  }

  std::vector<double> sorted(values.data(), values.data() + n);
  std::sort(sorted.begin(), sorted.end());
  int distinct = n == 0 ? 0 : 1;
  for (int i = 1; i < n; ++i)
    if (sorted[i] != sorted[i - 1]) ++distinct;
  if (distinct < df + 1)
    throw DegenerateFeatureError("build_basis: fewer than df+1 distinct values");

  basis.order = std::min(4, df);
  const int ni = df - basis.order;
  basis.interior.resize(ni);
  for (int i = 0; i < ni; ++i)
    basis.interior[i] = detail::sorted_quantile(sorted, double(i + 1) / (ni + 1));
  for (int i = 0; i < ni; ++i) {
    const double prev = (i == 0) ? basis.lo : basis.interior[i - 1];
    if (!(basis.interior[i] > prev) || !(basis.interior[i] < basis.hi))
      throw DegenerateFeatureError("build_basis: tied quantile knots");
  }

  Eigen::MatrixXd design(n, df);
  Eigen::VectorXd row(df);
  for (int i = 0; i < n; ++i) {
    basis.evaluate(values[i], row.data());
    design.row(i) = row;
  }
  return {basis, design};
}

}  // namespace lspd
