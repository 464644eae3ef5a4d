// Acceptance suite: one pass/fail line per criterion, exit 0 only if all
// pass. Run with --only N[,M...] to restrict to selected criteria.
#include <chrono>
#include <cstdio>
#include <cstdarg>
#include <cstring>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "lspd/experiment.hpp"

using namespace lspd;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }

  // Informational measurement shown on the line whether or not it passes.
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

Eigen::MatrixXd normal_sample(int n, int d, double sd, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(n, d);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c) m(i, c) = sd * rng.next_normal();
  return m;
}

// --- 1: Monte Carlo Bayes risks ---------------------------------------------

Check bayes_risk_reproduction() {
  Check c;
  struct Row {
    ExampleId id;
    int d;
    double target_pct;
    double tol_pct;
  };
  const Row rows[] = {
      {ExampleId::E1, 5, 26.50, 1.0}, {ExampleId::E3, 5, 10.14, 1.0},
      {ExampleId::E4, 5, 2.10, 1.0},  {ExampleId::E5, 5, 2.04, 1.0},
      {ExampleId::E1, 100, 0.48, 0.3}, {ExampleId::E2, 10, 0.00, 0.3},
  };
  for (const Row& r : rows) {
    const auto est = bayes_risk_mc({r.id, r.d}, 100000, 20250 + r.d);
    const double pct = 100.0 * est.risk;
    c.note(fmt("%s d=%d: %.2f vs %.2f", example_name(r.id).c_str(), r.d, pct,
               r.target_pct));
    c.expect(std::abs(pct - r.target_pct) <= r.tol_pct,
             fmt("outside +-%.1f", r.tol_pct));
  }
  return c;
}

// --- 2 & 3: classifier quality tables ----------------------------------------

double mean_error_pct(ExampleId id, int d, ClassifierKind kind, int reps,
                      std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.example = ExampleSpec{id, d};
  cfg.n_train = 100;
  cfg.n_test = 250;
  cfg.repetitions = reps;
  cfg.classifiers = {kind};
  cfg.seed = seed;
  const ExperimentReport rep = run_experiment(cfg);
  return rep.mean_pct[0];
}

Check high_dimension_quality() {
  Check c;
  struct Row {
    ExampleId id;
    ClassifierKind kind;
    double cap_pct;
  };
  const Row rows[] = {
      {ExampleId::E3, ClassifierKind::SPD, 1.0},
      {ExampleId::E3, ClassifierKind::LSPD, 1.0},
      {ExampleId::E4, ClassifierKind::LSPD, 1.0},
      {ExampleId::E5, ClassifierKind::SPD, 1.0},
      {ExampleId::E5, ClassifierKind::LSPD, 1.0},
      {ExampleId::E1, ClassifierKind::SPD, 5.0},
      {ExampleId::E1, ClassifierKind::LSPD, 6.0},
      {ExampleId::E2, ClassifierKind::SPD, 7.0},
  };
  for (const Row& r : rows) {
    const double pct = mean_error_pct(r.id, 100, r.kind, 25, 515);
    c.note(fmt("%s %s: %.2f (cap %.0f)", example_name(r.id).c_str(),
               classifier_name(r.kind).c_str(), pct, r.cap_pct));
    c.expect(pct <= r.cap_pct, "over cap");
  }
  return c;
}

Check moderate_dimension_quality() {
  Check c;
  const double e2_spd = mean_error_pct(ExampleId::E2, 5, ClassifierKind::SPD, 50, 616);
  c.note(fmt("E2 SPD: %.2f (band 6-14)", e2_spd));
  c.expect(e2_spd >= 6.0 && e2_spd <= 14.0, "outside band");
  const double e2_lspd =
      mean_error_pct(ExampleId::E2, 5, ClassifierKind::LSPD, 50, 616);
  c.note(fmt("E2 LSPD: %.2f (band 6-15)", e2_lspd));
  c.expect(e2_lspd >= 6.0 && e2_lspd <= 15.0, "outside band");
  const double e3_spd = mean_error_pct(ExampleId::E3, 5, ClassifierKind::SPD, 50, 616);
  c.note(fmt("E3 SPD: %.2f (band 10-15)", e3_spd));
  c.expect(e3_spd >= 10.0 && e3_spd <= 15.0, "outside band");
  return c;
}

// --- 4: localization trend ----------------------------------------------------

double single_scale_error(ExampleId id, int d, double h, int reps,
                          std::uint64_t seed) {
  double acc = 0.0;
  for (int r = 0; r < reps; ++r) {
    const std::uint64_t rs = derive_stream(seed, r);
    const LabeledDataset train = generate({id, d}, 100, derive_stream(rs, 1));
    const LabeledDataset test = generate({id, d}, 250, derive_stream(rs, 2));
    MultiscaleConfig cfg;
    // The trend compares raw localization scales, so the bandwidth must act
    // on unstandardized coordinates.
    cfg.scatter = ScatterMode::Identity;
    const SingleScaleModel m = fit_single_scale(train, h, cfg);
    int wrong = 0;
    for (int i = 0; i < test.n(); ++i)
      if (m.classify(test.points.row(i)) != test.labels[i]) ++wrong;
    acc += double(wrong) / test.n();
  }
  return acc / reps;
}

Check localization_trend() {
  Check c;
  const double e3_small = single_scale_error(ExampleId::E3, 10, 0.5, 10, 717);
  const double e3_large = single_scale_error(ExampleId::E3, 10, 50.0, 10, 717);
  c.note(fmt("E3 d=10: err(h=0.5)=%.3f err(h=50)=%.3f", e3_small, e3_large));
  c.expect(e3_large < e3_small, "large-h not better on E3");
  const double e4_small = single_scale_error(ExampleId::E4, 2, 0.5, 10, 718);
  const double e4_large = single_scale_error(ExampleId::E4, 2, 50.0, 10, 718);
  c.note(fmt("E4 d=2: err(h=0.5)=%.3f err(h=50)=%.3f", e4_small, e4_large));
  c.expect(e4_small < e4_large, "small-h not better on E4");
  return c;
}

// --- 5: large-d spd feature limits --------------------------------------------

Check hdlss_spd_convergence() {
  Check c;
  const int d = 1000, m = 200, queries = 200;
  const Eigen::MatrixXd c1 = normal_sample(m, d, 1.0, 81001);
  const Eigen::MatrixXd c2 = normal_sample(m, d, 2.0, 81002);
  const Whitener id = Whitener::identity(d);
  double z1 = 0.0, z2 = 0.0;
  for (int q = 0; q < queries; ++q) {
    const Eigen::MatrixXd x = normal_sample(1, d, 1.0, 82000 + q);
    z1 += spd(x.row(0), c1, id);
    z2 += spd(x.row(0), c2, id);
  }
  z1 /= queries;
  z2 /= queries;
  const double t1 = 1.0 - std::sqrt(0.5);
  const double t2 = 1.0 - std::sqrt(0.2);
  c.note(fmt("mean z=(%.4f, %.4f) vs limit (%.4f, %.4f)", z1, z2, t1, t2));
  c.expect(std::abs(z1 - t1) < 0.02, "z1 off by more than 0.02");
  c.expect(std::abs(z2 - t2) < 0.02, "z2 off by more than 0.02");
  return c;
}

// --- 6: huge-bandwidth limit ---------------------------------------------------

Check lspd_large_h_limit() {
  Check c;
  const Eigen::MatrixXd data = normal_sample(100, 2, 1.3, 909);
  const Whitener id = Whitener::identity(2);
  const KernelSpec kern{KernelFamily::Gaussian, 2};
  Rng rng(910);
  for (int k = 0; k < 20; ++k) {
    Eigen::VectorXd x(2);
    x << 2.0 * rng.next_normal(), 2.0 * rng.next_normal();
    const double gap =
        std::abs(local_spd(x, data, id, 1e6, kern) - kern.k0() * spd(x, data, id));
    c.expect(gap < 1e-3 * kern.k0(), fmt("gap %.3e at point %d", gap, k));
  }
  return c;
}

// --- 7: small-bandwidth density limit -----------------------------------------

Check lspd_small_h_density() {
  Check c;
  const Eigen::MatrixXd data = normal_sample(100000, 2, 1.0, 1111);
  const Whitener id = Whitener::identity(2);
  const KernelSpec kern{KernelFamily::Gaussian, 2};
  Eigen::MatrixXd pts(10, 2);
  pts << 1.4, 0.0, -0.99, 0.99, 0.96, -1.28, -1.8, 0.0, 1.27, 1.27, 0.0, 2.0,
      -1.32, -1.76, 2.4, 0.0, -1.56, 2.08, 0.0, -2.8;
  auto max_err = [&](double h) {
    double worst = 0.0;
    for (int i = 0; i < pts.rows(); ++i) {
      const Eigen::VectorXd x = pts.row(i);
      const double f = std::exp(-0.5 * x.squaredNorm()) / (2.0 * std::numbers::pi);
      worst = std::max(worst, std::abs(local_spd(x, data, id, h, kern) - f));
    }
    return worst;
  };
  const double e10 = max_err(0.1);
  const double e50 = max_err(0.5);
  c.note(fmt("max err: h=0.1: %.4f, h=0.5: %.4f", e10, e50));
  c.expect(e10 < e50, "no improvement from shrinking h");
  c.expect(e10 < 0.01, "err(h=0.1) >= 0.01");
  return c;
}

// --- 8: GAM vs independent solvers ---------------------------------------------

Check gam_oracle_equivalence() {
  Check c;
  Rng rng(1212);
  const int n = 300;
  Eigen::MatrixXd Z(n, 2);
  Eigen::VectorXi y(n);
  for (int i = 0; i < n; ++i) {
    const int cls = (i % 2) + 1;
    Z(i, 0) = (cls == 1 ? 0.6 : -0.6) + rng.next_normal();
    Z(i, 1) = (cls == 1 ? -0.4 : 0.4) + rng.next_normal();
    y[i] = rng.next_unit() < 0.85 ? cls : 3 - cls;
  }
  const GamModel m = fit_gam(Z, y, 1, 0.0);

  // Independent plain Newton solver.
  Eigen::MatrixXd D(n, 3);
  D.col(0).setOnes();
  D.rightCols(2) = Z;
  Eigen::VectorXd yy(n);
  for (int i = 0; i < n; ++i) yy[i] = y[i] == 1 ? 1.0 : 0.0;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(3);
  for (int iter = 0; iter < 200; ++iter) {
    const Eigen::VectorXd eta = D * b;
    Eigen::VectorXd mu(n), w(n);
    for (int i = 0; i < n; ++i) {
      mu[i] = 1.0 / (1.0 + std::exp(-eta[i]));
      w[i] = mu[i] * (1.0 - mu[i]);
    }
    const Eigen::VectorXd g = D.transpose() * (yy - mu);
    if (g.cwiseAbs().maxCoeff() < 1e-10) break;
    b += (D.transpose() * w.asDiagonal() * D).ldlt().solve(g);
  }
  for (int k = 0; k < 3; ++k)
    c.expect(std::abs(m.coef(0, k) - b[k]) < 1e-6,
             fmt("coef %d: %.8f vs %.8f", k, m.coef(0, k), b[k]));

  // Analytic gradient against central finite differences.
  Eigen::MatrixXd X = D;
  Eigen::VectorXd ridge = Eigen::VectorXd::Constant(3, 1e-3);
  ridge[0] = 0.0;
  const lspd::detail::MultinomialObjective obj{X, y, 2, ridge};
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXd B(1, 3);
    for (int k = 0; k < 3; ++k) B(0, k) = 0.5 * rng.next_normal();
    const Eigen::MatrixXd G = obj.gradient(B, obj.probabilities(B));
    for (int k = 0; k < 3; ++k) {
      Eigen::MatrixXd bp = B, bm = B;
      bp(0, k) += 1e-5;
      bm(0, k) -= 1e-5;
      const double fd = (obj.value(bp) - obj.value(bm)) / 2e-5;
      const double rel = std::abs(G(0, k) - fd) /
                         std::max(1e-8, std::abs(fd));
      c.expect(rel < 1e-4, fmt("gradient %d: rel err %.2e", k, rel));
    }
  }
  return c;
}

// --- 9: property suite ----------------------------------------------------------

Check property_suite() {
  Check c;
  const KernelSpec kern2{KernelFamily::Gaussian, 2};

  // Depth ranges on random inputs.
  for (int k = 0; k < 20; ++k) {
    const Eigen::MatrixXd data = normal_sample(15, 2, 1.0, 3000 + k);
    const Whitener w = estimate_scatter(data, ScatterMode::Full);
    const Eigen::MatrixXd xm = normal_sample(1, 2, 2.0, 3100 + k);
    const double s = spd(xm.row(0), data, w);
    c.expect(s >= 0.0 && s <= 1.0, "spd out of [0,1]");
    for (double h : {0.2, 1.0, 30.0})
      c.expect(local_spd(xm.row(0), data, w, h, kern2) >= 0.0, "lspd negative");
  }

  // Rotation invariance.
  {
    const Eigen::MatrixXd data = normal_sample(20, 3, 1.0, 3300);
    const Eigen::MatrixXd q =
        Eigen::HouseholderQR<Eigen::MatrixXd>(normal_sample(3, 3, 1.0, 3301))
            .householderQ();
    const Whitener id = Whitener::identity(3);
    const Eigen::MatrixXd xm = normal_sample(1, 3, 1.0, 3302);
    const Eigen::VectorXd x = xm.row(0);
    c.expect(std::abs(spd(q * x, data * q.transpose(), id) - spd(x, data, id)) <
                 1e-10,
             "rotation invariance");
  }

  // Continuity across the h = 1 branch switch.
  {
    const Eigen::MatrixXd data = normal_sample(25, 2, 1.0, 3400);
    const Whitener id = Whitener::identity(2);
    const Eigen::MatrixXd xm = normal_sample(1, 2, 1.0, 3401);
    const double lo = local_spd(xm.row(0), data, id, 1.0 - 1e-9, kern2);
    const double hi = local_spd(xm.row(0), data, id, 1.0 + 1e-9, kern2);
    c.expect(std::abs(hi - lo) <= 1e-6 * std::max(lo, hi), "h=1 continuity");
  }

  // Weight identities.
  {
    Eigen::VectorXd risks(3);
    risks << 0.1, 0.1, 0.2;
    const Eigen::VectorXd w = compute_weights(risks, 100);
    c.expect(w[0] == 1.0 && w[1] == 1.0, "weight 1 at the minimizer");
    c.expect(std::abs(w[2] - std::exp(-50.0 / 9.0)) < 1e-12,
             "hand weight exp(-50/9)");
  }

  // M = 1 multiscale equals the single-bandwidth classifier.
  {
    const LabeledDataset train = generate({ExampleId::E4, 2}, 50, 3500);
    const LabeledDataset test = generate({ExampleId::E4, 2}, 50, 3501);
    MultiscaleConfig cfg;
    cfg.M = 1;
    cfg.fixed_bandwidths = {3.0};
    const MultiscaleModel multi = fit_multiscale(train, cfg);
    const SingleScaleModel single = fit_single_scale(train, 3.0, cfg);
    bool all = true;
    for (int i = 0; i < test.n(); ++i)
      all = all &&
            multi.classify(test.points.row(i)).first ==
                single.classify(test.points.row(i));
    c.expect(all, "M=1 equivalence");
  }

  // Seed determinism of a full report.
  {
    ExperimentConfig cfg;
    cfg.example = ExampleSpec{ExampleId::E3, 2};
    cfg.n_train = 30;
    cfg.n_test = 50;
    cfg.repetitions = 3;
    cfg.classifiers = {ClassifierKind::SPD, ClassifierKind::LSPD,
                       ClassifierKind::LDA};
    cfg.multiscale.M = 5;
    cfg.seed = 3600;
    cfg.threads = 1;
    const std::string a = run_experiment(cfg).render_text();
    cfg.threads = 2;
    const std::string b = run_experiment(cfg).render_text();
    c.expect(a == b, "report determinism across thread counts");
  }

  // CSV round trip.
  {
    const LabeledDataset ds = generate({ExampleId::E5, 4}, 40, 3700);
    dump_csv(ds, "/tmp/lspd_acceptance_roundtrip.csv");
    const auto back = ingest_csv("/tmp/lspd_acceptance_roundtrip.csv");
    bool same = back.data.labels == ds.labels && back.data.points == ds.points;
    c.expect(same, "csv round trip");
  }
  return c;
}

// --- 10: monotone center-outward ordering ---------------------------------------

Check spd_monotone_decay() {
  Check c;
  const Eigen::MatrixXd data = normal_sample(100000, 2, 1.0, 4000);
  const Whitener id = Whitener::identity(2);
  double prev = 2.0;
  for (double r : {0.5, 1.0, 2.0, 4.0}) {
    Eigen::VectorXd x(2);
    x << r, 0.0;
    const double depth = spd(x, data, id);
    c.expect(depth < prev - 0.01, fmt("depth(%.1f)=%.4f vs prev %.4f", r, depth, prev));
    prev = depth;
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int a = 1; a < argc; ++a) {
    if (std::strcmp(argv[a], "--only") == 0 && a + 1 < argc) {
      const std::string list = argv[++a];
      std::size_t at = 0;
      while (at < list.size()) {
        only.insert(std::atoi(list.c_str() + at));
        at = list.find(',', at);
        if (at == std::string::npos) break;
        ++at;
      }
    }
  }

  struct Item {
    int id;
    const char* name;
    Check (*fn)();
  };
  const Item items[] = {
      {1, "Bayes risk reproduction", bayes_risk_reproduction},
      {2, "high-dimension classifier quality (d=100)", high_dimension_quality},
      {3, "moderate-dimension classifier quality (d=5)", moderate_dimension_quality},
      {4, "localization trend across bandwidths", localization_trend},
      {5, "large-d spd feature limits", hdlss_spd_convergence},
      {6, "large-bandwidth limit K(0) * spd", lspd_large_h_limit},
      {7, "small-bandwidth density limit", lspd_small_h_density},
      {8, "GAM oracle equivalence", gam_oracle_equivalence},
      {9, "property suite", property_suite},
      {10, "spd decreases along rays", spd_monotone_decay},
  };

  int failures = 0;
  for (const Item& item : items) {
    if (!only.empty() && !only.count(item.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    try {
      c = item.fn();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::printf("[%s] criterion %2d: %s (%.1fs)%s%s\n", c.ok ? "PASS" : "FAIL",
                item.id, item.name, secs, c.detail.empty() ? "" : " -- ",
                c.detail.c_str());
    std::fflush(stdout);
    if (!c.ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
