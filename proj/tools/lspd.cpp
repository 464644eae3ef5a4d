// Command-line harness: simulated experiments, CSV benchmarks, Monte Carlo
// Bayes risks, large-d limit sweeps, and raw depth evaluation.
#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lspd/experiment.hpp"

using namespace lspd;

namespace {

std::optional<ScatterMode> parse_scatter(const std::string& s) {
  if (s == "auto") return std::nullopt;
  if (s == "full") return ScatterMode::Full;
  if (s == "diag" || s == "diagonal") return ScatterMode::Diagonal;
  if (s == "identity" || s == "id") return ScatterMode::Identity;
  throw CLI::ValidationError("--scatter", "expected auto|full|diag|identity");
}

std::vector<ClassifierKind> parse_classifier_list(const std::string& s) {
  std::vector<ClassifierKind> out;
  std::string token;
  std::stringstream ss(s);
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) out.push_back(parse_classifier(token));
  }
  if (out.empty()) throw CLI::ValidationError("--classifiers", "empty list");
  return out;
}

struct CommonOpts {
  std::string classifiers = "SPD,LSPD,LDA,QDA,KNN,KDE";
  std::uint64_t seed = 1;
  std::string scatter = "auto";
  int M = 25;
  double cauchy_scale = 100.0;
  int df = 5;
  double lambda = 1e-3;
  std::string cv_mode = "loo-features";
  std::string out;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_classifiers) {
  if (with_classifiers)
    cmd->add_option("--classifiers", o.classifiers,
                    "comma list from SPD,LSPD,LDA,QDA,KNN,KDE,BAYES");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--scatter", o.scatter, "auto|full|diag|identity");
  cmd->add_option("--M", o.M, "bandwidths sampled per multiscale fit");
  cmd->add_option("--cauchy-scale", o.cauchy_scale, "bandwidth prior scale");
  cmd->add_option("--df", o.df, "spline basis functions per depth feature");
  cmd->add_option("--lambda", o.lambda, "ridge weight of the additive fit");
  cmd->add_option("--cv-mode", o.cv_mode, "loo-features|kfold");
  cmd->add_option("--out", o.out, "write the report here (plus a .csv twin)");
  cmd->add_option("--threads", o.threads, "worker threads (0 = hardware)");
  cmd->set_config("--config", "", "flat key=value config file; flags override");
}

void fill_config(ExperimentConfig& cfg, const CommonOpts& o) {
  cfg.classifiers = parse_classifier_list(o.classifiers);
  cfg.seed = o.seed;
  cfg.scatter = parse_scatter(o.scatter);
  cfg.multiscale.M = o.M;
  cfg.multiscale.cauchy_scale = o.cauchy_scale;
  cfg.multiscale.df = o.df;
  cfg.multiscale.lambda = o.lambda;
  if (o.cv_mode == "loo-features")
    cfg.multiscale.cv_mode = CvMode::LooFeatures;
  else if (o.cv_mode == "kfold")
    cfg.multiscale.cv_mode = CvMode::KFold;
  else
    throw CLI::ValidationError("--cv-mode", "expected loo-features|kfold");
  cfg.threads = o.threads;
}

void emit_report(const ExperimentReport& rep, const std::string& out) {
  const std::string text = rep.render_text();
  std::cout << text;
  if (!rep.multiscale_note.empty())
    std::cout << "\nmultiscale weights (first repetition):\n"
              << rep.multiscale_note;
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw IngestError("cannot open output file: " + out);
    f << text;
    std::string csv = out;
    const auto dot = csv.find_last_of('.');
    if (dot != std::string::npos && csv.find('/', dot) == std::string::npos)
      csv = csv.substr(0, dot);
    rep.write_csv(csv + ".csv");
  }
}

int dispatch(int argc, char** argv) {
  CLI::App app{"spatial-depth classification toolkit"};
  app.require_subcommand(1);

  // --- simulate --------------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "run a simulated-example experiment");
  std::string sim_example = "E3";
  int sim_d = 5, sim_ntrain = 100, sim_ntest = 250, sim_reps = 10;
  CommonOpts sim_o;
  sim->add_option("--example", sim_example, "E1|E2|E3|E4|E5")->required();
  sim->add_option("--d", sim_d, "dimension");
  sim->add_option("--n-train", sim_ntrain, "training points per class");
  sim->add_option("--n-test", sim_ntest, "test points per class");
  sim->add_option("--reps", sim_reps, "repetitions");
  add_common(sim, sim_o, true);

  // --- bench -----------------------------------------------------------------
  auto* bench = app.add_subcommand("bench", "run a CSV-dataset experiment");
  std::string bench_data, bench_label = "label", bench_delim = ",";
  double bench_frac = 0.5;
  int bench_reps = 10;
  CommonOpts bench_o;
  bench->add_option("--data", bench_data, "CSV path with a header row")->required();
  bench->add_option("--label-col", bench_label, "label column name");
  bench->add_option("--delimiter", bench_delim, "cell delimiter");
  bench->add_option("--train-frac", bench_frac, "training fraction per class");
  bench->add_option("--reps", bench_reps, "random splits");
  add_common(bench, bench_o, true);

  // --- bayes-risk ------------------------------------------------------------
  auto* bayes = app.add_subcommand("bayes-risk", "Monte Carlo Bayes risk");
  std::string br_example = "E1";
  int br_d = 5, br_n = 100000;
  std::uint64_t br_seed = 1;
  bayes->add_option("--example", br_example, "E1|E2|E3|E4|E5")->required();
  bayes->add_option("--d", br_d, "dimension");
  bayes->add_option("--n", br_n, "draws per class");
  bayes->add_option("--seed", br_seed, "seed");
  bayes->set_config("--config");

  // --- hdlss -----------------------------------------------------------------
  auto* hd = app.add_subcommand("hdlss", "large-d depth-feature limit sweep");
  std::string hd_dlist = "100,400,1600";
  std::vector<double> hd_sigma2{1.0, 4.0};
  double hd_nu = 0.0;
  std::string hd_rule = "spd";
  int hd_n = 100, hd_eval = 100;
  std::uint64_t hd_seed = 1;
  hd->add_option("--d-list", hd_dlist, "comma list of dimensions");
  hd->add_option("--sigma2", hd_sigma2, "per-class variance limits (two values)")
      ->expected(2);
  hd->add_option("--nu", hd_nu, "squared mean-gap limit between the classes");
  hd->add_option("--h-rule", hd_rule, "spd | A=<value> (h = sqrt(d)/A)");
  hd->add_option("--n", hd_n, "sample points per class");
  hd->add_option("--n-eval", hd_eval, "evaluation draws per class");
  hd->add_option("--seed", hd_seed, "seed");
  hd->set_config("--config");

  // --- depth -----------------------------------------------------------------
  auto* dp = app.add_subcommand("depth", "print depth features for query points");
  std::string dp_train, dp_query, dp_scale = "spd", dp_label = "label",
              dp_scatter = "auto";
  dp->add_option("--train", dp_train, "labeled training CSV")->required();
  dp->add_option("--query", dp_query, "query CSV (label column ignored if absent)")
      ->required();
  dp->add_option("--scale", dp_scale, "spd or a positive bandwidth");
  dp->add_option("--label-col", dp_label, "label column of the training CSV");
  dp->add_option("--scatter", dp_scatter, "auto|full|diag|identity");
  dp->set_config("--config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*sim) {
    ExperimentConfig cfg;
    cfg.example = ExampleSpec{parse_example_id(sim_example), sim_d};
    cfg.n_train = sim_ntrain;
    cfg.n_test = sim_ntest;
    cfg.repetitions = sim_reps;
    fill_config(cfg, sim_o);
    emit_report(run_experiment(cfg), sim_o.out);
    return 0;
  }
  if (*bench) {
    ExperimentConfig cfg;
    cfg.csv_path = bench_data;
    cfg.schema.label_column = bench_label;
    cfg.schema.delimiter = bench_delim.empty() ? ',' : bench_delim[0];
    cfg.train_frac = bench_frac;
    cfg.repetitions = bench_reps;
    fill_config(cfg, bench_o);
    emit_report(run_experiment(cfg), bench_o.out);
    return 0;
  }
  if (*bayes) {
    const ExampleSpec spec{parse_example_id(br_example), br_d};
    const auto est = bayes_risk_mc(spec, br_n, br_seed);
    std::printf("%s d=%d N=%d/class: bayes risk %.2f%% (se %.2f%%)\n",
                example_name(spec.id).c_str(), br_d, br_n, 100.0 * est.risk,
                100.0 * est.std_error);
    return 0;
  }
  if (*hd) {
    Eigen::VectorXd s2(2);
    s2 << hd_sigma2[0], hd_sigma2[1];
    Eigen::MatrixXd nu = Eigen::MatrixXd::Zero(2, 2);
    nu(0, 1) = nu(1, 0) = hd_nu;
    const HdlssParams params = HdlssParams::from_sigma_nu(s2, nu);

    double A = -1.0;  // negative = spd rule
    if (hd_rule != "spd") {
      if (hd_rule.rfind("A=", 0) != 0)
        throw CLI::ValidationError("--h-rule", "expected spd or A=<value>");
      A = std::stod(hd_rule.substr(2));
      if (!(A > 0.0)) throw CLI::ValidationError("--h-rule", "A must be > 0");
    }
    const Eigen::MatrixXd limit =
        A < 0.0 ? hdlss_spd_limits(params)
                : hdlss_lspd_limits(params, A, KernelSpec{KernelFamily::Gaussian, 2});

    std::printf("rule=%s sigma2=(%g, %g) nu=%g n=%d eval=%d\n", hd_rule.c_str(),
                hd_sigma2[0], hd_sigma2[1], hd_nu, hd_n, hd_eval);
    std::printf("%8s %6s %22s %22s %10s\n", "d", "class", "mean z", "limit", "max gap");

    std::string dlist = hd_dlist;
    for (char& ch : dlist)
      if (ch == ',') ch = ' ';
    std::stringstream ds(dlist);
    int d;
    while (ds >> d) {
      const double h = A < 0.0 ? 0.0 : std::sqrt(double(d)) / A;
      // Classes N(0, s1^2 I) and N(mu, s2^2 I) with per-coordinate mean gap
      // sqrt(nu); identity standardization.
      auto draw = [&](int cls, std::uint64_t tag) {
        Rng rng(derive_stream(hd_seed, static_cast<std::uint64_t>(d), tag));
        Eigen::MatrixXd m(hd_n, d);
        const double sd = std::sqrt(hd_sigma2[cls - 1]);
        const double shift = cls == 2 ? std::sqrt(hd_nu) : 0.0;
        for (int i = 0; i < hd_n; ++i)
          for (int k = 0; k < d; ++k) m(i, k) = shift + sd * rng.next_normal();
        return m;
      };
      const Eigen::MatrixXd c1 = draw(1, 1), c2 = draw(2, 2);
      const Whitener id = Whitener::identity(d);
      for (int cls = 1; cls <= 2; ++cls) {
        Eigen::Vector2d mean_z = Eigen::Vector2d::Zero();
        for (int q = 0; q < hd_eval; ++q) {
          Rng rng(derive_stream(hd_seed, static_cast<std::uint64_t>(d),
                                100 + static_cast<std::uint64_t>(cls) * hd_eval + q));
          Eigen::VectorXd x(d);
          const double sd = std::sqrt(hd_sigma2[cls - 1]);
          const double shift = cls == 2 ? std::sqrt(hd_nu) : 0.0;
          for (int k = 0; k < d; ++k) x[k] = shift + sd * rng.next_normal();
          for (int j = 0; j < 2; ++j) {
            const Eigen::MatrixXd& data = j == 0 ? c1 : c2;
            if (A < 0.0) {
              mean_z[j] += spd(x, data, id);
            } else {
              // Unnormalized profile sums g(r/h); the h^d Gamma_h branch.
              double s0 = 0.0;
              Eigen::VectorXd sv = Eigen::VectorXd::Zero(d);
              for (int i = 0; i < data.rows(); ++i) {
                const Eigen::VectorXd t = x - data.row(i).transpose();
                const double r = t.norm();
                const double g = std::exp(-0.5 * (r / h) * (r / h));
                s0 += g;
                if (r >= 1e-12) sv += g * t / r;
              }
              mean_z[j] += s0 / data.rows() - (sv / data.rows()).norm();
            }
          }
        }
        mean_z /= hd_eval;
        const double gap = std::max(std::abs(mean_z[0] - limit(cls - 1, 0)),
                                    std::abs(mean_z[1] - limit(cls - 1, 1)));
        std::printf("%8d %6d   (%8.5f, %8.5f)   (%8.5f, %8.5f) %10.5f\n", d, cls,
                    mean_z[0], mean_z[1], limit(cls - 1, 0), limit(cls - 1, 1), gap);
      }
    }
    return 0;
  }
  if (*dp) {
    const auto train = ingest_csv(dp_train, {dp_label, ','});
    if (train.rows_dropped > 0)
      std::fprintf(stderr, "note: %d training rows dropped\n", train.rows_dropped);
    std::optional<double> scale;
    if (dp_scale != "spd") {
      scale = std::stod(dp_scale);
      if (!(*scale > 0.0))
        throw CLI::ValidationError("--scale", "bandwidth must be positive");
    }
    const auto perclass = train.data.split_by_class();
    const auto whiteners = class_whiteners(perclass, parse_scatter(dp_scatter));

    // Query file: reuse the ingest path when a label column exists, else
    // parse plain numeric rows.
    Eigen::MatrixXd queries;
    try {
      const auto q = ingest_csv(dp_query, {dp_label, ','});
      queries = q.data.points;
    } catch (const Error&) {
      std::ifstream in(dp_query);
      if (!in) throw IngestError("cannot open query file: " + dp_query);
      std::string line;
      std::getline(in, line);  // header
      std::vector<std::vector<double>> rows;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
      }
      if (rows.empty()) throw InvalidDataError("query file has no rows");
      queries.resize(static_cast<int>(rows.size()),
                     static_cast<int>(rows[0].size()));
      for (int i = 0; i < queries.rows(); ++i)
        for (int c = 0; c < queries.cols(); ++c) queries(i, c) = rows[i][c];
    }
    if (queries.cols() != train.data.dim())
      throw ShapeError("query dimension does not match training data");

    std::printf("# scale=%s classes=%d\n", dp_scale.c_str(), train.data.num_classes);
    for (int i = 0; i < queries.rows(); ++i) {
      const DepthFeatures f =
          depth_features(queries.row(i), perclass, whiteners, scale);
      for (int j = 0; j < f.num_classes(); ++j)
        std::printf(j == 0 ? "%.10g" : ",%.10g", f.values[j]);
      std::printf("\n");
    }
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const InvalidParameterError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
