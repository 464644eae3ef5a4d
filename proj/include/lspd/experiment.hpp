#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "lspd/baselines.hpp"
#include "lspd/dataset.hpp"
#include "lspd/errors.hpp"
#include "lspd/multiscale.hpp"
#include "lspd/rng.hpp"
#include "lspd/simgen.hpp"

namespace lspd {

inline constexpr const char* kVersion = "1.0.0";

enum class ClassifierKind { SPD, LSPD, LDA, QDA, KNN, KDE, BAYES };

inline std::string classifier_name(ClassifierKind c) {
  switch (c) {
    case ClassifierKind::SPD: return "SPD";
    case ClassifierKind::LSPD: return "LSPD";
    case ClassifierKind::LDA: return "LDA";
    case ClassifierKind::QDA: return "QDA";
    case ClassifierKind::KNN: return "KNN";
    case ClassifierKind::KDE: return "KDE";
    case ClassifierKind::BAYES: return "BAYES";
  }
  return "?";
}

inline ClassifierKind parse_classifier(const std::string& s) {
  std::string u;
  for (char c : s) u += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (u == "SPD") return ClassifierKind::SPD;
  if (u == "LSPD") return ClassifierKind::LSPD;
  if (u == "LDA") return ClassifierKind::LDA;
  if (u == "QDA") return ClassifierKind::QDA;
  if (u == "KNN") return ClassifierKind::KNN;
  if (u == "KDE") return ClassifierKind::KDE;
  if (u == "BAYES") return ClassifierKind::BAYES;
  throw InvalidParameterError("unknown classifier: " + s);
}

struct ExperimentConfig {
  // Source: a simulated example or a CSV path (exactly one).
  std::optional<ExampleSpec> example;
  std::string csv_path;
  CsvSchema schema;
  double train_frac = 0.5;  // CSV splits

  int n_train = 100;  // per class, simulated sources
  int n_test = 250;   // per class, simulated sources
  int repetitions = 10;
  std::vector<ClassifierKind> classifiers;
  std::uint64_t seed = 1;
  MultiscaleConfig multiscale;         // M, cauchy scale, df, lambda, cv mode
  std::optional<ScatterMode> scatter;  // empty = auto rule
  int threads = 0;                     // 0 = hardware concurrency
};

struct ExperimentReport {
  std::vector<ClassifierKind> classifiers;
  Eigen::MatrixXd rep_errors;        // repetitions x classifiers, NaN = failed
  std::vector<double> mean_pct;      // NaN for failed cells
  std::vector<double> se_pct;
  std::vector<double> efficiency;
  std::string se_kind;               // which standard error formula was used
  std::string provenance;            // config echo block
  std::string multiscale_note;

  std::string render_text() const;
  void write_csv(const std::string& path) const;
};

/// e_t = (min error) / (error of t); a zero error scores 1 when it is the
/// minimum and forces every slower classifier's ratio through the plain
/// formula (0 / eps = 0).
inline std::vector<double> efficiency_scores(const std::vector<double>& errors) {
  if (errors.empty()) throw InvalidParameterError("efficiency_scores: empty input");
  double best = std::numeric_limits<double>::infinity();
  for (double e : errors)
    if (!std::isnan(e)) best = std::min(best, e);
  std::vector<double> out(errors.size(), std::numeric_limits<double>::quiet_NaN());
  if (std::isinf(best)) return out;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (std::isnan(errors[i])) continue;
    out[i] = (errors[i] == best) ? 1.0 : best / errors[i];
  }
  return out;
}

namespace detail {

struct SplitData {
  LabeledDataset train, test;
};

/// Per-repetition data: fresh simulated draws, or a stratified random split
/// of the ingested CSV.
inline SplitData make_split(const ExperimentConfig& cfg, const LabeledDataset* csv,
                            std::uint64_t rep_seed) {
  if (cfg.example) {
    SplitData s;
    s.train = generate(*cfg.example, cfg.n_train, derive_stream(rep_seed, 1));
    s.test = generate(*cfg.example, cfg.n_test, derive_stream(rep_seed, 2));
    return s;
  }
  const LabeledDataset& all = *csv;
  Rng rng(derive_stream(rep_seed, 3));
  std::vector<int> train_idx, test_idx;
  for (int j = 1; j <= all.num_classes; ++j) {
    auto idx = all.class_indices(j);
    // Fisher-Yates with the repetition stream.
    for (int i = static_cast<int>(idx.size()) - 1; i > 0; --i) {
      const int t = static_cast<int>(rng.next_unit() * (i + 1));
      std::swap(idx[i], idx[std::min(t, i)]);
    }
    int ntr = static_cast<int>(std::lround(cfg.train_frac * idx.size()));
    ntr = std::max(2, std::min(ntr, static_cast<int>(idx.size()) - 1));
    for (int i = 0; i < static_cast<int>(idx.size()); ++i)
      (i < ntr ? train_idx : test_idx).push_back(idx[i]);
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  auto take = [&](const std::vector<int>& idx) {
    LabeledDataset ds;
    ds.points.resize(static_cast<int>(idx.size()), all.dim());
    ds.labels.resize(static_cast<int>(idx.size()));
    ds.num_classes = all.num_classes;
    ds.class_names = all.class_names;
    for (int i = 0; i < static_cast<int>(idx.size()); ++i) {
      ds.points.row(i) = all.points.row(idx[i]);
      ds.labels[i] = all.labels[idx[i]];
    }
    return ds;
  };
  return {take(train_idx), take(test_idx)};
}

inline double run_classifier(ClassifierKind kind, const ExperimentConfig& cfg,
                             const SplitData& split, std::uint64_t rep_seed,
                             std::string* ms_note) {
  const LabeledDataset& train = split.train;
  const LabeledDataset& test = split.test;
  int wrong = 0;
  MultiscaleConfig ms = cfg.multiscale;
  ms.scatter = cfg.scatter;
  switch (kind) {
    case ClassifierKind::SPD: {
      const SingleScaleModel m = fit_single_scale(train, std::nullopt, ms);
      for (int i = 0; i < test.n(); ++i)
        if (m.classify(test.points.row(i)) != test.labels[i]) ++wrong;
      break;
    }
    case ClassifierKind::LSPD: {
      ms.seed = derive_stream(rep_seed, 4);
      const MultiscaleModel m = fit_multiscale(train, ms);
      if (ms_note && ms_note->empty()) *ms_note = m.summary();
      for (int i = 0; i < test.n(); ++i)
        if (m.classify(test.points.row(i)).first != test.labels[i]) ++wrong;
      break;
    }
    case ClassifierKind::LDA:
    case ClassifierKind::QDA:
    case ClassifierKind::KNN:
    case ClassifierKind::KDE: {
      BaselineKind bk = BaselineKind::LDA;
      if (kind == ClassifierKind::QDA) bk = BaselineKind::QDA;
      if (kind == ClassifierKind::KNN) bk = BaselineKind::KNN;
      if (kind == ClassifierKind::KDE) bk = BaselineKind::KDE;
      const BaselineModel m = fit_baseline(bk, train, {cfg.scatter});
      for (int i = 0; i < test.n(); ++i)
        if (m.classify(test.points.row(i)) != test.labels[i]) ++wrong;
      break;
    }
    case ClassifierKind::BAYES: {
      for (int i = 0; i < test.n(); ++i)
        if (bayes_label(*cfg.example, test.points.row(i)) != test.labels[i]) ++wrong;
      break;
    }
  }
  return double(wrong) / double(test.n());
}

inline std::string format_pct(double v, int decimals) {
  if (std::isnan(v)) return "xxxx";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

}  // namespace detail

/// Runs the repetition loop: per repetition, fresh train/test data and one
/// fit/evaluate pass per requested classifier. Failed fits are recorded as
/// missing cells and the run continues. Deterministic for a fixed config and
/// seed; repetitions may execute on a worker pool without changing results.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.repetitions < 1)
    throw InvalidParameterError("run_experiment: repetitions must be >= 1");
  if (cfg.classifiers.empty())
    throw InvalidParameterError("run_experiment: no classifiers requested");
  if (!cfg.example && cfg.csv_path.empty())
    throw InvalidParameterError("run_experiment: no data source configured");
  for (ClassifierKind c : cfg.classifiers)
    if (c == ClassifierKind::BAYES && !cfg.example)
      throw InvalidParameterError("run_experiment: BAYES needs a simulated source");

  LabeledDataset csv;
  if (!cfg.example) csv = ingest_csv(cfg.csv_path, cfg.schema).data;

  const int R = cfg.repetitions;
  const int C = static_cast<int>(cfg.classifiers.size());
  ExperimentReport report;
  report.classifiers = cfg.classifiers;
  report.rep_errors.setConstant(R, C, std::numeric_limits<double>::quiet_NaN());

  std::vector<std::string> ms_notes(R);
  int nthreads = cfg.threads > 0
                     ? cfg.threads
                     : std::max(1u, std::thread::hardware_concurrency());
  nthreads = std::min(nthreads, R);

  std::atomic<int> next{0};
  std::vector<std::string> worker_error(nthreads);
  auto work = [&](int tid) {
    try {
      for (int r = next.fetch_add(1); r < R; r = next.fetch_add(1)) {
        const std::uint64_t rep_seed = derive_stream(cfg.seed, 100 + r);
        const detail::SplitData split =
            detail::make_split(cfg, cfg.example ? nullptr : &csv, rep_seed);
        for (int c = 0; c < C; ++c) {
          try {
            report.rep_errors(r, c) = detail::run_classifier(
                cfg.classifiers[c], cfg, split, rep_seed, &ms_notes[r]);
          } catch (const Error&) {
            // cell stays NaN; the run continues
          }
        }
      }
    } catch (const std::exception& e) {
      worker_error[tid] = e.what();
    }
  };
  if (nthreads <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  for (const auto& we : worker_error)
    if (!we.empty()) throw NumericalError("run_experiment: " + we);

  // Aggregate. Repeated designs report the SE of the mean across
  // repetitions; a single fixed split reports the binomial formula.
  const int test_total = cfg.example ? 2 * cfg.n_test : 0;
  report.mean_pct.assign(C, std::numeric_limits<double>::quiet_NaN());
  report.se_pct.assign(C, std::numeric_limits<double>::quiet_NaN());
  for (int c = 0; c < C; ++c) {
    double sum = 0.0;
    int ok = 0;
    for (int r = 0; r < R; ++r) {
      if (std::isnan(report.rep_errors(r, c))) continue;
      sum += report.rep_errors(r, c);
      ++ok;
    }
    if (ok == 0) continue;
    const double mean = sum / ok;
    report.mean_pct[c] = 100.0 * mean;
    if (R > 1) {
      double ss = 0.0;
      for (int r = 0; r < R; ++r) {
        if (std::isnan(report.rep_errors(r, c))) continue;
        ss += (report.rep_errors(r, c) - mean) * (report.rep_errors(r, c) - mean);
      }
      const double sd = ok > 1 ? std::sqrt(ss / (ok - 1)) : 0.0;
      report.se_pct[c] = 100.0 * sd / std::sqrt(double(ok));
    } else {
      int ntest = test_total;
      if (!cfg.example) {
        // Single split of a CSV: recover the test size from the split rule.
        const detail::SplitData s =
            detail::make_split(cfg, &csv, derive_stream(cfg.seed, 100));
        ntest = s.test.n();
      }
      report.se_pct[c] = 100.0 * std::sqrt(mean * (1.0 - mean) / double(ntest));
    }
  }
  report.se_kind = R > 1 ? "se-of-mean-over-repetitions" : "binomial-single-split";

  // Efficiency is computed from the printed (2-decimal) means so the table
  // is self-consistent.
  std::vector<double> rounded(C);
  for (int c = 0; c < C; ++c)
    rounded[c] = std::isnan(report.mean_pct[c])
                     ? std::numeric_limits<double>::quiet_NaN()
                     : std::stod(detail::format_pct(report.mean_pct[c], 2));
  report.efficiency = efficiency_scores(rounded);

  for (int r = 0; r < R; ++r)
    if (!ms_notes[r].empty()) {
      report.multiscale_note = ms_notes[r];
      break;
    }

  // Provenance block.
  {
    std::string p;
    p += "version: lspd " + std::string(kVersion) + "\n";
    if (cfg.example) {
      p += "source: example " + example_name(cfg.example->id) +
           " d=" + std::to_string(cfg.example->d) + "\n";
      p += "n-train: " + std::to_string(cfg.n_train) + "/class  n-test: " +
           std::to_string(cfg.n_test) + "/class\n";
    } else {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.4f", cfg.train_frac);
      p += "source: csv " + cfg.csv_path + "\n";
      p += "train-frac: " + std::string(buf) + "\n";
    }
    p += "repetitions: " + std::to_string(R) + "\n";
    p += "seed: " + std::to_string(cfg.seed) + "\n";
    p += "classifiers:";
    for (auto c : cfg.classifiers) p += " " + classifier_name(c);
    p += "\n";
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "multiscale: M=%d cauchy-scale=%g df=%d lambda=%g cv-mode=%s\n",
                  cfg.multiscale.M, cfg.multiscale.cauchy_scale, cfg.multiscale.df,
                  cfg.multiscale.lambda,
                  cfg.multiscale.cv_mode == CvMode::LooFeatures ? "loo-features"
                                                                : "kfold");
    p += buf;
    p += "scatter: ";
    if (!cfg.scatter) {
      p += "auto";
    } else {
      switch (*cfg.scatter) {
        case ScatterMode::Full: p += "full"; break;
        case ScatterMode::Diagonal: p += "diag"; break;
        case ScatterMode::Identity: p += "identity"; break;
      }
    }
    p += "\n";
    report.provenance = p;
  }
  return report;
}

inline std::string ExperimentReport::render_text() const {
  std::string out;
  out += "lspd experiment report\n";
  out += provenance;
  out += "se-kind: " + se_kind + "\n\n";
  out += "classifier  mean_error_pct  se_pct  efficiency\n";
  char buf[160];
  for (std::size_t c = 0; c < classifiers.size(); ++c) {
    const std::string eff = std::isnan(efficiency[c])
                                ? "xxxx"
                                : detail::format_pct(efficiency[c], 4);
    std::snprintf(buf, sizeof(buf), "%-10s  %14s  %6s  %10s\n",
                  classifier_name(classifiers[c]).c_str(),
                  detail::format_pct(mean_pct[c], 2).c_str(),
                  detail::format_pct(se_pct[c], 2).c_str(), eff.c_str());
    out += buf;
  }
  return out;
}

inline void ExperimentReport::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IngestError("report: cannot open " + path);
  out << "classifier,mean_error_pct,se_pct,efficiency\n";
  char buf[160];
  for (std::size_t c = 0; c < classifiers.size(); ++c) {
    std::snprintf(buf, sizeof(buf), "%s,%.2f,%.2f,%.4f\n",
                  classifier_name(classifiers[c]).c_str(), mean_pct[c], se_pct[c],
                  efficiency[c]);
    out << buf;
  }
}

}  // namespace lspd
