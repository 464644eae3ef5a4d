#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lspd/errors.hpp"

namespace lspd {

/// n observations in R^d with class labels 1..J.
struct LabeledDataset {
  Eigen::MatrixXd points;            // n x d
  Eigen::VectorXi labels;            // entries in 1..J
  int num_classes = 0;               // J
  std::vector<std::string> class_names;  // size J, original label strings

  int n() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }

  std::vector<int> class_indices(int j) const {
    std::vector<int> idx;
    for (int i = 0; i < n(); ++i)
      if (labels[i] == j) idx.push_back(i);
    return idx;
  }

  Eigen::MatrixXd class_matrix(int j) const {
    const auto idx = class_indices(j);
    Eigen::MatrixXd out(static_cast<int>(idx.size()), dim());
    for (int r = 0; r < static_cast<int>(idx.size()); ++r)
      out.row(r) = points.row(idx[r]);
    return out;
  }

  std::vector<Eigen::MatrixXd> split_by_class() const {
    std::vector<Eigen::MatrixXd> out;
    out.reserve(num_classes);
    for (int j = 1; j <= num_classes; ++j) out.push_back(class_matrix(j));
    return out;
  }
};

struct CsvSchema {
  std::string label_column = "label";
  char delimiter = ',';
};

struct IngestResult {
  LabeledDataset data;
  int rows_dropped = 0;  // rows rejected for missing/non-numeric cells
};

namespace detail {

inline std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, delim)) cells.push_back(cell);
  if (!line.empty() && line.back() == delim) cells.push_back("");
  return cells;
}

inline bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* begin = s.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  if (end == begin) return false;
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  return *end == '\0';
}

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  auto e = s.find_last_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Parses a labeled CSV with a header row. Class labels are mapped to 1..J in
/// first-appearance order; rows with missing or non-numeric feature cells are
/// dropped and counted.
inline IngestResult ingest_csv(const std::string& path, const CsvSchema& schema = {}) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open CSV file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw IngestError("empty CSV file: " + path);
  const auto header = detail::split_line(line, schema.delimiter);

  int label_col = -1;
  for (int c = 0; c < static_cast<int>(header.size()); ++c)
    if (detail::trim(header[c]) == schema.label_column) label_col = c;
  if (label_col < 0)
    throw IngestError("label column '" + schema.label_column + "' not found in " + path);

  const int d = static_cast<int>(header.size()) - 1;
  if (d < 1) throw IngestError("no feature columns in " + path);

  std::vector<std::vector<double>> rows;
  std::vector<int> row_labels;
  std::vector<std::string> class_names;
  int dropped = 0;
  int lineno = 1;

  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_line(line, schema.delimiter);
    if (static_cast<int>(cells.size()) != static_cast<int>(header.size())) {
      ++dropped;
      continue;
    }
    std::vector<double> feat(d);
    bool ok = true;
    int fc = 0;
    for (int c = 0; c < static_cast<int>(cells.size()); ++c) {
      if (c == label_col) continue;
      double v;
      if (!detail::parse_double(detail::trim(cells[c]), v)) {
        ok = false;
        break;
      }
      feat[fc++] = v;
    }
    if (!ok) {
      ++dropped;
      continue;
    }
    const std::string name = detail::trim(cells[label_col]);
    if (name.empty()) {
      ++dropped;
      continue;
    }
    auto it = std::find(class_names.begin(), class_names.end(), name);
    int lab;
    if (it == class_names.end()) {
      class_names.push_back(name);
      lab = static_cast<int>(class_names.size());
    } else {
      lab = static_cast<int>(it - class_names.begin()) + 1;
    }
    rows.push_back(std::move(feat));
    row_labels.push_back(lab);
  }

  if (static_cast<int>(class_names.size()) < 2)
    throw InvalidDataError("CSV has fewer than 2 classes: " + path);

  LabeledDataset ds;
  ds.points.resize(static_cast<int>(rows.size()), d);
  ds.labels.resize(static_cast<int>(rows.size()));
  for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
    for (int c = 0; c < d; ++c) ds.points(i, c) = rows[i][c];
    ds.labels[i] = row_labels[i];
  }
  ds.num_classes = static_cast<int>(class_names.size());
  ds.class_names = std::move(class_names);
  return {std::move(ds), dropped};
}

/// Writes `x1,...,xd,label` with full-precision floats so a round-trip
/// reproduces the dataset bitwise.
inline void dump_csv(const LabeledDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IngestError("cannot open output file: " + path);
  for (int c = 0; c < ds.dim(); ++c) out << "x" << (c + 1) << ",";
  out << "label\n";
  char buf[40];
  for (int i = 0; i < ds.n(); ++i) {
    for (int c = 0; c < ds.dim(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", ds.points(i, c));
      out << buf << ",";
    }
    const int lab = ds.labels[i];
    if (!ds.class_names.empty())
      out << ds.class_names[lab - 1] << "\n";
    else
      out << lab << "\n";
  }
}

}  // namespace lspd
