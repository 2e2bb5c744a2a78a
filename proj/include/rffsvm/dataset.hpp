#ifndef RFFSVM_DATASET_HPP
#define RFFSVM_DATASET_HPP

#include "rffsvm/core.hpp"
#include "rffsvm/random_features.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <vector>

namespace rffsvm {

/// One row per segment.
struct Dataset {
  Matrix features;
  std::vector<std::string> labels;
  std::vector<std::string> segment_ids;
  /// Fold index per row, 1-based, when known.
  std::optional<std::vector<int>> fold_assignment;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }

  bool operator==(const Dataset& o) const {
    return features.rows() == o.features.rows() && features.cols() == o.features.cols() &&
           features == o.features && labels == o.labels && segment_ids == o.segment_ids &&
           fold_assignment == o.fold_assignment;
  }

  Dataset subset(std::span<const std::size_t> rows) const {
    Dataset out;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      out.features.row(static_cast<Eigen::Index>(k)) = features.row(static_cast<Eigen::Index>(rows[k]));
      out.labels.push_back(labels[rows[k]]);
      out.segment_ids.push_back(segment_ids[rows[k]]);
    }
    if (fold_assignment) {
      out.fold_assignment.emplace();
      for (auto r : rows) out.fold_assignment->push_back((*fold_assignment)[r]);
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// Text helpers

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<long long> parse_integer(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::vector<std::string_view> split_fields(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

namespace detail {

inline bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

inline bool blank(std::string_view s) { return s.find_first_not_of(" \t") == std::string_view::npos; }

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return in;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Feature CSV: segment_id,label,f1,...,fN

/// Parses a feature CSV. `source` is used in error messages.
inline Dataset read_features(std::istream& in, const std::string& source = "<stream>") {
  Dataset ds;
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  bool first = true;
  while (detail::next_line(in, line)) {
    ++line_no;
    if (detail::blank(line)) continue;
    const auto fields = split_fields(line);
    const auto where = source + ":" + std::to_string(line_no) + ": ";
    if (fields.size() < 3)
      throw Error(where + "expected segment_id,label and at least one feature");
    if (first) {
      first = false;
      bool numeric = true;
      for (std::size_t k = 2; k < fields.size() && numeric; ++k) numeric = parse_double(fields[k]).has_value();
      dim = fields.size() - 2;
      if (!numeric) continue;  // header row
    }
    if (fields.size() - 2 != dim)
      throw Error(where + "row has " + std::to_string(fields.size() - 2) + " features, expected " +
                  std::to_string(dim));
    for (std::size_t k = 2; k < fields.size(); ++k) {
      const auto v = parse_double(fields[k]);
      if (!v) throw Error(where + "non-numeric feature value '" + std::string(fields[k]) + "' in column " +
                          std::to_string(k + 1));
      values.push_back(*v);
    }
    ds.segment_ids.emplace_back(fields[0]);
    ds.labels.emplace_back(fields[1]);
  }
  if (ds.labels.empty()) throw Error(source + ": no data rows");
  ds.features = Eigen::Map<const Matrix>(values.data(), static_cast<Eigen::Index>(ds.labels.size()),
                                         static_cast<Eigen::Index>(dim));
  return ds;
}

inline Dataset load_features(const std::string& path) {
  auto in = detail::open_input(path);
  return read_features(in, path);
}

inline std::string format_features(const Dataset& ds, bool header = true) {
  std::string out;
  if (header) {
    out += "segment_id,label";
    for (std::size_t j = 1; j <= ds.dim(); ++j) out += ",f" + std::to_string(j);
    out += '\n';
  }
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out += ds.segment_ids[i];
    out += ',';
    out += ds.labels[i];
    for (Eigen::Index j = 0; j < ds.features.cols(); ++j) {
      out += ',';
      out += format_double(ds.features(static_cast<Eigen::Index>(i), j));
    }
    out += '\n';
  }
  return out;
}

inline void save_features(const Dataset& ds, const std::string& path) {
  write_file_atomic(path, format_features(ds));
}

// ---------------------------------------------------------------------------
// Fold manifest: segment_id,fold_index[,...]

/// Reads a manifest and returns the fold of every dataset row. Trailing
/// columns (e.g. the label written by convert_meta) are ignored.
inline std::vector<int> read_fold_manifest(std::istream& in, const Dataset& ds,
                                           const std::string& source = "<stream>") {
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (!row_of.emplace(ds.segment_ids[i], i).second)
      throw Error("dataset has duplicate segment_id '" + ds.segment_ids[i] + "'");

  std::vector<int> folds(ds.size(), 0);
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (detail::next_line(in, line)) {
    ++line_no;
    if (detail::blank(line)) continue;
    const auto fields = split_fields(line);
    const auto where = source + ":" + std::to_string(line_no) + ": ";
    if (fields.size() < 2) throw Error(where + "expected segment_id,fold_index");
    const auto fold = parse_integer(fields[1]);
    if (first) {
      first = false;
      if (!fold) continue;  // header row
    }
    if (!fold || *fold < 1) throw Error(where + "fold index must be an integer >= 1");
    const std::string id(fields[0]);
    const auto it = row_of.find(id);
    if (it == row_of.end()) throw Error(where + "unknown segment_id '" + id + "'");
    if (folds[it->second] != 0) throw Error(where + "duplicate segment_id '" + id + "'");
    folds[it->second] = static_cast<int>(*fold);
  }
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (folds[i] == 0) throw Error(source + ": segment '" + ds.segment_ids[i] + "' has no fold");

  const std::set<int> distinct(folds.begin(), folds.end());
  const int k = static_cast<int>(distinct.size());
  if (*distinct.begin() != 1 || *distinct.rbegin() != k)
    throw Error(source + ": fold indices must be contiguous from 1");

  for (int f = 1; f <= k; ++f) {
    std::set<std::string> train_classes;
    for (std::size_t i = 0; i < ds.size() && train_classes.size() < 2; ++i)
      if (folds[i] != f) train_classes.insert(ds.labels[i]);
    if (train_classes.size() < 2)
      throw Error(source + ": training split for fold " + std::to_string(f) + " has fewer than 2 classes");
  }
  return folds;
}

inline std::vector<int> load_fold_manifest(const std::string& path, const Dataset& ds) {
  auto in = detail::open_input(path);
  return read_fold_manifest(in, ds, path);
}

inline std::string format_fold_manifest(const Dataset& ds) {
  if (!ds.fold_assignment) throw Error("dataset has no fold assignment");
  std::string out;
  for (std::size_t i = 0; i < ds.size(); ++i)
    out += ds.segment_ids[i] + "," + std::to_string((*ds.fold_assignment)[i]) + "\n";
  return out;
}

/// Round-robin fold assignment, 1-based.
inline std::vector<int> round_robin_folds(std::size_t n, int folds) {
  if (folds < 1) throw Error("fold count must be >= 1");
  std::vector<int> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<int>(i % static_cast<std::size_t>(folds)) + 1;
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic data

/**
 * Isotropic Gaussian blobs with unit within-class standard deviation.
 *
 * With dim >= class_count the centres sit on scaled coordinate axes, so every
 * pair is exactly `separation` apart. Otherwise random centres are rescaled
 * until the closest pair is `separation` apart. Rows are grouped by class and
 * folds are assigned round-robin.
 */
inline Dataset make_synthetic(std::size_t class_count, std::size_t per_class, std::size_t dim,
                              double separation, std::uint64_t seed, int folds = 4) {
  if (class_count < 1 || per_class < 1 || dim < 1) throw Error("make_synthetic: sizes must be positive");
  if (!(separation >= 0.0) || !std::isfinite(separation))
    throw Error("make_synthetic: separation must be >= 0");

  UniformStream rng(seed);
  const auto C = static_cast<Eigen::Index>(class_count);
  const auto N = static_cast<Eigen::Index>(dim);
  Matrix centres = Matrix::Zero(C, N);
  if (dim >= class_count) {
    for (Eigen::Index c = 0; c < C; ++c) centres(c, c) = separation / std::sqrt(2.0);
  } else if (class_count > 1 && separation > 0.0) {
    for (Eigen::Index i = 0; i < centres.size(); ++i) centres.data()[i] = rng.standard_normal();
    double closest = std::numeric_limits<double>::infinity();
    for (Eigen::Index a = 0; a < C; ++a)
      for (Eigen::Index b = a + 1; b < C; ++b)
        closest = std::min(closest, (centres.row(a) - centres.row(b)).norm());
    centres *= separation / closest;
  }

  Dataset ds;
  ds.features.resize(C * static_cast<Eigen::Index>(per_class), N);
  const int width = static_cast<int>(std::to_string(class_count).size());
  Eigen::Index row = 0;
  for (Eigen::Index c = 0; c < C; ++c) {
    std::ostringstream name;
    name << "class_" << std::setw(width) << std::setfill('0') << (c + 1);
    for (std::size_t k = 0; k < per_class; ++k, ++row) {
      for (Eigen::Index j = 0; j < N; ++j) ds.features(row, j) = centres(c, j) + rng.standard_normal();
      ds.labels.push_back(name.str());
      std::ostringstream id;
      id << "seg_" << std::setw(6) << std::setfill('0') << row;
      ds.segment_ids.push_back(id.str());
    }
  }
  ds.fold_assignment = round_robin_folds(ds.size(), folds);
  return ds;
}

// ---------------------------------------------------------------------------
// DCASE-style meta conversion

struct MetaEntry {
  std::string segment_id;
  int fold = 1;
  std::string label;
};

/// Reads `path<TAB>label` lines; the segment id is the file stem of the path.
inline std::vector<MetaEntry> read_meta(std::istream& in, int fold, const std::string& source = "<stream>") {
  std::vector<MetaEntry> out;
  std::string line;
  std::size_t line_no = 0;
  while (detail::next_line(in, line)) {
    ++line_no;
    if (detail::blank(line)) continue;
    const auto fields = split_fields(line, '\t');
    if (fields.size() < 2 || fields[0].empty() || fields[1].empty())
      throw Error(source + ":" + std::to_string(line_no) + ": expected path<TAB>label");
    out.push_back({std::filesystem::path(std::string(fields[0])).stem().string(), fold,
                   std::string(fields[1])});
  }
  return out;
}

/// segment_id,fold_index,label lines; readable as a fold manifest.
inline std::string format_meta(std::span<const MetaEntry> entries) {
  std::string out;
  for (const auto& e : entries) out += e.segment_id + "," + std::to_string(e.fold) + "," + e.label + "\n";
  return out;
}

}  // namespace rffsvm

#endif  // RFFSVM_DATASET_HPP
