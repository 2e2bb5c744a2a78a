#ifndef RFFSVM_REPORT_HPP
#define RFFSVM_REPORT_HPP

// Text tables (classes or M values as rows, kernels as columns) and the
// structured JSON form of evaluation reports.

#include "rffsvm/model_io.hpp"
#include "rffsvm/pipeline.hpp"

#include <json.hpp>

#include <cstdio>
#include <string>
#include <vector>

namespace rffsvm {

inline std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f %%", 100.0 * fraction);
  return buf;
}

/// Left-aligned first column, right-aligned remaining columns.
class TextTable {
 public:
  explicit TextTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> row) { rows_.push_back(std::move(row)); }
  void add_rule() { rules_.push_back(rows_.size()); }

  std::string str() const {
    std::vector<std::size_t> width(header_.size(), 0);
    auto grow = [&](const std::vector<std::string>& r) {
      for (std::size_t k = 0; k < r.size() && k < width.size(); ++k) width[k] = std::max(width[k], r[k].size());
    };
    grow(header_);
    for (const auto& r : rows_) grow(r);
    std::size_t total = 0;
    for (auto w : width) total += w + 3;
    const std::string rule(total > 3 ? total - 3 : 0, '-');

    auto line = [&](const std::vector<std::string>& r) {
      std::string out;
      for (std::size_t k = 0; k < width.size(); ++k) {
        const std::string cell = k < r.size() ? r[k] : "";
        const std::string pad(width[k] - cell.size(), ' ');
        if (k) out += " | ";
        out += k == 0 ? cell + pad : pad + cell;
      }
      return out + "\n";
    };
    std::string out = line(header_) + rule + "\n";
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (std::find(rules_.begin(), rules_.end(), i) != rules_.end()) out += rule + "\n";
      out += line(rows_[i]);
    }
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::size_t> rules_;
};

struct NamedReport {
  std::string name;
  const EvalReport* report;
};

/// Class-wise accuracy: one row per class, one column per report.
inline std::string format_class_table(std::span<const NamedReport> columns) {
  if (columns.empty()) throw Error("no reports to tabulate");
  std::vector<std::string> header{"Class"};
  for (const auto& c : columns) header.push_back(c.name);
  TextTable t(header);
  const auto& classes = columns.front().report->class_labels;
  for (std::size_t k = 0; k < classes.size(); ++k) {
    std::vector<std::string> row{classes[k]};
    for (const auto& c : columns) {
      const auto& labels = c.report->class_labels;
      const auto it = std::find(labels.begin(), labels.end(), classes[k]);
      row.push_back(it == labels.end() ? "-" : percent(c.report->per_class_accuracy[static_cast<std::size_t>(it - labels.begin())]));
    }
    t.add_row(row);
  }
  t.add_rule();
  std::vector<std::string> overall{"Overall"};
  for (const auto& c : columns) overall.push_back(percent(c.report->overall_accuracy));
  t.add_row(overall);
  return t.str();
}

struct SweepColumn {
  std::string name;
  /// Overall accuracy per M, aligned with the M list.
  std::vector<double> accuracy;
};

/// Accuracy by M: one row per M, one column per kernel, plus the N/M ratio.
inline std::string format_sweep_table(std::span<const std::size_t> m_values, std::span<const SweepColumn> columns,
                                      std::size_t input_dim) {
  std::vector<std::string> header{"M"};
  for (const auto& c : columns) header.push_back(c.name);
  header.push_back("N/M");
  TextTable t(header);
  for (std::size_t r = 0; r < m_values.size(); ++r) {
    std::vector<std::string> row{std::to_string(m_values[r])};
    for (const auto& c : columns) row.push_back(percent(c.accuracy.at(r)));
    char ratio[32];
    std::snprintf(ratio, sizeof(ratio), "%.2fx", storage_report(input_dim, m_values[r], 1).ratio);
    row.push_back(ratio);
    t.add_row(row);
  }
  return t.str();
}

inline std::string format_grid_table(const GridResult& g) {
  std::vector<double> gammas, cs;
  for (const auto& cell : g.table) {
    if (std::find(gammas.begin(), gammas.end(), cell.gamma) == gammas.end()) gammas.push_back(cell.gamma);
    if (std::find(cs.begin(), cs.end(), cell.c) == cs.end()) cs.push_back(cell.c);
  }
  std::vector<std::string> header{"gamma \\ C"};
  for (double c : cs) header.push_back(format_double(c));
  TextTable t(header);
  for (double gm : gammas) {
    std::vector<std::string> row{format_double(gm)};
    for (double c : cs) {
      std::string cell = "-";
      for (const auto& x : g.table)
        if (x.gamma == gm && x.c == c) cell = percent(x.accuracy) + (gm == g.best_gamma && c == g.best_c ? " *" : "  ");
      row.push_back(cell);
    }
    t.add_row(row);
  }
  return t.str();
}

inline nlohmann::json config_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["kernel"] = detail::kernel_json(cfg.kernel);
  j["mode"] = mode_name(cfg.mode);
  if (cfg.mode == ExperimentMode::random_features) {
    j["M"] = cfg.target_dim;
    j["map_seed"] = cfg.map_seed;
    j["reseed_per_fold"] = cfg.reseed_per_fold;
  }
  j["svm"] = {{"regularization_c", cfg.svm.regularization_c},
              {"tolerance", cfg.svm.tolerance},
              {"max_iterations", cfg.svm.max_iterations},
              {"shuffle", cfg.svm.shuffle},
              {"shuffle_seed", cfg.svm.shuffle_seed},
              {"shrinking", cfg.svm.shrinking}};
  return j;
}

inline nlohmann::json report_json(const EvalReport& r, bool timing) {
  using nlohmann::json;
  json j;
  j["overall_accuracy"] = r.overall_accuracy;
  j["correct"] = r.correct();
  j["total"] = r.total();
  j["classes"] = r.class_labels;
  json per_class = json::object();
  for (std::size_t k = 0; k < r.class_labels.size(); ++k) per_class[r.class_labels[k]] = r.per_class_accuracy[k];
  j["per_class_accuracy"] = per_class;
  j["confusion"] = r.confusion;
  json folds = json::array();
  for (const auto& f : r.per_fold) {
    json jf{{"fold", f.fold},
            {"train_count", f.train_count},
            {"test_count", f.test_count},
            {"correct", f.correct},
            {"accuracy", f.accuracy},
            {"unconverged_problems", f.unconverged}};
    if (timing) jf["timing"] = {{"train_seconds", f.train_seconds}, {"test_seconds", f.test_seconds}};
    folds.push_back(jf);
  }
  j["per_fold"] = folds;
  j["dims"] = {{"input_dim", r.input_dim}, {"effective_dim", r.effective_dim}};
  if (timing) j["timing"] = {{"train_seconds", r.train_seconds}, {"test_seconds", r.test_seconds}};
  if (r.storage)
    j["storage"] = {{"input_bytes", r.storage->input_bytes},
                    {"rff_bytes", r.storage->rff_bytes},
                    {"ratio", r.storage->ratio}};
  return j;
}

}  // namespace rffsvm

#endif  // RFFSVM_REPORT_HPP
