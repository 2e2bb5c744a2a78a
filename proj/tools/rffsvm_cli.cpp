// rffsvm command-line front end.

#include "rffsvm/rffsvm.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace rffsvm;
using nlohmann::json;

namespace {

/// A real number, or a power of two written as 2^k.
double parse_real(const std::string& text, const std::string& flag) {
  if (text.rfind("2^", 0) == 0) {
    if (const auto k = parse_double(std::string_view(text).substr(2))) return std::exp2(*k);
  } else if (const auto v = parse_double(text)) {
    return *v;
  }
  throw Error(flag + ": expected a number or 2^k, got '" + text + "'");
}

std::vector<double> parse_reals(const std::vector<std::string>& items, const std::string& flag) {
  std::vector<double> out;
  for (const auto& s : items) out.push_back(parse_real(s, flag));
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") std::cout << text;
  else write_file_atomic(path, text);
}

// ---------------------------------------------------------------------------
// Shared experiment flags

struct ExperimentFlags {
  std::vector<std::string> kernels{"linear"};
  std::string gamma;
  std::map<std::string, std::string> gamma_for;
  double c = 100.0;
  std::string mode;
  std::size_t m = 0;
  std::uint64_t seed = 1;
  bool reseed_per_fold = false;
  double tol = 1e-4;
  int max_iter = 1000;
  bool shuffle = false;
  bool shrinking = false;
  unsigned threads = 1;

  void add_kernel(CLI::App* cmd, bool allow_all) {
    cmd->add_option("--kernel", kernels,
                    allow_all ? "linear|gaussian|laplacian|cauchy, a comma list, or all"
                              : "linear|gaussian|laplacian|cauchy")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--gamma", gamma, "Kernel bandwidth (number or 2^k)");
    if (allow_all)
      for (const char* f : {"gaussian", "laplacian", "cauchy"})
        cmd->add_option(std::string("--gamma-") + f, gamma_for[f], std::string("Bandwidth for ") + f + " only");
  }

  void add_solver(CLI::App* cmd, bool with_rff) {
    cmd->add_option("--c", c, "SVM regularization C")->capture_default_str();
    if (with_rff) {
      cmd->add_option("--mode", mode, "exact_kernel|random_features (default: random_features iff --m is set)");
      cmd->add_option("--m", m, "Random-feature dimension M");
    }
    cmd->add_option("--seed", seed, "Seed for the feature map and coordinate shuffling")->capture_default_str();
    cmd->add_option("--tol", tol, "Solver stopping tolerance")->capture_default_str();
    cmd->add_option("--max-iter", max_iter, "Solver epoch limit")->capture_default_str();
    cmd->add_flag("--shuffle", shuffle, "Seeded random coordinate order (much faster on class-sorted rows)");
    cmd->add_flag("--shrinking", shrinking, "Skip bound-pinned coordinates in the linear solver");
    cmd->add_option("--threads", threads, "Worker threads; results do not depend on it")->capture_default_str();
  }

  std::vector<KernelFamily> families(bool random_features) const {
    std::vector<KernelFamily> out;
    for (const auto& k : kernels) {
      if (k == "all") {
        if (!random_features) out.push_back(KernelFamily::linear);
        for (auto f : {KernelFamily::gaussian, KernelFamily::laplacian, KernelFamily::cauchy}) out.push_back(f);
      } else {
        out.push_back(parse_family(k));
      }
    }
    if (out.empty()) throw Error("--kernel: no kernel given");
    return out;
  }

  double gamma_of(KernelFamily f) const {
    const auto it = gamma_for.find(std::string(family_name(f)));
    if (it != gamma_for.end() && !it->second.empty()) return parse_real(it->second, "--gamma-" + it->first);
    if (gamma.empty()) throw Error("--gamma is required for the " + std::string(family_name(f)) + " kernel");
    return parse_real(gamma, "--gamma");
  }

  ExperimentMode experiment_mode() const {
    if (mode.empty()) return m > 0 ? ExperimentMode::random_features : ExperimentMode::exact_kernel;
    if (mode == "exact") return ExperimentMode::exact_kernel;
    if (mode == "rff") return ExperimentMode::random_features;
    return parse_mode(mode);
  }

  ExperimentConfig config(KernelFamily f) const {
    ExperimentConfig cfg;
    cfg.kernel = f == KernelFamily::linear ? KernelSpec::linear() : KernelSpec(f, gamma_of(f));
    cfg.mode = experiment_mode();
    cfg.target_dim = cfg.mode == ExperimentMode::random_features ? m : 0;
    cfg.map_seed = seed;
    cfg.reseed_per_fold = reseed_per_fold;
    cfg.threads = threads;
    cfg.svm.regularization_c = c;
    cfg.svm.tolerance = tol;
    cfg.svm.max_iterations = max_iter;
    cfg.svm.shuffle = shuffle;
    cfg.svm.shuffle_seed = seed;
    cfg.svm.shrinking = shrinking;
    cfg.svm.threads = threads;
    cfg.validate();
    return cfg;
  }
};

struct DataFlags {
  std::string features;
  std::string folds;
  int k_folds = 0;

  void add(CLI::App* cmd) {
    cmd->add_option("--features", features, "Feature CSV: segment_id,label,f1..fN")->required();
    cmd->add_option("--folds", folds, "Fold manifest CSV: segment_id,fold");
    cmd->add_option("--k-folds", k_folds, "Round-robin folds when no manifest is given");
  }

  Dataset load() const {
    Dataset ds = load_features(features);
    if (!folds.empty()) ds.fold_assignment = load_fold_manifest(folds, ds);
    else if (k_folds > 0) ds.fold_assignment = round_robin_folds(ds.size(), k_folds);
    else throw Error("need --folds <manifest> or --k-folds <k>");
    return ds;
  }
};

void warn(const ExperimentConfig& cfg, const Dataset& ds) {
  for (const auto& w : cfg.warnings(ds.dim())) std::cerr << "warning: " << w << "\n";
}

void warn_unconverged(const std::string& what, const EvalReport& r, int max_iter) {
  std::size_t n = 0;
  for (const auto& f : r.per_fold) n += f.unconverged;
  if (n)
    std::cerr << "warning: " << what << ": " << n << " binary problems stopped at --max-iter " << max_iter
              << " before reaching --tol\n";
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Subcommands

struct ProbeFlags {
  std::string kernel = "gaussian";
  std::string gamma = "0.1";
  std::size_t dim = 20;
  std::size_t pairs = 200;
  std::vector<std::size_t> m_values{32, 64, 128, 256, 512, 1024, 2048, 4096};
  std::uint64_t seed = 1;
  double spread = 5.0;
  double min_offset = 0.1;
  double max_offset = 30.0;
  unsigned threads = 1;
};

void run_probe(const ProbeFlags& f) {
  const auto family = parse_family(f.kernel);
  if (!is_shift_invariant(family)) throw Error("linear kernel needs no random features");
  const KernelSpec spec(family, parse_real(f.gamma, "--gamma"));
  const auto [X, Y] = random_pairs(f.dim, f.pairs, f.seed, f.spread, f.min_offset, f.max_offset);
  const auto rows = probe_approximation(spec, X, Y, f.m_values, f.seed, f.threads);

  TextTable t({"M", "mean |err|", "max |err|", "sqrt(M)*mean"});
  for (const auto& r : rows)
    t.add_row({std::to_string(r.target_dim), fixed(r.mean_abs_error, 6), fixed(r.max_abs_error, 6),
               fixed(r.scaled_error, 4)});
  // Shift each pair by the next pair's anchor; the exact kernel must not move.
  double drift = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const auto [a, b] = shift_invariance_check(spec, row_span(X, i), row_span(Y, i), row_span(X, (i + 1) % X.rows()));
    drift = std::max(drift, std::abs(a - b));
  }
  std::cout << family_name(family) << " gamma=" << format_double(spec.gamma()) << " N=" << f.dim
            << " pairs=" << f.pairs << " seed=" << f.seed << "\n"
            << t.str() << "shift invariance: max |K(x,y) - K(x+z,y+z)| = " << sci(drift) << "\n";
}

struct TrainFlags {
  std::string features;
  std::string model_out;
  std::string export_dense_path;
};

void run_train(const TrainFlags& t, const ExperimentFlags& e) {
  const auto families = e.families(e.experiment_mode() == ExperimentMode::random_features);
  if (families.size() != 1) throw Error("train takes exactly one --kernel");
  const auto cfg = e.config(families.front());
  const Dataset ds = load_features(t.features);
  warn(cfg, ds);
  const auto p = train_predictor(ds.features, ds.labels, cfg);
  const auto text = serialize_model(p);
  if (!t.export_dense_path.empty()) {
    if (!p.map) throw Error("--export-dense needs random_features mode");
    export_dense(*p.map, t.export_dense_path);
  }
  write_file_atomic(t.model_out, text);

  std::size_t unconverged = 0;
  for (const auto& m : p.svm.linear) unconverged += !m.diagnostics.converged;
  for (const auto& m : p.svm.kernel) unconverged += !m.diagnostics.converged;
  if (unconverged)
    std::cerr << "warning: " << unconverged << " binary problems stopped at --max-iter " << cfg.svm.max_iterations
              << " before reaching --tol\n";
  std::cout << "trained " << family_name(cfg.kernel.family()) << " " << mode_name(cfg.mode) << " on " << ds.size()
            << " rows, " << p.classes().size() << " classes, N=" << ds.dim();
  if (p.map) std::cout << ", M=" << p.map->target_dim();
  else if (p.svm.mode == SvmMode::kernel_precomputed) std::cout << ", " << p.support_vectors.rows() << " support vectors";
  std::cout << "\nmodel: " << t.model_out << " (" << text.size() << " bytes)\n";
  if (p.map) {
    const auto s = storage_report(ds.dim(), p.map->target_dim(), ds.size());
    std::cout << "storage: " << s.input_bytes << " input bytes vs " << s.rff_bytes << " feature bytes, ratio "
              << fixed(s.ratio, 2) << "x\n";
  }
}

struct PredictFlags {
  std::string model;
  std::string features;
  std::string out;
  bool scores = false;
  unsigned threads = 1;
};

void run_predict(const PredictFlags& f) {
  const auto p = load_model(f.model);
  const Dataset ds = load_features(f.features);
  const auto preds = p.predict(ds.features, f.threads);
  std::string text = "segment_id,predicted_label";
  if (f.scores)
    for (const auto& c : p.classes()) text += ",score_" + c;
  text += "\n";
  for (std::size_t i = 0; i < preds.size(); ++i) {
    text += ds.segment_ids[i] + "," + preds[i].label;
    if (f.scores)
      for (double s : preds[i].scores) text += "," + format_double(s);
    text += "\n";
  }
  emit(f.out, text);
}

struct ReportFlags {
  std::string report_out;
  bool no_timing = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--report-out", report_out, "Write the full report as JSON");
    cmd->add_flag("--no-timing", no_timing, "Leave timing out of all output");
  }
};

void run_cv(const DataFlags& d, const ExperimentFlags& e, const ReportFlags& r) {
  const auto families = e.families(e.experiment_mode() == ExperimentMode::random_features);
  std::vector<ExperimentConfig> configs;
  for (auto f : families) configs.push_back(e.config(f));
  const Dataset ds = d.load();
  warn(configs.front(), ds);

  std::vector<EvalReport> reports;
  for (const auto& cfg : configs) {
    reports.push_back(run_experiment(ds, cfg));
    warn_unconverged(std::string(family_name(cfg.kernel.family())), reports.back(), cfg.svm.max_iterations);
  }
  std::vector<NamedReport> columns;
  json out = {{"rows", ds.size()}, {"input_dim", ds.dim()}, {"runs", json::array()}};
  for (std::size_t k = 0; k < configs.size(); ++k) {
    columns.push_back({std::string(family_name(configs[k].kernel.family())), &reports[k]});
    out["runs"].push_back({{"config", config_json(configs[k])}, {"report", report_json(reports[k], !r.no_timing)}});
  }
  std::cout << mode_name(configs.front().mode);
  if (configs.front().mode == ExperimentMode::random_features) std::cout << " M=" << configs.front().target_dim;
  std::cout << ", " << ds.size() << " rows, N=" << ds.dim() << ", " << reports.front().per_fold.size()
            << " folds\n"
            << format_class_table(columns);
  if (!r.no_timing)
    for (std::size_t k = 0; k < reports.size(); ++k)
      std::cout << "time " << columns[k].name << ": train " << fixed(reports[k].train_seconds, 3) << " s, test "
                << fixed(reports[k].test_seconds, 3) << " s\n";
  if (!r.report_out.empty()) write_file_atomic(r.report_out, dump(out));
}

void run_sweep(const DataFlags& d, ExperimentFlags e, const std::vector<std::size_t>& m_values,
               const ReportFlags& r) {
  if (!e.mode.empty() && e.experiment_mode() != ExperimentMode::random_features)
    throw Error("sweep requires random_features mode");
  if (m_values.empty()) throw Error("--m-values: need at least one M");
  e.mode = "random_features";
  e.m = m_values.front();
  const auto families = e.families(true);
  std::vector<ExperimentConfig> configs;
  for (auto f : families) configs.push_back(e.config(f));
  const Dataset ds = d.load();

  std::vector<SweepColumn> columns;
  json out = {{"rows", ds.size()}, {"input_dim", ds.dim()}, {"m_values", m_values}, {"kernels", json::array()}};
  double train_seconds = 0.0;
  for (const auto& cfg : configs) {
    const auto name = std::string(family_name(cfg.kernel.family()));
    SweepColumn col{name, {}};
    json runs = json::array();
    for (const auto& [M, rep] : sweep_M(ds, cfg, m_values)) {
      col.accuracy.push_back(rep.overall_accuracy);
      train_seconds += rep.train_seconds;
      warn_unconverged(name + " M=" + std::to_string(M), rep, cfg.svm.max_iterations);
      runs.push_back({{"M", M}, {"report", report_json(rep, !r.no_timing)}});
    }
    columns.push_back(std::move(col));
    out["kernels"].push_back({{"config", config_json(cfg)}, {"sweep", runs}});
  }
  std::cout << "random_features sweep, " << ds.size() << " rows, N=" << ds.dim() << "\n"
            << format_sweep_table(m_values, columns, ds.dim());
  if (!r.no_timing) std::cout << "time: train " << fixed(train_seconds, 3) << " s\n";
  if (!r.report_out.empty()) write_file_atomic(r.report_out, dump(out));
}

void run_grid(const DataFlags& d, const ExperimentFlags& e, const std::vector<std::string>& gammas,
              const std::vector<std::string>& cs, const ReportFlags& r) {
  const auto families = e.families(e.experiment_mode() == ExperimentMode::random_features);
  if (families.size() != 1) throw Error("grid takes exactly one --kernel");
  const auto family = families.front();
  const auto gamma_grid = parse_reals(gammas, "--gammas");
  const auto c_grid = parse_reals(cs, "--cs");
  // Validate everything but gamma up front with a placeholder bandwidth.
  ExperimentFlags probe = e;
  probe.gamma = "1";
  probe.gamma_for.clear();
  const auto base = probe.config(family);
  for (double g : gamma_grid)
    if (family != KernelFamily::linear) (void)KernelSpec(family, g);
  const Dataset ds = d.load();
  warn(base, ds);
  const auto res = grid_search(ds, base, family, gamma_grid, c_grid);
  std::cout << family_name(family) << " " << mode_name(base.mode) << " grid, " << ds.size() << " rows, N=" << ds.dim()
            << "\n"
            << format_grid_table(res) << "best: gamma=" << format_double(res.best_gamma)
            << " C=" << format_double(res.best_c) << " accuracy=" << percent(res.best_accuracy) << "\n";
  if (!r.report_out.empty()) {
    json cells = json::array();
    for (const auto& c : res.table) cells.push_back({{"gamma", c.gamma}, {"c", c.c}, {"accuracy", c.accuracy}});
    write_file_atomic(r.report_out, dump({{"kernel", family_name(family)},
                                          {"mode", mode_name(base.mode)},
                                          {"best", {{"gamma", res.best_gamma}, {"c", res.best_c}, {"accuracy", res.best_accuracy}}},
                                          {"cells", cells}}));
  }
}

struct SynthFlags {
  std::size_t classes = 15;
  std::size_t per_class = 100;
  std::size_t dim = 64;
  double separation = 5.0;
  std::uint64_t seed = 1;
  int k_folds = 4;
  std::string out;
  std::string folds_out;
};

void run_synth(const SynthFlags& f) {
  const auto ds = make_synthetic(f.classes, f.per_class, f.dim, f.separation, f.seed, f.k_folds);
  const auto features = format_features(ds);
  const auto manifest = format_fold_manifest(ds);
  write_file_atomic(f.out, features);
  if (!f.folds_out.empty()) write_file_atomic(f.folds_out, manifest);
  std::cout << "wrote " << ds.size() << " rows, " << f.classes << " classes, N=" << ds.dim() << " to " << f.out << "\n";
}

void run_convert_meta(const std::vector<std::string>& metas, std::vector<int> folds, const std::string& out) {
  if (metas.empty()) throw Error("need at least one --meta file");
  if (folds.empty())
    for (std::size_t k = 0; k < metas.size(); ++k) folds.push_back(static_cast<int>(k) + 1);
  if (folds.size() != metas.size()) throw Error("give one --fold per --meta file");
  std::vector<MetaEntry> entries;
  for (std::size_t k = 0; k < metas.size(); ++k) {
    if (folds[k] < 1) throw Error("--fold must be >= 1");
    std::ifstream in(metas[k]);
    if (!in) throw Error("cannot open " + metas[k]);
    const auto part = read_meta(in, folds[k], metas[k]);
    entries.insert(entries.end(), part.begin(), part.end());
  }
  emit(out, format_meta(entries));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random Fourier feature SVMs: probe kernels, train, predict, cross-validate, sweep M"};
  app.set_version_flag("--version", std::to_string(kModelFormatVersion), "Print the model file format version");
  app.set_config("--config", "", "Read flags from a key = value file ([subcommand] sections); flags override it");
  app.require_subcommand(1);

  ProbeFlags probe;
  auto* cmd_probe = app.add_subcommand("kernel-probe", "Approximation error of random features against the exact kernel");
  cmd_probe->add_option("--kernel", probe.kernel, "gaussian|laplacian|cauchy")->capture_default_str();
  cmd_probe->add_option("--gamma", probe.gamma, "Kernel bandwidth (number or 2^k)")->capture_default_str();
  cmd_probe->add_option("--dim", probe.dim, "Input dimension N")->capture_default_str();
  cmd_probe->add_option("--pairs", probe.pairs, "Number of random pairs")->capture_default_str();
  cmd_probe->add_option("--m-values", probe.m_values, "Comma list of M")->delimiter(',')->capture_default_str();
  cmd_probe->add_option("--seed", probe.seed, "Seed for pairs and maps")->capture_default_str();
  cmd_probe->add_option("--spread", probe.spread, "Std of pair anchors")->capture_default_str();
  cmd_probe->add_option("--min-offset", probe.min_offset, "Smallest pair distance")->capture_default_str();
  cmd_probe->add_option("--max-offset", probe.max_offset, "Largest pair distance")->capture_default_str();
  cmd_probe->add_option("--threads", probe.threads, "Worker threads")->capture_default_str();

  TrainFlags train;
  ExperimentFlags train_e;
  auto* cmd_train = app.add_subcommand("train", "Fit a model on a feature CSV and save it");
  cmd_train->add_option("--features", train.features, "Feature CSV")->required();
  cmd_train->add_option("--model-out", train.model_out, "Model file to write")->required();
  cmd_train->add_option("--export-dense", train.export_dense_path, "Also write W and b as raw little-endian doubles");
  train_e.add_kernel(cmd_train, false);
  train_e.add_solver(cmd_train, true);

  PredictFlags predict;
  auto* cmd_predict = app.add_subcommand("predict", "Classify a feature CSV with a saved model");
  cmd_predict->add_option("--model", predict.model, "Model file")->required();
  cmd_predict->add_option("--features", predict.features, "Feature CSV")->required();
  cmd_predict->add_option("--out", predict.out, "Output CSV (default stdout)");
  cmd_predict->add_flag("--scores", predict.scores, "Add one decision-value column per class");
  cmd_predict->add_option("--threads", predict.threads, "Worker threads")->capture_default_str();

  DataFlags cv_d;
  ExperimentFlags cv_e;
  ReportFlags cv_r;
  auto* cmd_cv = app.add_subcommand("cv", "Cross-validated class-wise accuracy, one column per kernel");
  cv_d.add(cmd_cv);
  cv_e.add_kernel(cmd_cv, true);
  cv_e.add_solver(cmd_cv, true);
  cmd_cv->add_flag("--reseed-per-fold", cv_e.reseed_per_fold, "Build a fresh map per fold from seed + fold");
  cv_r.add(cmd_cv);

  DataFlags sw_d;
  ExperimentFlags sw_e;
  ReportFlags sw_r;
  std::vector<std::size_t> sw_m{32, 64, 128, 256, 512, 1024, 2048, 4096};
  sw_e.kernels = {"all"};
  auto* cmd_sweep = app.add_subcommand("sweep", "Accuracy of random features by M, one column per kernel");
  sw_d.add(cmd_sweep);
  sw_e.add_kernel(cmd_sweep, true);
  sw_e.add_solver(cmd_sweep, true);
  cmd_sweep->add_option("--m-values", sw_m, "Comma list of M")->delimiter(',')->capture_default_str();
  cmd_sweep->add_flag("--reseed-per-fold", sw_e.reseed_per_fold, "Build a fresh map per fold from seed + fold");
  sw_r.add(cmd_sweep);

  DataFlags gr_d;
  ExperimentFlags gr_e;
  ReportFlags gr_r;
  std::vector<std::string> gr_gammas, gr_cs{"100"};
  auto* cmd_grid = app.add_subcommand("grid", "Cross-validated (gamma, C) grid search for one kernel");
  gr_d.add(cmd_grid);
  gr_e.add_kernel(cmd_grid, false);
  gr_e.add_solver(cmd_grid, true);
  cmd_grid->add_option("--gammas", gr_gammas, "Comma list of gamma values (numbers or 2^k)")->delimiter(',');
  cmd_grid->add_option("--cs", gr_cs, "Comma list of C values")->delimiter(',')->capture_default_str();
  gr_r.add(cmd_grid);

  SynthFlags synth;
  auto* cmd_synth = app.add_subcommand("synth", "Write a synthetic Gaussian-blob dataset");
  cmd_synth->add_option("--classes", synth.classes, "Number of classes")->capture_default_str();
  cmd_synth->add_option("--per-class", synth.per_class, "Rows per class")->capture_default_str();
  cmd_synth->add_option("--dim", synth.dim, "Feature dimension")->capture_default_str();
  cmd_synth->add_option("--separation", synth.separation, "Distance between nearest class centres")->capture_default_str();
  cmd_synth->add_option("--seed", synth.seed, "Seed")->capture_default_str();
  cmd_synth->add_option("--k-folds", synth.k_folds, "Folds in the manifest")->capture_default_str();
  cmd_synth->add_option("--out", synth.out, "Feature CSV to write")->required();
  cmd_synth->add_option("--folds-out", synth.folds_out, "Fold manifest to write");

  std::vector<std::string> metas;
  std::vector<int> meta_folds;
  std::string meta_out;
  auto* cmd_meta = app.add_subcommand("convert-meta", "Turn path<TAB>label meta files into a fold manifest");
  cmd_meta->add_option("--meta", metas, "Meta file; repeat once per fold")->required();
  cmd_meta->add_option("--fold", meta_folds, "Fold index for each --meta, in order (default 1, 2, ...)");
  cmd_meta->add_option("--out", meta_out, "Manifest CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    for (auto& ch : msg)
      if (ch == '\n') ch = ' ';
    std::cerr << "error: " << msg << "\n";
    return 2;
  }

  try {
    if (*cmd_probe) run_probe(probe);
    else if (*cmd_train) run_train(train, train_e);
    else if (*cmd_predict) run_predict(predict);
    else if (*cmd_cv) run_cv(cv_d, cv_e, cv_r);
    else if (*cmd_sweep) run_sweep(sw_d, sw_e, sw_m, sw_r);
    else if (*cmd_grid) run_grid(gr_d, gr_e, gr_gammas, gr_cs, gr_r);
    else if (*cmd_synth) run_synth(synth);
    else if (*cmd_meta) run_convert_meta(metas, meta_folds, meta_out);
  } catch (const std::exception& e) {
    std::cout.flush();
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
