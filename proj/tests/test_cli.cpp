#include "rffsvm/rffsvm.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

using namespace rffsvm;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  fs::path dir;

  void SetUp() override {
    dir = fs::temp_directory_path() / ("rffsvm_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string file(const std::string& name) const { return (dir / name).string(); }

  CliRun run(const std::string& args) const {
    const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
    const std::string cmd = "cd '" + dir.string() + "' && '" RFFSVM_CLI_PATH "' " + args + " > '" + out.string() +
                            "' 2> '" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
  }

  void synth(const std::string& args) const {
    const auto r = run("synth " + args);
    ASSERT_EQ(r.code, 0) << r.err;
  }

  static void expect_error(const CliRun& r) {
    EXPECT_NE(r.code, 0);
    EXPECT_EQ(r.err.rfind("error: ", 0), 0u) << r.err;
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1) << r.err;
  }
};

std::vector<double> column(const std::string& table, std::size_t col) {
  std::vector<double> out;
  std::istringstream in(table);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || !std::isdigit(static_cast<unsigned char>(line[0]))) continue;
    std::vector<std::string> cells;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, '|')) cells.push_back(cell);
    out.push_back(std::stod(cells.at(col)));
  }
  return out;
}

}  // namespace

TEST_F(Cli, VersionAndHelp) {
  const auto v = run("--version");
  EXPECT_EQ(v.code, 0);
  EXPECT_EQ(v.out, std::to_string(kModelFormatVersion) + "\n");
  for (const char* sub : {"kernel-probe", "train", "predict", "cv", "sweep", "grid", "synth", "convert-meta"}) {
    const auto h = run(std::string(sub) + " --help");
    EXPECT_EQ(h.code, 0) << sub;
    EXPECT_NE(h.out.find("--"), std::string::npos) << sub;
  }
}

TEST_F(Cli, ParseErrorsAreSingleLine) {
  expect_error(run(""));
  expect_error(run("kernel-probe --bogus 1"));
  expect_error(run("kernel-probe --dim abc"));
  expect_error(run("train --features x.csv"));
  expect_error(run("no-such-command"));
}

TEST_F(Cli, KernelProbeErrorsDecrease) {
  const auto r = run("kernel-probe --kernel gaussian --gamma 0.1 --dim 20 --pairs 200 --m-values 32,128,512,2048 --seed 7");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ms = column(r.out, 0), mean = column(r.out, 1);
  ASSERT_EQ(ms, (std::vector<double>{32, 128, 512, 2048}));
  for (std::size_t k = 1; k < mean.size(); ++k) EXPECT_LT(mean[k], mean[k - 1]);
  EXPECT_NE(r.out.find("shift invariance"), std::string::npos);
}

TEST_F(Cli, KernelProbeEdgeCases) {
  const auto lin = run("kernel-probe --kernel linear --gamma 0.1");
  expect_error(lin);
  EXPECT_NE(lin.err.find("linear kernel needs no random features"), std::string::npos);
  const auto one = run("kernel-probe --m-values 32 --pairs 1");
  ASSERT_EQ(one.code, 0) << one.err;
  EXPECT_EQ(column(one.out, 0), (std::vector<double>{32}));
  expect_error(run("kernel-probe --gamma -1"));
  expect_error(run("kernel-probe --m-values 0"));
}

TEST_F(Cli, SynthWritesFifteenClasses) {
  synth("--classes 15 --per-class 4 --dim 8 --out d.csv --folds-out f.csv");
  const auto ds = load_features(file("d.csv"));
  EXPECT_EQ(std::set<std::string>(ds.labels.begin(), ds.labels.end()).size(), 15u);
  EXPECT_EQ(load_fold_manifest(file("f.csv"), ds), round_robin_folds(ds.size(), 4));
}

TEST_F(Cli, CvOnThreeBlobs) {
  synth("--classes 3 --per-class 40 --dim 4 --separation 6 --seed 3 --out d.csv --folds-out f.csv");
  const auto r = run("cv --features d.csv --folds f.csv --kernel gaussian --gamma 0.5 --report-out r.json --no-timing");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("Overall"), std::string::npos);
  const auto j = nlohmann::json::parse(slurp(file("r.json")));
  EXPECT_GE(j["runs"][0]["report"]["overall_accuracy"].get<double>(), 0.95);
  EXPECT_FALSE(j["runs"][0]["report"].contains("timing"));
}

TEST_F(Cli, FailuresLeaveNoPartialFiles) {
  const auto missing = run("cv --features missing.csv --k-folds 4 --kernel linear --report-out r.json");
  expect_error(missing);
  EXPECT_FALSE(fs::exists(file("r.json")));

  // Fold 1 holds every "x" row, so its training split has one class.
  std::ofstream(file("d.csv")) << "a,x,1\nb,y,2\nc,x,3\nd,y,4\n";
  std::ofstream(file("f.csv")) << "a,1\nc,1\nb,2\nd,2\n";
  expect_error(run("cv --features d.csv --folds f.csv --kernel linear --report-out r.json"));
  EXPECT_FALSE(fs::exists(file("r.json")));

  std::ofstream(file("one.csv")) << "a,x,1\nb,x,2\n";
  expect_error(run("train --features one.csv --kernel linear --model-out m.json"));
  expect_error(run("train --features d.csv --kernel gaussian --model-out m.json"));
  EXPECT_FALSE(fs::exists(file("m.json")));
  for (const auto& e : fs::directory_iterator(dir)) EXPECT_NE(e.path().extension(), ".tmp") << e.path();
}

TEST_F(Cli, SweepSingleCellMatchesCv) {
  synth("--classes 3 --per-class 20 --dim 6 --separation 4 --seed 5 --out d.csv --folds-out f.csv");
  const std::string common = " --features d.csv --folds f.csv --kernel laplacian --gamma 0.25 --seed 9 --no-timing";
  ASSERT_EQ(run("sweep --m-values 64 --report-out s.json" + common).code, 0);
  ASSERT_EQ(run("cv --m 64 --report-out c.json" + common).code, 0);
  const auto s = nlohmann::json::parse(slurp(file("s.json")));
  const auto c = nlohmann::json::parse(slurp(file("c.json")));
  EXPECT_EQ(s["kernels"][0]["sweep"][0]["report"], c["runs"][0]["report"]);
}

TEST_F(Cli, SweepShowsStorageRatio) {
  synth("--classes 2 --per-class 4 --dim 6553 --k-folds 2 --out d.csv --folds-out f.csv");
  const auto r = run("sweep --features d.csv --folds f.csv --kernel gaussian --gamma 2^-18 --m-values 1024,2048 --no-timing");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("6.40x"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("3.20x"), std::string::npos) << r.out;
}

TEST_F(Cli, SweepIsByteIdenticalAcrossRunsAndThreads) {
  synth("--classes 3 --per-class 20 --dim 6 --separation 4 --seed 6 --out d.csv --folds-out f.csv");
  const std::string args = "sweep --features d.csv --folds f.csv --kernel all --gamma 0.25 --m-values 16,64 --no-timing";
  const auto a = run(args + " --report-out a.json");
  const auto b = run(args + " --report-out b.json --threads 3");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.err, b.err);
  EXPECT_EQ(slurp(file("a.json")), slurp(file("b.json")));
}

TEST_F(Cli, TrainPredictRoundTripMatchesInProcess) {
  synth("--classes 3 --per-class 30 --dim 5 --separation 3 --seed 7 --out d.csv");
  for (const std::string flags : {"--kernel cauchy --gamma 0.5 --m 32 --seed 4", "--kernel gaussian --gamma 0.5",
                                  "--kernel linear"}) {
    SCOPED_TRACE(flags);
    ASSERT_EQ(run("train --features d.csv --model-out m.json " + flags).code, 0);
    const auto r = run("predict --model m.json --features d.csv --scores --out p.csv");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());

    const auto ds = load_features(file("d.csv"));
    ExperimentConfig cfg;
    if (flags.find("cauchy") != std::string::npos) {
      cfg.kernel = KernelSpec(KernelFamily::cauchy, 0.5);
      cfg.mode = ExperimentMode::random_features;
      cfg.target_dim = 32;
      cfg.map_seed = 4;
      cfg.svm.shuffle_seed = 4;
    } else if (flags.find("gaussian") != std::string::npos) {
      cfg.kernel = KernelSpec(KernelFamily::gaussian, 0.5);
      cfg.map_seed = cfg.svm.shuffle_seed = 1;
    } else {
      cfg.map_seed = cfg.svm.shuffle_seed = 1;
    }
    const auto preds = train_predictor(ds.features, ds.labels, cfg).predict(ds.features);
    std::istringstream csv(slurp(file("p.csv")));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line.rfind("segment_id,predicted_label,score_", 0), 0u);
    for (std::size_t i = 0; i < preds.size(); ++i) {
      ASSERT_TRUE(std::getline(csv, line));
      std::string expected = ds.segment_ids[i] + "," + preds[i].label;
      for (double s : preds[i].scores) expected += "," + format_double(s);
      EXPECT_EQ(line, expected);
    }
  }
}

TEST_F(Cli, GridPicksBestCell) {
  synth("--classes 3 --per-class 20 --dim 4 --separation 5 --seed 8 --out d.csv --folds-out f.csv");
  const auto r = run("grid --features d.csv --folds f.csv --kernel gaussian --gammas 2^-6,2^-2 --cs 1,100 --report-out g.json");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(file("g.json")));
  EXPECT_EQ(j["cells"].size(), 4u);
  double best = 0.0;
  for (const auto& c : j["cells"]) best = std::max(best, c["accuracy"].get<double>());
  EXPECT_EQ(j["best"]["accuracy"].get<double>(), best);
  expect_error(run("grid --features d.csv --folds f.csv --kernel gaussian --gammas 2^x"));
}

TEST_F(Cli, ConvertMeta) {
  std::ofstream(file("m.txt")) << "audio/a1.wav\tbeach\naudio/a2.wav\tbus\naudio/a3.wav\tpark\n";
  const auto r = run("convert-meta --meta m.txt --fold 2 --out man.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(file("man.csv")), "a1,2,beach\na2,2,bus\na3,2,park\n");
  expect_error(run("convert-meta --meta m.txt --meta m.txt --fold 1"));
  expect_error(run("convert-meta --meta nope.txt"));
}

TEST_F(Cli, ConfigFileWithFlagOverride) {
  synth("--classes 3 --per-class 20 --dim 4 --separation 6 --seed 9 --out d.csv --folds-out f.csv");
  std::ofstream(file("c.toml")) << "[cv]\nfeatures = \"d.csv\"\nfolds = \"f.csv\"\nkernel = \"gaussian\"\n"
                                   "gamma = 100\nno-timing = true\n";
  const auto from_file = run("--config c.toml cv --report-out a.json");
  const auto overridden = run("--config c.toml cv --gamma 0.5 --report-out b.json");
  const auto flags_only = run("cv --features d.csv --folds f.csv --kernel gaussian --gamma 0.5 --no-timing --report-out c.json");
  ASSERT_EQ(from_file.code, 0) << from_file.err;
  ASSERT_EQ(overridden.code, 0) << overridden.err;
  EXPECT_NE(from_file.out, overridden.out);
  EXPECT_EQ(overridden.out, flags_only.out);
  EXPECT_EQ(slurp(file("b.json")), slurp(file("c.json")));
}
