#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "premium/io.hpp"
#include "premium/pipeline.hpp"
#include "synthetic.hpp"

namespace premium {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string output;
};

Result run(const std::string& args, const fs::path& log) {
  const std::string cmd =
      std::string("\"") + PREMIUM_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = testing::fresh_temp_dir("cli");
    testing::write_synthetic_csv(dir_ / "input.csv", 160, 3);
    const auto r = run("ingest --input \"" + (dir_ / "input.csv").string() + "\" --out \"" +
                           (dir_ / "run").string() + "\"",
                       dir_ / "ingest.log");
    ASSERT_EQ(r.code, 0) << r.output;
  }

  Result cli(const std::string& args) { return run(args, dir_ / "cmd.log"); }
  static std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }
  static fs::path dataset() { return dir_ / "run" / "dataset.json"; }

  static inline fs::path dir_;
};

TEST_F(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(cli("--help").code, 0);
  EXPECT_EQ(cli("train --no-such-flag").code, 2);
  EXPECT_EQ(cli("frobnicate").code, 2);
  EXPECT_EQ(cli("train --dataset x.json").code, 2);
}

TEST_F(Cli, IngestWritesTheDatasetDocuments) {
  const auto run_dir = dir_ / "run";
  EXPECT_TRUE(fs::exists(run_dir / "dataset.json"));
  EXPECT_TRUE(fs::exists(run_dir / "tables" / "table3_summary.csv"));
  EXPECT_TRUE(fs::exists(run_dir / "figures" / "correlation_heatmap.svg"));
  const Json doc = read_json_file(run_dir / "dataset.json");
  EXPECT_EQ(doc["split"]["train_rows"].size(), 120u);
}

TEST_F(Cli, MalformedHeaderIsValidationError) {
  std::ofstream(dir_ / "bad.csv") << "Age,Mass,PremiumPrice\n1,2,3\n";
  const auto r = cli("ingest --input " + q(dir_ / "bad.csv") + " --out " + q(dir_ / "bad"));
  EXPECT_EQ(r.code, 3) << r.output;
  EXPECT_NE(r.output.find("Mass"), std::string::npos) << r.output;
  EXPECT_FALSE(fs::exists(dir_ / "bad" / "dataset.json"));
}

TEST_F(Cli, MissingInputIsIoError) {
  EXPECT_EQ(cli("ingest --input " + q(dir_ / "nope.csv") + " --out " + q(dir_ / "x")).code, 4);
}

TEST_F(Cli, UnwritableOutputIsIoError) {
  std::ofstream(dir_ / "plain_file") << "x";
  const auto r = cli("ingest --input " + q(dir_ / "input.csv") + " --out " +
                     q(dir_ / "plain_file" / "sub"));
  EXPECT_EQ(r.code, 4) << r.output;
}

TEST_F(Cli, TrainIsDeterministic) {
  const auto a = dir_ / "train_a";
  const auto b = dir_ / "train_b";
  for (const auto& out : {a, b}) {
    const auto r = cli("train --dataset " + q(dataset()) + " --model rf --n-estimators 15 --jobs 2 --out " + q(out));
    ASSERT_EQ(r.code, 0) << r.output;
  }
  EXPECT_EQ(slurp(a / "models" / "model_rf.json"), slurp(b / "models" / "model_rf.json"));
  EXPECT_EQ(slurp(a / "runs" / "run_rf.json"), slurp(b / "runs" / "run_rf.json"));
  const Json model = read_json_file(a / "models" / "model_rf.json");
  EXPECT_EQ(model["kind"], "model");
}

TEST_F(Cli, BadHyperparameterIsValidationError) {
  EXPECT_EQ(cli("train --dataset " + q(dataset()) + " --model gbm --learning-rate 0 --out " +
                q(dir_ / "bad_lr")).code,
            3);
  EXPECT_EQ(cli("train --dataset " + q(dataset()) + " --model rf --param colour=3 --out " +
                q(dir_ / "bad_p")).code,
            3);
}

TEST_F(Cli, ConfigFileSuppliesOptions) {
  std::ofstream(dir_ / "cfg.json") << R"({"model": "gbm", "n_estimators": 4, "seed": 5})";
  const auto out = dir_ / "cfg_out";
  const auto r = cli("train --config " + q(dir_ / "cfg.json") + " --dataset " + q(dataset()) +
                     " --out " + q(out));
  ASSERT_EQ(r.code, 0) << r.output;
  const Json run_doc = read_json_file(out / "runs" / "run_gbm.json");
  EXPECT_EQ(run_doc["params"]["n_estimators"], 4);
  EXPECT_EQ(run_doc["seed"], 5);
}

TEST_F(Cli, TuneSingleCellAndMissingGrid) {
  std::ofstream(dir_ / "grid.json")
      << R"({"format_version": 1, "kind": "grid", "model": "gbm", "params": {"n_estimators": [7]}})";
  const auto out = dir_ / "tune";
  const auto r = cli("tune --dataset " + q(dataset()) + " --model gbm --folds 3 --grid " +
                     q(dir_ / "grid.json") + " --out " + q(out));
  ASSERT_EQ(r.code, 0) << r.output;
  const Json cv = read_json_file(out / "tuning" / "cv_gbm.json");
  EXPECT_EQ(cv["cells"].size(), 1u);
  EXPECT_EQ(cv["best_params"]["n_estimators"], 7);
  EXPECT_EQ(cli("tune --dataset " + q(dataset()) + " --model gbm --grid " + q(dir_ / "none.json") +
                " --out " + q(out)).code,
            4);
  EXPECT_EQ(cli("tune --dataset " + q(dataset()) + " --model rf --grid " + q(dir_ / "grid.json") +
                " --out " + q(out)).code,
            3);
}

TEST_F(Cli, EvaluateAndExplain) {
  const auto out = dir_ / "ee";
  ASSERT_EQ(cli("train --dataset " + q(dataset()) + " --model gbm --out " + q(out)).code, 0);
  const auto model = out / "models" / "model_gbm.json";
  const auto r = cli("evaluate --model " + q(model) + " --dataset " + q(dataset()) + " --out " + q(out));
  ASSERT_EQ(r.code, 0) << r.output;
  const Json metrics = read_json_file(out / "metrics" / "metrics_gbm.json");
  EXPECT_LE(metrics["metrics"]["r_squared"].get<double>(), 1.0);
  EXPECT_TRUE(fs::exists(out / "figures" / "prediction_error_gbm.svg"));

  const auto e = cli("explain --model " + q(model) + " --dataset " + q(dataset()) +
                     " --out " + q(out) + " --ice --feature Age --centered --max-rows 5");
  ASSERT_EQ(e.code, 0) << e.output;
  std::ifstream ice(out / "explain" / "ice_gbm.csv");
  std::string line;
  std::getline(ice, line);
  std::getline(ice, line);
  EXPECT_EQ(line, "feature,row_id,grid_value,prediction,variant");
  ASSERT_TRUE(std::getline(ice, line));
  EXPECT_NE(line.find(",0,centered"), std::string::npos) << line;
  EXPECT_TRUE(fs::exists(out / "figures" / "ice_gbm_Age_centered.svg"));
  EXPECT_FALSE(fs::exists(out / "figures" / "ice_gbm_Age_raw.svg"));

  EXPECT_EQ(cli("explain --model " + q(model) + " --dataset " + q(dataset()) + " --out " + q(out) +
                " --ice --feature Height").code,
            3);
}

TEST_F(Cli, EvaluateRejectsMismatchedFeatures) {
  const auto out = dir_ / "mismatch";
  ASSERT_EQ(cli("train --dataset " + q(dataset()) + " --model gbm --n-estimators 2 --out " + q(out)).code, 0);
  Json doc = read_json_file(dataset());
  doc["feature_names"][0] = "Years";
  write_json_file(out / "renamed.json", doc);
  const auto r = cli("evaluate --model " + q(out / "models" / "model_gbm.json") + " --dataset " +
                     q(out / "renamed.json") + " --out " + q(out));
  EXPECT_EQ(r.code, 3) << r.output;
}

TEST_F(Cli, ConstantModelHasZeroShap) {
  const auto out = dir_ / "constant";
  ASSERT_EQ(cli("train --dataset " + q(dataset()) + " --model xgb --gamma 1e15 --subsample 1 --out " + q(out)).code, 0);
  const auto r = cli("explain --model " + q(out / "models" / "model_xgb.json") + " --dataset " +
                     q(dataset()) + " --out " + q(out) + " --shap --background-size 10 --max-rows 4");
  ASSERT_EQ(r.code, 0) << r.output;
  const auto rows = read_csv_cells(out / "explain" / "shap_xgb.csv");
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    for (std::size_t j = 1; j + 2 < rows[i].size(); ++j) EXPECT_EQ(std::stod(rows[i][j]), 0.0);
  }
}

TEST(ShippedGrids, MatchBuiltInDefaults) {
  for (const auto v : {ModelVariant::kForest, ModelVariant::kGbm, ModelVariant::kXgb}) {
    const auto file = ParamGrid::load(fs::path(PREMIUM_SOURCE_DIR) / "grids" / (std::string(variant_name(v)) + ".json"));
    const auto built_in = default_grid(v);
    EXPECT_EQ(file.variant, v);
    EXPECT_EQ(file.cells(), built_in.cells()) << variant_name(v);
    EXPECT_EQ(file.fixed, built_in.fixed) << variant_name(v);
  }
}

}  // namespace
}  // namespace premium
