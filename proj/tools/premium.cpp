// Command-line front end: ingest, train, tune, evaluate, explain, reproduce.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "premium/error.hpp"
#include "premium/io.hpp"
#include "premium/pipeline.hpp"

namespace {

using premium::Json;

std::size_t default_jobs() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

// Turns a --config JSON object into "--key value" pairs. Keys may use
// underscores or dashes.
std::vector<std::string> config_args(const std::string& path) {
  const Json doc = premium::read_json_file(path);
  if (!doc.is_object()) {
    throw premium::UsageError("config file must hold a JSON object");
  }
  std::vector<std::string> out;
  for (const auto& [key, value] : doc.items()) {
    std::string flag = "--" + key;
    for (char& c : flag) {
      if (c == '_') c = '-';
    }
    auto scalar = [](const Json& v) {
      return v.is_string() ? v.get<std::string>() : v.dump();
    };
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back(flag);
    } else if (value.is_array()) {
      for (const auto& v : value) {
        out.push_back(flag);
        out.push_back(scalar(v));
      }
    } else if (value.is_object()) {
      for (const auto& [k, v] : value.items()) {
        out.push_back(flag);
        out.push_back(k + "=" + v.dump());
      }
    } else {
      out.push_back(flag);
      out.push_back(scalar(value));
    }
  }
  return out;
}

// Config values go right after the subcommand so explicit flags, which come
// later, win under the take-last policy.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    std::size_t width = 0;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      width = 2;
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      width = 1;
    } else {
      continue;
    }
    args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
               args.begin() + static_cast<std::ptrdiff_t>(i + width));
    const auto extra = config_args(path);
    std::size_t at = 0;
    while (at < args.size() && args[at].rfind("-", 0) == 0) ++at;
    if (at < args.size()) ++at;  // after the subcommand name
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), extra.begin(),
                extra.end());
    break;
  }
  return args;
}

Json parse_param_value(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception&) {
    return Json(text);
  }
}

Json collect_params(const std::vector<std::string>& assignments) {
  Json params = Json::object();
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw premium::UsageError("--param expects name=value, got '" + a + "'");
    }
    params[a.substr(0, eq)] = parse_param_value(a.substr(eq + 1));
  }
  return params;
}

premium::ModelVariant to_variant(const std::string& name) {
  try {
    return premium::parse_variant(name);
  } catch (const premium::Error& e) {
    throw premium::UsageError(e.what());
  }
}

void print_metrics(const premium::MetricsReport& r) {
  std::printf("R2 %.3f%%  MAE %.3f  RMSE %.3f  MAPE %.3f%%  (n=%zu)\n",
              100.0 * r.r_squared, r.mae, r.rmse, r.mape, r.n);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Medical insurance premium modelling pipeline", "premium"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string unused_config;
  app.add_option("--config", unused_config,
                 "JSON file whose keys supply any flag");

  // ingest
  premium::IngestOptions ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Validate the CSV and write the dataset");
  c_ingest->add_option("--input", ingest.input, "Insurance CSV")->required();
  c_ingest->add_option("--out", ingest.out, "Output directory")->required();
  c_ingest->add_option("--seed", ingest.seed, "Split seed");
  c_ingest->add_option("--train-fraction", ingest.train_fraction,
                       "Fraction of rows in the training split");

  // train
  premium::TrainOptions train;
  std::string train_model = "rf";
  std::vector<std::string> train_params;
  auto* c_train = app.add_subcommand("train", "Fit one model on the training split");
  c_train->add_option("--dataset", train.dataset, "dataset.json from ingest")->required();
  c_train->add_option("--model", train_model, "rf, gbm or xgb");
  c_train->add_option("--out", train.out, "Output directory")->required();
  c_train->add_option("--seed", train.seed, "Model seed");
  c_train->add_option("--jobs", train.jobs, "Worker threads")->default_val(default_jobs());
  c_train->add_option("--param", train_params, "Hyperparameter as name=value")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  std::string n_estimators, max_depth, min_samples_split, max_features,
      learning_rate, subsample, lambda, gamma;
  const std::pair<const char*, std::string*> shortcuts[] = {
      {"n_estimators", &n_estimators}, {"max_depth", &max_depth},
      {"min_samples_split", &min_samples_split}, {"max_features", &max_features},
      {"learning_rate", &learning_rate}, {"subsample", &subsample},
      {"lambda", &lambda}, {"gamma", &gamma}};
  for (const auto& [name, target] : shortcuts) {
    std::string flag = std::string("--") + name;
    for (char& c : flag) {
      if (c == '_') c = '-';
    }
    c_train->add_option(flag, *target, std::string("Sets ") + name);
  }

  // tune
  premium::TuneOptions tune;
  std::string tune_model = "gbm";
  std::string tune_grid;
  auto* c_tune = app.add_subcommand("tune", "Grid search with k-fold cross-validation");
  c_tune->add_option("--dataset", tune.dataset, "dataset.json from ingest")->required();
  c_tune->add_option("--model", tune_model, "rf, gbm or xgb");
  c_tune->add_option("--grid", tune_grid, "Grid JSON (built-in grid when omitted)");
  c_tune->add_option("--folds", tune.folds, "Number of folds");
  c_tune->add_option("--seed", tune.seed, "Fold and model seed");
  c_tune->add_option("--out", tune.out, "Output directory")->required();
  c_tune->add_option("--jobs", tune.jobs, "Worker threads")->default_val(default_jobs());

  // evaluate
  premium::EvaluateOptions evaluate;
  auto* c_eval = app.add_subcommand("evaluate", "Test-split metrics and residual figures");
  c_eval->add_option("--model", evaluate.model, "Model JSON")->required();
  c_eval->add_option("--dataset", evaluate.dataset, "dataset.json from ingest")->required();
  c_eval->add_option("--out", evaluate.out, "Output directory")->required();

  // explain
  premium::ExplainOptions explain;
  bool want_shap = false;
  bool want_ice = false;
  auto* c_explain = app.add_subcommand("explain", "SHAP and ICE explanations");
  c_explain->add_option("--model", explain.model, "Model JSON")->required();
  c_explain->add_option("--dataset", explain.dataset, "dataset.json from ingest")->required();
  c_explain->add_option("--out", explain.out, "Output directory")->required();
  c_explain->add_flag("--shap", want_shap, "Write SHAP outputs");
  c_explain->add_flag("--ice", want_ice, "Write ICE outputs");
  c_explain->add_option("--background-size", explain.background_size,
                        "Background rows (0 = whole training split)");
  c_explain->add_option("--max-rows", explain.max_rows, "Explained test rows (0 = all)");
  c_explain->add_option("--feature", explain.features, "ICE feature (repeatable)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  c_explain->add_flag("--raw", explain.raw, "Raw ICE curves");
  c_explain->add_flag("--centered", explain.centered, "Centered ICE curves");
  c_explain->add_flag("--derivative", explain.derivative, "Derivative ICE curves");
  c_explain->add_option("--grid-points", explain.grid_points, "Equispaced ICE grid size");
  c_explain->add_option("--seed", explain.seed, "Background sampling seed");
  c_explain->add_option("--jobs", explain.jobs, "Worker threads")->default_val(default_jobs());

  // reproduce
  premium::ReproduceOptions reproduce;
  std::string grid_dir;
  auto* c_repro = app.add_subcommand("reproduce", "Run the whole workflow");
  c_repro->add_option("--input", reproduce.input, "Insurance CSV")->required();
  c_repro->add_option("--out", reproduce.out, "Output directory")->required();
  c_repro->add_option("--seed", reproduce.seed, "Seed for every random stream");
  c_repro->add_option("--train-fraction", reproduce.train_fraction, "Training split fraction");
  c_repro->add_option("--folds", reproduce.folds, "Cross-validation folds");
  c_repro->add_flag("--full-tune", reproduce.full_tune, "Search the full grids");
  c_repro->add_option("--grid-dir", grid_dir, "Directory holding rf/gbm/xgb grid JSON");
  c_repro->add_option("--background-size", reproduce.background_size,
                      "SHAP background rows (0 = whole training split)");
  c_repro->add_option("--max-rows", reproduce.max_rows, "Explained test rows (0 = all)");
  c_repro->add_option("--grid-points", reproduce.grid_points, "Equispaced ICE grid size");
  c_repro->add_option("--fractions", reproduce.fractions, "Learning-curve fractions")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  c_repro->add_option("--jobs", reproduce.jobs, "Worker threads")->default_val(default_jobs());

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(premium::ErrorKind::kUsage);
  } catch (const premium::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  }

  try {
    if (*c_ingest) {
      const auto p = premium::run_ingest(ingest);
      std::printf("ingested %zu rows (%zu train, %zu test), %zu duplicate groups\n",
                  p.data.n(), p.split.train_rows.size(), p.split.test_rows.size(),
                  p.duplicate_groups);
    } else if (*c_train) {
      train.variant = to_variant(train_model);
      train.params = collect_params(train_params);
      for (const auto& [name, target] : shortcuts) {
        if (!target->empty()) train.params[name] = parse_param_value(*target);
      }
      const auto outcome = premium::run_train(train);
      std::printf("trained %s: train R2 %.3f%% in %.3f s\n",
                  std::string(premium::variant_label(train.variant)).c_str(),
                  100.0 * outcome.train_r2, outcome.seconds);
    } else if (*c_tune) {
      tune.variant = to_variant(tune_model);
      if (!tune_grid.empty()) tune.grid = tune_grid;
      const auto result = premium::run_tune(tune);
      std::printf("best mean CV R2 %.3f%% with %s\n",
                  100.0 * result.best_mean_score, result.best_params.dump().c_str());
    } else if (*c_eval) {
      print_metrics(premium::run_evaluate(evaluate));
    } else if (*c_explain) {
      if (want_shap || want_ice) {
        explain.shap = want_shap;
        explain.ice = want_ice;
      }
      premium::run_explain(explain);
    } else if (*c_repro) {
      if (!grid_dir.empty()) reproduce.grid_dir = grid_dir;
      premium::run_reproduce(reproduce);
      std::printf("wrote artifacts to %s\n", reproduce.out.string().c_str());
    }
  } catch (const premium::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(premium::ErrorKind::kIo);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
