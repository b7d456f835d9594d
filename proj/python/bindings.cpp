#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "premium/dataset.hpp"
#include "premium/ensemble.hpp"
#include "premium/error.hpp"
#include "premium/explain.hpp"
#include "premium/metrics.hpp"
#include "premium/pipeline.hpp"

namespace py = pybind11;
using namespace premium;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw ValidationError("expected a 2-D array");
  Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  const double* src = a.data();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = src[i * m.cols() + j];
  }
  return m;
}

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw ValidationError("expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

Array from_matrix(const Matrix& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.values().begin(), m.values().end(), out.mutable_data());
  return out;
}

Array from_vector(const std::vector<double>& v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

// JSON text crosses the boundary; the Python side parses it.
Json parse_json(const std::string& text) {
  return text.empty() ? Json::object() : Json::parse(text);
}

std::vector<std::string> default_names(std::size_t p) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < p; ++j) names.push_back("x" + std::to_string(j));
  return names;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Ensemble regression, Shapley and ICE explanations for premium data";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<UsageError>(m, "UsageError", base.ptr());

  m.def("metrics", [](const Array& actual, const Array& predicted) {
    const auto r = evaluate_metrics(to_vector(actual), to_vector(predicted));
    py::dict d;
    d["r_squared"] = r.r_squared;
    d["mae"] = r.mae;
    d["rmse"] = r.rmse;
    d["mape"] = r.mape;
    d["n"] = r.n;
    return d;
  }, py::arg("actual"), py::arg("predicted"));

  m.def("load_csv", [](const std::filesystem::path& path) {
    const Dataset d = derive_features(load_csv(path));
    return py::make_tuple(from_matrix(d.x), from_vector(d.y), d.feature_names);
  }, py::arg("path"), "Feature matrix, target and feature names of an insurance CSV.");

  py::class_<Model>(m, "Model")
      .def_static("fit", [](const std::string& variant, const Array& x, const Array& y,
                            std::vector<std::string> names, const std::string& params,
                            std::uint64_t seed, std::size_t jobs) {
        Dataset d;
        d.x = to_matrix(x);
        d.y = to_vector(y);
        d.feature_names = names.empty() ? default_names(d.m()) : std::move(names);
        d.validate();
        ModelSpec spec = ModelSpec::from_json(parse_variant(variant), parse_json(params));
        spec.set_seed(seed);
        py::gil_scoped_release release;
        return fit_scaled_model(spec, d, ConstantColumns::kPassThrough, jobs);
      }, py::arg("variant"), py::arg("x"), py::arg("y"), py::arg("feature_names") = std::vector<std::string>{},
         py::arg("params") = "", py::arg("seed") = kDefaultSeed, py::arg("jobs") = 1)
      .def_static("load", &load_model, py::arg("path"))
      .def("save", &save_model, py::arg("path"))
      .def("predict", [](const Model& model, const Array& x) {
        return from_vector(model.predict(to_matrix(x)));
      }, py::arg("x"))
      .def_property_readonly("variant", [](const Model& model) {
        return std::string(variant_name(model.variant()));
      })
      .def_property_readonly("feature_names", &Model::feature_names)
      .def("config_json", [](const Model& model) { return model.config_json().dump(); });

  m.def("shap", [](const Model& model, const Array& rows, const Array& background, std::size_t jobs) {
    const Matrix x = to_matrix(rows);
    const Matrix b = to_matrix(background);
    ShapExplanation exp;
    {
      py::gil_scoped_release release;
      exp = shap_exact(model.as_function(), x, b, model.feature_names(), jobs);
    }
    return py::make_tuple(exp.base_value, from_matrix(exp.phi));
  }, py::arg("model"), py::arg("rows"), py::arg("background"), py::arg("jobs") = 1,
     "Exact interventional Shapley values: (base_value, phi).");

  m.def("ice", [](const Model& model, const Array& rows, std::size_t feature, const Array& grid,
                  const std::string& variant) {
    IceCurveSet set = ice_curves(model.as_function(), to_matrix(rows), feature, to_vector(grid));
    if (variant == "centered") {
      set = center_ice(set);
    } else if (variant == "derivative") {
      set = derivative_ice(set);
    } else if (variant != "raw") {
      throw ValidationError("variant must be raw, centered or derivative");
    }
    return py::make_tuple(from_matrix(set.curves), from_vector(set.pdp));
  }, py::arg("model"), py::arg("rows"), py::arg("feature"), py::arg("grid"), py::arg("variant") = "raw",
     "ICE curves and their mean: (curves, pdp).");

  m.def("ingest", [](const std::filesystem::path& input, const std::filesystem::path& out,
                     std::uint64_t seed, double train_fraction) {
    const auto prepared = run_ingest({input, out, seed, train_fraction});
    return py::make_tuple(prepared.split.train_rows.size(), prepared.split.test_rows.size());
  }, py::arg("input"), py::arg("out"), py::arg("seed") = kDefaultSeed,
     py::arg("train_fraction") = kDefaultTrainFraction);

  m.def("train", [](const std::filesystem::path& dataset, const std::filesystem::path& out,
                    const std::string& variant, const std::string& params, std::uint64_t seed,
                    std::size_t jobs) {
    TrainOptions o;
    o.dataset = dataset;
    o.out = out;
    o.variant = parse_variant(variant);
    o.params = parse_json(params);
    o.seed = seed;
    o.jobs = jobs;
    py::gil_scoped_release release;
    return run_train(o).train_r2;
  }, py::arg("dataset"), py::arg("out"), py::arg("model") = "rf", py::arg("params") = "",
     py::arg("seed") = kDefaultSeed, py::arg("jobs") = 1);

  m.def("tune", [](const std::filesystem::path& dataset, const std::filesystem::path& out,
                   const std::string& variant, std::optional<std::filesystem::path> grid,
                   std::size_t folds, std::uint64_t seed, std::size_t jobs) {
    TuneOptions o;
    o.dataset = dataset;
    o.out = out;
    o.variant = parse_variant(variant);
    o.grid = std::move(grid);
    o.folds = folds;
    o.seed = seed;
    o.jobs = jobs;
    CvResult r;
    {
      py::gil_scoped_release release;
      r = run_tune(o);
    }
    return py::make_tuple(r.best_params.dump(), r.best_mean_score);
  }, py::arg("dataset"), py::arg("out"), py::arg("model") = "rf", py::arg("grid") = py::none(),
     py::arg("folds") = 5, py::arg("seed") = kDefaultSeed, py::arg("jobs") = 1);

  m.def("evaluate", [](const std::filesystem::path& model, const std::filesystem::path& dataset,
                       const std::filesystem::path& out) {
    const auto r = run_evaluate({model, dataset, out});
    return py::make_tuple(r.r_squared, r.mae, r.rmse, r.mape);
  }, py::arg("model"), py::arg("dataset"), py::arg("out"));

  m.def("explain", [](const std::filesystem::path& model, const std::filesystem::path& dataset,
                      const std::filesystem::path& out, bool shap, bool ice,
                      std::size_t background_size, std::size_t max_rows,
                      std::vector<std::string> features, std::vector<std::string> variants,
                      std::size_t grid_points, std::uint64_t seed, std::size_t jobs) {
    ExplainOptions o;
    o.model = model;
    o.dataset = dataset;
    o.out = out;
    o.shap = shap;
    o.ice = ice;
    o.background_size = background_size;
    o.max_rows = max_rows;
    o.features = std::move(features);
    for (const auto& v : variants) {
      if (v == "raw") o.raw = true;
      else if (v == "centered") o.centered = true;
      else if (v == "derivative") o.derivative = true;
      else throw ValidationError("unknown ICE variant '" + v + "'");
    }
    o.grid_points = grid_points;
    o.seed = seed;
    o.jobs = jobs;
    py::gil_scoped_release release;
    run_explain(o);
  }, py::arg("model"), py::arg("dataset"), py::arg("out"), py::arg("shap") = true,
     py::arg("ice") = true, py::arg("background_size") = 0, py::arg("max_rows") = 0,
     py::arg("features") = std::vector<std::string>{}, py::arg("variants") = std::vector<std::string>{},
     py::arg("grid_points") = 30, py::arg("seed") = kDefaultSeed, py::arg("jobs") = 1);

  m.def("reproduce", [](const std::filesystem::path& input, const std::filesystem::path& out,
                        std::uint64_t seed, std::size_t background_size, std::size_t max_rows,
                        std::size_t grid_points, std::vector<double> fractions, std::size_t folds,
                        std::size_t jobs) {
    ReproduceOptions o;
    o.input = input;
    o.out = out;
    o.seed = seed;
    o.background_size = background_size;
    o.max_rows = max_rows;
    o.grid_points = grid_points;
    if (!fractions.empty()) o.fractions = std::move(fractions);
    o.folds = folds;
    o.jobs = jobs;
    py::gil_scoped_release release;
    run_reproduce(o);
  }, py::arg("input"), py::arg("out"), py::arg("seed") = kDefaultSeed,
     py::arg("background_size") = 100, py::arg("max_rows") = 0, py::arg("grid_points") = 30,
     py::arg("fractions") = std::vector<double>{}, py::arg("folds") = 5, py::arg("jobs") = 1);
}
