#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "tsckit/dataset.hpp"
#include "tsckit/pipeline.hpp"
#include "tsckit/strep.hpp"

namespace py = pybind11;
using namespace tsckit;

namespace {

py::array_t<double> matrix_to_numpy(const FeatureMatrix& m) {
  py::array_t<double> out({py::ssize_t(m.rows), py::ssize_t(m.cols)});
  std::memcpy(out.mutable_data(), m.data.data(), m.data.size() * sizeof(double));
  return out;
}

template <typename T>
py::array_t<T> vector_to_numpy(const std::vector<T>& v) {
  py::array_t<T> out({py::ssize_t(v.size())}, {py::ssize_t(sizeof(T))});
  std::memcpy(out.mutable_data(), v.data(), v.size() * sizeof(T));
  return out;
}

TimeSeriesDataset dataset_from_arrays(py::array_t<float, py::array::c_style | py::array::forcecast> values,
                                      py::array_t<uint32_t, py::array::c_style | py::array::forcecast> labels,
                                      py::object fold_ids, const std::string& name) {
  if (values.ndim() != 3) throw std::invalid_argument("values must have shape (n, d, l)");
  if (labels.ndim() != 1) throw std::invalid_argument("labels must be one-dimensional");
  TimeSeriesDataset ds;
  ds.name = name;
  ds.n = uint32_t(values.shape(0));
  ds.d = uint32_t(values.shape(1));
  ds.l = uint32_t(values.shape(2));
  if (uint32_t(labels.shape(0)) != ds.n) throw std::invalid_argument("labels length must equal n");
  ds.values.assign(values.data(), values.data() + values.size());
  ds.labels.assign(labels.data(), labels.data() + labels.size());
  ds.C = 0;
  for (uint32_t y : ds.labels) ds.C = std::max(ds.C, y + 1);
  if (fold_ids.is_none()) {
    ds.F = 1;
    ds.folds.assign(ds.n, 0);
  } else {
    auto folds = fold_ids.cast<py::array_t<uint32_t, py::array::c_style | py::array::forcecast>>();
    if (folds.ndim() != 1 || uint32_t(folds.shape(0)) != ds.n)
      throw std::invalid_argument("fold_ids must be one-dimensional of length n");
    ds.folds.assign(folds.data(), folds.data() + folds.size());
    ds.F = 0;
    for (uint32_t f : ds.folds) ds.F = std::max(ds.F, f + 1);
  }
  validate_dataset(ds);
  return ds;
}

PrunedPipeline train_py(const TimeSeriesDataset& ds, const std::string& method, double zeta,
                        const std::string& classifier, uint64_t seed, int threads, bool importance_absolute) {
  PipelineConfig cfg;
  cfg.method = method_from_string(method);
  cfg.zeta = zeta;
  cfg.final_classifier = classifier_kind_from_string(classifier);
  cfg.seed = seed;
  cfg.threads = threads;
  cfg.importance_absolute = importance_absolute;
  return train_pruned(ds, cfg);
}

py::dict bound_report_py(const PrunedPipeline& p, const TimeSeriesDataset& train) {
  const BoundReport r = pipeline_bound_report(p, train);
  py::dict out;
  out["B"] = r.B;
  out["pruned_mass"] = vector_to_numpy(r.pruned_mass);
  out["bound"] = vector_to_numpy(r.bound);
  out["deviation"] = vector_to_numpy(r.deviation);
  out["satisfied"] = r.satisfied;
  return out;
}

py::dict kept_sets_py(const PrunedPipeline& p) {
  py::dict out;
  for (const OriginSelection& sel : p.prov.decision.origins) {
    py::dict entry;
    entry["total"] = sel.total;
    entry["kept"] = vector_to_numpy(sel.kept);
    out[sel.origin == Origin::Hydra ? "hydra" : "quant"] = std::move(entry);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "time-series classification with coefficient-ranked transform pruning";

  py::class_<TimeSeriesDataset>(m, "Dataset")
      .def_readonly("name", &TimeSeriesDataset::name)
      .def_readonly("n", &TimeSeriesDataset::n)
      .def_readonly("d", &TimeSeriesDataset::d)
      .def_readonly("l", &TimeSeriesDataset::l)
      .def_readonly("n_classes", &TimeSeriesDataset::C)
      .def_readonly("n_folds", &TimeSeriesDataset::F)
      .def("values",
           [](const TimeSeriesDataset& ds) {
             py::array_t<float> out({py::ssize_t(ds.n), py::ssize_t(ds.d), py::ssize_t(ds.l)});
             std::memcpy(out.mutable_data(), ds.values.data(), ds.values.size() * sizeof(float));
             return out;
           })
      .def("labels", [](const TimeSeriesDataset& ds) { return vector_to_numpy(ds.labels); })
      .def("fold_ids", [](const TimeSeriesDataset& ds) { return vector_to_numpy(ds.folds); })
      .def("__repr__", [](const TimeSeriesDataset& ds) {
        return "<Dataset '" + ds.name + "' n=" + std::to_string(ds.n) + " d=" + std::to_string(ds.d) +
               " l=" + std::to_string(ds.l) + " classes=" + std::to_string(ds.C) + ">";
      });

  m.def(
      "generate",
      [](const std::string& kind, uint32_t n, uint32_t d, uint32_t l, uint32_t classes, double noise,
         uint64_t seed, uint32_t folds, const std::string& name) {
        SyntheticSpec spec;
        spec.kind = synthetic_kind_from_string(kind);
        spec.n = n;
        spec.d = d;
        spec.l = l;
        spec.C = classes;
        spec.noise = noise;
        spec.seed = seed;
        spec.folds = folds;
        spec.name = name;
        return generate_synthetic(spec);
      },
      py::arg("kind") = "sinusoid-frequency", py::arg("n") = 40, py::arg("d") = 1, py::arg("l") = 64,
      py::arg("classes") = 2, py::arg("noise") = 0.1, py::arg("seed") = 0, py::arg("folds") = 5,
      py::arg("name") = "synthetic");
  m.def("from_arrays", &dataset_from_arrays, py::arg("values"), py::arg("labels"),
        py::arg("fold_ids") = py::none(), py::arg("name") = "dataset");
  m.def("load_dataset", [](const std::filesystem::path& p) { return load_dataset(p); }, py::arg("path"));
  m.def("save_dataset", [](const TimeSeriesDataset& ds, const std::filesystem::path& p) { save_dataset(ds, p); },
        py::arg("dataset"), py::arg("path"));
  m.def("split_folds", &split_folds, py::arg("dataset"), py::arg("fold"));
  m.def("normalize_per_channel", &normalize_per_channel, py::arg("dataset"));

  py::class_<PrunedPipeline>(m, "Pipeline")
      .def_property_readonly("method", [](const PrunedPipeline& p) { return to_string(p.method); })
      .def_property_readonly("classifier", [](const PrunedPipeline& p) { return to_string(p.classifier_kind); })
      .def_property_readonly("zeta", [](const PrunedPipeline& p) { return p.prov.decision.zeta; })
      .def_property_readonly("feature_count", &PrunedPipeline::feature_count)
      .def_property_readonly("n_classes", &PrunedPipeline::n_classes)
      .def_property_readonly("temp_lambda", [](const PrunedPipeline& p) { return p.prov.temp_lambda; })
      .def("kept_sets", &kept_sets_py)
      .def(
          "predict",
          [](const PrunedPipeline& p, const TimeSeriesDataset& ds, int threads) {
            return vector_to_numpy(pipeline_predict(p, ds, threads));
          },
          py::arg("dataset"), py::arg("threads") = 1)
      .def(
          "transform",
          [](const PrunedPipeline& p, const TimeSeriesDataset& ds, int threads) {
            return matrix_to_numpy(pipeline_transform(p, ds, threads));
          },
          py::arg("dataset"), py::arg("threads") = 1)
      .def("bound_report", &bound_report_py, py::arg("train"))
      .def("save", [](const PrunedPipeline& p, const std::filesystem::path& path) { pipeline_save(p, path); },
           py::arg("path"))
      .def_static("load", [](const std::filesystem::path& path) { return pipeline_load(path); }, py::arg("path"));

  m.def("train", &train_py, py::arg("dataset"), py::arg("method") = "hydrant", py::arg("zeta") = 0.8,
        py::arg("classifier") = "auto", py::arg("seed") = 0, py::arg("threads") = 1,
        py::arg("importance_absolute") = true);

  m.def(
      "quality_metrics",
      [](const std::vector<uint32_t>& y_true, const std::vector<uint32_t>& y_pred, uint32_t n_classes) {
        return quality_metrics(y_true, y_pred, n_classes);
      },
      py::arg("y_true"), py::arg("y_pred"), py::arg("n_classes") = 0);
}
