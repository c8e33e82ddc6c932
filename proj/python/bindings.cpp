#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>
#include <sstream>

#include "commands.hpp"
#include "readability/checkpoint.hpp"
#include "readability/corpus.hpp"
#include "readability/ensemble.hpp"
#include "readability/error.hpp"
#include "readability/features.hpp"
#include "readability/metrics.hpp"
#include "readability/precomputed.hpp"
#include "readability/training.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace readability;

namespace {

struct Model {
  TrainedModel model;
  std::shared_ptr<const FrequencyLexicon> lexicon;

  double predict(const std::string& text, const std::string& id) const {
    return readability::predict(model, id, text, *lexicon, FeatureCatalog::standard());
  }
};

py::dict row_dict(const BootstrapRow& r) {
  py::dict d;
  d["size"] = r.size;
  d["composition"] = to_string(r.composition);
  d["mean_rmse"] = r.mean_rmse;
  d["std_rmse"] = r.std_rmse;
  d["n_resamples"] = r.n_resamples;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sentence readability regression with transformer ensembles";

  // Translators run newest first, so the base class goes first.
  auto& base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());

  m.def("rmse", [](const std::vector<double>& truth, const std::vector<double>& pred) { return rmse(truth, pred); },
        py::arg("truth"), py::arg("pred"));
  m.def(
      "mapped_rmse",
      [](const std::vector<double>& truth, const std::vector<double>& pred) {
        const auto r = mapped_rmse(truth, pred);
        py::dict d;
        d["a"] = r.a;
        d["b"] = r.b;
        d["mapped_rmse"] = r.mapped_rmse;
        return d;
      },
      py::arg("truth"), py::arg("pred"));
  m.def(
      "ensemble_predict",
      [](const std::vector<double>& scores, double floor) { return ensemble_predict(scores, floor); },
      py::arg("scores"), py::arg("floor") = kDefaultFloor);

  py::class_<FrequencyLexicon, std::shared_ptr<FrequencyLexicon>>(m, "Lexicon")
      .def(py::init<double>(), py::arg("floor") = 0.01)
      .def_static(
          "load", [](const fs::path& path, double floor) { return std::make_shared<FrequencyLexicon>(FrequencyLexicon::load(path, floor)); },
          py::arg("path"), py::arg("floor") = 0.01)
      .def("insert", &FrequencyLexicon::insert, py::arg("word"), py::arg("frequency"))
      .def("lookup", &FrequencyLexicon::lookup, py::arg("word"))
      .def("__len__", &FrequencyLexicon::size)
      .def("__contains__", &FrequencyLexicon::contains);

  m.def("feature_names", [] { return FeatureCatalog::standard().names(); });
  m.def(
      "extract_features",
      [](const std::string& text, const FrequencyLexicon& lexicon) {
        return extract_features(text, lexicon, FeatureCatalog::standard()).values;
      },
      py::arg("text"), py::arg("lexicon"));

  m.def(
      "load_corpus",
      [](const fs::path& path) {
        py::list out;
        for (const auto& s : load_corpus(path)) out.append(py::make_tuple(s.id, s.text, s.mos));
        return out;
      },
      py::arg("path"));
  m.def(
      "cv_splits",
      [](const fs::path& corpus, int k, double es_fraction, std::uint64_t seed) {
        py::list out;
        for (const auto& s : make_cv_splits(load_corpus(corpus), k, es_fraction, seed)) {
          py::dict d;
          d["fold"] = s.fold_index;
          d["train"] = s.train_ids;
          d["early_stop"] = s.early_stop_ids;
          d["validation"] = s.validation_ids;
          out.append(d);
        }
        return out;
      },
      py::arg("corpus"), py::arg("k") = 5, py::arg("es_fraction") = 0.1, py::arg("seed") = 0);

  m.def(
      "load_embeddings",
      [](const fs::path& path) {
        const auto table = load_precomputed(path);
        py::list rows;
        for (const auto& id : table.ids()) rows.append(py::make_tuple(id, table.at(id)));
        return rows;
      },
      py::arg("path"), "Rows of an embedding JSONL file as (id, values) in file order.");
  m.def(
      "write_embeddings",
      [](const fs::path& path, const std::vector<std::pair<std::string, std::vector<double>>>& rows) {
        PrecomputedEmbeddings table;
        for (const auto& [id, values] : rows) table.add(id, values);
        store_precomputed(path, table);
      },
      py::arg("path"), py::arg("rows"));

  py::class_<Model>(m, "Model")
      .def_property_readonly("family", [](const Model& mo) { return to_string(mo.model.family); })
      .def_property_readonly("provider", [](const Model& mo) { return to_string(provider_kind(mo.model.encoder)); })
      .def_property_readonly("embedding_dim", [](const Model& mo) { return embedding_dim(mo.model.encoder); })
      .def("predict", &Model::predict, py::arg("text"), py::arg("id") = "");
  m.def(
      "load_model",
      [](const fs::path& manifest, const fs::path& lexicon, double lexicon_floor, const std::optional<fs::path>& embeddings) {
        std::shared_ptr<const PrecomputedEmbeddings> table;
        if (embeddings) table = std::make_shared<PrecomputedEmbeddings>(load_precomputed(*embeddings));
        Model mo{load_checkpoint(manifest, table),
                 std::make_shared<FrequencyLexicon>(FrequencyLexicon::load(lexicon, lexicon_floor))};
        if (mo.model.catalog_version != FeatureCatalog::standard().version()) {
          throw ConfigError("checkpoint was trained with a different feature catalog");
        }
        return mo;
      },
      py::arg("manifest"), py::arg("lexicon"), py::arg("lexicon_floor") = 0.01, py::arg("embeddings") = py::none());

  m.def(
      "bootstrap_study",
      [](const fs::path& pool_dir, const fs::path& corpus, const std::vector<std::size_t>& sizes,
         const std::vector<std::string>& compositions, std::size_t resamples, std::uint64_t seed, double floor,
         int jobs) {
        const auto pool = load_pool_dir(pool_dir);
        const auto labels = pool_labels(pool, load_corpus(corpus));
        BootstrapOptions o;
        o.sizes = sizes;
        o.compositions.clear();
        for (const auto& c : compositions) o.compositions.push_back(parse_composition(c));
        o.n_resamples = resamples;
        o.seed = seed;
        o.floor = floor;
        o.jobs = jobs;
        BootstrapReport report;
        {
          py::gil_scoped_release release;
          report = bootstrap_study(pool, labels, o);
        }
        py::list out;
        for (const auto& r : report) out.append(row_dict(r));
        return out;
      },
      py::arg("pool_dir"), py::arg("corpus"), py::arg("sizes"),
      py::arg("compositions") = std::vector<std::string>{"a", "b", "mixed"}, py::arg("resamples") = 1000,
      py::arg("seed") = 0, py::arg("floor") = kDefaultFloor, py::arg("jobs") = 1);

  m.def(
      "run",
      [](const std::vector<std::string>& args) {
        std::ostringstream out;
        std::ostringstream err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a command of the readability tool; returns (exit_code, stdout, stderr).");
}
