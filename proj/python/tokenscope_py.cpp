#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "tokenscope/app.hpp"
#include "tokenscope/error.hpp"
#include "tokenscope/relevance.hpp"

namespace py = pybind11;
namespace ts = tokenscope;

namespace {

// Keyword arguments mirror the CLI flags.
ts::RunConfig make_config(const ts::EmbeddingTable& table, const std::string& oov,
                          bool filter_stopwords, double opposite_sign_weight,
                          const std::string& format,
                          const std::optional<std::filesystem::path>& gam_model,
                          std::size_t knots, std::size_t cv_folds, std::uint64_t seed,
                          double sim_threshold) {
  ts::RunConfig config;
  // The digest records where the vectors came from; for a loaded table that
  // is the path part of its source id.
  const auto& id = table.source_id();
  config.embeddings_path = id.substr(0, id.rfind("#sha256:"));
  config.oov = ts::parse_oov_policy(oov);
  config.filter_stopwords = filter_stopwords;
  config.scoring.opposite_sign_weight = opposite_sign_weight;
  config.format = ts::parse_output_format(format);
  config.gam_model_path = gam_model;
  config.knots = knots;
  config.cv_folds = cv_folds;
  config.seed = seed;
  config.sim_threshold = sim_threshold;
  ts::validate(config);
  return config;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Per-token relevance maps from static word embeddings.";

  static py::exception<ts::Error> error(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ts::Error& e) {
      py::object instance = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      instance.attr("kind") = ts::error_kind_name(e.kind());
      PyErr_SetObject(error.ptr(), instance.ptr());
    }
  });

  py::class_<ts::EmbeddingTable>(m, "EmbeddingTable")
      .def_static("load", &ts::load_glove, py::arg("path"),
                  py::call_guard<py::gil_scoped_release>())
      .def_static("from_entries", &ts::EmbeddingTable::from_entries, py::arg("dim"),
                  py::arg("entries"), py::arg("source_id") = "memory")
      .def_property_readonly("dim", &ts::EmbeddingTable::dim)
      .def_property_readonly("source_id", &ts::EmbeddingTable::source_id)
      .def("__len__", &ts::EmbeddingTable::size)
      .def("__contains__", &ts::EmbeddingTable::contains)
      .def("vector", [](const ts::EmbeddingTable& t, const std::string& word) {
        std::optional<ts::Vector> out;
        if (const auto v = t.find(word)) out.emplace(v->begin(), v->end());
        return out;
      });

  py::class_<ts::ScoreBreakdown>(m, "ScoreBreakdown")
      .def_readonly("angular", &ts::ScoreBreakdown::angular)
      .def_readonly("magnitude", &ts::ScoreBreakdown::magnitude)
      .def_readonly("dimensional", &ts::ScoreBreakdown::dimensional)
      .def_readonly("composite", &ts::ScoreBreakdown::composite)
      .def_readonly("cos_theta", &ts::ScoreBreakdown::cos_theta)
      .def("__repr__", [](const ts::ScoreBreakdown& b) {
        return "ScoreBreakdown(angular=" + std::to_string(b.angular) +
               ", magnitude=" + std::to_string(b.magnitude) +
               ", dimensional=" + std::to_string(b.dimensional) +
               ", composite=" + std::to_string(b.composite) + ")";
      });

  m.def(
      "tokenize",
      [](std::string_view text) {
        std::vector<std::string> out;
        for (const auto& t : ts::tokenize(text, ts::default_preprocess_config())) {
          out.push_back(t.normalized);
        }
        return out;
      },
      py::arg("text"), "Normalized tokens of `text` under the default settings.");

  m.def(
      "score_token",
      [](const ts::Vector& prompt_sum, const ts::Vector& token, double opposite_sign_weight) {
        if (prompt_sum.size() != token.size()) {
          throw ts::Error(ts::ErrorKind::kUsage, "vectors differ in length");
        }
        ts::ScoringConfig config;
        config.opposite_sign_weight = opposite_sign_weight;
        ts::validate(config);
        return ts::score_token(prompt_sum, token, config);
      },
      py::arg("prompt_sum"), py::arg("token"), py::arg("opposite_sign_weight") = 2.0,
      "Scores for removing `token` from a prompt whose summed vector is `prompt_sum`.");

  m.def("assign_band", [](double composite) { return ts::band_name(ts::assign_band(composite)); },
        py::arg("composite"));

  m.def(
      "analyze",
      [](const std::string& text, const ts::EmbeddingTable& table, const std::string& oov,
         bool filter_stopwords, double opposite_sign_weight, const std::string& format,
         const std::optional<std::filesystem::path>& gam_model) {
        const auto config = make_config(table, oov, filter_stopwords, opposite_sign_weight,
                                        format, gam_model, 10, 5, ts::kDefaultSeed,
                                        ts::kDefaultSimThreshold);
        py::gil_scoped_release release;
        return ts::run_analyze(text, config, table);
      },
      py::arg("text"), py::arg("table"), py::arg("oov") = "zero",
      py::arg("filter_stopwords") = true, py::arg("opposite_sign_weight") = 2.0,
      py::arg("format") = "json", py::arg("gam_model") = py::none(),
      "Relevance map of `text`, rendered as json, ansi or html.");

  m.def(
      "gap",
      [](const std::string& source, const std::string& summary, const ts::EmbeddingTable& table,
         double sim_threshold, const std::string& oov, bool filter_stopwords) {
        const auto config = make_config(table, oov, filter_stopwords, 2.0, "json",
                                        std::nullopt, 10, 5, ts::kDefaultSeed, sim_threshold);
        py::gil_scoped_release release;
        return ts::run_gap(source, summary, config, table);
      },
      py::arg("source"), py::arg("summary"), py::arg("table"),
      py::arg("sim_threshold") = ts::kDefaultSimThreshold, py::arg("oov") = "zero",
      py::arg("filter_stopwords") = true, "Gap report JSON for a source/summary pair.");

  m.def(
      "train_gam",
      [](const std::string& corpus, const ts::EmbeddingTable& table, std::size_t knots,
         std::size_t cv_folds, std::uint64_t seed) {
        const auto config = make_config(table, "zero", true, 2.0, "json", std::nullopt, knots,
                                        cv_folds, seed, ts::kDefaultSimThreshold);
        py::gil_scoped_release release;
        auto out = ts::run_train_gam(corpus, config, table);
        return std::make_pair(std::move(out.model_json), std::move(out.report));
      },
      py::arg("corpus"), py::arg("table"), py::arg("knots") = 10, py::arg("cv_folds") = 5,
      py::arg("seed") = ts::kDefaultSeed,
      "Fits the percentile model on a one-prompt-per-line corpus. Returns "
      "(model_json, report).");
}
