#include <json.hpp>

#include "tokenscope/error.hpp"
#include "tokenscope/gam.hpp"
#include "tokenscope/support.hpp"

namespace tokenscope {
namespace {

using json = nlohmann::ordered_json;

constexpr const char* kFormat = "tokenscope-gam";
constexpr int kVersion = 1;

const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path + "." + key, "missing field");
  return *it;
}

double number(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_number()) throw ParseError(path + "." + key, "expected a number");
  return v.get<double>();
}

std::uint64_t count(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_number_unsigned()) {
    throw ParseError(path + "." + key, "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::vector<double> numbers(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  const std::string here = path + "." + key;
  if (!v.is_array()) throw ParseError(here, "expected an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) {
      throw ParseError(here + "[" + std::to_string(i) + "]", "expected a number");
    }
    out.push_back(v[i].get<double>());
  }
  return out;
}

}  // namespace

std::string model_to_json(const GamModel& model) {
  json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["beta0"] = model.beta0;
  json terms = json::array();
  for (std::size_t t = 0; t < kFeatureCount; ++t) {
    const SmoothTerm& term = model.terms[t];
    json entry;
    entry["feature"] = feature_name(t);
    entry["lambda"] = term.lambda;
    entry["feature_min"] = term.feature_min;
    entry["feature_max"] = term.feature_max;
    entry["knots"] = term.knots;
    entry["coefficients"] = term.coefficients;
    terms.push_back(std::move(entry));
  }
  doc["terms"] = std::move(terms);
  json training;
  training["rows"] = model.training.rows;
  training["groups"] = model.training.groups;
  training["cv_folds"] = model.training.cv_folds;
  training["cv_rmse"] = model.training.cv_rmse;
  training["train_rmse"] = model.training.train_rmse;
  training["seed"] = model.training.seed;
  doc["training"] = std::move(training);
  return doc.dump(2) + "\n";
}

GamModel model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("$", std::string("malformed model document: ") + e.what());
  }
  const std::string root = "$";
  const json& format = field(doc, "format", root);
  if (!format.is_string() || format.get<std::string>() != kFormat) {
    throw ParseError("$.format", "not a tokenscope GAM model");
  }
  if (count(doc, "version", root) != kVersion) {
    throw ParseError("$.version", "unsupported model version");
  }

  GamModel model;
  model.beta0 = number(doc, "beta0", root);
  const json& terms = field(doc, "terms", root);
  if (!terms.is_array() || terms.size() != kFeatureCount) {
    throw ParseError("$.terms", "expected an array of 4 terms");
  }
  for (std::size_t t = 0; t < kFeatureCount; ++t) {
    const std::string path = "$.terms[" + std::to_string(t) + "]";
    const json& entry = terms[t];
    const json& name = field(entry, "feature", path);
    if (!name.is_string() || name.get<std::string>() != feature_name(t)) {
      throw ParseError(path + ".feature", std::string("expected '") + feature_name(t) + "'");
    }
    SmoothTerm& term = model.terms[t];
    term.lambda = number(entry, "lambda", path);
    term.feature_min = number(entry, "feature_min", path);
    term.feature_max = number(entry, "feature_max", path);
    term.knots = numbers(entry, "knots", path);
    term.coefficients = numbers(entry, "coefficients", path);
    if (term.knots.size() < 2) throw ParseError(path + ".knots", "need at least 2 knots");
    for (std::size_t i = 1; i < term.knots.size(); ++i) {
      if (!(term.knots[i] > term.knots[i - 1])) {
        throw ParseError(path + ".knots[" + std::to_string(i) + "]",
                         "knots must be strictly ascending");
      }
    }
    if (term.coefficients.size() != term.knots.size() + 2) {
      throw ParseError(path + ".coefficients", "expected " +
                                                   std::to_string(term.knots.size() + 2) +
                                                   " coefficients for " +
                                                   std::to_string(term.knots.size()) + " knots");
    }
  }
  const json& training = field(doc, "training", root);
  const std::string tpath = "$.training";
  model.training.rows = count(training, "rows", tpath);
  model.training.groups = count(training, "groups", tpath);
  model.training.cv_folds = count(training, "cv_folds", tpath);
  model.training.cv_rmse = number(training, "cv_rmse", tpath);
  model.training.train_rmse = number(training, "train_rmse", tpath);
  model.training.seed = count(training, "seed", tpath);
  return model;
}

void save_model(const GamModel& model, const std::filesystem::path& path) {
  write_file(path, model_to_json(model));
}

GamModel load_model(const std::filesystem::path& path) {
  return model_from_json(read_file(path));
}

}  // namespace tokenscope
