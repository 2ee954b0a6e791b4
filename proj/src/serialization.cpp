#include "stockhmm/serialization.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stockhmm/errors.hpp"

namespace stockhmm {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kFormatTag = "stockhmm-model";
constexpr int kFormatVersion = 1;

ordered_json vector_to_json(const Eigen::VectorXd& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

const ordered_json& require_field(const ordered_json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) {
    throw DataError(std::string("model document missing field \"") + key + "\"");
  }
  return *it;
}

double json_double(const ordered_json& value, const char* context) {
  if (!value.is_number()) {
    throw DataError(std::string("model document field ") + context + " must be a number");
  }
  return value.get<double>();
}

Eigen::VectorXd json_to_vector(const ordered_json& value, const char* context) {
  if (!value.is_array()) {
    throw DataError(std::string("model document field ") + context + " must be an array");
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(value.size()));
  Eigen::Index i = 0;
  for (const auto& item : value) out(i++) = json_double(item, context);
  return out;
}

Eigen::MatrixXd json_to_matrix(const ordered_json& value, const char* context) {
  if (!value.is_array() || value.empty()) {
    throw DataError(std::string("model document field ") + context +
                    " must be a non-empty array of arrays");
  }
  const auto rows = static_cast<Eigen::Index>(value.size());
  const auto cols = static_cast<Eigen::Index>(value.front().size());
  Eigen::MatrixXd out(rows, cols);
  Eigen::Index i = 0;
  for (const auto& row : value) {
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw DataError(std::string("model document field ") + context +
                      " has ragged or non-array rows");
    }
    Eigen::Index j = 0;
    for (const auto& item : row) out(i, j++) = json_double(item, context);
    ++i;
  }
  return out;
}

}  // namespace

std::string serialize_model(const GaussianHmm& model, const FitConfig& config) {
  if (!model.start_prob.allFinite() || !model.transition.allFinite()) {
    throw NumericError("cannot serialize non-finite model parameters");
  }
  for (const auto& mean : model.means) {
    if (!mean.allFinite()) throw NumericError("cannot serialize non-finite model parameters");
  }
  for (const auto& cov : model.covariances) {
    if (!cov.allFinite()) throw NumericError("cannot serialize non-finite model parameters");
  }

  ordered_json doc;
  doc["format"] = kFormatTag;
  doc["version"] = kFormatVersion;
  doc["n_states"] = model.n_states;
  doc["dim"] = model.dim;
  doc["start_prob"] = vector_to_json(model.start_prob);
  doc["transition"] = matrix_to_json(model.transition);
  ordered_json states = ordered_json::array();
  for (int j = 0; j < model.n_states; ++j) {
    ordered_json state;
    state["mean"] = vector_to_json(model.means[static_cast<std::size_t>(j)]);
    state["covariance"] = matrix_to_json(model.covariances[static_cast<std::size_t>(j)]);
    states.push_back(std::move(state));
  }
  doc["states"] = std::move(states);
  ordered_json fit;
  fit["max_iterations"] = config.max_iterations;
  fit["tolerance"] = config.tolerance;
  fit["regularization_floor"] = config.regularization_floor;
  fit["seed"] = config.seed;
  doc["fit_config"] = std::move(fit);
  return doc.dump(2) + "\n";
}

ModelDocument deserialize_model(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("invalid model JSON: ") + e.what());
  }
  if (!doc.is_object()) throw DataError("model document must be a JSON object");

  const auto& format = require_field(doc, "format");
  if (!format.is_string() || format.get<std::string>() != kFormatTag) {
    throw DataError("model document has unrecognized format tag");
  }
  const auto& version = require_field(doc, "version");
  if (!version.is_number_integer() || version.get<int>() != kFormatVersion) {
    throw DataError("model document has unsupported version");
  }

  ModelDocument out;
  out.model.n_states = require_field(doc, "n_states").get<int>();
  out.model.dim = require_field(doc, "dim").get<int>();
  if (out.model.n_states < 1 || out.model.dim < 1) {
    throw DataError("model document has non-positive n_states or dim");
  }
  out.model.start_prob = json_to_vector(require_field(doc, "start_prob"), "start_prob");
  out.model.transition = json_to_matrix(require_field(doc, "transition"), "transition");

  const auto& states = require_field(doc, "states");
  if (!states.is_array() || static_cast<int>(states.size()) != out.model.n_states) {
    throw DataError("model document field states must list one entry per state");
  }
  for (const auto& state : states) {
    out.model.means.push_back(json_to_vector(require_field(state, "mean"), "mean"));
    out.model.covariances.push_back(
        json_to_matrix(require_field(state, "covariance"), "covariance"));
  }

  const auto& fit = require_field(doc, "fit_config");
  out.config.max_iterations = require_field(fit, "max_iterations").get<int>();
  out.config.tolerance = json_double(require_field(fit, "tolerance"), "tolerance");
  out.config.regularization_floor =
      json_double(require_field(fit, "regularization_floor"), "regularization_floor");
  out.config.seed = require_field(fit, "seed").get<std::uint64_t>();

  try {
    out.model.validate();
  } catch (const NumericError& e) {
    throw DataError(std::string("invalid model: ") + e.what());
  }
  return out;
}

void save_model(const std::filesystem::path& path, const GaussianHmm& model,
                const FitConfig& config) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open file for writing: " + path.string());
  out << serialize_model(model, config);
  if (!out) throw DataError("failed writing model file: " + path.string());
}

ModelDocument load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return deserialize_model(buffer.str());
}

}  // namespace stockhmm
