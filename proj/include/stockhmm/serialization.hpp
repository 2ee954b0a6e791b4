#pragma once

#include <filesystem>
#include <string>

#include "stockhmm/hmm.hpp"

namespace stockhmm {

struct ModelDocument {
  GaussianHmm model;
  FitConfig config;  // the configuration the model was fitted with
};

/// Versioned, human-readable model document (JSON, fixed field order).
/// Numbers are printed at round-trip-exact precision, so
/// deserialize_model(serialize_model(m, c)) reproduces every parameter
/// bit for bit.
std::string serialize_model(const GaussianHmm& model, const FitConfig& config);

/// Throws DataError on malformed documents, wrong version tags, or
/// parameters that violate a model invariant.
ModelDocument deserialize_model(const std::string& text);

void save_model(const std::filesystem::path& path, const GaussianHmm& model,
                const FitConfig& config);
ModelDocument load_model(const std::filesystem::path& path);

}  // namespace stockhmm
