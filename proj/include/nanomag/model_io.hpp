#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "nanomag/hamiltonian.hpp"

namespace nanomag {

/// Model file schema (version 1):
///
///   {
///     "name": "fe4",
///     "sites": [{"s": "5/2", "sublattice": "A", "label": "Fe3+ outer"}, ...],
///     "exchange": [{"i": 0, "j": 3, "J_kelvin": 1.0}, ...],
///     "dm": [{"i": 0, "j": 1, "Dz_kelvin": 0.1}, ...],
///     "source": "citation text"
///   }
///
/// `dm` and `source` are optional. Site indices are implicit (array order).
/// Unknown keys at any level are rejected.
nlohmann::json model_to_json(const SpinModel& model);
SpinModel model_from_json(const nlohmann::json& doc);

SpinModel load_model(const std::filesystem::path& path);
void save_model(const SpinModel& model, const std::filesystem::path& path);

}  // namespace nanomag
