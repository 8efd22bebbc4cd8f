#pragma once

#include <string>

#include <json.hpp>

#include "hyperlq/models.hpp"
#include "hyperlq/riccati.hpp"

namespace hyperlq {

/// Schema: {"kind": "spectral_system", "label", "n_modes", "n_controls",
/// "lambdas": [..], "B_mod": [row-major], "Q_obs": [row-major]}.
nlohmann::json ToJson(const SpectralSystem& system);
SpectralSystem SystemFromJson(const nlohmann::json& j);

/// Schema: {"kind": "riccati_solution", "dim", "horizon" (null when infinite),
/// "residual", "method", "E": [row-major]}.
nlohmann::json ToJson(const RiccatiSolution& solution);
RiccatiSolution RiccatiFromJson(const nlohmann::json& j);

void SaveJson(const std::string& path, const nlohmann::json& j);
nlohmann::json LoadJson(const std::string& path);

}  // namespace hyperlq
