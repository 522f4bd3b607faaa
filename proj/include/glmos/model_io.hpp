#pragma once

#include <string>

#include <json.hpp>

#include "glmos/model.hpp"

namespace glmos {

// JSON artifact, format "glmos-model" version 1. Keys are emitted in a fixed
// order and doubles use the shortest round-trip representation, so saving an
// unchanged model reproduces the file byte for byte.
nlohmann::ordered_json model_to_json(const Model& model);
Model model_from_json(const nlohmann::ordered_json& j);

void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace glmos
