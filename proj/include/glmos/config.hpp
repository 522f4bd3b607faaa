#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "glmos/dataset.hpp"
#include "glmos/evaluate.hpp"

namespace glmos {

// A named set of per-variable overrides on top of the base variable list.
// Running a config with variants produces one fitted model per variant plus
// the base model, all sharing data handling and fold assignments.
struct Variant {
  struct Override {
    std::optional<Level> level;
    std::optional<int> degree;
    std::optional<int> interior_knots;
  };
  std::string label;
  std::vector<std::pair<std::string, Override>> overrides;
};

struct RunConfig {
  std::string data;
  std::string response;
  Family family = Family::Logistic;
  char delimiter = ',';
  std::vector<std::string> missing_tokens = {"", "NA"};
  int merge_min_count = 1;
  std::string output_dir = ".";
  std::string label = "base";
  FitOptions fit;
  CvOptions cv;
  std::vector<VariableSpec> variables;  // order fixes the update cycle
  std::vector<Variant> variants;
};

// Strict parse: unknown keys raise ConfigError. Defaults are materialized,
// so parse(serialize(parse(text))) == parse(text).
RunConfig config_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json config_to_json(const RunConfig& cfg);
RunConfig load_config(const std::string& path);

// Base variable list with one variant's overrides applied.
std::vector<VariableSpec> resolve_variant(const RunConfig& cfg,
                                          const Variant& variant);

DatasetOptions dataset_options(const RunConfig& cfg);

}  // namespace glmos
