#include "glmos/config.hpp"

#include <fstream>

#include "glmos/errors.hpp"

namespace glmos {

using json = nlohmann::ordered_json;

namespace {

void check_keys(const json& j, const char* where,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, val] : j.items()) {
    (void)val;
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) { ok = true; break; }
    if (!ok)
      throw ConfigError(std::string("unknown key '") + key + "' in " + where);
  }
}

VariableSpec variable_from_json(const json& v) {
  if (!v.is_object()) throw ConfigError("each variable must be an object");
  check_keys(v, "variable", {"name", "kind", "level", "degree", "interior_knots", "order"});
  VariableSpec spec;
  spec.name = v.at("name").get<std::string>();
  spec.kind = kind_from_string(v.value("kind", "continuous"));
  spec.level = level_from_string(v.value("level", "numeric"));
  spec.degree = v.value("degree", 2);
  spec.interior_knots = v.value("interior_knots", 1);
  if (v.contains("order")) spec.order = v.at("order").get<std::vector<std::string>>();
  return spec;
}

Variant::Override override_from_json(const json& o) {
  Variant::Override ov;
  if (o.is_string()) {
    ov.level = level_from_string(o.get<std::string>());
    return ov;
  }
  if (!o.is_object())
    throw ConfigError("variant override must be a level name or an object");
  check_keys(o, "variant override", {"level", "degree", "interior_knots"});
  if (o.contains("level")) ov.level = level_from_string(o.at("level").get<std::string>());
  if (o.contains("degree")) ov.degree = o.at("degree").get<int>();
  if (o.contains("interior_knots")) ov.interior_knots = o.at("interior_knots").get<int>();
  return ov;
}

}  // namespace

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config root must be an object");
  check_keys(j, "config",
             {"data", "response", "family", "delimiter", "missing_tokens",
              "merge_min_count", "output_dir", "label", "fit", "cv",
              "variables", "variants"});

  RunConfig cfg;
  cfg.data = j.at("data").get<std::string>();
  cfg.response = j.at("response").get<std::string>();
  cfg.family = family_from_string(j.value("family", "logistic"));

  std::string delim = j.value("delimiter", ",");
  if (delim.size() != 1) throw ConfigError("delimiter must be a single character");
  cfg.delimiter = delim[0];

  if (j.contains("missing_tokens"))
    cfg.missing_tokens = j.at("missing_tokens").get<std::vector<std::string>>();
  cfg.merge_min_count = j.value("merge_min_count", 1);
  if (cfg.merge_min_count < 1) throw ConfigError("merge_min_count must be >= 1");
  cfg.output_dir = j.value("output_dir", ".");
  cfg.label = j.value("label", "base");

  // Linear least squares converges faster per digit, so it gets the tighter
  // default tolerance.
  cfg.fit.tol = cfg.family == Family::Logistic ? 1e-8 : 1e-9;
  if (j.contains("fit")) {
    const json& f = j.at("fit");
    check_keys(f, "fit", {"tolerance", "max_cycles"});
    cfg.fit.tol = f.value("tolerance", cfg.fit.tol);
    cfg.fit.max_cycles = f.value("max_cycles", cfg.fit.max_cycles);
    if (cfg.fit.tol <= 0) throw ConfigError("fit.tolerance must be positive");
    if (cfg.fit.max_cycles < 1) throw ConfigError("fit.max_cycles must be >= 1");
  }
  if (j.contains("cv")) {
    const json& c = j.at("cv");
    check_keys(c, "cv", {"folds", "seed", "stratified", "metric"});
    cfg.cv.folds = c.value("folds", cfg.cv.folds);
    cfg.cv.seed = c.value("seed", cfg.cv.seed);
    cfg.cv.stratified = c.value("stratified", cfg.cv.stratified);
    cfg.cv.metric = metric_from_string(c.value("metric", "brier"));
    if (cfg.cv.folds < 2) throw ConfigError("cv.folds must be >= 2");
  }
  cfg.cv.fit = cfg.fit;
  if (cfg.cv.metric == Metric::Deviance && cfg.family != Family::Logistic)
    throw ConfigError("deviance metric needs the logistic family");

  if (!j.contains("variables") || !j.at("variables").is_array() ||
      j.at("variables").empty())
    throw ConfigError("config needs a non-empty \"variables\" array");
  for (const auto& v : j.at("variables"))
    cfg.variables.push_back(variable_from_json(v));

  if (j.contains("variants")) {
    for (const auto& vt : j.at("variants")) {
      check_keys(vt, "variant", {"label", "levels"});
      Variant variant;
      variant.label = vt.at("label").get<std::string>();
      for (const auto& [name, ov] : vt.at("levels").items())
        variant.overrides.emplace_back(name, override_from_json(ov));
      cfg.variants.push_back(std::move(variant));
    }
  }
  return cfg;
}

json config_to_json(const RunConfig& cfg) {
  json j;
  j["data"] = cfg.data;
  j["response"] = cfg.response;
  j["family"] = to_string(cfg.family);
  j["delimiter"] = std::string(1, cfg.delimiter);
  j["missing_tokens"] = cfg.missing_tokens;
  j["merge_min_count"] = cfg.merge_min_count;
  j["output_dir"] = cfg.output_dir;
  j["label"] = cfg.label;
  j["fit"] = {{"tolerance", cfg.fit.tol}, {"max_cycles", cfg.fit.max_cycles}};
  j["cv"] = {{"folds", cfg.cv.folds},
             {"seed", cfg.cv.seed},
             {"stratified", cfg.cv.stratified},
             {"metric", to_string(cfg.cv.metric)}};
  json vars = json::array();
  for (const auto& v : cfg.variables) {
    json o;
    o["name"] = v.name;
    o["kind"] = to_string(v.kind);
    o["level"] = to_string(v.level);
    o["degree"] = v.degree;
    o["interior_knots"] = v.interior_knots;
    if (!v.order.empty()) o["order"] = v.order;
    vars.push_back(std::move(o));
  }
  j["variables"] = std::move(vars);
  if (!cfg.variants.empty()) {
    json vts = json::array();
    for (const auto& vt : cfg.variants) {
      json o;
      o["label"] = vt.label;
      json levels;
      for (const auto& [name, ov] : vt.overrides) {
        json ob;
        if (ov.level) ob["level"] = to_string(*ov.level);
        if (ov.degree) ob["degree"] = *ov.degree;
        if (ov.interior_knots) ob["interior_knots"] = *ov.interior_knots;
        levels[name] = std::move(ob);
      }
      o["levels"] = std::move(levels);
      vts.push_back(std::move(o));
    }
    j["variants"] = std::move(vts);
  }
  return j;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(f, nullptr, true, true);  // allow // and /* */ comments
  } catch (const std::exception& e) {
    throw ConfigError("cannot parse '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

std::vector<VariableSpec> resolve_variant(const RunConfig& cfg,
                                          const Variant& variant) {
  std::vector<VariableSpec> out = cfg.variables;
  for (const auto& [name, ov] : variant.overrides) {
    bool found = false;
    for (auto& spec : out) {
      if (spec.name != name) continue;
      if (ov.level) spec.level = *ov.level;
      if (ov.degree) spec.degree = *ov.degree;
      if (ov.interior_knots) spec.interior_knots = *ov.interior_knots;
      found = true;
      break;
    }
    if (!found)
      throw ConfigError("variant '" + variant.label +
                        "' overrides unknown variable '" + name + "'");
  }
  return out;
}

DatasetOptions dataset_options(const RunConfig& cfg) {
  DatasetOptions opts;
  opts.family = cfg.family;
  opts.response = cfg.response;
  opts.missing_tokens = cfg.missing_tokens;
  opts.merge_min_count = cfg.merge_min_count;
  return opts;
}

}  // namespace glmos
