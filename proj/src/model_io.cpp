#include "glmos/model_io.hpp"

#include <fstream>
#include <sstream>

#include "glmos/errors.hpp"

namespace glmos {

using json = nlohmann::ordered_json;

json model_to_json(const Model& model) {
  json j;
  j["format"] = "glmos-model";
  j["version"] = 1;
  j["family"] = to_string(model.family);
  j["response"] = model.response;
  j["intercept"] = model.intercept;
  j["train_n"] = model.train_n;
  j["missing_tokens"] = model.missing_tokens;

  json vars = json::array();
  for (const auto& var : model.vars) {
    json v;
    v["name"] = var.name;
    v["kind"] = to_string(var.kind);
    v["level"] = to_string(var.level);
    v["beta"] = var.beta;
    v["rank_values"] = var.rank_values;
    v["standardization"] = {{"mean", var.std.mean}, {"scale", var.std.scale}};
    json cats = json::array();
    for (int c = 0; c < var.num_categories(); ++c) {
      json cat;
      cat["label"] = var.labels[c];
      cat["members"] = var.members[c];
      cat["value"] = var.values[c];
      cat["count"] = var.counts[c];
      cat["quantification"] = var.v[c];
      cats.push_back(std::move(cat));
    }
    v["categories"] = std::move(cats);
    if (var.has_spline) {
      json sp;
      sp["degree"] = var.basis.degree();
      sp["lo"] = var.basis.lo();
      sp["hi"] = var.basis.hi();
      sp["interior"] = var.basis.interior();
      sp["intercept"] = var.spline_intercept;
      std::vector<double> coef(var.spline_coef.data(),
                               var.spline_coef.data() + var.spline_coef.size());
      sp["coefficients"] = coef;
      v["spline"] = std::move(sp);
    }
    vars.push_back(std::move(v));
  }
  j["variables"] = std::move(vars);
  return j;
}

Model model_from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != "glmos-model")
    throw DataError("not a glmos-model artifact");
  if (j.value("version", 0) != 1)
    throw DataError("unsupported glmos-model version");

  Model m;
  m.family = family_from_string(j.at("family").get<std::string>());
  m.response = j.at("response").get<std::string>();
  m.intercept = j.at("intercept").get<double>();
  m.train_n = j.at("train_n").get<std::size_t>();
  m.missing_tokens = j.at("missing_tokens").get<std::vector<std::string>>();

  for (const auto& v : j.at("variables")) {
    FittedVariable var;
    var.name = v.at("name").get<std::string>();
    var.kind = kind_from_string(v.at("kind").get<std::string>());
    var.level = level_from_string(v.at("level").get<std::string>());
    var.beta = v.at("beta").get<double>();
    var.rank_values = v.at("rank_values").get<bool>();
    var.std.mean = v.at("standardization").at("mean").get<double>();
    var.std.scale = v.at("standardization").at("scale").get<double>();
    for (const auto& cat : v.at("categories")) {
      var.labels.push_back(cat.at("label").get<std::string>());
      var.members.push_back(cat.at("members").get<std::vector<std::string>>());
      var.values.push_back(cat.at("value").get<double>());
      var.counts.push_back(cat.at("count").get<double>());
      var.v.push_back(cat.at("quantification").get<double>());
    }
    if (v.contains("spline")) {
      const auto& sp = v.at("spline");
      var.has_spline = true;
      var.basis = SplineBasis::from_parts(sp.at("degree").get<int>(),
                                          sp.at("lo").get<double>(),
                                          sp.at("hi").get<double>(),
                                          sp.at("interior").get<std::vector<double>>());
      auto coef = sp.at("coefficients").get<std::vector<double>>();
      var.spline_coef = Eigen::Map<const Eigen::VectorXd>(coef.data(),
                                                          static_cast<Eigen::Index>(coef.size()));
      var.spline_intercept = sp.at("intercept").get<double>();
    }
    m.vars.push_back(std::move(var));
  }
  return m;
}

void save_model(const Model& model, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write '" + path + "'");
  f << model_to_json(model).dump(2) << "\n";
}

Model load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(f);
  } catch (const std::exception& e) {
    throw DataError("cannot parse '" + path + "': " + e.what());
  }
  return model_from_json(j);
}

}  // namespace glmos
