#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "glmos/config.hpp"
#include "glmos/errors.hpp"
#include "glmos/evaluate.hpp"
#include "glmos/glm_os.hpp"
#include "glmos/model_io.hpp"
#include "glmos/os_linear.hpp"
#include "glmos/svg.hpp"

namespace fs = std::filesystem;
using namespace glmos;

namespace {

std::string g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string f6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Quote a CSV field only when it needs it.
std::string q(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    out += c;
  }
  out += "\"";
  return out;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write '" + path.string() + "'");
  return f;
}

// Data paths in a config are relative to the config file itself.
std::string resolve_data(const std::string& config_path, const std::string& data,
                         const std::string& override_path) {
  if (!override_path.empty()) return override_path;
  fs::path p(data);
  if (p.is_absolute()) return data;
  return (fs::path(config_path).parent_path() / p).string();
}

struct CommonArgs {
  std::string config_path;
  std::string data_override;
  std::string out_dir = ".";
  bool no_timestamp = false;
  std::optional<int> merge_min_count;
  std::optional<std::uint64_t> seed;
  std::optional<int> folds;
  std::optional<std::string> metric;
};

RunConfig load_and_override(const CommonArgs& a) {
  RunConfig cfg = load_config(a.config_path);
  cfg.data = resolve_data(a.config_path, cfg.data, a.data_override);
  if (a.merge_min_count) cfg.merge_min_count = *a.merge_min_count;
  if (a.seed) cfg.cv.seed = *a.seed;
  if (a.folds) cfg.cv.folds = *a.folds;
  if (a.metric) cfg.cv.metric = metric_from_string(*a.metric);
  if (cfg.merge_min_count < 1) throw ConfigError("merge_min_count must be >= 1");
  if (cfg.cv.folds < 2) throw ConfigError("cv.folds must be >= 2");
  return cfg;
}

void write_quantifications(const Model& model, const fs::path& path) {
  auto f = open_out(path);
  f << "variable,category,original_rank,count,quantification,beta\n";
  for (const auto& var : model.vars)
    for (int c = 0; c < var.num_categories(); ++c)
      f << q(var.name) << "," << q(var.labels[c]) << "," << c + 1 << ","
        << g(var.counts[c]) << "," << g(var.v[c]) << "," << g(var.beta) << "\n";
}

void write_fit_log(const Model& model, const FitReport& rep,
                   const std::vector<std::string>& data_notes,
                   const fs::path& path) {
  auto f = open_out(path);
  f << "family: " << to_string(model.family) << "\n";
  f << "rows: " << model.train_n << "\n";
  f << "intercept: " << g(model.intercept) << "\n";
  for (const auto& var : model.vars)
    f << "beta[" << var.name << "]: " << g(var.beta) << " (" << to_string(var.level)
      << ", " << var.num_categories() << " categories)\n";
  f << "cycles: " << rep.cycles << "\n";
  f << "converged: " << (rep.converged ? "yes" : "no") << "\n";
  f << "final_loss: " << g(rep.final_loss) << "\n";
  f << "step_halvings: " << rep.halvings << "\n";
  f << "reverted_updates: " << rep.reverts << "\n";
  f << "skipped_v_updates: " << rep.skipped_v_updates << "\n";
  f << "degenerate_restrictions: " << rep.degenerate_skips << "\n";
  for (const auto& n : data_notes) f << "note: " << n << "\n";
  for (const auto& w : rep.warnings) f << "warning: " << w << "\n";
  for (const auto& e : rep.events) f << "event: " << e << "\n";
  f << "loss_trace:\n";
  for (std::size_t i = 0; i < rep.loss_trace.size(); ++i)
    f << "  " << i << " " << g(rep.loss_trace[i]) << "\n";
}

void write_plots(const Model& model, const fs::path& dir, bool timestamp) {
  for (const auto& var : model.vars) {
    write_transformation_svg(var, (dir / ("plot_" + var.name + ".svg")).string(),
                             timestamp);
    PlotData pd = transformation_plot_data(var);
    auto f = open_out(dir / ("plotdata_" + var.name + ".csv"));
    f << "part,x,y,count\n";
    for (const auto& p : pd.curve)
      f << "curve," << g(p.x) << "," << g(p.y) << ",\n";
    for (const auto& p : pd.points)
      f << "point," << g(p.x) << "," << g(p.y) << "," << g(p.count) << "\n";
  }
}

int cmd_fit(const CommonArgs& a, const std::string& variant_label) {
  RunConfig cfg = load_and_override(a);
  std::vector<VariableSpec> specs = cfg.variables;
  std::string label = cfg.label;
  if (!variant_label.empty()) {
    bool found = false;
    for (const auto& vt : cfg.variants) {
      if (vt.label != variant_label) continue;
      specs = resolve_variant(cfg, vt);
      label = vt.label;
      found = true;
      break;
    }
    if (!found) throw ConfigError("unknown variant '" + variant_label + "'");
  }

  RawTable table = read_csv(cfg.data, cfg.delimiter);
  Dataset ds = build_dataset(table, specs, dataset_options(cfg));

  Model model;
  FitReport rep;
  if (cfg.family == Family::Logistic) {
    auto r = fit_glm_os(ds, cfg.fit);
    model = std::move(r.model);
    rep = std::move(r.report);
  } else {
    auto r = fit_os_linear(ds, cfg.fit);
    model = std::move(r.model);
    rep = std::move(r.report);
  }

  fs::path out(a.out_dir);
  fs::create_directories(out);
  save_model(model, (out / "model.json").string());
  write_quantifications(model, out / "quantifications.csv");
  write_fit_log(model, rep, ds.notes, out / "fit_log.txt");
  write_plots(model, out, !a.no_timestamp);

  std::cout << label << ": " << (rep.converged ? "converged" : "NOT converged")
            << " in " << rep.cycles << " cycles, final loss " << g(rep.final_loss)
            << ", intercept " << g(model.intercept) << "\n";
  for (const auto& w : rep.warnings) std::cout << "warning: " << w << "\n";
  return 0;
}

int cmd_cv(const CommonArgs& a) {
  RunConfig cfg = load_and_override(a);
  RawTable table = read_csv(cfg.data, cfg.delimiter);

  struct Row {
    std::string label;
    CvResult res;
  };
  std::vector<Row> rows;
  {
    CvResult r = cross_validate(table, cfg.variables, dataset_options(cfg),
                                cfg.cv, cfg.label);
    rows.push_back({cfg.label, std::move(r)});
  }
  for (const auto& vt : cfg.variants) {
    CvResult r = cross_validate(table, resolve_variant(cfg, vt),
                                dataset_options(cfg), cfg.cv, vt.label);
    rows.push_back({vt.label, std::move(r)});
  }

  fs::path out(a.out_dir);
  fs::create_directories(out);
  auto f = open_out(out / "cv_report.csv");
  f << "model,APE,EPE,SE_EPE,MCR_percent\n";
  for (const auto& row : rows) {
    f << q(row.label) << "," << f6(row.res.ape) << "," << f6(row.res.epe) << ","
      << f6(row.res.se_epe) << ",";
    if (std::isnan(row.res.mcr)) f << "NA";
    else f << f6(row.res.mcr);
    f << "\n";
  }

  std::cout << "model,APE,EPE,SE_EPE,MCR_percent\n";
  for (const auto& row : rows) {
    std::cout << row.label << "," << f6(row.res.ape) << "," << f6(row.res.epe)
              << "," << f6(row.res.se_epe) << ",";
    if (std::isnan(row.res.mcr)) std::cout << "NA";
    else std::cout << f6(row.res.mcr);
    std::cout << "\n";
    for (const auto& n : row.res.notes)
      std::cout << "  note(" << row.label << "): " << n << "\n";
  }
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                char delimiter, const std::string& out_path) {
  Model model = load_model(model_path);
  RawTable table = read_csv(data_path, delimiter);
  Prediction pred = predict(model, table);

  auto f = open_out(out_path);
  if (model.family == Family::Logistic) {
    f << "row,probability,classification,unseen_category\n";
    for (std::size_t i = 0; i < pred.value.size(); ++i)
      f << i + 1 << "," << f6(pred.value[i]) << ","
        << (pred.value[i] > 0.5 ? 1 : 0) << "," << int(pred.flagged[i]) << "\n";
  } else {
    f << "row,prediction,unseen_category\n";
    for (std::size_t i = 0; i < pred.value.size(); ++i)
      f << i + 1 << "," << f6(pred.value[i]) << "," << int(pred.flagged[i]) << "\n";
  }
  std::cout << "wrote " << pred.value.size() << " predictions to " << out_path
            << "\n";
  return 0;
}

int cmd_plotdata(const std::string& model_path, const std::string& out_dir,
                 bool no_timestamp) {
  Model model = load_model(model_path);
  fs::path out(out_dir);
  fs::create_directories(out);
  write_plots(model, out, !no_timestamp);
  std::cout << "wrote plots for " << model.vars.size() << " variable(s) to "
            << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Logistic and linear regression with optimal scaling"};
  app.require_subcommand(1);

  CommonArgs a;
  std::string variant_label;
  std::string model_path, data_path, pred_out = "predictions.csv";
  std::string plot_model, plot_out = ".";
  bool plot_no_timestamp = false;
  std::string pred_delim = ",";

  auto add_common = [&](CLI::App* c, bool with_cv_flags) {
    c->add_option("--config", a.config_path, "JSON run configuration")->required();
    c->add_option("--data", a.data_override, "override the data path in the config");
    c->add_option("--out", a.out_dir, "output directory");
    c->add_option("--merge-min-count", a.merge_min_count,
                  "merge categories rarer than this count");
    if (with_cv_flags) {
      c->add_option("--seed", a.seed, "fold assignment seed");
      c->add_option("--folds", a.folds, "number of folds");
      c->add_option("--metric", a.metric, "brier or deviance");
    }
  };

  CLI::App* fit = app.add_subcommand("fit", "fit one model and write its artifacts");
  add_common(fit, false);
  fit->add_option("--variant", variant_label, "fit this variant instead of the base");
  fit->add_flag("--no-timestamp", a.no_timestamp,
                "omit the generation-time comment from SVG output");

  CLI::App* cv = app.add_subcommand("cv", "cross-validate the base model and all variants");
  add_common(cv, true);

  CLI::App* pr = app.add_subcommand("predict", "apply a saved model to new rows");
  pr->add_option("--model", model_path, "model.json from a fit")->required();
  pr->add_option("--data", data_path, "CSV with the predictor columns")->required();
  pr->add_option("--delimiter", pred_delim, "field delimiter");
  pr->add_option("--out", pred_out, "output CSV path");

  CLI::App* pl = app.add_subcommand("plotdata", "emit transformation plots from a saved model");
  pl->add_option("--model", plot_model, "model.json from a fit")->required();
  pl->add_option("--out", plot_out, "output directory");
  pl->add_flag("--no-timestamp", plot_no_timestamp,
               "omit the generation-time comment from SVG output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) return cmd_fit(a, variant_label);
    if (cv->parsed()) return cmd_cv(a);
    if (pr->parsed()) {
      if (pred_delim.size() != 1) throw ConfigError("delimiter must be a single character");
      return cmd_predict(model_path, data_path, pred_delim[0], pred_out);
    }
    if (pl->parsed()) return cmd_plotdata(plot_model, plot_out, plot_no_timestamp);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
