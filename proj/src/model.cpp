#include "glmos/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "glmos/errors.hpp"
#include "glmos/kernels.hpp"

namespace glmos {

namespace {

bool parse_number(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  if (!std::isfinite(v)) return false;
  *out = v;
  return true;
}

}  // namespace

std::optional<double> transform_value(const FittedVariable& var,
                                      const std::string& raw) {
  // Literal match against the original spellings (merged categories keep all
  // of the labels they absorbed).
  for (std::size_t c = 0; c < var.members.size(); ++c)
    for (const auto& m : var.members[c])
      if (m == raw) return var.v[c];

  // Category positions that are ranks carry no numeric scale a new value
  // could be placed on.
  if (var.rank_values) return std::nullopt;

  double x;
  if (!parse_number(raw, &x)) return std::nullopt;

  // Alternate spelling of a known category value.
  for (std::size_t c = 0; c < var.values.size(); ++c)
    if (var.values[c] == x) return var.v[c];

  switch (var.level) {
    case Level::Numeric:
      return var.std.apply(x);
    case Level::SplineNonmonotone:
    case Level::SplineMonotone: {
      if (!var.has_spline) return std::nullopt;
      std::vector<double> row(static_cast<std::size_t>(var.basis.dim()), 0.0);
      var.basis.eval_row(x, row.data());
      double t = var.spline_intercept;
      for (Eigen::Index j = 0; j < var.spline_coef.size(); ++j)
        t += var.spline_coef(j) * row[static_cast<std::size_t>(j)];
      return var.std.apply(t);
    }
    default:
      // Step levels are defined only on their categories.
      return std::nullopt;
  }
}

Prediction predict(const Model& model, const RawTable& table,
                   const std::vector<std::size_t>& rows) {
  std::vector<std::size_t> idx = rows;
  if (idx.empty()) {
    idx.resize(table.rows());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  }

  std::vector<int> cols(model.vars.size());
  for (std::size_t k = 0; k < model.vars.size(); ++k) {
    cols[k] = table.column_index(model.vars[k].name);
    if (cols[k] < 0)
      throw ConfigError("unknown column '" + model.vars[k].name + "'");
  }

  auto is_missing = [&](const std::string& s) {
    return std::find(model.missing_tokens.begin(), model.missing_tokens.end(), s) !=
           model.missing_tokens.end();
  };

  Prediction out;
  out.eta.assign(idx.size(), model.intercept);
  out.flagged.assign(idx.size(), 0);

  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t k = 0; k < model.vars.size(); ++k) {
      const std::string& raw = table.columns[cols[k]][idx[i]];
      std::optional<double> t;
      if (!is_missing(raw)) t = transform_value(model.vars[k], raw);
      if (t) out.eta[i] += model.vars[k].beta * *t;
      else out.flagged[i] = 1;
    }
  }

  out.value.resize(idx.size());
  if (model.family == Family::Logistic) {
    kernels::ops().sigmoid(out.eta.data(), out.value.data(), idx.size());
  } else {
    out.value = out.eta;
  }
  return out;
}

}  // namespace glmos
