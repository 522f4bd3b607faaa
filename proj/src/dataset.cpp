#include "glmos/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace glmos {

const char* to_string(Kind k) {
  switch (k) {
    case Kind::Continuous: return "continuous";
    case Kind::OrderedCategorical: return "ordered-categorical";
    case Kind::UnorderedCategorical: return "unordered-categorical";
  }
  return "?";
}

const char* to_string(Level l) {
  switch (l) {
    case Level::Numeric: return "numeric";
    case Level::NominalStep: return "nominal-step";
    case Level::OrdinalStep: return "ordinal-step";
    case Level::SplineNonmonotone: return "spline-nonmonotone";
    case Level::SplineMonotone: return "spline-monotone";
  }
  return "?";
}

const char* to_string(Family f) {
  return f == Family::Logistic ? "logistic" : "linear";
}

Kind kind_from_string(const std::string& s) {
  if (s == "continuous") return Kind::Continuous;
  if (s == "ordered-categorical") return Kind::OrderedCategorical;
  if (s == "unordered-categorical") return Kind::UnorderedCategorical;
  throw ConfigError("unknown variable kind '" + s + "'");
}

Level level_from_string(const std::string& s) {
  if (s == "numeric") return Level::Numeric;
  if (s == "nominal-step") return Level::NominalStep;
  if (s == "ordinal-step") return Level::OrdinalStep;
  if (s == "spline-nonmonotone") return Level::SplineNonmonotone;
  if (s == "spline-monotone") return Level::SplineMonotone;
  throw ConfigError("unknown scaling level '" + s + "'");
}

Family family_from_string(const std::string& s) {
  if (s == "logistic") return Family::Logistic;
  if (s == "linear") return Family::Linear;
  throw ConfigError("unknown family '" + s + "' (expected logistic or linear)");
}

int RawTable::column_index(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == name) return static_cast<int>(j);
  return -1;
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == delim) {
      out.push_back(field);
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(field);
  return out;
}

}  // namespace

RawTable parse_csv(const std::string& text, char delimiter) {
  RawTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.eof()) break;
    auto fields = split_line(line, delimiter);
    if (t.header.empty()) {
      t.header = fields;
      t.columns.resize(fields.size());
      continue;
    }
    if (fields.size() != t.header.size())
      throw DataError("line " + std::to_string(lineno) + ": expected " +
                      std::to_string(t.header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    for (std::size_t j = 0; j < fields.size(); ++j)
      t.columns[j].push_back(std::move(fields[j]));
  }
  if (t.header.empty()) throw DataError("empty input table");
  return t;
}

RawTable read_csv(const std::string& path, char delimiter) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str(), delimiter);
}

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

// Leading numeric prefix for natural ordering of labels like "15-19".
bool leading_number(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) return false;
  *out = v;
  return true;
}

}  // namespace

EncodedVariable encode_variable(const RawTable& table, const VariableSpec& spec,
                                const std::vector<std::size_t>& rows,
                                const std::vector<std::string>& missing_tokens) {
  int col = table.column_index(spec.name);
  if (col < 0) throw ConfigError("unknown column '" + spec.name + "'");
  const auto& raw = table.columns[col];

  std::vector<std::size_t> idx = rows;
  if (idx.empty()) {
    idx.resize(table.rows());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  }

  EncodedVariable var;
  var.name = spec.name;
  var.kind = spec.kind;
  var.level = spec.level;
  var.degree = spec.degree;
  var.interior_knots = spec.interior_knots;
  var.g.resize(idx.size());

  auto is_missing = [&](const std::string& s) {
    return std::find(missing_tokens.begin(), missing_tokens.end(), s) !=
           missing_tokens.end();
  };

  if (spec.kind == Kind::Continuous) {
    // Distinct values in ascending order; the label is the first spelling
    // seen for that value.
    std::map<double, std::string> seen;
    std::vector<double> parsed(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const std::string& s = raw[idx[i]];
      if (is_missing(s)) throw DataError("missing value reached encoding for '" + spec.name + "'");
      double v;
      if (!parse_number(s, &v))
        throw DataError("variable '" + spec.name + "': non-numeric value '" + s + "'");
      parsed[i] = v;
      seen.emplace(v, s);
    }
    std::map<double, int32_t> code;
    for (const auto& [v, s] : seen) {
      code[v] = static_cast<int32_t>(var.labels.size());
      var.labels.push_back(s);
      var.members.push_back({s});
      var.values.push_back(v);
    }
    var.counts.assign(var.labels.size(), 0.0);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      int32_t c = code[parsed[i]];
      var.g[i] = c;
      var.counts[c] += 1.0;
    }
    return var;
  }

  // Categorical kinds: determine the category order first.
  std::vector<std::string> order;
  std::map<std::string, int32_t> code;
  if (spec.kind == Kind::OrderedCategorical && !spec.order.empty()) {
    order = spec.order;
  } else {
    std::vector<std::string> distinct;
    for (std::size_t i : idx) {
      const std::string& s = raw[i];
      if (is_missing(s)) throw DataError("missing value reached encoding for '" + spec.name + "'");
      if (std::find(distinct.begin(), distinct.end(), s) == distinct.end())
        distinct.push_back(s);
    }
    if (spec.kind == Kind::UnorderedCategorical) {
      order = distinct;  // first appearance
    } else {
      // Ordered without an explicit order: sort numerically when possible,
      // else by the leading number of each label ("0-4" < "5-9" < "10-14").
      std::vector<std::pair<double, std::string>> keyed;
      for (const auto& s : distinct) {
        double k;
        if (parse_number(s, &k) || leading_number(s, &k)) {
          keyed.emplace_back(k, s);
        } else {
          throw ConfigError("variable '" + spec.name + "': cannot infer order of '" +
                            s + "'; declare \"order\" in the config");
        }
      }
      std::sort(keyed.begin(), keyed.end());
      for (const auto& [k, s] : keyed) order.push_back(s);
    }
  }

  bool all_numeric = true;
  std::vector<double> nums(order.size());
  for (std::size_t c = 0; c < order.size(); ++c)
    if (!parse_number(order[c], &nums[c])) { all_numeric = false; break; }
  bool use_values = all_numeric && spec.order.empty() && spec.kind == Kind::OrderedCategorical;
  var.rank_values = !use_values;

  for (std::size_t c = 0; c < order.size(); ++c) {
    code[order[c]] = static_cast<int32_t>(c);
    var.labels.push_back(order[c]);
    var.members.push_back({order[c]});
    var.values.push_back(use_values ? nums[c] : static_cast<double>(c + 1));
  }
  var.counts.assign(order.size(), 0.0);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    auto it = code.find(raw[idx[i]]);
    if (it == code.end())
      throw DataError("variable '" + spec.name + "': value '" + raw[idx[i]] +
                      "' not covered by the declared category order");
    var.g[i] = it->second;
    var.counts[it->second] += 1.0;
  }
  // A declared category can be absent from the analysed rows (e.g. a CV
  // training fold); drop it rather than carrying an inestimable category.
  for (int c = var.num_categories() - 1; c >= 0; --c) {
    if (var.counts[c] != 0.0) continue;
    var.labels.erase(var.labels.begin() + c);
    var.members.erase(var.members.begin() + c);
    var.values.erase(var.values.begin() + c);
    var.counts.erase(var.counts.begin() + c);
    for (auto& gi : var.g)
      if (gi > c) --gi;
  }
  return var;
}

namespace {

void merge_pair(EncodedVariable& var, int keep, int drop,
                std::vector<std::string>* notes) {
  // Fold category `drop` into `keep`; `keep` stays at its own position.
  double ck = var.counts[keep], cd = var.counts[drop];
  var.values[keep] = (ck * var.values[keep] + cd * var.values[drop]) / (ck + cd);
  var.counts[keep] += cd;
  if (notes)
    notes->push_back("variable '" + var.name + "': merged category '" +
                     var.labels[drop] + "' (count " + std::to_string((long)cd) +
                     ") into '" + var.labels[keep] + "'");
  // A merged label keeps left-to-right reading order for ordered kinds.
  if (keep < drop) {
    var.labels[keep] = var.labels[keep] + "+" + var.labels[drop];
    var.members[keep].insert(var.members[keep].end(),
                             var.members[drop].begin(), var.members[drop].end());
  } else {
    var.labels[keep] = var.labels[drop] + "+" + var.labels[keep];
    var.members[keep].insert(var.members[keep].begin(),
                             var.members[drop].begin(), var.members[drop].end());
  }
  var.labels.erase(var.labels.begin() + drop);
  var.members.erase(var.members.begin() + drop);
  var.values.erase(var.values.begin() + drop);
  var.counts.erase(var.counts.begin() + drop);
  for (auto& gi : var.g) {
    if (gi == drop) gi = static_cast<int32_t>(keep > drop ? keep - 1 : keep);
    else if (gi > drop) --gi;
  }
}

}  // namespace

void merge_rare_categories(EncodedVariable& var, int min_count,
                           std::vector<std::string>* notes) {
  if (min_count <= 1) return;
  for (;;) {
    int C = var.num_categories();
    int worst = -1;
    for (int c = 0; c < C; ++c)
      if (var.counts[c] < min_count && (worst < 0 || var.counts[c] < var.counts[worst]))
        worst = c;
    if (worst < 0) return;
    if (C <= 2)
      throw DataError("variable '" + var.name +
                      "': rare-category merging would leave fewer than 2 categories");
    int partner;
    if (var.ordered()) {
      // Adjacent neighbour with the smaller count; ties merge leftward.
      if (worst == 0) partner = 1;
      else if (worst == C - 1) partner = C - 2;
      else partner = (var.counts[worst - 1] <= var.counts[worst + 1]) ? worst - 1 : worst + 1;
    } else {
      partner = -1;  // modal category other than `worst`
      for (int c = 0; c < C; ++c)
        if (c != worst && (partner < 0 || var.counts[c] > var.counts[partner]))
          partner = c;
    }
    merge_pair(var, partner, worst, notes);
  }
}

Dataset build_dataset(const RawTable& table, const std::vector<VariableSpec>& specs,
                      const DatasetOptions& opts,
                      const std::vector<std::size_t>& use_rows) {
  Dataset ds;
  ds.family = opts.family;
  ds.response = opts.response;
  ds.missing_tokens = opts.missing_tokens;

  int ycol = table.column_index(opts.response);
  if (ycol < 0) throw ConfigError("unknown column '" + opts.response + "'");
  std::vector<int> cols;
  for (const auto& s : specs) {
    int c = table.column_index(s.name);
    if (c < 0) throw ConfigError("unknown column '" + s.name + "'");
    if (s.name == opts.response)
      throw ConfigError("response '" + opts.response + "' also listed as a predictor");
    cols.push_back(c);
  }

  auto is_missing = [&](const std::string& s) {
    return std::find(opts.missing_tokens.begin(), opts.missing_tokens.end(), s) !=
           opts.missing_tokens.end();
  };

  std::vector<std::size_t> candidates = use_rows;
  if (candidates.empty() && use_rows.empty()) {
    candidates.resize(table.rows());
    for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i] = i;
  }

  std::size_t dropped = 0;
  for (std::size_t i : candidates) {
    bool ok = !is_missing(table.columns[ycol][i]);
    for (int c : cols)
      if (ok && is_missing(table.columns[c][i])) ok = false;
    if (ok) ds.row_ids.push_back(i);
    else ++dropped;
  }
  if (dropped)
    ds.notes.push_back("listwise deletion dropped " + std::to_string(dropped) +
                       " incomplete row(s); " + std::to_string(ds.row_ids.size()) + " remain");
  if (ds.row_ids.size() < 2) throw DataError("fewer than 2 complete rows");

  ds.y.resize(ds.row_ids.size());
  for (std::size_t i = 0; i < ds.row_ids.size(); ++i) {
    const std::string& s = table.columns[ycol][ds.row_ids[i]];
    double v;
    if (!parse_number(s, &v))
      throw DataError("response '" + opts.response + "': non-numeric value '" + s + "'");
    if (opts.family == Family::Logistic && v != 0.0 && v != 1.0)
      throw DataError("response '" + opts.response + "': logistic family needs 0/1, got '" + s + "'");
    ds.y[i] = v;
  }
  if (opts.family == Family::Logistic) {
    double sum = 0;
    for (double v : ds.y) sum += v;
    if (sum == 0.0 || sum == static_cast<double>(ds.y.size()))
      throw DataError("response '" + opts.response + "' is single-class after deletion");
  }

  for (const auto& spec : specs) {
    EncodedVariable var = encode_variable(table, spec, ds.row_ids, opts.missing_tokens);
    merge_rare_categories(var, opts.merge_min_count, &ds.notes);
    int C = var.num_categories();
    if (C < 2)
      throw DataError("variable '" + spec.name + "' is constant over the analysed rows");

    if (C == 2 && var.level != Level::Numeric) {
      ds.notes.push_back("variable '" + spec.name +
                         "': binary, level downgraded to numeric");
      var.level = Level::Numeric;
    }
    if (var.level == Level::OrdinalStep && !var.ordered())
      throw ConfigError("variable '" + spec.name + "': ordinal-step needs an ordered kind");
    if (is_spline(var.level)) {
      if (!var.ordered())
        throw ConfigError("variable '" + spec.name + "': spline levels need an ordered kind");
      if (var.degree < 1)
        throw ConfigError("variable '" + spec.name + "': spline degree must be >= 1");
      if (var.interior_knots < 0)
        throw ConfigError("variable '" + spec.name + "': interior_knots must be >= 0");
      if (C < var.degree + var.interior_knots + 1)
        throw ConfigError("variable '" + spec.name + "': spline with degree " +
                          std::to_string(var.degree) + " and " +
                          std::to_string(var.interior_knots) +
                          " interior knot(s) needs at least " +
                          std::to_string(var.degree + var.interior_knots + 1) +
                          " categories, have " + std::to_string(C));
    }
    if (var.level == Level::Numeric && !var.ordered() && C > 2)
      throw ConfigError("variable '" + spec.name +
                        "': numeric level needs ordered values (or a binary variable)");
    ds.vars.push_back(std::move(var));
  }
  return ds;
}

}  // namespace glmos
