#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "glmos/errors.hpp"

namespace glmos {

enum class Kind { Continuous, OrderedCategorical, UnorderedCategorical };
enum class Level { Numeric, NominalStep, OrdinalStep, SplineNonmonotone, SplineMonotone };
enum class Family { Logistic, Linear };

const char* to_string(Kind k);
const char* to_string(Level l);
const char* to_string(Family f);
Kind kind_from_string(const std::string& s);
Level level_from_string(const std::string& s);
Family family_from_string(const std::string& s);

inline bool is_spline(Level l) {
  return l == Level::SplineNonmonotone || l == Level::SplineMonotone;
}
inline bool is_step(Level l) {
  return l == Level::NominalStep || l == Level::OrdinalStep;
}

// Per-variable analysis request, as it comes from the config file.
struct VariableSpec {
  std::string name;
  Kind kind = Kind::Continuous;
  Level level = Level::Numeric;
  int degree = 2;
  int interior_knots = 1;
  std::vector<std::string> order;  // explicit category order (ordered kinds)
};

// Raw delimited file, column-major, values still strings. Kept around so CV
// folds can re-encode their own training rows from scratch.
struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> columns;  // [col][row]
  std::size_t rows() const { return columns.empty() ? 0 : columns[0].size(); }
  int column_index(const std::string& name) const;  // -1 if absent
};

RawTable read_csv(const std::string& path, char delimiter = ',');
RawTable parse_csv(const std::string& text, char delimiter = ',');

// Compact category coding of one variable over a set of rows: g maps each row
// to a category; categories carry label, constituent raw labels (after
// merging), a numeric position, and the raw count d_c used as the
// standardization weight.
struct EncodedVariable {
  std::string name;
  Kind kind = Kind::Continuous;
  Level level = Level::Numeric;
  int degree = 2;
  int interior_knots = 1;

  std::vector<int32_t> g;
  std::vector<std::string> labels;
  std::vector<std::vector<std::string>> members;
  std::vector<double> values;
  std::vector<double> counts;
  bool rank_values = false;  // positions are ranks, not parsed numbers

  int num_categories() const { return static_cast<int>(labels.size()); }
  bool ordered() const { return kind != Kind::UnorderedCategorical; }
};

struct Dataset {
  Family family = Family::Logistic;
  std::string response;
  std::vector<double> y;
  std::vector<EncodedVariable> vars;
  std::vector<std::size_t> row_ids;   // positions in the originating RawTable
  std::vector<std::string> notes;     // merge log, level downgrades, ...
  std::vector<std::string> missing_tokens = {"", "NA"};
  std::size_t n() const { return y.size(); }
};

struct DatasetOptions {
  Family family = Family::Logistic;
  std::string response;
  std::vector<std::string> missing_tokens = {"", "NA"};
  int merge_min_count = 1;
};

// Category coding for one variable, no merging yet. `rows` selects the rows
// to encode (all when empty).
EncodedVariable encode_variable(const RawTable& table, const VariableSpec& spec,
                                const std::vector<std::size_t>& rows,
                                const std::vector<std::string>& missing_tokens);

// Folds categories with count < min_count into a neighbour (ordered kinds:
// adjacent category with the smaller count, ties to the left; unordered:
// the modal category). Notes describe every merge.
void merge_rare_categories(EncodedVariable& var, int min_count,
                           std::vector<std::string>* notes);

// Listwise deletion over response + used columns, category coding, rare-
// category merging and level validation (binary predictors drop to numeric,
// splines need enough categories, monotone levels need an ordered kind).
Dataset build_dataset(const RawTable& table, const std::vector<VariableSpec>& specs,
                      const DatasetOptions& opts,
                      const std::vector<std::size_t>& use_rows = {});

}  // namespace glmos
