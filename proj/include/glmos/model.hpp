#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "glmos/dataset.hpp"
#include "glmos/scaling.hpp"

namespace glmos {

// One fitted predictor: its category coding, the standardized quantification
// vector v, the coefficient beta, and whatever is needed to transform new
// raw values (a z-score for numeric levels, the member lookup for step
// levels, the raw-scale spline curve plus its standardization for splines).
struct FittedVariable {
  std::string name;
  Kind kind = Kind::Continuous;
  Level level = Level::Numeric;

  std::vector<std::string> labels;
  std::vector<std::vector<std::string>> members;
  std::vector<double> values;
  std::vector<double> counts;
  bool rank_values = false;  // category positions are ranks, not raw numbers

  std::vector<double> v;
  double beta = 0.0;
  Standardization std;

  bool has_spline = false;
  SplineBasis basis;
  Eigen::VectorXd spline_coef;
  double spline_intercept = 0.0;

  int num_categories() const { return static_cast<int>(labels.size()); }
};

struct Model {
  Family family = Family::Logistic;
  std::string response;
  double intercept = 0.0;  // logistic: beta_0; linear: the response mean
  std::size_t train_n = 0;
  std::vector<FittedVariable> vars;
  std::vector<std::string> missing_tokens = {"", "NA"};
};

struct FitOptions {
  double tol = 1e-8;    // relative loss change per cycle
  int max_cycles = 500;
  int step_halving_max = 20;
  bool verbose_trace = false;
};

struct FitReport {
  std::vector<double> loss_trace;  // end-of-cycle loss (negloglik or SSE)
  double final_loss = 0.0;
  int cycles = 0;
  bool converged = false;
  long halvings = 0;
  long reverts = 0;
  long skipped_v_updates = 0;  // |beta| below 1e-12, no v-update possible
  long degenerate_skips = 0;   // restriction collapsed to a constant
  std::vector<std::string> warnings;
  std::vector<std::string> events;
};

// Quantification of one raw cell; nullopt when the value is missing, is an
// unseen category under a step level, or cannot be placed on the variable's
// numeric scale. Callers map nullopt to 0 with a flag.
std::optional<double> transform_value(const FittedVariable& var,
                                      const std::string& raw);

struct Prediction {
  std::vector<double> value;     // probability (logistic) or fitted value
  std::vector<double> eta;       // linear predictor
  std::vector<uint8_t> flagged;  // any predictor fell back to 0
};

// Transforms each requested row of the raw table under the model. Empty
// `rows` means all rows. Rows are never dropped; unusable cells contribute
// quantification 0 and set the row's flag.
Prediction predict(const Model& model, const RawTable& table,
                   const std::vector<std::size_t>& rows = {});

}  // namespace glmos
