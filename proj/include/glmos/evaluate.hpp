#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "glmos/dataset.hpp"
#include "glmos/model.hpp"

namespace glmos {

// Per-row prediction error to average. Brier: squared difference between the
// observed response and the predicted value (for the logistic family this is
// the squared distance between the 0/1 outcome and the probability, so it is
// comparable across model families). Deviance: -2 times the mean Bernoulli
// log-likelihood, logistic family only.
enum class Metric { Brier, Deviance };

const char* to_string(Metric m);
Metric metric_from_string(const std::string& s);

double prediction_error(Metric m, Family family, const std::vector<double>& y,
                        const std::vector<double>& value);

// Fold assignment per row, values in [0, k). Stratified: rows are grouped by
// response value, each group is shuffled (Fisher-Yates on a seeded
// mt19937_64, so the assignment is reproducible across platforms) and dealt
// round-robin; fold sizes within a group differ by at most one. Unstratified
// does the same with a single group.
std::vector<int> split_folds(const std::vector<double>& y, int k,
                             std::uint64_t seed, bool stratified);

struct CvOptions {
  int folds = 10;
  std::uint64_t seed = 1;
  bool stratified = true;  // applies to the logistic family
  Metric metric = Metric::Brier;
  FitOptions fit;
};

struct CvResult {
  std::string label;
  double ape = 0.0;     // full fit scored on its own training rows
  double epe = 0.0;     // fold-size weighted mean of held-out fold errors
  double se_epe = 0.0;  // sd of fold errors (k-1 divisor) divided by sqrt(k)
  double mcr = 0.0;     // pooled held-out misclassification at 0.5, percent
  std::vector<double> fold_errors;
  std::vector<int> fold_sizes;
  std::vector<std::uint8_t> fold_converged;
  Model full_model;
  FitReport full_report;
  std::vector<std::string> notes;
};

// Fits on all complete rows (the apparent error and the returned model),
// then refits on each training fold and scores its held-out rows.
// Encoding, rare-category merging and fitting are redone per fold from the
// training rows alone. Fold fits run concurrently; the reduction order is fixed, so
// the report does not depend on scheduling.
CvResult cross_validate(const RawTable& table,
                        const std::vector<VariableSpec>& specs,
                        const DatasetOptions& opts, const CvOptions& cv,
                        const std::string& label);

}  // namespace glmos
