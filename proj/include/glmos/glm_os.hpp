#pragma once

#include "glmos/model.hpp"

namespace glmos {

struct GlmOsResult {
  Model model;
  FitReport report;
};

// Logistic regression with optimal scaling: cyclic coordinate Newton updates
// over the intercept and each predictor's (v_k, beta_k), where every v-update
// is followed by projection onto the predictor's scaling level and
// restandardization. Steps that would increase the negative log-likelihood
// are halved toward the previous iterate and reverted after
// step_halving_max attempts, so the per-cycle loss trace is nonincreasing.
GlmOsResult fit_glm_os(const Dataset& ds, const FitOptions& opt = {});

// Conventional reference fit: full Newton IRLS on a design with an
// intercept, dummy columns for step-level predictors (first category is the
// reference), and z-scored numeric columns. Used for the equivalence checks
// between nominal-level quantifications and dummy coding.
struct DummyLogisticFit {
  Eigen::VectorXd beta;
  std::vector<std::string> names;  // column names aligned with beta
  std::vector<double> prob;        // fitted probabilities, training rows
  double negloglik = 0.0;
  int iterations = 0;
  bool converged = false;
  bool separation_warning = false;  // some |beta| ran into the +-30 cap
};
DummyLogisticFit dummy_logistic_fit(const Dataset& ds, double tol = 1e-12,
                                    int max_iter = 200);

}  // namespace glmos
