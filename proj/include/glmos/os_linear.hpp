#pragma once

#include "glmos/model.hpp"

namespace glmos {

struct OsLinearResult {
  Model model;
  FitReport report;
};

// Alternating least squares for the linear model with optimal scaling: the
// response is centered, and each cycle visits every predictor, refitting its
// quantification from the per-category means of the working residuals
// (projected onto the scaling level, then restandardized) and its
// coefficient by exact least squares. Each block update is an exact
// minimizer, so the squared-error loss trace is nonincreasing.
OsLinearResult fit_os_linear(const Dataset& ds, const FitOptions& opt = {});

}  // namespace glmos
