#pragma once

// Shared state machinery for the two fitters: per-variable quantification
// state, level-aware initialization, step blending for the halving
// safeguard, and assembly of the public Model.

#include <optional>
#include <vector>

#include "glmos/model.hpp"

namespace glmos::detail {

struct VarState {
  const EncodedVariable* enc = nullptr;
  std::vector<double> v;
  double beta = 0.0;
  Standardization std;
  int direction = 0;  // +1/-1 once a monotone restriction fixed one

  bool spline = false;
  SplineBasis basis;
  Eigen::MatrixXd B;  // basis at category values
  Eigen::VectorXd coef;
  double intercept = 0.0;
};

// Initializes the quantification from the category values projected onto the
// level (for numeric and step levels this is exactly the z-scored observed
// variable; splines start at their least-squares fit to it).
VarState init_var_state(const EncodedVariable& enc,
                        std::vector<std::string>* warnings);

// The state a restriction proposes, before acceptance.
struct StepCandidate {
  std::vector<double> v;
  Standardization std;
  int direction = 0;
  Eigen::VectorXd coef;
  double intercept = 0.0;
};

StepCandidate candidate_from(const Restriction& r);
StepCandidate candidate_from(const VarState& s);

// Midpoint between the current state and a proposed candidate, projected
// back to unit variance. Returns nullopt when directions are incompatible
// (a convex combination would break monotonicity) or the blend degenerates.
std::optional<StepCandidate> blend_halfway(const VarState& cur,
                                           const StepCandidate& cand,
                                           Level level,
                                           const Eigen::MatrixXd& B,
                                           const std::vector<double>& counts);

void apply_candidate(VarState& s, const StepCandidate& c);

// Flips signs so the first nonzero quantification entry is positive
// (numeric levels keep the z-score convention and are left alone).
void canonicalize_sign(VarState& s);

Model build_model(const Dataset& ds, const std::vector<VarState>& states,
                  double intercept);

}  // namespace glmos::detail
