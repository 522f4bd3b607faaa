#include "fit_internal.hpp"

#include <cmath>

namespace glmos::detail {

VarState init_var_state(const EncodedVariable& enc,
                        std::vector<std::string>* warnings) {
  VarState s;
  s.enc = &enc;
  s.spline = is_spline(enc.level);
  if (s.spline) {
    s.basis = SplineBasis::make(enc.degree, enc.interior_knots, enc.values,
                                enc.counts, warnings);
    s.B = s.basis.eval(enc.values);
  }

  if (enc.level == Level::Numeric) {
    auto st = weighted_standardization(enc.values, enc.counts);
    if (!st)
      throw DataError("variable '" + enc.name + "': constant values, cannot z-score");
    s.std = *st;
    s.v.resize(enc.values.size());
    for (std::size_t c = 0; c < enc.values.size(); ++c)
      s.v[c] = s.std.apply(enc.values[c]);
    return s;
  }

  // Start every optimal-scaling level at (the level's projection of) the
  // z-scored observed values; for step levels the projection is the identity
  // because category values are ascending.
  auto r = restrict_and_standardize(enc.level, enc.values, enc.counts,
                                    enc.counts, s.spline ? &s.B : nullptr);
  if (!r) {
    // Degenerate projection (e.g. a spline basis that flattened out): fall
    // back to the plain z-score so the fit can still move.
    auto st = weighted_standardization(enc.values, enc.counts);
    if (!st)
      throw DataError("variable '" + enc.name + "': constant values, cannot initialize");
    if (warnings)
      warnings->push_back("variable '" + enc.name +
                          "': initial projection degenerate, starting from z-scores");
    s.std = *st;
    s.v.resize(enc.values.size());
    for (std::size_t c = 0; c < enc.values.size(); ++c)
      s.v[c] = s.std.apply(enc.values[c]);
    return s;
  }
  s.v = r->v;
  s.std = r->std;
  s.direction = r->direction;
  if (s.spline) {
    s.coef = r->spline_coef;
    s.intercept = r->spline_intercept;
  }
  return s;
}

StepCandidate candidate_from(const Restriction& r) {
  StepCandidate c;
  c.v = r.v;
  c.std = r.std;
  c.direction = r.direction;
  c.coef = r.spline_coef;
  c.intercept = r.spline_intercept;
  return c;
}

StepCandidate candidate_from(const VarState& s) {
  StepCandidate c;
  c.v = s.v;
  c.std = s.std;
  c.direction = s.direction;
  c.coef = s.coef;
  c.intercept = s.intercept;
  return c;
}

std::optional<StepCandidate> blend_halfway(const VarState& cur,
                                           const StepCandidate& cand,
                                           Level level,
                                           const Eigen::MatrixXd& B,
                                           const std::vector<double>& counts) {
  bool monotone = (level == Level::OrdinalStep || level == Level::SplineMonotone);
  if (monotone && cur.direction != 0 && cand.direction != 0 &&
      cur.direction != cand.direction)
    return std::nullopt;

  StepCandidate mid;
  mid.direction = cand.direction != 0 ? cand.direction : cur.direction;
  if (is_spline(level)) {
    // Average in coefficient space: the span (and the nonnegativity cone)
    // are convex, so the midpoint is still a valid restricted curve.
    mid.coef = 0.5 * (cur.coef + cand.coef);
    mid.intercept = 0.5 * (cur.intercept + cand.intercept);
    Eigen::VectorXd raw = B * mid.coef;
    raw.array() += mid.intercept;
    std::vector<double> rawv(raw.data(), raw.data() + raw.size());
    auto st = weighted_standardization(rawv, counts);
    if (!st) return std::nullopt;
    mid.std = *st;
    mid.v.resize(rawv.size());
    for (std::size_t c = 0; c < rawv.size(); ++c) mid.v[c] = st->apply(rawv[c]);
  } else {
    std::vector<double> rawv(cand.v.size());
    for (std::size_t c = 0; c < rawv.size(); ++c)
      rawv[c] = 0.5 * (cur.v[c] + cand.v[c]);
    auto st = weighted_standardization(rawv, counts);
    if (!st) return std::nullopt;
    mid.std = *st;
    mid.v.resize(rawv.size());
    for (std::size_t c = 0; c < rawv.size(); ++c) mid.v[c] = st->apply(rawv[c]);
  }
  return mid;
}

void apply_candidate(VarState& s, const StepCandidate& c) {
  s.v = c.v;
  s.std = c.std;
  s.direction = c.direction;
  if (s.spline) {
    s.coef = c.coef;
    s.intercept = c.intercept;
  }
}

void canonicalize_sign(VarState& s) {
  if (s.enc->level == Level::Numeric) return;
  double first = 0.0;
  for (double x : s.v) {
    if (std::abs(x) > 1e-12) { first = x; break; }
  }
  if (first >= 0.0) return;
  for (auto& x : s.v) x = -x;
  s.beta = -s.beta;
  s.std.mean = -s.std.mean;
  s.direction = -s.direction;
  if (s.spline) {
    s.coef = -s.coef;
    s.intercept = -s.intercept;
  }
}

Model build_model(const Dataset& ds, const std::vector<VarState>& states,
                  double intercept) {
  Model m;
  m.family = ds.family;
  m.response = ds.response;
  m.intercept = intercept;
  m.train_n = ds.n();
  m.missing_tokens = ds.missing_tokens;
  for (const auto& s : states) {
    FittedVariable f;
    f.name = s.enc->name;
    f.kind = s.enc->kind;
    f.level = s.enc->level;
    f.labels = s.enc->labels;
    f.members = s.enc->members;
    f.values = s.enc->values;
    f.counts = s.enc->counts;
    f.rank_values = s.enc->rank_values;
    f.v = s.v;
    f.beta = s.beta;
    f.std = s.std;
    f.has_spline = s.spline;
    if (s.spline) {
      f.basis = s.basis;
      f.spline_coef = s.coef;
      f.spline_intercept = s.intercept;
    }
    m.vars.push_back(std::move(f));
  }
  return m;
}

}  // namespace glmos::detail
