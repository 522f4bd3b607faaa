#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "glmos/dataset.hpp"

namespace glmos {

// Affine transform x -> (x - mean)/scale.
struct Standardization {
  double mean = 0.0;
  double scale = 1.0;
  double apply(double x) const { return (x - mean) / scale; }
};

// Weighted moments with divisor sum(w) (population convention), so that the
// standardized v satisfies sum(w*v) = 0 and sum(w*v^2)/sum(w) = 1.
// Returns nullopt when the weighted variance is (close to) zero.
std::optional<Standardization> weighted_standardization(
    const std::vector<double>& v, const std::vector<double>& w);

// Weighted least-squares monotone fit (pool adjacent violators).
std::vector<double> isotonic_fit(const std::vector<double>& target,
                                 const std::vector<double>& w, bool increasing);

// Fits both directions, keeps the lower weighted SSE; ties go to increasing.
std::vector<double> isotonic_best(const std::vector<double>& target,
                                  const std::vector<double>& w,
                                  bool* increasing = nullptr);

// Monotone spline basis: I-splines of polynomial degree d built as tail sums
// of order-(d+1) B-splines on [lo, hi] with boundary knots of multiplicity
// d+1. Columns are nondecreasing with value 0 at lo and 1 at hi; the constant
// tail sum (partition of unity) is dropped, so dim() = d + #interior knots.
class SplineBasis {
 public:
  // Interior knots at observation-weighted quantiles j/(q+1) of the value
  // distribution (weights = category counts). Knots that collide with a
  // boundary or each other are dropped with a warning.
  static SplineBasis make(int degree, int interior_knots,
                          const std::vector<double>& values,
                          const std::vector<double>& counts,
                          std::vector<std::string>* warnings);

  // Rebuild from stored parameters (model deserialization).
  static SplineBasis from_parts(int degree, double lo, double hi,
                                std::vector<double> interior);

  int dim() const { return static_cast<int>(num_bsplines_ - 1); }
  int degree() const { return degree_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const std::vector<double>& interior() const { return interior_; }

  // One basis row (dim() values); x is clamped to [lo, hi].
  void eval_row(double x, double* out) const;
  Eigen::MatrixXd eval(const std::vector<double>& x) const;

 private:
  int degree_ = 1;
  double lo_ = 0.0, hi_ = 1.0;
  std::vector<double> interior_;
  std::vector<double> knots_;  // extended knot vector
  std::size_t num_bsplines_ = 0;
};

// min over a >= 0 (intercept free) of sum_i w_i (t_i - b0 - (B a)_i)^2,
// Lawson-Hanson active set on the weighted, centered system.
struct NnlsFit {
  Eigen::VectorXd coef;  // >= 0
  double intercept = 0.0;
};
NnlsFit nnls(const Eigen::MatrixXd& B, const Eigen::VectorXd& target,
             const Eigen::VectorXd& w);

// Projection of an unrestricted quantification onto the requested level's
// feasible set (weighted by proj_w), then standardization with the raw
// category counts. Returns nullopt when the restricted vector is constant
// (degenerate). For spline levels the raw-scale curve is kept as
// intercept + B*coef so new values can be transformed later; `direction` is
// +1/-1 for monotone results, 0 otherwise.
struct Restriction {
  std::vector<double> v;  // standardized
  Standardization std;    // applied to the raw restricted values
  Eigen::VectorXd spline_coef;
  double spline_intercept = 0.0;
  int direction = 0;
};
std::optional<Restriction> restrict_and_standardize(
    Level level, const std::vector<double>& target,
    const std::vector<double>& proj_w, const std::vector<double>& counts,
    const Eigen::MatrixXd* B);  // basis at category values, spline levels only

}  // namespace glmos
