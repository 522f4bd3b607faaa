#include "glmos/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace glmos::kernels {

namespace {

void sigmoid_scalar(const double* eta, double* pi, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double p = 1.0 / (1.0 + std::exp(-eta[i]));
    pi[i] = std::clamp(p, kPiClamp, 1.0 - kPiClamp);
  }
}

double neg_loglik_scalar(const double* eta, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double e = eta[i];
    acc += std::max(e, 0.0) + std::log1p(std::exp(-std::abs(e))) - y[i] * e;
  }
  return acc;
}

void grad_hess_scalar(const double* eta, const double* y,
                      double* grad, double* hess, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double p = 1.0 / (1.0 + std::exp(-eta[i]));
    p = std::clamp(p, kPiClamp, 1.0 - kPiClamp);
    grad[i] = p - y[i];
    hess[i] = std::max(p * (1.0 - p), kHessFloor);
  }
}

void regather_update_eta_scalar(const int32_t* g, const double* v, double beta,
                                double* phi, double* eta, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double t = v[g[i]];
    eta[i] += beta * (t - phi[i]);
    phi[i] = t;
  }
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double weighted_dot_scalar(const double* a, const double* w, const double* b,
                           std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * w[i] * b[i];
  return acc;
}

double sum_sq_diff_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double vsum_scalar(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops table = {
      "scalar",
      sigmoid_scalar,
      neg_loglik_scalar,
      grad_hess_scalar,
      regather_update_eta_scalar,
      axpy_scalar,
      dot_scalar,
      weighted_dot_scalar,
      sum_sq_diff_scalar,
      vsum_scalar,
  };
  return table;
}

void category_sums(const int32_t* g, const double* a, const double* b,
                   double* sums_a, double* sums_b,
                   std::size_t n, std::size_t num_categories) {
  std::fill(sums_a, sums_a + num_categories, 0.0);
  if (sums_b) std::fill(sums_b, sums_b + num_categories, 0.0);
  if (b && sums_b) {
    for (std::size_t i = 0; i < n; ++i) {
      sums_a[g[i]] += a[i];
      sums_b[g[i]] += b[i];
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) sums_a[g[i]] += a[i];
  }
}

}  // namespace glmos::kernels
