#pragma once

#include <cstddef>
#include <cstdint>

// Row-level numeric kernels behind the fitters. Every operation has a scalar
// reference implementation; on x86 an AVX2+FMA variant is selected at runtime
// when the CPU supports it (override with GLMOS_KERNELS=scalar|avx2). The two
// paths agree to rounding error and are equivalence-tested against each other.
namespace glmos::kernels {

// Probability clamp for the logistic mean and Hessian floor, applied inside
// sigmoid() and grad_hess() so downstream code never sees 0, 1, or a zero
// second derivative.
inline constexpr double kPiClamp = 1e-12;
inline constexpr double kHessFloor = 1e-10;

struct Ops {
  const char* name;

  // pi[i] = 1/(1+exp(-eta[i])), clamped to [kPiClamp, 1-kPiClamp].
  void (*sigmoid)(const double* eta, double* pi, std::size_t n);

  // sum_i max(eta,0) + log1p(exp(-|eta|)) - y*eta  (logistic negative
  // log-likelihood in its overflow-safe form).
  double (*neg_loglik)(const double* eta, const double* y, std::size_t n);

  // grad[i] = pi - y, hess[i] = max(pi*(1-pi), kHessFloor) with pi clamped.
  void (*grad_hess)(const double* eta, const double* y,
                    double* grad, double* hess, std::size_t n);

  // phi[i] = v[g[i]]; eta[i] += beta*(phi_new - phi_old). Used when a
  // quantification vector changes.
  void (*regather_update_eta)(const int32_t* g, const double* v, double beta,
                              double* phi, double* eta, std::size_t n);

  // y[i] += a*x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);

  double (*dot)(const double* a, const double* b, std::size_t n);

  // sum_i a[i]*w[i]*b[i]
  double (*weighted_dot)(const double* a, const double* w, const double* b,
                         std::size_t n);

  // sum_i (a[i]-b[i])^2
  double (*sum_sq_diff)(const double* a, const double* b, std::size_t n);

  double (*vsum)(const double* a, std::size_t n);
};

// Runtime-selected table (cached after first call).
const Ops& ops();

// Reference path, always available.
const Ops& scalar_ops();

// AVX2 path, or nullptr when the build or the CPU lacks support.
const Ops* avx2_ops();

// Per-category accumulation (scatter-add has lane conflicts, so this stays
// scalar on every path). sums[g[i]] += a[i]; if b/sums_b given, likewise.
void category_sums(const int32_t* g, const double* a, const double* b,
                   double* sums_a, double* sums_b,
                   std::size_t n, std::size_t num_categories);

}  // namespace glmos::kernels
