// AVX2+FMA kernel variants. Compiled with -mavx2 -mfma; only reachable through
// the dispatch table after a runtime cpuid check, so the rest of the build can
// stay at baseline ISA.
#include "glmos/kernels.hpp"

#if defined(GLMOS_HAVE_X86_INTRIN)

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace glmos::kernels {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

// exp(x) for 4 lanes, Cephes-style: reduce x = n*ln2 + r with |r| <= ln2/2,
// evaluate the (2,3) rational in r^2, reassemble e^r = 1 + 2r P/(Q - r P),
// scale by 2^n through the exponent field. Input clamped to +-708 so the
// scale factor stays a normal double; callers clamp probabilities anyway.
inline __m256d exp_pd(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);

  x = _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(-708.0)),
                    _mm256_set1_pd(708.0));

  __m128i k32 = _mm256_cvtpd_epi32(_mm256_mul_pd(x, log2e));  // round-nearest
  __m256d n = _mm256_cvtepi32_pd(k32);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);
  __m256d r2 = _mm256_mul_pd(r, r);

  __m256d p = _mm256_set1_pd(1.26177193074810590878e-4);
  p = _mm256_fmadd_pd(p, r2, _mm256_set1_pd(3.02994407707441961300e-2));
  p = _mm256_fmadd_pd(p, r2, _mm256_set1_pd(9.99999999999999999910e-1));
  p = _mm256_mul_pd(p, r);

  __m256d q = _mm256_set1_pd(3.00198505138664455042e-6);
  q = _mm256_fmadd_pd(q, r2, _mm256_set1_pd(2.52448340349684104192e-3));
  q = _mm256_fmadd_pd(q, r2, _mm256_set1_pd(2.27265548208155028766e-1));
  q = _mm256_fmadd_pd(q, r2, _mm256_set1_pd(2.00000000000000000005e0));

  __m256d er = _mm256_add_pd(
      _mm256_set1_pd(1.0),
      _mm256_div_pd(_mm256_add_pd(p, p), _mm256_sub_pd(q, p)));

  __m256i n64 = _mm256_cvtepi32_epi64(k32);
  __m256i pow2 = _mm256_slli_epi64(
      _mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(er, _mm256_castsi256_pd(pow2));
}

// log1p(z) for z in [0, 1]. w = 1+z lies in [1, 2]: scale w above sqrt(2)
// down by 2, take log via the atanh series in s = (m-1)/(m+1) (|s| <= 0.172,
// 12 terms reach ~1e-19 relative), then add back the rounding of 1+z with the
// first-order correction (z - (w-1))/w. Tiny z degrades gracefully: w == 1
// gives log(w) = 0 and the correction returns z itself.
inline __m256d log1p_pd(__m256d z) {
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d w = _mm256_add_pd(one, z);
  __m256d delta = _mm256_sub_pd(z, _mm256_sub_pd(w, one));

  __m256d big = _mm256_cmp_pd(w, _mm256_set1_pd(1.4142135623730951), _CMP_GT_OQ);
  __m256d m = _mm256_blendv_pd(w, _mm256_mul_pd(w, _mm256_set1_pd(0.5)), big);
  __m256d e = _mm256_and_pd(big, one);  // exponent: 0 or 1

  __m256d s = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
  __m256d s2 = _mm256_mul_pd(s, s);
  __m256d poly = _mm256_set1_pd(1.0 / 23.0);
  poly = _mm256_fmadd_pd(poly, s2, _mm256_set1_pd(1.0 / 21.0));
  poly = _mm256_fmadd_pd(poly, s2, _mm256_set1_pd(1.0 / 19.0));
  poly = _mm256_fmadd_pd(poly, s2, _mm256_set1_pd(1.0 / 17.0));
  poly = _mm256_fmadd_pd(poly, s2, _mm256_set1_pd(1.0 / 15.0));
  poly = _mm256_fmadd_pd(poly, s2, _mm256_set1_pd(1.0 / 13.0));
  poly = _mm256_fmadd_pd(poly, s2, _mm256_set1_pd(1.0 / 11.0));
  poly = _mm256_fmadd_pd(poly, s2, _mm256_set1_pd(1.0 / 9.0));
  poly = _mm256_fmadd_pd(poly, s2, _mm256_set1_pd(1.0 / 7.0));
  poly = _mm256_fmadd_pd(poly, s2, _mm256_set1_pd(1.0 / 5.0));
  poly = _mm256_fmadd_pd(poly, s2, _mm256_set1_pd(1.0 / 3.0));
  poly = _mm256_fmadd_pd(poly, s2, one);

  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  __m256d logm = _mm256_mul_pd(_mm256_add_pd(s, s), poly);
  __m256d res = _mm256_fmadd_pd(e, ln2_lo, logm);
  res = _mm256_fmadd_pd(e, ln2_hi, res);
  return _mm256_add_pd(res, _mm256_div_pd(delta, w));
}

inline __m256d sigmoid_pd(__m256d eta) {
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d p = _mm256_div_pd(
      one, _mm256_add_pd(one, exp_pd(_mm256_sub_pd(_mm256_setzero_pd(), eta))));
  p = _mm256_max_pd(p, _mm256_set1_pd(kPiClamp));
  return _mm256_min_pd(p, _mm256_set1_pd(1.0 - kPiClamp));
}

void sigmoid_avx2(const double* eta, double* pi, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(pi + i, sigmoid_pd(_mm256_loadu_pd(eta + i)));
  for (; i < n; ++i) {
    double p = 1.0 / (1.0 + std::exp(-eta[i]));
    pi[i] = std::clamp(p, kPiClamp, 1.0 - kPiClamp);
  }
}

double neg_loglik_avx2(const double* eta, const double* y, std::size_t n) {
  const __m256d signmask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d e = _mm256_loadu_pd(eta + i);
    __m256d yv = _mm256_loadu_pd(y + i);
    __m256d a = _mm256_andnot_pd(signmask, e);  // |eta|
    __m256d term = _mm256_add_pd(
        _mm256_max_pd(e, _mm256_setzero_pd()),
        log1p_pd(exp_pd(_mm256_sub_pd(_mm256_setzero_pd(), a))));
    acc = _mm256_add_pd(acc, _mm256_fnmadd_pd(yv, e, term));
  }
  double out = hsum(acc);
  for (; i < n; ++i) {
    double e = eta[i];
    out += std::max(e, 0.0) + std::log1p(std::exp(-std::abs(e))) - y[i] * e;
  }
  return out;
}

void grad_hess_avx2(const double* eta, const double* y,
                    double* grad, double* hess, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d floor = _mm256_set1_pd(kHessFloor);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d p = sigmoid_pd(_mm256_loadu_pd(eta + i));
    _mm256_storeu_pd(grad + i, _mm256_sub_pd(p, _mm256_loadu_pd(y + i)));
    __m256d h = _mm256_mul_pd(p, _mm256_sub_pd(one, p));
    _mm256_storeu_pd(hess + i, _mm256_max_pd(h, floor));
  }
  for (; i < n; ++i) {
    double p = 1.0 / (1.0 + std::exp(-eta[i]));
    p = std::clamp(p, kPiClamp, 1.0 - kPiClamp);
    grad[i] = p - y[i];
    hess[i] = std::max(p * (1.0 - p), kHessFloor);
  }
}

void regather_update_eta_avx2(const int32_t* g, const double* v, double beta,
                              double* phi, double* eta, std::size_t n) {
  const __m256d b = _mm256_set1_pd(beta);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(g + i));
    __m256d t = _mm256_i32gather_pd(v, idx, 8);
    __m256d ph = _mm256_loadu_pd(phi + i);
    __m256d ev = _mm256_loadu_pd(eta + i);
    _mm256_storeu_pd(eta + i, _mm256_fmadd_pd(b, _mm256_sub_pd(t, ph), ev));
    _mm256_storeu_pd(phi + i, t);
  }
  for (; i < n; ++i) {
    double t = v[g[i]];
    eta[i] += beta * (t - phi[i]);
    phi[i] = t;
  }
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d yv = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double out = hsum(acc);
  for (; i < n; ++i) out += a[i] * b[i];
  return out;
}

double weighted_dot_avx2(const double* a, const double* w, const double* b,
                         std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d aw = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(w + i));
    acc = _mm256_fmadd_pd(aw, _mm256_loadu_pd(b + i), acc);
  }
  double out = hsum(acc);
  for (; i < n; ++i) out += a[i] * w[i] * b[i];
  return out;
}

double sum_sq_diff_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double out = hsum(acc);
  for (; i < n; ++i) {
    double d = a[i] - b[i];
    out += d * d;
  }
  return out;
}

double vsum_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  double out = hsum(acc);
  for (; i < n; ++i) out += a[i];
  return out;
}

}  // namespace

const Ops* avx2_ops_impl() {
  static const Ops table = {
      "avx2",
      sigmoid_avx2,
      neg_loglik_avx2,
      grad_hess_avx2,
      regather_update_eta_avx2,
      axpy_avx2,
      dot_avx2,
      weighted_dot_avx2,
      sum_sq_diff_avx2,
      vsum_avx2,
  };
  return &table;
}

}  // namespace glmos::kernels

#endif  // GLMOS_HAVE_X86_INTRIN
