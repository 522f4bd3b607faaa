#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "glmos/kernels.hpp"

using namespace glmos;

namespace {

bool close(double a, double b, double rel, double abs_tol = 1e-300) {
  double diff = std::abs(a - b);
  return diff <= abs_tol + rel * std::max(std::abs(a), std::abs(b));
}

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double lo,
                               double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> out(n);
  for (auto& x : out) x = d(rng);
  return out;
}

}  // namespace

TEST_CASE("scalar sigmoid and neg_loglik basics") {
  const auto& K = kernels::scalar_ops();
  double eta[3] = {0.0, 50.0, -50.0};
  double pi[3];
  K.sigmoid(eta, pi, 3);
  CHECK(pi[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(pi[1] == doctest::Approx(1.0 - 1e-12).epsilon(1e-9));
  CHECK(pi[2] >= kernels::kPiClamp);

  // Direct formula log(1 + exp(eta)) - y*eta on values where the naive form
  // is stable.
  double e2[2] = {1.25, -0.75};
  double y2[2] = {1.0, 0.0};
  double expect = std::log(1.0 + std::exp(1.25)) - 1.25 +
                  std::log(1.0 + std::exp(-0.75));
  CHECK(close(K.neg_loglik(e2, y2, 2), expect, 1e-14));

  // The stable form must not overflow where exp(eta) would.
  double e3[1] = {800.0};
  double y3[1] = {0.0};
  CHECK(K.neg_loglik(e3, y3, 1) == doctest::Approx(800.0).epsilon(1e-12));
}

TEST_CASE("scalar grad and hess definitions") {
  const auto& K = kernels::scalar_ops();
  std::mt19937_64 rng(7);
  auto eta = random_vec(rng, 64, -6.0, 6.0);
  std::vector<double> y(64);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = (rng() & 1) ? 1.0 : 0.0;
  std::vector<double> grad(64), hess(64), pi(64);
  K.grad_hess(eta.data(), y.data(), grad.data(), hess.data(), 64);
  K.sigmoid(eta.data(), pi.data(), 64);
  for (std::size_t i = 0; i < y.size(); ++i) {
    CHECK(close(grad[i], pi[i] - y[i], 1e-14));
    CHECK(close(hess[i], std::max(pi[i] * (1.0 - pi[i]), kernels::kHessFloor), 1e-14));
  }

  // Hessian floor at extreme linear predictors.
  double e1[1] = {60.0}, y1[1] = {1.0}, g1[1], h1[1];
  K.grad_hess(e1, y1, g1, h1, 1);
  CHECK(h1[0] == kernels::kHessFloor);
}

TEST_CASE("category_sums accumulates per category") {
  std::vector<int32_t> g = {0, 1, 0, 2, 1, 0};
  std::vector<double> a = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  std::vector<double> b = {0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
  std::vector<double> sa(3, -1.0), sb(3, -1.0);
  kernels::category_sums(g.data(), a.data(), b.data(), sa.data(), sb.data(), 6, 3);
  CHECK(sa[0] == 10.0);
  CHECK(sa[1] == 7.0);
  CHECK(sa[2] == 4.0);
  CHECK(sb[0] == 1.5);
  CHECK(sb[1] == 1.0);
  CHECK(sb[2] == 0.5);
  kernels::category_sums(g.data(), a.data(), nullptr, sa.data(), nullptr, 6, 3);
  CHECK(sa[2] == 4.0);
}

TEST_CASE("vector kernel equivalence across implementations") {
  const auto& S = kernels::scalar_ops();
  const kernels::Ops* A = kernels::avx2_ops();
  if (!A) {
    MESSAGE("AVX2 not available on this machine; skipping equivalence checks");
    return;
  }

  std::mt19937_64 rng(42);
  for (std::size_t n : {std::size_t(1), std::size_t(3), std::size_t(4),
                        std::size_t(7), std::size_t(17), std::size_t(256),
                        std::size_t(1001)}) {
    CAPTURE(n);
    auto eta = random_vec(rng, n, -40.0, 40.0);
    std::vector<double> y(n);
    for (auto& v : y) v = (rng() & 1) ? 1.0 : 0.0;

    std::vector<double> ps(n), pa(n);
    S.sigmoid(eta.data(), ps.data(), n);
    A->sigmoid(eta.data(), pa.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(close(ps[i], pa[i], 1e-12));

    CHECK(close(S.neg_loglik(eta.data(), y.data(), n),
                A->neg_loglik(eta.data(), y.data(), n), 1e-12));

    std::vector<double> gs(n), hs(n), ga(n), ha(n);
    S.grad_hess(eta.data(), y.data(), gs.data(), hs.data(), n);
    A->grad_hess(eta.data(), y.data(), ga.data(), ha.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(close(gs[i], ga[i], 1e-12, 1e-13));
      CHECK(close(hs[i], ha[i], 1e-12, 1e-13));
    }

    auto x = random_vec(rng, n, -3.0, 3.0);
    auto w = random_vec(rng, n, 0.1, 2.0);
    CHECK(close(S.dot(eta.data(), x.data(), n), A->dot(eta.data(), x.data(), n),
                1e-12, 1e-13));
    CHECK(close(S.weighted_dot(eta.data(), w.data(), x.data(), n),
                A->weighted_dot(eta.data(), w.data(), x.data(), n), 1e-12, 1e-13));
    CHECK(close(S.sum_sq_diff(eta.data(), x.data(), n),
                A->sum_sq_diff(eta.data(), x.data(), n), 1e-12));
    CHECK(close(S.vsum(x.data(), n), A->vsum(x.data(), n), 1e-12, 1e-13));

    std::vector<double> y1 = x, y2 = x;
    S.axpy(0.37, eta.data(), y1.data(), n);
    A->axpy(0.37, eta.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(close(y1[i], y2[i], 1e-13, 1e-15));

    std::size_t C = 5;
    std::vector<int32_t> g(n);
    for (auto& gi : g) gi = static_cast<int32_t>(rng() % C);
    auto v = random_vec(rng, C, -2.0, 2.0);
    std::vector<double> phi1 = x, phi2 = x, eta1 = eta, eta2 = eta;
    S.regather_update_eta(g.data(), v.data(), -1.7, phi1.data(), eta1.data(), n);
    A->regather_update_eta(g.data(), v.data(), -1.7, phi2.data(), eta2.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(phi1[i] == phi2[i]);
      CHECK(close(eta1[i], eta2[i], 1e-13, 1e-15));
    }
  }
}

TEST_CASE("sigmoid equivalence at extreme and subnormal-adjacent inputs") {
  const kernels::Ops* A = kernels::avx2_ops();
  if (!A) return;
  const auto& S = kernels::scalar_ops();
  std::vector<double> eta = {-750.0, -709.0, -30.0, -1e-9, 0.0,
                             1e-9,   30.0,   709.0, 750.0};
  std::vector<double> ps(eta.size()), pa(eta.size());
  S.sigmoid(eta.data(), ps.data(), eta.size());
  A->sigmoid(eta.data(), pa.data(), eta.size());
  for (std::size_t i = 0; i < eta.size(); ++i) {
    CAPTURE(eta[i]);
    CHECK(close(ps[i], pa[i], 1e-12, 1e-15));
  }
}

TEST_CASE("dispatch honours the environment override") {
  // ops() is cached after first use, so only verify it returns one of the
  // registered tables.
  const auto& chosen = kernels::ops();
  bool is_scalar = std::string(chosen.name) == "scalar";
  bool is_avx2 = std::string(chosen.name) == "avx2";
  CHECK((is_scalar || is_avx2));
  if (is_avx2) CHECK(kernels::avx2_ops() != nullptr);
}
