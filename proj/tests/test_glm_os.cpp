#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "glmos/glm_os.hpp"
#include "glmos/kernels.hpp"

using namespace glmos;

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

RawTable make_table(std::vector<std::string> header,
                    std::vector<std::vector<std::string>> columns) {
  RawTable t;
  t.header = std::move(header);
  t.columns = std::move(columns);
  return t;
}

Dataset logistic_dataset(const RawTable& t, const std::vector<VariableSpec>& specs) {
  DatasetOptions opts;
  opts.family = Family::Logistic;
  opts.response = t.header.at(0);
  return build_dataset(t, specs, opts);
}

}  // namespace

TEST_CASE("gradient and curvature match central differences of the loss") {
  const auto& K = kernels::ops();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> de(-4.0, 4.0);
  const std::size_t n = 30;
  const double h = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> eta(n), y(n), grad(n), hess(n);
    for (std::size_t i = 0; i < n; ++i) {
      eta[i] = de(rng);
      y[i] = (rng() & 1) ? 1.0 : 0.0;
    }
    K.grad_hess(eta.data(), y.data(), grad.data(), hess.data(), n);
    // Differencing the loss one observation at a time keeps the cancellation
    // error of the second difference below the tolerance; the curvature uses
    // two step sizes with Richardson extrapolation for the same reason.
    auto nll1 = [&](double e, double yv) { return K.neg_loglik(&e, &yv, 1); };
    for (std::size_t i = 0; i < n; i += 7) {
      double g_fd = (nll1(eta[i] + h, y[i]) - nll1(eta[i] - h, y[i])) / (2.0 * h);
      auto second = [&](double hh) {
        return (nll1(eta[i] + hh, y[i]) - 2.0 * nll1(eta[i], y[i]) +
                nll1(eta[i] - hh, y[i])) / (hh * hh);
      };
      double h_fd = (4.0 * second(5e-3) - second(1e-2)) / 3.0;
      CHECK(std::abs(grad[i] - g_fd) < 1e-6 * std::max(1.0, std::abs(g_fd)));
      CHECK(std::abs(hess[i] - h_fd) < 1e-6 * std::max(1.0, std::abs(h_fd)));
    }
  }
}

TEST_CASE("intercept-only fit lands on the log odds of the base rate") {
  RawTable t = make_table({"y"}, {{"1", "0", "0", "0"}});
  Dataset ds = logistic_dataset(t, {});
  REQUIRE(ds.vars.empty());
  auto res = fit_glm_os(ds);
  CHECK(res.report.converged);
  CHECK(res.report.cycles <= 25);
  CHECK(res.model.intercept ==
        doctest::Approx(std::log(0.25 / 0.75)).epsilon(1e-8));
}

TEST_CASE("single nominal predictor is equivalent to dummy coding") {
  std::mt19937_64 rng(71);
  const char* cats[4] = {"a", "b", "c", "d"};
  const double pr[4] = {0.25, 0.6, 0.45, 0.75};
  std::vector<std::string> ycol, gcol;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 400; ++i) {
    int c = static_cast<int>(rng() % 4);
    gcol.push_back(cats[c]);
    ycol.push_back(u(rng) < pr[c] ? "1" : "0");
  }
  RawTable t = make_table({"y", "g"}, {ycol, gcol});
  VariableSpec spec;
  spec.name = "g";
  spec.kind = Kind::UnorderedCategorical;
  spec.level = Level::NominalStep;
  Dataset ds = logistic_dataset(t, {spec});

  FitOptions fo;
  fo.tol = 1e-12;
  auto os = fit_glm_os(ds, fo);
  auto dummy = dummy_logistic_fit(ds);
  REQUIRE(os.report.converged);
  REQUIRE(dummy.converged);

  Prediction pred = predict(os.model, t);
  for (std::size_t i = 0; i < ds.n(); ++i)
    CHECK(pred.value[i] == doctest::Approx(dummy.prob[i]).epsilon(1e-6));

  // beta * (v_c - v_ref) equals the dummy coefficient of category c.
  const auto& var = os.model.vars[0];
  for (int c = 1; c < var.num_categories(); ++c) {
    double contrast = var.beta * (var.v[c] - var.v[0]);
    CHECK(contrast == doctest::Approx(dummy.beta[c]).epsilon(1e-6));
  }
}

TEST_CASE("mixed-level logistic fit: descent, standardization, shape constraints") {
  std::mt19937_64 rng(73);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> dx(0.0, 10.0);
  const char* cats[4] = {"red", "green", "blue", "grey"};
  const double ceff[4] = {-0.8, 0.4, 0.0, 1.2};
  std::vector<std::vector<std::string>> cols(5);
  for (int i = 0; i < 300; ++i) {
    int c = static_cast<int>(rng() % 4);
    int o = static_cast<int>(rng() % 5);
    double xm = std::round(dx(rng) * 4.0) / 4.0;
    double xn = std::round(dx(rng) * 4.0) / 4.0;
    double lp = ceff[c] + 0.45 * (o - 2) + 0.9 * std::tanh(xm - 5.0) - 0.15 * (xn - 5.0);
    cols[0].push_back(u(rng) < 1.0 / (1.0 + std::exp(-lp)) ? "1" : "0");
    cols[1].push_back(cats[c]);
    cols[2].push_back(std::to_string(o));
    cols[3].push_back(num(xm));
    cols[4].push_back(num(xn));
  }
  RawTable t = make_table({"y", "color", "grade", "xm", "xn"}, cols);
  std::vector<VariableSpec> specs(4);
  specs[0].name = "color";
  specs[0].kind = Kind::UnorderedCategorical;
  specs[0].level = Level::NominalStep;
  specs[1].name = "grade";
  specs[1].kind = Kind::OrderedCategorical;
  specs[1].level = Level::OrdinalStep;
  specs[2].name = "xm";
  specs[2].kind = Kind::Continuous;
  specs[2].level = Level::SplineMonotone;
  specs[2].degree = 2;
  specs[2].interior_knots = 2;
  specs[3].name = "xn";
  specs[3].kind = Kind::Continuous;
  specs[3].level = Level::Numeric;
  Dataset ds = logistic_dataset(t, specs);

  auto res = fit_glm_os(ds);
  CHECK(res.report.converged);
  const auto& trace = res.report.loss_trace;
  REQUIRE(!trace.empty());
  for (std::size_t i = 1; i < trace.size(); ++i)
    CHECK(trace[i] <= trace[i - 1] + 1e-12 * std::max(1.0, trace[i - 1]));

  for (const auto& var : res.model.vars) {
    // Standardization identities under the category counts.
    double nn = 0.0, mean = 0.0, ss = 0.0;
    for (std::size_t c = 0; c < var.v.size(); ++c) {
      nn += var.counts[c];
      mean += var.counts[c] * var.v[c];
      ss += var.counts[c] * var.v[c] * var.v[c];
    }
    CHECK(std::abs(mean / nn) < 1e-8);
    CHECK(std::abs(ss / nn - 1.0) < 1e-8);

    // Canonical sign on transformed levels: first nonzero entry of v is
    // positive (numeric levels keep the inherent sign of the z-scores).
    if (var.level != Level::Numeric) {
      for (double x : var.v) {
        if (std::abs(x) > 1e-12) {
          CHECK(x > 0.0);
          break;
        }
      }
    }

    // Monotone levels yield monotone quantifications (either direction).
    if (var.level == Level::OrdinalStep || var.level == Level::SplineMonotone) {
      bool up = true, down = true;
      for (std::size_t c = 1; c < var.v.size(); ++c) {
        if (var.v[c] < var.v[c - 1] - 1e-12) up = false;
        if (var.v[c] > var.v[c - 1] + 1e-12) down = false;
      }
      CHECK((up || down));
    }
  }
}

TEST_CASE("fitted probabilities do not depend on row or category order") {
  std::mt19937_64 rng(79);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const char* cats[3] = {"low", "mid", "high"};
  const double pr[3] = {0.3, 0.65, 0.5};
  std::vector<std::string> ycol, gcol;
  for (int i = 0; i < 150; ++i) {
    int c = static_cast<int>(rng() % 3);
    gcol.push_back(cats[c]);
    ycol.push_back(u(rng) < pr[c] ? "1" : "0");
  }
  RawTable t1 = make_table({"y", "g"}, {ycol, gcol});

  // Same rows rotated, so the first-appearance category order changes.
  const std::size_t shift = 49;
  std::vector<std::string> ycol2(ycol), gcol2(gcol);
  std::rotate(ycol2.begin(), ycol2.begin() + shift, ycol2.end());
  std::rotate(gcol2.begin(), gcol2.begin() + shift, gcol2.end());
  RawTable t2 = make_table({"y", "g"}, {ycol2, gcol2});

  VariableSpec spec;
  spec.name = "g";
  spec.kind = Kind::UnorderedCategorical;
  spec.level = Level::NominalStep;
  FitOptions fo;
  fo.tol = 1e-12;
  auto r1 = fit_glm_os(logistic_dataset(t1, {spec}), fo);
  auto r2 = fit_glm_os(logistic_dataset(t2, {spec}), fo);
  Prediction p1 = predict(r1.model, t1);
  Prediction p2 = predict(r2.model, t2);
  const std::size_t n = ycol.size();
  for (std::size_t i = 0; i < n; ++i)
    CHECK(p1.value[(i + shift) % n] == doctest::Approx(p2.value[i]).epsilon(1e-8));
}

TEST_CASE("looser scaling levels reach a lower or equal optimum") {
  std::mt19937_64 rng(83);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double pr[5] = {0.2, 0.6, 0.35, 0.5, 0.8};  // nonmonotone in the order
  std::vector<std::string> ycol, gcol;
  for (int i = 0; i < 600; ++i) {
    int c = static_cast<int>(rng() % 5);
    gcol.push_back(std::to_string(c + 1));
    ycol.push_back(u(rng) < pr[c] ? "1" : "0");
  }
  RawTable t = make_table({"y", "g"}, {ycol, gcol});

  auto fit_at = [&](Level level) {
    VariableSpec spec;
    spec.name = "g";
    spec.kind = Kind::OrderedCategorical;
    spec.level = level;
    FitOptions fo;
    fo.tol = 1e-12;
    auto res = fit_glm_os(logistic_dataset(t, {spec}), fo);
    REQUIRE(res.report.converged);
    return res.report.final_loss;
  };

  double nll_numeric = fit_at(Level::Numeric);
  double nll_ordinal = fit_at(Level::OrdinalStep);
  double nll_nominal = fit_at(Level::NominalStep);
  CHECK(nll_ordinal <= nll_numeric + 1e-9);
  CHECK(nll_nominal <= nll_ordinal + 1e-9);
  // The generating pattern is genuinely nonmonotone, so nominal must win.
  CHECK(nll_nominal < nll_ordinal - 1e-3);
}

TEST_CASE("separable data raises the quasi-separation warning") {
  std::vector<std::string> ycol, xcol;
  const char* xs[11] = {"-5", "-4", "-3", "-2", "-1", "0.01",
                        "1",  "2",  "3",  "4",  "5"};
  for (int rep = 0; rep < 4; ++rep)
    for (int i = 0; i < 11; ++i) {
      xcol.push_back(xs[i]);
      ycol.push_back(xs[i][0] == '-' ? "0" : "1");
    }
  RawTable t = make_table({"y", "x"}, {ycol, xcol});
  VariableSpec spec;
  spec.name = "x";
  spec.kind = Kind::Continuous;
  spec.level = Level::Numeric;
  auto res = fit_glm_os(logistic_dataset(t, {spec}));
  bool warned = false;
  for (const auto& w : res.report.warnings)
    if (w.find("quasi-separation") != std::string::npos) warned = true;
  CHECK(warned);
}
