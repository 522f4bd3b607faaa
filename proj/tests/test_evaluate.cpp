#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "glmos/evaluate.hpp"

using namespace glmos;

namespace {

RawTable make_table(std::vector<std::string> header,
                    std::vector<std::vector<std::string>> columns) {
  RawTable t;
  t.header = std::move(header);
  t.columns = std::move(columns);
  return t;
}

}  // namespace

TEST_CASE("prediction error: frozen values and family rules") {
  CHECK(prediction_error(Metric::Brier, Family::Logistic, {1.0, 0.0}, {0.8, 0.3}) ==
        doctest::Approx(0.065).epsilon(1e-14));
  CHECK(prediction_error(Metric::Deviance, Family::Logistic, {1.0, 0.0}, {0.8, 0.3}) ==
        doctest::Approx(-(std::log(0.8) + std::log(0.7))).epsilon(1e-12));
  CHECK(prediction_error(Metric::Brier, Family::Linear, {2.0, -1.0}, {1.5, -2.0}) ==
        doctest::Approx((0.25 + 1.0) / 2.0).epsilon(1e-14));
  CHECK_THROWS_AS(
      prediction_error(Metric::Deviance, Family::Linear, {1.0}, {0.5}),
      ConfigError);
  CHECK_THROWS_AS(prediction_error(Metric::Brier, Family::Logistic, {}, {}),
                  DataError);
}

TEST_CASE("fold splitting: reproducible, balanced, stratified") {
  std::vector<double> y;
  for (int i = 0; i < 30; ++i) y.push_back(1.0);
  for (int i = 0; i < 90; ++i) y.push_back(0.0);

  auto f1 = split_folds(y, 10, 42, true);
  auto f2 = split_folds(y, 10, 42, true);
  CHECK(f1 == f2);
  auto f3 = split_folds(y, 10, 43, true);
  CHECK(f1 != f3);

  std::vector<int> pos(10, 0), neg(10, 0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    REQUIRE(f1[i] >= 0);
    REQUIRE(f1[i] < 10);
    (y[i] == 1.0 ? pos : neg)[static_cast<std::size_t>(f1[i])]++;
  }
  for (int f = 0; f < 10; ++f) {
    CHECK(pos[f] == 3);  // 30 positives deal evenly into 10 folds
    CHECK(neg[f] == 9);
  }

  // Uneven group: sizes differ by at most one within each stratum.
  std::vector<double> y2(25, 0.0);
  for (int i = 0; i < 7; ++i) y2[static_cast<std::size_t>(i)] = 1.0;
  auto f4 = split_folds(y2, 4, 7, true);
  std::vector<int> pos2(4, 0), neg2(4, 0);
  for (std::size_t i = 0; i < y2.size(); ++i)
    (y2[i] == 1.0 ? pos2 : neg2)[static_cast<std::size_t>(f4[i])]++;
  for (int f = 0; f < 4; ++f) {
    CHECK(pos2[f] >= 1);
    CHECK(pos2[f] <= 2);
    CHECK(neg2[f] >= 4);
    CHECK(neg2[f] <= 5);
  }

  CHECK_THROWS_AS(split_folds({1.0, 0.0, 1.0}, 4, 1, false), DataError);
  CHECK_THROWS_AS(split_folds(y, 1, 1, false), ConfigError);
}

TEST_CASE("intercept-only cross-validation has closed-form scores") {
  std::vector<std::string> ycol;
  for (int i = 0; i < 30; ++i) ycol.push_back("1");
  for (int i = 0; i < 90; ++i) ycol.push_back("0");
  RawTable t = make_table({"y"}, {ycol});
  DatasetOptions opts;
  opts.family = Family::Logistic;
  opts.response = "y";
  CvOptions cv;
  cv.folds = 10;
  cv.seed = 5;

  CvResult res = cross_validate(t, {}, opts, cv, "base");
  // Full fit predicts the base rate 0.25 for every row.
  CHECK(res.ape == doctest::Approx(0.1875).epsilon(1e-9));
  // Every fold holds out 3 positives and 9 negatives, so every fold error is
  // the same and the pooled misclassification is exactly the positive rate.
  CHECK(res.epe == doctest::Approx(0.1875).epsilon(1e-6));
  CHECK(res.se_epe < 1e-6);
  CHECK(res.mcr == doctest::Approx(25.0).epsilon(1e-12));
  REQUIRE(res.fold_errors.size() == 10);
  for (int s : res.fold_sizes) CHECK(s == 12);
}

TEST_CASE("cross-validation is deterministic and internally consistent") {
  std::vector<std::string> ycol, gcol, xcol;
  std::mt19937_64 rng(97);
  const char* cats[3] = {"u", "v", "w"};
  for (int i = 0; i < 150; ++i) {
    int c = static_cast<int>(rng() % 3);
    int x = static_cast<int>(rng() % 8);
    double lp = 0.8 * (c - 1) + 0.35 * (x - 3.5);
    double p = 1.0 / (1.0 + std::exp(-lp));
    ycol.push_back((static_cast<double>(rng() % 10000) / 10000.0) < p ? "1" : "0");
    gcol.push_back(cats[c]);
    xcol.push_back(std::to_string(x));
  }
  RawTable t = make_table({"y", "g", "x"}, {ycol, gcol, xcol});
  std::vector<VariableSpec> specs(2);
  specs[0].name = "g";
  specs[0].kind = Kind::UnorderedCategorical;
  specs[0].level = Level::NominalStep;
  specs[1].name = "x";
  specs[1].kind = Kind::OrderedCategorical;
  specs[1].level = Level::OrdinalStep;
  DatasetOptions opts;
  opts.family = Family::Logistic;
  opts.response = "y";
  CvOptions cv;
  cv.folds = 7;
  cv.seed = 11;

  CvResult a = cross_validate(t, specs, opts, cv, "base");
  CvResult b = cross_validate(t, specs, opts, cv, "base");
  CHECK(a.ape == b.ape);
  CHECK(a.epe == b.epe);
  CHECK(a.se_epe == b.se_epe);
  CHECK(a.mcr == b.mcr);
  REQUIRE(a.fold_errors.size() == b.fold_errors.size());
  for (std::size_t f = 0; f < a.fold_errors.size(); ++f)
    CHECK(a.fold_errors[f] == b.fold_errors[f]);

  // The summary columns recompute from the per-fold numbers.
  double weighted = 0.0;
  long total = 0;
  for (std::size_t f = 0; f < a.fold_errors.size(); ++f) {
    weighted += a.fold_errors[f] * a.fold_sizes[f];
    total += a.fold_sizes[f];
  }
  CHECK(a.epe == doctest::Approx(weighted / total).epsilon(1e-14));
  double mean = 0.0;
  for (double e : a.fold_errors) mean += e;
  mean /= static_cast<double>(a.fold_errors.size());
  double ss = 0.0;
  for (double e : a.fold_errors) ss += (e - mean) * (e - mean);
  double se = std::sqrt(ss / static_cast<double>(a.fold_errors.size() - 1)) /
              std::sqrt(static_cast<double>(a.fold_errors.size()));
  CHECK(a.se_epe == doctest::Approx(se).epsilon(1e-12));
}

TEST_CASE("cleanly separated data scores zero misclassification") {
  std::vector<std::string> ycol, xcol;
  for (int rep = 0; rep < 12; ++rep)
    for (int x = 1; x <= 10; ++x) {
      if (x == 5 || x == 6) continue;
      xcol.push_back(std::to_string(x));
      ycol.push_back(x > 5 ? "1" : "0");
    }
  RawTable t = make_table({"y", "x"}, {ycol, xcol});
  VariableSpec spec;
  spec.name = "x";
  spec.kind = Kind::Continuous;
  spec.level = Level::Numeric;
  DatasetOptions opts;
  opts.family = Family::Logistic;
  opts.response = "y";
  CvOptions cv;
  cv.folds = 6;
  cv.seed = 3;
  CvResult res = cross_validate(t, {spec}, opts, cv, "base");
  CHECK(res.mcr == 0.0);
}

TEST_CASE("linear family reports no misclassification rate") {
  std::vector<std::string> ycol, xcol;
  std::mt19937_64 rng(101);
  for (int i = 0; i < 60; ++i) {
    int x = static_cast<int>(rng() % 9);
    double yv = 1.5 + 0.5 * x + static_cast<double>(rng() % 100) / 200.0;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", yv);
    ycol.push_back(buf);
    xcol.push_back(std::to_string(x));
  }
  RawTable t = make_table({"y", "x"}, {ycol, xcol});
  VariableSpec spec;
  spec.name = "x";
  spec.kind = Kind::Continuous;
  spec.level = Level::Numeric;
  DatasetOptions opts;
  opts.family = Family::Linear;
  opts.response = "y";
  CvOptions cv;
  cv.folds = 5;
  cv.seed = 2;
  cv.stratified = false;
  CvResult res = cross_validate(t, {spec}, opts, cv, "base");
  CHECK(std::isnan(res.mcr));
  CHECK(res.epe > 0.0);
}

TEST_CASE("a fold whose training data degenerates is excluded with a note") {
  // One row carries the only second value of x; the fold holding it out
  // trains on a constant column and must be skipped, not crash the run.
  std::vector<std::string> ycol, xcol;
  for (int i = 0; i < 120; ++i) {
    ycol.push_back(i % 2 == 0 ? "1" : "0");
    xcol.push_back(i == 0 ? "2" : "1");
  }
  RawTable t = make_table({"y", "x"}, {ycol, xcol});
  VariableSpec spec;
  spec.name = "x";
  spec.kind = Kind::Continuous;
  spec.level = Level::Numeric;
  DatasetOptions opts;
  opts.family = Family::Logistic;
  opts.response = "y";
  CvOptions cv;
  cv.folds = 6;
  cv.seed = 1;
  CvResult res = cross_validate(t, {spec}, opts, cv, "base");
  CHECK(res.fold_errors.size() == 5);
  bool noted = false;
  for (const auto& n : res.notes)
    if (n.find("excluded") != std::string::npos) noted = true;
  CHECK(noted);
  CHECK(std::isfinite(res.epe));
}
