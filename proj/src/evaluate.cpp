#include "glmos/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <random>

#include "glmos/errors.hpp"
#include "glmos/glm_os.hpp"
#include "glmos/os_linear.hpp"

namespace glmos {

const char* to_string(Metric m) {
  return m == Metric::Brier ? "brier" : "deviance";
}

Metric metric_from_string(const std::string& s) {
  if (s == "brier") return Metric::Brier;
  if (s == "deviance") return Metric::Deviance;
  throw ConfigError("unknown metric '" + s + "' (expected brier or deviance)");
}

double prediction_error(Metric m, Family family, const std::vector<double>& y,
                        const std::vector<double>& value) {
  if (y.size() != value.size() || y.empty())
    throw DataError("prediction_error: size mismatch or empty input");
  double acc = 0.0;
  if (m == Metric::Brier) {
    for (std::size_t i = 0; i < y.size(); ++i) {
      double d = y[i] - value[i];
      acc += d * d;
    }
  } else {
    if (family != Family::Logistic)
      throw ConfigError("deviance metric needs the logistic family");
    for (std::size_t i = 0; i < y.size(); ++i) {
      double p = std::clamp(value[i], 1e-12, 1.0 - 1e-12);
      acc += y[i] * std::log(p) + (1.0 - y[i]) * std::log1p(-p);
    }
    acc *= -2.0;
  }
  return acc / static_cast<double>(y.size());
}

namespace {

// Explicit Fisher-Yates so the assignment does not depend on the standard
// library's std::shuffle implementation.
void shuffle_positions(std::vector<std::size_t>& a, std::mt19937_64& rng) {
  for (std::size_t i = a.size(); i > 1; --i)
    std::swap(a[i - 1], a[rng() % i]);
}

}  // namespace

std::vector<int> split_folds(const std::vector<double>& y, int k,
                             std::uint64_t seed, bool stratified) {
  const std::size_t n = y.size();
  if (k < 2) throw ConfigError("cross-validation needs at least 2 folds");
  if (static_cast<std::size_t>(k) > n)
    throw DataError("more folds than rows");

  std::map<double, std::vector<std::size_t>> groups;
  if (stratified) {
    for (std::size_t i = 0; i < n; ++i) groups[y[i]].push_back(i);
  } else {
    auto& all = groups[0.0];
    all.resize(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
  }

  std::mt19937_64 rng(seed);
  std::vector<int> fold(n, 0);
  for (auto& [key, pos] : groups) {
    (void)key;
    shuffle_positions(pos, rng);
    for (std::size_t j = 0; j < pos.size(); ++j)
      fold[pos[j]] = static_cast<int>(j % static_cast<std::size_t>(k));
  }
  return fold;
}

namespace {

struct FoldOutcome {
  bool usable = false;
  bool converged = false;
  double err = 0.0;
  int size = 0;
  long misclassified = 0;
  std::string note;
};

}  // namespace

CvResult cross_validate(const RawTable& table,
                        const std::vector<VariableSpec>& specs,
                        const DatasetOptions& opts, const CvOptions& cv,
                        const std::string& label) {
  CvResult res;
  res.label = label;

  Dataset ds = build_dataset(table, specs, opts);
  for (const auto& n : ds.notes) res.notes.push_back(n);

  if (opts.family == Family::Logistic) {
    auto r = fit_glm_os(ds, cv.fit);
    res.full_model = std::move(r.model);
    res.full_report = std::move(r.report);
  } else {
    auto r = fit_os_linear(ds, cv.fit);
    res.full_model = std::move(r.model);
    res.full_report = std::move(r.report);
  }
  {
    Prediction pred = predict(res.full_model, table, ds.row_ids);
    res.ape = prediction_error(cv.metric, opts.family, ds.y, pred.value);
  }

  bool stratified = cv.stratified && opts.family == Family::Logistic;
  std::vector<int> fold = split_folds(ds.y, cv.folds, cv.seed, stratified);

  auto run_fold = [&](int f) -> FoldOutcome {
    FoldOutcome out;
    std::vector<std::size_t> train_ids;
    std::vector<std::size_t> test_pos;
    for (std::size_t i = 0; i < ds.row_ids.size(); ++i) {
      if (fold[i] == f) test_pos.push_back(i);
      else train_ids.push_back(ds.row_ids[i]);
    }
    if (test_pos.empty()) {
      out.note = "fold has no held-out rows";
      return out;
    }
    try {
      Dataset dtrain = build_dataset(table, specs, opts, train_ids);
      Model model;
      bool converged;
      if (opts.family == Family::Logistic) {
        auto r = fit_glm_os(dtrain, cv.fit);
        model = std::move(r.model);
        converged = r.report.converged;
      } else {
        auto r = fit_os_linear(dtrain, cv.fit);
        model = std::move(r.model);
        converged = r.report.converged;
      }
      std::vector<std::size_t> test_ids(test_pos.size());
      std::vector<double> ytest(test_pos.size());
      for (std::size_t j = 0; j < test_pos.size(); ++j) {
        test_ids[j] = ds.row_ids[test_pos[j]];
        ytest[j] = ds.y[test_pos[j]];
      }
      Prediction pred = predict(model, table, test_ids);
      out.err = prediction_error(cv.metric, opts.family, ytest, pred.value);
      out.size = static_cast<int>(test_pos.size());
      out.converged = converged;
      if (opts.family == Family::Logistic)
        for (std::size_t j = 0; j < ytest.size(); ++j)
          if ((pred.value[j] > 0.5 ? 1.0 : 0.0) != ytest[j]) ++out.misclassified;
      out.usable = true;
    } catch (const std::exception& e) {
      out.note = e.what();
    }
    return out;
  };

  std::vector<std::future<FoldOutcome>> futures;
  futures.reserve(static_cast<std::size_t>(cv.folds));
  for (int f = 0; f < cv.folds; ++f)
    futures.push_back(std::async(std::launch::async, run_fold, f));

  double weighted = 0.0;
  long total = 0, wrong = 0;
  std::vector<double> errors;
  for (int f = 0; f < cv.folds; ++f) {
    FoldOutcome out = futures[static_cast<std::size_t>(f)].get();
    if (!out.usable) {
      res.notes.push_back("fold " + std::to_string(f + 1) +
                          " excluded: " + out.note);
      continue;
    }
    if (!out.converged)
      res.notes.push_back("fold " + std::to_string(f + 1) +
                          ": fit did not converge");
    res.fold_errors.push_back(out.err);
    res.fold_sizes.push_back(out.size);
    res.fold_converged.push_back(out.converged ? 1 : 0);
    errors.push_back(out.err);
    weighted += out.err * out.size;
    total += out.size;
    wrong += out.misclassified;
  }

  if (errors.empty()) throw DataError("every cross-validation fold failed");
  res.epe = weighted / static_cast<double>(total);
  if (errors.size() > 1) {
    double mean = 0.0;
    for (double e : errors) mean += e;
    mean /= static_cast<double>(errors.size());
    double ss = 0.0;
    for (double e : errors) ss += (e - mean) * (e - mean);
    double sd = std::sqrt(ss / static_cast<double>(errors.size() - 1));
    res.se_epe = sd / std::sqrt(static_cast<double>(errors.size()));
  }
  res.mcr = opts.family == Family::Logistic
                ? 100.0 * static_cast<double>(wrong) / static_cast<double>(total)
                : std::numeric_limits<double>::quiet_NaN();
  return res;
}

}  // namespace glmos
