#include "glmos/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace glmos {

std::optional<Standardization> weighted_standardization(
    const std::vector<double>& v, const std::vector<double>& w) {
  double n = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    n += w[i];
    mean += w[i] * v[i];
  }
  mean /= n;
  double var = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    double d = v[i] - mean;
    var += w[i] * d * d;
  }
  var /= n;
  double scale = std::sqrt(var);
  if (!(scale > 1e-12 * (1.0 + std::abs(mean)))) return std::nullopt;
  return Standardization{mean, scale};
}

std::vector<double> isotonic_fit(const std::vector<double>& target,
                                 const std::vector<double>& w, bool increasing) {
  std::size_t n = target.size();
  if (!increasing) {
    std::vector<double> neg(n);
    for (std::size_t i = 0; i < n; ++i) neg[i] = -target[i];
    auto fit = isotonic_fit(neg, w, true);
    for (auto& v : fit) v = -v;
    return fit;
  }
  // Pool adjacent violators: a stack of blocks with weighted means; merge
  // while the last two are out of order.
  std::vector<double> mean(n), weight(n);
  std::vector<std::size_t> size(n);
  std::size_t top = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mean[top] = target[i];
    weight[top] = w[i];
    size[top] = 1;
    ++top;
    while (top > 1 && mean[top - 2] > mean[top - 1]) {
      double tw = weight[top - 2] + weight[top - 1];
      mean[top - 2] = (weight[top - 2] * mean[top - 2] + weight[top - 1] * mean[top - 1]) / tw;
      weight[top - 2] = tw;
      size[top - 2] += size[top - 1];
      --top;
    }
  }
  std::vector<double> out(n);
  std::size_t pos = 0;
  for (std::size_t b = 0; b < top; ++b)
    for (std::size_t k = 0; k < size[b]; ++k) out[pos++] = mean[b];
  return out;
}

std::vector<double> isotonic_best(const std::vector<double>& target,
                                  const std::vector<double>& w, bool* increasing) {
  auto up = isotonic_fit(target, w, true);
  auto down = isotonic_fit(target, w, false);
  double sse_up = 0.0, sse_down = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    double du = up[i] - target[i], dd = down[i] - target[i];
    sse_up += w[i] * du * du;
    sse_down += w[i] * dd * dd;
  }
  bool inc = !(sse_down < sse_up);
  if (increasing) *increasing = inc;
  return inc ? up : down;
}

SplineBasis SplineBasis::make(int degree, int interior_knots,
                              const std::vector<double>& values,
                              const std::vector<double>& counts,
                              std::vector<std::string>* warnings) {
  SplineBasis b;
  b.degree_ = degree;
  b.lo_ = *std::min_element(values.begin(), values.end());
  b.hi_ = *std::max_element(values.begin(), values.end());

  // Weighted empirical quantiles (inverse CDF): smallest value whose
  // cumulative weight reaches p * total.
  std::vector<std::size_t> ord(values.size());
  std::iota(ord.begin(), ord.end(), 0);
  std::sort(ord.begin(), ord.end(),
            [&](std::size_t a, std::size_t c) { return values[a] < values[c]; });
  double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  for (int j = 1; j <= interior_knots; ++j) {
    double p = static_cast<double>(j) / (interior_knots + 1);
    double cum = 0.0, q = b.hi_;
    for (std::size_t i : ord) {
      cum += counts[i];
      if (cum >= p * total - 1e-12) { q = values[i]; break; }
    }
    bool dup = (q <= b.lo_) || (q >= b.hi_) ||
               (!b.interior_.empty() && q <= b.interior_.back());
    if (dup) {
      if (warnings)
        warnings->push_back("dropped duplicate interior knot at " + std::to_string(q) +
                            " (quantile " + std::to_string(p) + ")");
      continue;
    }
    b.interior_.push_back(q);
  }

  int k = degree + 1;  // B-spline order
  for (int i = 0; i < k; ++i) b.knots_.push_back(b.lo_);
  for (double q : b.interior_) b.knots_.push_back(q);
  for (int i = 0; i < k; ++i) b.knots_.push_back(b.hi_);
  b.num_bsplines_ = b.knots_.size() - k;
  return b;
}

SplineBasis SplineBasis::from_parts(int degree, double lo, double hi,
                                    std::vector<double> interior) {
  SplineBasis b;
  b.degree_ = degree;
  b.lo_ = lo;
  b.hi_ = hi;
  b.interior_ = std::move(interior);
  int k = degree + 1;
  for (int i = 0; i < k; ++i) b.knots_.push_back(lo);
  for (double q : b.interior_) b.knots_.push_back(q);
  for (int i = 0; i < k; ++i) b.knots_.push_back(hi);
  b.num_bsplines_ = b.knots_.size() - k;
  return b;
}

void SplineBasis::eval_row(double x, double* out) const {
  int m = dim();
  if (x <= lo_) {
    std::fill(out, out + m, 0.0);
    return;
  }
  if (x >= hi_) {
    std::fill(out, out + m, 1.0);
    return;
  }
  // Cox-de Boor triangle over all order-(degree+1) B-splines, then tail sums
  // skipping the first one (it sums the whole partition of unity).
  std::size_t N = num_bsplines_;
  int k = degree_ + 1;
  std::vector<double> B(knots_.size(), 0.0);
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i)
    if (knots_[i] <= x && x < knots_[i + 1]) { B[i] = 1.0; break; }
  for (int ord = 2; ord <= k; ++ord) {
    for (std::size_t i = 0; i + ord <= knots_.size() - 1; ++i) {
      double acc = 0.0;
      double dl = knots_[i + ord - 1] - knots_[i];
      double dr = knots_[i + ord] - knots_[i + 1];
      if (dl > 0.0) acc += (x - knots_[i]) / dl * B[i];
      if (dr > 0.0) acc += (knots_[i + ord] - x) / dr * B[i + 1];
      B[i] = acc;
    }
  }
  double tail = 0.0;
  for (std::size_t j = N; j >= 2; --j) {
    tail += B[j - 1];
    out[j - 2] = tail;
  }
}

Eigen::MatrixXd SplineBasis::eval(const std::vector<double>& x) const {
  Eigen::MatrixXd M(x.size(), dim());
  std::vector<double> row(dim());
  for (std::size_t i = 0; i < x.size(); ++i) {
    eval_row(x[i], row.data());
    for (int j = 0; j < dim(); ++j) M(i, j) = row[j];
  }
  return M;
}

NnlsFit nnls(const Eigen::MatrixXd& B, const Eigen::VectorXd& target,
             const Eigen::VectorXd& w) {
  // Profile out the free intercept: weighted-center the columns and the
  // target, run plain NNLS on the centered system, recover b0 afterwards.
  Eigen::Index n = B.rows(), m = B.cols();
  (void)n;
  double wsum = w.sum();
  Eigen::VectorXd sw = w.array().sqrt();
  Eigen::VectorXd colmean(m);
  Eigen::MatrixXd A(B.rows(), m);
  for (Eigen::Index j = 0; j < m; ++j) {
    colmean[j] = w.dot(B.col(j)) / wsum;
    A.col(j) = sw.array() * (B.col(j).array() - colmean[j]);
  }
  double tmean = w.dot(target) / wsum;
  Eigen::VectorXd b = sw.array() * (target.array() - tmean);

  // Lawson-Hanson active set; passive-set least squares via the normal
  // equations with a small diagonal jitter for near-collinear bases.
  const double tol = 1e-12;
  Eigen::VectorXd a = Eigen::VectorXd::Zero(m);
  std::vector<bool> passive(m, false);
  Eigen::MatrixXd AtA = A.transpose() * A;
  Eigen::VectorXd Atb = A.transpose() * b;

  auto solve_passive = [&]() -> Eigen::VectorXd {
    std::vector<int> idx;
    for (int j = 0; j < m; ++j)
      if (passive[j]) idx.push_back(j);
    Eigen::MatrixXd G(idx.size(), idx.size());
    Eigen::VectorXd r(idx.size());
    for (std::size_t p = 0; p < idx.size(); ++p) {
      r[p] = Atb[idx[p]];
      for (std::size_t q = 0; q < idx.size(); ++q) G(p, q) = AtA(idx[p], idx[q]);
    }
    G.diagonal().array() += 1e-10;
    Eigen::VectorXd sol = G.ldlt().solve(r);
    Eigen::VectorXd full = Eigen::VectorXd::Zero(m);
    for (std::size_t p = 0; p < idx.size(); ++p) full[idx[p]] = sol[p];
    return full;
  };

  int max_outer = 3 * static_cast<int>(m) + 10;
  for (int outer = 0; outer < max_outer; ++outer) {
    Eigen::VectorXd grad = Atb - AtA * a;
    int best = -1;
    double best_g = tol;
    for (int j = 0; j < m; ++j)
      if (!passive[j] && grad[j] > best_g) { best_g = grad[j]; best = j; }
    if (best < 0) break;
    passive[best] = true;

    for (int inner = 0; inner < 2 * static_cast<int>(m) + 4; ++inner) {
      Eigen::VectorXd z = solve_passive();
      bool feasible = true;
      double alpha = 1.0;
      int pivot = -1;
      for (int j = 0; j < m; ++j) {
        if (!passive[j] || z[j] > 0.0) continue;
        feasible = false;
        double step = a[j] / (a[j] - z[j]);
        if (step < alpha) { alpha = step; pivot = j; }
      }
      if (feasible) {
        a = z;
        break;
      }
      a += alpha * (z - a);
      for (int j = 0; j < m; ++j)
        if (passive[j] && (j == pivot || a[j] <= 1e-14)) {
          a[j] = 0.0;
          passive[j] = false;
        }
    }
  }

  NnlsFit fit;
  fit.coef = a;
  fit.intercept = tmean - colmean.dot(a);
  return fit;
}

std::optional<Restriction> restrict_and_standardize(
    Level level, const std::vector<double>& target,
    const std::vector<double>& proj_w, const std::vector<double>& counts,
    const Eigen::MatrixXd* B) {
  std::size_t C = target.size();
  Restriction r;
  std::vector<double> raw;

  switch (level) {
    case Level::NominalStep:
      raw = target;
      break;

    case Level::OrdinalStep: {
      bool inc;
      raw = isotonic_best(target, proj_w, &inc);
      r.direction = inc ? 1 : -1;
      break;
    }

    case Level::SplineNonmonotone: {
      // Weighted LS of the target on [1 | B].
      Eigen::Map<const Eigen::VectorXd> t(target.data(), C);
      Eigen::Map<const Eigen::VectorXd> w(proj_w.data(), C);
      Eigen::MatrixXd X(C, B->cols() + 1);
      X.col(0).setOnes();
      X.rightCols(B->cols()) = *B;
      Eigen::MatrixXd XtW = X.transpose() * w.asDiagonal();
      Eigen::MatrixXd G = XtW * X;
      G.diagonal().array() += 1e-10;
      Eigen::VectorXd sol = G.ldlt().solve(XtW * t);
      r.spline_intercept = sol[0];
      r.spline_coef = sol.tail(B->cols());
      Eigen::VectorXd fitted = X * sol;
      raw.assign(fitted.data(), fitted.data() + C);
      break;
    }

    case Level::SplineMonotone: {
      // Nonnegative I-spline weights give a nondecreasing curve; fit the
      // negated target for the decreasing direction and keep the lower
      // weighted SSE (ties to increasing).
      Eigen::Map<const Eigen::VectorXd> t(target.data(), C);
      Eigen::Map<const Eigen::VectorXd> w(proj_w.data(), C);
      NnlsFit up = nnls(*B, t, w);
      NnlsFit down = nnls(*B, -t, w);
      Eigen::VectorXd fit_up = (*B) * up.coef;
      fit_up.array() += up.intercept;
      Eigen::VectorXd fit_down = -((*B) * down.coef).array() - down.intercept;
      double sse_up = (w.array() * (fit_up - t).array().square()).sum();
      double sse_down = (w.array() * (fit_down - t).array().square()).sum();
      if (sse_down < sse_up) {
        r.direction = -1;
        r.spline_intercept = -down.intercept;
        r.spline_coef = -down.coef;
        raw.assign(fit_down.data(), fit_down.data() + C);
      } else {
        r.direction = 1;
        r.spline_intercept = up.intercept;
        r.spline_coef = up.coef;
        raw.assign(fit_up.data(), fit_up.data() + C);
      }
      break;
    }

    case Level::Numeric:
      // Numeric quantifications are fixed z-scores; nothing to restrict.
      raw = target;
      break;
  }

  auto std_opt = weighted_standardization(raw, counts);
  if (!std_opt) return std::nullopt;
  r.std = *std_opt;
  r.v.resize(C);
  for (std::size_t c = 0; c < C; ++c) r.v[c] = r.std.apply(raw[c]);
  return r;
}

}  // namespace glmos
