#include "glmos/os_linear.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>

#include "fit_internal.hpp"
#include "glmos/errors.hpp"
#include "glmos/kernels.hpp"

namespace glmos {

namespace {

void log_event(FitReport& rep, std::string msg) {
  if (rep.events.size() < 2000) rep.events.push_back(std::move(msg));
}

}  // namespace

// Alternating least squares. Each pass cycles over variables; for variable k
// the partial residual u = r + beta_k * phi_k is reduced to category means,
// projected onto the scaling level, and restandardized, after which
// beta_k = phi_k . u / n is the exact minimizer (standardized phi has squared
// norm n). Every block update is an exact minimizer over its block, so the
// squared-error loss is nonincreasing without any step-size control.
OsLinearResult fit_os_linear(const Dataset& ds, const FitOptions& opt) {
  if (ds.family != Family::Linear)
    throw ConfigError("fit_os_linear requires a linear-family dataset");
  const std::size_t n = ds.n();
  if (n == 0) throw DataError("no rows to fit");
  const std::size_t p = ds.vars.size();
  const kernels::Ops& K = kernels::ops();

  OsLinearResult out;
  FitReport& rep = out.report;

  double ybar = K.vsum(ds.y.data(), n) / static_cast<double>(n);
  std::vector<double> yc(n);
  for (std::size_t i = 0; i < n; ++i) yc[i] = ds.y[i] - ybar;

  std::vector<detail::VarState> states;
  states.reserve(p);
  for (const auto& enc : ds.vars) states.push_back(detail::init_var_state(enc, &rep.warnings));

  std::vector<std::vector<double>> phi(p, std::vector<double>(n, 0.0));
  auto gather = [&](std::size_t k) {
    const std::int32_t* g = ds.vars[k].g.data();
    const double* v = states[k].v.data();
    double* ph = phi[k].data();
    for (std::size_t i = 0; i < n; ++i) ph[i] = v[g[i]];
  };
  for (std::size_t k = 0; k < p; ++k) gather(k);

  // Initial coefficients from ordinary least squares on the initial
  // quantifications; with standardized columns the Gram matrix is n on the
  // diagonal, so a small ridge keeps collinear starts solvable.
  {
    Eigen::MatrixXd G(p, p);
    Eigen::VectorXd b(p);
    for (std::size_t k = 0; k < p; ++k) {
      for (std::size_t j = k; j < p; ++j) {
        double d = K.dot(phi[k].data(), phi[j].data(), n);
        G(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = d;
        G(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = d;
      }
      G(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) += 1e-10 * static_cast<double>(n);
      b(static_cast<Eigen::Index>(k)) = K.dot(phi[k].data(), yc.data(), n);
    }
    Eigen::VectorXd beta = p > 0 ? Eigen::VectorXd(G.ldlt().solve(b)) : Eigen::VectorXd();
    for (std::size_t k = 0; k < p; ++k) {
      double bk = beta(static_cast<Eigen::Index>(k));
      states[k].beta = std::isfinite(bk) ? bk : 0.0;
    }
  }

  std::vector<double> r = yc;
  for (std::size_t k = 0; k < p; ++k) K.axpy(-states[k].beta, phi[k].data(), r.data(), n);

  double loss = K.dot(r.data(), r.data(), n);
  rep.loss_trace.push_back(loss);

  std::vector<double> u(n);
  std::vector<double> cat_sum;
  std::vector<double> target;

  bool converged = false;
  int cycle = 0;
  for (; cycle < opt.max_cycles && !converged; ++cycle) {
    for (std::size_t k = 0; k < p; ++k) {
      detail::VarState& s = states[k];
      const EncodedVariable& enc = ds.vars[k];
      const std::size_t C = enc.num_categories();

      u = r;
      K.axpy(s.beta, phi[k].data(), u.data(), n);

      if (s.enc->level != Level::Numeric) {
        if (std::abs(s.beta) < 1e-12) {
          ++rep.skipped_v_updates;
        } else {
          cat_sum.assign(C, 0.0);
          kernels::category_sums(enc.g.data(), u.data(), nullptr, cat_sum.data(), nullptr, n, C);
          double sgn = s.beta < 0.0 ? -1.0 : 1.0;
          target.resize(C);
          for (std::size_t c = 0; c < C; ++c) target[c] = sgn * cat_sum[c] / enc.counts[c];

          auto res = restrict_and_standardize(s.enc->level, target, enc.counts, enc.counts,
                                              s.spline ? &s.B : nullptr);
          if (!res) {
            ++rep.degenerate_skips;
            log_event(rep, "cycle " + std::to_string(cycle + 1) + " var " + enc.name +
                               ": degenerate restriction, keeping previous quantification");
          } else {
            detail::apply_candidate(s, detail::candidate_from(*res));
            gather(k);
          }
        }
      }

      s.beta = K.dot(phi[k].data(), u.data(), n) / static_cast<double>(n);
      r = u;
      K.axpy(-s.beta, phi[k].data(), r.data(), n);
    }

    double prev = loss;
    loss = K.dot(r.data(), r.data(), n);
    rep.loss_trace.push_back(loss);
    if (std::abs(prev - loss) <= opt.tol * std::max(1.0, std::abs(prev))) converged = true;
  }

  rep.cycles = cycle;
  rep.converged = converged;
  rep.final_loss = loss;
  if (!converged)
    rep.warnings.push_back("did not converge within " + std::to_string(opt.max_cycles) +
                           " cycles");

  for (auto& s : states) detail::canonicalize_sign(s);
  out.model = detail::build_model(ds, states, ybar);
  return out;
}

}  // namespace glmos
