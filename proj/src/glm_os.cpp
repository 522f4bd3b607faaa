#include "glmos/glm_os.hpp"

#include <algorithm>
#include <cmath>

#include "fit_internal.hpp"
#include "glmos/kernels.hpp"

namespace glmos {

namespace {

using detail::StepCandidate;
using detail::VarState;

// All per-row work for one fit lives here; the kernels table is grabbed once.
struct GlmOsEngine {
  const Dataset& ds;
  const FitOptions& opt;
  const kernels::Ops& K = kernels::ops();

  std::size_t n;
  std::vector<VarState> vars;
  double beta0 = 0.0;

  std::vector<std::vector<double>> phi;  // phi[k][i] = v_k[g_k[i]]
  std::vector<double> eta, grad, hess;
  double nll = 0.0;

  FitReport rep;

  GlmOsEngine(const Dataset& d, const FitOptions& o) : ds(d), opt(o), n(d.n()) {}

  void log_event(const std::string& e) {
    if (rep.events.size() < 2000) rep.events.push_back(e);
  }

  void init() {
    double ybar = 0.0;
    for (double v : ds.y) ybar += v;
    ybar /= static_cast<double>(n);
    beta0 = std::log(ybar / (1.0 - ybar));

    eta.assign(n, beta0);
    grad.resize(n);
    hess.resize(n);
    for (const auto& enc : ds.vars) {
      vars.push_back(detail::init_var_state(enc, &rep.warnings));
      phi.emplace_back(n, 0.0);
      auto& s = vars.back();
      // beta starts at zero, so eta is untouched; phi caches the gather.
      K.regather_update_eta(enc.g.data(), s.v.data(), 0.0, phi.back().data(),
                            eta.data(), n);
    }
    nll = K.neg_loglik(eta.data(), ds.y.data(), n);
  }

  // Newton step on one coefficient (k = -1 is the intercept), with halving
  // until the negative log-likelihood does not increase.
  void beta_step(int k) {
    K.grad_hess(eta.data(), ds.y.data(), grad.data(), hess.data(), n);
    double num, den;
    if (k < 0) {
      num = K.vsum(grad.data(), n);
      den = K.vsum(hess.data(), n);
    } else {
      num = K.dot(phi[k].data(), grad.data(), n);
      den = K.weighted_dot(phi[k].data(), hess.data(), phi[k].data(), n);
    }
    if (!(den > 0.0)) return;
    double delta = -num / den;
    const double* x = k < 0 ? nullptr : phi[k].data();
    double applied = 0.0;
    for (int attempt = 0; attempt <= opt.step_halving_max; ++attempt) {
      double want = delta;
      if (x)
        K.axpy(want - applied, x, eta.data(), n);
      else
        for (std::size_t i = 0; i < n; ++i) eta[i] += want - applied;
      applied = want;
      double cand = K.neg_loglik(eta.data(), ds.y.data(), n);
      if (cand <= nll) {
        nll = cand;
        if (k < 0) beta0 += applied;
        else vars[k].beta += applied;
        if (attempt > 0) {
          rep.halvings += attempt;
          log_event("beta step halved x" + std::to_string(attempt) +
                    (k < 0 ? " (intercept)" : " (" + vars[k].enc->name + ")"));
        }
        return;
      }
      delta *= 0.5;
    }
    // Undo: no acceptable step.
    if (x)
      K.axpy(-applied, x, eta.data(), n);
    else
      for (std::size_t i = 0; i < n; ++i) eta[i] -= applied;
    ++rep.reverts;
    log_event(std::string("beta step reverted") +
              (k < 0 ? " (intercept)" : " (" + vars[k].enc->name + ")"));
  }

  void v_step(int k) {
    VarState& s = vars[k];
    const EncodedVariable& enc = *s.enc;
    if (enc.level == Level::Numeric) return;
    if (std::abs(s.beta) < 1e-12) {
      ++rep.skipped_v_updates;
      return;
    }
    K.grad_hess(eta.data(), ds.y.data(), grad.data(), hess.data(), n);
    int C = enc.num_categories();
    std::vector<double> S(C), H(C);
    kernels::category_sums(enc.g.data(), grad.data(), hess.data(), S.data(),
                           H.data(), n, C);
    // Category-wise Newton update of the unrestricted quantification:
    // (beta*G)' diag(h) (beta*G) is diagonal with entries beta^2 * H_c.
    std::vector<double> target(C);
    for (int c = 0; c < C; ++c) target[c] = s.v[c] - S[c] / (s.beta * H[c]);

    auto r = restrict_and_standardize(enc.level, target, H, enc.counts,
                                      s.spline ? &s.B : nullptr);
    if (!r) {
      ++rep.degenerate_skips;
      log_event("degenerate restriction skipped (" + enc.name + ")");
      return;
    }

    StepCandidate cand = detail::candidate_from(*r);
    StepCandidate prev = detail::candidate_from(s);
    for (int attempt = 0; attempt <= opt.step_halving_max; ++attempt) {
      K.regather_update_eta(enc.g.data(), cand.v.data(), s.beta,
                            phi[k].data(), eta.data(), n);
      double try_nll = K.neg_loglik(eta.data(), ds.y.data(), n);
      if (try_nll <= nll) {
        nll = try_nll;
        detail::apply_candidate(s, cand);
        if (attempt > 0) {
          rep.halvings += attempt;
          log_event("v step halved x" + std::to_string(attempt) + " (" + enc.name + ")");
        }
        return;
      }
      auto mid = detail::blend_halfway(s, cand, enc.level, s.B, enc.counts);
      if (!mid) break;
      cand = *mid;
    }
    // Restore the previous quantification.
    K.regather_update_eta(enc.g.data(), prev.v.data(), s.beta, phi[k].data(),
                          eta.data(), n);
    nll = K.neg_loglik(eta.data(), ds.y.data(), n);
    ++rep.reverts;
    log_event("v step reverted (" + enc.name + ")");
  }
};

}  // namespace

GlmOsResult fit_glm_os(const Dataset& ds, const FitOptions& opt) {
  if (ds.family != Family::Logistic)
    throw ConfigError("fit_glm_os expects a logistic-family dataset");
  GlmOsEngine e(ds, opt);
  e.init();

  double prev = e.nll;
  for (int cycle = 1; cycle <= opt.max_cycles; ++cycle) {
    e.beta_step(-1);
    for (std::size_t k = 0; k < e.vars.size(); ++k) {
      e.v_step(static_cast<int>(k));
      e.beta_step(static_cast<int>(k));
    }
    e.rep.loss_trace.push_back(e.nll);
    e.rep.cycles = cycle;
    if (std::abs(prev - e.nll) <= opt.tol * std::max(1.0, std::abs(prev))) {
      e.rep.converged = true;
      break;
    }
    prev = e.nll;
  }
  e.rep.final_loss = e.nll;
  if (!e.rep.converged)
    e.rep.warnings.push_back("not converged after " +
                             std::to_string(opt.max_cycles) + " cycles");

  double max_eta = 0.0;
  for (double v : e.eta) max_eta = std::max(max_eta, std::abs(v));
  if (max_eta > 30.0)
    e.rep.warnings.push_back(
        "quasi-separation suspected: |linear predictor| reaches " +
        std::to_string(max_eta));

  for (auto& s : e.vars) detail::canonicalize_sign(s);
  GlmOsResult out;
  out.model = detail::build_model(ds, e.vars, e.beta0);
  out.report = std::move(e.rep);
  return out;
}

DummyLogisticFit dummy_logistic_fit(const Dataset& ds, double tol, int max_iter) {
  if (ds.family != Family::Logistic)
    throw ConfigError("dummy_logistic_fit expects a logistic-family dataset");
  const auto& K = kernels::ops();
  std::size_t n = ds.n();

  // Design: intercept, then per variable either C-1 dummies (step levels,
  // first category is the reference) or one z-scored numeric column.
  std::vector<std::string> names{"(intercept)"};
  std::vector<Eigen::VectorXd> cols;
  for (const auto& var : ds.vars) {
    if (is_step(var.level)) {
      for (int c = 1; c < var.num_categories(); ++c) {
        Eigen::VectorXd col = Eigen::VectorXd::Zero(n);
        for (std::size_t i = 0; i < n; ++i)
          if (var.g[i] == c) col[i] = 1.0;
        cols.push_back(col);
        names.push_back(var.name + "=" + var.labels[c]);
      }
    } else {
      auto st = weighted_standardization(var.values, var.counts);
      if (!st) throw DataError("variable '" + var.name + "' is constant");
      Eigen::VectorXd col(n);
      for (std::size_t i = 0; i < n; ++i) col[i] = st->apply(var.values[var.g[i]]);
      cols.push_back(col);
      names.push_back(var.name);
    }
  }
  Eigen::Index p = static_cast<Eigen::Index>(cols.size()) + 1;
  Eigen::MatrixXd X(n, p);
  X.col(0).setOnes();
  for (Eigen::Index j = 1; j < p; ++j) X.col(j) = cols[j - 1];

  Eigen::Map<const Eigen::VectorXd> y(ds.y.data(), n);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  std::vector<double> eta(n, 0.0), grad(n), hess(n);

  DummyLogisticFit fit;
  fit.names = names;
  double nll = K.neg_loglik(eta.data(), ds.y.data(), n);

  for (int it = 0; it < max_iter; ++it) {
    fit.iterations = it + 1;
    K.grad_hess(eta.data(), ds.y.data(), grad.data(), hess.data(), n);
    Eigen::Map<const Eigen::VectorXd> g(grad.data(), n);
    Eigen::Map<const Eigen::VectorXd> w(hess.data(), n);
    Eigen::VectorXd score = X.transpose() * g;
    Eigen::MatrixXd info = X.transpose() * w.asDiagonal() * X;
    Eigen::VectorXd delta = info.ldlt().solve(-score);
    if (!delta.allFinite())
      throw DataError("singular information matrix (rank-deficient design)");
    if (score.norm() > 1e-8) {
      double rel_resid = (info * delta + score).norm() / score.norm();
      if (rel_resid > 1e-4)
        throw DataError("singular information matrix (rank-deficient design)");
    }

    // Damped Newton with the same no-increase rule as the OS fitter.
    double lambda = 1.0;
    bool accepted = false;
    for (int attempt = 0; attempt <= 30; ++attempt) {
      Eigen::VectorXd cand = beta + lambda * delta;
      for (Eigen::Index j = 0; j < p; ++j) {
        if (cand[j] > 30.0) { cand[j] = 30.0; fit.separation_warning = true; }
        if (cand[j] < -30.0) { cand[j] = -30.0; fit.separation_warning = true; }
      }
      Eigen::VectorXd eta_cand = X * cand;
      double cand_nll = K.neg_loglik(eta_cand.data(), ds.y.data(), n);
      if (cand_nll <= nll) {
        double change = nll - cand_nll;
        beta = cand;
        std::copy(eta_cand.data(), eta_cand.data() + n, eta.begin());
        accepted = true;
        nll = cand_nll;
        if (change <= tol * std::max(1.0, std::abs(nll))) fit.converged = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) fit.converged = true;  // no improving direction left
    if (fit.converged) break;
  }

  fit.beta = beta;
  fit.negloglik = nll;
  fit.prob.resize(n);
  K.sigmoid(eta.data(), fit.prob.data(), n);
  return fit;
}

}  // namespace glmos
