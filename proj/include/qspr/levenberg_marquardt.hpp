#pragma once

// Small dense Levenberg-Marquardt solver for models with analytic
// Jacobians. Damping follows Marquardt's diagonal scaling; a step is only
// accepted when it lowers the sum of squares.

#include <cmath>
#include <concepts>
#include <limits>
#include <stdexcept>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qspr {

struct FitConfig {
  int max_iters = 200;
  double step_tolerance = 1e-10;  // relative parameter change
  double damping_init = 1e-3;

  void validate() const;
};

/// A least-squares model: `residual_count()` residuals, and `evaluate`
/// filling residuals and (when non-null) the Jacobian d r_i / d p_j.
template <class M>
concept LeastSquaresModel = requires(const M& m, const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* J) {
  { m.residual_count() } -> std::convertible_to<Eigen::Index>;
  m.evaluate(p, r, J);
};

enum class LmStatus { converged, max_iterations, rank_deficient, non_finite };

inline std::string_view to_string(LmStatus s) {
  switch (s) {
    case LmStatus::converged: return "converged";
    case LmStatus::max_iterations: return "max_iterations";
    case LmStatus::rank_deficient: return "rank_deficient";
    case LmStatus::non_finite: return "non_finite";
  }
  return "?";
}

struct LmResult {
  Eigen::VectorXd params;
  LmStatus status = LmStatus::max_iterations;
  int iterations = 0;
  double residual_norm = std::numeric_limits<double>::infinity();
  std::vector<double> accepted_costs;  // sum of squares after each accepted step, starting at init

  bool converged() const { return status == LmStatus::converged; }
};

inline void FitConfig::validate() const {
  if (max_iters < 1) throw std::invalid_argument("FitConfig: max_iters must be >= 1");
  if (!(step_tolerance > 0.0)) throw std::invalid_argument("FitConfig: step_tolerance must be > 0");
  if (!(damping_init > 0.0)) throw std::invalid_argument("FitConfig: damping_init must be > 0");
}

template <LeastSquaresModel Model>
LmResult lm_solve(const Model& model, Eigen::VectorXd init, const FitConfig& cfg = {}) {
  cfg.validate();
  const Eigen::Index n = init.size();
  const Eigen::Index m = model.residual_count();
  if (m < n) throw std::invalid_argument("lm_solve: fewer residuals than parameters");
  if (!init.allFinite()) throw std::invalid_argument("lm_solve: non-finite initial parameters");

  LmResult out;
  out.params = std::move(init);
  Eigen::VectorXd r(m), r_trial(m);
  Eigen::MatrixXd J(m, n);
  model.evaluate(out.params, r, &J);
  double cost = r.squaredNorm();
  out.accepted_costs.push_back(cost);
  if (!std::isfinite(cost) || !J.allFinite()) {
    out.status = LmStatus::non_finite;
    return out;
  }

  auto finish = [&](LmStatus status) {
    out.residual_norm = std::sqrt(cost);
    out.status = status;
    if (status == LmStatus::converged) {
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(J);
      qr.setThreshold(1e-10);
      if (qr.rank() < n) out.status = LmStatus::rank_deficient;
    }
    return out;
  };

  if (cost == 0.0) return finish(LmStatus::converged);

  double lambda = cfg.damping_init;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    out.iterations = it;
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    const Eigen::VectorXd diag = JtJ.diagonal().cwiseMax(1e-300);

    bool accepted = false;
    Eigen::VectorXd step;
    while (lambda < 1e16) {
      Eigen::MatrixXd A = JtJ;
      A.diagonal() += lambda * diag;
      step = A.ldlt().solve(-g);
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd trial = out.params + step;
      model.evaluate(trial, r_trial, nullptr);
      const double trial_cost = r_trial.squaredNorm();
      if (std::isfinite(trial_cost) && trial_cost < cost) {
        out.params = trial;
        cost = trial_cost;
        out.accepted_costs.push_back(cost);
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }

    const double scale = out.params.norm() + cfg.step_tolerance;
    if (!accepted) {
      // No descent at any damping: already at a (numerically exact) minimum.
      return finish(LmStatus::converged);
    }
    model.evaluate(out.params, r, &J);
    if (!J.allFinite()) return finish(LmStatus::non_finite);
    if (step.norm() <= cfg.step_tolerance * scale || cost == 0.0) return finish(LmStatus::converged);
  }
  return finish(LmStatus::max_iterations);
}

}  // namespace qspr
