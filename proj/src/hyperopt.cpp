#include "oose/hyperopt.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "detail/stats.hpp"

namespace oose::hyperopt {

InitGrid lean_grid() {
  InitGrid g;
  g.tau_scales = {0.5, 1.0, 2.0};
  g.noise_fracs = {1e-3, 1e-2};
  return g;
}

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr int kMaxIter = 100;
constexpr double kGradTol = 1e-6;
constexpr double kArmijo = 1e-4;
constexpr double kShrink = 0.5;
constexpr int kMaxBacktracks = 40;
constexpr double kRcondMin = 1e-12;

// Everything the objective and its gradient share for one (tau, noise)
// evaluation: the noisy kernel matrix, its inverse B, alpha = B y.
struct Core {
  double objective = 0.0;
  double tau = 0.0, noise = 0.0;
  Matrix Kn;     // kernel matrix + noise on the diagonal
  Matrix B;      // (K + noise I)^-1
  Vector alpha;  // B y
};

// The leave-one-out log predictive density in closed form: with B as above,
// the held-out residual of point i is alpha_i / B_ii and its predictive
// variance (including observation noise) is 1 / B_ii.  Returns nullopt when
// the factorization fails, the reciprocal condition estimate drops below
// 1e-12, or the result is not finite; the optimizer treats those points as
// outside the feasible region.
std::optional<Core> eval_core(const Matrix& D2, const Vector& y, double tau,
                              double noise) {
  if (!(tau > 0.0) || !std::isfinite(tau) || !(noise >= 0.0) || !std::isfinite(noise))
    return std::nullopt;
  const Index m = D2.rows();
  const double inv_tau_sq = 1.0 / (tau * tau);
  if (!std::isfinite(inv_tau_sq)) return std::nullopt;

  Core c;
  c.tau = tau;
  c.noise = noise;
  c.Kn.resize(m, m);
  for (Index i = 0; i < m; ++i) {
    c.Kn(i, i) = 1.0 + noise;
    for (Index j = 0; j < i; ++j) {
      const double k = detail::se_from_sq_dist(D2(i, j), inv_tau_sq);
      c.Kn(i, j) = k;
      c.Kn(j, i) = k;
    }
  }

  Eigen::LLT<Matrix> llt(c.Kn);
  if (llt.info() != Eigen::Success) return std::nullopt;
  if (llt.rcond() < kRcondMin) return std::nullopt;

  c.B = llt.solve(Matrix::Identity(m, m));
  c.alpha = c.B * y;

  double obj = 0.0;
  for (Index i = 0; i < m; ++i) {
    const double bi = c.B(i, i);
    if (!(bi > 0.0)) return std::nullopt;
    const double ai = c.alpha(i);
    obj += 0.5 * std::log(bi) - (ai * ai) / (2.0 * bi) - 0.5 * kLog2Pi;
  }
  if (!std::isfinite(obj)) return std::nullopt;
  c.objective = obj;
  return c;
}

// Gradient with respect to (log tau, log noise).  For a hyperparameter theta
// with Z = B dK/dtheta, the objective derivative is
//   sum_i [ alpha_i (Z alpha)_i - (1 + alpha_i^2 / B_ii) (Z B)_ii / 2 ] / B_ii,
// the standard closed form for the LOO pseudo-likelihood.  dK/dlog tau has
// entries 2 tau^-2 r^2 k (zero diagonal); dK/dlog noise is noise * I.
std::pair<double, double> gradient(const Matrix& D2, const Core& c) {
  const Index m = D2.rows();
  const double inv_tau_sq = 1.0 / (c.tau * c.tau);

  Matrix P(m, m);
  for (Index i = 0; i < m; ++i) {
    P(i, i) = 0.0;
    for (Index j = 0; j < i; ++j) {
      const double g = 2.0 * inv_tau_sq * D2(i, j) * c.Kn(i, j);
      P(i, j) = g;
      P(j, i) = g;
    }
  }

  const Vector Za_tau = c.B * (P * c.alpha);
  const Matrix PB = P * c.B;
  const Vector Za_noise = c.noise * (c.B * c.alpha);

  double g_tau = 0.0, g_noise = 0.0;
  for (Index i = 0; i < m; ++i) {
    const double bi = c.B(i, i);
    const double ai = c.alpha(i);
    const double zb_tau = c.B.col(i).dot(PB.col(i));       // (B P B)_ii
    const double zb_noise = c.noise * c.B.col(i).squaredNorm();  // (B nI B)_ii
    const double half_term = 0.5 * (1.0 + (ai * ai) / bi);
    g_tau += (ai * Za_tau(i) - half_term * zb_tau) / bi;
    g_noise += (ai * Za_noise(i) - half_term * zb_noise) / bi;
  }
  return {g_tau, g_noise};
}

void check_inputs(const Matrix& X, const Vector& y) {
  if (X.rows() < 2)
    throw InputError("hyperopt: leave-one-out needs at least 2 points, got " +
                     std::to_string(X.rows()));
  if (y.size() != X.rows())
    throw InputError("hyperopt: target length " + std::to_string(y.size()) +
                     " does not match " + std::to_string(X.rows()) + " points");
  if (!y.allFinite()) throw InputError("hyperopt: targets must be finite");
}

enum class RestartStatus { invalid_init, converged, step_limit, stalled };

struct RestartOutcome {
  RestartStatus status = RestartStatus::invalid_init;
  int accepted_steps = 0;
  double log_tau = 0.0, log_noise = 0.0;
  double objective = -std::numeric_limits<double>::infinity();
  std::vector<TracePoint> trace;
};

std::optional<Core> eval_logs(const Matrix& D2, const Vector& y, double lt, double ln) {
  // Bounds keep exp() inside double range; outside is simply infeasible.
  if (!(std::abs(lt) <= 60.0) || !(ln <= 700.0) || !(ln >= -746.0)) return std::nullopt;
  return eval_core(D2, y, std::exp(lt), std::exp(ln));
}

RestartOutcome run_restart(const Matrix& D2, const Vector& y, int restart_id,
                           double lt0, double ln0) {
  RestartOutcome out;
  out.log_tau = lt0;
  out.log_noise = ln0;

  std::optional<Core> core = eval_logs(D2, y, lt0, ln0);
  if (!core) return out;
  out.status = RestartStatus::step_limit;
  out.objective = core->objective;
  out.trace.push_back({restart_id, 0, core->objective});

  Eigen::Vector2d x(lt0, ln0);
  auto [g1, g2] = gradient(D2, *core);
  Eigen::Vector2d g(g1, g2), dir = g;

  for (int iter = 1; iter <= kMaxIter; ++iter) {
    if (g.norm() <= kGradTol) {
      out.status = RestartStatus::converged;
      break;
    }
    if (g.dot(dir) <= 0.0) dir = g;  // reset: not an ascent direction
    const double gd = g.dot(dir);

    // Backtracking from a trial step capped at 2 log-units of displacement.
    double step = std::min(1.0, 2.0 / dir.cwiseAbs().maxCoeff());
    bool accepted = false;
    Eigen::Vector2d cand;
    std::optional<Core> cand_core;
    for (int bt = 0; bt <= kMaxBacktracks; ++bt) {
      cand = x + step * dir;
      cand_core = eval_logs(D2, y, cand(0), cand(1));
      if (cand_core &&
          cand_core->objective >= core->objective + kArmijo * step * gd) {
        accepted = true;
        break;
      }
      step *= kShrink;
    }
    if (!accepted) {
      out.status = RestartStatus::stalled;
      break;
    }

    x = cand;
    core = std::move(cand_core);
    ++out.accepted_steps;
    out.trace.push_back({restart_id, iter, core->objective});

    auto [h1, h2] = gradient(D2, *core);
    Eigen::Vector2d gn(h1, h2);
    const double beta = std::max(0.0, gn.dot(gn - g) / g.squaredNorm());
    dir = gn + beta * dir;
    g = gn;
  }

  out.log_tau = x(0);
  out.log_noise = x(1);
  out.objective = core->objective;
  return out;
}

}  // namespace

double loocv_objective(const Matrix& X, const Vector& y, const KernelParams& p) {
  validate(p);
  check_inputs(X, y);
  const Matrix D2 = pairwise_sq_dists(X);
  auto core = eval_core(D2, y, p.tau, p.noise_var);
  if (!core)
    throw NumericalError("hyperopt: objective undefined at tau = " +
                         std::to_string(p.tau) + ", noise_var = " +
                         std::to_string(p.noise_var) +
                         " (factorization failed or ill-conditioned)");
  return core->objective;
}

std::pair<double, double> loocv_gradient(const Matrix& X, const Vector& y,
                                         const KernelParams& p) {
  validate(p);
  check_inputs(X, y);
  const Matrix D2 = pairwise_sq_dists(X);
  auto core = eval_core(D2, y, p.tau, p.noise_var);
  if (!core)
    throw NumericalError("hyperopt: gradient undefined at tau = " +
                         std::to_string(p.tau) + ", noise_var = " +
                         std::to_string(p.noise_var) +
                         " (factorization failed or ill-conditioned)");
  return gradient(D2, *core);
}

HyperOptReport optimize(const Matrix& X, const Vector& y, const InitGrid& grid) {
  check_inputs(X, y);
  if (grid.tau_scales.empty() || grid.noise_fracs.empty())
    throw InputError("hyperopt: initialization grid must be non-empty");
  for (double s : grid.tau_scales)
    if (!(s > 0.0) || !std::isfinite(s))
      throw InputError("hyperopt: tau scales must be finite and > 0");
  for (double f : grid.noise_fracs)
    if (!(f > 0.0) || !std::isfinite(f))
      throw InputError("hyperopt: noise fractions must be finite and > 0");

  const Matrix D2 = pairwise_sq_dists(X);
  const double med_sq = detail::median_offdiag(D2);
  if (!(med_sq > 0.0))
    throw InputError("hyperopt: degenerate point set (median pairwise distance is 0)");
  const double med_dist = std::sqrt(med_sq);

  const double mean_y = y.mean();
  const double var_y = (y.array() - mean_y).square().sum() / static_cast<double>(y.size());
  const double var_floor = std::max(var_y, 1e-12);

  const int n_restarts = static_cast<int>(grid.size());
  std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(n_restarts));

#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < n_restarts; ++r) {
    const std::size_t ti = static_cast<std::size_t>(r) / grid.noise_fracs.size();
    const std::size_t ni = static_cast<std::size_t>(r) % grid.noise_fracs.size();
    const double lt0 = std::log(grid.tau_scales[ti] * med_dist);
    const double ln0 = std::log(grid.noise_fracs[ni] * var_floor);
    outcomes[static_cast<std::size_t>(r)] = run_restart(D2, y, r, lt0, ln0);
  }

  int best = -1;
  bool any_step = false;
  bool any_converged_clean = false;
  for (int r = 0; r < n_restarts; ++r) {
    const auto& o = outcomes[static_cast<std::size_t>(r)];
    if (o.status == RestartStatus::invalid_init) continue;
    if (o.accepted_steps > 0) any_step = true;
    if (o.status == RestartStatus::converged) any_converged_clean = true;
    if (best < 0 || o.objective > outcomes[static_cast<std::size_t>(best)].objective)
      best = r;
  }
  if (best < 0)
    throw NumericalError(
        "hyperopt: no feasible point on the initialization grid (every "
        "factorization failed or was ill-conditioned)");

  HyperOptReport rep;
  const auto& bo = outcomes[static_cast<std::size_t>(best)];
  rep.best_params.tau = std::exp(bo.log_tau);
  rep.best_params.noise_var = std::exp(bo.log_noise);
  rep.best_objective = bo.objective;
  rep.restarts_used = n_restarts;
  rep.line_search_failed = !any_step && !any_converged_clean;
  for (const auto& o : outcomes)
    rep.trace.insert(rep.trace.end(), o.trace.begin(), o.trace.end());
  return rep;
}

}  // namespace oose::hyperopt
