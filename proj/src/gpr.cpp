#include "oose/gpr.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

#include "oose/hyperopt.hpp"

namespace oose::gpr {

namespace {

// Diagonal load applied when the model is noise-free; keeps the Cholesky of
// a unit-diagonal kernel matrix well-posed without visibly perturbing
// predictions on reasonably conditioned problems.
double jitter_for(Index m) { return 1e-10 * static_cast<double>(m); }

[[noreturn]] void throw_factorization_failure(const Matrix& Kn, const KernelParams& p) {
  // LLT has already failed; an eigenvalue bound gives the caller something
  // actionable.  This path is cold, the extra decomposition is fine.
  Eigen::SelfAdjointEigenSolver<Matrix> es(Kn, Eigen::EigenvaluesOnly);
  std::string detail = "unavailable";
  if (es.info() == Eigen::Success) {
    const double lmin = es.eigenvalues().minCoeff();
    const double lmax = es.eigenvalues().maxCoeff();
    detail = "eigenvalue range [" + std::to_string(lmin) + ", " + std::to_string(lmax) +
             "], condition estimate " +
             std::to_string(lmax / (lmin > 0.0 ? lmin : std::nextafter(0.0, 1.0)));
  }
  throw NumericalError(
      "gpr: Cholesky factorization of K + sigma^2 I failed (m = " +
      std::to_string(Kn.rows()) + ", tau = " + std::to_string(p.tau) +
      ", noise_var = " + std::to_string(p.noise_var) + "; " + detail + ")");
}

}  // namespace

GprDimModel train_dim(std::shared_ptr<const Matrix> X, const Vector& y,
                      const KernelParams& p, double target_offset) {
  if (!X) throw InputError("gpr: null training inputs");
  validate(p);
  if (X->rows() < 1) throw InputError("gpr: need at least one training point");
  if (y.size() != X->rows())
    throw InputError("gpr: target length " + std::to_string(y.size()) +
                     " does not match " + std::to_string(X->rows()) + " points");
  if (!y.allFinite()) throw InputError("gpr: targets must be finite");

  const Index m = X->rows();
  Matrix Kn = kernel_matrix(*X, p.tau);
  const double diag = p.noise_var > 0.0 ? p.noise_var : jitter_for(m);
  Kn.diagonal().array() += diag;

  Eigen::LLT<Matrix> llt(Kn);
  if (llt.info() != Eigen::Success) throw_factorization_failure(Kn, p);

  GprDimModel model;
  model.A = llt.solve(Matrix::Identity(m, m));
  model.w = model.A * y;
  model.params = p;
  model.train_inputs = std::move(X);
  model.target_offset = target_offset;
  return model;
}

GprDimModel train_dim(const Matrix& X, const Vector& y, const KernelParams& p) {
  return train_dim(std::make_shared<const Matrix>(X), y, p, 0.0);
}

void predict_dim(const GprDimModel& m, const Eigen::Ref<const Vector>& x,
                 double& mean, double& variance, ClampStats* stats) {
  const Matrix& X = *m.train_inputs;
  if (x.size() != X.cols())
    throw InputError("gpr: query dimension " + std::to_string(x.size()) +
                     " does not match training dimension " + std::to_string(X.cols()));
  const Vector k = cross_kernel_row(x, X, m.params.tau);
  mean = k.dot(m.w) + m.target_offset;
  double v = 1.0 - k.dot(m.A * k);
  if (v < 0.0) {
    if (stats) {
      stats->clamped.fetch_add(1, std::memory_order_relaxed);
      if (v < -1e-8) stats->severe.fetch_add(1, std::memory_order_relaxed);
    }
    v = 0.0;
  } else if (v > 1.0) {
    v = 1.0;
  }
  variance = v;
}

GprModel train(const Matrix& X, const Matrix& Y, const TrainOptions& options,
               std::vector<hyperopt::HyperOptReport>* reports) {
  if (Y.rows() != X.rows())
    throw InputError("gpr: " + std::to_string(Y.rows()) + " target rows for " +
                     std::to_string(X.rows()) + " points");
  if (Y.cols() < 1) throw InputError("gpr: need at least one target dimension");
  if (options.fixed) validate(*options.fixed);

  const Index d = Y.cols();
  auto shared = std::make_shared<const Matrix>(X);
  GprModel model;
  model.dims.resize(static_cast<std::size_t>(d));
  if (reports) reports->clear();

  auto centered = [&](Index j, double& offset) {
    offset = options.center_targets ? Y.col(j).mean() : 0.0;
    return Vector(Y.col(j).array() - offset);
  };

  if (options.fixed) {
    // Independent per-dimension fits; parallel, but bit-identical to the
    // sequential loop (disjoint writes, exceptions re-raised in dim order).
    std::vector<std::string> errors(static_cast<std::size_t>(d));
    std::vector<int> error_kind(static_cast<std::size_t>(d), 0);
#pragma omp parallel for schedule(dynamic)
    for (Index j = 0; j < d; ++j) {
      try {
        double offset = 0.0;
        const Vector yj = centered(j, offset);
        model.dims[static_cast<std::size_t>(j)] =
            train_dim(shared, yj, *options.fixed, offset);
      } catch (const InputError& e) {
        errors[static_cast<std::size_t>(j)] = e.what();
        error_kind[static_cast<std::size_t>(j)] = 1;
      } catch (const NumericalError& e) {
        errors[static_cast<std::size_t>(j)] = e.what();
        error_kind[static_cast<std::size_t>(j)] = 2;
      }
    }
    for (Index j = 0; j < d; ++j) {
      const auto& msg = errors[static_cast<std::size_t>(j)];
      if (msg.empty()) continue;
      const std::string full = "dimension " + std::to_string(j) + ": " + msg;
      if (error_kind[static_cast<std::size_t>(j)] == 1) throw InputError(full);
      throw NumericalError(full);
    }
    return model;
  }

  hyperopt::InitGrid default_grid;
  const hyperopt::InitGrid& grid = options.grid ? *options.grid : default_grid;
  for (Index j = 0; j < d; ++j) {
    try {
      double offset = 0.0;
      const Vector yj = centered(j, offset);
      hyperopt::HyperOptReport rep = hyperopt::optimize(X, yj, grid);
      model.dims[static_cast<std::size_t>(j)] =
          train_dim(shared, yj, rep.best_params, offset);
      if (reports) reports->push_back(std::move(rep));
    } catch (const InputError& e) {
      throw InputError("dimension " + std::to_string(j) + ": " + e.what());
    } catch (const NumericalError& e) {
      throw NumericalError("dimension " + std::to_string(j) + ": " + e.what());
    }
  }
  return model;
}

GprModel train(const PointCloud& cloud, const Embedding& emb,
               const TrainOptions& options,
               std::vector<hyperopt::HyperOptReport>* reports) {
  if (cloud.size() != emb.size())
    throw InputError("gpr: cloud has " + std::to_string(cloud.size()) +
                     " points but embedding has " + std::to_string(emb.size()));
  return train(cloud.coords, emb.coords, options, reports);
}

PredictiveResult predict(const GprModel& m, const Eigen::Ref<const Vector>& x) {
  if (m.dims.empty()) throw InputError("gpr: empty model");
  PredictiveResult r;
  r.mean.resize(m.dim());
  r.variance.resize(m.dim());
  for (Index j = 0; j < m.dim(); ++j) {
    predict_dim(m.dims[static_cast<std::size_t>(j)], x, r.mean(j), r.variance(j),
                m.clamp_stats.get());
  }
  return r;
}

void predict_batch(const GprModel& m, const Matrix& X_star, Matrix& means,
                   Matrix& variances) {
  if (m.dims.empty()) throw InputError("gpr: empty model");
  if (X_star.rows() > 0 && X_star.cols() != m.input_dim())
    throw InputError("gpr: query dimension " + std::to_string(X_star.cols()) +
                     " does not match training dimension " +
                     std::to_string(m.input_dim()));
  const Index ns = X_star.rows(), d = m.dim();
  means.resize(ns, d);
  variances.resize(ns, d);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < ns; ++i) {
    const PredictiveResult r = predict(m, X_star.row(i).transpose());
    means.row(i) = r.mean.transpose();
    variances.row(i) = r.variance.transpose();
  }
}

Matrix predict_mean_batch(const GprModel& m, const Matrix& X_star) {
  Matrix means, variances;
  predict_batch(m, X_star, means, variances);
  return means;
}

}  // namespace oose::gpr
