#pragma once

#include <atomic>
#include <memory>
#include <optional>
#include <vector>

#include "oose/kernel.hpp"
#include "oose/types.hpp"

namespace oose::hyperopt {
struct InitGrid;
struct HyperOptReport;
}  // namespace oose::hyperopt

namespace oose::gpr {

// Counters for predictive variances that had to be clamped into [0, 1].
// Slightly negative values are expected roundoff; anything below -1e-8 is
// counted separately as a conditioning symptom.
struct ClampStats {
  std::atomic<long> clamped{0};
  std::atomic<long> severe{0};
};

// One scalar-output GP trained on the shared inputs: A = (K + sigma^2 I)^-1
// and w = A y, kept explicitly so prediction is two dot products and the
// model can be serialized field-for-field.
struct GprDimModel {
  Matrix A;                                      // m x m
  Vector w;                                      // m
  KernelParams params;
  std::shared_ptr<const Matrix> train_inputs;    // m x N, shared across dims
  double target_offset = 0.0;                    // added back to the mean
};

struct PredictiveResult {
  Vector mean;      // d
  Vector variance;  // d, clamped to [0, 1]
  double variance_total() const { return variance.sum(); }
};

struct GprModel {
  std::vector<GprDimModel> dims;
  std::shared_ptr<ClampStats> clamp_stats = std::make_shared<ClampStats>();

  Index dim() const { return static_cast<Index>(dims.size()); }
  Index train_size() const {
    return dims.empty() ? 0 : dims.front().train_inputs->rows();
  }
  Index input_dim() const {
    return dims.empty() ? 0 : dims.front().train_inputs->cols();
  }
};

// How per-dimension kernel parameters are chosen by train().
struct TrainOptions {
  // nullopt: run the leave-one-out optimizer per dimension (see hyperopt).
  std::optional<KernelParams> fixed;
  // Initialization grid for the optimizer; nullptr = module default.
  const hyperopt::InitGrid* grid = nullptr;
  // Subtract each target's mean before fitting, add it back on predict.
  bool center_targets = false;
};

// Fit one output dimension.  X is m x N (m >= 1), y length m.  When
// noise_var = 0 a fixed jitter of 1e-10 * m is added to the diagonal before
// factorization.  Throws InputError on shape/parameter problems and
// NumericalError if the factorization fails (message carries a condition
// estimate).
GprDimModel train_dim(const Matrix& X, const Vector& y, const KernelParams& p);
GprDimModel train_dim(std::shared_ptr<const Matrix> X, const Vector& y,
                      const KernelParams& p, double target_offset = 0.0);

// Predictive mean and variance of one dimension at a single point.
// variance is clamped into [0, 1]; stats (when given) counts the clamps.
void predict_dim(const GprDimModel& m, const Eigen::Ref<const Vector>& x,
                 double& mean, double& variance, ClampStats* stats = nullptr);

// Fit d independent per-dimension models sharing one input matrix.
// Y is m x d.  reports, when non-null, receives one optimizer report per
// dimension (empty if options.fixed is set).  Error messages from a failing
// dimension are prefixed with its index.
GprModel train(const Matrix& X, const Matrix& Y, const TrainOptions& options,
               std::vector<hyperopt::HyperOptReport>* reports = nullptr);
GprModel train(const PointCloud& cloud, const Embedding& emb,
               const TrainOptions& options,
               std::vector<hyperopt::HyperOptReport>* reports = nullptr);

// All d dimensions at one query point.
PredictiveResult predict(const GprModel& m, const Eigen::Ref<const Vector>& x);

// Batch prediction, one query per row; parallel over rows, bit-identical to
// the row-by-row loop.  Returned matrices are n_star x d.
void predict_batch(const GprModel& m, const Matrix& X_star, Matrix& means,
                   Matrix& variances);
Matrix predict_mean_batch(const GprModel& m, const Matrix& X_star);

}  // namespace oose::gpr
