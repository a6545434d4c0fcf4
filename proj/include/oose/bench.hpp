#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oose/gpr.hpp"
#include "oose/hyperopt.hpp"
#include "oose/manifold.hpp"
#include "oose/types.hpp"

namespace oose::bench {

// --- splits and error metric -----------------------------------------------

// Seed-deterministic train/test split: |train| = round(rho * m) of a
// Fisher-Yates permutation, both index lists ascending.  Requires
// 2 <= round(rho * m) <= m - 1.
struct Split {
  std::vector<Index> train_idx;
  std::vector<Index> test_idx;
};

Split make_split(Index m, double rho, std::uint64_t seed);

Matrix take_rows(const Matrix& M, const std::vector<Index>& idx);

// sqrt(mean over rows of the squared row-wise Euclidean error).
double rmse(const Matrix& A, const Matrix& B);

// --- extension strategies ---------------------------------------------------

enum class Extender { gpr, nystrom };

std::string to_string(Extender e);

struct GprExtenderOptions {
  std::optional<KernelParams> fixed;  // nullopt: leave-one-out optimizer
  hyperopt::InitGrid grid = hyperopt::lean_grid();
  bool center_targets = true;
};

struct NystromExtenderOptions {
  // tau = sqrt(median squared pairwise distance of the training split) when
  // no explicit value is given.
  std::optional<double> tau;
};

// Extend arbitrary targets Y_train (m x d) from X_train to X_test through
// the kernel eigenbasis: project the targets on the eigenvectors of
// kernel_matrix(X_train, tau) and extend each component by
// lambda^-1 k_* . v (components with |lambda| <= 1e-12 are dropped).  For
// eigenvector targets this is exactly the spectral extension; for general
// targets it matches noise-free GPR through the dual algebraic route.
Matrix nystrom_extend_targets(const Matrix& X_train, const Matrix& Y_train,
                              const Matrix& X_test, double tau);

// --- the benchmark grid -------------------------------------------------------

struct DatasetSpec {
  std::string name;
  Index n = 1000;
  std::uint64_t seed = 1;
  // Noise sd; nullopt = 1% of the clean bounding-box diagonal.
  std::optional<double> noise_sd;
};

struct BenchmarkConfig {
  std::vector<DatasetSpec> datasets;
  std::vector<EmbedMethod> methods;
  std::vector<Extender> extenders;
  std::vector<double> rhos;
  int repeats = 10;
  std::uint64_t base_seed = 1;   // repeat r uses split seed base_seed + r
  // The synthetic 3-D workflow embeds to 2; 0 asks the spectral-gap rule,
  // which on full decaying spectra tends to pick a tail dimension.
  Index dim = 2;
  ManifoldOptions manifold;
  GprExtenderOptions gpr;
  NystromExtenderOptions nystrom;
};

struct CellResult {
  std::string dataset;
  EmbedMethod method = EmbedMethod::external;
  Extender extender = Extender::gpr;
  double rho = 0.0;
  std::vector<double> rmses;           // successful repeats, in repeat order
  std::vector<int> repeat_ids;         // matching repeat indices
  std::vector<std::uint64_t> seeds;    // matching split seeds
  Index n_train = 0, n_test = 0;
  int failed_repeats = 0;
  double mean_rmse = 0.0;              // NaN when no repeat succeeded
};

struct EmbeddingInfo {
  std::string dataset;
  EmbedMethod method = EmbedMethod::external;
  Index dim = 0;
  bool failed = false;
  std::string error;
  std::map<std::string, double> params_used;
};

struct BenchmarkReport {
  BenchmarkConfig config;
  std::vector<EmbeddingInfo> embeddings;  // dataset-major, method order
  std::vector<CellResult> cells;          // dataset, method, extender, rho order

  const CellResult* find(const std::string& dataset, EmbedMethod method,
                         Extender ext, double rho) const;
};

// Each manifold learner runs once per dataset on the full cloud; every
// (extender, rho, repeat) cell then splits that one embedding, fits the
// extender on the train rows and scores RMSE against the held-out embedding
// rows.  A failing learner marks its cells failed (0 successes) without
// aborting the run; a failing repeat is recorded and skipped in the mean.
BenchmarkReport run_benchmark(const BenchmarkConfig& config);

// CSV exports, atomic writes, byte-deterministic for a fixed report.
// Cells: dataset,method,extender,rho,repeat,seed,n_train,n_test,rmse
// Aggregate: dataset,method,extender,rho,repeats_ok,repeats_failed,
//            mean_rmse,log_mean_rmse (natural log)
void export_cells_csv(const BenchmarkReport& r, const std::string& path);
void export_aggregate_csv(const BenchmarkReport& r, const std::string& path);

// --- anomaly scoring ----------------------------------------------------------

// Heat value of one prediction: h = -(total predictive variance), so 0 is
// maximal confidence and all scores are <= 0.
double heat_score(const gpr::PredictiveResult& p);

struct HeatmapSpec {
  Index grid_res = 40;                 // nodes per free axis, >= 2
  Vector lo, hi;                       // per input axis; free axes need lo < hi
  std::map<Index, double> fixed;       // pinned input axes -> value
};

struct Heatmap {
  Index axis_x = 0, axis_y = 1;  // the two free input axes
  Vector xs, ys;                 // node coordinates per free axis
  Matrix values;                 // grid_res x grid_res, values(ix, iy)
};

// Evaluate h on a grid over the two unpinned input axes (exactly two must
// remain free).  Parallel over nodes, bit-identical to the serial loop.
Heatmap anomaly_heatmap(const gpr::GprModel& m, const HeatmapSpec& spec);

// Midpoint-sweep threshold on variance totals.  Candidates are -inf, the
// midpoints of consecutive sorted holdout values, and +inf; the winner
// maximizes holdout accuracy of "total > t => anomaly", ties to the smallest
// candidate.  The holdout is a seeded random round(frac*n) subset (clamped
// to [1, n]).  A single-class holdout is degenerate: the threshold is +inf
// (all-normal holdout) or -inf (all-anomalous).
struct ThresholdResult {
  double threshold = 0.0;
  double holdout_accuracy = 0.0;
  bool degenerate = false;
  std::vector<Index> holdout_idx;
};

ThresholdResult learn_threshold(const Vector& variance_totals,
                                const std::vector<int>& labels, double holdout_frac,
                                std::uint64_t seed);

// 1 (anomalous) where the total predictive variance exceeds the threshold.
std::vector<int> classify(const gpr::GprModel& m, const Matrix& X, double threshold);

}  // namespace oose::bench
