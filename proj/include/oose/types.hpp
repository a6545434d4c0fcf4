#pragma once

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace oose {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Bad caller-supplied data: shape mismatches, out-of-range parameters,
// degenerate inputs an algorithm cannot start from.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed file content (CSV cells, model JSON).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Well-formed input on which the numerics break down (failed factorization,
// eigenvalue below the significance cutoff, reduced-rank Gram matrix).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// m points in R^N, one row per point.  Optional per-point integer labels
// (anomaly flags, cluster ids) and generator parameters (one row per point,
// e.g. the (t, h) pair behind a swiss-roll sample).
struct PointCloud {
  Matrix coords;                 // m x N
  std::vector<int> labels;       // empty or size m
  Matrix manifold_params;        // 0 x 0 or m x p
  std::string source;            // generator name or file path, informational

  Index size() const { return coords.rows(); }
  Index ambient_dim() const { return coords.cols(); }
  bool has_labels() const { return !labels.empty(); }
};

enum class EmbedMethod { diffusion_maps, laplacian_eigenmaps, isomap, mds, external };

std::string to_string(EmbedMethod m);

// Low-dimensional coordinates for a training cloud, plus the settings that
// produced them.  `spectrum` holds the eigenvalue sequence used for the
// automatic dimension rule (largest-gap), ordered the way the method ranks
// its components.
struct Embedding {
  Matrix coords;                              // m x d
  EmbedMethod method = EmbedMethod::external;
  std::map<std::string, double> params_used;
  Vector spectrum;                            // may be empty

  Index size() const { return coords.rows(); }
  Index dim() const { return coords.cols(); }
};

}  // namespace oose
