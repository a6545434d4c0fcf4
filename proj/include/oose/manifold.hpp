#pragma once

#include <vector>

#include "oose/types.hpp"

namespace oose {

// Symmetrized k-nearest-neighbor graph: edge (i, j) exists when j is among
// the k nearest of i or i among the k nearest of j.  Ties in distance break
// by lower point index.  Weights are Euclidean distances.
struct KnnGraph {
  struct Edge {
    Index to;
    double dist;
  };
  std::vector<std::vector<Edge>> adj;  // per node, sorted by `to`
  Index size() const { return static_cast<Index>(adj.size()); }
};

// Requires 1 <= k <= m - 1.
KnnGraph knn_graph(const Matrix& X, Index k);

// Number of connected components.
Index component_count(const KnnGraph& g);

// All-pairs shortest-path distances along the graph (Dijkstra from every
// source, parallel over sources, then symmetrized with min(G, G^T) so
// floating-point path sums cannot break symmetry).  Unreachable pairs keep
// +inf; callers decide whether that is an error.
Matrix geodesic_distances(const KnnGraph& g);

// Bandwidth policies for the Gaussian affinity exp(-||xi - xj||^2 / eps).
enum class BandwidthPolicy {
  median_sq_pairwise,   // median of the off-diagonal squared distances
  median_avg_knn,       // median over i of the mean distance to its k NN
  explicit_value,
};

struct BandwidthSpec {
  BandwidthPolicy policy = BandwidthPolicy::median_sq_pairwise;
  Index knn_k = 5;      // for median_avg_knn
  double value = 0.0;   // for explicit_value
};

// Resolve a policy against data.  Throws InputError if the resolved eps is
// not finite and positive (e.g. an all-duplicates cloud).
double resolve_bandwidth(const Matrix& X, const BandwidthSpec& spec);

// W_ij = exp(-||xi - xj||^2 / eps), unit diagonal.
Matrix gaussian_affinity(const Matrix& X, double eps);

// Diffusion map: Markov-normalize the Gaussian affinity, take the
// eigenvectors psi of the row-stochastic operator through its symmetric
// conjugate, skip the trivial constant pair (lambda = 1), and emit
// lambda_j * psi_j for the top d nontrivial pairs.  d = 0 picks the
// dimension by the largest spectral gap.  spectrum = nontrivial eigenvalues.
Embedding diffusion_maps(const Matrix& X, Index d, const BandwidthSpec& bw = {});

// Laplacian eigenmap on the 0/1 kNN graph: generalized problem L v = mu D v
// through the symmetric normalized Laplacian; coordinates are the v of the d
// smallest nonzero mu, smallest first.  Graph must be connected (InputError
// reporting the component count).  spectrum = 1 / mu, descending, for the
// gap rule.
Embedding laplacian_eigenmaps(const Matrix& X, Index d, Index k = 8);

// ISOMAP: geodesic distances on the kNN graph, then classical MDS.
Embedding isomap(const Matrix& X, Index d, Index k = 8);

// Classical MDS of a symmetric zero-diagonal nonnegative distance matrix:
// double-center -1/2 D2, keep the top d eigenpairs, coords = sqrt(lambda) v.
// An all-zero D gives an all-zero embedding; otherwise fewer than d
// numerically positive eigenvalues is a NumericalError reporting how many
// are available.  spectrum = positive Gram eigenvalues, descending.
Embedding classical_mds(const Matrix& D, Index d);

// Index of the largest gap lambda_j / lambda_j+1 over the leading positive
// entries of a non-increasing spectrum; returns the dimension (j + 1, i.e.
// how many components to keep), lowest index on ties.  Throws InputError if
// fewer than two positive entries.
Index spectral_dim(const Vector& spectrum);

// Dispatch by method tag; d = 0 means automatic via spectral_dim.
struct ManifoldOptions {
  Index knn_k = 8;
  BandwidthSpec bandwidth;
};

Embedding embed(const PointCloud& cloud, EmbedMethod method, Index d,
                const ManifoldOptions& opt = {});

}  // namespace oose
