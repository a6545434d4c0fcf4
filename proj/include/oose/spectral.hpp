#pragma once

#include <cstdint>
#include <memory>

#include "oose/types.hpp"

namespace oose {

// Deterministic symmetric eigendecomposition: eigenvalues descending, each
// eigenvector's sign fixed so its largest-magnitude entry (first occurrence
// on ties) is positive.  Throws InputError if K is not square-symmetric
// (tolerance 1e-10 on the max asymmetry).
struct EigenDecomposition {
  Vector values;   // descending
  Matrix vectors;  // columns, orthonormal
};

EigenDecomposition eigendecompose(const Matrix& K);

// A kernel eigenbasis over a training cloud, the object the eigen-route
// extension works from.  `normalization` records how the matrix that was
// decomposed relates to the raw kernel matrix.
enum class KernelNormalization { raw, markov_symmetric };

struct SpectralEmbedding {
  std::shared_ptr<const Matrix> train_inputs;  // m x N
  double kernel_tau = 1.0;
  KernelNormalization normalization = KernelNormalization::raw;
  Vector eigenvalues;   // descending, length m
  Matrix eigenvectors;  // m x m, columns match eigenvalues
};

// Decompose kernel_matrix(X, tau) (raw) or its symmetric Markov conjugate
// D^-1/2 K D^-1/2 (markov_symmetric).
SpectralEmbedding spectral_embed(const Matrix& X, double tau,
                                 KernelNormalization norm = KernelNormalization::raw);

// Out-of-sample coordinates of x under the first d eigenvector dimensions:
// y_j(x) = lambda_j^-1 * sum_i k(x, x_i) v_j(i).  Requires a raw-kernel
// embedding (InputError otherwise; the Markov-normalized extension belongs
// to the manifold layer).  Throws NumericalError naming the offending index
// if any |lambda_j| <= 1e-12 among the first d.
Vector nystrom_extend(const SpectralEmbedding& emb,
                      const Eigen::Ref<const Vector>& x, Index d);
Matrix nystrom_extend_batch(const SpectralEmbedding& emb, const Matrix& X_star,
                            Index d);

// Max over test points and eigenvector dimensions of |eigen-route extension
// minus noise-free GPR prediction| when both are trained on X with the same
// tau and the eigenvectors themselves as targets.  Zero test points -> 0 by
// convention.  Dimensions with |lambda| <= 1e-12 are excluded (the eigen
// route is undefined there).
double equivalence_residual(const Matrix& X, double tau, const Matrix& test_points);
// Convenience: n_test points sampled uniformly in the bounding box of X.
double equivalence_residual(const Matrix& X, double tau, Index n_test,
                            std::uint64_t seed);

}  // namespace oose
