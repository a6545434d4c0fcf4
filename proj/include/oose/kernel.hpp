#pragma once

#include "oose/types.hpp"

namespace oose {

// Squared-exponential kernel k(x, x') = exp(-||x - x'||^2 / tau^2).
// Note the convention: no 1/2 in the exponent and unit amplitude, so
// k(x, x) = 1 exactly.  The unit diagonal is what makes the eigen-route
// extension and noise-free GPR agree, so tau is the only shape parameter.
struct KernelParams {
  double tau = 1.0;        // length-scale, > 0
  double noise_var = 0.0;  // observation noise variance sigma^2, >= 0
};

// Throws InputError unless tau > 0, noise_var >= 0, both finite.
void validate(const KernelParams& p);

namespace detail {

// Shared low-level pieces.  Every kernel entry in the library is produced by
// these functions (deliberately not inline: one definition, one codegen, so
// parallel and serial callers get bit-identical values).
double dot(const double* a, const double* b, Index n);

// Dot product of row i of A with row j of B, accumulated in column order
// (matrices are column-major; the order matches detail::dot).
double dot_rows(const Matrix& A, Index i, const Matrix& B, Index j);

// ||a||^2 + ||b||^2 - 2 a.b, clamped at 0.  sq_a/sq_b are the precomputed
// self-dots of a and b (they must come from detail::dot(a, a, n) for the
// clamp-to-zero at coincident points to be exact).
double sq_dist(double sq_a, double sq_b, double ab);

double se_from_sq_dist(double sq, double inv_tau_sq);

}  // namespace detail

// One kernel value.  Throws InputError on dimension mismatch or bad tau.
double se_kernel(const Eigen::Ref<const Vector>& x,
                 const Eigen::Ref<const Vector>& x_prime, double tau);

// m x m Gram matrix of a point set (rows of X).  Symmetric, unit diagonal.
Matrix kernel_matrix(const Matrix& X, double tau);
Matrix kernel_matrix(const PointCloud& cloud, double tau);

// n_star x m cross-kernel between query rows and training rows.
Matrix cross_kernel(const Matrix& X_star, const Matrix& X, double tau);
// Single query point as a 1 x m row convenience.
Vector cross_kernel_row(const Eigen::Ref<const Vector>& x_star, const Matrix& X,
                        double tau);

// Elementwise derivative of kernel_matrix(X, tau) with respect to log(tau):
// d k / d log tau = 2 tau^-2 ||x_i - x_j||^2 k_ij.  Zero diagonal.
Matrix kernel_matrix_grad(const Matrix& X, double tau);

// m x m matrix of squared Euclidean distances (shared by the kernels and the
// manifold learners; one code path keeps all of them bit-consistent).
Matrix pairwise_sq_dists(const Matrix& X);

}  // namespace oose
