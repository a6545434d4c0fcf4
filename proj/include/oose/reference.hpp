#pragma once

#include "oose/gpr.hpp"
#include "oose/manifold.hpp"
#include "oose/types.hpp"

// Serial reference implementations of every OpenMP-parallel kernel in the
// library.  They share the low-level element functions with the parallel
// versions, so outputs must agree bit-for-bit at any thread count; tests and
// benchmarks/kernel_comparison rely on that.
namespace oose::ref {

Matrix pairwise_sq_dists(const Matrix& X);
Matrix kernel_matrix(const Matrix& X, double tau);
Matrix cross_kernel(const Matrix& X_star, const Matrix& X, double tau);
Matrix kernel_matrix_grad(const Matrix& X, double tau);
Matrix geodesic_distances(const KnnGraph& g);
void predict_batch(const gpr::GprModel& m, const Matrix& X_star, Matrix& means,
                   Matrix& variances);

}  // namespace oose::ref
