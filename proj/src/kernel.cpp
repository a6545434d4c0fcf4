#include "oose/kernel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace oose {

void validate(const KernelParams& p) {
  if (!(p.tau > 0.0) || !std::isfinite(p.tau))
    throw InputError("kernel: tau must be finite and > 0, got " + std::to_string(p.tau));
  if (!(p.noise_var >= 0.0) || !std::isfinite(p.noise_var))
    throw InputError("kernel: noise_var must be finite and >= 0, got " +
                     std::to_string(p.noise_var));
}

namespace detail {

double dot(const double* a, const double* b, Index n) {
  double s = 0.0;
  for (Index t = 0; t < n; ++t) s += a[t] * b[t];
  return s;
}

double sq_dist(double sq_a, double sq_b, double ab) {
  const double sq = sq_a + sq_b - 2.0 * ab;
  return sq > 0.0 ? sq : 0.0;
}

double se_from_sq_dist(double sq, double inv_tau_sq) {
  return std::exp(-inv_tau_sq * sq);
}

double dot_rows(const Matrix& A, Index i, const Matrix& B, Index j) {
  const Index n = A.cols();
  double s = 0.0;
  for (Index t = 0; t < n; ++t) s += A(i, t) * B(j, t);
  return s;
}

}  // namespace detail

namespace {

using detail::dot_rows;

void check_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw InputError("kernel: tau must be finite and > 0, got " + std::to_string(tau));
}

void check_nonempty(const Matrix& X, const char* what) {
  if (X.rows() == 0 || X.cols() == 0)
    throw InputError(std::string(what) + ": point matrix must be non-empty, got " +
                     std::to_string(X.rows()) + "x" + std::to_string(X.cols()));
}

Vector row_sq_norms(const Matrix& X) {
  const Index m = X.rows();
  Vector sq(m);
  for (Index i = 0; i < m; ++i) sq(i) = dot_rows(X, i, X, i);
  return sq;
}

}  // namespace

double se_kernel(const Eigen::Ref<const Vector>& x,
                 const Eigen::Ref<const Vector>& x_prime, double tau) {
  check_tau(tau);
  if (x.size() != x_prime.size())
    throw InputError("se_kernel: dimension mismatch, " + std::to_string(x.size()) +
                     " vs " + std::to_string(x_prime.size()));
  if (x.size() == 0) throw InputError("se_kernel: zero-dimensional points");
  const Index n = x.size();
  const double sa = detail::dot(x.data(), x.data(), n);
  const double sb = detail::dot(x_prime.data(), x_prime.data(), n);
  const double ab = detail::dot(x.data(), x_prime.data(), n);
  return detail::se_from_sq_dist(detail::sq_dist(sa, sb, ab), 1.0 / (tau * tau));
}

Matrix pairwise_sq_dists(const Matrix& X) {
  check_nonempty(X, "pairwise_sq_dists");
  const Index m = X.rows();
  const Vector sq = row_sq_norms(X);
  Matrix D(m, m);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < m; ++i) {
    D(i, i) = 0.0;
    for (Index j = 0; j < i; ++j) {
      const double d = detail::sq_dist(sq(i), sq(j), dot_rows(X, i, X, j));
      D(i, j) = d;
      D(j, i) = d;
    }
  }
  return D;
}

Matrix kernel_matrix(const Matrix& X, double tau) {
  check_tau(tau);
  check_nonempty(X, "kernel_matrix");
  const Index m = X.rows();
  const double inv_tau_sq = 1.0 / (tau * tau);
  const Vector sq = row_sq_norms(X);
  Matrix K(m, m);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < m; ++i) {
    K(i, i) = 1.0;
    for (Index j = 0; j < i; ++j) {
      const double k = detail::se_from_sq_dist(
          detail::sq_dist(sq(i), sq(j), dot_rows(X, i, X, j)), inv_tau_sq);
      K(i, j) = k;
      K(j, i) = k;
    }
  }
  return K;
}

Matrix kernel_matrix(const PointCloud& cloud, double tau) {
  return kernel_matrix(cloud.coords, tau);
}

Matrix cross_kernel(const Matrix& X_star, const Matrix& X, double tau) {
  check_tau(tau);
  check_nonempty(X, "cross_kernel");
  if (X_star.cols() != X.cols())
    throw InputError("cross_kernel: ambient dimension mismatch, " +
                     std::to_string(X_star.cols()) + " vs " + std::to_string(X.cols()));
  const Index ns = X_star.rows(), m = X.rows();
  const double inv_tau_sq = 1.0 / (tau * tau);
  const Vector sq = row_sq_norms(X);
  Matrix K(ns, m);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < ns; ++i) {
    const double si = dot_rows(X_star, i, X_star, i);
    for (Index j = 0; j < m; ++j) {
      K(i, j) = detail::se_from_sq_dist(
          detail::sq_dist(si, sq(j), dot_rows(X_star, i, X, j)), inv_tau_sq);
    }
  }
  return K;
}

Vector cross_kernel_row(const Eigen::Ref<const Vector>& x_star, const Matrix& X,
                        double tau) {
  check_tau(tau);
  check_nonempty(X, "cross_kernel");
  if (x_star.size() != X.cols())
    throw InputError("cross_kernel: ambient dimension mismatch, " +
                     std::to_string(x_star.size()) + " vs " + std::to_string(X.cols()));
  // Route through the matrix form so single-point and batch predictions see
  // bit-identical kernel rows.
  Matrix one(1, x_star.size());
  one.row(0) = x_star.transpose();
  return cross_kernel(one, X, tau).row(0).transpose();
}

Matrix kernel_matrix_grad(const Matrix& X, double tau) {
  check_tau(tau);
  check_nonempty(X, "kernel_matrix_grad");
  const Index m = X.rows();
  const double inv_tau_sq = 1.0 / (tau * tau);
  const Vector sq = row_sq_norms(X);
  Matrix G(m, m);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < m; ++i) {
    G(i, i) = 0.0;
    for (Index j = 0; j < i; ++j) {
      const double r2 = detail::sq_dist(sq(i), sq(j), dot_rows(X, i, X, j));
      const double g = 2.0 * inv_tau_sq * r2 * detail::se_from_sq_dist(r2, inv_tau_sq);
      G(i, j) = g;
      G(j, i) = g;
    }
  }
  return G;
}

}  // namespace oose
