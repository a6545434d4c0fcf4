#include "oose/reference.hpp"

#include <cmath>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "oose/kernel.hpp"

// Serial mirrors of the OpenMP kernels.  Same element functions, same loop
// order per output entry; the only difference is the absence of the pragma.
namespace oose::ref {

namespace {

Vector row_sq_norms(const Matrix& X) {
  const Index m = X.rows();
  Vector sq(m);
  for (Index i = 0; i < m; ++i) sq(i) = detail::dot_rows(X, i, X, i);
  return sq;
}

}  // namespace

Matrix pairwise_sq_dists(const Matrix& X) {
  const Index m = X.rows();
  const Vector sq = row_sq_norms(X);
  Matrix D(m, m);
  for (Index i = 0; i < m; ++i) {
    D(i, i) = 0.0;
    for (Index j = 0; j < i; ++j) {
      const double d = detail::sq_dist(sq(i), sq(j), detail::dot_rows(X, i, X, j));
      D(i, j) = d;
      D(j, i) = d;
    }
  }
  return D;
}

Matrix kernel_matrix(const Matrix& X, double tau) {
  const Index m = X.rows();
  const double inv_tau_sq = 1.0 / (tau * tau);
  const Vector sq = row_sq_norms(X);
  Matrix K(m, m);
  for (Index i = 0; i < m; ++i) {
    K(i, i) = 1.0;
    for (Index j = 0; j < i; ++j) {
      const double k = detail::se_from_sq_dist(
          detail::sq_dist(sq(i), sq(j), detail::dot_rows(X, i, X, j)), inv_tau_sq);
      K(i, j) = k;
      K(j, i) = k;
    }
  }
  return K;
}

Matrix cross_kernel(const Matrix& X_star, const Matrix& X, double tau) {
  const Index ns = X_star.rows(), m = X.rows();
  const double inv_tau_sq = 1.0 / (tau * tau);
  const Vector sq = row_sq_norms(X);
  Matrix K(ns, m);
  for (Index i = 0; i < ns; ++i) {
    const double si = detail::dot_rows(X_star, i, X_star, i);
    for (Index j = 0; j < m; ++j) {
      K(i, j) = detail::se_from_sq_dist(
          detail::sq_dist(si, sq(j), detail::dot_rows(X_star, i, X, j)), inv_tau_sq);
    }
  }
  return K;
}

Matrix kernel_matrix_grad(const Matrix& X, double tau) {
  const Index m = X.rows();
  const double inv_tau_sq = 1.0 / (tau * tau);
  const Vector sq = row_sq_norms(X);
  Matrix G(m, m);
  for (Index i = 0; i < m; ++i) {
    G(i, i) = 0.0;
    for (Index j = 0; j < i; ++j) {
      const double r2 = detail::sq_dist(sq(i), sq(j), detail::dot_rows(X, i, X, j));
      const double g = 2.0 * inv_tau_sq * r2 * detail::se_from_sq_dist(r2, inv_tau_sq);
      G(i, j) = g;
      G(j, i) = g;
    }
  }
  return G;
}

Matrix geodesic_distances(const KnnGraph& g) {
  const Index m = g.size();
  const double inf = std::numeric_limits<double>::infinity();
  Matrix G(m, m);
  for (Index s = 0; s < m; ++s) {
    std::vector<double> dist(static_cast<std::size_t>(m), inf);
    dist[static_cast<std::size_t>(s)] = 0.0;
    using Entry = std::pair<double, Index>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> pq;
    pq.push({0.0, s});
    while (!pq.empty()) {
      const auto [du, u] = pq.top();
      pq.pop();
      if (du > dist[static_cast<std::size_t>(u)]) continue;
      for (const auto& e : g.adj[static_cast<std::size_t>(u)]) {
        const double nd = du + e.dist;
        if (nd < dist[static_cast<std::size_t>(e.to)]) {
          dist[static_cast<std::size_t>(e.to)] = nd;
          pq.push({nd, e.to});
        }
      }
    }
    for (Index t = 0; t < m; ++t) G(s, t) = dist[static_cast<std::size_t>(t)];
  }
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < i; ++j) {
      const double v = std::min(G(i, j), G(j, i));
      G(i, j) = v;
      G(j, i) = v;
    }
  return G;
}

void predict_batch(const gpr::GprModel& m, const Matrix& X_star, Matrix& means,
                   Matrix& variances) {
  const Index ns = X_star.rows(), d = m.dim();
  means.resize(ns, d);
  variances.resize(ns, d);
  for (Index i = 0; i < ns; ++i) {
    const gpr::PredictiveResult r = gpr::predict(m, X_star.row(i).transpose());
    means.row(i) = r.mean.transpose();
    variances.row(i) = r.variance.transpose();
  }
}

}  // namespace oose::ref
