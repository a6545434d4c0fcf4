#include "oose/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "detail/stats.hpp"
#include "oose/kernel.hpp"
#include "oose/spectral.hpp"

namespace oose {

std::string to_string(EmbedMethod m) {
  switch (m) {
    case EmbedMethod::diffusion_maps: return "dm";
    case EmbedMethod::laplacian_eigenmaps: return "le";
    case EmbedMethod::isomap: return "isomap";
    case EmbedMethod::mds: return "mds";
    case EmbedMethod::external: return "external";
  }
  return "unknown";
}

KnnGraph knn_graph(const Matrix& X, Index k) {
  const Index m = X.rows();
  if (m < 2) throw InputError("knn_graph: need at least 2 points");
  if (k < 1 || k > m - 1)
    throw InputError("knn_graph: k must be in [1, m-1], got k = " + std::to_string(k) +
                     " for m = " + std::to_string(m));

  const Matrix D2 = pairwise_sq_dists(X);

  // k nearest per point, distance ties broken by lower index.
  std::vector<std::vector<Index>> nearest(static_cast<std::size_t>(m));
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < m; ++i) {
    std::vector<std::pair<double, Index>> cand;
    cand.reserve(static_cast<std::size_t>(m - 1));
    for (Index j = 0; j < m; ++j)
      if (j != i) cand.emplace_back(D2(i, j), j);
    auto mid = cand.begin() + static_cast<std::ptrdiff_t>(k);
    std::nth_element(cand.begin(), mid - 1, cand.end());
    std::sort(cand.begin(), mid);
    auto& out = nearest[static_cast<std::size_t>(i)];
    out.reserve(static_cast<std::size_t>(k));
    for (auto it = cand.begin(); it != mid; ++it) out.push_back(it->second);
  }

  // Symmetrize: an edge exists if either endpoint selected the other.
  std::vector<std::vector<bool>> linked(static_cast<std::size_t>(m),
                                        std::vector<bool>(static_cast<std::size_t>(m), false));
  for (Index i = 0; i < m; ++i)
    for (Index j : nearest[static_cast<std::size_t>(i)]) {
      linked[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = true;
      linked[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = true;
    }

  KnnGraph g;
  g.adj.resize(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    auto& row = g.adj[static_cast<std::size_t>(i)];
    for (Index j = 0; j < m; ++j)
      if (linked[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
        row.push_back({j, std::sqrt(D2(i, j))});
  }
  return g;
}

Index component_count(const KnnGraph& g) {
  const Index m = g.size();
  std::vector<char> seen(static_cast<std::size_t>(m), 0);
  Index components = 0;
  std::vector<Index> stack;
  for (Index s = 0; s < m; ++s) {
    if (seen[static_cast<std::size_t>(s)]) continue;
    ++components;
    stack.push_back(s);
    seen[static_cast<std::size_t>(s)] = 1;
    while (!stack.empty()) {
      const Index u = stack.back();
      stack.pop_back();
      for (const auto& e : g.adj[static_cast<std::size_t>(u)]) {
        if (!seen[static_cast<std::size_t>(e.to)]) {
          seen[static_cast<std::size_t>(e.to)] = 1;
          stack.push_back(e.to);
        }
      }
    }
  }
  return components;
}

Matrix geodesic_distances(const KnnGraph& g) {
  const Index m = g.size();
  if (m == 0) throw InputError("geodesic_distances: empty graph");
  const double inf = std::numeric_limits<double>::infinity();
  Matrix G(m, m);

#pragma omp parallel for schedule(dynamic)
  for (Index s = 0; s < m; ++s) {
    std::vector<double> dist(static_cast<std::size_t>(m), inf);
    dist[static_cast<std::size_t>(s)] = 0.0;
    using Entry = std::pair<double, Index>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> pq;
    pq.push({0.0, s});
    while (!pq.empty()) {
      const auto [du, u] = pq.top();
      pq.pop();
      if (du > dist[static_cast<std::size_t>(u)]) continue;  // stale entry
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

  // Per-source path sums can differ in the last ulp between directions;
  // symmetrize so downstream double-centering sees an exactly symmetric
  // matrix.
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < i; ++j) {
      const double v = std::min(G(i, j), G(j, i));
      G(i, j) = v;
      G(j, i) = v;
    }
  return G;
}

double resolve_bandwidth(const Matrix& X, const BandwidthSpec& spec) {
  double eps = 0.0;
  switch (spec.policy) {
    case BandwidthPolicy::median_sq_pairwise:
      eps = detail::median_offdiag(pairwise_sq_dists(X));
      break;
    case BandwidthPolicy::median_avg_knn: {
      const Index m = X.rows();
      if (m < 2) throw InputError("resolve_bandwidth: need at least 2 points");
      const Index k = spec.knn_k;
      if (k < 1 || k > m - 1)
        throw InputError("resolve_bandwidth: knn_k must be in [1, m-1], got " +
                         std::to_string(k));
      const Matrix D2 = pairwise_sq_dists(X);
      std::vector<double> avg(static_cast<std::size_t>(m));
#pragma omp parallel for schedule(static)
      for (Index i = 0; i < m; ++i) {
        std::vector<std::pair<double, Index>> cand;
        cand.reserve(static_cast<std::size_t>(m - 1));
        for (Index j = 0; j < m; ++j)
          if (j != i) cand.emplace_back(D2(i, j), j);
        auto mid = cand.begin() + static_cast<std::ptrdiff_t>(k);
        std::nth_element(cand.begin(), mid - 1, cand.end());
        std::sort(cand.begin(), mid);
        double s = 0.0;
        for (auto it = cand.begin(); it != mid; ++it) s += std::sqrt(it->first);
        avg[static_cast<std::size_t>(i)] = s / static_cast<double>(k);
      }
      eps = detail::median_of(std::move(avg));
      break;
    }
    case BandwidthPolicy::explicit_value:
      eps = spec.value;
      break;
  }
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw InputError("resolve_bandwidth: bandwidth must be finite and > 0, got " +
                     std::to_string(eps) + " (degenerate point set?)");
  return eps;
}

Matrix gaussian_affinity(const Matrix& X, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw InputError("gaussian_affinity: eps must be finite and > 0");
  // exp(-r^2/eps) is the unit-amplitude kernel at tau = sqrt(eps).
  return kernel_matrix(X, std::sqrt(eps));
}

namespace {

void check_embed_dim(Index d, Index max_d, const char* what) {
  if (d < 0) throw InputError(std::string(what) + ": negative dimension");
  if (d > max_d)
    throw InputError(std::string(what) + ": requested dimension " + std::to_string(d) +
                     " exceeds the available " + std::to_string(max_d));
}

}  // namespace

Embedding diffusion_maps(const Matrix& X, Index d, const BandwidthSpec& bw) {
  const Index m = X.rows();
  if (m < 2) throw InputError("diffusion_maps: need at least 2 points");
  check_embed_dim(d, m - 1, "diffusion_maps");

  const double eps = resolve_bandwidth(X, bw);
  const Matrix W = gaussian_affinity(X, eps);
  const Vector deg = W.rowwise().sum();

  Vector isd(m);
  for (Index i = 0; i < m; ++i) {
    if (!(deg(i) > 0.0))
      throw NumericalError("diffusion_maps: non-positive affinity row sum");
    isd(i) = 1.0 / std::sqrt(deg(i));
  }

  // Symmetric conjugate of the row-stochastic operator D^-1 W; its
  // eigenvalues are the diffusion eigenvalues, and psi = D^-1/2 u recovers
  // the right eigenvectors.
  Matrix S(m, m);
  for (Index i = 0; i < m; ++i) {
    S(i, i) = W(i, i) * isd(i) * isd(i);
    for (Index j = 0; j < i; ++j) {
      const double s = W(i, j) * isd(i) * isd(j);
      S(i, j) = s;
      S(j, i) = s;
    }
  }
  const EigenDecomposition dec = eigendecompose(S);

  if (std::abs(dec.values(0) - 1.0) > 1e-6)
    throw NumericalError("diffusion_maps: leading eigenvalue " +
                         std::to_string(dec.values(0)) +
                         " deviates from 1 (Markov normalization broken)");

  // Skip the trivial stationary pair (lambda = 1, constant psi).
  Vector spectrum = dec.values.segment(1, m - 1);
  const Index d_eff = d > 0 ? d : spectral_dim(spectrum);

  Embedding emb;
  emb.method = EmbedMethod::diffusion_maps;
  emb.spectrum = std::move(spectrum);
  emb.params_used["eps"] = eps;
  if (bw.policy == BandwidthPolicy::median_avg_knn)
    emb.params_used["eps_knn_k"] = static_cast<double>(bw.knn_k);
  emb.coords.resize(m, d_eff);
  for (Index t = 0; t < d_eff; ++t) {
    const Index j = t + 1;
    const double lambda = dec.values(j);
    for (Index i = 0; i < m; ++i)
      emb.coords(i, t) = lambda * (isd(i) * dec.vectors(i, j));
  }
  return emb;
}

Embedding laplacian_eigenmaps(const Matrix& X, Index d, Index k) {
  const Index m = X.rows();
  if (m < 2) throw InputError("laplacian_eigenmaps: need at least 2 points");
  check_embed_dim(d, m - 1, "laplacian_eigenmaps");

  const KnnGraph g = knn_graph(X, k);
  const Index comps = component_count(g);
  if (comps != 1)
    throw InputError("laplacian_eigenmaps: kNN graph has " + std::to_string(comps) +
                     " components; increase k or clean the data");

  Vector deg(m);
  for (Index i = 0; i < m; ++i)
    deg(i) = static_cast<double>(g.adj[static_cast<std::size_t>(i)].size());
  const Vector isd = deg.array().sqrt().inverse().matrix();

  // Normalized Laplacian I - D^-1/2 A D^-1/2; u solves it iff v = D^-1/2 u
  // solves the generalized problem (D - A) v = mu D v with the same mu.
  Matrix L = Matrix::Zero(m, m);
  for (Index i = 0; i < m; ++i) {
    L(i, i) = 1.0;
    for (const auto& e : g.adj[static_cast<std::size_t>(i)]) {
      if (e.to < i) {
        const double w = -isd(i) * isd(e.to);
        L(i, e.to) = w;
        L(e.to, i) = w;
      }
    }
  }
  const EigenDecomposition dec = eigendecompose(L);  // descending; mu_min last

  if (std::abs(dec.values(m - 1)) > 1e-8)
    throw NumericalError("laplacian_eigenmaps: smallest eigenvalue " +
                         std::to_string(dec.values(m - 1)) +
                         " deviates from 0 on a connected graph");

  // Components in ascending mu, skipping the trivial zero mode.
  Vector spectrum(m - 1);
  for (Index t = 0; t < m - 1; ++t) {
    const double mu = dec.values(m - 2 - t);
    spectrum(t) = mu > 0.0 ? 1.0 / mu : 0.0;  // gap rule works on reciprocals
  }
  const Index d_eff = d > 0 ? d : spectral_dim(spectrum);

  Embedding emb;
  emb.method = EmbedMethod::laplacian_eigenmaps;
  emb.spectrum = std::move(spectrum);
  emb.params_used["k"] = static_cast<double>(k);
  emb.coords.resize(m, d_eff);
  for (Index t = 0; t < d_eff; ++t) {
    const Index j = m - 2 - t;
    for (Index i = 0; i < m; ++i)
      emb.coords(i, t) = isd(i) * dec.vectors(i, j);
  }
  return emb;
}

Embedding isomap(const Matrix& X, Index d, Index k) {
  const Index m = X.rows();
  if (m < 2) throw InputError("isomap: need at least 2 points");

  const KnnGraph g = knn_graph(X, k);
  const Index comps = component_count(g);
  if (comps != 1)
    throw InputError("isomap: kNN graph has " + std::to_string(comps) +
                     " components; increase k or clean the data");

  const Matrix G = geodesic_distances(g);
  Embedding emb = classical_mds(G, d);
  emb.method = EmbedMethod::isomap;
  emb.params_used["k"] = static_cast<double>(k);
  return emb;
}

Embedding classical_mds(const Matrix& D, Index d) {
  const Index m = D.rows();
  if (m < 1 || D.cols() != m)
    throw InputError("classical_mds: distance matrix must be square and non-empty");
  check_embed_dim(d, m, "classical_mds");
  if (!D.allFinite()) throw InputError("classical_mds: distances must be finite");
  const double asym = (D - D.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= 1e-10))
    throw InputError("classical_mds: distance matrix not symmetric (max asymmetry " +
                     std::to_string(asym) + ")");
  for (Index i = 0; i < m; ++i) {
    if (std::abs(D(i, i)) > 1e-12)
      throw InputError("classical_mds: nonzero diagonal at index " + std::to_string(i));
    for (Index j = 0; j < i; ++j)
      if (D(i, j) < 0.0)
        throw InputError("classical_mds: negative distance at (" + std::to_string(i) +
                         ", " + std::to_string(j) + ")");
  }

  Embedding emb;
  emb.method = EmbedMethod::mds;

  if (D.cwiseAbs().maxCoeff() == 0.0) {
    // All points coincide: the zero embedding in any requested dimension.
    emb.coords = Matrix::Zero(m, d > 0 ? d : 1);
    emb.spectrum = Vector();
    return emb;
  }

  // Double-centered Gram matrix B = -1/2 J D2 J, built from the lower
  // triangle so it is exactly symmetric.
  Matrix D2(m, m);
  for (Index i = 0; i < m; ++i) {
    D2(i, i) = 0.0;
    for (Index j = 0; j < i; ++j) {
      const double v = D(i, j) * D(i, j);
      D2(i, j) = v;
      D2(j, i) = v;
    }
  }
  Vector rmean(m);
  for (Index i = 0; i < m; ++i) rmean(i) = D2.row(i).sum() / static_cast<double>(m);
  const double gmean = rmean.sum() / static_cast<double>(m);
  Matrix B(m, m);
  for (Index i = 0; i < m; ++i) {
    B(i, i) = -0.5 * (0.0 - rmean(i) - rmean(i) + gmean);
    for (Index j = 0; j < i; ++j) {
      const double v = -0.5 * (D2(i, j) - rmean(i) - rmean(j) + gmean);
      B(i, j) = v;
      B(j, i) = v;
    }
  }

  const EigenDecomposition dec = eigendecompose(B);
  const double cutoff = 1e-12 * std::max(1.0, dec.values(0));
  Index positives = 0;
  while (positives < m && dec.values(positives) > cutoff) ++positives;

  emb.spectrum = dec.values.head(positives);
  const Index d_eff = d > 0 ? d : spectral_dim(emb.spectrum);
  if (d_eff > positives)
    throw NumericalError("classical_mds: requested " + std::to_string(d_eff) +
                         " dimensions but only " + std::to_string(positives) +
                         " positive eigenvalues are available (reduced rank)");

  emb.coords.resize(m, d_eff);
  for (Index t = 0; t < d_eff; ++t)
    emb.coords.col(t) = std::sqrt(dec.values(t)) * dec.vectors.col(t);
  return emb;
}

Index spectral_dim(const Vector& spectrum) {
  Index positives = 0;
  while (positives < spectrum.size() && spectrum(positives) > 0.0 &&
         std::isfinite(spectrum(positives)))
    ++positives;
  if (positives < 2)
    throw InputError("spectral_dim: need at least 2 leading positive eigenvalues, got " +
                     std::to_string(positives));
  Index best = 0;
  double best_ratio = -1.0;
  for (Index j = 0; j + 1 < positives; ++j) {
    const double ratio = spectrum(j) / spectrum(j + 1);
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = j;
    }
  }
  return best + 1;
}

Embedding embed(const PointCloud& cloud, EmbedMethod method, Index d,
                const ManifoldOptions& opt) {
  switch (method) {
    case EmbedMethod::diffusion_maps:
      return diffusion_maps(cloud.coords, d, opt.bandwidth);
    case EmbedMethod::laplacian_eigenmaps:
      return laplacian_eigenmaps(cloud.coords, d, opt.knn_k);
    case EmbedMethod::isomap:
      return isomap(cloud.coords, d, opt.knn_k);
    case EmbedMethod::mds: {
      Embedding emb = classical_mds(pairwise_sq_dists(cloud.coords).cwiseSqrt(), d);
      emb.method = EmbedMethod::mds;
      return emb;
    }
    case EmbedMethod::external:
      throw InputError("embed: external embeddings are supplied, not computed");
  }
  throw InputError("embed: unknown method");
}

}  // namespace oose
