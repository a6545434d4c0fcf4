#include "oose/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>
#include <vector>

#include "oose/gpr.hpp"
#include "oose/kernel.hpp"
#include "oose/rng.hpp"

namespace oose {

namespace {

constexpr double kSymTol = 1e-10;
constexpr double kEigenvalueCutoff = 1e-12;

void check_symmetric(const Matrix& K, const char* what) {
  if (K.rows() != K.cols())
    throw InputError(std::string(what) + ": matrix must be square, got " +
                     std::to_string(K.rows()) + "x" + std::to_string(K.cols()));
  if (K.rows() == 0) throw InputError(std::string(what) + ": empty matrix");
  const double asym = (K - K.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= kSymTol))
    throw InputError(std::string(what) + ": matrix not symmetric (max |K - K^T| = " +
                     std::to_string(asym) + ")");
}

}  // namespace

EigenDecomposition eigendecompose(const Matrix& K) {
  check_symmetric(K, "eigendecompose");
  Eigen::SelfAdjointEigenSolver<Matrix> es(K);
  if (es.info() != Eigen::Success)
    throw NumericalError("eigendecompose: eigensolver did not converge");

  const Index m = K.rows();
  EigenDecomposition dec;
  dec.values.resize(m);
  dec.vectors.resize(m, m);
  // Eigen returns ascending order; flip to descending and fix each sign so
  // the largest-magnitude entry (first occurrence on ties) is positive.
  for (Index j = 0; j < m; ++j) {
    const Index src = m - 1 - j;
    dec.values(j) = es.eigenvalues()(src);
    Vector v = es.eigenvectors().col(src);
    Index imax = 0;
    double amax = -1.0;
    for (Index i = 0; i < m; ++i) {
      const double a = std::abs(v(i));
      if (a > amax) {
        amax = a;
        imax = i;
      }
    }
    if (v(imax) < 0.0) v = -v;
    dec.vectors.col(j) = v;
  }
  return dec;
}

SpectralEmbedding spectral_embed(const Matrix& X, double tau, KernelNormalization norm) {
  Matrix K = kernel_matrix(X, tau);
  const Index m = K.rows();
  if (norm == KernelNormalization::markov_symmetric) {
    Vector deg = K.rowwise().sum();
    Vector isd(m);
    for (Index i = 0; i < m; ++i) {
      if (!(deg(i) > 0.0))
        throw NumericalError("spectral_embed: non-positive kernel row sum");
      isd(i) = 1.0 / std::sqrt(deg(i));
    }
    Matrix S(m, m);
    for (Index i = 0; i < m; ++i) {
      S(i, i) = K(i, i) * isd(i) * isd(i);
      for (Index j = 0; j < i; ++j) {
        const double s = K(i, j) * isd(i) * isd(j);
        S(i, j) = s;
        S(j, i) = s;
      }
    }
    K = std::move(S);
  }
  EigenDecomposition dec = eigendecompose(K);

  SpectralEmbedding emb;
  emb.train_inputs = std::make_shared<const Matrix>(X);
  emb.kernel_tau = tau;
  emb.normalization = norm;
  emb.eigenvalues = std::move(dec.values);
  emb.eigenvectors = std::move(dec.vectors);
  return emb;
}

namespace {

void check_extendable(const SpectralEmbedding& emb, Index d) {
  if (emb.normalization != KernelNormalization::raw)
    throw InputError(
        "nystrom_extend: requires a raw-kernel embedding (normalized operators "
        "extend through the manifold layer)");
  if (!emb.train_inputs || emb.train_inputs->rows() == 0)
    throw InputError("nystrom_extend: embedding has no training points");
  if (d < 1 || d > emb.eigenvalues.size())
    throw InputError("nystrom_extend: requested " + std::to_string(d) +
                     " dimensions from a spectrum of " +
                     std::to_string(emb.eigenvalues.size()));
  for (Index j = 0; j < d; ++j) {
    if (std::abs(emb.eigenvalues(j)) <= kEigenvalueCutoff)
      throw NumericalError("nystrom_extend: eigenvalue " + std::to_string(j) +
                           " is below the significance cutoff (|lambda| <= 1e-12)");
  }
}

}  // namespace

Vector nystrom_extend(const SpectralEmbedding& emb, const Eigen::Ref<const Vector>& x,
                      Index d) {
  check_extendable(emb, d);
  const Vector k = cross_kernel_row(x, *emb.train_inputs, emb.kernel_tau);
  Vector out(d);
  for (Index j = 0; j < d; ++j)
    out(j) = k.dot(emb.eigenvectors.col(j)) / emb.eigenvalues(j);
  return out;
}

Matrix nystrom_extend_batch(const SpectralEmbedding& emb, const Matrix& X_star, Index d) {
  check_extendable(emb, d);
  if (X_star.rows() > 0 && X_star.cols() != emb.train_inputs->cols())
    throw InputError("nystrom_extend: query dimension " + std::to_string(X_star.cols()) +
                     " does not match training dimension " +
                     std::to_string(emb.train_inputs->cols()));
  Matrix out(X_star.rows(), d);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < X_star.rows(); ++i)
    out.row(i) = nystrom_extend(emb, X_star.row(i).transpose(), d).transpose();
  return out;
}

double equivalence_residual(const Matrix& X, double tau, const Matrix& test_points) {
  if (test_points.rows() == 0) return 0.0;
  if (test_points.cols() != X.cols())
    throw InputError("equivalence_residual: test points have dimension " +
                     std::to_string(test_points.cols()) + ", training has " +
                     std::to_string(X.cols()));

  const SpectralEmbedding emb = spectral_embed(X, tau, KernelNormalization::raw);
  const Index m = X.rows();
  std::vector<Index> keep;
  for (Index j = 0; j < m; ++j)
    if (std::abs(emb.eigenvalues(j)) > kEigenvalueCutoff) keep.push_back(j);
  if (keep.empty()) return 0.0;

  Matrix targets(m, static_cast<Index>(keep.size()));
  for (std::size_t t = 0; t < keep.size(); ++t)
    targets.col(static_cast<Index>(t)) = emb.eigenvectors.col(keep[t]);

  // Route 1: noise-free GPR on the eigenvector targets.
  gpr::TrainOptions opt;
  opt.fixed = KernelParams{tau, 0.0};
  const gpr::GprModel model = gpr::train(X, targets, opt);
  const Matrix gpr_pred = gpr::predict_mean_batch(model, test_points);

  // Route 2: eigenvalue-scaled kernel projection.
  double worst = 0.0;
  for (Index i = 0; i < test_points.rows(); ++i) {
    const Vector k = cross_kernel_row(test_points.row(i).transpose(), X, tau);
    for (std::size_t t = 0; t < keep.size(); ++t) {
      const Index j = keep[t];
      const double nys = k.dot(emb.eigenvectors.col(j)) / emb.eigenvalues(j);
      const double diff = std::abs(nys - gpr_pred(i, static_cast<Index>(t)));
      if (diff > worst) worst = diff;
    }
  }
  return worst;
}

double equivalence_residual(const Matrix& X, double tau, Index n_test,
                            std::uint64_t seed) {
  if (n_test < 0) throw InputError("equivalence_residual: negative test count");
  if (n_test == 0) return 0.0;
  const Vector lo = X.colwise().minCoeff().transpose();
  const Vector hi = X.colwise().maxCoeff().transpose();
  Rng rng(seed, 0);
  Matrix T(n_test, X.cols());
  for (Index i = 0; i < n_test; ++i)
    for (Index c = 0; c < X.cols(); ++c) T(i, c) = rng.uniform(lo(c), hi(c));
  return equivalence_residual(X, tau, T);
}

}  // namespace oose
