// Times every OpenMP-parallel kernel against its serial reference and checks
// the outputs are bit-identical (the reference contract).  Build target only;
// not part of the test suite.  Thread count comes from the environment
// (OMP_NUM_THREADS), size can be scaled with the first argument.

#include <omp.h>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <string>

#include "oose/gpr.hpp"
#include "oose/kernel.hpp"
#include "oose/manifold.hpp"
#include "oose/reference.hpp"
#include "oose/rng.hpp"

using namespace oose;

namespace {

Matrix random_cloud(Index m, Index n, std::uint64_t seed) {
  Rng rng(seed, 0);
  Matrix X(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index c = 0; c < n; ++c) X(i, c) = rng.uniform(0.0, 10.0);
  return X;
}

bool bit_equal(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(),
                     sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

double best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = omp_get_wtime();
    fn();
    best = std::min(best, omp_get_wtime() - t0);
  }
  return best;
}

void row(const std::string& name, double serial_s, double parallel_s, bool identical) {
  std::printf("%-28s %10.2f ms %10.2f ms %7.2fx   %s\n", name.c_str(),
              serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s,
              identical ? "identical" : "DIFFER");
}

}  // namespace

int main(int argc, char** argv) {
  const Index m = argc > 1 ? std::atol(argv[1]) : 700;
  const int reps = 3;
  std::printf("threads %d, base size %lld\n", omp_get_max_threads(),
              static_cast<long long>(m));
  std::printf("%-28s %13s %13s %8s\n", "kernel", "serial", "parallel", "ratio");

  const Matrix X = random_cloud(m, 3, 1);
  const Matrix Q = random_cloud(2 * m, 3, 2);
  const double tau = 4.0;

  Matrix a, b;
  double ts, tp;

  ts = best_of(reps, [&] { a = ref::pairwise_sq_dists(X); });
  tp = best_of(reps, [&] { b = pairwise_sq_dists(X); });
  row("pairwise_sq_dists", ts, tp, bit_equal(a, b));

  ts = best_of(reps, [&] { a = ref::kernel_matrix(X, tau); });
  tp = best_of(reps, [&] { b = kernel_matrix(X, tau); });
  row("kernel_matrix", ts, tp, bit_equal(a, b));

  ts = best_of(reps, [&] { a = ref::cross_kernel(Q, X, tau); });
  tp = best_of(reps, [&] { b = cross_kernel(Q, X, tau); });
  row("cross_kernel", ts, tp, bit_equal(a, b));

  ts = best_of(reps, [&] { a = ref::kernel_matrix_grad(X, tau); });
  tp = best_of(reps, [&] { b = kernel_matrix_grad(X, tau); });
  row("kernel_matrix_grad", ts, tp, bit_equal(a, b));

  const KnnGraph g = knn_graph(X, 8);
  ts = best_of(reps, [&] { a = ref::geodesic_distances(g); });
  tp = best_of(reps, [&] { b = geodesic_distances(g); });
  row("geodesic_distances", ts, tp, bit_equal(a, b));

  Matrix Y(m, 2);
  {
    Rng rng(3, 1);
    for (Index i = 0; i < m; ++i)
      for (Index c = 0; c < 2; ++c) Y(i, c) = rng.normal();
  }
  gpr::TrainOptions opt;
  opt.fixed = KernelParams{tau, 1e-2};
  const gpr::GprModel model = gpr::train(X, Y, opt);
  Matrix ma, va, mb, vb;
  ts = best_of(reps, [&] { ref::predict_batch(model, Q, ma, va); });
  tp = best_of(reps, [&] { gpr::predict_batch(model, Q, mb, vb); });
  row("predict_batch", ts, tp, bit_equal(ma, mb) && bit_equal(va, vb));

  return 0;
}
