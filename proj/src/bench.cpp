#include "oose/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "detail/stats.hpp"
#include "oose/data.hpp"
#include "oose/rng.hpp"
#include "oose/spectral.hpp"

namespace oose::bench {

std::string to_string(Extender e) {
  return e == Extender::gpr ? "gpr" : "nystrom";
}

Split make_split(Index m, double rho, std::uint64_t seed) {
  if (m < 3) throw InputError("make_split: need at least 3 points");
  if (!(rho > 0.0) || !(rho < 1.0) || !std::isfinite(rho))
    throw InputError("make_split: rho must be in (0, 1), got " + std::to_string(rho));
  const Index n_train = static_cast<Index>(std::llround(rho * static_cast<double>(m)));
  if (n_train < 2 || n_train > m - 1)
    throw InputError("make_split: rho = " + std::to_string(rho) + " with m = " +
                     std::to_string(m) + " gives " + std::to_string(n_train) +
                     " training points; need between 2 and m - 1");
  Rng rng(seed, 0);
  const std::vector<Index> perm = random_permutation(m, rng);
  Split s;
  s.train_idx.assign(perm.begin(), perm.begin() + n_train);
  s.test_idx.assign(perm.begin() + n_train, perm.end());
  std::sort(s.train_idx.begin(), s.train_idx.end());
  std::sort(s.test_idx.begin(), s.test_idx.end());
  return s;
}

Matrix take_rows(const Matrix& M, const std::vector<Index>& idx) {
  Matrix out(static_cast<Index>(idx.size()), M.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= M.rows())
      throw InputError("take_rows: index " + std::to_string(idx[i]) + " out of range");
    out.row(static_cast<Index>(i)) = M.row(idx[i]);
  }
  return out;
}

double rmse(const Matrix& A, const Matrix& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols())
    throw InputError("rmse: shape mismatch, " + std::to_string(A.rows()) + "x" +
                     std::to_string(A.cols()) + " vs " + std::to_string(B.rows()) + "x" +
                     std::to_string(B.cols()));
  if (A.rows() == 0) throw InputError("rmse: no rows");
  double acc = 0.0;
  for (Index i = 0; i < A.rows(); ++i)
    acc += (A.row(i) - B.row(i)).squaredNorm();
  return std::sqrt(acc / static_cast<double>(A.rows()));
}

Matrix nystrom_extend_targets(const Matrix& X_train, const Matrix& Y_train,
                              const Matrix& X_test, double tau) {
  if (Y_train.rows() != X_train.rows())
    throw InputError("nystrom_extend_targets: " + std::to_string(Y_train.rows()) +
                     " target rows for " + std::to_string(X_train.rows()) + " points");
  const Matrix K = kernel_matrix(X_train, tau);
  const EigenDecomposition dec = eigendecompose(K);

  // Y projected on the significant eigenpairs, rescaled by 1/lambda; the
  // cross-kernel then carries the extension to the query points.
  const Index m = X_train.rows();
  Matrix M = Matrix::Zero(m, Y_train.cols());
  for (Index j = 0; j < m; ++j) {
    const double lambda = dec.values(j);
    if (std::abs(lambda) <= 1e-12) continue;
    const Vector vj = dec.vectors.col(j);
    M.noalias() += vj * ((vj.transpose() * Y_train) / lambda);
  }
  return cross_kernel(X_test, X_train, tau) * M;
}

namespace {

double nystrom_tau_for(const Matrix& X_train, const NystromExtenderOptions& opt) {
  if (opt.tau) {
    if (!(*opt.tau > 0.0) || !std::isfinite(*opt.tau))
      throw InputError("nystrom: explicit tau must be finite and > 0");
    return *opt.tau;
  }
  const double med_sq = detail::median_offdiag(pairwise_sq_dists(X_train));
  if (!(med_sq > 0.0))
    throw InputError("nystrom: degenerate training split (median distance 0)");
  return std::sqrt(med_sq);
}

}  // namespace

const CellResult* BenchmarkReport::find(const std::string& dataset, EmbedMethod method,
                                        Extender ext, double rho) const {
  for (const auto& c : cells)
    if (c.dataset == dataset && c.method == method && c.extender == ext && c.rho == rho)
      return &c;
  return nullptr;
}

BenchmarkReport run_benchmark(const BenchmarkConfig& config) {
  if (config.datasets.empty() || config.methods.empty() || config.extenders.empty() ||
      config.rhos.empty())
    throw InputError("run_benchmark: datasets, methods, extenders and rhos must be non-empty");
  if (config.repeats < 1) throw InputError("run_benchmark: repeats must be >= 1");

  BenchmarkReport report;
  report.config = config;

  for (const auto& ds : config.datasets) {
    // Noise default: 1% of the clean surface's bounding-box diagonal.
    double noise = 0.0;
    if (ds.noise_sd) {
      noise = *ds.noise_sd;
    } else {
      const PointCloud clean = make_dataset(ds.name, ds.n, ds.seed, 0.0);
      noise = 0.01 * bbox_diagonal(clean.coords);
    }
    const PointCloud cloud = make_dataset(ds.name, ds.n, ds.seed, noise);
    const Index m = cloud.size();

    for (const EmbedMethod method : config.methods) {
      EmbeddingInfo info;
      info.dataset = ds.name;
      info.method = method;
      Embedding emb;
      try {
        emb = embed(cloud, method, config.dim, config.manifold);
        info.dim = emb.dim();
        info.params_used = emb.params_used;
      } catch (const std::exception& e) {
        info.failed = true;
        info.error = e.what();
      }
      report.embeddings.push_back(info);

      for (const Extender ext : config.extenders) {
        for (const double rho : config.rhos) {
          CellResult cell;
          cell.dataset = ds.name;
          cell.method = method;
          cell.extender = ext;
          cell.rho = rho;
          const Index n_train =
              static_cast<Index>(std::llround(rho * static_cast<double>(m)));
          cell.n_train = n_train;
          cell.n_test = m - n_train;

          if (info.failed) {
            cell.failed_repeats = config.repeats;
            cell.mean_rmse = std::numeric_limits<double>::quiet_NaN();
            report.cells.push_back(std::move(cell));
            continue;
          }

          for (int r = 0; r < config.repeats; ++r) {
            const std::uint64_t split_seed = config.base_seed + static_cast<std::uint64_t>(r);
            try {
              const Split split = make_split(m, rho, split_seed);
              const Matrix Xtr = take_rows(cloud.coords, split.train_idx);
              const Matrix Ytr = take_rows(emb.coords, split.train_idx);
              const Matrix Xte = take_rows(cloud.coords, split.test_idx);
              const Matrix Yte = take_rows(emb.coords, split.test_idx);

              Matrix pred;
              if (ext == Extender::gpr) {
                gpr::TrainOptions opt;
                opt.fixed = config.gpr.fixed;
                opt.grid = &config.gpr.grid;
                opt.center_targets = config.gpr.center_targets;
                const gpr::GprModel model = gpr::train(Xtr, Ytr, opt);
                pred = gpr::predict_mean_batch(model, Xte);
              } else {
                const double tau = nystrom_tau_for(Xtr, config.nystrom);
                pred = nystrom_extend_targets(Xtr, Ytr, Xte, tau);
              }

              cell.rmses.push_back(rmse(pred, Yte));
              cell.repeat_ids.push_back(r);
              cell.seeds.push_back(split_seed);
            } catch (const InputError&) {
              ++cell.failed_repeats;
            } catch (const NumericalError&) {
              ++cell.failed_repeats;
            }
          }

          if (cell.rmses.empty()) {
            cell.mean_rmse = std::numeric_limits<double>::quiet_NaN();
          } else {
            double s = 0.0;
            for (double v : cell.rmses) s += v;
            cell.mean_rmse = s / static_cast<double>(cell.rmses.size());
          }
          report.cells.push_back(std::move(cell));
        }
      }
    }
  }
  return report;
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_rho(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

void export_cells_csv(const BenchmarkReport& r, const std::string& path) {
  std::string out = "dataset,method,extender,rho,repeat,seed,n_train,n_test,rmse\n";
  for (const auto& c : r.cells) {
    for (std::size_t t = 0; t < c.rmses.size(); ++t) {
      out += c.dataset;
      out += ',';
      out += oose::to_string(c.method);
      out += ',';
      out += to_string(c.extender);
      out += ',';
      out += fmt_rho(c.rho);
      out += ',';
      out += std::to_string(c.repeat_ids[t]);
      out += ',';
      out += std::to_string(c.seeds[t]);
      out += ',';
      out += std::to_string(c.n_train);
      out += ',';
      out += std::to_string(c.n_test);
      out += ',';
      out += fmt17(c.rmses[t]);
      out += '\n';
    }
  }
  write_text_atomic(path, out);
}

void export_aggregate_csv(const BenchmarkReport& r, const std::string& path) {
  std::string out =
      "dataset,method,extender,rho,repeats_ok,repeats_failed,mean_rmse,log_mean_rmse\n";
  for (const auto& c : r.cells) {
    out += c.dataset;
    out += ',';
    out += oose::to_string(c.method);
    out += ',';
    out += to_string(c.extender);
    out += ',';
    out += fmt_rho(c.rho);
    out += ',';
    out += std::to_string(c.rmses.size());
    out += ',';
    out += std::to_string(c.failed_repeats);
    out += ',';
    out += fmt17(c.mean_rmse);
    out += ',';
    out += fmt17(std::log(c.mean_rmse));
    out += '\n';
  }
  write_text_atomic(path, out);
}

// --- anomaly scoring -----------------------------------------------------------

double heat_score(const gpr::PredictiveResult& p) { return -p.variance_total(); }

Heatmap anomaly_heatmap(const gpr::GprModel& m, const HeatmapSpec& spec) {
  if (m.dims.empty()) throw InputError("anomaly_heatmap: empty model");
  const Index n = m.input_dim();
  if (spec.grid_res < 2)
    throw InputError("anomaly_heatmap: grid_res must be >= 2, got " +
                     std::to_string(spec.grid_res));
  if (spec.lo.size() != n || spec.hi.size() != n)
    throw InputError("anomaly_heatmap: bbox must have one (lo, hi) pair per input axis");

  std::vector<Index> free_axes;
  for (Index a = 0; a < n; ++a) {
    const auto it = spec.fixed.find(a);
    if (it == spec.fixed.end()) {
      free_axes.push_back(a);
      if (!(spec.lo(a) < spec.hi(a)))
        throw InputError("anomaly_heatmap: free axis " + std::to_string(a) +
                         " needs lo < hi");
    } else if (!std::isfinite(it->second)) {
      throw InputError("anomaly_heatmap: fixed value for axis " + std::to_string(a) +
                       " must be finite");
    }
  }
  for (const auto& [axis, value] : spec.fixed)
    if (axis < 0 || axis >= n)
      throw InputError("anomaly_heatmap: fixed axis " + std::to_string(axis) +
                       " out of range");
  if (free_axes.size() != 2)
    throw InputError("anomaly_heatmap: exactly 2 axes must remain free, got " +
                     std::to_string(free_axes.size()));

  Heatmap hm;
  hm.axis_x = free_axes[0];
  hm.axis_y = free_axes[1];
  const Index res = spec.grid_res;
  hm.xs.resize(res);
  hm.ys.resize(res);
  for (Index i = 0; i < res; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(res - 1);
    hm.xs(i) = spec.lo(hm.axis_x) + f * (spec.hi(hm.axis_x) - spec.lo(hm.axis_x));
    hm.ys(i) = spec.lo(hm.axis_y) + f * (spec.hi(hm.axis_y) - spec.lo(hm.axis_y));
  }

  Vector base = Vector::Zero(n);
  for (const auto& [axis, value] : spec.fixed) base(axis) = value;

  hm.values.resize(res, res);
#pragma omp parallel for schedule(static)
  for (Index node = 0; node < res * res; ++node) {
    const Index ix = node / res;
    const Index iy = node % res;
    Vector p = base;
    p(hm.axis_x) = hm.xs(ix);
    p(hm.axis_y) = hm.ys(iy);
    hm.values(ix, iy) = heat_score(gpr::predict(m, p));
  }
  return hm;
}

ThresholdResult learn_threshold(const Vector& variance_totals,
                                const std::vector<int>& labels, double holdout_frac,
                                std::uint64_t seed) {
  const Index n = variance_totals.size();
  if (n < 1) throw InputError("learn_threshold: no scores");
  if (static_cast<Index>(labels.size()) != n)
    throw InputError("learn_threshold: " + std::to_string(labels.size()) +
                     " labels for " + std::to_string(n) + " scores");
  for (int l : labels)
    if (l != 0 && l != 1)
      throw InputError("learn_threshold: labels must be 0 (normal) or 1 (anomalous)");
  if (!(holdout_frac > 0.0) || !(holdout_frac <= 1.0))
    throw InputError("learn_threshold: holdout_frac must be in (0, 1]");
  if (!variance_totals.allFinite())
    throw InputError("learn_threshold: scores must be finite");

  Rng rng(seed, 0);
  const std::vector<Index> perm = random_permutation(n, rng);
  Index h = static_cast<Index>(std::llround(holdout_frac * static_cast<double>(n)));
  h = std::max<Index>(1, std::min(h, n));

  ThresholdResult res;
  res.holdout_idx.assign(perm.begin(), perm.begin() + h);
  std::sort(res.holdout_idx.begin(), res.holdout_idx.end());

  bool any_normal = false, any_anomalous = false;
  for (Index i : res.holdout_idx)
    (labels[static_cast<std::size_t>(i)] ? any_anomalous : any_normal) = true;

  const double inf = std::numeric_limits<double>::infinity();
  if (!any_anomalous || !any_normal) {
    res.degenerate = true;
    res.threshold = any_anomalous ? -inf : inf;
    res.holdout_accuracy = 1.0;
    return res;
  }

  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(h));
  for (Index i : res.holdout_idx) values.push_back(variance_totals(i));
  std::sort(values.begin(), values.end());

  std::vector<double> candidates;
  candidates.push_back(-inf);
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const double mid = 0.5 * (values[i] + values[i + 1]);
    if (candidates.back() != mid) candidates.push_back(mid);
  }
  candidates.push_back(inf);

  auto accuracy = [&](double t) {
    Index correct = 0;
    for (Index i : res.holdout_idx) {
      const int predicted = variance_totals(i) > t ? 1 : 0;
      if (predicted == labels[static_cast<std::size_t>(i)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(h);
  };

  // Ascending scan with strict improvement keeps the smallest maximizer.
  double best_t = candidates.front();
  double best_acc = accuracy(best_t);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double acc = accuracy(candidates[i]);
    if (acc > best_acc) {
      best_acc = acc;
      best_t = candidates[i];
    }
  }
  res.threshold = best_t;
  res.holdout_accuracy = best_acc;
  return res;
}

std::vector<int> classify(const gpr::GprModel& m, const Matrix& X, double threshold) {
  Matrix means, variances;
  gpr::predict_batch(m, X, means, variances);
  std::vector<int> out(static_cast<std::size_t>(X.rows()));
  for (Index i = 0; i < X.rows(); ++i)
    out[static_cast<std::size_t>(i)] = variances.row(i).sum() > threshold ? 1 : 0;
  return out;
}

}  // namespace oose::bench
