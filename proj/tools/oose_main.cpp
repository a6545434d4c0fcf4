// Command-line front end: embed / train / extend / benchmark / heatmap /
// anomaly.  Exit codes: 0 success, 2 input or format problems, 3 numerical
// failures.  All outputs are written atomically.

#include <omp.h>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "oose/bench.hpp"
#include "oose/data.hpp"
#include "oose/gpr.hpp"
#include "oose/hyperopt.hpp"
#include "oose/manifold.hpp"
#include "oose/types.hpp"

using json = nlohmann::json;
using namespace oose;

namespace {

EmbedMethod method_from_string(const std::string& s) {
  if (s == "dm") return EmbedMethod::diffusion_maps;
  if (s == "le") return EmbedMethod::laplacian_eigenmaps;
  if (s == "isomap") return EmbedMethod::isomap;
  if (s == "mds") return EmbedMethod::mds;
  if (s == "external") return EmbedMethod::external;
  throw InputError("unknown method '" + s + "' (expected dm, le, isomap, mds, external)");
}

bench::Extender extender_from_string(const std::string& s) {
  if (s == "gpr") return bench::Extender::gpr;
  if (s == "nystrom") return bench::Extender::nystrom;
  throw InputError("unknown extender '" + s + "' (expected gpr, nystrom)");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) {
    while (!cur.empty() && cur.front() == ' ') cur.erase(cur.begin());
    while (!cur.empty() && cur.back() == ' ') cur.pop_back();
    if (!cur.empty()) out.push_back(cur);
  }
  if (out.empty()) throw InputError("empty list '" + s + "'");
  return out;
}

double parse_double_token(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError(std::string(what) + ": not a number: '" + s + "'");
  }
}

std::vector<double> parse_double_list(const std::string& s, const char* what) {
  std::vector<double> out;
  for (const std::string& tok : split_list(s)) out.push_back(parse_double_token(tok, what));
  return out;
}

// "a:b:s" inclusive of both ends when s divides b - a; otherwise a comma
// list.  Each fraction must lie strictly inside (0, 1); checking up front
// keeps the fail-before-computation promise (run_benchmark would otherwise
// record one failed repeat per cell).
std::vector<double> parse_rho_spec(const std::string& s) {
  std::vector<double> out;
  if (s.find(':') == std::string::npos) {
    out = parse_double_list(s, "--rho");
  } else {
    const auto first = s.find(':');
    const auto second = s.find(':', first + 1);
    if (second == std::string::npos || s.find(':', second + 1) != std::string::npos)
      throw InputError("--rho: range syntax is start:stop:step, got '" + s + "'");
    const double a = parse_double_token(s.substr(0, first), "--rho");
    const double b = parse_double_token(s.substr(first + 1, second - first - 1), "--rho");
    const double step = parse_double_token(s.substr(second + 1), "--rho");
    if (!(step > 0.0) || b < a)
      throw InputError("--rho: need start <= stop and step > 0");
    const auto count = static_cast<long long>(std::floor((b - a) / step + 1e-9)) + 1;
    out.reserve(static_cast<std::size_t>(count));
    for (long long i = 0; i < count; ++i) out.push_back(a + static_cast<double>(i) * step);
  }
  for (const double v : out)
    if (!(v > 0.0) || !(v < 1.0))
      throw InputError("--rho: each training fraction must lie in (0, 1), got " +
                       std::to_string(v));
  return out;
}

CsvOptions csv_options(const std::string& header_mode, bool labels = false) {
  CsvOptions opt;
  opt.labels = labels;
  if (header_mode == "auto") {
    opt.header.reset();
  } else if (header_mode == "yes") {
    opt.header = true;
  } else if (header_mode == "no") {
    opt.header = false;
  } else {
    throw InputError("--header must be auto, yes or no, got '" + header_mode + "'");
  }
  return opt;
}

BandwidthSpec bandwidth_spec(const std::string& policy, double eps, Index eps_knn) {
  BandwidthSpec bw;
  bw.knn_k = eps_knn;
  if (policy == "median-sq-pairwise") {
    bw.policy = BandwidthPolicy::median_sq_pairwise;
  } else if (policy == "median-avg-knn") {
    bw.policy = BandwidthPolicy::median_avg_knn;
  } else if (policy == "value") {
    bw.policy = BandwidthPolicy::explicit_value;
    bw.value = eps;
  } else {
    throw InputError("--eps-policy must be median-sq-pairwise, median-avg-knn or value");
  }
  return bw;
}

std::vector<std::string> numbered_header(const std::string& stem, Index d) {
  std::vector<std::string> h;
  for (Index j = 0; j < d; ++j) h.push_back(stem + "_" + std::to_string(j));
  return h;
}

void write_json_atomic(const std::string& path, const json& j) {
  write_text_atomic(path, j.dump(2) + "\n");
}

// --- embed -----------------------------------------------------------------

struct EmbedArgs {
  std::string dataset, input, embedding_file, out;
  Index n = 1000;
  std::uint64_t seed = 1;
  double noise = 0.0;
  std::string header = "auto";
  std::string method = "dm";
  Index dim = 2;
  Index knn = 8;
  std::string eps_policy = "median-sq-pairwise";
  double eps = 0.0;
  Index eps_knn = 5;
};

int run_embed(const EmbedArgs& a) {
  const EmbedMethod method = method_from_string(a.method);
  if (a.dataset.empty() == a.input.empty())
    throw InputError("embed: give exactly one of --dataset or --input");

  PointCloud cloud = a.input.empty()
                         ? make_dataset(a.dataset, a.n, a.seed, a.noise)
                         : load_csv(a.input, csv_options(a.header));

  Embedding emb;
  if (method == EmbedMethod::external) {
    if (a.embedding_file.empty())
      throw InputError("embed: --method external needs --embedding <csv>");
    const PointCloud ext = load_csv(a.embedding_file, csv_options("auto"));
    if (ext.coords.rows() != cloud.coords.rows())
      throw InputError("embed: external embedding has " +
                       std::to_string(ext.coords.rows()) + " rows, points have " +
                       std::to_string(cloud.coords.rows()));
    emb.coords = ext.coords;
    emb.method = EmbedMethod::external;
  } else {
    ManifoldOptions opt;
    opt.knn_k = a.knn;
    opt.bandwidth = bandwidth_spec(a.eps_policy, a.eps, a.eps_knn);
    emb = embed(cloud, method, a.dim, opt);
  }

  save_csv(emb.coords, a.out, numbered_header("y", emb.coords.cols()));

  json meta;
  meta["format"] = "oose-embedding-meta";
  meta["method"] = to_string(emb.method);
  meta["rows"] = emb.coords.rows();
  meta["dim"] = emb.coords.cols();
  meta["params_used"] = emb.params_used;
  meta["spectrum"] = std::vector<double>(emb.spectrum.begin(), emb.spectrum.end());
  write_json_atomic(a.out + ".meta.json", meta);
  return 0;
}

// --- train -------------------------------------------------------------------

struct TrainArgs {
  std::string points, embedding, out;
  std::string header = "auto";
  bool no_loocv = false;
  std::optional<double> tau, noise;
  bool no_center = false;
  std::string tau_scales, noise_fracs;
};

int run_train(const TrainArgs& a) {
  if (a.no_loocv && !a.tau)
    throw InputError("train: --no-loocv needs --tau (and optionally --noise)");
  if (!a.no_loocv && (a.tau || a.noise))
    throw InputError("train: --tau/--noise only apply with --no-loocv");

  const PointCloud pts = load_csv(a.points, csv_options(a.header));
  const PointCloud emb = load_csv(a.embedding, csv_options(a.header));
  if (pts.coords.rows() != emb.coords.rows())
    throw InputError("train: points have " + std::to_string(pts.coords.rows()) +
                     " rows, embedding has " + std::to_string(emb.coords.rows()));

  gpr::TrainOptions opt;
  opt.center_targets = !a.no_center;
  hyperopt::InitGrid grid;
  if (a.no_loocv) {
    opt.fixed = KernelParams{*a.tau, a.noise.value_or(0.0)};
  } else {
    if (!a.tau_scales.empty()) grid.tau_scales = parse_double_list(a.tau_scales, "--tau-scales");
    if (!a.noise_fracs.empty()) grid.noise_fracs = parse_double_list(a.noise_fracs, "--noise-fracs");
    opt.grid = &grid;
  }

  std::vector<hyperopt::HyperOptReport> reports;
  const gpr::GprModel model = gpr::train(pts.coords, emb.coords, opt, &reports);
  save_model(model, a.out);

  if (!a.no_loocv) {
    json out = json::array();
    for (std::size_t j = 0; j < reports.size(); ++j) {
      const auto& r = reports[j];
      json dim;
      dim["dim"] = j;
      dim["tau"] = r.best_params.tau;
      dim["noise_var"] = r.best_params.noise_var;
      dim["objective"] = r.best_objective;
      dim["restarts"] = r.restarts_used;
      dim["line_search_failed"] = r.line_search_failed;
      dim["iterations"] = r.trace.size();
      out.push_back(std::move(dim));
    }
    write_json_atomic(a.out + ".hyperopt.json", out);
  }
  return 0;
}

// --- extend -------------------------------------------------------------------

struct ExtendArgs {
  std::string model, input, out;
  std::string header = "auto";
};

int run_extend(const ExtendArgs& a) {
  const gpr::GprModel model = load_model(a.model);
  const PointCloud pts = load_csv(a.input, csv_options(a.header));
  Matrix means, variances;
  if (pts.coords.rows() == 0) {
    means.resize(0, model.dim());
    variances.resize(0, model.dim());
    if (pts.coords.cols() != 0 && pts.coords.cols() != model.input_dim())
      throw InputError("extend: input has " + std::to_string(pts.coords.cols()) +
                       " columns, model expects " + std::to_string(model.input_dim()));
  } else {
    gpr::predict_batch(model, pts.coords, means, variances);
  }

  const Index d = model.dim();
  Matrix out(means.rows(), 2 * d);
  out.leftCols(d) = means;
  out.rightCols(d) = variances;
  std::vector<std::string> header = numbered_header("mu", d);
  for (const std::string& h : numbered_header("var", d)) header.push_back(h);
  save_csv(out, a.out, header);

  if (model.clamp_stats && model.clamp_stats->severe.load() > 0)
    std::cerr << "warning: " << model.clamp_stats->severe.load()
              << " predictive variances clamped from significantly outside [0, 1]\n";
  return 0;
}

// --- benchmark -----------------------------------------------------------------

struct BenchArgs {
  std::string datasets = "swiss_roll,swiss_hole,corner_planes,punctured_sphere,"
                         "twin_peaks,clusters_3d,toroidal_helix";
  std::string methods = "dm,le,isomap,mds";
  std::string extenders = "gpr,nystrom";
  std::string rho = "0.05:0.8:0.05";
  Index n = 1000;
  std::uint64_t data_seed = 1;
  std::string noise = "auto";
  int repeats = 10;
  std::uint64_t seed = 1;
  Index dim = 2;
  Index knn = 8;
  std::string eps_policy = "median-sq-pairwise";
  double eps = 0.0;
  Index eps_knn = 5;
  std::optional<double> gpr_tau, gpr_noise;
  bool no_center = false;
  std::string tau_scales, noise_fracs;
  std::optional<double> nystrom_tau;
  std::string out_prefix;
};

int run_benchmark(const BenchArgs& a) {
  bench::BenchmarkConfig cfg;
  std::optional<double> noise_sd;
  if (a.noise != "auto") noise_sd = parse_double_token(a.noise, "--noise");
  for (const std::string& name : split_list(a.datasets))
    cfg.datasets.push_back(bench::DatasetSpec{name, a.n, a.data_seed, noise_sd});
  for (const std::string& m : split_list(a.methods)) {
    const EmbedMethod method = method_from_string(m);
    if (method == EmbedMethod::external)
      throw InputError("benchmark: external embeddings cannot be benchmarked");
    cfg.methods.push_back(method);
  }
  for (const std::string& e : split_list(a.extenders))
    cfg.extenders.push_back(extender_from_string(e));
  cfg.rhos = parse_rho_spec(a.rho);
  cfg.repeats = a.repeats;
  cfg.base_seed = a.seed;
  cfg.dim = a.dim;
  cfg.manifold.knn_k = a.knn;
  cfg.manifold.bandwidth = bandwidth_spec(a.eps_policy, a.eps, a.eps_knn);
  if (a.gpr_tau.has_value() != a.gpr_noise.has_value())
    throw InputError("benchmark: give both --gpr-tau and --gpr-noise or neither");
  if (a.gpr_tau) cfg.gpr.fixed = KernelParams{*a.gpr_tau, *a.gpr_noise};
  cfg.gpr.center_targets = !a.no_center;
  if (!a.tau_scales.empty())
    cfg.gpr.grid.tau_scales = parse_double_list(a.tau_scales, "--tau-scales");
  if (!a.noise_fracs.empty())
    cfg.gpr.grid.noise_fracs = parse_double_list(a.noise_fracs, "--noise-fracs");
  cfg.nystrom.tau = a.nystrom_tau;

  const bench::BenchmarkReport report = bench::run_benchmark(cfg);
  for (const auto& e : report.embeddings)
    if (e.failed)
      std::cerr << "warning: " << e.dataset << "/" << to_string(e.method)
                << " embedding failed: " << e.error << "\n";
  bench::export_cells_csv(report, a.out_prefix + "_cells.csv");
  bench::export_aggregate_csv(report, a.out_prefix + "_aggregate.csv");
  return 0;
}

// --- heatmap --------------------------------------------------------------------

struct HeatmapArgs {
  std::string model, out;
  Index grid_res = 40;
  std::string fix;   // "axis=value,axis" (bare axis pins the training mean)
  std::string bbox;  // "x0:x1:y0:y1" over the two free axes
};

int run_heatmap(const HeatmapArgs& a) {
  const gpr::GprModel model = load_model(a.model);
  const Index N = model.input_dim();
  if (N < 2) throw InputError("heatmap: model inputs must have at least 2 axes");
  const Matrix& X = *model.dims.at(0).train_inputs;
  const Vector train_mean = X.colwise().mean().transpose();

  std::map<Index, double> fixed;
  if (a.fix.empty()) {
    for (Index ax = 2; ax < N; ++ax) fixed[ax] = train_mean(ax);  // keep axes 0, 1
  } else {
    for (const std::string& tok : split_list(a.fix)) {
      const auto eq = tok.find('=');
      const std::string axis_text = tok.substr(0, eq);
      Index axis = 0;
      try {
        std::size_t pos = 0;
        axis = static_cast<Index>(std::stoll(axis_text, &pos));
        if (pos != axis_text.size()) throw std::invalid_argument(axis_text);
      } catch (const std::exception&) {
        throw InputError("heatmap: bad axis in --fix: '" + tok + "'");
      }
      if (axis < 0 || axis >= N)
        throw InputError("heatmap: --fix axis " + std::to_string(axis) +
                         " out of range for " + std::to_string(N) + " inputs");
      fixed[axis] = eq == std::string::npos
                        ? train_mean(axis)
                        : parse_double_token(tok.substr(eq + 1), "--fix");
    }
  }

  std::vector<Index> free_axes;
  for (Index ax = 0; ax < N; ++ax)
    if (!fixed.count(ax)) free_axes.push_back(ax);
  if (free_axes.size() != 2)
    throw InputError("heatmap: exactly 2 axes must stay free, got " +
                     std::to_string(free_axes.size()));

  bench::HeatmapSpec spec;
  spec.grid_res = a.grid_res;
  spec.fixed = fixed;
  spec.lo = Vector::Zero(N);
  spec.hi = Vector::Zero(N);
  if (a.bbox.empty()) {
    // Training bounding box of the free axes, widened by 10% per side.
    for (Index ax : free_axes) {
      const double lo = X.col(ax).minCoeff(), hi = X.col(ax).maxCoeff();
      const double margin = 0.1 * (hi - lo);
      spec.lo(ax) = lo - margin;
      spec.hi(ax) = hi + margin;
    }
  } else {
    std::vector<double> edges;
    std::istringstream in(a.bbox);
    std::string tok;
    while (std::getline(in, tok, ':')) edges.push_back(parse_double_token(tok, "--bbox"));
    if (edges.size() != 4) throw InputError("heatmap: --bbox is x0:x1:y0:y1");
    spec.lo(free_axes[0]) = edges[0];
    spec.hi(free_axes[0]) = edges[1];
    spec.lo(free_axes[1]) = edges[2];
    spec.hi(free_axes[1]) = edges[3];
  }

  const bench::Heatmap h = bench::anomaly_heatmap(model, spec);

  const Index res = a.grid_res;
  Matrix rows(res * res, 3);
  for (Index ix = 0; ix < res; ++ix)
    for (Index iy = 0; iy < res; ++iy) {
      const Index r = ix * res + iy;
      rows(r, 0) = h.xs(ix);
      rows(r, 1) = h.ys(iy);
      rows(r, 2) = h.values(ix, iy);
    }
  save_csv(rows, a.out, {"grid_x", "grid_y", "h"});
  return 0;
}

// --- anomaly ---------------------------------------------------------------------

struct AnomalyArgs {
  std::string train, test, out_prefix;
  std::string method = "dm";
  Index dim = 2;
  Index knn = 8;
  std::string eps_policy = "median-avg-knn";
  double eps = 0.0;
  Index eps_knn = 5;
  double holdout = 0.2;
  std::uint64_t seed = 1;
  bool no_minmax = false;
  bool no_loocv = false;
  std::optional<double> tau, noise;
  std::string tau_scales, noise_fracs;
};

int run_anomaly(const AnomalyArgs& a) {
  if (a.no_loocv && !a.tau)
    throw InputError("anomaly: --no-loocv needs --tau (and optionally --noise)");
  if (!a.no_loocv && (a.tau || a.noise))
    throw InputError("anomaly: --tau/--noise only apply with --no-loocv");
  const EmbedMethod method = method_from_string(a.method);
  if (method == EmbedMethod::external)
    throw InputError("anomaly: external embeddings are not supported here");

  CsvOptions labeled;
  labeled.labels = true;
  const PointCloud train = load_csv(a.train, labeled);
  if (train.coords.rows() == 0) throw InputError("anomaly: empty training file");
  for (int lab : train.labels)
    if (lab != 0 && lab != 1)
      throw InputError("anomaly: labels must be 0 (normal) or 1 (anomalous)");

  std::vector<Index> normal_rows;
  for (Index i = 0; i < train.coords.rows(); ++i)
    if (train.labels[static_cast<std::size_t>(i)] == 0) normal_rows.push_back(i);
  if (normal_rows.size() < 2)
    throw InputError("anomaly: need at least 2 normal-labeled rows, got " +
                     std::to_string(normal_rows.size()));

  // The detector's world is the normal data: the scaler, the embedding and
  // the regressors all come from the normal rows; labeled anomalies only
  // participate in threshold selection.
  const Matrix raw_normal = bench::take_rows(train.coords, normal_rows);
  MinMaxScaler scaler;
  if (!a.no_minmax) scaler = fit_minmax(raw_normal);
  const auto scale = [&](const Matrix& M) {
    return a.no_minmax ? M : apply_minmax(scaler, M);
  };
  const Matrix X_normal = scale(raw_normal);

  PointCloud normal_cloud;
  normal_cloud.coords = X_normal;
  normal_cloud.source = a.train;
  ManifoldOptions mopt;
  mopt.knn_k = a.knn;
  mopt.bandwidth = bandwidth_spec(a.eps_policy, a.eps, a.eps_knn);
  const Embedding emb = embed(normal_cloud, method, a.dim, mopt);

  gpr::TrainOptions gopt;
  hyperopt::InitGrid grid = hyperopt::lean_grid();
  if (a.no_loocv) {
    gopt.fixed = KernelParams{*a.tau, a.noise.value_or(0.0)};
  } else {
    if (!a.tau_scales.empty()) grid.tau_scales = parse_double_list(a.tau_scales, "--tau-scales");
    if (!a.noise_fracs.empty()) grid.noise_fracs = parse_double_list(a.noise_fracs, "--noise-fracs");
    gopt.grid = &grid;
  }
  const gpr::GprModel model = gpr::train(X_normal, emb.coords, gopt);

  const Matrix X_all = scale(train.coords);
  Matrix means, variances;
  gpr::predict_batch(model, X_all, means, variances);
  const Vector totals = variances.rowwise().sum();

  const bench::ThresholdResult thr =
      bench::learn_threshold(totals, train.labels, a.holdout, a.seed);

  json tj;
  tj["format"] = "oose-threshold";
  tj["threshold"] = thr.threshold;
  tj["holdout_accuracy"] = thr.holdout_accuracy;
  tj["degenerate"] = thr.degenerate;
  tj["holdout_size"] = thr.holdout_idx.size();
  tj["train_rows"] = train.coords.rows();
  tj["normal_rows"] = normal_rows.size();
  tj["method"] = to_string(method);
  tj["dim"] = emb.coords.cols();
  tj["minmax"] = !a.no_minmax;
  write_json_atomic(a.out_prefix + "_threshold.json", tj);

  if (!a.test.empty()) {
    const PointCloud test = load_csv(a.test, csv_options("auto"));
    const Matrix Q = scale(test.coords);
    Matrix tmean, tvar;
    Matrix scores(test.coords.rows(), 2);
    if (test.coords.rows() > 0) {
      gpr::predict_batch(model, Q, tmean, tvar);
      scores.col(0) = tvar.rowwise().sum();
      for (Index i = 0; i < scores.rows(); ++i)
        scores(i, 1) = scores(i, 0) > thr.threshold ? 1.0 : 0.0;
    }
    save_csv(scores, a.out_prefix + "_classes.csv", {"variance_total", "label"});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Out-of-sample extension of manifold embeddings by per-dimension "
               "Gaussian process regression, with the kernel eigenbasis route as "
               "noise-free baseline and variance-based anomaly scoring"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP thread cap (0 = runtime default)");

  EmbedArgs ea;
  CLI::App* embed_cmd = app.add_subcommand("embed", "Embed a dataset or CSV");
  embed_cmd->add_option("--dataset", ea.dataset, "Generator name (see --help-datasets)");
  embed_cmd->add_option("--input", ea.input, "Points CSV instead of a generator");
  embed_cmd->add_option("--n", ea.n, "Generator sample count")->capture_default_str();
  embed_cmd->add_option("--seed", ea.seed, "Generator seed")->capture_default_str();
  embed_cmd->add_option("--noise", ea.noise, "Generator noise sd")->capture_default_str();
  embed_cmd->add_option("--header", ea.header, "CSV header: auto|yes|no")->capture_default_str();
  embed_cmd->add_option("--method", ea.method, "dm|le|isomap|mds|external")->capture_default_str();
  embed_cmd->add_option("--dim", ea.dim, "Target dimension, 0 = spectral gap rule")->capture_default_str();
  embed_cmd->add_option("--knn", ea.knn, "kNN graph degree (le, isomap)")->capture_default_str();
  embed_cmd->add_option("--eps-policy", ea.eps_policy, "median-sq-pairwise|median-avg-knn|value")->capture_default_str();
  embed_cmd->add_option("--eps", ea.eps, "Bandwidth for --eps-policy value");
  embed_cmd->add_option("--eps-knn", ea.eps_knn, "k for median-avg-knn")->capture_default_str();
  embed_cmd->add_option("--embedding", ea.embedding_file, "Existing embedding CSV (--method external)");
  embed_cmd->add_option("--out", ea.out, "Output coordinates CSV")->required();

  TrainArgs ta;
  CLI::App* train_cmd = app.add_subcommand("train", "Fit per-dimension regressors to an embedding");
  train_cmd->add_option("--points", ta.points, "Training points CSV")->required();
  train_cmd->add_option("--embedding", ta.embedding, "Embedding CSV, rows aligned")->required();
  train_cmd->add_option("--header", ta.header, "CSV header: auto|yes|no")->capture_default_str();
  train_cmd->add_flag("--no-loocv", ta.no_loocv, "Fixed hyperparameters instead of the LOOCV search");
  train_cmd->add_option("--tau", ta.tau, "Fixed kernel length scale (with --no-loocv)");
  train_cmd->add_option("--noise", ta.noise, "Fixed noise variance (with --no-loocv, default 0)");
  train_cmd->add_flag("--no-center", ta.no_center, "Skip per-dimension target centering");
  train_cmd->add_option("--tau-scales", ta.tau_scales, "LOOCV grid: comma list of median-distance multiples");
  train_cmd->add_option("--noise-fracs", ta.noise_fracs, "LOOCV grid: comma list of var(y) fractions");
  train_cmd->add_option("--out", ta.out, "Output model JSON")->required();

  ExtendArgs xa;
  CLI::App* extend_cmd = app.add_subcommand("extend", "Predict embedding coordinates for new points");
  extend_cmd->add_option("--model", xa.model, "Model JSON from train")->required();
  extend_cmd->add_option("--input", xa.input, "Points CSV")->required();
  extend_cmd->add_option("--header", xa.header, "CSV header: auto|yes|no")->capture_default_str();
  extend_cmd->add_option("--out", xa.out, "Output CSV: mu_0..mu_d-1, var_0..var_d-1")->required();

  BenchArgs ba;
  CLI::App* bench_cmd = app.add_subcommand("benchmark", "Split/extend/score RMSE grid");
  bench_cmd->add_option("--datasets,--dataset", ba.datasets, "Comma list of generator names")->capture_default_str();
  bench_cmd->add_option("--methods,--method", ba.methods, "Comma list of dm|le|isomap|mds")->capture_default_str();
  bench_cmd->add_option("--extenders", ba.extenders, "Comma list of gpr|nystrom")->capture_default_str();
  bench_cmd->add_option("--rho", ba.rho, "Training fractions: start:stop:step or comma list")->capture_default_str();
  bench_cmd->add_option("--n", ba.n, "Points per dataset")->capture_default_str();
  bench_cmd->add_option("--data-seed", ba.data_seed, "Generator seed")->capture_default_str();
  bench_cmd->add_option("--noise", ba.noise, "Noise sd, or 'auto' = 1% of bbox diagonal")->capture_default_str();
  bench_cmd->add_option("--repeats", ba.repeats, "Splits per cell")->capture_default_str();
  bench_cmd->add_option("--seed", ba.seed, "Base split seed (repeat r uses seed+r)")->capture_default_str();
  bench_cmd->add_option("--dim", ba.dim, "Embedding dimension, 0 = spectral gap rule")->capture_default_str();
  bench_cmd->add_option("--knn", ba.knn, "kNN graph degree")->capture_default_str();
  bench_cmd->add_option("--eps-policy", ba.eps_policy, "median-sq-pairwise|median-avg-knn|value")->capture_default_str();
  bench_cmd->add_option("--eps", ba.eps, "Bandwidth for --eps-policy value");
  bench_cmd->add_option("--eps-knn", ba.eps_knn, "k for median-avg-knn")->capture_default_str();
  bench_cmd->add_option("--gpr-tau", ba.gpr_tau, "Fixed GPR length scale (skips LOOCV)");
  bench_cmd->add_option("--gpr-noise", ba.gpr_noise, "Fixed GPR noise variance (with --gpr-tau)");
  bench_cmd->add_flag("--no-center", ba.no_center, "Skip GPR target centering");
  bench_cmd->add_option("--tau-scales", ba.tau_scales, "LOOCV grid tau multiples");
  bench_cmd->add_option("--noise-fracs", ba.noise_fracs, "LOOCV grid noise fractions");
  bench_cmd->add_option("--nystrom-tau", ba.nystrom_tau,
                        "Eigen-route tau (default: sqrt of median squared pairwise distance)");
  bench_cmd->add_option("--out-prefix", ba.out_prefix, "Writes <prefix>_cells.csv and <prefix>_aggregate.csv")->required();

  HeatmapArgs ha;
  CLI::App* heatmap_cmd = app.add_subcommand("heatmap", "Anomaly heat grid over two input axes");
  heatmap_cmd->add_option("--model", ha.model, "Model JSON from train")->required();
  heatmap_cmd->add_option("--grid-res", ha.grid_res, "Nodes per axis")->capture_default_str();
  heatmap_cmd->add_option("--fix", ha.fix,
                          "Pinned axes, e.g. '2=0.5' or '2' (training mean); default pins "
                          "every axis but the first two at its training mean");
  heatmap_cmd->add_option("--bbox", ha.bbox, "x0:x1:y0:y1 over the free axes (default: training box +10%)");
  heatmap_cmd->add_option("--out", ha.out, "Output CSV: grid_x,grid_y,h")->required();

  AnomalyArgs aa;
  CLI::App* anomaly_cmd = app.add_subcommand(
      "anomaly", "Train a variance-threshold detector on labeled data");
  anomaly_cmd->add_option("--train", aa.train, "Labeled CSV (last column 0=normal, 1=anomalous)")->required();
  anomaly_cmd->add_option("--test", aa.test, "Unlabeled CSV to classify");
  anomaly_cmd->add_option("--method", aa.method, "dm|le|isomap|mds")->capture_default_str();
  anomaly_cmd->add_option("--dim", aa.dim, "Embedding dimension")->capture_default_str();
  anomaly_cmd->add_option("--knn", aa.knn, "kNN graph degree")->capture_default_str();
  anomaly_cmd->add_option("--eps-policy", aa.eps_policy, "median-sq-pairwise|median-avg-knn|value")->capture_default_str();
  anomaly_cmd->add_option("--eps", aa.eps, "Bandwidth for --eps-policy value");
  anomaly_cmd->add_option("--eps-knn", aa.eps_knn, "k for median-avg-knn")->capture_default_str();
  anomaly_cmd->add_option("--holdout", aa.holdout, "Threshold holdout fraction")->capture_default_str();
  anomaly_cmd->add_option("--seed", aa.seed, "Holdout seed")->capture_default_str();
  anomaly_cmd->add_flag("--no-minmax", aa.no_minmax, "Skip per-axis min-max scaling");
  anomaly_cmd->add_flag("--no-loocv", aa.no_loocv, "Fixed GPR hyperparameters");
  anomaly_cmd->add_option("--tau", aa.tau, "Fixed length scale (with --no-loocv)");
  anomaly_cmd->add_option("--noise", aa.noise, "Fixed noise variance (with --no-loocv)");
  anomaly_cmd->add_option("--tau-scales", aa.tau_scales, "LOOCV grid tau multiples");
  anomaly_cmd->add_option("--noise-fracs", aa.noise_fracs, "LOOCV grid noise fractions");
  anomaly_cmd->add_option("--out-prefix", aa.out_prefix,
                          "Writes <prefix>_threshold.json and <prefix>_classes.csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (threads > 0) omp_set_num_threads(threads);
    if (embed_cmd->parsed()) return run_embed(ea);
    if (train_cmd->parsed()) return run_train(ta);
    if (extend_cmd->parsed()) return run_extend(xa);
    if (bench_cmd->parsed()) return run_benchmark(ba);
    if (heatmap_cmd->parsed()) return run_heatmap(ha);
    if (anomaly_cmd->parsed()) return run_anomaly(aa);
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}
