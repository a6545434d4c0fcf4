#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "oose/data.hpp"
#include "support/oracles.hpp"

using namespace oose;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path dir;
  TempDir() {
    dir = fs::temp_directory_path() /
          ("oose-test-" + std::to_string(::getpid()) + "-" +
           std::to_string(counter()++));
    fs::create_directories(dir);
  }
  ~TempDir() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_SUITE("data") {

TEST_CASE("generators are deterministic and respect their geometry") {
  for (const std::string& name : dataset_names()) {
    const PointCloud a = make_dataset(name, 64, 5);
    const PointCloud b = make_dataset(name, 64, 5);
    INFO("dataset ", name);
    REQUIRE(a.coords.rows() == 64);
    CHECK(a.coords == b.coords);
    CHECK(a.coords.allFinite());
    CHECK(a.source == name);
    const PointCloud c = make_dataset(name, 64, 6);
    CHECK(a.coords != c.coords);  // seed matters
  }
  CHECK(dataset_names().size() == 7);
  CHECK_THROWS_AS(make_dataset("swiss_roll", 9, 1), InputError);
  CHECK_THROWS_AS(make_dataset("nope", 50, 1), InputError);
  CHECK_THROWS_AS(make_swiss_roll(50, 1, -0.1), InputError);
}

TEST_CASE("swiss roll satisfies its surface equations") {
  const PointCloud cloud = make_swiss_roll(200, 3);
  for (Index i = 0; i < 200; ++i) {
    const double t = cloud.manifold_params(i, 0);
    const double h = cloud.manifold_params(i, 1);
    const double x = cloud.coords(i, 0), y = cloud.coords(i, 1),
                 z = cloud.coords(i, 2);
    CHECK(x * x + z * z == doctest::Approx(t * t).epsilon(1e-9));
    CHECK(y == h);
    CHECK(t >= 3.0 * 3.14159265358979323846 / 2.0 - 1e-12);
    CHECK(t <= 9.0 * 3.14159265358979323846 / 2.0 + 1e-12);
    CHECK(h >= 0.0);
    CHECK(h <= 21.0);
  }
}

TEST_CASE("swiss hole avoids the cut-out window; the plain roll fills it") {
  const PointCloud hole = make_swiss_hole(400, 3);
  const double pi = 3.14159265358979323846;
  const double t_lo = 1.5 * pi + 0.4 * (4.5 * pi - 1.5 * pi);
  const double t_hi = 1.5 * pi + 0.6 * (4.5 * pi - 1.5 * pi);
  for (Index i = 0; i < 400; ++i) {
    const double t = hole.manifold_params(i, 0);
    const double h = hole.manifold_params(i, 1);
    const bool inside = t > t_lo && t < t_hi && h > 0.4 * 21.0 && h < 0.6 * 21.0;
    CHECK_FALSE(inside);
  }
  const PointCloud roll = make_swiss_roll(400, 3);
  int in_window = 0;
  for (Index i = 0; i < 400; ++i) {
    const double t = roll.manifold_params(i, 0);
    const double h = roll.manifold_params(i, 1);
    if (t > t_lo && t < t_hi && h > 0.4 * 21.0 && h < 0.6 * 21.0) ++in_window;
  }
  CHECK(in_window > 0);
}

TEST_CASE("remaining generators satisfy their surface identities") {
  const PointCloud helix = make_toroidal_helix(100, 7);
  for (Index i = 0; i < 100; ++i) {
    const double x = helix.coords(i, 0), y = helix.coords(i, 1),
                 z = helix.coords(i, 2);
    const double ring = std::sqrt(x * x + y * y) - 2.0;
    CHECK(ring * ring + z * z == doctest::Approx(1.0).epsilon(1e-9));
  }

  const PointCloud sphere = make_punctured_sphere(150, 7);
  const double cap = 5.0 * std::cos(3.14159265358979323846 / 6.0);
  for (Index i = 0; i < 150; ++i) {
    CHECK(sphere.coords.row(i).norm() == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(sphere.coords(i, 2) <= cap + 1e-9);
  }

  const PointCloud peaks = make_twin_peaks(150, 7);
  for (Index i = 0; i < 150; ++i) {
    const double x = peaks.coords(i, 0), y = peaks.coords(i, 1);
    CHECK(peaks.coords(i, 2) ==
          doctest::Approx(std::sin(3.14159265358979323846 * x) * std::tanh(3.0 * y))
              .epsilon(1e-9));
  }

  const PointCloud corner = make_corner_planes(150, 7);
  for (Index i = 0; i < 150; ++i) {
    const double u = corner.manifold_params(i, 0);
    const double x = corner.coords(i, 0), z = corner.coords(i, 2);
    if (u <= 0.0) {
      CHECK(z == 0.0);
      CHECK(x == u);
    } else {
      CHECK(z == doctest::Approx(x).epsilon(1e-12));  // 45 degree fold
    }
  }

  const PointCloud clusters = make_clusters_3d(30, 7);
  REQUIRE(clusters.has_labels());
  for (Index i = 0; i < 30; ++i)
    CHECK(clusters.labels[i] == static_cast<int>(i % 3));
}

TEST_CASE("noise perturbs coordinates without touching the surface draw") {
  const PointCloud clean = make_swiss_roll(80, 9);
  const PointCloud noisy = make_swiss_roll(80, 9, 0.5);
  CHECK(clean.manifold_params == noisy.manifold_params);
  CHECK(clean.coords != noisy.coords);
  const double max_shift = (clean.coords - noisy.coords).cwiseAbs().maxCoeff();
  CHECK(max_shift > 0.0);
  CHECK(max_shift < 0.5 * 6.0);  // a 6-sigma excursion would be absurd
}

TEST_CASE("bounding box diagonal") {
  Matrix X(3, 2);
  X << 0.0, 0.0, 3.0, 0.0, 3.0, 4.0;
  CHECK(bbox_diagonal(X) == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("csv round trip is bit-exact") {
  TempDir tmp;
  Matrix M(4, 3);
  M << 0.1 + 0.2, 1.0 / 3.0, -5.5, 1e-300, 1e300, 0.0, -0.0, 2.5, 3.25,
      1.23456789012345678, -9.87654321098765432e-4, 7.0;
  const std::string path = tmp.path("m.csv");
  save_csv(M, path, {"a", "b", "c"});
  const PointCloud back = load_csv(path);
  REQUIRE(back.coords.rows() == 4);
  REQUIRE(back.coords.cols() == 3);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 3; ++j) CHECK(back.coords(i, j) == M(i, j));
  CHECK_FALSE(fs::exists(path + ".tmp"));
  CHECK(slurp(path).find('\r') == std::string::npos);
}

TEST_CASE("csv header auto-detection and explicit override") {
  TempDir tmp;
  const std::string with = tmp.path("with.csv");
  write_text_atomic(with, "x,y\n1,2\n3,4\n");
  const PointCloud a = load_csv(with);
  CHECK(a.coords.rows() == 2);

  const std::string without = tmp.path("without.csv");
  write_text_atomic(without, "1,2\n3,4\n");
  CHECK(load_csv(without).coords.rows() == 2);

  CsvOptions opt;
  opt.header = false;
  CHECK_THROWS_AS(load_csv(with, opt), FormatError);  // "x" is not a number
  opt.header = true;
  CHECK(load_csv(without, opt).coords.rows() == 1);  // first row consumed

  const std::string only = tmp.path("only.csv");
  write_text_atomic(only, "x,y\n");
  const PointCloud h = load_csv(only);
  CHECK(h.coords.rows() == 0);
  CHECK(h.coords.cols() == 2);
}

TEST_CASE("csv labels column") {
  TempDir tmp;
  const std::string path = tmp.path("lab.csv");
  write_text_atomic(path, "x,y,label\n0.5,1.5,0\n2.5,3.5,1\n");
  CsvOptions opt;
  opt.labels = true;
  const PointCloud c = load_csv(path, opt);
  REQUIRE(c.coords.cols() == 2);
  REQUIRE(c.has_labels());
  CHECK(c.labels[0] == 0);
  CHECK(c.labels[1] == 1);

  // And back out through save_csv.
  const std::string out = tmp.path("lab-out.csv");
  save_csv(c.coords, out, {"x", "y", "label"}, &c.labels);
  const PointCloud back = load_csv(out, opt);
  CHECK(back.coords == c.coords);
  CHECK(back.labels == c.labels);

  write_text_atomic(path, "0.5,1.5,0\n2.5,3.5,1.7\n");
  CHECK_THROWS_AS(load_csv(path, opt), FormatError);  // non-integer label
}

TEST_CASE("csv failure modes carry positions") {
  TempDir tmp;
  const std::string empty = tmp.path("empty.csv");
  write_text_atomic(empty, "");
  CHECK_THROWS_AS(load_csv(empty), InputError);
  CHECK_THROWS_AS(load_csv(tmp.path("missing.csv")), InputError);

  const std::string ragged = tmp.path("ragged.csv");
  write_text_atomic(ragged, "1,2\n3\n");
  try {
    load_csv(ragged);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }

  const std::string alpha = tmp.path("alpha.csv");
  write_text_atomic(alpha, "1,2\n3,oops\n");
  try {
    load_csv(alpha);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 2") != std::string::npos);
    CHECK(msg.find("column 2") != std::string::npos);
  }
}

TEST_CASE("min-max scaling") {
  Matrix X(3, 2);
  X << 2.0, 7.0, 3.0, 7.0, 4.0, 7.0;
  const MinMaxScaler s = fit_minmax(X);
  CHECK(s.min(0) == 2.0);
  CHECK(s.range(0) == 2.0);
  CHECK(s.range(1) == 0.0);
  const Matrix Y = apply_minmax(s, X);
  CHECK(Y(0, 0) == 0.0);
  CHECK(Y(1, 0) == 0.5);
  CHECK(Y(2, 0) == 1.0);
  for (Index i = 0; i < 3; ++i) CHECK(Y(i, 1) == 0.0);  // constant axis

  Matrix Q(1, 2);
  Q << 6.0, 7.0;
  CHECK(apply_minmax(s, Q)(0, 0) == 2.0);  // no clamping

  CHECK_THROWS_AS(fit_minmax(Matrix(0, 2)), InputError);
  Matrix Qbad(1, 3);
  Qbad.setZero();
  CHECK_THROWS_AS(apply_minmax(s, Qbad), InputError);
}

TEST_CASE("model persistence reloads to bit-identical predictions") {
  TempDir tmp;
  const Matrix X = oracles::random_cloud(12, 3, 91);
  Matrix Y(12, 2);
  Y.col(0) = oracles::random_targets(12, 91);
  Y.col(1) = oracles::random_targets(12, 92);
  gpr::TrainOptions opt;
  opt.fixed = KernelParams{1.1, 0.07};
  const gpr::GprModel m = gpr::train(X, Y, opt);

  const std::string path = tmp.path("model.json");
  save_model(m, path);
  const gpr::GprModel r = load_model(path);
  REQUIRE(r.dim() == 2);
  CHECK(r.train_size() == 12);
  CHECK(r.input_dim() == 3);
  CHECK(r.dims[0].params.tau == m.dims[0].params.tau);

  const Matrix Q = oracles::random_cloud(10, 3, 93);
  Matrix mean_a, var_a, mean_b, var_b;
  gpr::predict_batch(m, Q, mean_a, var_a);
  gpr::predict_batch(r, Q, mean_b, var_b);
  CHECK(mean_a == mean_b);
  CHECK(var_a == var_b);
}

TEST_CASE("model files reject structural corruption") {
  TempDir tmp;
  const Matrix X = oracles::random_cloud(6, 2, 95);
  gpr::TrainOptions opt;
  opt.fixed = KernelParams{1.0, 0.05};
  const gpr::GprModel m = gpr::train(X, oracles::random_targets(6, 95), opt);
  const std::string path = tmp.path("model.json");
  save_model(m, path);

  const std::string text = slurp(path);
  write_text_atomic(tmp.path("trunc.json"), text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(load_model(tmp.path("trunc.json")), FormatError);

  std::string wrong_version = text;
  const auto pos = wrong_version.find("\"version\":1");
  REQUIRE(pos != std::string::npos);
  wrong_version.replace(pos, 11, "\"version\":9");
  write_text_atomic(tmp.path("version.json"), wrong_version);
  CHECK_THROWS_AS(load_model(tmp.path("version.json")), FormatError);

  std::string wrong_tag = text;
  const auto tag = wrong_tag.find("oose-gpr-model");
  REQUIRE(tag != std::string::npos);
  wrong_tag.replace(tag, 14, "something-else");
  write_text_atomic(tmp.path("tag.json"), wrong_tag);
  CHECK_THROWS_AS(load_model(tmp.path("tag.json")), FormatError);

  CHECK_THROWS_AS(load_model(tmp.path("absent.json")), InputError);
}

TEST_CASE("model file size stays on the order of dim * m^2 numbers") {
  TempDir tmp;
  const Index m = 1000;
  const Matrix X = oracles::random_cloud(m, 3, 97);
  Matrix Y(m, 2);
  Y.col(0) = X.col(0);
  Y.col(1) = X.col(1);
  gpr::TrainOptions opt;
  opt.fixed = KernelParams{2.0, 0.01};
  const gpr::GprModel model = gpr::train(X, Y, opt);
  const std::string path = tmp.path("big.json");
  save_model(model, path);
  const auto bytes = static_cast<double>(fs::file_size(path));
  const double numbers = 2.0 * m * m + 2.0 * m + 3.0 * m;  // A's dominate
  CHECK(bytes >= 2.0 * numbers);   // at least a digit and a separator each
  CHECK(bytes <= 26.0 * numbers);  // 17 significant digits plus syntax
}

}  // TEST_SUITE
