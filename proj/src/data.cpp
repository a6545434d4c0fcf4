#include "oose/data.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>

#include "oose/rng.hpp"

namespace oose {

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;

void check_n(Index n, const char* what) {
  if (n < 10)
    throw InputError(std::string(what) + ": need at least 10 points, got " +
                     std::to_string(n));
}

// Generators draw shape parameters from substream 0 and additive noise from
// substream 1, so the noiseless surface is a deterministic function of
// (n, seed) alone.
void add_noise(PointCloud& cloud, std::uint64_t seed, double noise_sd) {
  if (noise_sd < 0.0 || !std::isfinite(noise_sd))
    throw InputError("generator: noise_sd must be finite and >= 0");
  if (noise_sd == 0.0) return;
  Rng noise(seed, 1);
  for (Index i = 0; i < cloud.coords.rows(); ++i)
    for (Index c = 0; c < cloud.coords.cols(); ++c)
      cloud.coords(i, c) += noise_sd * noise.normal();
}

}  // namespace

PointCloud make_swiss_roll(Index n, std::uint64_t seed, double noise_sd) {
  check_n(n, "swiss_roll");
  Rng rng(seed, 0);
  PointCloud cloud;
  cloud.source = "swiss_roll";
  cloud.coords.resize(n, 3);
  cloud.manifold_params.resize(n, 2);
  for (Index i = 0; i < n; ++i) {
    const double t = rng.uniform(1.5 * kPi, 4.5 * kPi);
    const double h = rng.uniform(0.0, 21.0);
    cloud.manifold_params(i, 0) = t;
    cloud.manifold_params(i, 1) = h;
    cloud.coords(i, 0) = t * std::cos(t);
    cloud.coords(i, 1) = h;
    cloud.coords(i, 2) = t * std::sin(t);
  }
  add_noise(cloud, seed, noise_sd);
  return cloud;
}

PointCloud make_swiss_hole(Index n, std::uint64_t seed, double noise_sd) {
  check_n(n, "swiss_hole");
  Rng rng(seed, 0);
  const double t_lo = 1.5 * kPi, t_hi = 4.5 * kPi;
  const double h_lo = 0.0, h_hi = 21.0;
  // Central 20%-per-axis window of (t, h) is removed.
  const double t_a = t_lo + 0.4 * (t_hi - t_lo), t_b = t_lo + 0.6 * (t_hi - t_lo);
  const double h_a = h_lo + 0.4 * (h_hi - h_lo), h_b = h_lo + 0.6 * (h_hi - h_lo);

  PointCloud cloud;
  cloud.source = "swiss_hole";
  cloud.coords.resize(n, 3);
  cloud.manifold_params.resize(n, 2);
  for (Index i = 0; i < n; ++i) {
    double t = 0.0, h = 0.0;
    do {
      t = rng.uniform(t_lo, t_hi);
      h = rng.uniform(h_lo, h_hi);
    } while (t >= t_a && t <= t_b && h >= h_a && h <= h_b);
    cloud.manifold_params(i, 0) = t;
    cloud.manifold_params(i, 1) = h;
    cloud.coords(i, 0) = t * std::cos(t);
    cloud.coords(i, 1) = h;
    cloud.coords(i, 2) = t * std::sin(t);
  }
  add_noise(cloud, seed, noise_sd);
  return cloud;
}

PointCloud make_corner_planes(Index n, std::uint64_t seed, double noise_sd) {
  check_n(n, "corner_planes");
  Rng rng(seed, 0);
  const double c = std::cos(0.25 * kPi), s = std::sin(0.25 * kPi);
  PointCloud cloud;
  cloud.source = "corner_planes";
  cloud.coords.resize(n, 3);
  cloud.manifold_params.resize(n, 2);
  for (Index i = 0; i < n; ++i) {
    const double u = rng.uniform(-10.0, 10.0);
    const double v = rng.uniform(0.0, 10.0);
    cloud.manifold_params(i, 0) = u;
    cloud.manifold_params(i, 1) = v;
    if (u <= 0.0) {
      cloud.coords(i, 0) = u;
      cloud.coords(i, 1) = v;
      cloud.coords(i, 2) = 0.0;
    } else {
      cloud.coords(i, 0) = u * c;
      cloud.coords(i, 1) = v;
      cloud.coords(i, 2) = u * s;
    }
  }
  add_noise(cloud, seed, noise_sd);
  return cloud;
}

PointCloud make_punctured_sphere(Index n, std::uint64_t seed, double noise_sd) {
  check_n(n, "punctured_sphere");
  Rng rng(seed, 0);
  const double radius = 5.0;
  const double z_max = std::cos(kPi / 6.0);  // polar cap of angle pi/6 removed
  PointCloud cloud;
  cloud.source = "punctured_sphere";
  cloud.coords.resize(n, 3);
  cloud.manifold_params.resize(n, 2);
  for (Index i = 0; i < n; ++i) {
    const double z_unit = rng.uniform(-1.0, z_max);  // area-uniform in z
    const double theta = rng.uniform(0.0, 2.0 * kPi);
    const double phi = std::acos(z_unit);
    cloud.manifold_params(i, 0) = theta;
    cloud.manifold_params(i, 1) = phi;
    const double sp = std::sin(phi);
    cloud.coords(i, 0) = radius * sp * std::cos(theta);
    cloud.coords(i, 1) = radius * sp * std::sin(theta);
    cloud.coords(i, 2) = radius * z_unit;
  }
  add_noise(cloud, seed, noise_sd);
  return cloud;
}

PointCloud make_twin_peaks(Index n, std::uint64_t seed, double noise_sd) {
  check_n(n, "twin_peaks");
  Rng rng(seed, 0);
  PointCloud cloud;
  cloud.source = "twin_peaks";
  cloud.coords.resize(n, 3);
  cloud.manifold_params.resize(n, 2);
  for (Index i = 0; i < n; ++i) {
    const double x = rng.uniform(-1.0, 1.0);
    const double y = rng.uniform(-1.0, 1.0);
    cloud.manifold_params(i, 0) = x;
    cloud.manifold_params(i, 1) = y;
    cloud.coords(i, 0) = x;
    cloud.coords(i, 1) = y;
    cloud.coords(i, 2) = std::sin(kPi * x) * std::tanh(3.0 * y);
  }
  add_noise(cloud, seed, noise_sd);
  return cloud;
}

PointCloud make_clusters_3d(Index n, std::uint64_t seed, double noise_sd) {
  check_n(n, "clusters_3d");
  Rng rng(seed, 0);
  const double spacing = 6.0, blob_sd = 0.6;
  PointCloud cloud;
  cloud.source = "clusters_3d";
  cloud.coords.resize(n, 3);
  cloud.manifold_params.resize(n, 1);
  cloud.labels.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const int cluster = static_cast<int>(i % 3);
    const double center = spacing * static_cast<double>(cluster);
    cloud.labels[static_cast<std::size_t>(i)] = cluster;
    cloud.manifold_params(i, 0) = static_cast<double>(cluster);
    for (Index c = 0; c < 3; ++c) cloud.coords(i, c) = center + blob_sd * rng.normal();
  }
  add_noise(cloud, seed, noise_sd);
  return cloud;
}

PointCloud make_toroidal_helix(Index n, std::uint64_t seed, double noise_sd) {
  check_n(n, "toroidal_helix");
  Rng rng(seed, 0);
  const double R = 2.0, r = 1.0, omega = 8.0;
  PointCloud cloud;
  cloud.source = "toroidal_helix";
  cloud.coords.resize(n, 3);
  cloud.manifold_params.resize(n, 1);
  for (Index i = 0; i < n; ++i) {
    const double t = rng.uniform(0.0, 2.0 * kPi);
    cloud.manifold_params(i, 0) = t;
    const double tube = R + r * std::cos(omega * t);
    cloud.coords(i, 0) = tube * std::cos(t);
    cloud.coords(i, 1) = tube * std::sin(t);
    cloud.coords(i, 2) = r * std::sin(omega * t);
  }
  add_noise(cloud, seed, noise_sd);
  return cloud;
}

PointCloud make_dataset(const std::string& name, Index n, std::uint64_t seed,
                        double noise_sd) {
  if (name == "swiss_roll") return make_swiss_roll(n, seed, noise_sd);
  if (name == "swiss_hole") return make_swiss_hole(n, seed, noise_sd);
  if (name == "corner_planes") return make_corner_planes(n, seed, noise_sd);
  if (name == "punctured_sphere") return make_punctured_sphere(n, seed, noise_sd);
  if (name == "twin_peaks") return make_twin_peaks(n, seed, noise_sd);
  if (name == "clusters_3d") return make_clusters_3d(n, seed, noise_sd);
  if (name == "toroidal_helix") return make_toroidal_helix(n, seed, noise_sd);
  throw InputError("make_dataset: unknown dataset '" + name + "'");
}

std::vector<std::string> dataset_names() {
  return {"swiss_roll",  "swiss_hole",  "corner_planes", "punctured_sphere",
          "twin_peaks",  "clusters_3d", "toroidal_helix"};
}

double bbox_diagonal(const Matrix& X) {
  if (X.rows() == 0) throw InputError("bbox_diagonal: empty matrix");
  const Vector lo = X.colwise().minCoeff().transpose();
  const Vector hi = X.colwise().maxCoeff().transpose();
  return (hi - lo).norm();
}

// --- CSV -----------------------------------------------------------------

namespace {

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  for (auto& c : cells) {
    while (!c.empty() && (c.front() == ' ' || c.front() == '\t')) c.erase(c.begin());
    while (!c.empty() && (c.back() == ' ' || c.back() == '\t' || c.back() == '\r'))
      c.pop_back();
  }
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool parse_int(const std::string& s, int& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

PointCloud load_csv(const std::string& path, const CsvOptions& opt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("load_csv: cannot open '" + path + "'");

  std::vector<std::pair<std::size_t, std::string>> lines;  // (1-based line no, text)
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string stripped = line;
    while (!stripped.empty() && (stripped.back() == '\r' || stripped.back() == '\n'))
      stripped.pop_back();
    bool blank = true;
    for (char ch : stripped)
      if (!std::isspace(static_cast<unsigned char>(ch))) {
        blank = false;
        break;
      }
    if (!blank) lines.emplace_back(lineno, std::move(stripped));
  }
  if (lines.empty()) throw InputError("load_csv: '" + path + "' is empty");

  bool has_header;
  if (opt.header.has_value()) {
    has_header = *opt.header;
  } else {
    // Auto-detect: a first line with any non-numeric cell is a header.
    has_header = false;
    for (const auto& cell : split_cells(lines.front().second)) {
      double v;
      if (!parse_double(cell, v)) {
        has_header = true;
        break;
      }
    }
  }

  const std::size_t first_data = has_header ? 1 : 0;
  const Index rows = static_cast<Index>(lines.size() - first_data);
  if (rows == 0 && !has_header)
    throw InputError("load_csv: '" + path + "' has no data rows");

  PointCloud cloud;
  cloud.source = path;

  Index total_cols = -1;
  if (rows == 0) {
    // Header-only file: a valid zero-row cloud whose width comes from the
    // header itself.
    total_cols = static_cast<Index>(split_cells(lines.front().second).size());
  }

  std::vector<std::vector<double>> values;
  values.reserve(static_cast<std::size_t>(rows));
  std::vector<int> labels;

  for (std::size_t r = first_data; r < lines.size(); ++r) {
    const auto& [file_line, text] = lines[r];
    const auto cells = split_cells(text);
    if (total_cols < 0) total_cols = static_cast<Index>(cells.size());
    if (static_cast<Index>(cells.size()) != total_cols)
      throw FormatError("load_csv: '" + path + "' row " + std::to_string(file_line) +
                        " has " + std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(total_cols));
    std::vector<double> row;
    row.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const bool is_label_col = opt.labels && c + 1 == cells.size();
      if (is_label_col) {
        int lab;
        if (!parse_int(cells[c], lab))
          throw FormatError("load_csv: '" + path + "' row " + std::to_string(file_line) +
                            ", column " + std::to_string(c + 1) + ": '" + cells[c] +
                            "' is not an integer label");
        labels.push_back(lab);
      } else {
        double v;
        if (!parse_double(cells[c], v))
          throw FormatError("load_csv: '" + path + "' row " + std::to_string(file_line) +
                            ", column " + std::to_string(c + 1) + ": '" + cells[c] +
                            "' is not numeric");
        row.push_back(v);
      }
    }
    values.push_back(std::move(row));
  }

  if (total_cols <= (opt.labels ? 1 : 0))
    throw FormatError("load_csv: '" + path + "' has no coordinate columns");

  const Index ncols = total_cols - (opt.labels ? 1 : 0);
  cloud.coords.resize(rows, ncols);
  for (Index i = 0; i < rows; ++i)
    for (Index c = 0; c < ncols; ++c)
      cloud.coords(i, c) = values[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
  cloud.labels = std::move(labels);
  return cloud;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("write: cannot open '" + tmp + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw InputError("write: failed writing '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw InputError("write: cannot rename '" + tmp + "' to '" + path + "': " +
                     ec.message());
  }
}

void save_csv(const Matrix& M, const std::string& path,
              const std::vector<std::string>& header, const std::vector<int>* labels) {
  if (labels && static_cast<Index>(labels->size()) != M.rows())
    throw InputError("save_csv: " + std::to_string(labels->size()) + " labels for " +
                     std::to_string(M.rows()) + " rows");
  const std::size_t width = static_cast<std::size_t>(M.cols()) + (labels ? 1 : 0);
  if (!header.empty() && header.size() != width)
    throw InputError("save_csv: header has " + std::to_string(header.size()) +
                     " names for " + std::to_string(width) + " columns");

  std::string out;
  out.reserve(static_cast<std::size_t>(M.rows()) * (static_cast<std::size_t>(M.cols()) * 26 + 8));
  if (!header.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c) out += ',';
      out += header[c];
    }
    out += '\n';
  }
  char buf[40];
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index c = 0; c < M.cols(); ++c) {
      if (c) out += ',';
      std::snprintf(buf, sizeof(buf), "%.17g", M(i, c));
      out += buf;
    }
    if (labels) {
      if (M.cols() > 0) out += ',';
      out += std::to_string((*labels)[static_cast<std::size_t>(i)]);
    }
    out += '\n';
  }
  write_text_atomic(path, out);
}

// --- min-max scaling --------------------------------------------------------

MinMaxScaler fit_minmax(const Matrix& X) {
  if (X.rows() == 0 || X.cols() == 0)
    throw InputError("fit_minmax: empty matrix");
  MinMaxScaler s;
  s.min = X.colwise().minCoeff().transpose();
  s.range = X.colwise().maxCoeff().transpose() - s.min;
  return s;
}

Matrix apply_minmax(const MinMaxScaler& s, const Matrix& X) {
  if (X.cols() != s.min.size())
    throw InputError("apply_minmax: matrix has " + std::to_string(X.cols()) +
                     " columns, scaler expects " + std::to_string(s.min.size()));
  Matrix out(X.rows(), X.cols());
  for (Index c = 0; c < X.cols(); ++c) {
    const double r = s.range(c);
    for (Index i = 0; i < X.rows(); ++i)
      out(i, c) = r == 0.0 ? 0.0 : (X(i, c) - s.min(c)) / r;
  }
  return out;
}

// --- model persistence --------------------------------------------------------

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& M) {
  json rows = json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Index c = 0; c < M.cols(); ++c) row.push_back(M(i, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, Index rows, Index cols, const char* what) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows)
    throw FormatError(std::string("load_model: ") + what + " must be an array of " +
                      std::to_string(rows) + " rows");
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols)
      throw FormatError(std::string("load_model: ") + what + " row " + std::to_string(i) +
                        " must have " + std::to_string(cols) + " entries");
    for (Index c = 0; c < cols; ++c) {
      const json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number())
        throw FormatError(std::string("load_model: ") + what + " entry (" +
                          std::to_string(i) + ", " + std::to_string(c) +
                          ") is not a number");
      M(i, c) = v.get<double>();
    }
  }
  return M;
}

Vector vector_from_json(const json& j, Index size, const char* what) {
  if (!j.is_array() || static_cast<Index>(j.size()) != size)
    throw FormatError(std::string("load_model: ") + what + " must be an array of " +
                      std::to_string(size) + " numbers");
  Vector v(size);
  for (Index i = 0; i < size; ++i) {
    const json& x = j[static_cast<std::size_t>(i)];
    if (!x.is_number())
      throw FormatError(std::string("load_model: ") + what + " entry " +
                        std::to_string(i) + " is not a number");
    v(i) = x.get<double>();
  }
  return v;
}

double number_field(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number())
    throw FormatError(std::string("load_model: missing numeric field '") + key + "'");
  return j[key].get<double>();
}

}  // namespace

void save_model(const gpr::GprModel& m, const std::string& path) {
  if (m.dims.empty()) throw InputError("save_model: empty model");
  const Matrix& X = *m.dims.front().train_inputs;
  if (!X.allFinite()) throw InputError("save_model: non-finite training inputs");

  json j;
  j["format"] = "oose-gpr-model";
  j["version"] = 1;
  j["train_size"] = X.rows();
  j["input_dim"] = X.cols();
  j["train_inputs"] = matrix_to_json(X);
  json dims = json::array();
  for (const auto& dm : m.dims) {
    if (!dm.A.allFinite() || !dm.w.allFinite() || !std::isfinite(dm.target_offset))
      throw InputError("save_model: non-finite model coefficients");
    json d;
    d["tau"] = dm.params.tau;
    d["noise_var"] = dm.params.noise_var;
    d["target_offset"] = dm.target_offset;
    d["w"] = json::array();
    for (Index i = 0; i < dm.w.size(); ++i) d["w"].push_back(dm.w(i));
    d["A"] = matrix_to_json(dm.A);
    dims.push_back(std::move(d));
  }
  j["dims"] = std::move(dims);
  write_text_atomic(path, j.dump());
}

gpr::GprModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("load_model: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError("load_model: '" + path + "' is not valid JSON: " + e.what());
  }

  if (!j.is_object() || !j.contains("format") || !j["format"].is_string() ||
      j["format"].get<std::string>() != "oose-gpr-model")
    throw FormatError("load_model: '" + path + "' lacks the oose-gpr-model format tag");
  if (!j.contains("version") || !j["version"].is_number_integer() ||
      j["version"].get<int>() != 1)
    throw FormatError("load_model: unsupported model version");

  const Index m = static_cast<Index>(number_field(j, "train_size"));
  const Index n = static_cast<Index>(number_field(j, "input_dim"));
  if (m < 1 || n < 1) throw FormatError("load_model: invalid model shape");
  if (!j.contains("train_inputs"))
    throw FormatError("load_model: missing train_inputs");
  auto shared = std::make_shared<const Matrix>(
      matrix_from_json(j["train_inputs"], m, n, "train_inputs"));

  if (!j.contains("dims") || !j["dims"].is_array() || j["dims"].empty())
    throw FormatError("load_model: missing dims");

  gpr::GprModel model;
  for (const auto& d : j["dims"]) {
    gpr::GprDimModel dm;
    dm.params.tau = number_field(d, "tau");
    dm.params.noise_var = number_field(d, "noise_var");
    if (!(dm.params.tau > 0.0) || !(dm.params.noise_var >= 0.0))
      throw FormatError("load_model: invalid kernel parameters");
    dm.target_offset = number_field(d, "target_offset");
    if (!d.contains("w") || !d.contains("A"))
      throw FormatError("load_model: dim entry missing w or A");
    dm.w = vector_from_json(d["w"], m, "w");
    dm.A = matrix_from_json(d["A"], m, m, "A");
    dm.train_inputs = shared;
    model.dims.push_back(std::move(dm));
  }
  return model;
}

}  // namespace oose
