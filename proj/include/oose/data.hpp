#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oose/gpr.hpp"
#include "oose/types.hpp"

namespace oose {

// --- synthetic generators ------------------------------------------------
//
// All generators: n >= 10 (InputError below), deterministic in (n, seed),
// with shape parameters and additive noise drawn from independent
// substreams so the noiseless surface is unchanged by noise_sd.  Noise is
// isotropic Gaussian, added per coordinate.  manifold_params rows hold the
// intrinsic parameters of each point.

PointCloud make_swiss_roll(Index n, std::uint64_t seed, double noise_sd = 0.0);
PointCloud make_swiss_hole(Index n, std::uint64_t seed, double noise_sd = 0.0);
PointCloud make_corner_planes(Index n, std::uint64_t seed, double noise_sd = 0.0);
PointCloud make_punctured_sphere(Index n, std::uint64_t seed, double noise_sd = 0.0);
PointCloud make_twin_peaks(Index n, std::uint64_t seed, double noise_sd = 0.0);
PointCloud make_clusters_3d(Index n, std::uint64_t seed, double noise_sd = 0.0);
PointCloud make_toroidal_helix(Index n, std::uint64_t seed, double noise_sd = 0.0);

// Dispatch by name ("swiss_roll", "swiss_hole", "corner_planes",
// "punctured_sphere", "twin_peaks", "clusters_3d", "toroidal_helix").
PointCloud make_dataset(const std::string& name, Index n, std::uint64_t seed,
                        double noise_sd = 0.0);
std::vector<std::string> dataset_names();

// Diagonal of the axis-aligned bounding box (used for "1% of bbox" noise).
double bbox_diagonal(const Matrix& X);

// --- CSV -----------------------------------------------------------------

struct CsvOptions {
  // nullopt: auto-detect (first line is a header if any cell fails to parse
  // as a number).
  std::optional<bool> header;
  bool labels = false;  // last column is an integer label
};

// Throws InputError for unreadable/empty files, FormatError for ragged rows
// or non-numeric cells (message carries 1-based row and column).
PointCloud load_csv(const std::string& path, const CsvOptions& opt = {});

// 17 significant digits (lossless round-trip), LF line endings, written to a
// temp file in the same directory then renamed into place.
void save_csv(const Matrix& M, const std::string& path,
              const std::vector<std::string>& header = {},
              const std::vector<int>* labels = nullptr);

// Atomic small-text writer shared by every file-producing code path.
void write_text_atomic(const std::string& path, const std::string& content);

// --- per-axis min-max scaling ---------------------------------------------

struct MinMaxScaler {
  Vector min;    // per input axis
  Vector range;  // max - min, >= 0
};

MinMaxScaler fit_minmax(const Matrix& X);
// (x - min) / range per axis; a zero-range axis maps to 0.  Out-of-range
// inputs extrapolate beyond [0, 1]; nothing is clamped.
Matrix apply_minmax(const MinMaxScaler& s, const Matrix& X);

// --- model persistence -----------------------------------------------------

// JSON, format tag "oose-gpr-model" version 1.  Doubles are serialized with
// shortest-round-trip precision, so a saved model reloads to bit-identical
// predictions.  load_model throws FormatError on anything structurally off
// (tag, version, shapes, non-numeric cells).
void save_model(const gpr::GprModel& m, const std::string& path);
gpr::GprModel load_model(const std::string& path);

}  // namespace oose
