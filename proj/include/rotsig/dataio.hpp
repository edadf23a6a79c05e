#pragma once

// Dataset readers/writers, train/val/test splits and model bundles.
//
// Extended XYZ, one block per molecule:
//   <atom count>
//   key=value ...            (energy=<eV> required, id=<name> optional)
//   <Element> <x> <y> <z>    (count lines; extra columns ignored)
//
// Point clouds, one block per shape:
//   <id> <class> <N>
//   <x> <y> <z>              (N lines)
//
// Blank lines between blocks are ignored. Numbers are written with 17
// significant digits.

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rotsig/features.hpp"
#include "rotsig/solvers.hpp"

namespace rotsig {

struct MoleculeRecord {
  std::string id;
  std::vector<int> charges;
  std::vector<Eigen::Vector3d> coordinates;
  double target = 0.0;

  LabeledPointCloud cloud() const { return {coordinates, charges}; }
};

struct ShapeRecord {
  std::string id;
  std::vector<Eigen::Vector3d> points;
  int label = 0;

  PointCloud cloud(bool normalize_mass = false) const { return PointCloud(points, normalize_mass); }
};

/// Atomic number of an element symbol (H..Og, case-sensitive) or of a decimal
/// charge string. Returns 0 when unknown.
int element_charge(std::string_view symbol);
std::string element_symbol(int charge);

std::vector<MoleculeRecord> read_xyz(std::istream& in);
std::vector<MoleculeRecord> read_xyz_dataset(const std::filesystem::path& path);
void write_xyz(std::ostream& out, std::span<const MoleculeRecord> records);
void write_xyz_dataset(const std::filesystem::path& path, std::span<const MoleculeRecord> records);

/// Sorted distinct charges over all records.
std::vector<int> charge_vocabulary(std::span<const MoleculeRecord> records);

/// target -= sum of per-atom reference energies. Throws DataError for a charge
/// missing from the table.
void subtract_reference_energies(std::vector<MoleculeRecord>& records, const std::map<int, double>& references);

/// Translate to the centroid and scale so the farthest point has norm 1.
void normalize_to_unit_ball(ShapeRecord& shape);

std::vector<ShapeRecord> read_pointclouds(std::istream& in, bool normalize = false);
std::vector<ShapeRecord> read_pointcloud_dataset(const std::filesystem::path& path, bool normalize = false);
void write_pointclouds(std::ostream& out, std::span<const ShapeRecord> records);
void write_pointcloud_dataset(const std::filesystem::path& path, std::span<const ShapeRecord> records);

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

/// Parses "a,b,c". Throws ConfigError unless all are >= 0 and sum to 1 within 1e-12.
SplitFractions parse_split(std::string_view text);

struct SplitSpec {
  std::uint64_t seed = 0;
  SplitFractions fractions;
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Seeded Fisher-Yates permutation of 0..n-1 cut into contiguous parts of
/// sizes round(n f_train), round(n f_val) and the remainder.
SplitSpec make_split(std::size_t n, SplitFractions fractions, std::uint64_t seed);

inline constexpr int kBundleVersion = 1;
inline constexpr std::string_view kBundleFormat = "rotsig-bundle";

struct ModelBundle {
  int version = kBundleVersion;
  FeatureConfig config;
  std::string rng_algorithm{kRngAlgorithm};
  std::string task = "regression";  // or "classification"
  std::string data_format = "xyz";  // input layout the model was trained on
  std::vector<int> vocab;           // non-empty for element-encoded molecules
  bool normalize_shapes = false;    // unit-ball scaling applied to point clouds
  std::string solver = "svd";
  double lambda = 0.0;
  Eigen::VectorXd beta;             // regression
  ClassifierWeights classifier;     // classification
  double target_mean = 0.0;
  std::map<std::string, std::string> notes;

  friend bool operator==(const ModelBundle& a, const ModelBundle& b);
};

/// JSON document. Arrays are base64 little-endian float64 with a CRC-32 each;
/// the CRC-32 of the regenerated random weights is stored too.
void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle);
/// Throws DataError on a format/version mismatch, a checksum failure or a
/// random-weight regeneration mismatch.
ModelBundle load_bundle(const std::filesystem::path& path);

std::string encode_f64(std::span<const double> values);
std::vector<double> decode_f64(std::string_view base64);
std::uint32_t crc32_of(std::span<const double> values);

/// CSV: "id,c0,c1,..." then one row per sample. Column metadata goes to
/// `<path>.columns.csv` as "column,function,charge1,charge2".
void write_feature_matrix(const std::filesystem::path& path, const FeatureMatrix& fm);

std::string format_double(double v);

}  // namespace rotsig
