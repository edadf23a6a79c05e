#pragma once

// Rotation-invariant random features for point clouds.
//
// A random function g(x) = sum_{k,l,m} w[l,m,k] Y_l^m(x/|x|) R_k(|x|) is paired
// with a cloud p through the SO(3)-averaged square of <Q p, g>. The average is
// linear in the per-sample tensor
//
//   B[l,m,k1,k2] = sum_{j1,j2} R_k1(r_j1) R_k2(r_j2) 8pi^2/(2l+1)
//                  sum_m' (-1)^(m-m') Y_l^m'(x_j1) Y_l^-m'(x_j2)
//
// so B is computed once per sample and contracted against every function:
//
//   integral = sum_{k1,k2,l,m} w[l,m,k1] w[l,-m,k2] B[l,m,k1,k2],
//   feature  = sin(integral).

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rotsig/so3.hpp"

namespace rotsig {

class PointCloud {
 public:
  PointCloud() = default;
  /// Throws DataError on non-finite coordinates or an empty mass-normalised cloud.
  explicit PointCloud(std::vector<Eigen::Vector3d> points, bool normalize_mass = false);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const std::vector<Eigen::Vector3d>& points() const { return points_; }
  bool normalize_mass() const { return normalize_mass_; }
  /// Weight carried by each point of the data function: 1/N or 1.
  double mass_weight() const { return normalize_mass_ ? 1.0 / static_cast<double>(points_.size()) : 1.0; }

  PointCloud transformed(const Eigen::Matrix3d& rotation) const;

 private:
  std::vector<Eigen::Vector3d> points_;
  bool normalize_mass_ = false;
};

class LabeledPointCloud {
 public:
  LabeledPointCloud() = default;
  LabeledPointCloud(std::vector<Eigen::Vector3d> points, std::vector<int> charges);

  std::size_t size() const { return points_.size(); }
  const std::vector<Eigen::Vector3d>& points() const { return points_; }
  const std::vector<int>& charges() const { return charges_; }

  LabeledPointCloud transformed(const Eigen::Matrix3d& rotation) const;

 private:
  std::vector<Eigen::Vector3d> points_;
  std::vector<int> charges_;
};

struct Gaussian {
  double center = 0.0;
  double width = 1.0;  // standard deviation

  friend bool operator==(const Gaussian&, const Gaussian&) = default;
};

class RadialBasis {
 public:
  RadialBasis() = default;
  explicit RadialBasis(std::vector<Gaussian> gaussians);

  /// Two Gaussians centred at 1 with full widths at half maximum 2 and 4.
  static RadialBasis qm7();
  /// Three Gaussians centred at 0, 0.5 and 1 with width 0.75.
  static RadialBasis modelnet();
  static RadialBasis preset(std::string_view name);
  static double fwhm_to_sigma(double fwhm);

  /// Copy with every width multiplied by `factor`.
  RadialBasis scaled(double factor) const;

  int size() const { return static_cast<int>(gaussians_.size()); }
  const std::vector<Gaussian>& gaussians() const { return gaussians_; }

  friend bool operator==(const RadialBasis&, const RadialBasis&) = default;

 private:
  std::vector<Gaussian> gaussians_;
};

Eigen::VectorXd radial_eval(const RadialBasis& basis, double r);

struct FeatureConfig {
  int band_limit = 5;
  RadialBasis radial = RadialBasis::qm7();
  double weight_sigma = 2.0;
  int n_features = 2000;
  std::uint64_t seed = 0;
  bool normalize_mass = false;

  /// Throws ConfigError when a bound is violated.
  void validate() const;
  /// Entries per random function: (L+1)^2 * K.
  int weights_per_function() const { return lm_count(band_limit) * radial.size(); }

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

/// Counter-based splitmix64 stream feeding a Box-Muller transform.
///
/// Entry (j, l, m, k) has flat position c = (j (L+1)^2 + l^2 + l + m) K + k and
/// equals sigma * sqrt(-2 ln u1) cos(2 pi u2), where u1 = (s[2c] >> 11 + 1) 2^-53,
/// u2 = (s[2c+1] >> 11) 2^-53 and s[i] is the i-th splitmix64 output for the seed.
inline constexpr std::string_view kRngAlgorithm = "splitmix64-boxmuller-v1";

class RandomFunctionSet {
 public:
  using WeightMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  RandomFunctionSet(FeatureConfig config, WeightMatrix weights);

  const FeatureConfig& config() const { return config_; }
  int size() const { return static_cast<int>(weights_.rows()); }
  const WeightMatrix& weights() const { return weights_; }
  /// Weights of function j, laid out as (lm_index(l, m) * K + k).
  Eigen::Ref<const Eigen::VectorXd> function(int j) const { return weights_.row(j).transpose(); }
  double operator()(int j, int l, int m, int k) const {
    return weights_(j, lm_index(l, m) * config_.radial.size() + k);
  }

 private:
  FeatureConfig config_;
  WeightMatrix weights_;
};

RandomFunctionSet sample_random_weights(const FeatureConfig& config);

class BTensor {
 public:
  BTensor(int band_limit, int n_radial);

  int band_limit() const { return band_limit_; }
  int n_radial() const { return n_radial_; }
  double& operator()(int l, int m, int k1, int k2) { return entries_[index(l, m, k1, k2)]; }
  double operator()(int l, int m, int k1, int k2) const { return entries_[index(l, m, k1, k2)]; }
  const Eigen::VectorXd& entries() const { return entries_; }
  /// Largest |imaginary part| dropped by the real cast.
  double max_imag() const { return max_imag_; }
  void set_max_imag(double v) { max_imag_ = v; }

  BTensor& operator+=(const BTensor& other);

 private:
  Eigen::Index index(int l, int m, int k1, int k2) const {
    return (static_cast<Eigen::Index>(lm_index(l, m)) * n_radial_ + k1) * n_radial_ + k2;
  }

  int band_limit_;
  int n_radial_;
  Eigen::VectorXd entries_;
  double max_imag_ = 0.0;
};

/// Throws DataError naming the offending point for zero-norm or non-finite input,
/// and NumericalError if an entry keeps a non-negligible imaginary part.
BTensor b_tensor(const PointCloud& cloud, const RadialBasis& basis, int band_limit);

double invariant_integral(const BTensor& b, const Eigen::Ref<const Eigen::VectorXd>& weights);

double feature(const PointCloud& cloud, const Eigen::Ref<const Eigen::VectorXd>& weights,
               const RadialBasis& basis, int band_limit);

struct ColumnMeta {
  int function = 0;
  std::optional<std::pair<int, int>> charges;

  friend bool operator==(const ColumnMeta&, const ColumnMeta&) = default;
};

struct FeatureMatrix {
  Eigen::MatrixXd values;
  std::vector<ColumnMeta> columns;
  std::vector<std::string> row_ids;
};

/// n x D matrix of sin(invariant_integral); one B tensor per row. Rows are
/// computed independently (threads <= 0 resolves via resolve_threads). A
/// failing sample aborts the whole call with a DataError naming its row.
FeatureMatrix feature_matrix(std::span<const PointCloud> samples, const RandomFunctionSet& rfs,
                             int threads = 1);

/// Counters for points dropped from centred clouds.
struct EncodingStats {
  std::size_t dropped_points = 0;
};

/// Column layout of element-encoded rows: blocks (c1, c2) in vocabulary order,
/// j-major inside each block.
std::vector<ColumnMeta> element_columns(int n_functions, std::span<const int> vocab);

/// The charge-c2 atoms re-centred on atom `center`, the centre itself excluded
/// and any point closer than 1e-10 to it dropped (counted in stats).
PointCloud centered_cloud(const LabeledPointCloud& mol, std::size_t center, int charge, bool normalize_mass,
                          EncodingStats* stats = nullptr);

/// Row of length D |vocab|^2: entry (c1, c2, j) sums, over atoms h of charge c1,
/// the feature of the charge-c2 cloud centred on h.
Eigen::RowVectorXd element_encoded_features(const LabeledPointCloud& mol, const RandomFunctionSet& rfs,
                                            std::span<const int> vocab, EncodingStats* stats = nullptr);

FeatureMatrix element_feature_matrix(std::span<const LabeledPointCloud> molecules, const RandomFunctionSet& rfs,
                                     std::span<const int> vocab, int threads = 1, EncodingStats* stats = nullptr);

/// Element-encoded B basis: per (c1, c2) block, the B tensors of the centred
/// clouds summed over centres of charge c1, flattened and concatenated.
Eigen::RowVectorXd element_encoded_b(const LabeledPointCloud& mol, const RadialBasis& basis, int band_limit,
                                     std::span<const int> vocab, bool normalize_mass = false);

}  // namespace rotsig
