#include "rotsig/features.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include "rotsig/parallel.hpp"

namespace rotsig {

namespace {

constexpr double kZeroNorm = 1e-10;
constexpr double kImagTolerance = 1e-10;

std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t position) {
  std::uint64_t z = seed + (position + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double standard_normal_at(std::uint64_t seed, std::uint64_t counter) {
  constexpr double kInv53 = 1.0 / 9007199254740992.0;
  const double u1 = static_cast<double>((splitmix64_at(seed, 2 * counter) >> 11) + 1) * kInv53;
  const double u2 = static_cast<double>(splitmix64_at(seed, 2 * counter + 1) >> 11) * kInv53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t vocab_position(std::span<const int> vocab, int charge) {
  const auto it = std::find(vocab.begin(), vocab.end(), charge);
  if (it == vocab.end()) throw DataError("charge " + std::to_string(charge) + " not in vocabulary");
  return static_cast<std::size_t>(it - vocab.begin());
}

}  // namespace

PointCloud::PointCloud(std::vector<Eigen::Vector3d> points, bool normalize_mass)
    : points_(std::move(points)), normalize_mass_(normalize_mass) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!points_[i].allFinite()) throw DataError("point " + std::to_string(i) + " has a non-finite coordinate");
  }
  if (normalize_mass_ && points_.empty()) throw DataError("mass-normalised cloud must have at least one point");
}

PointCloud PointCloud::transformed(const Eigen::Matrix3d& rotation) const {
  std::vector<Eigen::Vector3d> out;
  out.reserve(points_.size());
  for (const auto& p : points_) out.emplace_back(rotation * p);
  return PointCloud(std::move(out), normalize_mass_);
}

LabeledPointCloud::LabeledPointCloud(std::vector<Eigen::Vector3d> points, std::vector<int> charges)
    : points_(std::move(points)), charges_(std::move(charges)) {
  if (points_.size() != charges_.size()) throw DataError("charges and points differ in length");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!points_[i].allFinite()) throw DataError("atom " + std::to_string(i) + " has a non-finite coordinate");
  }
}

LabeledPointCloud LabeledPointCloud::transformed(const Eigen::Matrix3d& rotation) const {
  std::vector<Eigen::Vector3d> out;
  out.reserve(points_.size());
  for (const auto& p : points_) out.emplace_back(rotation * p);
  return LabeledPointCloud(std::move(out), charges_);
}

RadialBasis::RadialBasis(std::vector<Gaussian> gaussians) : gaussians_(std::move(gaussians)) {
  if (gaussians_.empty()) throw ConfigError("radial basis needs at least one function");
  for (const auto& g : gaussians_) {
    if (!(g.width > 0.0) || !std::isfinite(g.width) || !std::isfinite(g.center)) {
      throw ConfigError("radial widths must be finite and positive");
    }
  }
}

double RadialBasis::fwhm_to_sigma(double fwhm) { return fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0))); }

RadialBasis RadialBasis::qm7() { return RadialBasis({{1.0, fwhm_to_sigma(2.0)}, {1.0, fwhm_to_sigma(4.0)}}); }

RadialBasis RadialBasis::modelnet() { return RadialBasis({{0.0, 0.75}, {0.5, 0.75}, {1.0, 0.75}}); }

RadialBasis RadialBasis::preset(std::string_view name) {
  if (name == "qm7") return qm7();
  if (name == "modelnet") return modelnet();
  throw ConfigError("unknown radial preset '" + std::string(name) + "'");
}

RadialBasis RadialBasis::scaled(double factor) const {
  auto out = gaussians_;
  for (auto& g : out) g.width *= factor;
  return RadialBasis(std::move(out));
}

Eigen::VectorXd radial_eval(const RadialBasis& basis, double r) {
  Eigen::VectorXd out(basis.size());
  for (int k = 0; k < basis.size(); ++k) {
    const auto& g = basis.gaussians()[k];
    const double t = r - g.center;
    out[k] = std::exp(-t * t / (2.0 * g.width * g.width));
  }
  return out;
}

void FeatureConfig::validate() const {
  check_band_limit(band_limit);
  if (radial.size() < 1) throw ConfigError("radial basis is empty");
  if (!(weight_sigma >= 0.0) || !std::isfinite(weight_sigma)) throw ConfigError("weight sigma must be >= 0");
  if (n_features < 1) throw ConfigError("need at least one random feature");
}

RandomFunctionSet::RandomFunctionSet(FeatureConfig config, WeightMatrix weights)
    : config_(std::move(config)), weights_(std::move(weights)) {
  if (weights_.cols() != config_.weights_per_function() || weights_.rows() != config_.n_features) {
    throw DataError("random weight array does not match its configuration");
  }
}

RandomFunctionSet sample_random_weights(const FeatureConfig& config) {
  config.validate();
  const Eigen::Index per = config.weights_per_function();
  RandomFunctionSet::WeightMatrix w(config.n_features, per);
  for (Eigen::Index j = 0; j < w.rows(); ++j) {
    for (Eigen::Index c = 0; c < per; ++c) {
      const auto counter = static_cast<std::uint64_t>(j * per + c);
      w(j, c) = config.weight_sigma * standard_normal_at(config.seed, counter);
    }
  }
  return RandomFunctionSet(config, std::move(w));
}

BTensor::BTensor(int band_limit, int n_radial)
    : band_limit_(band_limit),
      n_radial_(n_radial),
      entries_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lm_count(band_limit)) * n_radial * n_radial)) {}

BTensor& BTensor::operator+=(const BTensor& other) {
  if (other.band_limit_ != band_limit_ || other.n_radial_ != n_radial_) throw DataError("B tensor shape mismatch");
  entries_ += other.entries_;
  max_imag_ = std::max(max_imag_, other.max_imag_);
  return *this;
}

BTensor b_tensor(const PointCloud& cloud, const RadialBasis& basis, int band_limit) {
  check_band_limit(band_limit);
  const int K = basis.size();
  BTensor out(band_limit, K);
  const auto n = static_cast<Eigen::Index>(cloud.size());
  if (n == 0) return out;

  // Per-point harmonics and radial weights (mass weight folded into R).
  // Points are visited in lexicographic order so that the floating-point
  // summation, and hence the result, does not depend on input order.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto& pts = cloud.points();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::lexicographical_compare(pts[a].data(), pts[a].data() + 3, pts[b].data(), pts[b].data() + 3);
  });

  std::vector<SphHarmTable<double>> tables;
  tables.reserve(n);
  Eigen::MatrixXd radial(n, K);
  const double mass = cloud.mass_weight();
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Vector3d& x = pts[order[j]];
    if (!x.allFinite()) throw DataError("point " + std::to_string(order[j]) + " has a non-finite coordinate");
    const double r = x.norm();
    if (r < kZeroNorm) throw DataError("point " + std::to_string(order[j]) + " has zero norm");
    tables.push_back(sph_harm_table(UnitVector<double>(x), band_limit));
    radial.row(j) = mass * radial_eval(basis, r).transpose();
  }
  const Eigen::MatrixXcd radial_c = radial.cast<std::complex<double>>();

  double max_imag = 0.0;
  for (int l = 0; l <= band_limit; ++l) {
    const int width = 2 * l + 1;
    // left(j, m') = Y_l^m'(x_j); right(j, m') = (-1)^m' Y_l^-m'(x_j).
    Eigen::MatrixXcd left(n, width);
    Eigen::MatrixXcd right(n, width);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (int mp = -l; mp <= l; ++mp) {
        left(j, mp + l) = tables[j](l, mp);
        const double sign = (mp % 2 == 0) ? 1.0 : -1.0;
        right(j, mp + l) = sign * tables[j](l, -mp);
      }
    }
    // Pair sum over (j1, j2): pair(j1, j2) = sum_m' (-1)^m' Y^m'(x_j1) Y^-m'(x_j2).
    const Eigen::MatrixXcd pair = left * right.transpose();
    const Eigen::MatrixXcd core = radial_c.transpose() * pair * radial_c;
    // |B| <= 2 pi (sum_j |R_k(r_j)|)^2, so the imaginary check is relative to that bound.
    const double scale = radial.cwiseAbs().colwise().sum().maxCoeff();
    const double tol = kImagTolerance * std::max(1.0, 2.0 * std::numbers::pi * scale * scale);

    const double factor = 8.0 * std::numbers::pi * std::numbers::pi / width;
    for (int k1 = 0; k1 < K; ++k1) {
      for (int k2 = 0; k2 < K; ++k2) {
        const std::complex<double> v = factor * core(k1, k2);
        const double imag = std::abs(v.imag());
        max_imag = std::max(max_imag, imag);
        if (imag > tol) {
          throw NumericalError("B tensor entry at l=" + std::to_string(l) + " has imaginary part " +
                               std::to_string(imag));
        }
        for (int m = -l; m <= l; ++m) {
          out(l, m, k1, k2) = (m % 2 == 0) ? v.real() : -v.real();
        }
      }
    }
  }
  out.set_max_imag(max_imag);
  return out;
}

double invariant_integral(const BTensor& b, const Eigen::Ref<const Eigen::VectorXd>& weights) {
  const int K = b.n_radial();
  const int L = b.band_limit();
  if (weights.size() != static_cast<Eigen::Index>(lm_count(L)) * K) {
    throw DataError("weights of length " + std::to_string(weights.size()) + " do not match B tensor (L=" +
                    std::to_string(L) + ", K=" + std::to_string(K) + ")");
  }
  double total = 0.0;
  for (int l = 0; l <= L; ++l) {
    for (int m = -l; m <= l; ++m) {
      const double* w1 = weights.data() + static_cast<Eigen::Index>(lm_index(l, m)) * K;
      const double* w2 = weights.data() + static_cast<Eigen::Index>(lm_index(l, -m)) * K;
      for (int k1 = 0; k1 < K; ++k1) {
        double row = 0.0;
        for (int k2 = 0; k2 < K; ++k2) row += w2[k2] * b(l, m, k1, k2);
        total += w1[k1] * row;
      }
    }
  }
  return total;
}

double feature(const PointCloud& cloud, const Eigen::Ref<const Eigen::VectorXd>& weights,
               const RadialBasis& basis, int band_limit) {
  return std::sin(invariant_integral(b_tensor(cloud, basis, band_limit), weights));
}

FeatureMatrix feature_matrix(std::span<const PointCloud> samples, const RandomFunctionSet& rfs, int threads) {
  const auto& cfg = rfs.config();
  const auto n = static_cast<Eigen::Index>(samples.size());
  const int D = rfs.size();
  FeatureMatrix out;
  out.values.resize(n, D);
  out.columns.reserve(D);
  for (int j = 0; j < D; ++j) out.columns.push_back({j, std::nullopt});
  for (Eigen::Index i = 0; i < n; ++i) out.row_ids.push_back(std::to_string(i));

  parallel_for(samples.size(), threads, [&](std::size_t i) {
    try {
      const BTensor b = b_tensor(samples[i], cfg.radial, cfg.band_limit);
      for (int j = 0; j < D; ++j) out.values(static_cast<Eigen::Index>(i), j) = std::sin(invariant_integral(b, rfs.function(j)));
    } catch (const std::exception& e) {
      throw DataError("sample " + std::to_string(i) + ": " + e.what());
    }
  });
  return out;
}

std::vector<ColumnMeta> element_columns(int n_functions, std::span<const int> vocab) {
  std::vector<ColumnMeta> cols;
  cols.reserve(static_cast<std::size_t>(n_functions) * vocab.size() * vocab.size());
  for (int c1 : vocab) {
    for (int c2 : vocab) {
      for (int j = 0; j < n_functions; ++j) cols.push_back({j, std::make_pair(c1, c2)});
    }
  }
  return cols;
}

PointCloud centered_cloud(const LabeledPointCloud& mol, std::size_t center, int charge, bool normalize_mass,
                          EncodingStats* stats) {
  std::vector<Eigen::Vector3d> pts;
  const Eigen::Vector3d origin = mol.points()[center];
  for (std::size_t a = 0; a < mol.size(); ++a) {
    if (a == center || mol.charges()[a] != charge) continue;
    Eigen::Vector3d x = mol.points()[a] - origin;
    if (x.norm() < kZeroNorm) {
      if (stats) ++stats->dropped_points;
      continue;
    }
    pts.push_back(x);
  }
  const bool normalize = normalize_mass && !pts.empty();
  return PointCloud(std::move(pts), normalize);
}

Eigen::RowVectorXd element_encoded_features(const LabeledPointCloud& mol, const RandomFunctionSet& rfs,
                                            std::span<const int> vocab, EncodingStats* stats) {
  const auto& cfg = rfs.config();
  const int D = rfs.size();
  const auto V = static_cast<Eigen::Index>(vocab.size());
  for (int c : mol.charges()) vocab_position(vocab, c);

  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(V * V * D);
  for (std::size_t h = 0; h < mol.size(); ++h) {
    const auto i1 = static_cast<Eigen::Index>(vocab_position(vocab, mol.charges()[h]));
    for (Eigen::Index i2 = 0; i2 < V; ++i2) {
      const PointCloud cloud = centered_cloud(mol, h, vocab[i2], cfg.normalize_mass, stats);
      // An empty neighbour cloud has B = 0 and contributes sin(0) = 0.
      if (cloud.empty()) continue;
      const BTensor b = b_tensor(cloud, cfg.radial, cfg.band_limit);
      const Eigen::Index offset = (i1 * V + i2) * D;
      for (int j = 0; j < D; ++j) row[offset + j] += std::sin(invariant_integral(b, rfs.function(j)));
    }
  }
  return row;
}

FeatureMatrix element_feature_matrix(std::span<const LabeledPointCloud> molecules, const RandomFunctionSet& rfs,
                                     std::span<const int> vocab, int threads, EncodingStats* stats) {
  const int D = rfs.size();
  const auto n = static_cast<Eigen::Index>(molecules.size());
  const auto width = static_cast<Eigen::Index>(vocab.size() * vocab.size()) * D;
  FeatureMatrix out;
  out.values.resize(n, width);
  out.columns = element_columns(D, vocab);
  for (Eigen::Index i = 0; i < n; ++i) out.row_ids.push_back(std::to_string(i));

  std::atomic<std::size_t> dropped{0};
  parallel_for(molecules.size(), threads, [&](std::size_t i) {
    try {
      EncodingStats local;
      out.values.row(static_cast<Eigen::Index>(i)) = element_encoded_features(molecules[i], rfs, vocab, &local);
      dropped += local.dropped_points;
    } catch (const std::exception& e) {
      throw DataError("sample " + std::to_string(i) + ": " + e.what());
    }
  });
  if (stats) stats->dropped_points += dropped.load();
  return out;
}

Eigen::RowVectorXd element_encoded_b(const LabeledPointCloud& mol, const RadialBasis& basis, int band_limit,
                                     std::span<const int> vocab, bool normalize_mass) {
  const auto V = static_cast<Eigen::Index>(vocab.size());
  const Eigen::Index block = static_cast<Eigen::Index>(lm_count(band_limit)) * basis.size() * basis.size();
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(V * V * block);
  for (std::size_t h = 0; h < mol.size(); ++h) {
    const auto i1 = static_cast<Eigen::Index>(vocab_position(vocab, mol.charges()[h]));
    for (Eigen::Index i2 = 0; i2 < V; ++i2) {
      const PointCloud cloud = centered_cloud(mol, h, vocab[i2], normalize_mass);
      if (cloud.empty()) continue;
      row.segment((i1 * V + i2) * block, block) += b_tensor(cloud, basis, band_limit).entries().transpose();
    }
  }
  return row;
}

}  // namespace rotsig
