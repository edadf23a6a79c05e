#include "rotsig/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace rotsig {

namespace {

// Neumaier-compensated running sum; summation order is the caller's loop order.
template <typename T>
class CompensatedSum {
 public:
  void add(T value) {
    const T t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
      carry_ += (sum_ - t) + value;
    } else {
      carry_ += (value - t) + sum_;
    }
    sum_ = t;
  }
  T value() const { return sum_ + carry_; }

 private:
  T sum_{};
  T carry_{};
};

class ComplexCompensatedSum {
 public:
  void add(std::complex<double> v) {
    re_.add(v.real());
    im_.add(v.imag());
  }
  std::complex<double> value() const { return {re_.value(), im_.value()}; }

 private:
  CompensatedSum<double> re_;
  CompensatedSum<double> im_;
};

}  // namespace

GaussLegendreRule gauss_legendre(int n) {
  if (n < 1) throw ConfigError("Gauss-Legendre rule needs at least one node");
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton iteration from the Tricomi initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

SO3Resolution minimal_resolution(int band_limit) {
  return {2 * band_limit + 1, band_limit + 1, 2 * band_limit + 1};
}

double SO3Grid::total_weight() const {
  CompensatedSum<double> s;
  for (const auto& node : nodes_) s.add(node.weight);
  return s.value();
}

SO3Grid so3_grid(int n_alpha, int n_beta, int n_gamma) {
  if (n_alpha < 1 || n_beta < 1 || n_gamma < 1) throw ConfigError("SO(3) grid counts must be >= 1");
  const GaussLegendreRule gl = gauss_legendre(n_beta);
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<SO3Node> nodes;
  nodes.reserve(static_cast<std::size_t>(n_alpha) * n_beta * n_gamma);
  for (int a = 0; a < n_alpha; ++a) {
    const double alpha = two_pi * a / n_alpha;
    for (int b = 0; b < n_beta; ++b) {
      const double beta = std::acos(std::clamp(gl.nodes[b], -1.0, 1.0));
      for (int c = 0; c < n_gamma; ++c) {
        const double gamma = two_pi * c / n_gamma;
        const double w = (two_pi / n_alpha) * (two_pi / n_gamma) * gl.weights[b];
        nodes.push_back({EulerAngles<double>(alpha, beta, gamma), w});
      }
    }
  }
  return SO3Grid(std::move(nodes), {n_alpha, n_beta, n_gamma});
}

std::complex<double> eval_random_function(const Eigen::Ref<const Eigen::VectorXd>& weights, const Eigen::Vector3d& x,
                                          const RadialBasis& basis, int band_limit) {
  const int K = basis.size();
  if (weights.size() != static_cast<Eigen::Index>(lm_count(band_limit)) * K) {
    throw DataError("random function weights do not match (L, K)");
  }
  const double r = x.norm();
  if (!(r > 0.0)) throw DataError("random function evaluated at the origin");
  const auto table = sph_harm_table(UnitVector<double>(x), band_limit);
  const Eigen::VectorXd radial = radial_eval(basis, r);
  std::complex<double> g = 0.0;
  for (int l = 0; l <= band_limit; ++l) {
    for (int m = -l; m <= l; ++m) {
      double w_radial = 0.0;
      for (int k = 0; k < K; ++k) w_radial += weights[lm_index(l, m) * K + k] * radial[k];
      g += w_radial * table(l, m);
    }
  }
  return g;
}

double integral_by_quadrature(const PointCloud& cloud, const Eigen::Ref<const Eigen::VectorXd>& weights,
                              const RadialBasis& basis, int band_limit, const SO3Grid& grid) {
  const SO3Resolution need = minimal_resolution(band_limit);
  const SO3Resolution have = grid.resolution();
  if (have.n_alpha < need.n_alpha || have.n_beta < need.n_beta || have.n_gamma < need.n_gamma) {
    throw ConfigError("SO(3) grid too coarse for band limit " + std::to_string(band_limit));
  }
  if (cloud.empty()) return 0.0;
  const double mass = cloud.mass_weight();
  ComplexCompensatedSum total;
  for (const auto& node : grid.nodes()) {
    const Eigen::Matrix3d rot = rotation_from_euler(node.angles);
    std::complex<double> pairing = 0.0;
    for (const auto& x : cloud.points()) pairing += mass * eval_random_function(weights, rot * x, basis, band_limit);
    total.add(node.weight * pairing * pairing);
  }
  return total.value().real();
}

std::complex<double> wigner_product_integral(WignerIndex a, WignerIndex b, const SO3Grid& grid) {
  ComplexCompensatedSum total;
  for (const auto& node : grid.nodes()) {
    const auto da = wigner_D(a.l, node.angles);
    const auto db = wigner_D(b.l, node.angles);
    total.add(node.weight * da(a.m, a.k) * db(b.m, b.k));
  }
  return total.value();
}

double wigner_product_analytic(WignerIndex a, WignerIndex b) {
  if (a.l != b.l || b.m != -a.m || b.k != -a.k) return 0.0;
  const double sign = ((a.m - a.k) % 2 == 0) ? 1.0 : -1.0;
  return sign * 8.0 * std::numbers::pi * std::numbers::pi / (2 * a.l + 1);
}

double wigner_orthogonality_residual(WignerIndex a, WignerIndex b, const SO3Grid& grid) {
  return std::abs(wigner_product_integral(a, b, grid) - wigner_product_analytic(a, b));
}

}  // namespace rotsig
