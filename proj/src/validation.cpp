#include "rotsig/validation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "rotsig/error.hpp"
#include "rotsig/features.hpp"
#include "rotsig/quadrature.hpp"
#include "rotsig/solvers.hpp"

namespace rotsig {

namespace {

constexpr double kPi = std::numbers::pi;

EulerAngles<double> random_angles(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> turn(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> z(-1.0, 1.0);
  const double a = turn(rng);
  const double b = std::acos(z(rng));
  const double c = turn(rng);
  return {a < 2.0 * kPi ? a : 0.0, b, c < 2.0 * kPi ? c : 0.0};
}

std::vector<Eigen::Vector3d> random_points(std::mt19937_64& rng, int n, double r_min, double r_max) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> radius(r_min, r_max);
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < n; ++i) {
    Eigen::Vector3d v(normal(rng), normal(rng), normal(rng));
    pts.push_back(v.normalized() * radius(rng));
  }
  return pts;
}

CheckResult finish(std::string name, double residual, double tolerance, std::string detail = {}) {
  return {std::move(name), residual, tolerance, std::isfinite(residual) && residual <= tolerance, std::move(detail)};
}

}  // namespace

ValidationLevel validation_level_from_string(const std::string& name) {
  if (name == "fast") return ValidationLevel::fast;
  if (name == "full") return ValidationLevel::full;
  throw ConfigError("unknown validation level '" + name + "'");
}

WignerFn wigner_with_sign_fault() {
  return [](int l, const EulerAngles<double>& angles) {
    ComplexMatrix<double> d = wigner_D(l, angles).matrix();
    for (int i = 0; i < d.rows(); ++i) {
      for (int j = 0; j < d.cols(); ++j) {
        if ((i - j) % 2 != 0) d(i, j) = -d(i, j);
      }
    }
    return d;
  };
}

CheckResult check_rotation_rule(int band_limit, int trials, std::uint64_t seed, const WignerFn& wigner) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto angles = random_angles(rng);
    const Eigen::Vector3d v = random_points(rng, 1, 1.0, 1.0).front();
    const Eigen::Vector3d rv = rotation_from_euler(angles) * v;
    const auto y = sph_harm_table(UnitVector<double>(v), band_limit);
    const auto yr = sph_harm_table(UnitVector<double>(rv), band_limit);
    for (int l = 0; l <= band_limit; ++l) {
      const ComplexMatrix<double> D = wigner(l, angles);
      for (int m = -l; m <= l; ++m) {
        std::complex<double> s = 0.0;
        for (int mp = -l; mp <= l; ++mp) s += y(l, mp) * D(m + l, mp + l);
        worst = std::max(worst, std::abs(yr(l, m) - s));
      }
    }
  }
  return finish("rotation_rule", worst, 1e-9, "L=" + std::to_string(band_limit) + " trials=" + std::to_string(trials));
}

CheckResult check_rotation_invariance(int clouds, int rotations, std::uint64_t seed, int threads) {
  std::mt19937_64 rng(seed);
  FeatureConfig config;
  config.n_features = 16;
  config.seed = seed;
  const RandomFunctionSet rfs = sample_random_weights(config);
  std::uniform_int_distribution<int> size(1, 12);
  std::vector<PointCloud> samples;
  for (int c = 0; c < clouds; ++c) {
    const PointCloud base(random_points(rng, size(rng), 0.3, 2.0));
    samples.push_back(base);
    for (int r = 0; r < rotations; ++r) samples.push_back(base.transformed(rotation_from_euler(random_angles(rng))));
  }
  const FeatureMatrix fm = feature_matrix(samples, rfs, threads);
  double worst = 0.0;
  for (int c = 0; c < clouds; ++c) {
    const Eigen::Index base = static_cast<Eigen::Index>(c) * (rotations + 1);
    for (int r = 1; r <= rotations; ++r) {
      worst = std::max(worst, (fm.values.row(base + r) - fm.values.row(base)).cwiseAbs().maxCoeff());
    }
  }
  return finish("rotation_invariance", worst, 1e-9,
                std::to_string(clouds) + " clouds x " + std::to_string(rotations) + " rotations, D=16");
}

CheckResult check_quadrature_oracle(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> band(0, 4);
  std::uniform_int_distribution<int> size(1, 5);
  double worst = 0.0;
  for (int c = 0; c < cases; ++c) {
    FeatureConfig config;
    config.band_limit = band(rng);
    config.n_features = 1;
    config.weight_sigma = 1.0;
    config.seed = rng();
    const RandomFunctionSet rfs = sample_random_weights(config);
    const PointCloud cloud(random_points(rng, size(rng), 0.3, 2.0));
    const double closed = invariant_integral(b_tensor(cloud, config.radial, config.band_limit), rfs.function(0));
    const auto res = minimal_resolution(config.band_limit);
    const double quad =
        integral_by_quadrature(cloud, rfs.function(0), config.radial, config.band_limit,
                               so3_grid(res.n_alpha, res.n_beta, res.n_gamma));
    worst = std::max(worst, std::abs(closed - quad) / std::max(std::abs(quad), 1.0));
  }
  return finish("quadrature_oracle", worst, 1e-6, std::to_string(cases) + " random (cloud, function) pairs, L<=4, K=2");
}

CheckResult check_wigner_orthogonality(int max_l, const WignerFn& wigner) {
  const SO3Grid grid = so3_grid(std::max(16, 4 * max_l + 1), std::max(12, 2 * max_l + 1), std::max(16, 4 * max_l + 1));
  std::vector<WignerIndex> index;
  for (int l = 0; l <= max_l; ++l) {
    for (int m = -l; m <= l; ++m) {
      for (int k = -l; k <= l; ++k) index.push_back({l, m, k});
    }
  }
  const auto n_idx = static_cast<Eigen::Index>(index.size());
  const auto n_nodes = static_cast<Eigen::Index>(grid.nodes().size());
  Eigen::MatrixXcd values(n_idx, n_nodes);
  Eigen::VectorXd weights(n_nodes);
  for (Eigen::Index q = 0; q < n_nodes; ++q) {
    const auto& node = grid.nodes()[q];
    weights[q] = node.weight;
    Eigen::Index row = 0;
    for (int l = 0; l <= max_l; ++l) {
      const ComplexMatrix<double> D = wigner(l, node.angles);
      for (int m = -l; m <= l; ++m) {
        for (int k = -l; k <= l; ++k) values(row++, q) = D(m + l, k + l);
      }
    }
  }
  const Eigen::MatrixXcd gram = values * weights.asDiagonal() * values.transpose();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n_idx; ++i) {
    for (Eigen::Index j = 0; j < n_idx; ++j) {
      worst = std::max(worst, std::abs(gram(i, j) - wigner_product_analytic(index[i], index[j])));
    }
  }
  return finish("wigner_orthogonality", worst, 1e-8,
                std::to_string(n_idx * n_idx) + " index pairs, l<=" + std::to_string(max_l));
}

CheckResult check_addition_theorem(int clouds, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> size(1, 8);
  const RadialBasis basis = RadialBasis::qm7();
  const int L = 5;
  double worst = 0.0;
  for (int c = 0; c < clouds; ++c) {
    const PointCloud cloud(random_points(rng, size(rng), 0.3, 2.0));
    const BTensor b = b_tensor(cloud, basis, L);
    for (int l = 0; l <= L; ++l) {
      for (int k1 = 0; k1 < basis.size(); ++k1) {
        for (int k2 = 0; k2 < basis.size(); ++k2) {
          double s = 0.0;
          for (const auto& x1 : cloud.points()) {
            for (const auto& x2 : cloud.points()) {
              s += radial_eval(basis, x1.norm())[k1] * radial_eval(basis, x2.norm())[k2] *
                   legendre(l, x1.normalized().dot(x2.normalized()));
            }
          }
          for (int m = -l; m <= l; ++m) {
            const double expected = (m % 2 == 0 ? 1.0 : -1.0) * 2.0 * kPi * s;
            worst = std::max(worst, std::abs(b(l, m, k1, k2) - expected));
          }
        }
      }
    }
  }
  return finish("addition_theorem", worst, 1e-10, std::to_string(clouds) + " clouds, L=5, K=2");
}

CheckResult check_lsqr_vs_svd(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd a(200, 500);
  Eigen::VectorXd y(200);
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = normal(rng);
  }
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = normal(rng);
  const double lambda = 1e-3;
  const RidgeProblem problem{a, y, {lambda}};
  const auto exact = ridge_svd(problem).front();
  const auto iterative = ridge_lsqr(problem, lambda, 1e-10, 20000);
  const double diff = (exact.beta - iterative.beta).cwiseAbs().maxCoeff();
  return finish("lsqr_vs_svd", diff, 1e-4,
                "200x500, lambda=1e-3, " + std::to_string(iterative.diagnostics.iterations) + " iterations (" +
                    iterative.diagnostics.stop_reason + ")");
}

CheckResult check_pcr_full_rank(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd a(40, 25);
  Eigen::VectorXd y(40);
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = normal(rng);
  }
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = normal(rng);
  const RidgeProblem problem{a, y, {1e-6, 1e-2, 1.0}};
  const auto exact = ridge_svd(problem);
  const auto pcr = ridge_pcr(problem, 25);
  double worst = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    worst = std::max(worst, (exact[i].beta - pcr[i].beta).cwiseAbs().maxCoeff());
  }
  return finish("pcr_full_rank", worst, 1e-9, "40x25, three lambdas");
}

CheckResult check_logistic_gradient(int instances, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> rows(2, 50);
  std::uniform_int_distribution<int> cols(1, 10);
  std::bernoulli_distribution coin;
  double worst = 0.0;
  for (int t = 0; t < instances; ++t) {
    const int n = rows(rng);
    const int d = cols(rng);
    Eigen::MatrixXd x(n, d);
    Eigen::VectorXd target(n);
    Eigen::VectorXd w(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) x(i, j) = normal(rng);
    }
    for (Eigen::Index i = 0; i < n; ++i) target[i] = coin(rng) ? 1.0 : 0.0;
    for (Eigen::Index j = 0; j < d; ++j) w[j] = normal(rng);
    const double b = normal(rng);
    const double lambda = 0.1;
    Eigen::VectorXd grad_w;
    double grad_b = 0.0;
    logistic_objective(x, target, w, b, lambda, &grad_w, &grad_b);

    Eigen::VectorXd analytic(d + 1);
    analytic << grad_w, grad_b;
    Eigen::VectorXd numeric(d + 1);
    const double h = 1e-5;
    for (int j = 0; j <= d; ++j) {
      Eigen::VectorXd wp = w;
      Eigen::VectorXd wm = w;
      double bp = b;
      double bm = b;
      if (j < d) {
        wp[j] += h;
        wm[j] -= h;
      } else {
        bp += h;
        bm -= h;
      }
      numeric[j] =
          (logistic_objective(x, target, wp, bp, lambda) - logistic_objective(x, target, wm, bm, lambda)) / (2 * h);
    }
    worst = std::max(worst, (analytic - numeric).norm() / std::max(analytic.norm(), 1e-12));
  }
  return finish("logistic_gradient", worst, 1e-6, std::to_string(instances) + " instances, central differences");
}

std::vector<CheckResult> run_validation(const ValidationOptions& options) {
  const WignerFn wigner = options.wigner ? options.wigner : WignerFn([](int l, const EulerAngles<double>& a) {
    return wigner_D(l, a).matrix();
  });
  const bool full = options.level == ValidationLevel::full;
  const std::uint64_t s = options.seed;
  std::vector<CheckResult> out;
  out.push_back(check_rotation_rule(full ? 8 : 5, full ? 50 : 10, s, wigner));
  out.push_back(check_wigner_orthogonality(4, wigner));
  out.push_back(check_addition_theorem(full ? 50 : 10, s + 1));
  out.push_back(check_quadrature_oracle(full ? 20 : 4, s + 2));
  out.push_back(check_rotation_invariance(full ? 100 : 10, full ? 5 : 2, s + 3, options.threads));
  out.push_back(check_pcr_full_rank(s + 4));
  out.push_back(check_logistic_gradient(10, s + 5));
  if (full) out.push_back(check_lsqr_vs_svd(s + 6));
  return out;
}

}  // namespace rotsig
