#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "rotsig/so3.hpp"

namespace testing {

inline constexpr double kPi = std::numbers::pi;

inline rotsig::EulerAngles<double> random_angles(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> turn(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> z(-1.0, 1.0);
  return {std::fmod(turn(rng), 2.0 * kPi), std::acos(z(rng)), std::fmod(turn(rng), 2.0 * kPi)};
}

inline Eigen::Vector3d random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Eigen::Vector3d(n(rng), n(rng), n(rng)).normalized();
}

/// Uniform in the cube [-half, half]^3, rejecting points closer than 0.1 to the origin.
inline std::vector<Eigen::Vector3d> random_cloud(std::mt19937_64& rng, int n, double half = 2.0) {
  std::uniform_real_distribution<double> u(-half, half);
  std::vector<Eigen::Vector3d> pts;
  while (static_cast<int>(pts.size()) < n) {
    Eigen::Vector3d v(u(rng), u(rng), u(rng));
    if (v.norm() > 0.1) pts.push_back(v);
  }
  return pts;
}

/// Rotation from a normalised Gaussian quaternion; independent of the Euler code.
inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  return q.normalized().toRotationMatrix();
}

/// Gauss-Legendre nodes and weights by Golub-Welsch.
inline void golub_welsch(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    j(k, k - 1) = b;
    j(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  nodes = es.eigenvalues();
  weights = 2.0 * es.eigenvectors().row(0).transpose().array().square();
}

}  // namespace testing
