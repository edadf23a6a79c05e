#pragma once

// Brute-force integration over SO(3) with the un-normalised Haar measure
// dQ = sin(beta) dalpha dbeta dgamma (total mass 8 pi^2).
//
// Nodes are uniform in alpha and gamma and Gauss-Legendre in cos(beta). A grid
// of resolution (n_a, n_b, n_g) integrates D^l1_{m1,k1} D^l2_{m2,k2} exactly when
// n_a, n_g >= l1 + l2 + 1 and n_b >= (l1 + l2)/2 + 1. The squared pairing of a
// band-limit-L random function is of this form with l1 + l2 <= 2L:
//
//   L    minimal (n_a, n_b, n_g)
//   0    (1, 1, 1)
//   1    (3, 2, 3)
//   2    (5, 3, 5)
//   4    (9, 5, 9)
//   L    (2L+1, L+1, 2L+1)

#include <Eigen/Dense>

#include <complex>
#include <vector>

#include "rotsig/features.hpp"
#include "rotsig/so3.hpp"

namespace rotsig {

struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1].
GaussLegendreRule gauss_legendre(int n);

struct SO3Node {
  EulerAngles<double> angles;
  double weight = 0.0;
};

struct SO3Resolution {
  int n_alpha = 1;
  int n_beta = 1;
  int n_gamma = 1;
};

/// Smallest grid that integrates the square of a band-limit-L random function exactly.
SO3Resolution minimal_resolution(int band_limit);

class SO3Grid {
 public:
  SO3Grid(std::vector<SO3Node> nodes, SO3Resolution resolution)
      : nodes_(std::move(nodes)), resolution_(resolution) {}

  const std::vector<SO3Node>& nodes() const { return nodes_; }
  SO3Resolution resolution() const { return resolution_; }
  double total_weight() const;

 private:
  std::vector<SO3Node> nodes_;
  SO3Resolution resolution_;
};

SO3Grid so3_grid(int n_alpha, int n_beta, int n_gamma);

/// g(x) = sum_{k,l,m} w[l,m,k] Y_l^m(x/|x|) R_k(|x|). Throws DataError at x = 0.
std::complex<double> eval_random_function(const Eigen::Ref<const Eigen::VectorXd>& weights, const Eigen::Vector3d& x,
                                          const RadialBasis& basis, int band_limit);

/// Sum over grid nodes of weight * (sum_j m_j g(R x_j))^2, real part taken at the end.
/// Throws ConfigError if the grid is coarser than minimal_resolution(band_limit).
double integral_by_quadrature(const PointCloud& cloud, const Eigen::Ref<const Eigen::VectorXd>& weights,
                              const RadialBasis& basis, int band_limit, const SO3Grid& grid);

struct WignerIndex {
  int l = 0;
  int m = 0;
  int k = 0;
};

/// Quadrature value of the integral of D^l1_{m1,k1}(Q) D^l2_{m2,k2}(Q) over SO(3).
std::complex<double> wigner_product_integral(WignerIndex a, WignerIndex b, const SO3Grid& grid);

/// (-1)^(m1-k1) 8 pi^2/(2 l1 + 1) when (l2, m2, k2) = (l1, -m1, -k1), zero otherwise.
double wigner_product_analytic(WignerIndex a, WignerIndex b);

double wigner_orthogonality_residual(WignerIndex a, WignerIndex b, const SO3Grid& grid);

}  // namespace rotsig
