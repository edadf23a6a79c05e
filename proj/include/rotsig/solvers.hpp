#pragma once

// Linear heads on feature matrices: ridge regression (exact SVD, damped LSQR,
// truncated-SVD principal components) and one-vs-rest L2 logistic regression.

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace rotsig {

/// SVD solves are refused when min(n, d) exceeds this.
inline constexpr Eigen::Index kSvdCap = 8192;

struct RidgeProblem {
  Eigen::Ref<const Eigen::MatrixXd> features;
  Eigen::Ref<const Eigen::VectorXd> targets;
  std::vector<double> lambdas;

  /// Throws DataError on empty, mismatched or non-finite data and ConfigError on negative lambdas.
  void validate() const;
};

enum class SolverKind { svd, lsqr, pcr };

std::string to_string(SolverKind kind);
SolverKind solver_from_string(const std::string& name);

struct RidgeDiagnostics {
  int iterations = 0;
  bool converged = true;
  std::string stop_reason;
  double residual_norm = 0.0;    // |Phi beta - y|
  double normal_residual = 0.0;  // |(Phi^T Phi + lambda I) beta - Phi^T y|
  double relative_normal_residual = 0.0;  // normal_residual / |Phi^T y|
};

struct RidgeSolution {
  double lambda = 0.0;
  Eigen::VectorXd beta;
  SolverKind solver = SolverKind::svd;
  RidgeDiagnostics diagnostics;
};

/// |(A^T A + lambda I) beta - A^T y|, evaluated without forming A^T A.
double normal_equation_residual(const Eigen::Ref<const Eigen::MatrixXd>& a, const Eigen::Ref<const Eigen::VectorXd>& y,
                                const Eigen::Ref<const Eigen::VectorXd>& beta, double lambda);

/// beta = V (S^2 + lambda)^-1 S U^T y for every lambda from one thin SVD.
/// Singular values below n eps s_max are treated as zero when lambda = 0.
std::vector<RidgeSolution> ridge_svd(const RidgeProblem& problem);

/// Paige-Saunders LSQR on min |A beta - y|^2 + lambda |beta|^2 (damping sqrt(lambda)).
/// Non-convergence within max_iter is reported in the diagnostics, not thrown.
RidgeSolution ridge_lsqr(const RidgeProblem& problem, double lambda, double tol, int max_iter);

/// Principal-components ridge: the SVD formula restricted to the top `rank` triplets.
std::vector<RidgeSolution> ridge_pcr(const RidgeProblem& problem, Eigen::Index rank);

/// Ridge on flattened B-basis rows; identical to ridge_svd on that matrix.
std::vector<RidgeSolution> linear_b_baseline(const Eigen::Ref<const Eigen::MatrixXd>& b_rows,
                                             const Eigen::Ref<const Eigen::VectorXd>& targets,
                                             const std::vector<double>& lambdas);

/// features * beta + offset. Throws DataError on a width mismatch.
Eigen::VectorXd predict_regression(const Eigen::Ref<const Eigen::VectorXd>& beta,
                                   const Eigen::Ref<const Eigen::MatrixXd>& features, double offset = 0.0);

struct ClassifierWeights {
  Eigen::MatrixXd weights;     // C x d, one row per class
  Eigen::VectorXd intercepts;  // C
  double lambda = 0.0;
  std::vector<int> labels;     // class label of each row, ascending
  std::vector<int> iterations;
  std::vector<bool> converged;
};

/// Sum over rows of binary cross entropy of sigmoid(phi w + b) against targets in
/// {0, 1}, plus lambda |w|^2. The intercept is not regularised. Gradients are
/// written when the pointers are non-null.
double logistic_objective(const Eigen::Ref<const Eigen::MatrixXd>& features,
                          const Eigen::Ref<const Eigen::VectorXd>& targets, const Eigen::Ref<const Eigen::VectorXd>& w,
                          double b, double lambda, Eigen::VectorXd* grad_w = nullptr, double* grad_b = nullptr);

/// One-vs-rest training with L-BFGS and backtracking line search; each class
/// stops when the gradient norm falls to `tol` or after max_iter iterations.
ClassifierWeights logistic_ovr_train(const Eigen::Ref<const Eigen::MatrixXd>& features, std::span<const int> labels,
                                     double lambda, int max_iter = 500, double tol = 1e-6);

/// n x C matrix of per-class scores phi w_c + b_c.
Eigen::MatrixXd classify_scores(const ClassifierWeights& model, const Eigen::Ref<const Eigen::MatrixXd>& features);

/// Label of the highest-scoring class per row; ties go to the lowest class index.
std::vector<int> predict_classify(const ClassifierWeights& model, const Eigen::Ref<const Eigen::MatrixXd>& features);

}  // namespace rotsig
