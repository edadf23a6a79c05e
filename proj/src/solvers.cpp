#include "rotsig/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>

#include "rotsig/error.hpp"

namespace rotsig {

namespace {

void fill_diagnostics(const RidgeProblem& p, RidgeSolution& s) {
  const double rhs_norm = (p.features.transpose() * p.targets).norm();
  s.diagnostics.residual_norm = (p.features * s.beta - p.targets).norm();
  s.diagnostics.normal_residual = normal_equation_residual(p.features, p.targets, s.beta, s.lambda);
  s.diagnostics.relative_normal_residual = rhs_norm > 0.0 ? s.diagnostics.normal_residual / rhs_norm : 0.0;
}

std::vector<RidgeSolution> solve_from_svd(const RidgeProblem& problem, const Eigen::BDCSVD<Eigen::MatrixXd>& svd,
                                          Eigen::Index rank, SolverKind kind) {
  const Eigen::VectorXd& s = svd.singularValues();
  const Eigen::VectorXd uty = svd.matrixU().leftCols(rank).transpose() * problem.targets;
  const double cutoff = s.size() > 0 ? s[0] * std::numeric_limits<double>::epsilon() *
                                           static_cast<double>(std::max(problem.features.rows(), problem.features.cols()))
                                     : 0.0;
  std::vector<RidgeSolution> out;
  out.reserve(problem.lambdas.size());
  for (double lambda : problem.lambdas) {
    Eigen::VectorXd coef(rank);
    for (Eigen::Index i = 0; i < rank; ++i) {
      const double si = s[i];
      const double denom = si * si + lambda;
      coef[i] = (denom > 0.0 && !(lambda == 0.0 && si <= cutoff)) ? si / denom * uty[i] : 0.0;
    }
    RidgeSolution sol;
    sol.lambda = lambda;
    sol.solver = kind;
    sol.beta = svd.matrixV().leftCols(rank) * coef;
    sol.diagnostics.stop_reason = "direct";
    fill_diagnostics(problem, sol);
    out.push_back(std::move(sol));
  }
  return out;
}

Eigen::BDCSVD<Eigen::MatrixXd> thin_svd(const RidgeProblem& problem) {
  if (std::min(problem.features.rows(), problem.features.cols()) > kSvdCap) {
    throw ConfigError("problem too large for the dense SVD solver (min(n, d) > " + std::to_string(kSvdCap) +
                      "); use lsqr");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(problem.features, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalError("SVD of the feature matrix failed");
  return svd;
}

double stable_log1p_exp(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct BinaryFit {
  Eigen::VectorXd w;
  double b = 0.0;
  int iterations = 0;
  bool converged = false;
};

// L-BFGS on the parameter vector (w, b).
BinaryFit fit_binary(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::VectorXd& t, double lambda, int max_iter,
                     double tol) {
  const Eigen::Index d = x.cols();
  constexpr int kHistory = 10;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1);

  auto evaluate = [&](const Eigen::VectorXd& th, Eigen::VectorXd& grad) {
    Eigen::VectorXd gw;
    double gb = 0.0;
    const double f = logistic_objective(x, t, th.head(d), th[d], lambda, &gw, &gb);
    grad.resize(d + 1);
    grad.head(d) = gw;
    grad[d] = gb;
    return f;
  };

  Eigen::VectorXd grad;
  double f = evaluate(theta, grad);
  std::deque<Eigen::VectorXd> s_hist;
  std::deque<Eigen::VectorXd> y_hist;
  BinaryFit fit;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    if (grad.norm() <= tol) {
      fit.converged = true;
      break;
    }
    // Two-loop recursion.
    Eigen::VectorXd q = grad;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = s_hist[i].dot(q) / y_hist[i].dot(s_hist[i]);
      q -= alpha[i] * y_hist[i];
    }
    if (!s_hist.empty()) {
      q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    } else {
      q /= std::max(1.0, grad.norm());
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = y_hist[i].dot(q) / y_hist[i].dot(s_hist[i]);
      q += (alpha[i] - beta) * s_hist[i];
    }
    Eigen::VectorXd direction = -q;
    double slope = grad.dot(direction);
    if (slope >= 0.0) {
      direction = -grad;
      slope = -grad.squaredNorm();
      s_hist.clear();
      y_hist.clear();
    }

    double step = 1.0;
    Eigen::VectorXd next;
    Eigen::VectorXd next_grad;
    double next_f = f;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      next = theta + step * direction;
      next_f = evaluate(next, next_grad);
      if (std::isfinite(next_f) && next_f <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    Eigen::VectorXd s = next - theta;
    Eigen::VectorXd y = next_grad - grad;
    if (y.dot(s) > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      if (static_cast<int>(s_hist.size()) > kHistory) {
        s_hist.pop_front();
        y_hist.pop_front();
      }
    }
    theta = std::move(next);
    grad = std::move(next_grad);
    f = next_f;
  }
  if (!fit.converged && grad.norm() <= tol) fit.converged = true;
  fit.w = theta.head(d);
  fit.b = theta[d];
  fit.iterations = iter;
  return fit;
}

}  // namespace

void RidgeProblem::validate() const {
  if (features.rows() < 1 || features.cols() < 1) throw DataError("ridge problem needs n >= 1 and d >= 1");
  if (targets.size() != features.rows()) throw DataError("target length does not match feature rows");
  if (!features.allFinite() || !targets.allFinite()) throw DataError("ridge problem has non-finite entries");
  for (double l : lambdas) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError("regularisation must be finite and >= 0");
  }
}

std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::svd:
      return "svd";
    case SolverKind::lsqr:
      return "lsqr";
    case SolverKind::pcr:
      return "pcr";
  }
  return "unknown";
}

SolverKind solver_from_string(const std::string& name) {
  if (name == "svd") return SolverKind::svd;
  if (name == "lsqr") return SolverKind::lsqr;
  if (name == "pcr") return SolverKind::pcr;
  throw ConfigError("unknown solver '" + name + "'");
}

double normal_equation_residual(const Eigen::Ref<const Eigen::MatrixXd>& a, const Eigen::Ref<const Eigen::VectorXd>& y,
                                const Eigen::Ref<const Eigen::VectorXd>& beta, double lambda) {
  return (a.transpose() * (a * beta - y) + lambda * beta).norm();
}

std::vector<RidgeSolution> ridge_svd(const RidgeProblem& problem) {
  problem.validate();
  const auto svd = thin_svd(problem);
  return solve_from_svd(problem, svd, svd.singularValues().size(), SolverKind::svd);
}

std::vector<RidgeSolution> ridge_pcr(const RidgeProblem& problem, Eigen::Index rank) {
  problem.validate();
  const Eigen::Index full = std::min(problem.features.rows(), problem.features.cols());
  if (rank < 1 || rank > full) {
    throw ConfigError("PCR rank " + std::to_string(rank) + " outside [1, " + std::to_string(full) + "]");
  }
  const auto svd = thin_svd(problem);
  return solve_from_svd(problem, svd, rank, SolverKind::pcr);
}

RidgeSolution ridge_lsqr(const RidgeProblem& problem, double lambda, double tol, int max_iter) {
  problem.validate();
  if (!(lambda >= 0.0)) throw ConfigError("regularisation must be >= 0");
  if (!(tol > 0.0)) throw ConfigError("LSQR tolerance must be > 0");
  const auto& a = problem.features;
  const auto& b = problem.targets;
  const double damp = std::sqrt(lambda);
  const double eps = std::numeric_limits<double>::epsilon();
  const double ctol = 1e-14;

  RidgeSolution sol;
  sol.lambda = lambda;
  sol.solver = SolverKind::lsqr;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(a.cols());

  Eigen::VectorXd u = b;
  double beta = u.norm();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(a.cols());
  double alpha = 0.0;
  if (beta > 0.0) {
    u /= beta;
    v = a.transpose() * u;
    alpha = v.norm();
  }
  if (alpha > 0.0) v /= alpha;
  Eigen::VectorXd w = v;

  double phibar = beta;
  double rhobar = alpha;
  double anorm = 0.0;
  double ddnorm = 0.0;
  double res2 = 0.0;
  double xnorm = 0.0;
  double xxnorm = 0.0;
  double z = 0.0;
  double cs2 = -1.0;
  double sn2 = 0.0;
  const double bnorm = beta;

  sol.diagnostics.converged = false;
  sol.diagnostics.stop_reason = "iteration limit";
  if (alpha * beta == 0.0) {
    sol.diagnostics.converged = true;
    sol.diagnostics.stop_reason = "zero right-hand side";
  }

  int itn = 0;
  while (!sol.diagnostics.converged && itn < max_iter) {
    ++itn;
    u = a * v - alpha * u;
    beta = u.norm();
    if (beta > 0.0) {
      u /= beta;
      anorm = std::sqrt(anorm * anorm + alpha * alpha + beta * beta + damp * damp);
      v = a.transpose() * u - beta * v;
      alpha = v.norm();
      if (alpha > 0.0) v /= alpha;
    }

    double rhobar1 = rhobar;
    double psi = 0.0;
    if (damp > 0.0) {
      rhobar1 = std::hypot(rhobar, damp);
      const double cs1 = rhobar / rhobar1;
      const double sn1 = damp / rhobar1;
      psi = sn1 * phibar;
      phibar = cs1 * phibar;
    }

    const double rho = std::hypot(rhobar1, beta);
    const double cs = rhobar1 / rho;
    const double sn = beta / rho;
    const double theta = sn * alpha;
    rhobar = -cs * alpha;
    const double phi = cs * phibar;
    phibar = sn * phibar;
    const double tau = sn * phi;

    const double t1 = phi / rho;
    const double t2 = -theta / rho;
    ddnorm += (w / rho).squaredNorm();
    x += t1 * w;
    w = v + t2 * w;

    const double delta = sn2 * rho;
    const double gambar = -cs2 * rho;
    const double rhs = phi - delta * z;
    const double zbar = rhs / gambar;
    xnorm = std::sqrt(xxnorm + zbar * zbar);
    const double gamma = std::hypot(gambar, theta);
    cs2 = gambar / gamma;
    sn2 = theta / gamma;
    z = rhs / gamma;
    xxnorm += z * z;

    const double acond = anorm * std::sqrt(ddnorm);
    res2 += psi * psi;
    const double rnorm = std::sqrt(phibar * phibar + res2);
    const double arnorm = alpha * std::abs(tau);

    const double test1 = rnorm / bnorm;
    const double test2 = arnorm / (anorm * rnorm + eps);
    const double test3 = 1.0 / (acond + eps);
    const double rtol = tol + tol * anorm * xnorm / bnorm;

    if (test3 <= ctol) {
      sol.diagnostics.stop_reason = "condition limit";
      sol.diagnostics.converged = true;
    } else if (test2 <= tol) {
      sol.diagnostics.stop_reason = "least-squares optimality";
      sol.diagnostics.converged = true;
    } else if (test1 <= rtol) {
      sol.diagnostics.stop_reason = "residual small";
      sol.diagnostics.converged = true;
    }
  }
  sol.diagnostics.iterations = itn;
  sol.beta = std::move(x);
  fill_diagnostics(problem, sol);
  return sol;
}

std::vector<RidgeSolution> linear_b_baseline(const Eigen::Ref<const Eigen::MatrixXd>& b_rows,
                                             const Eigen::Ref<const Eigen::VectorXd>& targets,
                                             const std::vector<double>& lambdas) {
  return ridge_svd(RidgeProblem{b_rows, targets, lambdas});
}

Eigen::VectorXd predict_regression(const Eigen::Ref<const Eigen::VectorXd>& beta,
                                   const Eigen::Ref<const Eigen::MatrixXd>& features, double offset) {
  if (features.cols() != beta.size()) {
    throw DataError("feature width " + std::to_string(features.cols()) + " does not match model width " +
                    std::to_string(beta.size()));
  }
  Eigen::VectorXd out = features * beta;
  out.array() += offset;
  return out;
}

double logistic_objective(const Eigen::Ref<const Eigen::MatrixXd>& features,
                          const Eigen::Ref<const Eigen::VectorXd>& targets, const Eigen::Ref<const Eigen::VectorXd>& w,
                          double b, double lambda, Eigen::VectorXd* grad_w, double* grad_b) {
  const Eigen::VectorXd z = (features * w).array() + b;
  double loss = lambda * w.squaredNorm();
  Eigen::VectorXd residual(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    // BCE(sigmoid(z), t) = log(1 + e^z) - t z
    loss += stable_log1p_exp(z[i]) - targets[i] * z[i];
    residual[i] = sigmoid(z[i]) - targets[i];
  }
  if (grad_w) *grad_w = features.transpose() * residual + 2.0 * lambda * w;
  if (grad_b) *grad_b = residual.sum();
  return loss;
}

ClassifierWeights logistic_ovr_train(const Eigen::Ref<const Eigen::MatrixXd>& features, std::span<const int> labels,
                                     double lambda, int max_iter, double tol) {
  if (static_cast<Eigen::Index>(labels.size()) != features.rows()) throw DataError("label count does not match rows");
  if (!features.allFinite()) throw DataError("feature matrix has non-finite entries");
  if (!(lambda >= 0.0)) throw ConfigError("regularisation must be >= 0");
  const std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) throw DataError("classification needs at least two distinct labels");

  ClassifierWeights model;
  model.lambda = lambda;
  model.labels.assign(distinct.begin(), distinct.end());
  const auto C = static_cast<Eigen::Index>(model.labels.size());
  model.weights.resize(C, features.cols());
  model.intercepts.resize(C);
  for (Eigen::Index c = 0; c < C; ++c) {
    Eigen::VectorXd t(features.rows());
    for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = labels[i] == model.labels[c] ? 1.0 : 0.0;
    const BinaryFit fit = fit_binary(features, t, lambda, max_iter, tol);
    model.weights.row(c) = fit.w.transpose();
    model.intercepts[c] = fit.b;
    model.iterations.push_back(fit.iterations);
    model.converged.push_back(fit.converged);
  }
  return model;
}

Eigen::MatrixXd classify_scores(const ClassifierWeights& model, const Eigen::Ref<const Eigen::MatrixXd>& features) {
  if (features.cols() != model.weights.cols()) {
    throw DataError("feature width " + std::to_string(features.cols()) + " does not match model width " +
                    std::to_string(model.weights.cols()));
  }
  Eigen::MatrixXd scores = features * model.weights.transpose();
  scores.rowwise() += model.intercepts.transpose();
  return scores;
}

std::vector<int> predict_classify(const ClassifierWeights& model, const Eigen::Ref<const Eigen::MatrixXd>& features) {
  const Eigen::MatrixXd scores = classify_scores(model, features);
  std::vector<int> out(scores.rows());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < scores.cols(); ++c) {
      if (scores(i, c) > scores(i, best)) best = c;
    }
    out[i] = model.labels[best];
  }
  return out;
}

}  // namespace rotsig
