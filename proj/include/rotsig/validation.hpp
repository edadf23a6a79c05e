#pragma once

// Self-checks run by `rotsig validate`. Each check reports a measured residual
// against a pinned tolerance.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rotsig/so3.hpp"

namespace rotsig {

struct CheckResult {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

enum class ValidationLevel { fast, full };

ValidationLevel validation_level_from_string(const std::string& name);

using WignerFn = std::function<ComplexMatrix<double>(int, const EulerAngles<double>&)>;

/// wigner_D with every odd (m' - m) entry negated; a test hook for the suites.
WignerFn wigner_with_sign_fault();

struct ValidationOptions {
  ValidationLevel level = ValidationLevel::fast;
  std::uint64_t seed = 20240101;
  WignerFn wigner;  // defaults to wigner_D
  int threads = 1;
};

/// max |Y_m(R v) - sum_m' Y_m'(v) D[m, m'](angles)| over random (v, angles), l <= band_limit.
CheckResult check_rotation_rule(int band_limit, int trials, std::uint64_t seed, const WignerFn& wigner);
/// Max |feature(Q p) - feature(p)| over random clouds and rotations.
CheckResult check_rotation_invariance(int clouds, int rotations, std::uint64_t seed, int threads);
/// Closed-form integral vs. SO(3) quadrature, max |a - q| / max(|q|, 1).
CheckResult check_quadrature_oracle(int cases, std::uint64_t seed);
/// All pairs of D^l_{m,k} with l <= max_l against the analytic orthogonality relation.
CheckResult check_wigner_orthogonality(int max_l, const WignerFn& wigner);
/// B entries against (-1)^m 2 pi sum R_k1 R_k2 P_l(cos angle).
CheckResult check_addition_theorem(int clouds, std::uint64_t seed);
CheckResult check_lsqr_vs_svd(std::uint64_t seed);
CheckResult check_pcr_full_rank(std::uint64_t seed);
CheckResult check_logistic_gradient(int instances, std::uint64_t seed);

std::vector<CheckResult> run_validation(const ValidationOptions& options);

}  // namespace rotsig
