#pragma once

// Per-path loops that dominate the solvers. Each kernel comes in a plain
// serial form (the reference) and an OpenMP form. The OpenMP form sums
// fixed blocks of paths and then adds the block partials in order, so its
// result does not depend on the thread count.

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "robmot/divergence.hpp"

namespace robmot::kernels {

inline constexpr std::size_t kBlock = 64;  // paths per reduction block

struct UtilityMoments {
    double value = 0.0;
    Eigen::VectorXd grad;  // F^T (p * U')
    Eigen::MatrixXd hess;  // F^T diag(p * U'') F
    bool finite = true;
};

/// E_p[U(base + F z)] with derivatives in z. Paths with p = 0 are skipped.
struct UtilityInput {
    const UtilitySpec* util;
    std::span<const double> prior;
    std::span<const double> base;
    const Eigen::MatrixXd* features;  // paths x dim
};

struct PerspectiveTerms {
    double value = 0.0;             // sum_p p phi_B*(p, nu/p), +inf off the domain
    std::vector<double> weight_grad;  // per path phi*(y) - y phi*'(y), y = nu/p
    std::vector<double> slope;        // per path phi*'(y) - B
};

namespace serial {
double weighted_sum(std::span<const double> w, std::span<const double> v);
UtilityMoments utility_moments(const UtilityInput& in, const Eigen::VectorXd& z, bool derivs);
PerspectiveTerms perspective(const IntegrandSpec& spec, std::span<const double> nu, std::span<const double> p,
                             bool derivs);
}  // namespace serial

namespace parallel {
double weighted_sum(std::span<const double> w, std::span<const double> v);
UtilityMoments utility_moments(const UtilityInput& in, const Eigen::VectorXd& z, bool derivs);
PerspectiveTerms perspective(const IntegrandSpec& spec, std::span<const double> nu, std::span<const double> p,
                             bool derivs);
}  // namespace parallel

/// Threads the OpenMP kernels will use (1 when built without OpenMP).
int max_threads();

}  // namespace robmot::kernels
