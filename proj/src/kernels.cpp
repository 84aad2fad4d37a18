#include "robmot/kernels.hpp"

#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace robmot::kernels {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Term {
    double value;
    double weight_grad;
    double slope;
};

inline Term perspective_term(const IntegrandSpec& spec, std::size_t path, double nu, double p, bool derivs) {
    const double b = spec.shift_at(path);
    if (p <= 0.0) {
        if (nu != 0.0) return {kInf, 0.0, 0.0};
        return {0.0, derivs ? spec.conj(0.0) : 0.0, -b};
    }
    const double y = nu / p;
    const double c = spec.conj(y);
    if (!std::isfinite(c)) return {kInf, 0.0, 0.0};
    Term t{p * c - nu * b, 0.0, 0.0};
    if (derivs) {
        const double ys = spec.nonnegative_domain() ? std::max(y, 1e-300) : y;
        const double d = spec.dconj(ys);
        t.weight_grad = y == 0.0 ? c : c - y * d;
        t.slope = d - b;
    }
    return t;
}

inline std::size_t block_count(std::size_t n) { return (n + kBlock - 1) / kBlock; }

}  // namespace

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

// ------------------------------------------------------------------ serial

namespace serial {

double weighted_sum(std::span<const double> w, std::span<const double> v) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * v[i];
    return s;
}

UtilityMoments utility_moments(const UtilityInput& in, const Eigen::VectorXd& z, bool derivs) {
    const Eigen::MatrixXd& F = *in.features;
    const std::size_t n = in.prior.size();
    const Eigen::Index dim = F.cols();
    UtilityMoments m;
    if (derivs) {
        m.grad = Eigen::VectorXd::Zero(dim);
        m.hess = Eigen::MatrixXd::Zero(dim, dim);
    }
    for (std::size_t p = 0; p < n; ++p) {
        const double w = in.prior[p];
        if (w == 0.0) continue;
        const double x = in.base[p] + F.row(static_cast<Eigen::Index>(p)).dot(z);
        double u, du, d2u;
        in.util->eval_U(x, u, du, d2u);
        m.value += w * u;
        if (derivs) {
            const auto row = F.row(static_cast<Eigen::Index>(p));
            m.grad += (w * du) * row.transpose();
            m.hess += (w * d2u) * row.transpose() * row;
        }
    }
    m.finite = std::isfinite(m.value) && (!derivs || (m.grad.allFinite() && m.hess.allFinite()));
    return m;
}

PerspectiveTerms perspective(const IntegrandSpec& spec, std::span<const double> nu, std::span<const double> p,
                             bool derivs) {
    PerspectiveTerms out;
    const std::size_t n = nu.size();
    if (derivs) {
        out.weight_grad.assign(n, 0.0);
        out.slope.assign(n, 0.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Term t = perspective_term(spec, i, nu[i], p[i], derivs);
        out.value += t.value;
        if (derivs) {
            out.weight_grad[i] = t.weight_grad;
            out.slope[i] = t.slope;
        }
    }
    return out;
}

}  // namespace serial

// ---------------------------------------------------------------- parallel

namespace parallel {

double weighted_sum(std::span<const double> w, std::span<const double> v) {
    const std::size_t n = w.size();
    const std::size_t nb = block_count(n);
    std::vector<double> partial(nb, 0.0);
#pragma omp parallel for schedule(static)
    for (std::size_t b = 0; b < nb; ++b) {
        double s = 0.0;
        const std::size_t end = std::min(n, (b + 1) * kBlock);
        for (std::size_t i = b * kBlock; i < end; ++i) s += w[i] * v[i];
        partial[b] = s;
    }
    double s = 0.0;
    for (double x : partial) s += x;
    return s;
}

UtilityMoments utility_moments(const UtilityInput& in, const Eigen::VectorXd& z, bool derivs) {
    const Eigen::MatrixXd& F = *in.features;
    const std::size_t n = in.prior.size();
    const Eigen::Index dim = F.cols();
    const std::size_t nb = block_count(n);
    std::vector<double> value(nb, 0.0);
    std::vector<Eigen::VectorXd> grad(derivs ? nb : 0);
    std::vector<Eigen::MatrixXd> hess(derivs ? nb : 0);
#pragma omp parallel for schedule(static)
    for (std::size_t b = 0; b < nb; ++b) {
        const std::size_t begin = b * kBlock, end = std::min(n, begin + kBlock);
        const auto rows = static_cast<Eigen::Index>(end - begin);
        const auto Fb = F.middleRows(static_cast<Eigen::Index>(begin), rows);
        const Eigen::VectorXd x = Fb * z;
        Eigen::VectorXd w1 = Eigen::VectorXd::Zero(rows), w2 = Eigen::VectorXd::Zero(rows);
        double s = 0.0;
        for (Eigen::Index r = 0; r < rows; ++r) {
            const double w = in.prior[begin + static_cast<std::size_t>(r)];
            if (w == 0.0) continue;
            double u, du, d2u;
            in.util->eval_U(in.base[begin + static_cast<std::size_t>(r)] + x(r), u, du, d2u);
            s += w * u;
            w1(r) = w * du;
            w2(r) = w * d2u;
        }
        value[b] = s;
        if (derivs) {
            grad[b] = Fb.transpose() * w1;
            hess[b] = Fb.transpose() * w2.asDiagonal() * Fb;
        }
    }
    UtilityMoments m;
    if (derivs) {
        m.grad = Eigen::VectorXd::Zero(dim);
        m.hess = Eigen::MatrixXd::Zero(dim, dim);
    }
    for (std::size_t b = 0; b < nb; ++b) {
        m.value += value[b];
        if (derivs) {
            m.grad += grad[b];
            m.hess += hess[b];
        }
    }
    m.finite = std::isfinite(m.value) && (!derivs || (m.grad.allFinite() && m.hess.allFinite()));
    return m;
}

PerspectiveTerms perspective(const IntegrandSpec& spec, std::span<const double> nu, std::span<const double> p,
                             bool derivs) {
    PerspectiveTerms out;
    const std::size_t n = nu.size();
    const std::size_t nb = block_count(n);
    if (derivs) {
        out.weight_grad.assign(n, 0.0);
        out.slope.assign(n, 0.0);
    }
    std::vector<double> partial(nb, 0.0);
#pragma omp parallel for schedule(static)
    for (std::size_t b = 0; b < nb; ++b) {
        double s = 0.0;
        const std::size_t end = std::min(n, (b + 1) * kBlock);
        for (std::size_t i = b * kBlock; i < end; ++i) {
            const Term t = perspective_term(spec, i, nu[i], p[i], derivs);
            s += t.value;
            if (derivs) {
                out.weight_grad[i] = t.weight_grad;
                out.slope[i] = t.slope;
            }
        }
        partial[b] = s;
    }
    for (double x : partial) out.value += x;
    return out;
}

}  // namespace parallel

}  // namespace robmot::kernels
