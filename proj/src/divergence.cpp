#include "robmot/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "robmot/error.hpp"
#include "robmot/kernels.hpp"
#include "robmot/optimize.hpp"

namespace robmot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double xlogx(double y) { return y == 0.0 ? 0.0 : y * std::log(y); }

}  // namespace

// ------------------------------------------------------------- utilities

UtilitySpec UtilitySpec::exponential(double a) {
    if (!(a > 0) || !std::isfinite(a)) throw Error(ErrorKind::InvalidInput, "exponential utility needs a > 0");
    return UtilitySpec(UtilityKind::Exponential, a);
}

UtilitySpec UtilitySpec::entropic_quadratic(double kappa) {
    if (!(kappa > 0) || !std::isfinite(kappa))
        throw Error(ErrorKind::InvalidInput, "entropic-quadratic utility needs kappa > 0");
    return UtilitySpec(UtilityKind::EntropicQuadratic, kappa);
}

std::string UtilitySpec::name() const {
    return kind_ == UtilityKind::Exponential ? "exponential" : "entropic_quadratic";
}

// Solves log y + 2k y + x = 0 in t = log y. h(t) = t + 2k e^t + x is convex
// and increasing, so Newton from a point with h >= 0 decreases monotonically
// onto the root.
double UtilitySpec::marginal(double x) const {
    if (kind_ == UtilityKind::Exponential) return std::exp(-param_ * x);
    const double k2 = 2.0 * param_;
    auto h = [&](double t) { return t + k2 * std::exp(t) + x; };
    double t = -x + 1.0;
    if (x < 0.0) {
        const double alt = std::log(-x / k2) + 1.0;
        if (alt < t && h(alt) >= 0.0) t = alt;
    }
    for (int it = 0; it < 200; ++it) {
        const double e = k2 * std::exp(t);
        const double step = (t + e + x) / (1.0 + e);
        t -= step;
        if (std::abs(step) <= 1e-15 * (1.0 + std::abs(t))) break;
    }
    return std::exp(t);
}

void UtilitySpec::eval_U(double x, double& u, double& du, double& d2u) const {
    if (kind_ == UtilityKind::Exponential) {
        const double e = std::exp(-param_ * x);
        u = -e / param_;
        du = e;
        d2u = -param_ * e;
        return;
    }
    const double y = marginal(x);
    u = V(y) + x * y;
    du = y;
    d2u = -1.0 / (1.0 / y + 2.0 * param_);
}

double UtilitySpec::U(double x) const {
    double u, du, d2u;
    eval_U(x, u, du, d2u);
    return u;
}

double UtilitySpec::dU(double x) const { return marginal(x); }

double UtilitySpec::d2U(double x) const {
    double u, du, d2u;
    eval_U(x, u, du, d2u);
    return d2u;
}

double UtilitySpec::V(double y) const {
    if (y < 0.0 || std::isnan(y)) return kInf;
    if (kind_ == UtilityKind::Exponential) return (xlogx(y) - y) / param_;
    return xlogx(y) - y + param_ * y * y;
}

double UtilitySpec::dV(double y) const {
    if (kind_ == UtilityKind::Exponential) return std::log(y) / param_;
    return std::log(y) + 2.0 * param_ * y;
}

double UtilitySpec::d2V(double y) const {
    if (kind_ == UtilityKind::Exponential) return 1.0 / (param_ * y);
    return 1.0 / y + 2.0 * param_;
}

void UtilitySpec::validate() const {
    // U' positive, strictly decreasing, spanning many decades.
    double prev = kInf;
    for (double x = -40.0; x <= 40.0; x += 0.5) {
        const double d = dU(x);
        if (!(d > 0.0) || !(d < prev)) throw Error(ErrorKind::InvalidInput, name() + ": U' is not positive decreasing");
        prev = d;
    }
    const double lo = kind_ == UtilityKind::Exponential ? -50.0 / param_ : -1e6 * (1.0 + param_);
    const double hi = kind_ == UtilityKind::Exponential ? 50.0 / param_ : 50.0;
    if (!(dU(lo) > 1e3 * dU(0.0)) || !(dU(hi) < 1e-6 * dU(0.0)))
        throw Error(ErrorKind::InvalidInput, name() + ": Inada limits not reached");
    for (double x = -5.0; x <= 5.0; x += 0.25) {
        for (double y : {1e-6, 0.01, 0.3, 1.0, 2.5, 10.0}) {
            const double slack = V(y) + x * y - U(x);
            if (slack < -1e-10 * (1.0 + std::abs(x * y))) throw Error(ErrorKind::InvalidInput, name() + ": Young inequality fails");
        }
    }
}

// ------------------------------------------------------------ integrands

IntegrandSpec IntegrandSpec::quadratic() { return IntegrandSpec(IntegrandKind::Quadratic); }

IntegrandSpec IntegrandSpec::exponential() { return IntegrandSpec(IntegrandKind::Exponential); }

IntegrandSpec IntegrandSpec::from_utility(const UtilitySpec& u) {
    IntegrandSpec s(IntegrandKind::Utility);
    s.utility_ = u;
    return s;
}

IntegrandSpec IntegrandSpec::with_shift(std::vector<double> shift) const {
    for (double b : shift)
        if (!std::isfinite(b)) throw Error(ErrorKind::InvalidInput, "shift must be finite");
    IntegrandSpec s = *this;
    s.shift_ = std::move(shift);
    return s;
}

std::string IntegrandSpec::name() const {
    switch (kind_) {
        case IntegrandKind::Quadratic: return "quadratic";
        case IntegrandKind::Exponential: return "exp";
        case IntegrandKind::Utility: return "utility:" + utility_.name();
    }
    return "?";
}

double IntegrandSpec::phi(double x) const {
    switch (kind_) {
        case IntegrandKind::Quadratic: return 0.5 * x * x;
        case IntegrandKind::Exponential: return std::exp(x);
        case IntegrandKind::Utility: return -utility_.U(-x);
    }
    return kInf;
}

double IntegrandSpec::dphi(double x) const {
    switch (kind_) {
        case IntegrandKind::Quadratic: return x;
        case IntegrandKind::Exponential: return std::exp(x);
        case IntegrandKind::Utility: return utility_.dU(-x);
    }
    return kInf;
}

double IntegrandSpec::d2phi(double x) const {
    switch (kind_) {
        case IntegrandKind::Quadratic: return 1.0;
        case IntegrandKind::Exponential: return std::exp(x);
        case IntegrandKind::Utility: return -utility_.d2U(-x);
    }
    return kInf;
}

double IntegrandSpec::conj(double y) const {
    switch (kind_) {
        case IntegrandKind::Quadratic: return 0.5 * y * y;
        case IntegrandKind::Exponential: return y < 0.0 ? kInf : xlogx(y) - y;
        case IntegrandKind::Utility: return utility_.V(y);
    }
    return kInf;
}

double IntegrandSpec::dconj(double y) const {
    switch (kind_) {
        case IntegrandKind::Quadratic: return y;
        case IntegrandKind::Exponential: return std::log(y);
        case IntegrandKind::Utility: return utility_.dV(y);
    }
    return kInf;
}

double IntegrandSpec::d2conj(double y) const {
    switch (kind_) {
        case IntegrandKind::Quadratic: return 1.0;
        case IntegrandKind::Exponential: return 1.0 / y;
        case IntegrandKind::Utility: return utility_.d2V(y);
    }
    return kInf;
}

// -------------------------------------------------------------- ambiguity

AmbiguitySet::AmbiguitySet(std::vector<PathMeasure> priors) : priors_(std::move(priors)) {
    if (priors_.empty()) throw Error(ErrorKind::InvalidInput, "ambiguity set needs at least one prior");
    for (const auto& p : priors_) {
        if (!p.is_probability()) throw Error(ErrorKind::InvalidInput, "priors must be probability measures");
        if (!p.lattice()->same_shape(*priors_.front().lattice()))
            throw Error(ErrorKind::LatticeMismatch, "priors live on different lattices");
    }
}

std::vector<double> AmbiguitySet::mixture(std::span<const double> w) const {
    if (w.size() != priors_.size()) throw Error(ErrorKind::InvalidInput, "mixture weight count mismatch");
    std::vector<double> out(path_count(), 0.0);
    for (std::size_t k = 0; k < priors_.size(); ++k) {
        if (w[k] == 0.0) continue;
        const auto pk = priors_[k].weights();
        for (std::size_t p = 0; p < out.size(); ++p) out[p] += w[k] * pk[p];
    }
    return out;
}

std::vector<double> AmbiguitySet::uniform_mixture() const {
    std::vector<double> w(priors_.size(), 1.0 / static_cast<double>(priors_.size()));
    return mixture(w);
}

// ------------------------------------------------------------ functionals

double robust_integral(std::span<const double> f, const IntegrandSpec& spec, const AmbiguitySet& amb) {
    if (f.size() != amb.path_count()) throw Error(ErrorKind::LatticeMismatch, "function length differs from lattice");
    std::vector<double> v(f.size());
    for (std::size_t p = 0; p < f.size(); ++p) v[p] = spec.phi_shifted(p, f[p]);
    double best = -kInf;
    for (std::size_t k = 0; k < amb.size(); ++k) best = std::max(best, kernels::parallel::weighted_sum(amb.prior(k).weights(), v));
    return best;
}

double divergence_single(std::span<const double> nu, std::span<const double> p, const IntegrandSpec& spec) {
    if (nu.size() != p.size()) throw Error(ErrorKind::LatticeMismatch, "measures live on different lattices");
    if (!spec.shift().empty() && spec.shift().size() != nu.size())
        throw Error(ErrorKind::LatticeMismatch, "shift length differs from lattice");
    return kernels::parallel::perspective(spec, nu, p, false).value;
}

RobustDivergence divergence_robust(std::span<const double> nu, const AmbiguitySet& amb, const IntegrandSpec& spec,
                                   const SolveOptions& opts, std::span<const double> warm) {
    if (nu.size() != amb.path_count()) throw Error(ErrorKind::LatticeMismatch, "measure length differs from lattice");
    const std::size_t m = amb.size();
    RobustDivergence out;
    if (m == 1) {
        out.weights = {1.0};
        out.value = divergence_single(nu, amb.prior(0).weights(), spec);
        return out;
    }
    // Finite somewhere iff finite at the uniform mixture (any strictly
    // positive weights have the same support).
    if (!std::isfinite(divergence_single(nu, amb.uniform_mixture(), spec))) {
        out.value = kInf;
        out.weights.assign(m, 1.0 / static_cast<double>(m));
        return out;
    }
    auto g = [&](std::span<const double> w, std::span<double> grad) {
        const auto pw = amb.mixture(w);
        const auto t = kernels::parallel::perspective(spec, nu, pw, true);
        if (!std::isfinite(t.value)) return kInf;
        for (std::size_t k = 0; k < m; ++k) grad[k] = kernels::parallel::weighted_sum(amb.prior(k).weights(), t.weight_grad);
        return t.value;
    };
    SolveOptions eg = opts;
    eg.max_iterations = opts.iterations_or(5000);
    const auto r = minimize_over_simplex(g, m, eg, warm);
    out.value = r.value;
    out.weights = r.w;
    out.gap = r.gap;
    out.converged = r.converged;
    return out;
}

GammaPenalty gamma_penalty(std::span<const double> q, const AmbiguitySet& amb, const UtilitySpec& util, double u0,
                           const SolveOptions& opts) {
    const auto spec = IntegrandSpec::from_utility(util);
    if (!std::isfinite(divergence_robust(q, amb, spec, opts).value))
        throw Error(ErrorKind::DivergenceInfinite, "measure is not dominated by any prior of the hull");
    std::vector<double> scaled(q.size()), warm;
    GammaPenalty out;
    auto objective = [&](double lambda) {
        for (std::size_t p = 0; p < q.size(); ++p) scaled[p] = lambda * q[p];
        const auto j = divergence_robust(scaled, amb, spec, opts, warm);
        warm = j.weights;
        return (j.value - u0) / lambda;
    };
    SolveOptions line = opts;
    line.tolerance = std::max(opts.tolerance, 1e-10);
    const auto r = minimize_positive(objective, line);
    out.lambda = r.argmin;
    out.value = r.value;
    out.at_lower_edge = r.at_lower_edge;
    for (std::size_t p = 0; p < q.size(); ++p) scaled[p] = out.lambda * q[p];
    out.weights = divergence_robust(scaled, amb, spec, opts, warm).weights;
    if (out.value < 0.0 && out.value >= -1e-9) out.value = 0.0;
    return out;
}

}  // namespace robmot
