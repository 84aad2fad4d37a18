#pragma once

// Utility/conjugate pairs, convex integrands with their conjugates, the
// robust integral functional over a finitely generated set of priors, the
// robust divergence and the pricing penalty built from it.

#include <span>
#include <string>
#include <vector>

#include "robmot/lp.hpp"
#include "robmot/polytope.hpp"

namespace robmot {

enum class UtilityKind { Exponential, EntropicQuadratic };

/// Concave utility U with conjugate V(y) = sup_x (U(x) - x y).
///   Exponential(a):        U = -exp(-a x)/a,   V = (y log y - y)/a
///   EntropicQuadratic(k):  V = y log y - y + k y^2, U by inverting V'
/// Both have dom V = [0, inf) and V(0) = 0.
class UtilitySpec {
public:
    static UtilitySpec exponential(double a = 1.0);
    static UtilitySpec entropic_quadratic(double kappa);

    UtilityKind kind() const noexcept { return kind_; }
    double parameter() const noexcept { return param_; }
    std::string name() const;

    double U(double x) const;
    double dU(double x) const;
    double d2U(double x) const;
    /// All three at once; one inversion for the entropic-quadratic pair.
    void eval_U(double x, double& u, double& du, double& d2u) const;

    double V(double y) const;    // +inf for y < 0
    double dV(double y) const;   // y > 0
    double d2V(double y) const;  // y > 0

    /// Numerical Inada and Young checks on sample points. Throws
    /// Error(InvalidInput) on failure.
    void validate() const;

private:
    UtilitySpec(UtilityKind k, double p) : kind_(k), param_(p) {}
    double marginal(double x) const;  // U'(x) = (V')^{-1}(-x)

    UtilityKind kind_;
    double param_;
};

enum class IntegrandKind { Quadratic, Exponential, Utility };

/// Convex phi on the reals with conjugate phi*, optionally shifted by a
/// payoff B on paths: phi_B(w, x) = phi(x + B(w)), phi_B*(w, y) = phi*(y) - y B(w).
class IntegrandSpec {
public:
    static IntegrandSpec quadratic();    // x^2/2  <->  y^2/2
    static IntegrandSpec exponential();  // e^x    <->  y log y - y on [0, inf)
    static IntegrandSpec from_utility(const UtilitySpec& u);  // -U(-x)  <->  V

    IntegrandSpec with_shift(std::vector<double> shift) const;

    IntegrandKind kind() const noexcept { return kind_; }
    std::string name() const;

    double phi(double x) const;
    double dphi(double x) const;
    double d2phi(double x) const;
    double conj(double y) const;    // +inf outside the domain
    double dconj(double y) const;   // interior of the domain
    double d2conj(double y) const;
    /// True when dom phi* = [0, inf).
    bool nonnegative_domain() const noexcept { return kind_ != IntegrandKind::Quadratic; }

    std::span<const double> shift() const noexcept { return shift_; }
    double shift_at(std::size_t path) const { return shift_.empty() ? 0.0 : shift_[path]; }
    double phi_shifted(std::size_t path, double x) const { return phi(x + shift_at(path)); }
    double conj_shifted(std::size_t path, double y) const { return conj(y) - y * shift_at(path); }

private:
    IntegrandSpec(IntegrandKind k) : kind_(k), utility_(UtilitySpec::exponential()) {}

    IntegrandKind kind_;
    UtilitySpec utility_;
    std::vector<double> shift_;
};

/// Convex hull of finitely many prior path measures on one lattice.
class AmbiguitySet {
public:
    explicit AmbiguitySet(std::vector<PathMeasure> priors);

    std::size_t size() const noexcept { return priors_.size(); }
    const PathMeasure& prior(std::size_t k) const { return priors_[k]; }
    const LatticePtr& lattice() const { return priors_.front().lattice(); }
    std::size_t path_count() const { return priors_.front().size(); }

    std::vector<double> mixture(std::span<const double> w) const;
    std::vector<double> uniform_mixture() const;

private:
    std::vector<PathMeasure> priors_;
};

/// sup over the hull of E_P[phi_B(f)]; attained at a generator.
double robust_integral(std::span<const double> f, const IntegrandSpec& spec, const AmbiguitySet& amb);

/// sum_w p(w) phi_B*(w, nu(w)/p(w)); +inf off absolute continuity or
/// outside dom phi*. Paths with nu = p = 0 contribute 0.
double divergence_single(std::span<const double> nu, std::span<const double> p, const IntegrandSpec& spec);

struct RobustDivergence {
    double value = 0.0;
    std::vector<double> weights;  // minimizing mixture weights
    double gap = 0.0;             // certificate from the simplex solver
    bool converged = true;
};

/// inf over mixture weights of divergence_single(nu, P_w).
RobustDivergence divergence_robust(std::span<const double> nu, const AmbiguitySet& amb, const IntegrandSpec& spec,
                                   const SolveOptions& opts = {}, std::span<const double> warm = {});

struct GammaPenalty {
    double value = 0.0;
    double lambda = 0.0;
    std::vector<double> weights;
    bool at_lower_edge = false;
};

/// inf_{lambda > 0} (J_V(lambda q) - u0) / lambda. Throws
/// Error(DivergenceInfinite) when q is not dominated by the hull.
GammaPenalty gamma_penalty(std::span<const double> q, const AmbiguitySet& amb, const UtilitySpec& util, double u0,
                           const SolveOptions& opts = {});

// ------------------------------------------------------ conjugacy harness

struct ConjugacyReport {
    std::size_t trials = 0;
    double max_conjugate_residual = 0.0;   // |I*(nu) - J(nu)|
    double max_representation_residual = 0.0;  // |I(f) - max_nu (nu(f) - J(nu))|
    double max_cone_residual = 0.0;        // meta duality on random cones
    double max_shift_residual = 0.0;       // J_{phi_B*}(nu) vs J_{phi*}(nu) - nu(B)
    double min_young_slack = 0.0;          // min of I(f) + J(nu) - nu(f) over samples
    std::size_t infinite_agreements = 0;   // nu with J = I* = +inf
    bool passed = false;
};

/// Brute-force check of the conjugate duality between the robust integral
/// I and the robust divergence J on a finite lattice (at most 64 paths).
ConjugacyReport conjugacy_check(const IntegrandSpec& spec, const AmbiguitySet& amb, std::size_t trials,
                                std::uint64_t seed, double tolerance = 1e-4);

}  // namespace robmot
