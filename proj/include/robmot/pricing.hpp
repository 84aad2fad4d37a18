#pragma once

// Model-free bounds, the robust utility dual and primal problems, and the
// indifference prices built on them.

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "robmot/divergence.hpp"
#include "robmot/optimize.hpp"
#include "robmot/polytope.hpp"

namespace robmot {

// ---------------------------------------------------------------- payoffs

/// Piecewise-linear function through (knots, values), extended linearly by
/// its end segments. A single knot gives a constant.
struct PiecewiseLinear {
    std::vector<double> knots;
    std::vector<double> values;

    double operator()(double x) const;
    void validate() const;
};

enum class PayoffKind { Table, Forward, Straddle, AsianCall, Vanilla, Lookback };

class Payoff {
public:
    static Payoff table(std::vector<double> values);
    static Payoff forward();                              // |S_N - s0|
    static Payoff straddle(std::size_t i, std::size_t j);  // |S_j - S_i|, maturity 0 is s0
    static Payoff asian_call(double strike);              // (mean(S_1..S_N) - K)^+
    static Payoff vanilla(std::size_t i, PiecewiseLinear g);  // g(S_i)
    static Payoff lookback();                             // max_i S_i - S_N over i = 1..N

    PayoffKind kind() const noexcept { return kind_; }
    std::string name() const;
    const PiecewiseLinear& function() const { return g_; }
    std::size_t maturity() const noexcept { return j_; }

    /// Values on every path. Throws Error(InvalidInput) on a bad maturity,
    /// a table of the wrong length or a non-finite value.
    std::vector<double> evaluate(const PathLattice& lattice) const;

private:
    explicit Payoff(PayoffKind k) : kind_(k) {}
    PayoffKind kind_;
    std::vector<double> table_;
    std::size_t i_ = 0, j_ = 0;
    double strike_ = 0.0;
    PiecewiseLinear g_;
};

/// max |psi| / (1 + sum_t |x_t|) over the lattice.
double growth_bound(std::span<const double> psi, const PathLattice& lattice);

// ------------------------------------------------------------ strategies

/// Position per prefix node, indexed like PathLattice::node_of.
struct DynamicStrategy {
    std::vector<double> h;
};

/// One function per maturity, sampled on that maturity's grid.
struct StaticPosition {
    std::vector<std::vector<double>> f;
};

/// sum_t h(prefix at t) (x_t - x_{t-1}), x_0 = s0.
double gain_dynamic(const PathLattice& lattice, const DynamicStrategy& h, std::size_t path);

/// sum_i f_i(x_i) - mu_i(f_i).
double gain_static(const StaticPosition& f, const MarginalSystem& sys, const PathLattice& lattice, std::size_t path);

// ------------------------------------------------------- problem bundle

struct PricingInputs {
    MarginalSystem sys;
    MartingalePolytope poly;
    AmbiguitySet amb;
    UtilitySpec util;
};

/// Builds lattice and polytope from the marginals; priors must live on the
/// same lattice (see the generators below).
PricingInputs make_inputs(MarginalSystem sys, const std::vector<std::vector<double>>& priors, UtilitySpec util);

// ---------------------------------------------------------- prior makers

std::vector<double> prior_uniform(const PathLattice& lattice);
/// Product of the marginals.
std::vector<double> prior_independent(const MarginalSystem& sys, const PathLattice& lattice);
/// Product of the marginals reweighted by exp(theta (x_N - s0)).
std::vector<double> prior_tilted(const MarginalSystem& sys, const PathLattice& lattice, double theta);

// ------------------------------------------------------------ MOT bounds

struct MotBounds {
    double low = 0.0;
    double high = 0.0;
    std::vector<double> q_low;
    std::vector<double> q_high;
};

/// min and max of E_Q[psi] over the polytope. Throws InfeasiblePolytope.
MotBounds mot_bounds(const MartingalePolytope& poly, std::span<const double> psi, const SolveOptions& opts = {});

// ------------------------------------------------------------------ dual

struct DualSolution {
    double value = 0.0;  // inf over (lambda, Q) of J(lambda Q) - lambda E_Q psi + lambda x
    double lambda = 0.0;
    std::vector<double> q;
    std::vector<double> weights;  // prior mixture attaining the divergence
    double divergence = 0.0;      // robust relative entropy of q (exponential) or J(lambda q)
    double gap = 0.0;             // last Frank-Wolfe gap
    bool converged = false;
    bool at_lower_edge = false;   // lambda pinned at the search floor
    bool closed_form = false;
};

struct DualOptions {
    SolveOptions solve{};
    /// Exponential utility only: optimize lambda in closed form.
    bool closed_form = true;
};

/// Throws Error(AssumptionViolated) when no calibrated measure is dominated
/// by the priors.
DualSolution dual_value(double x, std::span<const double> psi, const PricingInputs& in, const DualOptions& opts = {});

// ---------------------------------------------------------------- primal

enum class StaticBasis { Indicators, Calls };

struct PrimalOptions {
    MaxMinOptions newton{};
    StaticBasis basis = StaticBasis::Indicators;
    int starts = 3;  // z = 0 plus seeded perturbations
    std::uint64_t seed = 0;
    std::optional<Eigen::VectorXd> warm;  // replaces the z = 0 start
};

struct PrimalSolution {
    double value = 0.0;  // min over priors of E_P[U(x + H.S + Gamma_f - psi)]
    DynamicStrategy dynamic;
    StaticPosition statics;
    Eigen::VectorXd z;
    long newton_steps = 0;
    bool unbounded = false;
};

PrimalSolution primal_value(double x, std::span<const double> psi, const PricingInputs& in,
                            const PrimalOptions& opts = {});

// ------------------------------------------------------ indifference prices

struct SellerRoutes {
    double penalty = 0.0;    // route (a): sup_Q E_Q psi - gamma(Q)
    double bisection = 0.0;  // route (b): least x with u_psi(x) >= u_0(0)
    std::vector<double> q;   // maximizer from route (a)
    double gamma = 0.0;      // penalty of q
    double gap = 0.0;        // Frank-Wolfe gap of route (a)
};

struct IndifferencePrices {
    double p_sell = 0.0;
    double p_buy = 0.0;
    SellerRoutes sell;
    SellerRoutes buy;  // routes for -psi; p_buy = -price
    double u0_dual = 0.0;
    double u0_primal = 0.0;
    double scale = 1.0;  // 1 + |mot_low| + |mot_high|
    double disagreement = 0.0;  // max |(a) - (b)| / scale
};

struct PriceOptions {
    SolveOptions solve{};
    double cross_tolerance = 1e-4;  // relative to scale
    bool throw_on_mismatch = true;
};

/// Route (a) only: sup over the polytope of E_Q psi - gamma(Q), with u0 the
/// zero-claim value at x = 0.
SellerRoutes seller_price_penalty(std::span<const double> psi, const PricingInputs& in, double u0,
                                  const SolveOptions& opts = {});

/// Both routes for the seller and the buyer. Throws Error(CrossCheckFailed)
/// when (a) and (b) differ by more than cross_tolerance * scale.
IndifferencePrices indifference_prices(std::span<const double> psi, const PricingInputs& in,
                                       const PriceOptions& opts = {});

// --------------------------------------------------------------- calls

struct CallDecomposition {
    std::vector<double> constant;                    // per maturity
    std::vector<std::vector<double>> strikes;         // grid points g_0..g_{n-2}
    std::vector<std::vector<double>> coefficients;    // matching call weights
    StaticPosition reconstructed;
};

/// f_i = c_i + sum_k a_ik (x - K_k)^+ on each grid.
CallDecomposition call_span_restrict(const StaticPosition& f, const MarginalSystem& sys);

// ---------------------------------------------------------- trivial case

struct TrivialCaseReport {
    std::size_t vertices = 0;
    double mot_low = 0.0;
    double mot_high = 0.0;
    double p_sell = 0.0;
    double p_buy = 0.0;
    bool passed = false;
};

/// Priors := vertices of the polytope, exponential utility; compares the
/// indifference prices with the MOT bounds. Throws HarnessLimit past 200 paths.
TrivialCaseReport trivial_case_check(const MarginalSystem& sys, std::span<const double> psi,
                                     const SolveOptions& opts = {}, double tolerance = 1e-4);

// ---------------------------------------------------------------- report

struct PricingReport {
    double x = 0.0;
    MotBounds mot;
    double u0_at_0 = 0.0;
    DualSolution dual;
    PrimalSolution primal;
    double duality_gap = 0.0;  // dual - primal
    IndifferencePrices prices;
    double growth = 0.0;
};

PricingReport price(double x, std::span<const double> psi, const PricingInputs& in, const PriceOptions& opts = {});

}  // namespace robmot
