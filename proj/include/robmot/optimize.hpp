#pragma once

// Numerical engines used by the pricing pipeline:
//   - Frank-Wolfe (with away steps) over the martingale polytope, using the
//     simplex solver as its linear oracle;
//   - golden-section and Brent searches in one dimension;
//   - exponentiated-gradient minimization over a probability simplex;
//   - damped Newton ascent for max-min of smooth concave pieces, with
//     log-sum-exp smoothing and a log barrier for linear inequalities.

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

#include "robmot/lp.hpp"
#include "robmot/polytope.hpp"

namespace robmot {

// ---------------------------------------------------------------- Frank-Wolfe

struct SmoothObjective {
    /// Value at a full-length weight vector; +inf outside the domain.
    std::function<double(std::span<const double>)> value;
    /// Finite gradient at a point of finite value (full length).
    std::function<void(std::span<const double>, std::span<double>)> gradient;
    /// Optional. Called with each new iterate; objectives that hide an inner
    /// minimization re-solve it here and keep it frozen in between, so the
    /// line search works on a majorant that is tight at the iterate.
    std::function<void(std::span<const double>)> refresh;
};

/// Current iterate as a convex combination of polytope vertices.
struct FwState {
    std::vector<std::vector<double>> vertices;
    std::vector<double> weights;

    std::vector<double> point() const;
};

struct FwResult {
    std::vector<double> q;
    double value = 0.0;
    double gap = 0.0;  // Frank-Wolfe gap at q; bounds value - min
    long iterations = 0;
    bool converged = false;
    FwState state;
};

/// Uniform mixture of LP vertices that jointly charge every path the polytope
/// can charge; a point of the relative interior.
FwState interior_start(const MartingalePolytope& poly, const SolveOptions& opts = {});

/// Starts from `start` when given, from a single LP vertex otherwise.
/// Throws Error(InfeasiblePolytope) if the polytope is empty.
FwResult frank_wolfe_min(const MartingalePolytope& poly, const SmoothObjective& objective,
                         const SolveOptions& opts = {}, const FwState* start = nullptr);

// ------------------------------------------------------------ one dimension

struct ScalarMin {
    double argmin = 0.0;
    double value = 0.0;
    long evaluations = 0;
    bool at_lower_edge = false;
};

/// Golden-section search; the result is within tolerance*(hi-lo) of the
/// minimizer of a unimodal f. Throws Error(BracketInvalid) on a bad bracket.
ScalarMin minimize_convex_1d(const std::function<double(double)>& f, double lo, double hi,
                             const SolveOptions& opts = {});

/// Brent's parabolic/golden search on [lo, hi] with absolute x tolerance.
ScalarMin brent_minimize(const std::function<double(double)>& f, double lo, double hi, double xtol,
                         long max_iterations = 200);

/// Minimizes a unimodal f over (floor, inf): grows or shrinks a bracket
/// geometrically from `start` until f turns up, then runs golden section.
/// `at_lower_edge` reports a minimizer pinned at the floor.
ScalarMin minimize_positive(const std::function<double(double)>& f, const SolveOptions& opts = {},
                            double start = 1.0, double floor = 1e-8);

// --------------------------------------------------------------- simplex

struct SimplexResult {
    std::vector<double> w;
    double value = 0.0;
    double gap = 0.0;  // w.grad - min(grad); bounds value - min for convex g
    long iterations = 0;
    bool converged = false;
};

/// Returns g(w) and writes its gradient; +inf marks points outside dom g.
using SimplexObjective = std::function<double(std::span<const double>, std::span<double>)>;

/// Exponentiated-gradient descent with sufficient-decrease step control
/// (steps halve on rejection). `w0`, when non-empty, warm-starts.
SimplexResult minimize_over_simplex(const SimplexObjective& g, std::size_t m, const SolveOptions& opts = {},
                                    std::span<const double> w0 = {});

// ------------------------------------------------------- concave max-min

/// Values, gradients (columns) and Hessians of concave pieces g_k(z).
struct PieceEval {
    Eigen::VectorXd value;
    Eigen::MatrixXd grad;               // dim x pieces
    std::vector<Eigen::MatrixXd> hess;  // per piece
};

/// Fills `out` at z; derivatives only when `derivs`. Returns false outside
/// the domain.
using PieceFn = std::function<bool(const Eigen::VectorXd& z, PieceEval& out, bool derivs)>;

struct MaxMinProblem {
    PieceFn pieces;
    std::size_t piece_count = 1;
    Eigen::MatrixXd C;  // optional strict inequalities C z + d > 0
    Eigen::VectorXd d;
};

struct MaxMinOptions {
    std::vector<double> betas{10.0, 100.0, 1e3, 1e4, 1e5, 1e6};
    double decrement_tol = 1e-14;
    int max_newton = 150;
};

struct MaxMinResult {
    Eigen::VectorXd z;
    double value = 0.0;     // min_k g_k(z), unsmoothed
    double smoothed = 0.0;  // last stage objective
    long newton_steps = 0;
    bool unbounded = false;
};

/// maximize min_k g_k(z) by damped Newton on the log-sum-exp soft minimum,
/// sharpening through `betas`; inequality rows get a 1/beta log barrier.
MaxMinResult maximize_min_concave(const MaxMinProblem& problem, Eigen::VectorXd z0, const MaxMinOptions& opts = {});

}  // namespace robmot
