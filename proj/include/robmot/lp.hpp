#pragma once

// Dense two-phase revised simplex for  min c.x  s.t.  A x = b,  x >= 0.
// Sizes here are desk scale (hundreds of columns), so the basis inverse is
// kept explicitly and refactored periodically.

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace robmot {

struct SolveOptions {
    double tolerance = 1e-9;
    long max_iterations = 0;  // 0 selects the engine default
    std::uint64_t seed = 0;

    long iterations_or(long fallback) const { return max_iterations > 0 ? max_iterations : fallback; }
};

namespace defaults {
inline constexpr long kSimplexPivots = 1'000'000;
inline constexpr long kFrankWolfeIterations = 50'000;
inline constexpr long kLineSearchIterations = 200;
}  // namespace defaults

struct LinearProgram {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::VectorXd c;

    void validate() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LpStatus s);

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    double value = 0.0;
    Eigen::VectorXd x;       // primal point (Optimal)
    Eigen::VectorXd duals;   // row multipliers y with c - A^T y >= 0 (Optimal)
    Eigen::VectorXd farkas;  // y with A^T y <= 0 and b.y > 0 (Infeasible)
    double infeasibility = 0.0;  // phase-1 optimum
    std::vector<int> basis;      // basic column per row, -1 for a retained artificial
    long pivots = 0;
};

/// Dantzig pricing with a Bland fallback after a run of degenerate pivots,
/// so the pivot sequence is deterministic and cannot cycle. Throws
/// Error(IterationLimit) past the pivot cap.
LpSolution solve_lp(const LinearProgram& lp, const SolveOptions& opts = {});

/// Indices of a maximal linearly independent subset of the rows of A.
std::vector<int> independent_rows(const Eigen::MatrixXd& A, double tol = 1e-9);

}  // namespace robmot
