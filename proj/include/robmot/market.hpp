#pragma once

// Calibration inputs: support grids, per-maturity marginals, call-quote
// ingestion and the convex-order (martingale coupling) feasibility test.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace robmot {

namespace tol {
inline constexpr double kMass = 1e-12;         // pmf normalization
inline constexpr double kMean = 1e-9;          // marginal mean vs spot
inline constexpr double kConvexOrder = 1e-10;  // call-function dominance slack
inline constexpr double kQuoteMean = 1e-8;     // implied mean from quotes
}  // namespace tol

/// Strictly increasing, finite support values.
class Grid {
public:
    explicit Grid(std::vector<double> points);

    std::size_t size() const noexcept { return points_.size(); }
    double operator[](std::size_t i) const { return points_[i]; }
    std::span<const double> points() const noexcept { return points_; }
    double front() const { return points_.front(); }
    double back() const { return points_.back(); }

private:
    std::vector<double> points_;
};

class Marginal {
public:
    /// Validates nonnegativity and unit mass (within tol::kMass), then
    /// renormalizes so the stored weights sum to one.
    Marginal(Grid grid, std::vector<double> pmf);

    const Grid& grid() const noexcept { return grid_; }
    std::span<const double> pmf() const noexcept { return pmf_; }
    std::size_t size() const noexcept { return pmf_.size(); }
    double mean() const;

    /// Exact expectation of a function sampled on the grid.
    double expect(std::span<const double> values) const;

private:
    Grid grid_;
    std::vector<double> pmf_;
};

struct MarginalSystem {
    MarginalSystem(double spot, std::vector<Marginal> margs);

    double s0;
    std::vector<Marginal> marginals;

    std::size_t periods() const noexcept { return marginals.size(); }
};

struct CallQuoteCurve {
    int maturity_index = 1;  // 1-based
    std::vector<double> strikes;
    std::vector<double> prices;
};

/// Inverts quoted call prices on their strike grid: the returned pmf solves
/// sum_j p_j (K_j - K_i)^+ = price_i exactly, the leftmost atom taking the
/// remaining mass.
Marginal marginal_from_call_quotes(const CallQuoteCurve& curve, double s0);

/// E[(X - k)^+] under m.
double call_function(const Marginal& m, double k);

/// Call prices of m at each of its own grid points.
std::vector<double> call_prices_on_grid(const Marginal& m);

struct StrassenViolation {
    enum class Kind { Mean, ConvexOrder } kind;
    std::size_t index;  // 1-based maturity (mean) or first maturity of the pair
    double k;           // strike of the violation (ConvexOrder) or the mean
    double lhs;         // call(mu_i, k) or mean
    double rhs;         // call(mu_{i+1}, k) or s0
};

struct FeasibilityVerdict {
    bool feasible = true;
    std::optional<StrassenViolation> violation;
};

/// Equal means at s0 plus pointwise call-function dominance between
/// consecutive maturities, checked at every kink of the union grid.
FeasibilityVerdict check_strassen(const MarginalSystem& sys);

}  // namespace robmot
