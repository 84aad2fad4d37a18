#pragma once

// Path lattice, path measures and the linear description of the calibrated
// martingale polytope: nonnegative path weights whose per-maturity
// pushforwards match the marginals and whose increments have zero
// conditional mean given every history.

#include <Eigen/Dense>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "robmot/lp.hpp"
#include "robmot/market.hpp"

namespace robmot {

inline constexpr std::size_t kDefaultMaxPaths = 1'000'000;

/// All N-tuples of grid points, enumerated lexicographically (the last
/// maturity varies fastest).
class PathLattice {
public:
    PathLattice(std::vector<Grid> grids, double s0, std::size_t max_paths = kDefaultMaxPaths);

    std::size_t periods() const noexcept { return grids_.size(); }
    std::size_t path_count() const noexcept { return count_; }
    const Grid& grid(std::size_t t) const { return grids_[t]; }  // 0-based maturity
    double s0() const noexcept { return s0_; }

    std::size_t coord_index(std::size_t path, std::size_t t) const { return (path / stride_[t]) % grids_[t].size(); }
    double coord(std::size_t path, std::size_t t) const { return grids_[t][coord_index(path, t)]; }
    /// Price before maturity t (0-based), i.e. s0 for t = 0.
    double prev_coord(std::size_t path, std::size_t t) const { return t == 0 ? s0_ : coord(path, t - 1); }
    std::vector<double> path_values(std::size_t path) const;
    std::size_t path_index(std::span<const std::size_t> coords) const;

    /// Prefix (predictable) nodes: one at maturity 1, one per history after.
    std::size_t node_count() const noexcept { return node_offset_.back(); }
    std::size_t nodes_at(std::size_t t) const { return node_offset_[t + 1] - node_offset_[t]; }
    std::size_t node_offset(std::size_t t) const { return node_offset_[t]; }
    /// Node deciding the position held over (t-1, t] along `path`.
    std::size_t node_of(std::size_t path, std::size_t t) const {
        return node_offset_[t] + (t == 0 ? 0 : path / stride_[t - 1]);
    }

    bool same_shape(const PathLattice& other) const;

private:
    std::vector<Grid> grids_;
    double s0_;
    std::size_t count_ = 1;
    std::vector<std::size_t> stride_;
    std::vector<std::size_t> node_offset_;
};

using LatticePtr = std::shared_ptr<const PathLattice>;

LatticePtr build_lattice(const MarginalSystem& sys, std::size_t max_paths = kDefaultMaxPaths);

/// Nonnegative weights over the paths of a lattice.
class PathMeasure {
public:
    PathMeasure(LatticePtr lattice, std::vector<double> weights);

    const LatticePtr& lattice() const noexcept { return lattice_; }
    std::span<const double> weights() const noexcept { return weights_; }
    double operator[](std::size_t p) const { return weights_[p]; }
    std::size_t size() const noexcept { return weights_.size(); }
    double total_mass() const;
    bool is_probability() const;
    double expect(std::span<const double> values) const;

private:
    LatticePtr lattice_;
    std::vector<double> weights_;
};

struct PrefixNode {
    std::size_t t;                     // 1-based maturity
    std::vector<std::size_t> history;  // grid indices of x_1..x_{t-1}
};

std::vector<PrefixNode> prefix_nodes(const PathLattice& lattice);

struct PolytopeRow {
    enum class Kind { Marginal, Martingale } kind;
    std::size_t maturity;  // 1-based
    std::size_t index;     // grid index (Marginal) or node id (Martingale)
};

class MartingalePolytope {
public:
    const LatticePtr& lattice() const noexcept { return lattice_; }
    const Eigen::MatrixXd& A() const noexcept { return A_; }  // rows x active columns
    const Eigen::VectorXd& b() const noexcept { return b_; }
    const std::vector<PolytopeRow>& rows() const noexcept { return rows_; }
    std::size_t row_count() const noexcept { return rows_.size(); }
    std::size_t marginal_row_count() const noexcept { return marginal_rows_; }

    /// Paths the weights may charge; all others are pinned to zero.
    const std::vector<std::size_t>& columns() const noexcept { return columns_; }
    std::size_t dimension() const noexcept { return columns_.size(); }

    /// Same constraints restricted to paths with keep[p] != 0.
    MartingalePolytope restrict_to(std::span<const char> keep) const;

    /// Max row residual of a full-length weight vector (including weight off
    /// the active columns).
    double residual(std::span<const double> q) const;
    std::vector<double> expand(const Eigen::VectorXd& active) const;
    Eigen::VectorXd compress(std::span<const double> q) const;

    /// LP over the active columns with the given full-length costs.
    LinearProgram linear_program(std::span<const double> cost) const;

private:
    friend MartingalePolytope build_polytope(const MarginalSystem&, std::size_t);
    LatticePtr lattice_;
    Eigen::MatrixXd full_A_;
    Eigen::MatrixXd A_;
    Eigen::VectorXd b_;
    std::vector<PolytopeRow> rows_;
    std::size_t marginal_rows_ = 0;
    std::vector<std::size_t> columns_;
};

MartingalePolytope build_polytope(const MarginalSystem& sys, std::size_t max_paths = kDefaultMaxPaths);

struct PolytopeVerdict {
    bool feasible = false;
    std::vector<double> witness;  // full-length probability weights when feasible
    Eigen::VectorXd farkas;       // y with A^T y <= 0, b.y > 0 when infeasible
    double infeasibility = 0.0;
};

PolytopeVerdict feasibility(const MartingalePolytope& poly, const SolveOptions& opts = {});

/// Vertices of the polytope, by pivoting through every feasible basis
/// reachable from an initial one. Throws Error(HarnessLimit) past the caps.
std::vector<std::vector<double>> enumerate_vertices(const MartingalePolytope& poly, std::size_t max_paths = 200,
                                                    std::size_t max_bases = 200'000);

}  // namespace robmot
