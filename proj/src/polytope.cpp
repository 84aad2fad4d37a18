#include "robmot/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include "robmot/error.hpp"

namespace robmot {

PathLattice::PathLattice(std::vector<Grid> grids, double s0, std::size_t max_paths)
    : grids_(std::move(grids)), s0_(s0) {
    if (grids_.empty()) throw Error(ErrorKind::InvalidInput, "lattice needs at least one maturity");
    for (const auto& g : grids_) {
        if (count_ > max_paths / g.size() + 1 || count_ * g.size() > max_paths)
            throw Error(ErrorKind::SizeLimit, "path count exceeds cap of " + std::to_string(max_paths));
        count_ *= g.size();
    }
    const std::size_t n = grids_.size();
    stride_.assign(n, 1);
    for (std::size_t t = n - 1; t-- > 0;) stride_[t] = stride_[t + 1] * grids_[t + 1].size();
    node_offset_.assign(n + 1, 0);
    std::size_t histories = 1;
    for (std::size_t t = 0; t < n; ++t) {
        node_offset_[t + 1] = node_offset_[t] + histories;
        histories *= grids_[t].size();
    }
}

std::vector<double> PathLattice::path_values(std::size_t path) const {
    std::vector<double> x(periods());
    for (std::size_t t = 0; t < periods(); ++t) x[t] = coord(path, t);
    return x;
}

std::size_t PathLattice::path_index(std::span<const std::size_t> coords) const {
    if (coords.size() != periods()) throw Error(ErrorKind::InvalidInput, "coordinate count mismatch");
    std::size_t p = 0;
    for (std::size_t t = 0; t < periods(); ++t) p += coords[t] * stride_[t];
    return p;
}

bool PathLattice::same_shape(const PathLattice& other) const {
    if (this == &other) return true;
    if (periods() != other.periods() || s0_ != other.s0_) return false;
    for (std::size_t t = 0; t < periods(); ++t) {
        const auto a = grids_[t].points();
        const auto b = other.grids_[t].points();
        if (!std::equal(a.begin(), a.end(), b.begin(), b.end())) return false;
    }
    return true;
}

LatticePtr build_lattice(const MarginalSystem& sys, std::size_t max_paths) {
    std::vector<Grid> grids;
    grids.reserve(sys.periods());
    for (const auto& m : sys.marginals) grids.push_back(m.grid());
    return std::make_shared<const PathLattice>(std::move(grids), sys.s0, max_paths);
}

PathMeasure::PathMeasure(LatticePtr lattice, std::vector<double> weights)
    : lattice_(std::move(lattice)), weights_(std::move(weights)) {
    if (!lattice_) throw Error(ErrorKind::InvalidInput, "path measure without lattice");
    if (weights_.size() != lattice_->path_count())
        throw Error(ErrorKind::LatticeMismatch, "weight count differs from path count");
    for (double w : weights_)
        if (!std::isfinite(w) || w < 0.0) throw Error(ErrorKind::InvalidInput, "path weights must be finite and >= 0");
}

double PathMeasure::total_mass() const { return std::accumulate(weights_.begin(), weights_.end(), 0.0); }

bool PathMeasure::is_probability() const { return std::abs(total_mass() - 1.0) <= tol::kMass; }

double PathMeasure::expect(std::span<const double> values) const {
    if (values.size() != weights_.size()) throw Error(ErrorKind::LatticeMismatch, "value vector length mismatch");
    double acc = 0.0;
    for (std::size_t p = 0; p < weights_.size(); ++p)
        if (weights_[p] != 0.0) acc += weights_[p] * values[p];
    return acc;
}

std::vector<PrefixNode> prefix_nodes(const PathLattice& lattice) {
    std::vector<PrefixNode> nodes;
    nodes.reserve(lattice.node_count());
    for (std::size_t t = 0; t < lattice.periods(); ++t) {
        std::vector<std::size_t> hist(t, 0);
        for (std::size_t k = 0; k < lattice.nodes_at(t); ++k) {
            nodes.push_back(PrefixNode{t + 1, hist});
            // Odometer increment, last history coordinate fastest.
            for (std::size_t d = t; d-- > 0;) {
                if (++hist[d] < lattice.grid(d).size()) break;
                hist[d] = 0;
            }
        }
    }
    return nodes;
}

MartingalePolytope build_polytope(const MarginalSystem& sys, std::size_t max_paths) {
    MartingalePolytope poly;
    poly.lattice_ = build_lattice(sys, max_paths);
    const auto& L = *poly.lattice_;
    const std::size_t n = L.path_count();
    std::size_t marginal_rows = 0;
    for (const auto& m : sys.marginals) marginal_rows += m.size();
    const std::size_t rows = marginal_rows + L.node_count();
    poly.full_A_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n));
    poly.b_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows));
    poly.rows_.reserve(rows);
    poly.marginal_rows_ = marginal_rows;

    std::vector<std::size_t> marginal_offset(L.periods(), 0);
    std::size_t r = 0;
    for (std::size_t t = 0; t < L.periods(); ++t) {
        marginal_offset[t] = r;
        const auto pmf = sys.marginals[t].pmf();
        for (std::size_t g = 0; g < pmf.size(); ++g) {
            poly.rows_.push_back({PolytopeRow::Kind::Marginal, t + 1, g});
            poly.b_(static_cast<Eigen::Index>(r)) = pmf[g];
            ++r;
        }
    }
    for (std::size_t t = 0; t < L.periods(); ++t)
        for (std::size_t k = 0; k < L.nodes_at(t); ++k)
            poly.rows_.push_back({PolytopeRow::Kind::Martingale, t + 1, L.node_offset(t) + k});

    for (std::size_t p = 0; p < n; ++p) {
        const auto col = static_cast<Eigen::Index>(p);
        for (std::size_t t = 0; t < L.periods(); ++t) {
            poly.full_A_(static_cast<Eigen::Index>(marginal_offset[t] + L.coord_index(p, t)), col) = 1.0;
            const auto node_row = static_cast<Eigen::Index>(marginal_rows + L.node_of(p, t));
            poly.full_A_(node_row, col) = L.coord(p, t) - L.prev_coord(p, t);
        }
    }
    poly.A_ = poly.full_A_;
    poly.columns_.resize(n);
    std::iota(poly.columns_.begin(), poly.columns_.end(), std::size_t{0});
    return poly;
}

MartingalePolytope MartingalePolytope::restrict_to(std::span<const char> keep) const {
    if (keep.size() != lattice_->path_count()) throw Error(ErrorKind::LatticeMismatch, "mask length mismatch");
    MartingalePolytope out = *this;
    out.columns_.clear();
    for (std::size_t c : columns_)
        if (keep[c]) out.columns_.push_back(c);
    out.A_.resize(full_A_.rows(), static_cast<Eigen::Index>(out.columns_.size()));
    for (std::size_t j = 0; j < out.columns_.size(); ++j)
        out.A_.col(static_cast<Eigen::Index>(j)) = full_A_.col(static_cast<Eigen::Index>(out.columns_[j]));
    return out;
}

double MartingalePolytope::residual(std::span<const double> q) const {
    if (q.size() != lattice_->path_count()) throw Error(ErrorKind::LatticeMismatch, "weight length mismatch");
    const Eigen::Map<const Eigen::VectorXd> v(q.data(), static_cast<Eigen::Index>(q.size()));
    return (full_A_ * v - b_).cwiseAbs().maxCoeff();
}

std::vector<double> MartingalePolytope::expand(const Eigen::VectorXd& active) const {
    std::vector<double> q(lattice_->path_count(), 0.0);
    for (std::size_t j = 0; j < columns_.size(); ++j) q[columns_[j]] = active(static_cast<Eigen::Index>(j));
    return q;
}

Eigen::VectorXd MartingalePolytope::compress(std::span<const double> q) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(columns_.size()));
    for (std::size_t j = 0; j < columns_.size(); ++j) v(static_cast<Eigen::Index>(j)) = q[columns_[j]];
    return v;
}

LinearProgram MartingalePolytope::linear_program(std::span<const double> cost) const {
    LinearProgram lp;
    lp.A = A_;
    lp.b = b_;
    lp.c = compress(cost);
    return lp;
}

PolytopeVerdict feasibility(const MartingalePolytope& poly, const SolveOptions& opts) {
    const std::vector<double> zero(poly.lattice()->path_count(), 0.0);
    const auto sol = solve_lp(poly.linear_program(zero), opts);
    PolytopeVerdict v;
    v.infeasibility = sol.infeasibility;
    if (sol.status == LpStatus::Infeasible) {
        v.feasible = false;
        v.farkas = sol.farkas;
        return v;
    }
    v.feasible = true;
    v.witness = poly.expand(sol.x);
    return v;
}

namespace {

struct BasisState {
    Eigen::MatrixXd Binv;
    Eigen::VectorXd xB;
    bool ok = false;
};

BasisState factor(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const std::vector<int>& basis) {
    const auto m = A.rows();
    Eigen::MatrixXd B(m, m);
    for (Eigen::Index i = 0; i < m; ++i) B.col(i) = A.col(basis[static_cast<std::size_t>(i)]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    BasisState s;
    if (!lu.isInvertible()) return s;
    s.Binv = lu.inverse();
    s.xB = s.Binv * b;
    s.ok = true;
    return s;
}

}  // namespace

std::vector<std::vector<double>> enumerate_vertices(const MartingalePolytope& poly, std::size_t max_paths,
                                                    std::size_t max_bases) {
    const std::size_t n_paths = poly.lattice()->path_count();
    if (n_paths > max_paths)
        throw Error(ErrorKind::HarnessLimit,
                    "vertex enumeration limited to " + std::to_string(max_paths) + " paths");
    const auto rows = independent_rows(poly.A());
    Eigen::MatrixXd A(static_cast<Eigen::Index>(rows.size()), poly.A().cols());
    Eigen::VectorXd b(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        A.row(static_cast<Eigen::Index>(i)) = poly.A().row(rows[i]);
        b(static_cast<Eigen::Index>(i)) = poly.b()(rows[i]);
    }
    LinearProgram lp{A, b, Eigen::VectorXd::Zero(A.cols())};
    const auto start = solve_lp(lp);
    if (start.status != LpStatus::Optimal) return {};
    std::vector<int> basis = start.basis;
    if (std::any_of(basis.begin(), basis.end(), [](int j) { return j < 0; }))
        throw Error(ErrorKind::HarnessLimit, "could not obtain an artificial-free starting basis");
    std::sort(basis.begin(), basis.end());

    const auto m = A.rows();
    const auto ncols = A.cols();
    constexpr double kTol = 1e-10;
    std::set<std::vector<int>> seen{basis};
    std::deque<std::vector<int>> queue{basis};
    std::map<std::vector<long long>, std::vector<double>> vertices;

    while (!queue.empty()) {
        auto cur = std::move(queue.front());
        queue.pop_front();
        const auto st = factor(A, b, cur);
        if (!st.ok) continue;
        Eigen::VectorXd x = Eigen::VectorXd::Zero(ncols);
        for (Eigen::Index i = 0; i < m; ++i) x(cur[static_cast<std::size_t>(i)]) = std::max(0.0, st.xB(i));
        std::vector<long long> key(static_cast<std::size_t>(ncols));
        for (Eigen::Index j = 0; j < ncols; ++j) key[static_cast<std::size_t>(j)] = std::llround(x(j) * 1e9);
        if (!vertices.count(key)) vertices.emplace(std::move(key), poly.expand(x));

        std::vector<char> basic(static_cast<std::size_t>(ncols), 0);
        for (int j : cur) basic[static_cast<std::size_t>(j)] = 1;
        for (Eigen::Index j = 0; j < ncols; ++j) {
            if (basic[static_cast<std::size_t>(j)]) continue;
            const Eigen::VectorXd u = st.Binv * A.col(j);
            double ratio = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < m; ++i)
                if (u(i) > kTol) ratio = std::min(ratio, std::max(0.0, st.xB(i)) / u(i));
            if (!std::isfinite(ratio)) continue;
            for (Eigen::Index i = 0; i < m; ++i) {
                if (u(i) <= kTol) continue;
                if (std::max(0.0, st.xB(i)) / u(i) > ratio + 1e-12) continue;
                auto next = cur;
                next[static_cast<std::size_t>(i)] = static_cast<int>(j);
                std::sort(next.begin(), next.end());
                if (seen.insert(next).second) {
                    if (seen.size() > max_bases)
                        throw Error(ErrorKind::HarnessLimit, "too many feasible bases to enumerate");
                    queue.push_back(std::move(next));
                }
            }
        }
    }
    std::vector<std::vector<double>> out;
    out.reserve(vertices.size());
    for (auto& [k, v] : vertices) out.push_back(std::move(v));
    return out;
}

}  // namespace robmot
