#include "doctest.h"

#include <random>
#include <set>

#include "instances.hpp"
#include "robmot/error.hpp"
#include "robmot/polytope.hpp"

using namespace robmot;

namespace {

MarginalSystem dirac_system(std::size_t periods, double s0) {
    std::vector<Marginal> ms;
    for (std::size_t t = 0; t < periods; ++t) ms.emplace_back(Grid({s0}), std::vector<double>{1.0});
    return MarginalSystem(s0, ms);
}

// Independent check of the defining rows, straight from path coordinates.
double oracle_residual(const MarginalSystem& sys, const PathLattice& L, const std::vector<double>& q) {
    double worst = 0.0;
    for (std::size_t t = 0; t < sys.periods(); ++t) {
        const auto& m = sys.marginals[t];
        for (std::size_t g = 0; g < m.size(); ++g) {
            double s = 0.0;
            for (std::size_t p = 0; p < q.size(); ++p)
                if (L.coord(p, t) == m.grid()[g]) s += q[p];
            worst = std::max(worst, std::abs(s - m.pmf()[g]));
        }
    }
    for (const auto& node : prefix_nodes(L)) {
        double s = 0.0;
        for (std::size_t p = 0; p < q.size(); ++p) {
            bool match = true;
            for (std::size_t d = 0; d < node.history.size(); ++d) match = match && L.coord_index(p, d) == node.history[d];
            if (!match) continue;
            const std::size_t t = node.t - 1;
            const double prev = t == 0 ? sys.s0 : L.coord(p, t - 1);
            s += q[p] * (L.coord(p, t) - prev);
        }
        worst = std::max(worst, std::abs(s));
    }
    return worst;
}

}  // namespace

TEST_CASE("lattice sizes and order") {
    CHECK(build_lattice(MarginalSystem(0.0, {Marginal(Grid({0.0}), {1.0})}))->path_count() == 1);
    auto L = build_lattice(testing::unique_coupling());
    REQUIRE(L->path_count() == 6);
    const double expect[6][2] = {{-1, -2}, {-1, 0}, {-1, 2}, {1, -2}, {1, 0}, {1, 2}};
    for (std::size_t p = 0; p < 6; ++p) {
        CHECK(L->coord(p, 0) == expect[p][0]);
        CHECK(L->coord(p, 1) == expect[p][1]);
        const std::size_t c[2] = {L->coord_index(p, 0), L->coord_index(p, 1)};
        CHECK(L->path_index(c) == p);
    }
    PathLattice three({Grid({0, 1}), Grid({0, 1, 2}), Grid({0, 1, 2, 3})}, 0.0);
    CHECK(three.path_count() == 24);
}

TEST_CASE("lattice size cap") {
    std::vector<double> g(100);
    for (int i = 0; i < 100; ++i) g[i] = i;
    try {
        PathLattice big({Grid(g), Grid(g), Grid(g), Grid(g)}, 0.0);
        FAIL("expected SizeLimit");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SizeLimit);
    }
    CHECK_THROWS_AS(PathLattice({Grid(g), Grid(g)}, 0.0, 100), Error);
}

TEST_CASE("prefix nodes") {
    CHECK(prefix_nodes(PathLattice({Grid({0.0})}, 0.0)).size() == 1);
    CHECK(prefix_nodes(PathLattice({Grid({-1, 1}), Grid({-2, 0, 2})}, 0.0)).size() == 3);
    PathLattice L({Grid({0, 1}), Grid({0, 1, 2}), Grid({0, 1})}, 0.0);
    auto nodes = prefix_nodes(L);
    CHECK(nodes.size() == 9);
    std::set<std::pair<std::size_t, std::vector<std::size_t>>> seen;
    for (const auto& n : nodes) seen.insert({n.t, n.history});
    CHECK(seen.size() == 9);
    // node ids agree with the enumeration order
    for (std::size_t p = 0; p < L.path_count(); ++p)
        for (std::size_t t = 0; t < 3; ++t) {
            const auto& n = nodes[L.node_of(p, t)];
            CHECK(n.t == t + 1);
            for (std::size_t d = 0; d < t; ++d) CHECK(n.history[d] == L.coord_index(p, d));
        }
}

TEST_CASE("unique coupling polytope") {
    auto sys = testing::unique_coupling();
    auto poly = build_polytope(sys);
    CHECK(poly.row_count() == 8);
    CHECK(poly.marginal_row_count() == 5);
    auto v = feasibility(poly);
    REQUIRE(v.feasible);
    const double expect[6] = {0.25, 0.25, 0.0, 0.0, 0.25, 0.25};
    for (std::size_t p = 0; p < 6; ++p) CHECK(v.witness[p] == doctest::Approx(expect[p]).epsilon(1e-12));
    CHECK(oracle_residual(sys, *poly.lattice(), v.witness) <= 1e-12);
    CHECK(poly.residual(v.witness) <= 1e-12);
    auto vertices = enumerate_vertices(poly);
    CHECK(vertices.size() == 1);
}

TEST_CASE("constant marginals") {
    auto sys = dirac_system(3, 2.5);
    auto poly = build_polytope(sys);
    auto v = feasibility(poly);
    REQUIRE(v.feasible);
    REQUIRE(v.witness.size() == 1);
    CHECK(v.witness[0] == doctest::Approx(1.0));
}

TEST_CASE("convex order violation is infeasible with a certificate") {
    auto poly = build_polytope(testing::convex_order_violation());
    auto v = feasibility(poly);
    CHECK_FALSE(v.feasible);
    REQUIRE(v.farkas.size() == static_cast<Eigen::Index>(poly.row_count()));
    CHECK((poly.A().transpose() * v.farkas).maxCoeff() <= 1e-9);
    CHECK(poly.b().dot(v.farkas) > 1e-9);
}

TEST_CASE("feasibility agrees with Strassen; witnesses are probability martingales") {
    std::mt19937_64 rng(21);
    int feasible = 0, infeasible = 0;
    for (int rep = 0; rep < 120; ++rep) {
        testing::RandomOptions o;
        o.periods = 1 + rep % 3;
        o.max_points = 6;
        o.feasible = rep % 3 == 0;
        o.force_means = rep % 2 == 0;
        auto sys = testing::random_system(rng, o);
        auto poly = build_polytope(sys);
        auto v = feasibility(poly);
        CHECK(v.feasible == check_strassen(sys).feasible);
        if (v.feasible) {
            ++feasible;
            double mass = 0.0;
            for (double q : v.witness) mass += q;
            CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(oracle_residual(sys, *poly.lattice(), v.witness) <= 1e-9);
        } else {
            ++infeasible;
        }
    }
    CHECK(feasible > 10);
    CHECK(infeasible > 10);
}

TEST_CASE("vertex enumeration on a non-unique instance") {
    auto poly = build_polytope(testing::four_atom());
    auto vertices = enumerate_vertices(poly);
    CHECK(vertices.size() >= 2);
    for (const auto& v : vertices) CHECK(poly.residual(v) <= 1e-9);
    std::vector<double> big(300);
    for (int i = 0; i < 300; ++i) big[i] = i - 150;
    std::vector<double> p(300, 1.0 / 300);
    testing::force_mean(p, big, 0.0);
    auto large = build_polytope(MarginalSystem(0.0, {Marginal(Grid(big), p)}));
    CHECK_THROWS_AS(enumerate_vertices(large), Error);
}

TEST_CASE("restriction pins paths to zero") {
    auto poly = build_polytope(testing::four_atom());
    std::vector<char> keep(poly.lattice()->path_count(), 1);
    keep[0] = 0;
    auto sub = poly.restrict_to(keep);
    CHECK(sub.dimension() + 1 == poly.dimension());
    auto v = feasibility(sub);
    if (v.feasible) CHECK(v.witness[0] == 0.0);
}
