#include "doctest.h"

#include <cmath>
#include <random>

#include "instances.hpp"
#include "robmot/error.hpp"
#include "robmot/pricing.hpp"

using namespace robmot;

namespace {

const std::vector<double> kUniqueQ{0.25, 0.25, 0.0, 0.0, 0.25, 0.25};

PricingInputs unique_inputs(UtilitySpec util = UtilitySpec::exponential()) {
    auto sys = testing::unique_coupling();
    auto L = build_lattice(sys);
    return make_inputs(sys, {prior_uniform(*L)}, util);
}

std::vector<double> zeros(const PricingInputs& in) { return std::vector<double>(in.amb.path_count(), 0.0); }

// Random instance from the desk-scale family: N = 2, grids <= 5 points.
PricingInputs random_inputs(std::mt19937_64& rng, std::size_t priors, UtilitySpec util) {
    auto sys = testing::random_system(rng, {});
    auto L = build_lattice(sys);
    std::vector<std::vector<double>> ps{prior_independent(sys, *L), prior_tilted(sys, *L, 0.7), prior_uniform(*L)};
    ps.resize(priors);
    return make_inputs(sys, ps, util);
}

double mean_of(const std::vector<double>& v, std::span<const double> q) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * q[i];
    return s;
}

}  // namespace

TEST_CASE("dynamic and static gains") {
    auto sys = testing::unique_coupling();
    auto L = build_lattice(sys);
    const std::size_t nodes = L->node_count();
    CHECK(nodes == 3);
    const std::size_t path = L->path_index(std::vector<std::size_t>{0, 2});  // (-1, 2)
    CHECK(gain_dynamic(*L, DynamicStrategy{std::vector<double>(nodes, 0.0)}, path) == 0.0);
    CHECK(gain_dynamic(*L, DynamicStrategy{std::vector<double>(nodes, 1.0)}, path) == 2.0);
    DynamicStrategy first{std::vector<double>(nodes, 0.0)};
    first.h[0] = 1.0;
    CHECK(gain_dynamic(*L, first, L->path_index(std::vector<std::size_t>{1, 0})) == 1.0);  // (1, -2)

    StaticPosition f{{{0.0, 0.0}, {0.0, 0.0, 0.0}}};
    CHECK(gain_static(f, sys, *L, path) == 0.0);
    f.f = {{3.0, 3.0}, {-1.5, -1.5, -1.5}};
    CHECK(gain_static(f, sys, *L, path) == 0.0);
    f.f = {{0.0, 0.0}, {-2.0, 0.0, 2.0}};
    CHECK(gain_static(f, sys, *L, path) == 2.0);
}

TEST_CASE("payoff builtins") {
    auto sys = testing::unique_coupling();
    auto L = build_lattice(sys);
    // paths: (-1,-2) (-1,0) (-1,2) (1,-2) (1,0) (1,2)
    CHECK(Payoff::forward().evaluate(*L) == std::vector<double>{2, 0, 2, 2, 0, 2});
    CHECK(Payoff::straddle(1, 2).evaluate(*L) == std::vector<double>{1, 1, 3, 3, 1, 1});
    CHECK(Payoff::straddle(0, 1).evaluate(*L) == std::vector<double>{1, 1, 1, 1, 1, 1});
    CHECK(Payoff::asian_call(0.0).evaluate(*L) == std::vector<double>{0, 0, 0.5, 0, 0.5, 1.5});
    CHECK(Payoff::lookback().evaluate(*L) == std::vector<double>{1, 0, 0, 3, 1, 0});
    const auto v = Payoff::vanilla(2, PiecewiseLinear{{-1.0, 1.0}, {0.0, 1.0}}).evaluate(*L);
    CHECK(v == std::vector<double>{-0.5, 0.5, 1.5, -0.5, 0.5, 1.5});  // linear beyond the knots
    CHECK(Payoff::vanilla(1, PiecewiseLinear{{0.0}, {4.0}}).evaluate(*L) == std::vector<double>(6, 4.0));
    CHECK_THROWS_AS(Payoff::table({1.0, 2.0}).evaluate(*L), Error);
    CHECK_THROWS_AS(Payoff::straddle(1, 3).evaluate(*L), Error);
    CHECK_THROWS_AS(Payoff::vanilla(1, PiecewiseLinear{{1.0, 0.0}, {0.0, 0.0}}), Error);
    CHECK(growth_bound(Payoff::forward().evaluate(*L), *L) == doctest::Approx(0.5));
}

TEST_CASE("prior generators") {
    auto sys = testing::four_atom();
    auto L = build_lattice(sys);
    for (const auto& p : {prior_uniform(*L), prior_independent(sys, *L), prior_tilted(sys, *L, -0.4)}) {
        double s = 0.0;
        for (double v : p) s += v;
        CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    }
    const auto ind = prior_independent(sys, *L);
    CHECK(ind[L->path_index(std::vector<std::size_t>{1, 3})] == doctest::Approx(0.5 * 0.125));
    const auto tilt = prior_tilted(sys, *L, 0.0);
    for (std::size_t i = 0; i < ind.size(); ++i) CHECK(tilt[i] == doctest::Approx(ind[i]).epsilon(1e-14));
}

TEST_CASE("mot bounds") {
    auto in = unique_inputs();
    const auto& L = *in.poly.lattice();
    auto b = mot_bounds(in.poly, Payoff::straddle(1, 2).evaluate(L));
    CHECK(b.low == doctest::Approx(1.0));
    CHECK(b.high == doctest::Approx(1.0));
    b = mot_bounds(in.poly, std::vector<double>(6, 2.5));
    CHECK(b.low == doctest::Approx(2.5));
    CHECK(b.high == doctest::Approx(2.5));

    SUBCASE("vanilla and path-dependent against the vertex set") {
        auto sys = testing::four_atom();
        auto poly = build_polytope(sys);
        const auto verts = enumerate_vertices(poly);
        PiecewiseLinear g{{-3.0, 0.0, 3.0}, {1.0, -0.5, 2.0}};
        auto van = Payoff::vanilla(2, g).evaluate(*poly.lattice());
        std::vector<double> gv;
        for (double x : sys.marginals[1].grid().points()) gv.push_back(g(x));
        const double mu_g = sys.marginals[1].expect(gv);
        auto vb = mot_bounds(poly, van);
        CHECK(vb.low == doctest::Approx(mu_g).epsilon(1e-12));
        CHECK(vb.high == doctest::Approx(mu_g).epsilon(1e-12));
        auto psi = Payoff::straddle(1, 2).evaluate(*poly.lattice());
        double lo = 1e300, hi = -1e300;
        for (const auto& v : verts) {
            lo = std::min(lo, mean_of(psi, v));
            hi = std::max(hi, mean_of(psi, v));
        }
        auto sb = mot_bounds(poly, psi);
        CHECK(sb.low == doctest::Approx(lo).epsilon(1e-12));
        CHECK(sb.high == doctest::Approx(hi).epsilon(1e-12));
        CHECK(sb.low < sb.high - 0.1);
        CHECK(poly.residual(sb.q_high) <= 1e-10);
    }
}

TEST_CASE("calibrated measures price gains at zero") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nrm;
    for (int rep = 0; rep < 10; ++rep) {
        auto sys = testing::random_system(rng, {});
        auto poly = build_polytope(sys);
        const auto& L = *poly.lattice();
        const auto q = feasibility(poly).witness;
        DynamicStrategy h{std::vector<double>(L.node_count())};
        for (double& v : h.h) v = nrm(rng);
        StaticPosition f;
        for (const auto& m : sys.marginals) {
            std::vector<double> v(m.size());
            for (double& e : v) e = nrm(rng);
            f.f.push_back(v);
        }
        double dyn = 0.0, stat = 0.0;
        for (std::size_t p = 0; p < L.path_count(); ++p) {
            dyn += q[p] * gain_dynamic(L, h, p);
            stat += q[p] * gain_static(f, sys, L, p);
        }
        CHECK(std::abs(dyn) <= 1e-9);
        CHECK(std::abs(stat) <= 1e-9);
    }
}

TEST_CASE("exponential dual on the unique coupling") {
    auto in = unique_inputs();
    const auto z = zeros(in);
    const auto d = dual_value(0.0, z, in);
    CHECK(std::abs(d.value + 2.0 / 3.0) <= 1e-9);
    CHECK(d.lambda == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
    CHECK(std::abs(d.divergence - std::log(1.5)) <= 1e-12);
    CHECK(in.poly.residual(d.q) <= 1e-8);
    for (std::size_t p = 0; p < 6; ++p) CHECK(d.q[p] == doctest::Approx(kUniqueQ[p]).epsilon(1e-12));

    DualOptions generic;
    generic.closed_form = false;
    const auto g = dual_value(0.0, z, in, generic);
    CHECK(g.value == doctest::Approx(-2.0 / 3.0).epsilon(1e-9));
    CHECK(g.lambda == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    CHECK(!g.at_lower_edge);

    for (double x : {-1.0, 0.5, 2.0})
        CHECK(dual_value(x, z, in).value == doctest::Approx(std::exp(-x) * d.value).epsilon(1e-12));
}

TEST_CASE("entropic-quadratic dual against a grid search") {
    // Unique Q, two priors: the dual reduces to a search over (lambda, w).
    auto sys = testing::unique_coupling();
    auto L = build_lattice(sys);
    const auto util = UtilitySpec::entropic_quadratic(0.5);
    const std::vector<double> p1 = prior_uniform(*L), p2{0.3, 0.1, 0.1, 0.1, 0.1, 0.3};
    auto in = make_inputs(sys, {p1, p2}, util);
    const auto psi = Payoff::straddle(1, 2).evaluate(*in.poly.lattice());
    const double x = 0.3;
    auto objective = [&](double l, double w) {
        double s = 0.0;
        for (std::size_t p = 0; p < 6; ++p) {
            const double pw = w * p1[p] + (1 - w) * p2[p];
            s += pw * util.V(l * kUniqueQ[p] / pw) - l * kUniqueQ[p] * psi[p];
        }
        return s + l * x;
    };
    double bl = 1.0, bw = 0.5, best = objective(bl, bw);
    double hl = 1.0, hw = 0.5;
    for (int round = 0; round < 6; ++round) {
        const double cl = bl, cw = bw;
        for (int i = -50; i <= 50; ++i)
            for (int j = -50; j <= 50; ++j) {
                const double l = cl + hl * i / 50.0, w = cw + hw * j / 50.0;
                if (l <= 0 || w < 0 || w > 1) continue;
                const double v = objective(l, w);
                if (v < best) {
                    best = v;
                    bl = l;
                    bw = w;
                }
            }
        hl /= 10;
        hw /= 10;
    }
    DualOptions o;
    const auto d = dual_value(x, psi, in, o);
    CHECK(d.value == doctest::Approx(best).epsilon(1e-4));
    CHECK(d.value <= best + 1e-9);
    CHECK(d.lambda == doctest::Approx(bl).epsilon(1e-3));
}

TEST_CASE("closed form and generic exponential duals agree") {
    std::mt19937_64 rng(21);
    for (int rep = 0; rep < 6; ++rep) {
        auto in = random_inputs(rng, 1 + rep % 3, UtilitySpec::exponential(rep % 2 ? 0.5 : 1.0));
        const auto psi = Payoff::asian_call(0.3).evaluate(*in.poly.lattice());
        const double x = rep % 3 - 1.0;
        DualOptions generic;
        generic.closed_form = false;
        const auto a = dual_value(x, psi, in);
        const auto b = dual_value(x, psi, in, generic);
        CHECK(a.closed_form);
        CHECK(!b.closed_form);
        CHECK(std::abs(a.value - b.value) <= 1e-6 * std::abs(a.value));
        CHECK(b.lambda > 0.0);
        CHECK(in.poly.residual(b.q) <= 1e-8);
    }
}

TEST_CASE("dual needs a dominated calibrated measure") {
    auto sys = testing::unique_coupling();
    auto L = build_lattice(sys);
    // all mass on a path no martingale coupling charges
    std::vector<double> p(6, 0.0);
    p[2] = 1.0;
    auto in = make_inputs(sys, {p}, UtilitySpec::exponential());
    try {
        dual_value(0.0, zeros(in), in);
        FAIL("expected AssumptionViolated");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::AssumptionViolated);
    }
}

TEST_CASE("primal examples") {
    SUBCASE("unique coupling straddle") {
        auto in = unique_inputs();
        const auto psi = Payoff::straddle(1, 2).evaluate(*in.poly.lattice());
        for (double x : {-1.0, 0.0, 1.0}) {
            const auto p = primal_value(x, psi, in);
            CHECK(std::abs(p.value + std::exp(-x - (std::log(1.5) - 1.0))) <= 1e-3);
            CHECK(p.value <= dual_value(x, psi, in).value + 1e-12);
        }
    }
    SUBCASE("a calibrated prior needs no hedge") {
        auto sys = testing::four_atom();
        auto poly = build_polytope(sys);
        const auto q = feasibility(poly).witness;
        auto in = make_inputs(sys, {q}, UtilitySpec::exponential());
        const auto z = zeros(in);
        for (double x : {-0.5, 1.0}) {
            const auto p = primal_value(x, z, in);
            const auto d = dual_value(x, z, in);
            CHECK(p.value == doctest::Approx(in.util.U(x)).epsilon(1e-9));
            CHECK(d.value - p.value <= 1e-4);
        }
    }
    SUBCASE("replicable claims shift the cash") {
        std::mt19937_64 rng(2);
        auto in = random_inputs(rng, 2, UtilitySpec::entropic_quadratic(0.3));
        const auto& L = *in.poly.lattice();
        StaticPosition g;
        for (const auto& m : in.sys.marginals) {
            std::vector<double> v(m.size());
            for (std::size_t j = 0; j < v.size(); ++j) v[j] = std::sin(3.0 * j + 1.0);
            g.f.push_back(v);
        }
        const double c = 0.4;
        std::vector<double> psi(L.path_count());
        for (std::size_t p = 0; p < psi.size(); ++p) psi[p] = gain_static(g, in.sys, L, p) + c;
        const auto z = zeros(in);
        for (double x : {0.0, 1.0})
            CHECK(primal_value(x, psi, in).value == doctest::Approx(primal_value(x - c, z, in).value).epsilon(1e-9));
    }
}

TEST_CASE("weak duality on sampled strategies and measures") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nrm(0.0, 0.5);
    std::uniform_real_distribution<double> uni(0.1, 3.0);
    for (int rep = 0; rep < 5; ++rep) {
        auto in = random_inputs(rng, 3, rep % 2 ? UtilitySpec::entropic_quadratic(1.0) : UtilitySpec::exponential());
        const auto& L = *in.poly.lattice();
        const auto psi = Payoff::lookback().evaluate(L);
        const auto verts = enumerate_vertices(in.poly);
        const auto V = IntegrandSpec::from_utility(in.util);
        for (int s = 0; s < 20; ++s) {
            DynamicStrategy h{std::vector<double>(L.node_count())};
            for (double& v : h.h) v = nrm(rng);
            StaticPosition f;
            for (const auto& m : in.sys.marginals) {
                std::vector<double> v(m.size());
                for (double& e : v) e = nrm(rng);
                f.f.push_back(v);
            }
            const double x = nrm(rng), lambda = uni(rng);
            const auto& q = verts[rng() % verts.size()];
            const std::size_t k = rng() % in.amb.size();
            const auto& P = in.amb.prior(k);
            double lhs = 0.0;
            std::vector<double> nu(q.size());
            for (std::size_t p = 0; p < L.path_count(); ++p) {
                lhs += P[p] * in.util.U(x + gain_dynamic(L, h, p) + gain_static(f, in.sys, L, p) - psi[p]);
                nu[p] = lambda * q[p];
            }
            const double rhs = divergence_single(nu, P.weights(), V) - lambda * mean_of(psi, q) + lambda * x;
            CHECK(lhs <= rhs + 1e-12);
        }
    }
}

TEST_CASE("value in cash is increasing and concave") {
    std::mt19937_64 rng(13);
    auto in = random_inputs(rng, 2, UtilitySpec::entropic_quadratic(0.5));
    const auto psi = Payoff::asian_call(0.0).evaluate(*in.poly.lattice());
    std::vector<double> u;
    for (int i = 0; i <= 8; ++i) u.push_back(primal_value(-2.0 + 0.5 * i, psi, in).value);
    for (std::size_t i = 1; i < u.size(); ++i) CHECK(u[i] >= u[i - 1]);
    for (std::size_t i = 1; i + 1 < u.size(); ++i) CHECK(u[i] >= 0.5 * (u[i - 1] + u[i + 1]) - 1e-9);
}

TEST_CASE("indifference prices") {
    SUBCASE("zero claim") {
        std::mt19937_64 rng(4);
        auto in = random_inputs(rng, 2, UtilitySpec::exponential());
        const auto r = indifference_prices(zeros(in), in);
        CHECK(std::abs(r.p_sell) <= 1e-6);
        CHECK(std::abs(r.p_buy) <= 1e-6);
    }
    SUBCASE("unique coupling") {
        for (const auto& util : {UtilitySpec::exponential(), UtilitySpec::entropic_quadratic(0.5)}) {
            auto in = unique_inputs(util);
            const auto r = indifference_prices(Payoff::straddle(1, 2).evaluate(*in.poly.lattice()), in);
            CHECK(r.p_sell == doctest::Approx(1.0).epsilon(1e-6));
            CHECK(r.p_buy == doctest::Approx(1.0).epsilon(1e-6));
            CHECK(r.u0_dual == doctest::Approx(r.u0_primal).epsilon(1e-8));
        }
    }
    SUBCASE("vanilla claims price at their calibrated value") {
        std::mt19937_64 rng(6);
        auto in = random_inputs(rng, 3, UtilitySpec::entropic_quadratic(0.2));
        PiecewiseLinear g{{-1.0, 0.5, 2.0}, {0.5, -1.0, 1.5}};
        const auto psi = Payoff::vanilla(2, g).evaluate(*in.poly.lattice());
        std::vector<double> gv;
        for (double x : in.sys.marginals[1].grid().points()) gv.push_back(g(x));
        const double mu_g = in.sys.marginals[1].expect(gv);
        const auto r = indifference_prices(psi, in);
        CHECK(std::abs(r.p_sell - mu_g) <= 1e-6);
        CHECK(std::abs(r.p_buy - mu_g) <= 1e-6);
    }
    SUBCASE("sandwich, cash invariance, monotonicity") {
        std::mt19937_64 rng(8);
        for (int rep = 0; rep < 3; ++rep) {
            auto in = random_inputs(rng, 1 + rep, rep % 2 ? UtilitySpec::entropic_quadratic(0.5) : UtilitySpec::exponential());
            const auto psi = Payoff::straddle(1, 2).evaluate(*in.poly.lattice());
            const auto mot = mot_bounds(in.poly, psi);
            const auto r = indifference_prices(psi, in);
            CHECK(mot.low - 1e-6 <= r.p_buy);
            CHECK(r.p_buy <= r.p_sell + 1e-12);
            CHECK(r.p_sell <= mot.high + 1e-6);
            CHECK(r.disagreement <= 1e-4);
            std::vector<double> shifted = psi, bigger = psi;
            for (std::size_t p = 0; p < psi.size(); ++p) {
                shifted[p] += 0.75;
                bigger[p] += p % 2 ? 0.5 : 0.0;
            }
            const double sell = seller_price_penalty(psi, in, r.u0_dual).penalty;
            CHECK(seller_price_penalty(shifted, in, r.u0_dual).penalty == doctest::Approx(sell + 0.75).epsilon(1e-9));
            CHECK(seller_price_penalty(bigger, in, r.u0_dual).penalty >= sell - 1e-9);
        }
    }
    SUBCASE("mismatch is reported") {
        auto in = unique_inputs();
        PriceOptions o;
        o.cross_tolerance = -1.0;
        try {
            indifference_prices(Payoff::forward().evaluate(*in.poly.lattice()), in, o);
            FAIL("expected CrossCheckFailed");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::CrossCheckFailed);
        }
    }
}

TEST_CASE("call decomposition") {
    auto sys = testing::unique_coupling();
    SUBCASE("constant") {
        const auto d = call_span_restrict(StaticPosition{{{2.0, 2.0}, {-1.0, -1.0, -1.0}}}, sys);
        CHECK(d.constant == std::vector<double>{2.0, -1.0});
        CHECK(d.coefficients[0] == std::vector<double>{0.0});
        CHECK(d.coefficients[1] == std::vector<double>{0.0, 0.0});
    }
    SUBCASE("identity on (-1, 1)") {
        const auto d = call_span_restrict(StaticPosition{{{-1.0, 1.0}, {0.0, 0.0, 0.0}}}, sys);
        CHECK(d.constant[0] == -1.0);
        CHECK(d.strikes[0] == std::vector<double>{-1.0});
        CHECK(d.coefficients[0] == std::vector<double>{1.0});
        CHECK(d.reconstructed.f[0] == std::vector<double>{-1.0, 1.0});
    }
    SUBCASE("a single call") {
        const auto d = call_span_restrict(StaticPosition{{{0.0, 0.0}, {0.0, 0.0, 2.0}}}, sys);  // (x - 0)^+
        CHECK(d.constant[1] == 0.0);
        CHECK(d.coefficients[1] == std::vector<double>{0.0, 1.0});
    }
    SUBCASE("random positions are rebuilt on their grids") {
        std::mt19937_64 rng(3);
        std::normal_distribution<double> nrm;
        for (int rep = 0; rep < 20; ++rep) {
            auto s = testing::random_system(rng, {3, 6});
            StaticPosition f;
            for (const auto& m : s.marginals) {
                std::vector<double> v(m.size());
                for (double& e : v) e = nrm(rng);
                f.f.push_back(v);
            }
            const auto d = call_span_restrict(f, s);
            for (std::size_t t = 0; t < f.f.size(); ++t)
                for (std::size_t j = 0; j < f.f[t].size(); ++j)
                    CHECK(std::abs(d.reconstructed.f[t][j] - f.f[t][j]) <= 1e-13 * (1.0 + std::abs(f.f[t][j])));
        }
    }
}

TEST_CASE("statics restricted to calls keep the primal value") {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 4; ++rep) {
        auto in = random_inputs(rng, 1 + rep % 3, rep % 2 ? UtilitySpec::entropic_quadratic(0.5) : UtilitySpec::exponential());
        const auto psi = Payoff::straddle(1, 2).evaluate(*in.poly.lattice());
        PrimalOptions calls;
        calls.basis = StaticBasis::Calls;
        const auto a = primal_value(0.0, psi, in);
        const auto b = primal_value(0.0, psi, in, calls);
        CHECK(std::abs(a.value - b.value) < 1e-6);
        // the optimal statics are themselves in the call span
        const auto d = call_span_restrict(a.statics, in.sys);
        for (std::size_t t = 0; t < a.statics.f.size(); ++t)
            for (std::size_t j = 0; j < a.statics.f[t].size(); ++j)
                CHECK(d.reconstructed.f[t][j] == doctest::Approx(a.statics.f[t][j]).epsilon(1e-12));
    }
}

TEST_CASE("trivial case: priors are the vertices") {
    SUBCASE("unique coupling") {
        auto sys = testing::unique_coupling();
        auto L = build_lattice(sys);
        const auto r = trivial_case_check(sys, Payoff::straddle(1, 2).evaluate(*L));
        CHECK(r.vertices == 1);
        CHECK(r.p_sell == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(r.p_buy == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(r.passed);
    }
    SUBCASE("one period, two atoms") {
        MarginalSystem sys(0.0, {Marginal(Grid({-1.0, 1.0}), {0.5, 0.5})});
        auto L = build_lattice(sys);
        const auto r = trivial_case_check(sys, Payoff::vanilla(1, PiecewiseLinear{{-1.0, 0.0, 1.0}, {0.0, 0.0, 1.0}}).evaluate(*L));
        CHECK(r.p_sell == doctest::Approx(0.5).epsilon(1e-6));
        CHECK(r.p_buy == doctest::Approx(0.5).epsilon(1e-6));
        CHECK(r.passed);
    }
    SUBCASE("four atoms") {
        auto sys = testing::four_atom();
        auto L = build_lattice(sys);
        const auto r = trivial_case_check(sys, Payoff::straddle(1, 2).evaluate(*L));
        CHECK(r.vertices > 1);
        CHECK(r.mot_low < r.mot_high - 0.1);
        CHECK(r.passed);
    }
}
