#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "instances.hpp"
#include "robmot/divergence.hpp"
#include "robmot/error.hpp"
#include "robmot/polytope.hpp"

using namespace robmot;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

LatticePtr line_lattice(std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = static_cast<double>(i);
    return std::make_shared<const PathLattice>(std::vector<Grid>{Grid(g)}, 0.0);
}

AmbiguitySet hull(const LatticePtr& L, std::vector<std::vector<double>> ps) {
    std::vector<PathMeasure> priors;
    for (auto& p : ps) priors.emplace_back(L, std::move(p));
    return AmbiguitySet(std::move(priors));
}

// inf_y V(y) + x y by golden section on log y over a wide bracket.
double conjugate_oracle(const UtilitySpec& u, double x) {
    double a = -60.0, b = 60.0;
    auto f = [&](double t) { return u.V(std::exp(t)) + x * std::exp(t); };
    for (int i = 0; i < 400; ++i) {
        const double c = b - 0.6180339887498949 * (b - a), d = a + 0.6180339887498949 * (b - a);
        if (f(c) < f(d)) b = d; else a = c;
    }
    return f(0.5 * (a + b));
}

}  // namespace

TEST_CASE("utility pairs") {
    for (const auto& u : {UtilitySpec::exponential(1.0), UtilitySpec::exponential(0.5),
                          UtilitySpec::entropic_quadratic(0.5), UtilitySpec::entropic_quadratic(2.0)}) {
        CHECK_NOTHROW(u.validate());
        CHECK(u.V(0.0) == 0.0);
        CHECK(u.V(-1.0) == kInf);
        for (double x : {-6.0, -1.0, 0.0, 0.7, 4.0}) {
            CHECK(u.U(x) == doctest::Approx(conjugate_oracle(u, x)).epsilon(1e-9));
            const double h = 1e-5;
            CHECK(u.dU(x) == doctest::Approx((u.U(x + h) - u.U(x - h)) / (2 * h)).epsilon(1e-6));
            CHECK(u.d2U(x) == doctest::Approx((u.dU(x + h) - u.dU(x - h)) / (2 * h)).epsilon(1e-5));
        }
    }
    // far tails of the inversion stay finite and monotone
    auto eq = UtilitySpec::entropic_quadratic(1.0);
    CHECK(eq.dU(-1e8) > eq.dU(-1e6));
    CHECK(eq.dU(700.0) > 0.0);
    CHECK(eq.dU(700.0) < 1e-300);
    CHECK_THROWS_AS(UtilitySpec::exponential(0.0), Error);
    CHECK_THROWS_AS(UtilitySpec::entropic_quadratic(-1.0), Error);
}

TEST_CASE("integrand conjugates agree with brute-force suprema") {
    std::vector<IntegrandSpec> specs{IntegrandSpec::quadratic(), IntegrandSpec::exponential(),
                                     IntegrandSpec::from_utility(UtilitySpec::exponential(2.0)),
                                     IntegrandSpec::from_utility(UtilitySpec::entropic_quadratic(0.3))};
    for (const auto& s : specs) {
        for (double y : {0.2, 1.0, 3.0}) {
            double best = -kInf;
            for (int i = -400000; i <= 400000; ++i) {
                const double x = i * 2.5e-5;
                best = std::max(best, x * y - s.phi(x));
            }
            CHECK(s.conj(y) == doctest::Approx(best).epsilon(1e-8));
        }
    }
    auto shifted = IntegrandSpec::exponential().with_shift({0.5, -1.0});
    CHECK(shifted.phi_shifted(1, 2.0) == doctest::Approx(std::exp(1.0)));
    CHECK(shifted.conj_shifted(0, 2.0) == doctest::Approx(shifted.conj(2.0) - 1.0));
}

TEST_CASE("robust integral examples") {
    auto L = line_lattice(6);
    auto amb = hull(L, {std::vector<double>(6, 1.0 / 6), {0.4, 0.2, 0.1, 0.1, 0.1, 0.1}});
    const auto quad = IntegrandSpec::from_utility(UtilitySpec::exponential());
    std::vector<double> zero(6, 0.0), one(6, 1.0);
    CHECK(robust_integral(zero, IntegrandSpec::quadratic(), amb) == 0.0);
    // phi(x) = x^2/2 on f = 1 gives 1/2 under any probability
    CHECK(robust_integral(one, IntegrandSpec::quadratic(), amb) == doctest::Approx(0.5));
    std::vector<double> step{0, 0, 0, 1, 1, 1};
    const double u = (3 + 3 * std::exp(1.0)) / 6, s = 0.7 + 0.3 * std::exp(1.0);
    CHECK(robust_integral(step, IntegrandSpec::exponential(), amb) == doctest::Approx(std::max(u, s)));
    for (double c : {-2.0, 0.3, 1.5}) {
        std::vector<double> f(6, c);
        CHECK(robust_integral(f, quad, amb) == doctest::Approx(quad.phi(c)));
    }
}

TEST_CASE("single divergence examples") {
    auto V = IntegrandSpec::from_utility(UtilitySpec::exponential());
    std::vector<double> p{0.25, 0.25, 0.5};
    CHECK(divergence_single(p, p, V) == doctest::Approx(-1.0));
    std::mt19937_64 rng(1);
    for (double lambda : {0.1, 0.66, 1.0, 3.0}) {
        auto q = testing::random_pmf(rng, 3);
        std::vector<double> nu(3);
        double kl = 0.0;
        for (int i = 0; i < 3; ++i) {
            nu[i] = lambda * q[i];
            kl += q[i] * std::log(q[i] / p[i]);
        }
        CHECK(divergence_single(nu, p, V) == doctest::Approx(lambda * kl + lambda * std::log(lambda) - lambda).epsilon(1e-13));
    }
    CHECK(divergence_single(std::vector<double>{0.5, 0.5, 0.0}, std::vector<double>{1.0, 0.0, 0.0}, V) == kInf);
    CHECK(divergence_single(std::vector<double>{1.0, 0.0, 0.0}, std::vector<double>{1.0, 0.0, 0.0}, V) == doctest::Approx(-1.0));
    CHECK(divergence_single(std::vector<double>{1.5, -0.5, 0.0}, p, V) == kInf);
    CHECK_THROWS_AS(divergence_single(std::vector<double>{1.0}, p, V), Error);
}

TEST_CASE("robust divergence") {
    auto V = IntegrandSpec::from_utility(UtilitySpec::exponential());
    auto L = line_lattice(4);
    std::vector<double> p1{0.4, 0.3, 0.2, 0.1}, p2{0.05, 0.15, 0.5, 0.3};
    std::vector<double> q{0.1, 0.4, 0.3, 0.2};
    SUBCASE("singleton and duplicated hulls") {
        auto one = hull(L, {p1});
        auto two = hull(L, {p1, p1});
        CHECK(divergence_robust(q, one, V).value == doctest::Approx(divergence_single(q, p1, V)).epsilon(1e-14));
        CHECK(divergence_robust(q, two, V).value == doctest::Approx(divergence_single(q, p1, V)).epsilon(1e-12));
    }
    SUBCASE("two priors against a dense weight grid") {
        auto amb = hull(L, {p1, p2});
        double best = kInf;
        for (int i = 0; i <= 100000; ++i) {
            const double w = i / 100000.0;
            std::vector<double> pw(4);
            for (int j = 0; j < 4; ++j) pw[j] = w * p1[j] + (1 - w) * p2[j];
            best = std::min(best, divergence_single(q, pw, V));
        }
        SolveOptions o;
        o.tolerance = 1e-12;
        const auto r = divergence_robust(q, amb, V, o);
        CHECK(std::abs(r.value - best) <= 1e-6);
        CHECK(r.value <= best + 1e-12);
    }
    SUBCASE("infinite off the hull support") {
        auto amb = hull(L, {{0.5, 0.5, 0, 0}, {0, 0.5, 0.5, 0}});
        CHECK(divergence_robust(q, amb, V).value == kInf);
        CHECK(std::isfinite(divergence_robust(std::vector<double>{0.2, 0.3, 0.5, 0.0}, amb, V).value));
    }
    SUBCASE("convex along segments") {
        auto amb = hull(L, {p1, p2});
        std::mt19937_64 rng(17);
        for (int rep = 0; rep < 30; ++rep) {
            auto a = testing::random_pmf(rng, 4), b = testing::random_pmf(rng, 4);
            for (auto& v : b) v *= 2.0;
            std::vector<double> mid(4);
            for (int j = 0; j < 4; ++j) mid[j] = 0.5 * (a[j] + b[j]);
            CHECK(divergence_robust(mid, amb, V).value <=
                  0.5 * (divergence_robust(a, amb, V).value + divergence_robust(b, amb, V).value) + 1e-9);
        }
    }
}

TEST_CASE("relative entropy of the unique coupling") {
    auto sys = testing::unique_coupling();
    auto L = build_lattice(sys);
    auto amb = hull(L, {std::vector<double>(6, 1.0 / 6)});
    const std::vector<double> Q{0.25, 0.25, 0.0, 0.0, 0.25, 0.25};
    auto V = IntegrandSpec::from_utility(UtilitySpec::exponential());
    // J(Q) = E(Q|P) + 1 log 1 - 1
    CHECK(divergence_robust(Q, amb, V).value + 1.0 == doctest::Approx(std::log(1.5)).epsilon(1e-14));
}

TEST_CASE("gamma penalty examples") {
    auto util = UtilitySpec::exponential();
    SUBCASE("prior itself with u0 = -1") {
        auto L = line_lattice(3);
        std::vector<double> p{0.2, 0.3, 0.5};
        auto amb = hull(L, {p});
        auto g = gamma_penalty(p, amb, util, -1.0);
        CHECK(std::abs(g.value) <= 1e-9);
        CHECK(g.lambda == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("unique coupling") {
        auto L = build_lattice(testing::unique_coupling());
        auto amb = hull(L, {std::vector<double>(6, 1.0 / 6)});
        const std::vector<double> Q{0.25, 0.25, 0.0, 0.0, 0.25, 0.25};
        auto g = gamma_penalty(Q, amb, util, -2.0 / 3.0);
        CHECK(std::abs(g.value) <= 1e-9);
        CHECK(g.value >= 0.0);
        CHECK(g.lambda == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
        // one-dimensional oracle with the closed-form divergence
        const double E = std::log(1.5);
        double best = kInf;
        for (int i = 1; i <= 200000; ++i) {
            const double l = i * 1e-5;
            best = std::min(best, (l * E + l * std::log(l) - l + 2.0 / 3.0) / l);
        }
        CHECK(g.value == doctest::Approx(best).epsilon(1e-9));
    }
    SUBCASE("singular measure") {
        auto L = line_lattice(3);
        auto amb = hull(L, {{0.5, 0.5, 0.0}});
        try {
            gamma_penalty(std::vector<double>{0.0, 0.0, 1.0}, amb, util, -1.0);
            FAIL("expected DivergenceInfinite");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::DivergenceInfinite);
        }
    }
    SUBCASE("non-negative on random measures") {
        auto L = line_lattice(4);
        auto amb = hull(L, {{0.4, 0.3, 0.2, 0.1}, {0.1, 0.2, 0.3, 0.4}});
        std::mt19937_64 rng(4);
        // u0 below every -exp(-E)/a makes the penalty strictly positive
        for (int rep = 0; rep < 10; ++rep) {
            auto q = testing::random_pmf(rng, 4);
            CHECK(gamma_penalty(q, amb, util, -1.0).value >= 0.0);
            CHECK(gamma_penalty(q, amb, UtilitySpec::entropic_quadratic(0.5), -1.0).value >= -1e-9);
        }
    }
}

TEST_CASE("quadratic pair on two states") {
    auto L = line_lattice(2);
    auto amb = hull(L, {{0.5, 0.5}});
    const std::vector<double> nu{0.5, 0.5};
    CHECK(divergence_robust(nu, amb, IntegrandSpec::quadratic()).value == doctest::Approx(0.5));
    auto rep = conjugacy_check(IntegrandSpec::quadratic(), amb, 5, 1);
    CHECK(rep.passed);
    CHECK(rep.max_conjugate_residual <= 1e-6);
}

TEST_CASE("conjugacy harness on small hulls") {
    auto L = build_lattice(testing::unique_coupling());
    std::mt19937_64 rng(8);
    std::vector<std::vector<double>> ps;
    for (int k = 0; k < 3; ++k) ps.push_back(testing::random_pmf(rng, 6));
    ps[2][0] = 0.0;  // one prior misses a path
    double s = 0.0;
    for (double v : ps[2]) s += v;
    for (double& v : ps[2]) v /= s;
    auto amb = hull(L, ps);
    std::vector<double> B{0.3, -0.2, 0.0, 1.0, -1.0, 0.5};
    for (const auto& spec : {IntegrandSpec::quadratic(), IntegrandSpec::exponential(),
                             IntegrandSpec::from_utility(UtilitySpec::exponential(1.5)),
                             IntegrandSpec::exponential().with_shift(B)}) {
        auto rep = conjugacy_check(spec, amb, 6, 3);
        INFO(spec.name());
        INFO(rep.max_conjugate_residual, " ", rep.max_representation_residual, " ", rep.max_cone_residual, " ",
             rep.max_shift_residual, " ", rep.min_young_slack);
        CHECK(rep.passed);
    }
}

TEST_CASE("conjugacy harness size limit") {
    auto L = line_lattice(65);
    auto amb = hull(L, {std::vector<double>(65, 1.0 / 65)});
    CHECK_THROWS_AS(conjugacy_check(IntegrandSpec::quadratic(), amb, 1, 0), Error);
}
