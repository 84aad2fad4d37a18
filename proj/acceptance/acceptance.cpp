// Acceptance run: one PASS/FAIL line per criterion, with the measured
// numbers next to the thresholds.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "instances.hpp"
#include "robmot/cli.hpp"
#include "robmot/error.hpp"
#include "robmot/pricing.hpp"

using namespace robmot;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int failures = 0;

void report(const char* id, bool pass, const std::string& detail) {
    std::printf("%s %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// --------------------------------------------------------------- C1

void criterion1() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1001);
    int agree = 0, feasible = 0;
    const int total = 200;
    for (int i = 0; i < total; ++i) {
        testing::RandomOptions o;
        o.periods = 1 + i % 3;
        o.max_points = 6;
        o.feasible = i % 4 == 0;
        o.force_means = i % 2 == 0;
        const auto sys = testing::random_system(rng, o);
        const bool s = check_strassen(sys).feasible;
        const bool lp = feasibility(build_polytope(sys)).feasible;
        agree += s == lp;
        feasible += lp;
    }
    const double t = seconds_since(t0);
    report("C1", agree == total && t < 10.0,
           fmt("strassen/LP agreement %d/%d (%d feasible), %.2fs < 10s", agree, total, feasible, t));
}

// --------------------------------------------------------------- C2

void criterion2() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(2002);
    // lattices with at most 8 paths: 2x4, 2x3, 8x1
    const std::vector<MarginalSystem> systems{
        testing::four_atom(), testing::unique_coupling(),
        MarginalSystem(0.0, {Marginal(Grid({-4, -2, -1, 0, 1, 2, 3, 4}), {0.1, 0.1, 0.15, 0.2, 0.15, 0.1, 0.1, 0.1})})};
    const std::vector<std::pair<std::string, IntegrandSpec>> base{
        {"x^2/2", IntegrandSpec::quadratic()},
        {"e^x", IntegrandSpec::exponential()},
        {"exp-utility", IntegrandSpec::from_utility(UtilitySpec::exponential(1.5))}};
    const std::size_t per_config = 9;  // 6 configurations x 9 = 54 draws
    std::size_t draws = 0;
    double conj = 0, rep = 0, cone = 0, shift = 0, young = 0;
    bool ok = true;
    int config = 0;
    for (const auto& [name, spec0] : base) {
        for (int shifted = 0; shifted < 2; ++shifted, ++config) {
            const auto& sys = systems[config % systems.size()];
            auto L = build_lattice(sys);
            const std::size_t n = L->path_count();
            std::vector<PathMeasure> priors;
            for (std::size_t k = 0; k < 1 + config % 3; ++k) priors.emplace_back(L, testing::random_pmf(rng, n));
            AmbiguitySet amb(std::move(priors));
            IntegrandSpec spec = spec0;
            if (shifted) {
                std::uniform_real_distribution<double> u(-1.0, 1.0);
                std::vector<double> B(n);
                for (double& b : B) b = u(rng);
                spec = spec0.with_shift(B);
            }
            const auto r = conjugacy_check(spec, amb, per_config, 77 + config);
            draws += r.trials;
            ok = ok && r.passed;
            conj = std::max(conj, r.max_conjugate_residual);
            rep = std::max(rep, r.max_representation_residual);
            cone = std::max(cone, r.max_cone_residual);
            shift = std::max(shift, r.max_shift_residual);
            young = std::min(young, r.min_young_slack);
        }
    }
    const double t = seconds_since(t0);
    const bool tol = conj <= 1e-4 && rep <= 1e-4 && cone <= 1e-4 && shift <= 1e-4 && young >= -1e-4;
    report("C2", ok && tol && draws >= 50 && t < 60.0,
           fmt("%zu draws; max residuals conj %.1e rep %.1e cone %.1e shift %.1e, min Young slack %.1e (tol 1e-4), "
               "%.1fs < 60s",
               draws, conj, rep, cone, shift, young, t));
}

// --------------------------------------------------------------- C3

PricingInputs random_inputs(std::mt19937_64& rng, std::size_t m, UtilitySpec util, int pushes = 1) {
    testing::RandomOptions o;
    o.max_points = 5;
    o.pushes = pushes;
    auto sys = testing::random_system(rng, o);
    auto L = build_lattice(sys);
    std::uniform_real_distribution<double> th(-1.0, 1.0);
    std::vector<std::vector<double>> ps{prior_independent(sys, *L)};
    while (ps.size() < m) {
        switch (rng() % 3) {
            case 0: ps.push_back(prior_tilted(sys, *L, th(rng))); break;
            case 1: ps.push_back(prior_uniform(*L)); break;
            default: ps.push_back(testing::random_pmf(rng, L->path_count()));
        }
    }
    return make_inputs(sys, ps, util);
}

void criterion3() {
    std::mt19937_64 rng(3003);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const double a = i % 2 ? 0.5 : 1.0 + 0.1 * i;
        auto in = random_inputs(rng, 1 + i % 3, UtilitySpec::exponential(a));
        const auto& L = *in.poly.lattice();
        std::vector<double> psi;
        if (i % 3 == 0) psi = Payoff::straddle(1, 2).evaluate(L);
        else if (i % 3 == 1) psi = Payoff::lookback().evaluate(L);
        else psi = Payoff::asian_call(0.25).evaluate(L);
        const double x = i % 3 - 1.0;
        DualOptions generic;
        generic.closed_form = false;
        const double c = dual_value(x, psi, in).value;
        const double g = dual_value(x, psi, in, generic).value;
        worst = std::max(worst, std::abs(c - g) / std::abs(c));
    }
    auto sys = testing::unique_coupling();
    auto L = build_lattice(sys);
    auto in = make_inputs(sys, {prior_uniform(*L)}, UtilitySpec::exponential());
    const auto d = dual_value(0.0, std::vector<double>(6, 0.0), in);
    const double du = std::abs(d.value + 2.0 / 3.0), de = std::abs(d.divergence - std::log(1.5));
    report("C3", worst <= 1e-6 && du <= 1e-9 && de <= 1e-12,
           fmt("generic vs closed form max rel diff %.1e (tol 1e-6) on 20; |u0+2/3| %.1e (tol 1e-9); "
               "|E-log1.5| %.1e (tol 1e-12)",
               worst, du, de));
}

// ------------------------------------------------------------ C4 .. C8

struct Run {
    PricingInputs in;
    std::vector<double> psi;
    double x;
    std::string label;
};

std::vector<Run> criterion4_runs() {
    std::mt19937_64 rng(4004);
    std::vector<Run> runs;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 40; ++i) {
        auto util = i % 2 ? UtilitySpec::entropic_quadratic(0.25 + 0.25 * (i % 4)) : UtilitySpec::exponential(0.5 + 0.25 * (i % 3));
        auto in = random_inputs(rng, 1 + (i / 2) % 3, util, 3);
        const auto& L = *in.poly.lattice();
        std::vector<double> psi;
        std::string kind;
        switch ((i / 6) % 3) {
            case 0: psi = Payoff::straddle(1, 2).evaluate(L); kind = "straddle"; break;
            case 1: psi = Payoff::asian_call(0.5 * u(rng)).evaluate(L); kind = "asian-call"; break;
            default:
                psi.resize(L.path_count());
                for (double& v : psi) v = 2.0 * u(rng);
                kind = "table";
        }
        const double x = static_cast<double>(i % 3) - 1.0;
        runs.push_back(Run{std::move(in), std::move(psi), x, kind + "/" + util.name()});
    }
    return runs;
}

void criteria4to8() {
    const auto runs = criterion4_runs();

    // C4
    auto t0 = std::chrono::steady_clock::now();
    int within = 0, weak_ok = 0;
    double worst_gap = 0.0;
    std::vector<double> primal_values;
    for (const auto& r : runs) {
        const auto d = dual_value(r.x, r.psi, r.in);
        const auto p = primal_value(r.x, r.psi, r.in);
        const double rel = (d.value - p.value) / std::abs(d.value);
        primal_values.push_back(p.value);
        weak_ok += p.value <= d.value + 1e-12 * std::max(1.0, std::abs(d.value));
        within += rel <= 1e-3;
        worst_gap = std::max(worst_gap, rel);
        if (rel > 1e-3) std::printf("   C4 soft failure %s: relative gap %.2e\n", r.label.c_str(), rel);
    }
    double t = seconds_since(t0);
    report("C4", weak_ok == 40 && within >= 38 && t < 300.0,
           fmt("primal <= dual on %d/40; rel gap <= 1e-3 on %d/40 (need 38), max %.1e; %.1fs < 300s", weak_ok, within,
               worst_gap, t));

    // C5 and C6 (sandwich part)
    t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(5005);
    std::uniform_real_distribution<double> bump(0.0, 0.5);
    int agree = 0, cash = 0, mono = 0, sandwich = 0, strict = 0;
    double worst_route = 0.0, worst_cash = 0.0, worst_mono = -1e300, worst_sand = -1e300;
    for (const auto& r : runs) {
        PriceOptions po;
        po.throw_on_mismatch = false;
        const auto ip = indifference_prices(r.psi, r.in, po);
        agree += ip.disagreement <= 1e-4;
        worst_route = std::max(worst_route, ip.disagreement);

        const double c = 0.37;
        std::vector<double> shifted = r.psi, bigger = r.psi;
        for (std::size_t p = 0; p < r.psi.size(); ++p) {
            shifted[p] += c;
            bigger[p] += bump(rng);
        }
        const double s1 = seller_price_penalty(shifted, r.in, ip.u0_dual).penalty;
        const double s2 = seller_price_penalty(bigger, r.in, ip.u0_dual).penalty;
        const double dc = std::abs(s1 - ip.p_sell - c);
        cash += dc <= 1e-6;
        worst_cash = std::max(worst_cash, dc);
        mono += ip.p_sell <= s2 + 1e-9;
        worst_mono = std::max(worst_mono, ip.p_sell - s2);

        const auto mot = mot_bounds(r.in.poly, r.psi);
        const double v = std::max({mot.low - 1e-6 - ip.p_buy, ip.p_buy - ip.p_sell - 1e-9, ip.p_sell - mot.high - 1e-6});
        sandwich += v <= 0.0;
        strict += mot.high - mot.low > 1e-6;
        worst_sand = std::max(worst_sand, v);
    }
    t = seconds_since(t0);
    report("C5", agree == 40 && cash == 40 && mono == 40,
           fmt("routes agree %d/40 (max %.1e x scale, tol 1e-4); cash invariance %d/40 (max %.1e, tol 1e-6); "
               "monotone %d/40 (max p1-p2 %.1e); %.1fs",
               agree, worst_route, cash, worst_cash, mono, worst_mono, t));

    // C6 vanilla part
    int vanilla = 0;
    double worst_van = 0.0;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 10; ++i) {
        auto in = random_inputs(rng, 1 + i % 3, i % 2 ? UtilitySpec::entropic_quadratic(0.5) : UtilitySpec::exponential());
        const std::size_t mat = 1 + i % 2;
        PiecewiseLinear g;
        double k = -3.0;
        for (int j = 0; j < 2 + i % 3; ++j) {
            g.knots.push_back(k);
            g.values.push_back(2.0 * u(rng));
            k += 0.5 + std::abs(u(rng)) * 2.0;
        }
        const auto psi = Payoff::vanilla(mat, g).evaluate(*in.poly.lattice());
        std::vector<double> gv;
        for (double xg : in.sys.marginals[mat - 1].grid().points()) gv.push_back(g(xg));
        const double mu_g = in.sys.marginals[mat - 1].expect(gv);
        PriceOptions po;
        po.throw_on_mismatch = false;
        const auto ip = indifference_prices(psi, in, po);
        const double e = std::max(std::abs(ip.p_sell - mu_g), std::abs(ip.p_buy - mu_g));
        vanilla += e <= 1e-6;
        worst_van = std::max(worst_van, e);
    }
    report("C6", sandwich == 40 && vanilla == 10,
           fmt("sandwich %d/40, %d with mot_low < mot_high (worst slack %.1e); vanilla p_sell=p_buy=mu(g) %d/10 (max err %.1e, tol 1e-6)", sandwich,
               strict, worst_sand, vanilla, worst_van));

    // C8 (C7 runs on its own instances below)
    int same = 0, exact = 0;
    double worst_basis = 0.0, worst_rec = 0.0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& r = runs[i];
        PrimalOptions calls;
        calls.basis = StaticBasis::Calls;
        const auto pc = primal_value(r.x, r.psi, r.in, calls);
        const auto pi = primal_value(r.x, r.psi, r.in);
        const double dv = std::abs(pc.value - primal_values[i]);
        same += dv < 1e-6;
        worst_basis = std::max(worst_basis, dv);
        double rec = 0.0;
        const auto dcmp = call_span_restrict(pi.statics, r.in.sys);
        for (std::size_t tt = 0; tt < pi.statics.f.size(); ++tt)
            for (std::size_t j = 0; j < pi.statics.f[tt].size(); ++j)
                rec = std::max(rec, std::abs(dcmp.reconstructed.f[tt][j] - pi.statics.f[tt][j]) /
                                        (1.0 + std::abs(pi.statics.f[tt][j])));
        exact += rec <= 1e-12;
        worst_rec = std::max(worst_rec, rec);
    }
    report("C8", same == 40 && exact == 40,
           fmt("call-span primal change < 1e-6 on %d/40 (max %.1e); statics rebuilt from calls %d/40 (max rel err %.1e)",
               same, worst_basis, exact, worst_rec));
}

// --------------------------------------------------------------- C7

void criterion7() {
    std::mt19937_64 rng(7007);
    int found = 0, passed = 0, tried = 0;
    double worst = 0.0;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    while (found < 6 && tried < 200) {
        ++tried;
        testing::RandomOptions o;
        o.max_points = 4;
        const auto sys = testing::random_system(rng, o);
        auto poly = build_polytope(sys);
        const auto& L = *poly.lattice();
        std::vector<double> psi;
        switch (tried % 3) {
            case 0: psi = Payoff::straddle(1, 2).evaluate(L); break;
            case 1: psi = Payoff::lookback().evaluate(L); break;
            default:
                psi.resize(L.path_count());
                for (double& v : psi) v = u(rng);
        }
        const auto mot = mot_bounds(poly, psi);
        if (mot.high - mot.low < 1e-3) continue;
        try {
            const auto r = trivial_case_check(sys, psi);
            ++found;
            passed += r.passed;
            worst = std::max({worst, std::abs(r.p_sell - r.mot_high), std::abs(r.p_buy - r.mot_low)});
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::HarnessLimit) throw;
        }
    }
    report("C7", found >= 5 && passed == found,
           fmt("%d/%d instances with mot_low < mot_high price at the bounds (max err %.1e, tol 1e-4)", passed, found,
               worst));
}

// --------------------------------------------------------------- C9

void criterion9() {
    std::vector<std::string> texts;
    for (const char* f : {"unique_coupling.json", "four_atom_quotes.json", "vanilla.json", "zero_claim.json"}) {
        std::FILE* fp = std::fopen((std::string(ROBMOT_DATA_DIR) + "/" + f).c_str(), "rb");
        if (!fp) continue;
        std::string s;
        char buf[4096];
        std::size_t n;
        while ((n = std::fread(buf, 1, sizeof buf, fp)) > 0) s.append(buf, n);
        std::fclose(fp);
        texts.push_back(s);
    }
    texts.push_back(R"({"s0": 0, "marginals": [{"grid": [-1, 1], "pmf": [0.5, 0.5]},
        {"grid": [-2, -1, 0, 1, 2], "pmf": [0.15, 0.2, 0.3, 0.2, 0.15]}],
        "priors": [{"kind": "independent"}, {"kind": "tilted", "theta": 0.8}, {"kind": "uniform"}],
        "utility": {"kind": "entropic_quadratic", "kappa": 1.0},
        "payoff": {"builtin": "asian-call", "strike": 0.2}, "x": -1})");
    int identical = 0;
    for (const auto& t : texts) {
        const auto inst = cli::parse_instance(t);
        cli::RunOptions o;
        o.seed = 5;
        const auto a = cli::cmd_price(inst, o).report.dump(2);
        const auto b = cli::cmd_price(inst, o).report.dump(2);
        const auto c = cli::cmd_price(inst, o).report.dump(2);
        identical += a == b && b == c;
    }
    report("C9", identical == static_cast<int>(texts.size()) && texts.size() >= 5,
           fmt("byte-identical price reports over 3 runs: %d/%zu instances", identical, texts.size()));
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<void()>>> steps{
        {"C1", criterion1}, {"C2", criterion2}, {"C3", criterion3}, {"C4-C6,C8", criteria4to8},
        {"C7", criterion7}, {"C9", criterion9}};
    for (const auto& [id, fn] : steps) {
        try {
            fn();
        } catch (const std::exception& e) {
            report(id, false, std::string("aborted: ") + e.what());
        }
    }
    std::printf("%s: %d failing\n", failures ? "FAILED" : "ALL PASSED", failures);
    return failures ? 1 : 0;
}
