#include "robmot/cli.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace robmot::cli {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

[[noreturn]] void parse_fail(const std::string& where, const std::string& what) {
    throw Error(ErrorKind::ParseError, where + ": " + what);
}

void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
    if (!j.is_object()) parse_fail(where, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys) known = known || it.key() == k;
        if (!known) parse_fail(where, "unknown field '" + it.key() + "'");
    }
}

const json& need(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) parse_fail(where, std::string("missing field '") + key + "'");
    return j.at(key);
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) parse_fail(where, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) parse_fail(where, "number is not finite");
    return v;
}

std::size_t index(const json& j, const std::string& where) {
    if (!j.is_number_unsigned()) parse_fail(where, "expected a non-negative integer");
    return j.get<std::size_t>();
}

std::vector<double> numbers(const json& j, const std::string& where) {
    if (!j.is_array()) parse_fail(where, "expected an array of numbers");
    std::vector<double> v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
    return v;
}

std::string text(const json& j, const std::string& where) {
    if (!j.is_string()) parse_fail(where, "expected a string");
    return j.get<std::string>();
}

Marginal parse_marginal(const json& j, std::size_t t, double s0) {
    const std::string where = "marginals[" + std::to_string(t) + "]";
    if (!j.is_object()) parse_fail(where, "expected an object");
    if (j.contains("grid") || j.contains("pmf")) {
        only_keys(j, {"grid", "pmf"}, where);
        return Marginal(Grid(numbers(need(j, "grid", where), where + ".grid")), numbers(need(j, "pmf", where), where + ".pmf"));
    }
    only_keys(j, {"strikes", "call_prices"}, where);
    CallQuoteCurve c;
    c.maturity_index = static_cast<int>(t + 1);
    c.strikes = numbers(need(j, "strikes", where), where + ".strikes");
    c.prices = numbers(need(j, "call_prices", where), where + ".call_prices");
    return marginal_from_call_quotes(c, s0);
}

PriorSpec parse_prior(const json& j, std::size_t k) {
    const std::string where = "priors[" + std::to_string(k) + "]";
    if (!j.is_object()) parse_fail(where, "expected an object");
    PriorSpec p;
    p.kind = text(need(j, "kind", where), where + ".kind");
    if (p.kind == "uniform" || p.kind == "independent") {
        only_keys(j, {"kind"}, where);
    } else if (p.kind == "tilted") {
        only_keys(j, {"kind", "theta"}, where);
        p.theta = number(need(j, "theta", where), where + ".theta");
    } else if (p.kind == "explicit") {
        only_keys(j, {"kind", "weights"}, where);
        p.weights = numbers(need(j, "weights", where), where + ".weights");
    } else {
        parse_fail(where, "unknown prior kind '" + p.kind + "'");
    }
    return p;
}

UtilitySpec parse_utility(const json& j) {
    const std::string where = "utility";
    if (!j.is_object()) parse_fail(where, "expected an object");
    const auto kind = text(need(j, "kind", where), where + ".kind");
    if (kind == "exponential") {
        only_keys(j, {"kind", "a"}, where);
        return UtilitySpec::exponential(j.contains("a") ? number(j["a"], "utility.a") : 1.0);
    }
    if (kind == "entropic_quadratic") {
        only_keys(j, {"kind", "kappa"}, where);
        return UtilitySpec::entropic_quadratic(number(need(j, "kappa", where), "utility.kappa"));
    }
    parse_fail(where, "unknown utility kind '" + kind + "'");
}

Payoff parse_payoff(const json& j) {
    const std::string where = "payoff";
    if (!j.is_object()) parse_fail(where, "expected an object");
    if (j.contains("table")) {
        only_keys(j, {"table"}, where);
        return Payoff::table(numbers(j["table"], "payoff.table"));
    }
    const auto name = text(need(j, "builtin", where), "payoff.builtin");
    if (name == "forward") {
        only_keys(j, {"builtin"}, where);
        return Payoff::forward();
    }
    if (name == "straddle") {
        only_keys(j, {"builtin", "i", "j"}, where);
        return Payoff::straddle(index(need(j, "i", where), "payoff.i"), index(need(j, "j", where), "payoff.j"));
    }
    if (name == "asian-call") {
        only_keys(j, {"builtin", "strike"}, where);
        return Payoff::asian_call(number(need(j, "strike", where), "payoff.strike"));
    }
    if (name == "vanilla") {
        only_keys(j, {"builtin", "maturity", "knots", "values"}, where);
        PiecewiseLinear g{numbers(need(j, "knots", where), "payoff.knots"), numbers(need(j, "values", where), "payoff.values")};
        return Payoff::vanilla(index(need(j, "maturity", where), "payoff.maturity"), std::move(g));
    }
    if (name == "lookback") {
        only_keys(j, {"builtin"}, where);
        return Payoff::lookback();
    }
    parse_fail(where, "unknown builtin '" + name + "'");
}

SolveOptions parse_solver(const json& j, std::size_t& trials) {
    only_keys(j, {"tolerance", "max_iterations", "seed", "conjugacy_trials"}, "solver");
    SolveOptions o;
    if (j.contains("tolerance")) {
        o.tolerance = number(j["tolerance"], "solver.tolerance");
        if (!(o.tolerance > 0.0)) parse_fail("solver.tolerance", "must be positive");
    }
    if (j.contains("max_iterations")) o.max_iterations = static_cast<long>(index(j["max_iterations"], "solver.max_iterations"));
    if (j.contains("seed")) o.seed = index(j["seed"], "solver.seed");
    if (j.contains("conjugacy_trials")) trials = index(j["conjugacy_trials"], "solver.conjugacy_trials");
    return o;
}

SolveOptions solve_options(const Instance& inst, const RunOptions& opts) {
    SolveOptions o = inst.solve;
    if (opts.seed) o.seed = *opts.seed;
    if (opts.tolerance) o.tolerance = *opts.tolerance;
    return o;
}

PricingInputs inputs(const Instance& inst, const RunOptions& opts) {
    const auto sys = inst.system();
    auto lattice = build_lattice(sys, opts.max_paths);
    return make_inputs(sys, prior_weights(inst, *lattice), inst.util);
}

std::vector<double> payoff_values(const Instance& inst, const PricingInputs& in) {
    if (!inst.payoff) throw Error(ErrorKind::ParseError, "payoff: required by this command");
    return inst.payoff->evaluate(*in.poly.lattice());
}

ojson header(const char* command, const Instance& inst, const RunOptions& opts) {
    ojson r;
    r["schema_version"] = kSchemaVersion;
    r["command"] = command;
    r["seed"] = solve_options(inst, opts).seed;
    return r;
}

ojson violation_doc(const std::optional<StrassenViolation>& v) {
    if (!v) return nullptr;
    ojson d;
    d["kind"] = v->kind == StrassenViolation::Kind::Mean ? "mean" : "convex_order";
    d["maturity"] = v->index;
    d["k"] = v->k;
    d["lhs"] = v->lhs;
    d["rhs"] = v->rhs;
    return d;
}

ojson utility_doc(const UtilitySpec& u) {
    ojson d;
    d["kind"] = u.kind() == UtilityKind::Exponential ? "exponential" : "entropic_quadratic";
    d["parameter"] = u.parameter();
    return d;
}

ojson routes_doc(const SellerRoutes& r) {
    ojson d;
    d["penalty_route"] = r.penalty;
    d["bisection_route"] = r.bisection;
    d["gamma"] = r.gamma;
    d["gap"] = r.gap;
    return d;
}

ojson property(const char* name, bool passed) {
    ojson p;
    p["name"] = name;
    p["passed"] = passed;
    return p;
}

}  // namespace

// ------------------------------------------------------------- parsing

Instance parse_instance(std::string_view text_in) {
    json j;
    try {
        j = json::parse(text_in);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("malformed JSON: ") + e.what());
    }
    only_keys(j, {"s0", "marginals", "priors", "utility", "payoff", "x", "solver"}, "instance");
    Instance inst;
    inst.s0 = number(need(j, "s0", "instance"), "s0");
    const auto& ms = need(j, "marginals", "instance");
    if (!ms.is_array() || ms.empty()) parse_fail("marginals", "expected a non-empty array");
    for (std::size_t t = 0; t < ms.size(); ++t) inst.marginals.push_back(parse_marginal(ms[t], t, inst.s0));
    if (j.contains("priors")) {
        const auto& ps = j["priors"];
        if (!ps.is_array() || ps.empty()) parse_fail("priors", "expected a non-empty array");
        for (std::size_t k = 0; k < ps.size(); ++k) inst.priors.push_back(parse_prior(ps[k], k));
    } else {
        inst.priors.push_back(PriorSpec{"uniform", 0.0, {}});
    }
    if (j.contains("utility")) inst.util = parse_utility(j["utility"]);
    if (j.contains("payoff")) inst.payoff = parse_payoff(j["payoff"]);
    if (j.contains("x")) inst.x = number(j["x"], "x");
    if (j.contains("solver")) inst.solve = parse_solver(j["solver"], inst.conjugacy_trials);
    return inst;
}

Instance load_instance(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorKind::ParseError, "cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_instance(ss.str());
}

std::vector<std::vector<double>> prior_weights(const Instance& inst, const PathLattice& lattice) {
    const auto sys = inst.system();
    std::vector<std::vector<double>> out;
    for (std::size_t k = 0; k < inst.priors.size(); ++k) {
        const auto& p = inst.priors[k];
        if (p.kind == "uniform") out.push_back(prior_uniform(lattice));
        else if (p.kind == "independent") out.push_back(prior_independent(sys, lattice));
        else if (p.kind == "tilted") out.push_back(prior_tilted(sys, lattice, p.theta));
        else {
            if (p.weights.size() != lattice.path_count())
                throw Error(ErrorKind::ParseError, "priors[" + std::to_string(k) + "].weights: expected " +
                                                       std::to_string(lattice.path_count()) + " entries");
            out.push_back(p.weights);
        }
    }
    return out;
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ParseError:
        case ErrorKind::InvalidInput:
        case ErrorKind::LatticeMismatch: return kParse;
        case ErrorKind::SizeLimit:
        case ErrorKind::HarnessLimit: return kLimit;
        default: return kInfeasible;
    }
}

// ------------------------------------------------------------ commands

CommandResult cmd_validate(const Instance& inst, const RunOptions& opts) {
    CommandResult res;
    auto& r = res.report;
    r = header("validate", inst, opts);
    const auto sys = inst.system();
    ojson means = ojson::array();
    for (const auto& m : sys.marginals) means.push_back(m.mean());
    const auto verdict = check_strassen(sys);
    const auto poly = build_polytope(sys, opts.max_paths);
    const auto lp = feasibility(poly, solve_options(inst, opts));
    r["feasible"] = verdict.feasible && lp.feasible;
    r["marginal_means"] = means;
    r["strassen"] = {{"feasible", verdict.feasible}, {"violation", violation_doc(verdict.violation)}};
    r["lp_feasible"] = lp.feasible;
    r["agree"] = verdict.feasible == lp.feasible;
    const std::size_t mrows = poly.marginal_row_count();
    r["polytope"] = {{"paths", poly.lattice()->path_count()},
                     {"active_paths", poly.dimension()},
                     {"rows", poly.row_count()},
                     {"marginal_rows", mrows},
                     {"martingale_rows", poly.row_count() - mrows}};
    res.exit_code = verdict.feasible && lp.feasible ? kOk : kInfeasible;
    return res;
}

CommandResult cmd_mot(const Instance& inst, const RunOptions& opts) {
    const auto in = inputs(inst, opts);
    const auto psi = payoff_values(inst, in);
    const auto b = mot_bounds(in.poly, psi, solve_options(inst, opts));
    CommandResult res;
    auto& r = res.report;
    r = header("mot", inst, opts);
    r["payoff"] = inst.payoff->name();
    r["mot_low"] = b.low;
    r["mot_high"] = b.high;
    r["q_low"] = b.q_low;
    r["q_high"] = b.q_high;
    return res;
}

CommandResult cmd_price(const Instance& inst, const RunOptions& opts) {
    const auto in = inputs(inst, opts);
    const auto psi = payoff_values(inst, in);
    PriceOptions po;
    po.solve = solve_options(inst, opts);
    const auto rep = price(inst.x, psi, in, po);

    CommandResult res;
    auto& r = res.report;
    r = header("price", inst, opts);
    r["payoff"] = inst.payoff->name();
    r["utility"] = utility_doc(inst.util);
    r["paths"] = in.amb.path_count();
    r["priors"] = in.amb.size();
    r["x"] = inst.x;
    r["mot_low"] = rep.mot.low;
    r["mot_high"] = rep.mot.high;
    r["u0_at_0"] = rep.u0_at_0;
    r["u_psi_at_x"] = rep.dual.value;
    ojson dual;
    dual["value"] = rep.dual.value;
    dual["lambda"] = rep.dual.lambda;
    dual["divergence"] = rep.dual.divergence;
    dual["weights"] = rep.dual.weights;
    dual["q"] = rep.dual.q;
    dual["gap"] = rep.dual.gap;
    dual["converged"] = rep.dual.converged;
    dual["at_lower_edge"] = rep.dual.at_lower_edge;
    dual["closed_form"] = rep.dual.closed_form;
    r["dual"] = dual;
    ojson primal;
    primal["value"] = rep.primal.value;
    primal["unbounded"] = rep.primal.unbounded;
    primal["newton_steps"] = rep.primal.newton_steps;
    primal["dynamic"] = rep.primal.dynamic.h;
    primal["static"] = rep.primal.statics.f;
    r["primal"] = primal;
    r["duality_gap"] = rep.duality_gap;
    r["p_sell"] = rep.prices.p_sell;
    r["p_buy"] = rep.prices.p_buy;
    ojson diag;
    diag["sell_routes"] = routes_doc(rep.prices.sell);
    ojson buy = routes_doc(rep.prices.buy);
    buy["penalty_route"] = -rep.prices.buy.penalty;
    buy["bisection_route"] = -rep.prices.buy.bisection;
    diag["buy_routes"] = buy;
    diag["u0_primal"] = rep.prices.u0_primal;
    diag["scale"] = rep.prices.scale;
    diag["route_disagreement"] = rep.prices.disagreement;
    diag["growth_bound"] = rep.growth;
    diag["polytope_rows"] = in.poly.row_count();
    r["diagnostics"] = diag;
    return res;
}

CommandResult cmd_verify(const Instance& inst, const RunOptions& opts) {
    const auto solve = solve_options(inst, opts);
    const auto in = inputs(inst, opts);
    const auto& L = *in.poly.lattice();
    if (L.path_count() > 64)
        throw Error(ErrorKind::HarnessLimit, "verification needs at most 64 paths, lattice has " +
                                                 std::to_string(L.path_count()));
    const auto psi = inst.payoff ? inst.payoff->evaluate(L) : std::vector<double>(L.path_count(), 0.0);

    CommandResult res;
    auto& r = res.report;
    r = header("verify", inst, opts);
    ojson props = ojson::array();

    const auto strassen = check_strassen(in.sys);
    const auto lp = feasibility(in.poly, solve);
    auto p = property("strassen_lp_agreement", strassen.feasible == lp.feasible);
    p["feasible"] = lp.feasible;
    props.push_back(p);
    if (!lp.feasible) {
        r["properties"] = props;
        r["passed"] = false;
        res.exit_code = kInfeasible;
        return res;
    }

    const auto V = IntegrandSpec::from_utility(in.util);
    for (const auto& spec : {V, V.with_shift(psi)}) {
        const auto c = conjugacy_check(spec, in.amb, inst.conjugacy_trials, solve.seed);
        p = property(spec.shift().empty() ? "conjugacy" : "conjugacy_shifted", c.passed);
        p["trials"] = c.trials;
        p["conjugate_residual"] = c.max_conjugate_residual;
        p["representation_residual"] = c.max_representation_residual;
        p["cone_residual"] = c.max_cone_residual;
        p["shift_residual"] = c.max_shift_residual;
        p["young_slack"] = c.min_young_slack;
        props.push_back(p);
    }

    // sampled weak duality: E_P U(x + H.S + Gamma_f - psi) <= J(lambda Q | P) - lambda E_Q psi + lambda x
    {
        std::mt19937_64 rng(solve.seed);
        std::normal_distribution<double> nrm(0.0, 0.5);
        std::uniform_real_distribution<double> lam(0.1, 3.0);
        const auto verts = enumerate_vertices(in.poly, 64);
        double worst = -std::numeric_limits<double>::infinity();
        const int samples = 50;
        for (int s = 0; s < samples; ++s) {
            DynamicStrategy h{std::vector<double>(L.node_count())};
            for (double& v : h.h) v = nrm(rng);
            StaticPosition f;
            for (const auto& m : in.sys.marginals) {
                std::vector<double> v(m.size());
                for (double& e : v) e = nrm(rng);
                f.f.push_back(v);
            }
            const double x = nrm(rng), l = lam(rng);
            const auto& q = verts[rng() % verts.size()];
            const auto& P = in.amb.prior(rng() % in.amb.size());
            double lhs = 0.0, eq = 0.0;
            std::vector<double> nu(q.size());
            for (std::size_t w = 0; w < L.path_count(); ++w) {
                lhs += P[w] * in.util.U(x + gain_dynamic(L, h, w) + gain_static(f, in.sys, L, w) - psi[w]);
                nu[w] = l * q[w];
                eq += q[w] * psi[w];
            }
            const double rhs = divergence_single(nu, P.weights(), V) - l * eq + l * x;
            worst = std::max(worst, lhs - rhs);
        }
        p = property("weak_duality", worst <= 1e-10);
        p["samples"] = samples;
        p["max_violation"] = worst;
        props.push_back(p);
    }

    PriceOptions po;
    po.solve = solve;
    po.throw_on_mismatch = false;
    const auto rep = price(inst.x, psi, in, po);
    const double rel = rep.duality_gap / std::max(1.0, std::abs(rep.dual.value));
    p = property("duality_gap", rep.primal.value <= rep.dual.value + 1e-10 && rel <= 1e-3);
    p["dual"] = rep.dual.value;
    p["primal"] = rep.primal.value;
    p["relative_gap"] = rel;
    props.push_back(p);

    p = property("sandwich", rep.mot.low - 1e-6 <= rep.prices.p_buy && rep.prices.p_buy <= rep.prices.p_sell + 1e-9 &&
                                 rep.prices.p_sell <= rep.mot.high + 1e-6);
    p["mot_low"] = rep.mot.low;
    p["p_buy"] = rep.prices.p_buy;
    p["p_sell"] = rep.prices.p_sell;
    p["mot_high"] = rep.mot.high;
    props.push_back(p);

    p = property("route_agreement", rep.prices.disagreement <= 1e-4);
    p["disagreement"] = rep.prices.disagreement;
    props.push_back(p);

    const auto t = trivial_case_check(in.sys, psi, solve);
    p = property("trivial_case", t.passed);
    p["vertices"] = t.vertices;
    p["p_sell_minus_mot_high"] = t.p_sell - t.mot_high;
    p["p_buy_minus_mot_low"] = t.p_buy - t.mot_low;
    props.push_back(p);

    bool all = true;
    for (const auto& q : props) all = all && q["passed"].get<bool>();
    r["properties"] = props;
    r["passed"] = all;
    res.exit_code = all ? kOk : kInfeasible;
    return res;
}

CommandResult run(const std::string& command, const std::string& path, const RunOptions& opts) {
    try {
        const auto inst = load_instance(path);
        if (command == "validate") return cmd_validate(inst, opts);
        if (command == "mot") return cmd_mot(inst, opts);
        if (command == "price") return cmd_price(inst, opts);
        if (command == "verify") return cmd_verify(inst, opts);
        throw Error(ErrorKind::ParseError, "unknown command '" + command + "'");
    } catch (const Error& e) {
        CommandResult res;
        res.exit_code = exit_code_for(e.kind());
        res.report["schema_version"] = kSchemaVersion;
        res.report["command"] = command;
        res.report["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
        return res;
    }
}

}  // namespace robmot::cli
