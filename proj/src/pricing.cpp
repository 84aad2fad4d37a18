#include "robmot/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "robmot/error.hpp"
#include "robmot/kernels.hpp"

namespace robmot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

std::vector<double> negated(std::span<const double> v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = -v[i];
    return out;
}

void check_length(std::span<const double> psi, const PricingInputs& in) {
    if (psi.size() != in.poly.lattice()->path_count())
        throw Error(ErrorKind::LatticeMismatch, "payoff length differs from the path count");
}

// Calibrated measures can only charge paths some prior charges; anything
// else has infinite divergence. Restricting up front keeps every Frank-Wolfe
// iterate inside the domain.
MartingalePolytope supported_polytope(const PricingInputs& in) {
    const std::size_t n = in.amb.path_count();
    std::vector<char> keep(n, 0);
    for (std::size_t k = 0; k < in.amb.size(); ++k)
        for (std::size_t p = 0; p < n; ++p)
            if (in.amb.prior(k)[p] > 0.0) keep[p] = 1;
    auto poly = in.poly.restrict_to(keep);
    if (!feasibility(poly).feasible)
        throw Error(ErrorKind::AssumptionViolated, "no calibrated martingale measure is dominated by the priors");
    return poly;
}

// J(nu | P_w) with w frozen between refreshes, as a Frank-Wolfe majorant.
struct FrozenMixture {
    const AmbiguitySet* amb;
    IntegrandSpec spec;
    SolveOptions opts;
    std::vector<double> w;
    std::vector<double> pw;

    FrozenMixture(const AmbiguitySet& a, IntegrandSpec s, const SolveOptions& o)
        : amb(&a), spec(std::move(s)), opts(o), w(a.size(), 1.0 / static_cast<double>(a.size())), pw(a.mixture(w)) {}

    void refresh(std::span<const double> nu) {
        if (amb->size() == 1) return;
        const auto r = divergence_robust(nu, *amb, spec, opts, w);
        if (std::isfinite(r.value)) {
            w = r.weights;
            pw = amb->mixture(w);
        }
    }
};

}  // namespace

// ---------------------------------------------------------------- payoffs

void PiecewiseLinear::validate() const {
    if (knots.empty() || knots.size() != values.size())
        throw Error(ErrorKind::InvalidInput, "piecewise-linear function needs matching knots and values");
    for (std::size_t i = 0; i < knots.size(); ++i) {
        if (!std::isfinite(knots[i]) || !std::isfinite(values[i]))
            throw Error(ErrorKind::InvalidInput, "piecewise-linear function has a non-finite entry");
        if (i > 0 && knots[i] <= knots[i - 1])
            throw Error(ErrorKind::InvalidInput, "piecewise-linear knots must increase strictly");
    }
}

double PiecewiseLinear::operator()(double x) const {
    if (knots.size() == 1) return values[0];
    std::size_t j = static_cast<std::size_t>(std::upper_bound(knots.begin(), knots.end(), x) - knots.begin());
    j = std::clamp<std::size_t>(j, 1, knots.size() - 1);
    const double t = (x - knots[j - 1]) / (knots[j] - knots[j - 1]);
    return values[j - 1] + t * (values[j] - values[j - 1]);
}

Payoff Payoff::table(std::vector<double> values) {
    Payoff p(PayoffKind::Table);
    p.table_ = std::move(values);
    return p;
}

Payoff Payoff::forward() { return Payoff(PayoffKind::Forward); }

Payoff Payoff::straddle(std::size_t i, std::size_t j) {
    Payoff p(PayoffKind::Straddle);
    p.i_ = i;
    p.j_ = j;
    return p;
}

Payoff Payoff::asian_call(double strike) {
    if (!std::isfinite(strike)) throw Error(ErrorKind::InvalidInput, "strike must be finite");
    Payoff p(PayoffKind::AsianCall);
    p.strike_ = strike;
    return p;
}

Payoff Payoff::vanilla(std::size_t i, PiecewiseLinear g) {
    g.validate();
    Payoff p(PayoffKind::Vanilla);
    p.j_ = i;
    p.g_ = std::move(g);
    return p;
}

Payoff Payoff::lookback() { return Payoff(PayoffKind::Lookback); }

std::string Payoff::name() const {
    switch (kind_) {
        case PayoffKind::Table: return "table";
        case PayoffKind::Forward: return "forward";
        case PayoffKind::Straddle: return "straddle";
        case PayoffKind::AsianCall: return "asian-call";
        case PayoffKind::Vanilla: return "vanilla";
        case PayoffKind::Lookback: return "lookback";
    }
    return "?";
}

std::vector<double> Payoff::evaluate(const PathLattice& lattice) const {
    const std::size_t n = lattice.path_count(), N = lattice.periods();
    auto at = [&](std::size_t path, std::size_t t) { return t == 0 ? lattice.s0() : lattice.coord(path, t - 1); };
    if ((kind_ == PayoffKind::Straddle && (i_ > N || j_ > N)) || (kind_ == PayoffKind::Vanilla && (j_ < 1 || j_ > N)))
        throw Error(ErrorKind::InvalidInput, "payoff refers to a maturity outside 1.." + std::to_string(N));
    if (kind_ == PayoffKind::Table && table_.size() != n)
        throw Error(ErrorKind::InvalidInput, "payoff table has " + std::to_string(table_.size()) + " entries for " +
                                                 std::to_string(n) + " paths");
    std::vector<double> v(n);
    for (std::size_t p = 0; p < n; ++p) {
        switch (kind_) {
            case PayoffKind::Table: v[p] = table_[p]; break;
            case PayoffKind::Forward: v[p] = std::abs(at(p, N) - lattice.s0()); break;
            case PayoffKind::Straddle: v[p] = std::abs(at(p, j_) - at(p, i_)); break;
            case PayoffKind::AsianCall: {
                double s = 0.0;
                for (std::size_t t = 1; t <= N; ++t) s += at(p, t);
                v[p] = std::max(s / static_cast<double>(N) - strike_, 0.0);
                break;
            }
            case PayoffKind::Vanilla: v[p] = g_(at(p, j_)); break;
            case PayoffKind::Lookback: {
                double m = at(p, 1);
                for (std::size_t t = 2; t <= N; ++t) m = std::max(m, at(p, t));
                v[p] = m - at(p, N);
                break;
            }
        }
        if (!std::isfinite(v[p])) throw Error(ErrorKind::InvalidInput, "payoff is not finite on path " + std::to_string(p));
    }
    return v;
}

double growth_bound(std::span<const double> psi, const PathLattice& lattice) {
    double g = 0.0;
    for (std::size_t p = 0; p < psi.size(); ++p) {
        double s = 1.0;
        for (std::size_t t = 0; t < lattice.periods(); ++t) s += std::abs(lattice.coord(p, t));
        g = std::max(g, std::abs(psi[p]) / s);
    }
    return g;
}

// ------------------------------------------------------------ strategies

double gain_dynamic(const PathLattice& lattice, const DynamicStrategy& h, std::size_t path) {
    if (h.h.size() != lattice.node_count()) throw Error(ErrorKind::LatticeMismatch, "strategy has the wrong node count");
    double g = 0.0;
    for (std::size_t t = 0; t < lattice.periods(); ++t)
        g += h.h[lattice.node_of(path, t)] * (lattice.coord(path, t) - lattice.prev_coord(path, t));
    return g;
}

double gain_static(const StaticPosition& f, const MarginalSystem& sys, const PathLattice& lattice, std::size_t path) {
    if (f.f.size() != sys.periods()) throw Error(ErrorKind::LatticeMismatch, "static position has the wrong maturity count");
    double g = 0.0;
    for (std::size_t t = 0; t < sys.periods(); ++t) {
        if (f.f[t].size() != sys.marginals[t].size())
            throw Error(ErrorKind::LatticeMismatch, "static position does not match grid " + std::to_string(t + 1));
        g += f.f[t][lattice.coord_index(path, t)] - sys.marginals[t].expect(f.f[t]);
    }
    return g;
}

// ------------------------------------------------------- problem bundle

PricingInputs make_inputs(MarginalSystem sys, const std::vector<std::vector<double>>& priors, UtilitySpec util) {
    if (priors.empty()) throw Error(ErrorKind::InvalidInput, "at least one prior is required");
    auto poly = build_polytope(sys);
    std::vector<PathMeasure> ms;
    for (const auto& p : priors) {
        PathMeasure m(poly.lattice(), p);
        if (!m.is_probability()) throw Error(ErrorKind::InvalidInput, "priors must be probability measures");
        ms.push_back(std::move(m));
    }
    util.validate();
    return PricingInputs{std::move(sys), std::move(poly), AmbiguitySet(std::move(ms)), util};
}

std::vector<double> prior_uniform(const PathLattice& lattice) {
    return std::vector<double>(lattice.path_count(), 1.0 / static_cast<double>(lattice.path_count()));
}

std::vector<double> prior_independent(const MarginalSystem& sys, const PathLattice& lattice) {
    std::vector<double> p(lattice.path_count(), 1.0);
    for (std::size_t w = 0; w < p.size(); ++w)
        for (std::size_t t = 0; t < sys.periods(); ++t) p[w] *= sys.marginals[t].pmf()[lattice.coord_index(w, t)];
    return p;
}

std::vector<double> prior_tilted(const MarginalSystem& sys, const PathLattice& lattice, double theta) {
    auto p = prior_independent(sys, lattice);
    const std::size_t N = lattice.periods();
    double top = -kInf;
    for (std::size_t w = 0; w < p.size(); ++w) top = std::max(top, theta * (lattice.coord(w, N - 1) - sys.s0));
    double s = 0.0;
    for (std::size_t w = 0; w < p.size(); ++w) {
        p[w] *= std::exp(theta * (lattice.coord(w, N - 1) - sys.s0) - top);
        s += p[w];
    }
    for (double& v : p) v /= s;
    return p;
}

// ------------------------------------------------------------ MOT bounds

MotBounds mot_bounds(const MartingalePolytope& poly, std::span<const double> psi, const SolveOptions& opts) {
    if (psi.size() != poly.lattice()->path_count()) throw Error(ErrorKind::LatticeMismatch, "payoff length differs");
    auto solve = [&](std::span<const double> cost) {
        const auto sol = solve_lp(poly.linear_program(cost), opts);
        if (sol.status == LpStatus::Infeasible) throw Error(ErrorKind::InfeasiblePolytope, "martingale polytope is empty");
        if (sol.status != LpStatus::Optimal) throw Error(ErrorKind::IterationLimit, "bound LP did not finish");
        auto q = poly.expand(sol.x);
        for (double& v : q) v = std::max(v, 0.0);
        return q;
    };
    MotBounds b;
    b.q_low = solve(psi);
    b.q_high = solve(negated(psi));
    b.low = dot(b.q_low, psi);
    b.high = dot(b.q_high, psi);
    return b;
}

// ------------------------------------------------------------------ dual

namespace {

DualSolution dual_exponential(double x, std::span<const double> psi, const PricingInputs& in,
                              const MartingalePolytope& poly, const SolveOptions& opts) {
    const double a = in.util.parameter();
    FrozenMixture mix(in.amb, IntegrandSpec::exponential(), opts);
    // relative entropy minus a E_Q psi; the perspective of y log y - y
    // differs from the entropy by the (constant) mass
    SmoothObjective obj;
    obj.refresh = [&](std::span<const double> q) { mix.refresh(q); };
    obj.value = [&](std::span<const double> q) {
        const auto t = kernels::parallel::perspective(mix.spec, q, mix.pw, false);
        return t.value - a * dot(q, psi);
    };
    obj.gradient = [&](std::span<const double> q, std::span<double> g) {
        const auto t = kernels::parallel::perspective(mix.spec, q, mix.pw, true);
        for (std::size_t p = 0; p < g.size(); ++p) g[p] = t.slope[p] - a * psi[p];
    };
    const auto start = interior_start(poly, opts);
    const auto fw = frank_wolfe_min(poly, obj, opts, &start);
    const auto ent = divergence_robust(fw.q, in.amb, IntegrandSpec::exponential(), opts, mix.w);
    double mass = 0.0;
    for (double v : fw.q) mass += v;
    DualSolution d;
    d.closed_form = true;
    d.q = fw.q;
    d.weights = ent.weights;
    d.divergence = ent.value + mass;
    d.lambda = std::exp(a * (dot(fw.q, psi) - x) - d.divergence);
    d.value = -d.lambda / a;
    d.gap = fw.gap;
    d.converged = fw.converged;
    return d;
}

}  // namespace

DualSolution dual_value(double x, std::span<const double> psi, const PricingInputs& in, const DualOptions& opts) {
    check_length(psi, in);
    const auto poly = supported_polytope(in);
    if (in.util.kind() == UtilityKind::Exponential && opts.closed_form)
        return dual_exponential(x, psi, in, poly, opts.solve);

    const auto spec = IntegrandSpec::from_utility(in.util);
    FrozenMixture mix(in.amb, spec, opts.solve);
    FwState state = interior_start(poly, opts.solve);
    double lambda = 1.0;
    std::vector<double> nu(psi.size());
    SmoothObjective obj;
    auto scale = [&](std::span<const double> q) {
        for (std::size_t p = 0; p < q.size(); ++p) nu[p] = lambda * q[p];
    };
    obj.refresh = [&](std::span<const double> q) {
        scale(q);
        mix.refresh(nu);
    };
    obj.value = [&](std::span<const double> q) {
        scale(q);
        const auto t = kernels::parallel::perspective(spec, nu, mix.pw, false);
        return t.value - lambda * dot(q, psi) + lambda * x;
    };
    obj.gradient = [&](std::span<const double> q, std::span<double> g) {
        scale(q);
        const auto t = kernels::parallel::perspective(spec, nu, mix.pw, true);
        for (std::size_t p = 0; p < g.size(); ++p) g[p] = lambda * (t.slope[p] - psi[p]);
    };

    DualSolution best;
    best.value = kInf;
    auto phi = [&](double l) {
        lambda = l;
        const auto fw = frank_wolfe_min(poly, obj, opts.solve, &state);
        state = fw.state;
        if (fw.value < best.value) {
            best.value = fw.value;
            best.lambda = l;
            best.q = fw.q;
            best.weights = mix.w;
            best.gap = fw.gap;
            best.converged = fw.converged;
        }
        return fw.value;
    };
    SolveOptions line = opts.solve;
    line.tolerance = 1e-8;
    const auto r = minimize_positive(phi, line, 1.0);
    best.at_lower_edge = r.at_lower_edge;
    for (std::size_t p = 0; p < psi.size(); ++p) nu[p] = best.lambda * best.q[p];
    best.divergence = divergence_robust(nu, in.amb, spec, opts.solve, best.weights).value;
    return best;
}

// ---------------------------------------------------------------- primal

namespace {

struct PrimalLayout {
    Eigen::MatrixXd F;                   // paths x dim
    std::vector<std::size_t> static_at;  // first column of each maturity
};

PrimalLayout primal_features(const PricingInputs& in, StaticBasis basis) {
    const auto& L = *in.poly.lattice();
    const std::size_t n = L.path_count(), nodes = L.node_count(), N = L.periods();
    std::size_t dim = nodes;
    PrimalLayout lay;
    for (std::size_t t = 0; t < N; ++t) {
        lay.static_at.push_back(dim);
        dim += L.grid(t).size() - 1;  // gauge: f_t at the first grid point is 0
    }
    lay.F = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    for (std::size_t p = 0; p < n; ++p) {
        const auto r = static_cast<Eigen::Index>(p);
        for (std::size_t t = 0; t < N; ++t) {
            lay.F(r, static_cast<Eigen::Index>(L.node_of(p, t))) += L.coord(p, t) - L.prev_coord(p, t);
            const auto& mu = in.sys.marginals[t];
            const std::size_t m = mu.size();
            for (std::size_t j = 0; j + 1 < m; ++j) {
                const auto c = static_cast<Eigen::Index>(lay.static_at[t] + j);
                if (basis == StaticBasis::Indicators) {
                    lay.F(r, c) = (L.coord_index(p, t) == j + 1 ? 1.0 : 0.0) - mu.pmf()[j + 1];
                } else {
                    const double k = mu.grid()[j];
                    lay.F(r, c) = std::max(L.coord(p, t) - k, 0.0) - call_function(mu, k);
                }
            }
        }
    }
    return lay;
}

StaticPosition statics_from(const Eigen::VectorXd& z, const PricingInputs& in, const PrimalLayout& lay,
                            StaticBasis basis) {
    StaticPosition f;
    for (std::size_t t = 0; t < in.sys.periods(); ++t) {
        const auto& g = in.sys.marginals[t].grid();
        std::vector<double> v(g.size(), 0.0);
        for (std::size_t j = 0; j + 1 < g.size(); ++j) {
            const double c = z(static_cast<Eigen::Index>(lay.static_at[t] + j));
            if (basis == StaticBasis::Indicators) {
                v[j + 1] = c;
            } else {
                for (std::size_t m = j + 1; m < g.size(); ++m) v[m] += c * (g[m] - g[j]);
            }
        }
        f.f.push_back(std::move(v));
    }
    return f;
}

}  // namespace

PrimalSolution primal_value(double x, std::span<const double> psi, const PricingInputs& in, const PrimalOptions& opts) {
    check_length(psi, in);
    const auto lay = primal_features(in, opts.basis);
    const std::size_t n = psi.size(), m = in.amb.size();
    const auto dim = lay.F.cols();
    std::vector<double> base(n);
    for (std::size_t p = 0; p < n; ++p) base[p] = x - psi[p];

    MaxMinProblem prob;
    prob.piece_count = m;
    prob.pieces = [&](const Eigen::VectorXd& z, PieceEval& out, bool derivs) {
        out.value.resize(static_cast<Eigen::Index>(m));
        if (derivs) {
            out.grad.resize(dim, static_cast<Eigen::Index>(m));
            out.hess.resize(m);
        }
        for (std::size_t k = 0; k < m; ++k) {
            kernels::UtilityInput ui{&in.util, in.amb.prior(k).weights(), base, &lay.F};
            auto mo = kernels::parallel::utility_moments(ui, z, derivs);
            if (!mo.finite || !std::isfinite(mo.value)) return false;
            out.value(static_cast<Eigen::Index>(k)) = mo.value;
            if (derivs) {
                out.grad.col(static_cast<Eigen::Index>(k)) = mo.grad;
                out.hess[k] = std::move(mo.hess);
            }
        }
        return true;
    };

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> noise(0.0, 0.1);
    MaxMinResult best;
    best.value = -kInf;
    long steps = 0;
    for (int s = 0; s < std::max(opts.starts, 1); ++s) {
        Eigen::VectorXd z0 = opts.warm && opts.warm->size() == dim ? *opts.warm : Eigen::VectorXd::Zero(dim);
        if (s > 0)
            for (Eigen::Index i = 0; i < dim; ++i) z0(i) += noise(rng);
        PieceEval probe;
        if (!prob.pieces(z0, probe, false)) continue;
        auto r = maximize_min_concave(prob, z0, opts.newton);
        steps += r.newton_steps;
        if (r.value > best.value) best = std::move(r);
    }
    if (!std::isfinite(best.value)) throw Error(ErrorKind::AssumptionViolated, "utility is infinite at every start");

    PrimalSolution out;
    out.value = best.value;
    out.z = best.z;
    out.newton_steps = steps;
    out.unbounded = best.unbounded;
    const auto nodes = static_cast<Eigen::Index>(in.poly.lattice()->node_count());
    out.dynamic.h.assign(best.z.data(), best.z.data() + nodes);
    out.statics = statics_from(best.z, in, lay, opts.basis);
    return out;
}

// ------------------------------------------------------ indifference prices

SellerRoutes seller_price_penalty(std::span<const double> psi, const PricingInputs& in, double u0,
                                  const SolveOptions& opts) {
    check_length(psi, in);
    if (!(u0 < 0.0) && in.util.kind() == UtilityKind::Exponential)
        throw Error(ErrorKind::InvalidInput, "exponential zero-claim value must be negative");
    const auto poly = supported_polytope(in);
    const bool expo = in.util.kind() == UtilityKind::Exponential;
    const double a = in.util.parameter();
    const auto spec = expo ? IntegrandSpec::exponential() : IntegrandSpec::from_utility(in.util);
    FrozenMixture mix(in.amb, spec, opts);
    double lambda = 1.0;
    std::vector<double> nu(psi.size());

    // gamma(Q) = inf_lambda (J(lambda Q) - u0)/lambda; with lambda and the
    // mixture frozen at the iterate this is a majorant that touches there.
    // Exponential utility: gamma = (E(Q) - E_min)/a with E_min = -log(-a u0).
    const double e_min = expo ? -std::log(-a * u0) : 0.0;
    SmoothObjective obj;
    obj.refresh = [&](std::span<const double> q) {
        if (expo) {
            mix.refresh(q);
            return;
        }
        const auto g = gamma_penalty(q, in.amb, in.util, u0, opts);
        lambda = g.lambda;
        mix.w = g.weights;
        mix.pw = in.amb.mixture(mix.w);
    };
    obj.value = [&](std::span<const double> q) {
        if (expo) {
            const auto t = kernels::parallel::perspective(spec, q, mix.pw, false);
            double mass = 0.0;
            for (double v : q) mass += v;
            return (t.value + mass - e_min) / a - dot(q, psi);
        }
        for (std::size_t p = 0; p < q.size(); ++p) nu[p] = lambda * q[p];
        const auto t = kernels::parallel::perspective(spec, nu, mix.pw, false);
        return (t.value - u0) / lambda - dot(q, psi);
    };
    obj.gradient = [&](std::span<const double> q, std::span<double> g) {
        if (expo) {
            const auto t = kernels::parallel::perspective(spec, q, mix.pw, true);
            for (std::size_t p = 0; p < g.size(); ++p) g[p] = t.slope[p] / a - psi[p];
            return;
        }
        for (std::size_t p = 0; p < q.size(); ++p) nu[p] = lambda * q[p];
        const auto t = kernels::parallel::perspective(spec, nu, mix.pw, true);
        for (std::size_t p = 0; p < g.size(); ++p) g[p] = t.slope[p] - psi[p];
    };
    const auto start = interior_start(poly, opts);
    const auto fw = frank_wolfe_min(poly, obj, opts, &start);

    SellerRoutes r;
    r.q = fw.q;
    r.gap = fw.gap;
    if (expo) {
        double mass = 0.0;
        for (double v : fw.q) mass += v;
        r.gamma = (divergence_robust(fw.q, in.amb, spec, opts, mix.w).value + mass - e_min) / a;
    } else {
        r.gamma = gamma_penalty(fw.q, in.amb, in.util, u0, opts).value;
    }
    r.penalty = dot(fw.q, psi) - r.gamma;
    return r;
}

namespace {

// Least x with u_psi(x) >= target, by bisection on the primal value.
double bisect_price(std::span<const double> psi, const PricingInputs& in, double target, double lo, double hi,
                    double width, std::uint64_t seed) {
    PrimalOptions po;
    po.starts = 1;
    po.seed = seed;
    auto u = [&](double x) {
        auto s = primal_value(x, psi, in, po);
        po.warm = s.z;
        return s.value;
    };
    for (int i = 0; i < 60 && u(lo) >= target; ++i) lo -= (hi - lo);
    for (int i = 0; i < 60 && u(hi) < target; ++i) hi += (hi - lo);
    while (hi - lo > width) {
        const double mid = 0.5 * (lo + hi);
        if (u(mid) >= target) hi = mid; else lo = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

IndifferencePrices indifference_prices(std::span<const double> psi, const PricingInputs& in, const PriceOptions& opts) {
    check_length(psi, in);
    const auto mot = mot_bounds(in.poly, psi, opts.solve);
    const std::vector<double> zero(psi.size(), 0.0);
    const auto neg = negated(psi);
    IndifferencePrices out;
    out.scale = 1.0 + std::abs(mot.low) + std::abs(mot.high);

    DualOptions dopt;
    dopt.solve = opts.solve;
    out.u0_dual = dual_value(0.0, zero, in, dopt).value;
    out.sell = seller_price_penalty(psi, in, out.u0_dual, opts.solve);
    out.buy = seller_price_penalty(neg, in, out.u0_dual, opts.solve);

    PrimalOptions po;
    po.seed = opts.solve.seed;
    out.u0_primal = primal_value(0.0, zero, in, po).value;
    const double width = 1e-9 * out.scale;
    out.sell.bisection = bisect_price(psi, in, out.u0_primal, mot.low - 1.0, mot.high + 1.0, width, opts.solve.seed);
    out.buy.bisection = bisect_price(neg, in, out.u0_primal, -mot.high - 1.0, -mot.low + 1.0, width, opts.solve.seed);

    out.p_sell = out.sell.penalty;
    out.p_buy = -out.buy.penalty;
    out.disagreement = std::max(std::abs(out.sell.penalty - out.sell.bisection),
                                std::abs(out.buy.penalty - out.buy.bisection)) /
                       out.scale;
    if (opts.throw_on_mismatch && out.disagreement > opts.cross_tolerance)
        throw Error(ErrorKind::CrossCheckFailed, "indifference price routes differ by " +
                                                     std::to_string(out.disagreement) + " (relative to scale)");
    return out;
}

// --------------------------------------------------------------- calls

CallDecomposition call_span_restrict(const StaticPosition& f, const MarginalSystem& sys) {
    if (f.f.size() != sys.periods()) throw Error(ErrorKind::LatticeMismatch, "static position has the wrong maturity count");
    CallDecomposition d;
    for (std::size_t t = 0; t < sys.periods(); ++t) {
        const auto& g = sys.marginals[t].grid();
        const auto& v = f.f[t];
        if (v.size() != g.size()) throw Error(ErrorKind::LatticeMismatch, "static position does not match its grid");
        for (double e : v)
            if (!std::isfinite(e)) throw Error(ErrorKind::InvalidInput, "static position has a non-finite entry");
        std::vector<double> strikes, coef;
        double prev_slope = 0.0;
        for (std::size_t j = 0; j + 1 < g.size(); ++j) {
            const double slope = (v[j + 1] - v[j]) / (g[j + 1] - g[j]);
            strikes.push_back(g[j]);
            coef.push_back(slope - prev_slope);
            prev_slope = slope;
        }
        std::vector<double> rec(g.size(), v[0]);
        for (std::size_t m = 0; m < g.size(); ++m)
            for (std::size_t j = 0; j < m; ++j) rec[m] += coef[j] * (g[m] - strikes[j]);
        d.constant.push_back(v[0]);
        d.strikes.push_back(std::move(strikes));
        d.coefficients.push_back(std::move(coef));
        d.reconstructed.f.push_back(std::move(rec));
    }
    return d;
}

// ---------------------------------------------------------- trivial case

TrivialCaseReport trivial_case_check(const MarginalSystem& sys, std::span<const double> psi, const SolveOptions& opts,
                                     double tolerance) {
    auto poly = build_polytope(sys, 200);
    const auto verts = enumerate_vertices(poly, 200);
    if (verts.empty()) throw Error(ErrorKind::InfeasiblePolytope, "martingale polytope is empty");
    auto in = make_inputs(sys, verts, UtilitySpec::exponential());
    check_length(psi, in);
    TrivialCaseReport r;
    r.vertices = verts.size();
    const auto mot = mot_bounds(in.poly, psi, opts);
    r.mot_low = mot.low;
    r.mot_high = mot.high;
    const std::vector<double> zero(psi.size(), 0.0);
    const double u0 = dual_value(0.0, zero, in, DualOptions{opts, true}).value;
    r.p_sell = seller_price_penalty(psi, in, u0, opts).penalty;
    r.p_buy = -seller_price_penalty(negated(psi), in, u0, opts).penalty;
    r.passed = std::abs(r.p_sell - r.mot_high) <= tolerance && std::abs(r.p_buy - r.mot_low) <= tolerance;
    return r;
}

// ---------------------------------------------------------------- report

PricingReport price(double x, std::span<const double> psi, const PricingInputs& in, const PriceOptions& opts) {
    check_length(psi, in);
    PricingReport r;
    r.x = x;
    r.mot = mot_bounds(in.poly, psi, opts.solve);
    r.growth = growth_bound(psi, *in.poly.lattice());
    DualOptions dopt;
    dopt.solve = opts.solve;
    r.dual = dual_value(x, psi, in, dopt);
    PrimalOptions po;
    po.seed = opts.solve.seed;
    r.primal = primal_value(x, psi, in, po);
    r.duality_gap = r.dual.value - r.primal.value;
    r.prices = indifference_prices(psi, in, opts);
    r.u0_at_0 = r.prices.u0_dual;
    return r;
}

}  // namespace robmot
