#include <algorithm>
#include <cmath>
#include <limits>

#include "robmot/error.hpp"
#include "robmot/optimize.hpp"

namespace robmot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

bool same_vertex(const std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > 1e-12) return false;
    return true;
}

std::vector<double> lp_vertex(const MartingalePolytope& poly, std::span<const double> cost, const SolveOptions& opts) {
    SolveOptions lp_opts;
    lp_opts.seed = opts.seed;
    const auto sol = solve_lp(poly.linear_program(cost), lp_opts);
    if (sol.status == LpStatus::Infeasible) throw Error(ErrorKind::InfeasiblePolytope, "martingale polytope is empty");
    if (sol.status != LpStatus::Optimal) throw Error(ErrorKind::InvalidInput, "linear oracle unbounded on a polytope");
    auto v = poly.expand(sol.x);
    for (double& x : v)
        if (x < 0) x = 0.0;  // clip round-off
    return v;
}

// Adds weight t*(new vertex) after scaling the others by (1-t).
void push_vertex(FwState& st, std::vector<double> v, double t) {
    for (double& w : st.weights) w *= (1.0 - t);
    for (std::size_t k = 0; k < st.vertices.size(); ++k) {
        if (same_vertex(st.vertices[k], v)) {
            st.weights[k] += t;
            return;
        }
    }
    st.vertices.push_back(std::move(v));
    st.weights.push_back(t);
}

void drop_empty(FwState& st) {
    std::size_t keep = 0;
    for (std::size_t k = 0; k < st.vertices.size(); ++k) {
        if (st.weights[k] > 1e-15) {
            if (keep != k) {
                st.vertices[keep] = std::move(st.vertices[k]);
                st.weights[keep] = st.weights[k];
            }
            ++keep;
        }
    }
    st.vertices.resize(keep);
    st.weights.resize(keep);
    double s = 0.0;
    for (double w : st.weights) s += w;
    for (double& w : st.weights) w /= s;
}

}  // namespace

std::vector<double> FwState::point() const {
    if (vertices.empty()) return {};
    std::vector<double> q(vertices.front().size(), 0.0);
    for (std::size_t k = 0; k < vertices.size(); ++k)
        for (std::size_t i = 0; i < q.size(); ++i) q[i] += weights[k] * vertices[k][i];
    return q;
}

FwState interior_start(const MartingalePolytope& poly, const SolveOptions& opts) {
    const std::size_t n = poly.lattice()->path_count();
    FwState st;
    std::vector<char> charged(n, 0);
    std::vector<double> cost(n, 0.0);
    st.vertices.push_back(lp_vertex(poly, cost, opts));
    for (std::size_t p = 0; p < n; ++p)
        if (st.vertices.back()[p] > 1e-12) charged[p] = 1;
    for (std::size_t p : poly.columns()) {
        if (charged[p]) continue;
        cost.assign(n, 0.0);
        cost[p] = -1.0;
        auto v = lp_vertex(poly, cost, opts);
        if (v[p] <= 1e-12) continue;  // path carries no mass anywhere in the polytope
        for (std::size_t i = 0; i < n; ++i)
            if (v[i] > 1e-12) charged[i] = 1;
        bool dup = false;
        for (const auto& u : st.vertices) dup = dup || same_vertex(u, v);
        if (!dup) st.vertices.push_back(std::move(v));
    }
    st.weights.assign(st.vertices.size(), 1.0 / static_cast<double>(st.vertices.size()));
    return st;
}

FwResult frank_wolfe_min(const MartingalePolytope& poly, const SmoothObjective& objective, const SolveOptions& opts,
                         const FwState* start) {
    const std::size_t n = poly.lattice()->path_count();
    FwResult res;
    if (start && !start->vertices.empty()) {
        res.state = *start;
        drop_empty(res.state);
    } else {
        std::vector<double> zero(n, 0.0);
        res.state.vertices.push_back(lp_vertex(poly, zero, opts));
        res.state.weights.push_back(1.0);
    }
    auto refresh = [&](std::span<const double> x) {
        if (objective.refresh) objective.refresh(x);
    };
    std::vector<double> q = res.state.point();
    refresh(q);
    double fq = objective.value(q);
    if (!std::isfinite(fq)) {
        // The given start sits outside the objective's domain; the interior
        // mixture is the best generic guess.
        res.state = interior_start(poly, opts);
        q = res.state.point();
        refresh(q);
        fq = objective.value(q);
        if (!std::isfinite(fq)) throw Error(ErrorKind::AssumptionViolated, "objective is infinite on the polytope interior");
    }

    const long max_it = opts.iterations_or(defaults::kFrankWolfeIterations);
    std::vector<double> g(n), d(n), trial(n);
    int stall = 0;
    for (long it = 0; it < max_it; ++it) {
        res.iterations = it + 1;
        objective.gradient(q, g);
        auto s = lp_vertex(poly, g, opts);
        const double gq = dot(g, q);
        const double gap_fw = gq - dot(g, s);
        res.gap = gap_fw;
        if (gap_fw <= opts.tolerance) {
            res.converged = true;
            break;
        }
        std::size_t away = 0;
        double away_val = -kInf;
        for (std::size_t k = 0; k < res.state.vertices.size(); ++k) {
            const double v = dot(g, res.state.vertices[k]);
            if (v > away_val) {
                away_val = v;
                away = k;
            }
        }
        const double gap_away = away_val - gq;
        const bool fw_step = gap_fw >= gap_away || res.state.vertices.size() == 1;
        double tmax;
        if (fw_step) {
            for (std::size_t i = 0; i < n; ++i) d[i] = s[i] - q[i];
            tmax = 1.0;
        } else {
            const double alpha = res.state.weights[away];
            for (std::size_t i = 0; i < n; ++i) d[i] = q[i] - res.state.vertices[away][i];
            tmax = alpha / (1.0 - alpha);
        }
        auto phi = [&](double t) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = q[i] + t * d[i];
            return objective.value(trial);
        };
        double t_hi = tmax;
        double f_hi = phi(t_hi);
        while (!std::isfinite(f_hi) && t_hi > 1e-300) {
            t_hi *= 0.5;
            f_hi = phi(t_hi);
        }
        double t_best = 0.0, f_best = fq;
        if (std::isfinite(f_hi)) {
            const auto br = brent_minimize(phi, 0.0, t_hi, 1e-14 * t_hi);
            if (br.value < f_best) {
                t_best = br.argmin;
                f_best = br.value;
            }
            if (f_hi <= f_best) {
                t_best = t_hi;
                f_best = f_hi;
            }
        }
        if (t_best <= 0.0) {
            // Line search found nothing; q is optimal to working precision.
            res.converged = gap_fw <= std::max(opts.tolerance, 1e-10 * (1.0 + std::abs(fq)));
            break;
        }
        if (fw_step) {
            push_vertex(res.state, std::move(s), t_best);
        } else {
            for (double& w : res.state.weights) w *= (1.0 + t_best);
            res.state.weights[away] -= t_best;
            if (t_best == tmax) res.state.weights[away] = 0.0;
        }
        drop_empty(res.state);
        if (it % 50 == 49) {
            q = res.state.point();
        } else {
            for (std::size_t i = 0; i < n; ++i) q[i] += t_best * d[i];
        }
        const double improvement = fq - f_best;
        refresh(q);
        fq = objective.value(q);
        stall = improvement <= 1e-15 * (1.0 + std::abs(fq)) ? stall + 1 : 0;
        if (stall >= 20) break;
    }
    res.q = std::move(q);
    for (double& x : res.q)
        if (x < 0) x = 0.0;
    refresh(res.q);
    res.value = objective.value(res.q);
    return res;
}

}  // namespace robmot
