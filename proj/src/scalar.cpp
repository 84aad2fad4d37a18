#include <cmath>
#include <limits>

#include "robmot/error.hpp"
#include "robmot/optimize.hpp"

namespace robmot {

namespace {
constexpr double kInvPhi = 0.6180339887498949;  // (sqrt(5) - 1) / 2
}

ScalarMin minimize_convex_1d(const std::function<double(double)>& f, double lo, double hi, const SolveOptions& opts) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
        throw Error(ErrorKind::BracketInvalid, "bracket must satisfy lo < hi with finite ends");
    const double width_tol = opts.tolerance * (hi - lo);
    const long max_it = opts.iterations_or(defaults::kLineSearchIterations);
    ScalarMin out;
    double a = lo, b = hi;
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    out.evaluations = 2;
    if (std::isnan(f1) || std::isnan(f2)) throw Error(ErrorKind::BracketInvalid, "objective is NaN inside bracket");
    for (long it = 0; it < max_it && (b - a) > width_tol; ++it) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = f(x2);
        }
        ++out.evaluations;
    }
    if (f1 <= f2) {
        out.argmin = x1;
        out.value = f1;
    } else {
        out.argmin = x2;
        out.value = f2;
    }
    return out;
}

ScalarMin brent_minimize(const std::function<double(double)>& f, double lo, double hi, double xtol,
                         long max_iterations) {
    if (!(lo < hi)) throw Error(ErrorKind::BracketInvalid, "bracket must satisfy lo < hi");
    constexpr double kC = 0.3819660112501051;
    ScalarMin out;
    double a = lo, b = hi;
    double x = a + kC * (b - a), w = x, v = x;
    double fx = f(x), fw = fx, fv = fx;
    double d = 0.0, e = 0.0;
    out.evaluations = 1;
    for (long it = 0; it < max_iterations; ++it) {
        const double m = 0.5 * (a + b);
        const double tol1 = 1e-10 * std::abs(x) + xtol / 3.0;
        const double tol2 = 2.0 * tol1;
        if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) break;
        bool golden = true;
        if (std::abs(e) > tol1) {
            double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0) p = -p;
            q = std::abs(q);
            const double etemp = e;
            e = d;
            if (std::abs(p) < std::abs(0.5 * q * etemp) && p > q * (a - x) && p < q * (b - x)) {
                d = p / q;
                const double u = x + d;
                if (u - a < tol2 || b - u < tol2) d = (m >= x) ? tol1 : -tol1;
                golden = false;
            }
        }
        if (golden) {
            e = (x >= m) ? a - x : b - x;
            d = kC * e;
        }
        const double u = std::abs(d) >= tol1 ? x + d : x + (d > 0 ? tol1 : -tol1);
        double fu = f(u);
        if (std::isnan(fu)) fu = std::numeric_limits<double>::infinity();
        ++out.evaluations;
        if (fu <= fx) {
            if (u >= x) a = x; else b = x;
            v = w; fv = fw;
            w = x; fw = fx;
            x = u; fx = fu;
        } else {
            if (u < x) a = u; else b = u;
            if (fu <= fw || w == x) {
                v = w; fv = fw;
                w = u; fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u; fv = fu;
            }
        }
    }
    out.argmin = x;
    out.value = fx;
    return out;
}

ScalarMin minimize_positive(const std::function<double(double)>& f, const SolveOptions& opts, double start,
                            double floor) {
    if (!(start > floor) || !(floor > 0)) throw Error(ErrorKind::BracketInvalid, "need start > floor > 0");
    constexpr double kGrow = 2.0;
    long evals = 0;
    auto F = [&](double x) {
        ++evals;
        return f(x);
    };
    double b = start;
    double fb = F(b);
    double c = b * kGrow;
    double fc = F(c);
    double a;
    bool pinned = false;
    if (fc < fb) {
        // Walk up until the objective turns.
        a = b;
        b = c;
        fb = fc;
        while (true) {
            c = b * kGrow;
            fc = F(c);
            if (!(fc < fb)) break;
            a = b;
            b = c;
            fb = fc;
            if (b > 1e300) throw Error(ErrorKind::BracketInvalid, "objective decreases without bound");
        }
    } else {
        while (true) {
            a = b / kGrow;
            if (a <= floor) {
                a = floor;
                pinned = !(F(a) > fb);
                break;
            }
            const double fa = F(a);
            if (!(fa < fb)) break;
            c = b;
            b = a;
            fb = fa;
        }
    }
    auto res = minimize_convex_1d(F, a, c, opts);
    if (fb < res.value) {
        res.argmin = b;
        res.value = fb;
    }
    res.evaluations = evals;
    res.at_lower_edge = pinned && res.argmin <= a + opts.tolerance * (c - a) * 10;
    return res;
}

}  // namespace robmot
