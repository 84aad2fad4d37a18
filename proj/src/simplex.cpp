#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "robmot/error.hpp"
#include "robmot/optimize.hpp"

namespace robmot {

SimplexResult minimize_over_simplex(const SimplexObjective& g, std::size_t m, const SolveOptions& opts,
                                    std::span<const double> w0) {
    if (m == 0) throw Error(ErrorKind::InvalidInput, "simplex dimension must be positive");
    SimplexResult res;
    res.w.assign(m, 1.0 / static_cast<double>(m));
    if (!w0.empty()) {
        if (w0.size() != m) throw Error(ErrorKind::InvalidInput, "warm start has wrong dimension");
        const double s = std::accumulate(w0.begin(), w0.end(), 0.0);
        if (s > 0)
            for (std::size_t k = 0; k < m; ++k) res.w[k] = std::max(w0[k], 0.0) / s;
    }
    std::vector<double> grad(m), trial(m), tgrad(m);
    res.value = g(res.w, grad);
    if (!std::isfinite(res.value) && !w0.empty()) {
        res.w.assign(m, 1.0 / static_cast<double>(m));
        res.value = g(res.w, grad);
    }
    if (m == 1 || !std::isfinite(res.value)) {
        res.converged = true;
        return res;
    }
    const long max_it = opts.iterations_or(5000);
    double eta = -1.0;
    for (long it = 0; it < max_it; ++it) {
        res.iterations = it;
        const double gmin = *std::min_element(grad.begin(), grad.end());
        const double gmax = *std::max_element(grad.begin(), grad.end());
        double wg = 0.0;
        for (std::size_t k = 0; k < m; ++k) wg += res.w[k] * grad[k];
        res.gap = wg - gmin;
        if (res.gap <= opts.tolerance) {
            res.converged = true;
            return res;
        }
        if (eta < 0) eta = 1.0 / std::max(gmax - gmin, 1e-300);
        bool accepted = false;
        while (eta > 1e-300) {
            double s = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                trial[k] = res.w[k] * std::exp(-eta * (grad[k] - gmin));
                s += trial[k];
            }
            double lin = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                trial[k] /= s;
                lin += grad[k] * (res.w[k] - trial[k]);
            }
            const double v = g(trial, tgrad);
            if (std::isfinite(v) && v <= res.value - 1e-4 * lin) {
                if (v == res.value && trial == res.w) break;
                res.w.swap(trial);
                grad.swap(tgrad);
                res.value = v;
                eta *= 2.0;
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if (!accepted) {
            // Further decrease is below floating-point resolution.
            res.converged = res.gap <= std::max(opts.tolerance, 1e-12 * (1.0 + std::abs(res.value)));
            return res;
        }
    }
    return res;
}

}  // namespace robmot
