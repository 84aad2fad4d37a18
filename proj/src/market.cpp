#include "robmot/market.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "robmot/error.hpp"

namespace robmot {

Grid::Grid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.empty()) throw Error(ErrorKind::InvalidInput, "grid must have at least one point");
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (!std::isfinite(points_[i])) throw Error(ErrorKind::InvalidInput, "grid point is not finite");
        if (i > 0 && !(points_[i] > points_[i - 1]))
            throw Error(ErrorKind::InvalidInput, "grid points must be strictly increasing");
    }
}

Marginal::Marginal(Grid grid, std::vector<double> pmf) : grid_(std::move(grid)), pmf_(std::move(pmf)) {
    if (pmf_.size() != grid_.size())
        throw Error(ErrorKind::InvalidInput, "pmf length differs from grid length");
    double total = 0.0;
    for (double p : pmf_) {
        if (!std::isfinite(p) || p < 0.0) throw Error(ErrorKind::InvalidInput, "pmf entries must be finite and >= 0");
        total += p;
    }
    if (std::abs(total - 1.0) > tol::kMass)
        throw Error(ErrorKind::InvalidInput, "pmf must sum to 1 (got " + std::to_string(total) + ")");
    for (double& p : pmf_) p /= total;
}

double Marginal::mean() const { return expect(grid_.points()); }

double Marginal::expect(std::span<const double> values) const {
    if (values.size() != pmf_.size()) throw Error(ErrorKind::InvalidInput, "value vector length mismatch");
    double acc = 0.0;
    for (std::size_t j = 0; j < pmf_.size(); ++j) acc += pmf_[j] * values[j];
    return acc;
}

MarginalSystem::MarginalSystem(double spot, std::vector<Marginal> margs) : s0(spot), marginals(std::move(margs)) {
    if (!std::isfinite(s0)) throw Error(ErrorKind::InvalidInput, "spot must be finite");
    if (marginals.empty()) throw Error(ErrorKind::InvalidInput, "at least one maturity is required");
}

Marginal marginal_from_call_quotes(const CallQuoteCurve& curve, double s0) {
    const auto& K = curve.strikes;
    const auto& c = curve.prices;
    const std::size_t n = K.size();
    if (c.size() != n) throw Error(ErrorKind::InvalidInput, "strike and price lists differ in length");
    if (n < 2)
        throw Error(ErrorKind::NonConvexQuotes, "a single quote carries no curvature information (under-determined)");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(K[i]) || !std::isfinite(c[i])) throw Error(ErrorKind::InvalidInput, "quotes must be finite");
        if (i > 0 && !(K[i] > K[i - 1])) throw Error(ErrorKind::InvalidInput, "strikes must be strictly increasing");
        if (c[i] < 0.0) throw Error(ErrorKind::NonConvexQuotes, "negative call price");
        if (i > 0 && c[i] > c[i - 1] + tol::kConvexOrder)
            throw Error(ErrorKind::NonConvexQuotes, "call prices increase in strike");
    }
    std::vector<double> slope(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) slope[i] = (c[i + 1] - c[i]) / (K[i + 1] - K[i]);
    for (std::size_t i = 0; i + 2 < n; ++i)
        if (slope[i + 1] - slope[i] < -tol::kConvexOrder)
            throw Error(ErrorKind::NonConvexQuotes, "call prices are not convex in strike");
    if (slope.front() < -1.0 - tol::kConvexOrder)
        throw Error(ErrorKind::NonConvexQuotes, "call slope below -1 (negative mass at the lowest strike)");
    if (std::abs(c.back()) > tol::kQuoteMean)
        throw Error(ErrorKind::NonConvexQuotes, "last quoted call must be worthless: support would extend past the grid");

    // Back substitution of the upper-triangular system is a second difference
    // of the quote curve; the lowest strike absorbs the remaining mass.
    std::vector<double> pmf(n, 0.0);
    pmf[n - 1] = -slope[n - 2];
    for (std::size_t j = 1; j + 1 < n; ++j) pmf[j] = slope[j] - slope[j - 1];
    for (double& p : pmf) p = std::max(p, 0.0);
    double upper = std::accumulate(pmf.begin() + 1, pmf.end(), 0.0);
    pmf[0] = std::max(0.0, 1.0 - upper);
    const double total = std::accumulate(pmf.begin(), pmf.end(), 0.0);
    for (double& p : pmf) p /= total;

    Marginal m(Grid(K), std::move(pmf));
    const double mean = m.mean();
    if (std::abs(mean - s0) > tol::kQuoteMean)
        throw Error(ErrorKind::MeanMismatch,
                    "implied mean " + std::to_string(mean) + " differs from spot " + std::to_string(s0));
    return m;
}

double call_function(const Marginal& m, double k) {
    double acc = 0.0;
    const auto pmf = m.pmf();
    for (std::size_t j = 0; j < pmf.size(); ++j) acc += pmf[j] * std::max(m.grid()[j] - k, 0.0);
    return acc;
}

std::vector<double> call_prices_on_grid(const Marginal& m) {
    std::vector<double> out(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) out[i] = call_function(m, m.grid()[i]);
    return out;
}

FeasibilityVerdict check_strassen(const MarginalSystem& sys) {
    FeasibilityVerdict verdict;
    for (std::size_t i = 0; i < sys.periods(); ++i) {
        const double mean = sys.marginals[i].mean();
        if (std::abs(mean - sys.s0) > tol::kMean) {
            verdict.feasible = false;
            verdict.violation = StrassenViolation{StrassenViolation::Kind::Mean, i + 1, mean, mean, sys.s0};
            return verdict;
        }
    }
    for (std::size_t i = 0; i + 1 < sys.periods(); ++i) {
        const auto& lo = sys.marginals[i];
        const auto& hi = sys.marginals[i + 1];
        std::vector<double> kinks(lo.grid().points().begin(), lo.grid().points().end());
        kinks.insert(kinks.end(), hi.grid().points().begin(), hi.grid().points().end());
        std::sort(kinks.begin(), kinks.end());
        kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());
        for (double k : kinks) {
            const double a = call_function(lo, k);
            const double b = call_function(hi, k);
            if (b < a - tol::kConvexOrder) {
                verdict.feasible = false;
                verdict.violation = StrassenViolation{StrassenViolation::Kind::ConvexOrder, i + 1, k, a, b};
                return verdict;
            }
        }
    }
    return verdict;
}

}  // namespace robmot
