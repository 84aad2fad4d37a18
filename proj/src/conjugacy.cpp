// Brute-force verification of the duality between the robust integral
// functional and the robust divergence on small lattices.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "robmot/divergence.hpp"
#include "robmot/error.hpp"
#include "robmot/optimize.hpp"

namespace robmot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kHarnessPaths = 64;
constexpr int kStarts = 8;

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

struct Harness {
    const IntegrandSpec& spec;
    const AmbiguitySet& amb;
    std::size_t n;
    std::size_t m;
    std::mt19937_64 rng;

    SolveOptions tight() const {
        SolveOptions o;
        o.tolerance = 1e-13;
        o.max_iterations = 20000;
        return o;
    }

    double J(std::span<const double> nu) const { return divergence_robust(nu, amb, spec, tight()).value; }

    // sup_f nu(f) - I(f), as max over f of min_k [nu(f) - E_k phi_B(f)].
    double conjugate(std::span<const double> nu) {
        MaxMinProblem prob;
        prob.piece_count = m;
        prob.pieces = [&](const Eigen::VectorXd& f, PieceEval& e, bool derivs) {
            e.value.resize(static_cast<Eigen::Index>(m));
            if (derivs) {
                e.grad.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
                e.hess.assign(m, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
            }
            double nf = 0.0;
            for (std::size_t p = 0; p < n; ++p) nf += nu[p] * f(static_cast<Eigen::Index>(p));
            for (std::size_t k = 0; k < m; ++k) {
                const auto P = amb.prior(k).weights();
                double s = 0.0;
                for (std::size_t p = 0; p < n; ++p) {
                    const auto i = static_cast<Eigen::Index>(p);
                    const double x = f(i) + spec.shift_at(p);
                    if (P[p] > 0) s += P[p] * spec.phi(x);
                    if (derivs) {
                        e.grad(i, static_cast<Eigen::Index>(k)) = nu[p] - (P[p] > 0 ? P[p] * spec.dphi(x) : 0.0);
                        e.hess[k](i, i) = P[p] > 0 ? -P[p] * spec.d2phi(x) : 0.0;
                    }
                }
                e.value(static_cast<Eigen::Index>(k)) = nf - s;
            }
            return e.value.allFinite();
        };
        std::normal_distribution<double> z(0.0, 1.0);
        double best = -kInf;
        for (int s = 0; s < kStarts; ++s) {
            Eigen::VectorXd f0(static_cast<Eigen::Index>(n));
            for (auto& v : f0) v = s == 0 ? 0.0 : z(rng);
            const auto r = maximize_min_concave(prob, f0);
            if (r.unbounded) return kInf;
            best = std::max(best, r.value);
        }
        return best;
    }

    double integral(std::span<const double> f) const { return robust_integral(f, spec, amb); }

    // nu(t d) - I(t d) growing linearly along a coordinate ray certifies +inf.
    bool ray_unbounded(std::span<const double> nu) const {
        std::vector<double> f(n, 0.0);
        auto along = [&](std::size_t p, double x) {
            f.assign(n, 0.0);
            f[p] = x;
            return dot(nu, f) - integral(f);
        };
        for (std::size_t p = 0; p < n; ++p) {
            if (nu[p] == 0.0) continue;
            const double dir = nu[p] > 0 ? 1.0 : -1.0;
            const double near = along(p, dir * 1e2), far = along(p, dir * 1e4);
            if (far - near > 0.5 * std::abs(nu[p]) * (1e4 - 1e2)) return true;
        }
        return false;
    }

    // inf over c >= 0 of I(H c) via the barrier engine.
    double cone_primal(const Eigen::MatrixXd& H) {
        const auto r = H.cols();
        MaxMinProblem prob;
        prob.piece_count = m;
        prob.C = Eigen::MatrixXd::Identity(r, r);
        prob.d = Eigen::VectorXd::Zero(r);
        prob.pieces = [&](const Eigen::VectorXd& c, PieceEval& e, bool derivs) {
            const Eigen::VectorXd f = H * c;
            e.value.resize(static_cast<Eigen::Index>(m));
            if (derivs) {
                e.grad.resize(r, static_cast<Eigen::Index>(m));
                e.hess.assign(m, Eigen::MatrixXd::Zero(r, r));
            }
            for (std::size_t k = 0; k < m; ++k) {
                const auto P = amb.prior(k).weights();
                double s = 0.0;
                Eigen::VectorXd d1 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
                Eigen::VectorXd d2 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
                for (std::size_t p = 0; p < n; ++p) {
                    if (P[p] == 0) continue;
                    const double x = f(static_cast<Eigen::Index>(p)) + spec.shift_at(p);
                    s += P[p] * spec.phi(x);
                    d1(static_cast<Eigen::Index>(p)) = P[p] * spec.dphi(x);
                    d2(static_cast<Eigen::Index>(p)) = P[p] * spec.d2phi(x);
                }
                e.value(static_cast<Eigen::Index>(k)) = -s;
                if (derivs) {
                    e.grad.col(static_cast<Eigen::Index>(k)) = -H.transpose() * d1;
                    e.hess[k] = -H.transpose() * d2.asDiagonal() * H;
                }
            }
            return e.value.allFinite();
        };
        const auto res = maximize_min_concave(prob, Eigen::VectorXd::Ones(r));
        return -res.value;
    }

    // Strictly feasible rho (> 0, H^T rho > 0, sum 1) on the charged paths,
    // or empty when the cone is not coercive.
    std::vector<double> interior_polar(const Eigen::MatrixXd& H, const std::vector<std::size_t>& sup) const {
        const auto ns = static_cast<Eigen::Index>(sup.size());
        const auto r = H.cols();
        LinearProgram lp;
        lp.A = Eigen::MatrixXd::Zero(1 + r, ns + 1 + r);
        lp.b = Eigen::VectorXd::Zero(1 + r);
        lp.c = Eigen::VectorXd::Zero(ns + 1 + r);
        lp.A.block(0, 0, 1, ns).setOnes();
        lp.A(0, ns) = static_cast<double>(ns);
        lp.b(0) = 1.0;
        for (Eigen::Index j = 0; j < r; ++j) {
            double colsum = 0.0;
            for (Eigen::Index i = 0; i < ns; ++i) {
                const double h = H(static_cast<Eigen::Index>(sup[static_cast<std::size_t>(i)]), j);
                lp.A(1 + j, i) = h;
                colsum += h;
            }
            lp.A(1 + j, ns) = colsum - 1.0;
            lp.A(1 + j, ns + 1 + j) = -1.0;
        }
        lp.c(ns) = -1.0;
        const auto sol = solve_lp(lp);
        if (sol.status != LpStatus::Optimal || -sol.value < 1e-6) return {};
        const double t = sol.x(ns);
        std::vector<double> rho(n, 0.0);
        for (Eigen::Index i = 0; i < ns; ++i) rho[sup[static_cast<std::size_t>(i)]] = t + sol.x(i);
        return rho;
    }

    // min over rho with H^T rho >= 0 of J(rho), jointly over (rho, w) with
    // the last mixture weight eliminated.
    double cone_dual(const Eigen::MatrixXd& H, const std::vector<std::size_t>& sup, const std::vector<double>& rho0) {
        const auto ns = static_cast<Eigen::Index>(sup.size());
        const auto r = H.cols();
        const auto mw = static_cast<Eigen::Index>(m - 1);
        const Eigen::Index dim = ns + mw;
        // Prior masses on the charged paths, relative to the last prior.
        Eigen::MatrixXd D(ns, mw);
        Eigen::VectorXd base(ns);
        for (Eigen::Index i = 0; i < ns; ++i) {
            const std::size_t p = sup[static_cast<std::size_t>(i)];
            base(i) = amb.prior(m - 1)[p];
            for (Eigen::Index k = 0; k < mw; ++k) D(i, k) = amb.prior(static_cast<std::size_t>(k))[p] - base(i);
        }
        const bool pos = spec.nonnegative_domain();
        const Eigen::Index rows = r + (pos ? ns : 0) + (mw > 0 ? mw + 1 : 0);
        MaxMinProblem prob;
        prob.C = Eigen::MatrixXd::Zero(rows, dim);
        prob.d = Eigen::VectorXd::Zero(rows);
        Eigen::Index row = 0;
        for (Eigen::Index j = 0; j < r; ++j, ++row)
            for (Eigen::Index i = 0; i < ns; ++i) prob.C(row, i) = H(static_cast<Eigen::Index>(sup[static_cast<std::size_t>(i)]), j);
        if (pos)
            for (Eigen::Index i = 0; i < ns; ++i, ++row) prob.C(row, i) = 1.0;
        if (mw > 0) {
            for (Eigen::Index k = 0; k < mw; ++k, ++row) prob.C(row, ns + k) = 1.0;
            for (Eigen::Index k = 0; k < mw; ++k) prob.C(row, ns + k) = -1.0;
            prob.d(row) = 1.0;
        }
        prob.pieces = [&](const Eigen::VectorXd& z, PieceEval& e, bool derivs) {
            const Eigen::VectorXd s = base + D * z.tail(mw);
            e.value.resize(1);
            if (derivs) {
                e.grad = Eigen::MatrixXd::Zero(dim, 1);
                e.hess.assign(1, Eigen::MatrixXd::Zero(dim, dim));
            }
            double total = 0.0;
            for (Eigen::Index i = 0; i < ns; ++i) {
                const std::size_t p = sup[static_cast<std::size_t>(i)];
                if (!(s(i) > 0)) return false;
                const double rho = z(i);
                const double y = rho / s(i);
                const double c = spec.conj(y);
                if (!std::isfinite(c)) return false;
                total += s(i) * c - rho * spec.shift_at(p);
                if (!derivs) continue;
                const double d1 = spec.dconj(y), d2 = spec.d2conj(y);
                const double g_rho = d1 - spec.shift_at(p);
                const double g_s = c - y * d1;
                e.grad(i, 0) -= g_rho;
                for (Eigen::Index k = 0; k < mw; ++k) e.grad(ns + k, 0) -= g_s * D(i, k);
                // Perspective Hessian d2/s [1, -y; -y, y^2] in (rho, s).
                const double a = d2 / s(i);
                e.hess[0](i, i) -= a;
                for (Eigen::Index k = 0; k < mw; ++k) {
                    e.hess[0](i, ns + k) += a * y * D(i, k);
                    e.hess[0](ns + k, i) += a * y * D(i, k);
                    for (Eigen::Index l = 0; l < mw; ++l) e.hess[0](ns + k, ns + l) -= a * y * y * D(i, k) * D(i, l);
                }
            }
            e.value(0) = -total;
            return std::isfinite(total);
        };
        Eigen::VectorXd z0(dim);
        for (Eigen::Index i = 0; i < ns; ++i) z0(i) = rho0[sup[static_cast<std::size_t>(i)]];
        for (Eigen::Index k = 0; k < mw; ++k) z0(ns + k) = 1.0 / static_cast<double>(m);
        const auto res = maximize_min_concave(prob, z0);
        return -res.value;
    }
};

}  // namespace

ConjugacyReport conjugacy_check(const IntegrandSpec& spec, const AmbiguitySet& amb, std::size_t trials,
                                std::uint64_t seed, double tolerance) {
    const std::size_t n = amb.path_count();
    if (n > kHarnessPaths) throw Error(ErrorKind::HarnessLimit, "conjugacy harness supports at most 64 paths");
    if (!spec.shift().empty() && spec.shift().size() != n)
        throw Error(ErrorKind::LatticeMismatch, "shift length differs from lattice");
    Harness h{spec, amb, n, amb.size(), std::mt19937_64(seed)};
    ConjugacyReport rep;
    rep.trials = trials;
    rep.min_young_slack = kInf;

    const auto charged = amb.uniform_mixture();
    std::vector<std::size_t> sup;
    for (std::size_t p = 0; p < n; ++p)
        if (charged[p] > 0) sup.push_back(p);

    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto random_nu = [&](bool allow_negative) {
        std::vector<double> nu(n, 0.0);
        for (std::size_t p : sup) nu[p] = allow_negative ? gauss(h.rng) : 0.05 + unif(h.rng);
        return nu;
    };

    for (std::size_t t = 0; t < trials; ++t) {
        // (a) conjugate at a random measure; every fifth draw is signed
        {
            const bool signed_draw = t % 5 == 4 || !spec.nonnegative_domain();
            auto nu = random_nu(signed_draw);
            const double scale = 0.5 + 2.0 * unif(h.rng);
            for (double& v : nu) v *= scale;
            const double j = h.J(nu);
            if (std::isfinite(j)) {
                const double istar = h.conjugate(nu);
                rep.max_conjugate_residual = std::max(rep.max_conjugate_residual, std::abs(istar - j));
            } else if (h.ray_unbounded(nu)) {
                ++rep.infinite_agreements;
            } else {
                rep.max_conjugate_residual = kInf;
            }
        }
        // (b) representation at a random function, attained by the tilt of
        // the worst prior; random measures only probe Young's inequality
        {
            std::vector<double> f(n);
            for (double& v : f) v = gauss(h.rng);
            const double I = h.integral(f);
            std::size_t worst = 0;
            double wv = -kInf;
            for (std::size_t k = 0; k < h.m; ++k) {
                double s = 0.0;
                for (std::size_t p = 0; p < n; ++p) s += amb.prior(k)[p] * spec.phi_shifted(p, f[p]);
                if (s > wv) {
                    wv = s;
                    worst = k;
                }
            }
            std::vector<double> nu(n);
            for (std::size_t p = 0; p < n; ++p) nu[p] = amb.prior(worst)[p] * spec.dphi(f[p] + spec.shift_at(p));
            const double attained = dot(nu, f) - h.J(nu);
            rep.max_representation_residual = std::max(rep.max_representation_residual, std::abs(I - attained));
            rep.min_young_slack = std::min(rep.min_young_slack, I + h.J(nu) - dot(nu, f));
            for (int s = 0; s < 4; ++s) {
                auto sample = random_nu(!spec.nonnegative_domain());
                const double js = h.J(sample);
                if (std::isfinite(js)) rep.min_young_slack = std::min(rep.min_young_slack, I + js - dot(sample, f));
            }
        }
        // (c) meta duality on a random coercive cone
        {
            const auto r = static_cast<Eigen::Index>(1 + t % 3);
            Eigen::MatrixXd H(static_cast<Eigen::Index>(n), r);
            std::vector<double> rho0;
            for (int attempt = 0; attempt < 200 && rho0.empty(); ++attempt) {
                for (auto& v : H.reshaped()) v = gauss(h.rng);
                rho0 = h.interior_polar(H, sup);
            }
            if (rho0.empty()) throw Error(ErrorKind::HarnessLimit, "could not sample a coercive cone");
            const double lhs = h.cone_primal(H);
            const double rhs = -h.cone_dual(H, sup, rho0);
            rep.max_cone_residual = std::max(rep.max_cone_residual, std::abs(lhs - rhs));
        }
        // shifted-conjugate identity
        {
            std::vector<double> B(spec.shift().begin(), spec.shift().end());
            if (B.empty()) {
                B.resize(n);
                for (double& b : B) b = gauss(h.rng);
            }
            const auto shifted = spec.with_shift(B);
            const auto plain = spec.with_shift({});
            auto nu = random_nu(!spec.nonnegative_domain());
            const double lhs = divergence_robust(nu, amb, shifted, h.tight()).value;
            const double rhs = divergence_robust(nu, amb, plain, h.tight()).value - dot(nu, B);
            rep.max_shift_residual = std::max(rep.max_shift_residual, std::abs(lhs - rhs));
        }
    }
    rep.passed = rep.max_conjugate_residual <= tolerance && rep.max_representation_residual <= tolerance &&
                 rep.max_cone_residual <= tolerance && rep.max_shift_residual <= tolerance &&
                 rep.min_young_slack >= -tolerance;
    return rep;
}

}  // namespace robmot
