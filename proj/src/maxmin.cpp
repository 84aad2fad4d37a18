#include <cmath>
#include <limits>

#include "robmot/error.hpp"
#include "robmot/optimize.hpp"

namespace robmot {

namespace {

struct Model {
    bool ok = false;
    double phi = 0.0;   // smoothed objective incl. barrier
    double gmin = 0.0;  // unsmoothed min of the pieces
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
};

class SoftMin {
public:
    SoftMin(const MaxMinProblem& p) : p_(p) {}

    Model eval(const Eigen::VectorXd& z, double beta, bool derivs) {
        Model m;
        const Eigen::Index dim = z.size();
        Eigen::VectorXd r;
        if (p_.C.rows() > 0) {
            r = p_.C * z + p_.d;
            if ((r.array() <= 0.0).any()) return m;
        }
        if (!p_.pieces(z, pe_, derivs)) return m;
        const auto& g = pe_.value;
        if (!g.allFinite()) return m;
        const Eigen::Index k = g.size();
        m.gmin = g.minCoeff();
        Eigen::VectorXd pi(k);
        if (k == 1) {
            pi(0) = 1.0;
            m.phi = g(0);
        } else {
            pi = (-beta * (g.array() - m.gmin)).exp().matrix();
            const double z_sum = pi.sum();
            pi /= z_sum;
            m.phi = m.gmin - std::log(z_sum) / beta;
        }
        if (p_.C.rows() > 0) m.phi += r.array().log().sum() / beta;
        if (!derivs) {
            m.ok = std::isfinite(m.phi);
            return m;
        }
        m.grad = pe_.grad * pi;
        m.hess = Eigen::MatrixXd::Zero(dim, dim);
        for (Eigen::Index j = 0; j < k; ++j) {
            if (pi(j) == 0.0) continue;
            m.hess += pi(j) * pe_.hess[static_cast<std::size_t>(j)];
        }
        if (k > 1) {
            Eigen::MatrixXd weighted = pe_.grad * pi.asDiagonal();
            m.hess -= beta * (weighted * pe_.grad.transpose() - m.grad * m.grad.transpose());
        }
        if (p_.C.rows() > 0) {
            const Eigen::VectorXd inv = r.cwiseInverse();
            m.grad += p_.C.transpose() * inv / beta;
            m.hess -= p_.C.transpose() * inv.cwiseAbs2().asDiagonal() * p_.C / beta;
        }
        m.ok = std::isfinite(m.phi) && m.grad.allFinite() && m.hess.allFinite();
        return m;
    }

private:
    const MaxMinProblem& p_;
    PieceEval pe_;
};

// Ascent direction from (-H + delta I) p = grad, raising delta until the
// system is solved accurately and p points uphill.
Eigen::VectorXd newton_direction(const Model& m) {
    const Eigen::MatrixXd A = -m.hess;
    const double scale = 1.0 + A.diagonal().cwiseAbs().maxCoeff();
    double delta = 0.0;
    for (int attempt = 0; attempt < 40; ++attempt) {
        Eigen::MatrixXd M = A;
        M.diagonal().array() += delta;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
        if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() >= -1e-14 * scale).all()) {
            Eigen::VectorXd p = ldlt.solve(m.grad);
            const double dec = m.grad.dot(p);
            if (p.allFinite() && dec >= 0.0) {
                const double res = (M * p - m.grad).norm();
                if (res <= 1e-6 * (1.0 + m.grad.norm()) || delta > 0.0) return p;
            }
        }
        delta = delta == 0.0 ? 1e-12 * scale : delta * 10.0;
    }
    return m.grad;  // plain gradient step as the last resort
}

}  // namespace

MaxMinResult maximize_min_concave(const MaxMinProblem& problem, Eigen::VectorXd z0, const MaxMinOptions& opts) {
    if (problem.piece_count == 0 || !problem.pieces) throw Error(ErrorKind::InvalidInput, "max-min problem has no pieces");
    SoftMin sm(problem);
    MaxMinResult res;
    res.z = std::move(z0);
    std::vector<double> betas = opts.betas;
    if (problem.piece_count == 1 && problem.C.rows() == 0) betas = {1.0};  // nothing to smooth
    if (betas.empty()) throw Error(ErrorKind::InvalidInput, "empty smoothing schedule");

    for (double beta : betas) {
        Model m = sm.eval(res.z, beta, true);
        if (!m.ok) throw Error(ErrorKind::InvalidInput, "max-min start lies outside the domain");
        for (int it = 0; it < opts.max_newton; ++it) {
            const Eigen::VectorXd p = newton_direction(m);
            const double dec = m.grad.dot(p);
            if (dec * 0.5 <= opts.decrement_tol * (1.0 + std::abs(m.phi))) break;
            double t = 1.0;
            Model trial;
            bool moved = false;
            while (t > 1e-20) {
                trial = sm.eval(res.z + t * p, beta, false);
                if (trial.ok && trial.phi >= m.phi + 1e-4 * t * dec) {
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if (!moved) break;
            res.z += t * p;
            ++res.newton_steps;
            if (res.z.norm() > 1e12) {
                res.unbounded = true;
                res.value = std::numeric_limits<double>::infinity();
                res.smoothed = res.value;
                return res;
            }
            m = sm.eval(res.z, beta, true);
        }
        res.smoothed = m.phi;
        res.value = m.gmin;
    }
    const Model last = sm.eval(res.z, betas.back(), false);
    res.value = last.gmin;
    res.smoothed = last.phi;
    return res;
}

}  // namespace robmot
