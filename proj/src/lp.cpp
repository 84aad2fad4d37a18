#include "robmot/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "robmot/error.hpp"

namespace robmot {

const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "Optimal";
        case LpStatus::Infeasible: return "Infeasible";
        case LpStatus::Unbounded: return "Unbounded";
    }
    return "Unknown";
}

void LinearProgram::validate() const {
    if (A.rows() != b.size() || A.cols() != c.size())
        throw Error(ErrorKind::InvalidInput, "linear program dimensions are inconsistent");
    if (!A.allFinite() || !b.allFinite() || !c.allFinite())
        throw Error(ErrorKind::InvalidInput, "linear program has non-finite entries");
}

namespace {

constexpr double kPivotTol = 1e-11;
constexpr int kRefactorEvery = 64;
constexpr int kDegenerateStreak = 50;

class Simplex {
public:
    Simplex(const LinearProgram& lp, const SolveOptions& opts)
        : m_(static_cast<int>(lp.A.rows())),
          n_(static_cast<int>(lp.A.cols())),
          tol_(opts.tolerance),
          max_pivots_(opts.iterations_or(defaults::kSimplexPivots)) {
        sign_ = Eigen::VectorXd::Ones(m_);
        for (int i = 0; i < m_; ++i)
            if (lp.b(i) < 0) sign_(i) = -1.0;
        A_ = sign_.asDiagonal() * lp.A;
        b_ = sign_.cwiseProduct(lp.b);
        c_ = lp.c;
        basis_.resize(m_);
        is_basic_.assign(n_ + m_, 0);
        for (int i = 0; i < m_; ++i) {
            basis_[i] = n_ + i;
            is_basic_[n_ + i] = 1;
        }
        Binv_ = Eigen::MatrixXd::Identity(m_, m_);
        xB_ = b_;
    }

    LpSolution run() {
        LpSolution sol;
        // Phase 1: minimize the sum of artificials.
        Eigen::VectorXd cost1 = Eigen::VectorXd::Zero(n_ + m_);
        cost1.tail(m_).setOnes();
        iterate(cost1, sol);
        const double phase1 = artificial_mass();
        sol.infeasibility = phase1;
        const double bscale = std::max(1.0, b_.cwiseAbs().maxCoeff());
        if (phase1 > tol_ * bscale) {
            sol.status = LpStatus::Infeasible;
            sol.farkas = sign_.cwiseProduct(duals(cost1));
            sol.pivots = pivots_;
            return sol;
        }
        drive_out_artificials();

        Eigen::VectorXd cost2 = Eigen::VectorXd::Zero(n_ + m_);
        cost2.head(n_) = c_;
        if (!iterate(cost2, sol)) {
            sol.status = LpStatus::Unbounded;
            sol.pivots = pivots_;
            return sol;
        }
        sol.status = LpStatus::Optimal;
        sol.x = Eigen::VectorXd::Zero(n_);
        for (int i = 0; i < m_; ++i)
            if (basis_[i] < n_) sol.x(basis_[i]) = std::max(0.0, xB_(i));
        sol.value = c_.dot(sol.x);
        sol.duals = sign_.cwiseProduct(duals(cost2));
        sol.basis.resize(m_);
        for (int i = 0; i < m_; ++i) sol.basis[i] = basis_[i] < n_ ? basis_[i] : -1;
        sol.pivots = pivots_;
        return sol;
    }

private:
    Eigen::VectorXd column(int j) const {
        if (j < n_) return A_.col(j);
        Eigen::VectorXd e = Eigen::VectorXd::Zero(m_);
        e(j - n_) = 1.0;
        return e;
    }

    double artificial_mass() const {
        double s = 0.0;
        for (int i = 0; i < m_; ++i)
            if (basis_[i] >= n_) s += std::max(0.0, xB_(i));
        return s;
    }

    Eigen::VectorXd duals(const Eigen::VectorXd& cost) const {
        Eigen::VectorXd cB(m_);
        for (int i = 0; i < m_; ++i) cB(i) = cost(basis_[i]);
        return Binv_.transpose() * cB;
    }

    void refactor() {
        Eigen::MatrixXd B(m_, m_);
        for (int i = 0; i < m_; ++i) B.col(i) = column(basis_[i]);
        Binv_ = B.partialPivLu().inverse();
        xB_ = Binv_ * b_;
    }

    void pivot(int r, int entering, const Eigen::VectorXd& u) {
        const double ur = u(r);
        const double theta = xB_(r) / ur;
        Binv_.row(r) /= ur;
        for (int i = 0; i < m_; ++i)
            if (i != r && u(i) != 0.0) Binv_.row(i) -= u(i) * Binv_.row(r);
        xB_ -= theta * u;
        xB_(r) = theta;
        is_basic_[basis_[r]] = 0;
        basis_[r] = entering;
        is_basic_[entering] = 1;
        if (++pivots_ % kRefactorEvery == 0) refactor();
        if (pivots_ > max_pivots_) throw Error(ErrorKind::IterationLimit, "simplex pivot cap exceeded");
    }

    // Returns false when the objective is unbounded below.
    bool iterate(const Eigen::VectorXd& cost, LpSolution&) {
        const double cscale = std::max(1.0, cost.cwiseAbs().maxCoeff());
        const double dtol = tol_ * cscale;
        bool bland = false;
        int streak = 0;
        while (true) {
            const Eigen::VectorXd y = duals(cost);
            const Eigen::VectorXd d = cost.head(n_) - A_.transpose() * y;
            int entering = -1;
            double best = -dtol;
            for (int j = 0; j < n_; ++j) {
                if (is_basic_[j]) continue;
                if (d(j) < -dtol) {
                    if (bland) {
                        entering = j;
                        break;
                    }
                    if (d(j) < best) {
                        best = d(j);
                        entering = j;
                    }
                }
            }
            if (entering < 0) return true;

            const Eigen::VectorXd u = Binv_ * A_.col(entering);
            int leave = -1;
            double ratio = std::numeric_limits<double>::infinity();
            for (int i = 0; i < m_; ++i) {
                if (u(i) <= kPivotTol) continue;
                const double r = std::max(0.0, xB_(i)) / u(i);
                const double slack = 1e-12 * (1.0 + std::abs(ratio));
                if (leave < 0 || r < ratio - slack) {
                    leave = i;
                    ratio = r;
                } else if (r <= ratio + slack) {
                    const bool take = bland ? basis_[i] < basis_[leave] : u(i) > u(leave);
                    if (take) {
                        leave = i;
                        ratio = std::min(ratio, r);
                    }
                }
            }
            if (leave < 0) return false;
            if (ratio <= 1e-12) {
                if (++streak > kDegenerateStreak) bland = true;
            } else {
                streak = 0;
                bland = false;
            }
            pivot(leave, entering, u);
        }
    }

    void drive_out_artificials() {
        for (int r = 0; r < m_; ++r) {
            if (basis_[r] < n_) continue;
            const Eigen::RowVectorXd row = Binv_.row(r) * A_;
            int best = -1;
            double mag = 1e-9;
            for (int j = 0; j < n_; ++j) {
                if (is_basic_[j]) continue;
                if (std::abs(row(j)) > mag) {
                    mag = std::abs(row(j));
                    best = j;
                }
            }
            if (best >= 0) pivot(r, best, Binv_ * A_.col(best));
            // Otherwise the row is redundant and its artificial stays basic at zero.
        }
    }

    int m_, n_;
    double tol_;
    long max_pivots_;
    long pivots_ = 0;
    Eigen::MatrixXd A_;
    Eigen::VectorXd b_, c_, sign_;
    std::vector<int> basis_;
    std::vector<char> is_basic_;
    Eigen::MatrixXd Binv_;
    Eigen::VectorXd xB_;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const SolveOptions& opts) {
    lp.validate();
    if (opts.tolerance <= 0) throw Error(ErrorKind::InvalidInput, "tolerance must be positive");
    if (lp.A.rows() == 0) {
        LpSolution sol;
        // No rows: x = 0 is optimal unless some cost is negative.
        for (Eigen::Index j = 0; j < lp.c.size(); ++j)
            if (lp.c(j) < 0) {
                sol.status = LpStatus::Unbounded;
                return sol;
            }
        sol.status = LpStatus::Optimal;
        sol.x = Eigen::VectorXd::Zero(lp.c.size());
        sol.duals = Eigen::VectorXd::Zero(0);
        return sol;
    }
    Simplex s(lp, opts);
    return s.run();
}

std::vector<int> independent_rows(const Eigen::MatrixXd& A, double tol) {
    std::vector<int> rows;
    if (A.rows() == 0) return rows;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A.transpose());
    qr.setThreshold(tol);
    const auto rank = qr.rank();
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index i = 0; i < rank; ++i) rows.push_back(perm(i));
    std::sort(rows.begin(), rows.end());
    return rows;
}

}  // namespace robmot
