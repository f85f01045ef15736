#include "satprs/lmi_feasibility.hpp"

#include "satprs/errors.hpp"
#include "satprs/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace satprs {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Symmetric basis E_k for the upper triangle, P = Σ p_k E_k.
std::vector<MatrixXd> symmetric_basis(Eigen::Index n) {
    std::vector<MatrixXd> basis;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            MatrixXd e = MatrixXd::Zero(n, n);
            e(i, j) = 1.0;
            e(j, i) = 1.0;
            basis.push_back(std::move(e));
        }
    }
    return basis;
}

class BlockMap {
public:
    BlockMap(const ContractionLmi& problem, double rate)
        : n_(problem.vertices.front().rows()), problem_(problem), rate_(rate) {
        const auto basis = symmetric_basis(n_);
        const auto d = static_cast<Eigen::Index>(basis.size());
        const auto blocks = static_cast<Eigen::Index>(problem.vertices.size()) + 1;
        const Eigen::Index nn = n_ * n_;

        g_.resize(blocks * nn, d);
        trace_row_ = VectorXd::Zero(d);
        for (Eigen::Index k = 0; k < d; ++k) {
            const MatrixXd& e = basis[static_cast<std::size_t>(k)];
            g_.col(k).segment(0, nn) = e.reshaped();
            for (std::size_t j = 0; j < problem.vertices.size(); ++j) {
                const MatrixXd& a = problem.vertices[j];
                const MatrixXd s = rate_ * e - a.transpose() * e * a;
                g_.col(k).segment(static_cast<Eigen::Index>(j + 1) * nn, nn) = s.reshaped();
            }
            trace_row_(k) = e.trace();
        }
        normal_.compute(g_.transpose() * g_);
        h_inv_t_ = normal_.solve(trace_row_);
        t_h_inv_t_ = trace_row_.dot(h_inv_t_);
        floor_offset_ = VectorXd::Zero(blocks * nn);
        floor_offset_.segment(0, nn) = (problem.floor * MatrixXd::Identity(n_, n_)).reshaped();
    }

    [[nodiscard]] Eigen::Index blocks() const { return g_.rows() / (n_ * n_); }

    // Stacked block vector of P: [P − floor·I; rate·P − A_JᵀPA_J ...].
    [[nodiscard]] VectorXd apply(const MatrixXd& p) const {
        VectorXd out(g_.rows());
        const Eigen::Index nn = n_ * n_;
        out.segment(0, nn) = (p - problem_.floor * MatrixXd::Identity(n_, n_)).reshaped();
        for (std::size_t j = 0; j < problem_.vertices.size(); ++j) {
            const MatrixXd& a = problem_.vertices[j];
            const MatrixXd s = rate_ * p - a.transpose() * p * a;
            out.segment(static_cast<Eigen::Index>(j + 1) * nn, nn) = s.reshaped();
        }
        return out;
    }

    // Least-squares P whose block image is nearest to `target`, subject to Tr(P) = trace.
    [[nodiscard]] MatrixXd project_affine(const VectorXd& target) const {
        const VectorXd rhs = g_.transpose() * (target + floor_offset_);
        const VectorXd free = normal_.solve(rhs);
        const double mu = (trace_row_.dot(free) - problem_.trace) / t_h_inv_t_;
        const VectorXd p = free - mu * h_inv_t_;

        MatrixXd out(n_, n_);
        Eigen::Index k = 0;
        for (Eigen::Index i = 0; i < n_; ++i) {
            for (Eigen::Index j = i; j < n_; ++j, ++k) {
                out(i, j) = p(k);
                out(j, i) = p(k);
            }
        }
        return out;
    }

    // Blockwise PSD projection; returns the squared distance moved.
    double project_cones(VectorXd& stacked) const {
        const Eigen::Index nn = n_ * n_;
        double moved = 0.0;
        for (Eigen::Index b = 0; b < blocks(); ++b) {
            auto seg = stacked.segment(b * nn, nn);
            const MatrixXd block = linalg::symmetrize(seg.reshaped(n_, n_));
            const MatrixXd proj = linalg::project_psd(block);
            moved += (proj - block).squaredNorm();
            seg = proj.reshaped();
        }
        return moved;
    }

private:
    Eigen::Index n_;
    const ContractionLmi& problem_;
    double rate_;
    MatrixXd g_;
    VectorXd trace_row_;
    Eigen::LDLT<MatrixXd> normal_;
    VectorXd h_inv_t_;
    double t_h_inv_t_ = 1.0;
    VectorXd floor_offset_;
};

// Achieved rate of P, or +inf when P is not sufficiently positive definite.
double achieved_rate(const MatrixXd& p, const std::vector<MatrixXd>& vertices, double min_eig) {
    if (linalg::min_eigenvalue(p) < min_eig) {
        return std::numeric_limits<double>::infinity();
    }
    Eigen::LLT<MatrixXd> llt(p);
    if (llt.info() != Eigen::Success) {
        return std::numeric_limits<double>::infinity();
    }
    const MatrixXd l = llt.matrixL();
    const auto tri = l.triangularView<Eigen::Lower>();
    double rate = 0.0;
    for (const MatrixXd& a : vertices) {
        // ‖Lᵀ A L⁻ᵀ‖² = λmax(L⁻¹AᵀPAL⁻ᵀ)
        const MatrixXd lt_a = l.transpose() * a;
        const MatrixXd x = tri.solve(lt_a.transpose()).transpose();
        Eigen::JacobiSVD<MatrixXd> svd(x);
        const double s = svd.singularValues()(0);
        rate = std::max(rate, s * s);
    }
    return rate;
}

}  // namespace

LmiSolution solve_contraction_lmi(const ContractionLmi& problem, const LmiSolverOptions& opts,
                                  const std::optional<Eigen::MatrixXd>& warm_start) {
    if (problem.vertices.empty()) {
        throw PreconditionError("contraction LMI needs at least one vertex");
    }
    const Eigen::Index n = problem.vertices.front().rows();
    if (problem.trace < problem.floor * static_cast<double>(n)) {
        throw PreconditionError("trace budget is below n·floor; the LMI is trivially infeasible");
    }

    const BlockMap map(problem, std::max(0.0, problem.rate - opts.aim_below));

    MatrixXd p = warm_start.value_or(MatrixXd::Identity(n, n));
    p *= problem.trace / p.trace();

    LmiSolution result;
    VectorXd stacked = map.apply(p);
    double window_gap = std::numeric_limits<double>::infinity();

    for (int it = 0; it < opts.max_iterations; ++it) {
        const double rate = achieved_rate(p, problem.vertices, opts.feas_tol);
        if (rate <= problem.rate + opts.feas_tol) {
            result.feasible = true;
            result.P = p;
            result.achieved_rate = rate;
            result.iterations = it;
            return result;
        }

        const double gap = std::sqrt(map.project_cones(stacked));
        result.gap = gap;
        if (it > 0 && it % opts.stall_window == 0) {
            if (window_gap - gap < opts.stall_rel * window_gap) {
                result.iterations = it;
                result.P = p;
                return result;
            }
            window_gap = gap;
        }

        p = map.project_affine(stacked);
        stacked = map.apply(p);
    }
    result.iterations = opts.max_iterations;
    result.P = p;
    return result;
}

}  // namespace satprs
