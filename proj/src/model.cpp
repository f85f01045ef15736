#include "satprs/model.hpp"

#include "satprs/errors.hpp"
#include "satprs/linalg.hpp"

#include <bit>
#include <cmath>
#include <string>

namespace satprs {

namespace {

void require(bool cond, const char* what) {
    if (!cond) throw ShapeError(what);
}

void require_nominal_in_bounds(const Eigen::VectorXd& v, const Eigen::VectorXd& ubar) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!(std::abs(v(i)) <= ubar(i))) {
            throw PreconditionError("nominal input component " + std::to_string(i) +
                                    " exceeds its saturation bound");
        }
    }
}

}  // namespace

SystemSpec make_system(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd W, Eigen::VectorXd ubar) {
    require(A.rows() > 0 && A.rows() == A.cols(), "A must be square and non-empty");
    require(B.rows() == A.rows(), "B must have as many rows as A");
    require(B.cols() > 0, "B must have at least one column");
    require(W.rows() == A.rows() && W.cols() == A.cols(), "W must match the state dimension");
    require(ubar.size() == B.cols(), "ubar must have one entry per input");

    for (Eigen::Index i = 0; i < ubar.size(); ++i) {
        if (!(ubar(i) > 0.0) || !std::isfinite(ubar(i))) {
            throw PreconditionError("saturation bounds must be positive and finite");
        }
    }
    W = linalg::symmetrize_checked(W, "W");
    const double scale = std::max(1.0, W.cwiseAbs().maxCoeff());
    if (linalg::min_eigenvalue(W) < -linalg::kSymTol * scale) {
        throw PreconditionError("W must be positive semidefinite");
    }
    const double rho = linalg::spectral_radius(A);
    if (!(rho < 1.0)) {
        throw PreconditionError("A must be Schur stable (spectral radius " + std::to_string(rho) + ")");
    }
    return SystemSpec{std::move(A), std::move(B), std::move(W), std::move(ubar)};
}

void check_gain(const SystemSpec& sys, const FeedbackGain& gain) {
    require(gain.K.rows() == sys.input_dim() && gain.K.cols() == sys.state_dim(),
            "K must be m×n");
}

Eigen::VectorXd saturate(const Eigen::VectorXd& u, const Eigen::VectorXd& ubar) {
    require(u.size() == ubar.size(), "saturate: u and ubar differ in length");
    Eigen::VectorXd out(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        if (!(ubar(i) > 0.0)) throw PreconditionError("saturation bounds must be positive");
        out(i) = std::copysign(std::min(std::abs(u(i)), ubar(i)), u(i));
    }
    return out;
}

Eigen::VectorXd error_step(const Eigen::VectorXd& e, const Eigen::VectorXd& v,
                           const Eigen::VectorXd& w, const SystemSpec& sys,
                           const FeedbackGain& gain) {
    check_gain(sys, gain);
    require(e.size() == sys.state_dim() && w.size() == sys.state_dim(),
            "error_step: e and w must have n entries");
    require(v.size() == sys.input_dim(), "error_step: v must have m entries");
    require_nominal_in_bounds(v, sys.ubar);
    const Eigen::VectorXd u = gain.K * e + v;
    return sys.A * e + sys.B * (saturate(u, sys.ubar) - v) + w;
}

Eigen::VectorXd nominal_step(const Eigen::VectorXd& z, const Eigen::VectorXd& v,
                             const SystemSpec& sys) {
    require(z.size() == sys.state_dim(), "nominal_step: z must have n entries");
    require(v.size() == sys.input_dim(), "nominal_step: v must have m entries");
    return sys.A * z + sys.B * v;
}

VertexSet vertex_matrices(const SystemSpec& sys, const FeedbackGain& gain) {
    check_gain(sys, gain);
    const Eigen::Index m = sys.input_dim();
    if (m > kMaxVertexInputs) {
        throw PreconditionError("vertex enumeration refused for m = " + std::to_string(m) +
                                " > " + std::to_string(kMaxVertexInputs));
    }
    const std::size_t count = std::size_t{1} << m;

    // Rank-one terms B_(i) K_i, added per set bit.
    std::vector<Eigen::MatrixXd> terms;
    terms.reserve(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
        terms.emplace_back(sys.B.col(i) * gain.K.row(i));
    }

    std::vector<Eigen::MatrixXd> vertices(count);
    vertices[0] = sys.A;
    for (std::size_t mask = 1; mask < count; ++mask) {
        // Extend the vertex without the lowest set bit.
        const std::size_t low = mask & (~mask + 1);
        const auto bit = static_cast<std::size_t>(std::countr_zero(low));
        vertices[mask] = vertices[mask ^ low] + terms[bit];
    }
    return VertexSet(std::move(vertices));
}

}  // namespace satprs
