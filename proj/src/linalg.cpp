#include "satprs/linalg.hpp"

#include "satprs/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace satprs::linalg {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
    return 0.5 * (m + m.transpose());
}

Eigen::MatrixXd symmetrize_checked(const Eigen::MatrixXd& m, std::string_view name) {
    if (m.rows() != m.cols()) {
        throw ShapeError(std::string(name) + " must be square");
    }
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymTol * scale) {
        throw PreconditionError(std::string(name) + " is not symmetric (asymmetry " +
                                std::to_string(asym) + ")");
    }
    return symmetrize(m);
}

double spectral_radius(const Eigen::MatrixXd& a) {
    if (a.size() == 0) return 0.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

double min_eigenvalue(const Eigen::MatrixXd& sym) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

double max_eigenvalue(const Eigen::MatrixXd& sym) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(es.eigenvalues().size() - 1);
}

Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& p) {
    Eigen::LLT<Eigen::MatrixXd> llt(p);
    if (llt.info() == Eigen::Success) {
        return llt.matrixL();
    }
    const Eigen::MatrixXd perturbed =
        p + 1e-12 * Eigen::MatrixXd::Identity(p.rows(), p.cols());
    llt.compute(perturbed);
    if (llt.info() != Eigen::Success) {
        throw CertificateError("matrix is not positive definite");
    }
    return llt.matrixL();
}

double max_generalized_eigenvalue(const Eigen::MatrixXd& m, const Eigen::MatrixXd& p) {
    const Eigen::MatrixXd l = cholesky_lower(p);
    const auto tri = l.triangularView<Eigen::Lower>();
    // L⁻¹ M L⁻ᵀ
    Eigen::MatrixXd x = tri.solve(m);
    x = tri.solve(x.transpose()).eval();
    return max_eigenvalue(symmetrize(x));
}

Eigen::MatrixXd project_psd(const Eigen::MatrixXd& sym) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    const Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0);
    const Eigen::MatrixXd& v = es.eigenvectors();
    return v * d.asDiagonal() * v.transpose();
}

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& w) {
    Eigen::LLT<Eigen::MatrixXd> llt(w);
    if (llt.info() == Eigen::Success) {
        return llt.matrixL();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w);
    const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
    if (es.eigenvalues()(0) < -kSymTol * scale) {
        throw PreconditionError("noise covariance is indefinite");
    }
    const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal();
}

}  // namespace satprs::linalg
