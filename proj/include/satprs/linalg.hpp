#pragma once

#include <Eigen/Dense>

#include <string_view>

namespace satprs::linalg {

inline constexpr double kSymTol = 1e-9;

/// (M + Mᵀ)/2.
Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m);

/// Symmetrizes after checking that the asymmetry is below kSymTol (relative to max(1, |M|max)).
/// Throws PreconditionError on larger asymmetry.
Eigen::MatrixXd symmetrize_checked(const Eigen::MatrixXd& m, std::string_view name);

double spectral_radius(const Eigen::MatrixXd& a);

double min_eigenvalue(const Eigen::MatrixXd& sym);
double max_eigenvalue(const Eigen::MatrixXd& sym);

/// Lower Cholesky factor of an SPD matrix. On failure the matrix is perturbed
/// once by 1e-12·I; a second failure throws CertificateError.
Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& p);

/// Largest generalized eigenvalue of (M, P) for symmetric M and SPD P, via the
/// Cholesky congruence L⁻¹ M L⁻ᵀ with P = LLᵀ.
double max_generalized_eigenvalue(const Eigen::MatrixXd& m, const Eigen::MatrixXd& p);

/// Projection onto the PSD cone in Frobenius norm (eigenvalue clipping).
Eigen::MatrixXd project_psd(const Eigen::MatrixXd& sym);

/// Factor M with W = MMᵀ. Cholesky first; singular PSD W falls back to the
/// eigenvalue square root. Indefinite W throws PreconditionError.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& w);

}  // namespace satprs::linalg
