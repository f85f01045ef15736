#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace satprs {

/// Contraction rates and the region-of-linearity data that select the
/// tightened rate λ̂.
struct ContractionProfile {
    double lambda = 0.0;
    double lambda_L = 0.0;
    double trPW = 0.0;
    double r_L = 0.0;  ///< may be +inf (K = 0)
    std::optional<double> lambda_bar_star;
    double lambda_hat = 0.0;
    double condition_lhs = 0.0;  ///< trPW / (1 − lambda)

    /// True when λ̂ fell back to the global rate λ.
    [[nodiscard]] bool fallback() const { return !lambda_bar_star.has_value(); }
};

/// Rate comparisons that classify the branch use this absolute tolerance.
inline constexpr double kRateBranchTol = 1e-12;

/// Scaling of the largest ellipsoid 𝓔(P, r) inside the region of linearity:
/// min_i (ubar_i − vbar_i)² / (K_i P⁻¹ K_iᵀ). Rows with K_i = 0 impose no
/// limit; K = 0 gives +inf.
double region_of_linearity_scaling(const Eigen::MatrixXd& P, const Eigen::MatrixXd& K,
                                   const Eigen::VectorXd& ubar, const Eigen::VectorXd& vbar);

double trace_PW(const Eigen::MatrixXd& P, const Eigen::MatrixXd& W);

/// Root λ̄* ∈ [λ_L, λ] of
///   g(μ) = (μ − λ_L)/(λ − λ_L)·r_L − trPW/(1 − μ).
/// g is strictly concave with g(λ_L) ≤ 0 < g(λ) when trPW/(1−λ) < r_L, so
/// plain bisection converges. Throws NotApplicableError when that condition fails.
double effective_rate(double lambda, double lambda_L, double trPW, double r_L);

/// λ̂ = λ̄* if trPW/(1−λ) < r_L, otherwise λ. Equality takes the λ branch.
ContractionProfile select_rate(double lambda, double lambda_L, double trPW, double r_L);

/// b_k = (1 − rate^k)/(1 − rate)·trPW for k = 0..k_max.
std::vector<double> expectation_bound_sequence(double rate, double trPW, int k_max);

/// c_{k+1} = λ_L c_k + ((λ − λ_L)/r_L) c_k² + trPW with c_0 = 0, unclamped.
std::vector<double> quadratic_recursion_bound(double lambda, double lambda_L, double r_L,
                                              double trPW, int k_max);

}  // namespace satprs
