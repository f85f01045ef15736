#pragma once

#include <Eigen/Dense>

#include <vector>

namespace satprs {

/// 𝓔(P, r) = {x : xᵀPx ≤ r}. r may be +inf (whole space).
struct Ellipsoid {
    Eigen::MatrixXd P;
    double r = 0.0;
};

/// Markov-bound reachable sets r_k = (1 − λ̂^k)/(ε(1 − λ̂))·trPW, k = 0..k_max,
/// all sharing the shape matrix P.
std::vector<Ellipsoid> prs_sequence(const Eigen::MatrixXd& P, double lambda_hat, double trPW,
                                    double epsilon, int k_max);

/// Ultimate bound r = trPW/(ε(1 − λ̂)), the limit of prs_sequence.
Ellipsoid pub(const Eigen::MatrixXd& P, double lambda_hat, double trPW, double epsilon);

/// q ≤ r + 1e-12·max(1, r); the membership rule for a precomputed q = xᵀPx.
bool within_scaling(double q, double r);

/// within_scaling(xᵀPx, r).
bool contains(const Ellipsoid& e, const Eigen::VectorXd& x);

/// Planar area π·r/√det(P); throws ShapeError for n ≠ 2.
double area(const Ellipsoid& e);

/// Points √r·L⁻ᵀ(cos θ, sin θ) for θ = 2πj/num_points, P = LLᵀ (n = 2 only).
std::vector<Eigen::Vector2d> boundary_polyline(const Ellipsoid& e, int num_points);

}  // namespace satprs
