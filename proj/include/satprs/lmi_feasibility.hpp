#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace satprs {

/// Find symmetric P with
///   rate·P − A_Jᵀ P A_J ⪰ 0   for every vertex A_J,
///   P − floor·I ⪰ 0,
///   Tr(P) = trace,
/// by alternating projections between the affine image of P in the product
/// of block spaces and the product of PSD cones.
struct ContractionLmi {
    std::vector<Eigen::MatrixXd> vertices;
    double rate = 0.0;
    double trace = 1.0;
    double floor = 1.0;
};

struct LmiSolverOptions {
    double feas_tol = 1e-7;
    int max_iterations = 50'000;
    /// The run is declared infeasible once the projection gap shrinks by less
    /// than stall_rel (relative) across stall_window iterations.
    int stall_window = 1'000;
    double stall_rel = 1e-6;
    /// Projections target rate − aim_below while acceptance stays at rate, so
    /// iterates reach the accepted set in finitely many steps when it has interior.
    double aim_below = 0.0;
};

struct LmiSolution {
    bool feasible = false;
    Eigen::MatrixXd P;
    /// Max generalized eigenvalue of (A_Jᵀ P A_J, P) over vertices; valid when feasible.
    double achieved_rate = 0.0;
    int iterations = 0;
    double gap = 0.0;
};

/// A candidate P is accepted as soon as λmin(P) ≥ feas_tol and its achieved
/// rate is ≤ rate + feas_tol; acceptance is checked on the actual matrix, not
/// on the projection residual.
LmiSolution solve_contraction_lmi(const ContractionLmi& problem, const LmiSolverOptions& opts,
                                  const std::optional<Eigen::MatrixXd>& warm_start = std::nullopt);

}  // namespace satprs
