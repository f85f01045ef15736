#pragma once

#include "satprs/model.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace satprs {

/// Common quadratic Lyapunov certificate for the saturated error dynamics:
/// every hull vertex satisfies A_Jᵀ P A_J ⪯ lambda·P and the unsaturated
/// closed loop satisfies (A+BK)ᵀ P (A+BK) ⪯ lambda_L·P.
struct ContractionCertificate {
    Eigen::MatrixXd P;
    double lambda = 0.0;
    double lambda_L = 0.0;
    double feas_tol = 1e-7;
    double bisect_tol = 1e-4;
};

struct SynthesisOptions {
    double feas_tol = 1e-7;
    double bisect_tol = 1e-4;
    int max_iterations = 50'000;
    /// Trace budget n·lift_scale used inside the solver together with P ⪰ I.
    /// Bounds the condition number of any certificate the solver can find.
    double lift_scale = 100.0;
    /// When set, the returned P is rescaled to Tr(P) = n·trace_scale.
    std::optional<double> trace_scale;
};

struct RateSynthesis {
    Eigen::MatrixXd P;
    double lambda = 0.0;
    int bisection_steps = 0;
};

struct VerificationReport {
    /// eigmin(λP − A_JᵀPA_J), one entry per vertex bitmask.
    std::vector<double> vertex_residuals;
    /// eigmin(λ_L P − (A+BK)ᵀP(A+BK)).
    double lambda_L_residual = 0.0;
    /// λ − λ_L; must be positive.
    double rate_gap = 0.0;
    double p_min_eigenvalue = 0.0;
    bool passed = false;
};

/// Smallest λ with A_Jᵀ P A_J ⪯ λP on every vertex, i.e. the largest
/// generalized eigenvalue of (A_Jᵀ P A_J, P) over J. Throws CertificateError
/// when P is not SPD.
double min_rate_for_P(const Eigen::MatrixXd& P, const VertexSet& vertices);

/// Smallest λ_L with (A+BK)ᵀ P (A+BK) ⪯ λ_L P.
double lambda_L_for_P(const Eigen::MatrixXd& P, const SystemSpec& sys, const FeedbackGain& gain);

/// Bisection on λ over [ρ(A)², 1) with an alternating-projection feasibility
/// oracle. Throws SynthesisError if no certificate exists at λ = 1 − bisect_tol.
RateSynthesis synthesize_P_lambda(const SystemSpec& sys, const FeedbackGain& gain,
                                  const SynthesisOptions& opts = {});

/// Builds a certificate around a given P (λ and λ_L recomputed from it).
ContractionCertificate certificate_for_P(const Eigen::MatrixXd& P, const SystemSpec& sys,
                                         const FeedbackGain& gain, double feas_tol = 1e-7,
                                         double bisect_tol = 1e-4);

/// Synthesis followed by λ_L extraction.
ContractionCertificate synthesize_certificate(const SystemSpec& sys, const FeedbackGain& gain,
                                              const SynthesisOptions& opts = {});

/// Independent post-hoc check. Never throws on numerical failure; a P that
/// is not SPD simply fails.
VerificationReport verify_certificate(const ContractionCertificate& cert, const SystemSpec& sys,
                                      const FeedbackGain& gain);

}  // namespace satprs
