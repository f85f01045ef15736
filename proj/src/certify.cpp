#include "satprs/certify.hpp"

#include "satprs/errors.hpp"
#include "satprs/linalg.hpp"
#include "satprs/lmi_feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <string>

namespace satprs {

namespace {

Eigen::MatrixXd checked_spd(const Eigen::MatrixXd& P) {
    if (P.rows() != P.cols() || P.rows() == 0) {
        throw ShapeError("P must be square and non-empty");
    }
    Eigen::MatrixXd sym = linalg::symmetrize_checked(P, "P");
    if (!(linalg::min_eigenvalue(sym) > 0.0)) {
        throw CertificateError("P is not positive definite");
    }
    return sym;
}

double rate_on(const Eigen::MatrixXd& P, const Eigen::MatrixXd& a) {
    return linalg::max_generalized_eigenvalue(a.transpose() * P * a, P);
}

// Kronecker-form Stein solves are O(n⁶); beyond this size seeding is skipped.
constexpr Eigen::Index kMaxSeedDim = 12;

// X with AᵀXA − rate·X = −I; for rate > ρ(A)² it certifies A alone strictly.
std::optional<Eigen::MatrixXd> stein_seed(const Eigen::MatrixXd& a, double rate) {
    const Eigen::Index n = a.rows();
    const Eigen::MatrixXd at = a.transpose();
    Eigen::MatrixXd kron(n * n, n * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) kron.block(i * n, j * n, n, n) = a(j, i) * at;
    }
    const Eigen::MatrixXd lhs = rate * Eigen::MatrixXd::Identity(n * n, n * n) - kron;
    const Eigen::VectorXd x = lhs.partialPivLu().solve(Eigen::MatrixXd::Identity(n, n).reshaped());
    Eigen::MatrixXd p = linalg::symmetrize(x.reshaped(n, n));
    if (!p.allFinite() || !(linalg::min_eigenvalue(p) > 0.0)) return std::nullopt;
    return p;
}

// Candidate starting points at `rate`: the previous feasible P, each vertex's
// Stein solution and their sum. Returns the one with the lowest achieved rate.
std::pair<Eigen::MatrixXd, double> best_seed(const VertexSet& vertices, double rate,
                                             const std::optional<Eigen::MatrixXd>& previous) {
    std::vector<Eigen::MatrixXd> seeds;
    if (previous) seeds.push_back(*previous);
    const Eigen::Index n = vertices.open_loop().rows();
    if (n <= kMaxSeedDim) {
        Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
        for (const auto& a : vertices) {
            if (auto x = stein_seed(a, rate)) {
                sum += *x / x->trace();
                seeds.push_back(std::move(*x));
            }
        }
        if (sum.trace() > 0.0) seeds.push_back(sum);
    }
    if (seeds.empty()) seeds.push_back(Eigen::MatrixXd::Identity(n, n));

    std::pair<Eigen::MatrixXd, double> best{seeds.front(), std::numeric_limits<double>::infinity()};
    for (auto& p : seeds) {
        if (!(linalg::min_eigenvalue(p) > 0.0)) continue;
        double r = 0.0;
        for (const auto& a : vertices) r = std::max(r, rate_on(p, a));
        if (r < best.second) best = {std::move(p), r};
    }
    return best;
}

}  // namespace

double min_rate_for_P(const Eigen::MatrixXd& P, const VertexSet& vertices) {
    const Eigen::MatrixXd sym = checked_spd(P);
    double rate = 0.0;
    for (const auto& a : vertices) {
        if (a.rows() != sym.rows()) throw ShapeError("vertex and P dimensions differ");
        rate = std::max(rate, rate_on(sym, a));
    }
    return rate;
}

double lambda_L_for_P(const Eigen::MatrixXd& P, const SystemSpec& sys, const FeedbackGain& gain) {
    check_gain(sys, gain);
    const Eigen::MatrixXd sym = checked_spd(P);
    if (sym.rows() != sys.state_dim()) throw ShapeError("P must be n×n");
    return std::max(0.0, rate_on(sym, sys.A + sys.B * gain.K));
}

RateSynthesis synthesize_P_lambda(const SystemSpec& sys, const FeedbackGain& gain,
                                  const SynthesisOptions& opts) {
    if (!(opts.bisect_tol > 0.0) || !(opts.feas_tol > 0.0)) {
        throw PreconditionError("tolerances must be positive");
    }
    const VertexSet vertices = vertex_matrices(sys, gain);
    const auto n = static_cast<double>(sys.state_dim());

    ContractionLmi lmi;
    lmi.vertices.assign(vertices.begin(), vertices.end());
    lmi.trace = n * opts.lift_scale;
    lmi.floor = 1.0;

    LmiSolverOptions solver;
    solver.feas_tol = opts.feas_tol;
    solver.max_iterations = opts.max_iterations;
    solver.aim_below = 0.5 * opts.bisect_tol;

    const double rho = linalg::spectral_radius(sys.A);
    double lo = rho * rho;
    double hi = 1.0 - opts.bisect_tol;
    if (lo >= hi) {
        throw SynthesisError("open-loop contraction rate ρ(A)² is already above 1 − bisectTol", hi);
    }

    // A seed already certifying `rate` is accepted without iterating; otherwise
    // it warm-starts the projections.
    const auto attempt = [&](double rate, const std::optional<Eigen::MatrixXd>& previous) {
        auto [seed, seed_rate] = best_seed(vertices, rate, previous);
        seed *= lmi.trace / seed.trace();
        if (seed_rate <= rate && linalg::min_eigenvalue(seed) >= lmi.floor) {
            LmiSolution s;
            s.feasible = true;
            s.P = std::move(seed);
            s.achieved_rate = seed_rate;
            return s;
        }
        lmi.rate = rate;
        return solve_contraction_lmi(lmi, solver, seed);
    };

    LmiSolution best = attempt(hi, std::nullopt);
    if (!best.feasible) {
        throw SynthesisError("no common quadratic certificate found at λ = " + std::to_string(hi), hi);
    }
    hi = std::min(hi, best.achieved_rate);

    RateSynthesis out;
    while (hi - lo > opts.bisect_tol) {
        const double mid = 0.5 * (lo + hi);
        LmiSolution trial = attempt(mid, best.P);
        ++out.bisection_steps;
        if (trial.feasible) {
            hi = std::min(mid, trial.achieved_rate);
            best = std::move(trial);
        } else {
            lo = mid;
        }
    }

    out.P = linalg::symmetrize(best.P);
    if (opts.trace_scale) {
        if (!(*opts.trace_scale > 0.0)) throw PreconditionError("trace_scale must be positive");
        out.P *= n * *opts.trace_scale / out.P.trace();
    }
    out.lambda = min_rate_for_P(out.P, vertices);
    return out;
}

ContractionCertificate certificate_for_P(const Eigen::MatrixXd& P, const SystemSpec& sys,
                                         const FeedbackGain& gain, double feas_tol,
                                         double bisect_tol) {
    const VertexSet vertices = vertex_matrices(sys, gain);
    ContractionCertificate cert;
    cert.P = checked_spd(P);
    if (cert.P.rows() != sys.state_dim()) throw ShapeError("P must be n×n");
    cert.lambda = min_rate_for_P(cert.P, vertices);
    cert.lambda_L = lambda_L_for_P(cert.P, sys, gain);
    cert.feas_tol = feas_tol;
    cert.bisect_tol = bisect_tol;
    return cert;
}

ContractionCertificate synthesize_certificate(const SystemSpec& sys, const FeedbackGain& gain,
                                              const SynthesisOptions& opts) {
    const RateSynthesis synth = synthesize_P_lambda(sys, gain, opts);
    ContractionCertificate cert;
    cert.P = synth.P;
    cert.lambda = synth.lambda;
    cert.lambda_L = lambda_L_for_P(synth.P, sys, gain);
    cert.feas_tol = opts.feas_tol;
    cert.bisect_tol = opts.bisect_tol;
    return cert;
}

VerificationReport verify_certificate(const ContractionCertificate& cert, const SystemSpec& sys,
                                      const FeedbackGain& gain) {
    VerificationReport report;
    const Eigen::Index n = sys.state_dim();
    if (cert.P.rows() != n || cert.P.cols() != n || gain.K.rows() != sys.input_dim() ||
        gain.K.cols() != n) {
        return report;
    }
    const Eigen::MatrixXd P = linalg::symmetrize(cert.P);
    report.p_min_eigenvalue = linalg::min_eigenvalue(P);

    const VertexSet vertices = vertex_matrices(sys, gain);
    bool ok = report.p_min_eigenvalue >= cert.feas_tol;
    for (const auto& a : vertices) {
        const double r = linalg::min_eigenvalue(
            linalg::symmetrize(cert.lambda * P - a.transpose() * P * a));
        report.vertex_residuals.push_back(r);
        ok = ok && r >= -cert.feas_tol;
    }
    const Eigen::MatrixXd closed = vertices.closed_loop();
    report.lambda_L_residual = linalg::min_eigenvalue(
        linalg::symmetrize(cert.lambda_L * P - closed.transpose() * P * closed));
    report.rate_gap = cert.lambda - cert.lambda_L;
    ok = ok && report.lambda_L_residual >= -cert.feas_tol && report.rate_gap > 0.0 &&
         cert.lambda < 1.0 && cert.lambda_L >= 0.0;
    report.passed = ok;
    return report;
}

}  // namespace satprs
