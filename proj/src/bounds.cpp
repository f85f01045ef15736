#include "satprs/bounds.hpp"

#include "satprs/errors.hpp"
#include "satprs/linalg.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace satprs {

namespace {

constexpr int kRootIterations = 200;

void require_rate(double rate, const char* name) {
    if (!(rate >= 0.0 && rate < 1.0)) {
        throw PreconditionError(std::string(name) + " must lie in [0, 1)");
    }
}

void require_ordered(double lambda, double lambda_L) {
    require_rate(lambda, "lambda");
    if (!(lambda_L >= 0.0 && lambda_L < lambda)) {
        throw PreconditionError("lambda_L must satisfy 0 ≤ lambda_L < lambda");
    }
}

}  // namespace

double region_of_linearity_scaling(const Eigen::MatrixXd& P, const Eigen::MatrixXd& K,
                                   const Eigen::VectorXd& ubar, const Eigen::VectorXd& vbar) {
    if (P.rows() != P.cols() || K.cols() != P.rows()) throw ShapeError("K must be m×n with P n×n");
    if (ubar.size() != K.rows() || vbar.size() != K.rows()) {
        throw ShapeError("ubar and vbar must have m entries");
    }
    for (Eigen::Index i = 0; i < ubar.size(); ++i) {
        if (!(vbar(i) >= 0.0 && vbar(i) <= ubar(i))) {
            throw PreconditionError("nominal bound vbar must satisfy 0 ≤ vbar ≤ ubar");
        }
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(linalg::symmetrize(P));
    if (llt.info() != Eigen::Success) throw CertificateError("P is not positive definite");

    double r = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < K.rows(); ++i) {
        const Eigen::VectorXd row = K.row(i).transpose();
        if (row.isZero(0.0)) continue;
        const double denom = row.dot(llt.solve(row));
        const double margin = ubar(i) - vbar(i);
        r = std::min(r, margin * margin / denom);
    }
    return r;
}

double trace_PW(const Eigen::MatrixXd& P, const Eigen::MatrixXd& W) {
    if (P.rows() != W.rows() || P.cols() != W.cols() || P.rows() != P.cols()) {
        throw ShapeError("P and W must be square of equal size");
    }
    // Tr(PW) = Σ_ij P_ij W_ji
    return P.cwiseProduct(W.transpose()).sum();
}

double effective_rate(double lambda, double lambda_L, double trPW, double r_L) {
    require_ordered(lambda, lambda_L);
    if (!(trPW >= 0.0)) throw PreconditionError("Tr(PW) must be nonnegative");
    const double lhs = trPW / (1.0 - lambda);
    if (!(r_L - lhs > kRateBranchTol)) {
        throw NotApplicableError("region-of-linearity condition Tr(PW)/(1−λ) < r_L does not hold");
    }
    if (trPW == 0.0 || std::isinf(r_L)) {
        return lambda_L;
    }

    const auto g = [&](double mu) {
        return (mu - lambda_L) / (lambda - lambda_L) * r_L - trPW / (1.0 - mu);
    };
    double lo = lambda_L;  // g < 0
    double hi = lambda;    // g > 0
    for (int i = 0; i < kRootIterations && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (g(mid) > 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

ContractionProfile select_rate(double lambda, double lambda_L, double trPW, double r_L) {
    if (!(lambda < 1.0)) throw PreconditionError("lambda must be below 1");
    require_ordered(lambda, lambda_L);
    if (!(trPW >= 0.0)) throw PreconditionError("Tr(PW) must be nonnegative");
    if (!(r_L >= 0.0)) throw PreconditionError("r_L must be nonnegative");

    ContractionProfile profile;
    profile.lambda = lambda;
    profile.lambda_L = lambda_L;
    profile.trPW = trPW;
    profile.r_L = r_L;
    profile.condition_lhs = trPW / (1.0 - lambda);
    if (r_L - profile.condition_lhs > kRateBranchTol) {
        profile.lambda_bar_star = effective_rate(lambda, lambda_L, trPW, r_L);
        profile.lambda_hat = *profile.lambda_bar_star;
    } else {
        profile.lambda_hat = lambda;
    }
    return profile;
}

std::vector<double> expectation_bound_sequence(double rate, double trPW, int k_max) {
    require_rate(rate, "rate");
    if (k_max < 0) throw PreconditionError("k_max must be nonnegative");
    // Horner form of the geometric sum: exact first term, and monotone in rate
    // under rounding, which the closed form (1 − rate^k)/(1 − rate) is not.
    std::vector<double> out(static_cast<std::size_t>(k_max) + 1, 0.0);
    for (std::size_t k = 1; k < out.size(); ++k) out[k] = rate * out[k - 1] + trPW;
    return out;
}

std::vector<double> quadratic_recursion_bound(double lambda, double lambda_L, double r_L,
                                              double trPW, int k_max) {
    require_ordered(lambda, lambda_L);
    if (k_max < 0) throw PreconditionError("k_max must be nonnegative");
    if (!(r_L > 0.0)) throw NotApplicableError("quadratic recursion needs r_L > 0");
    const double curvature = std::isinf(r_L) ? 0.0 : (lambda - lambda_L) / r_L;
    std::vector<double> out(static_cast<std::size_t>(k_max) + 1, 0.0);
    for (int k = 0; k < k_max; ++k) {
        const double c = out[static_cast<std::size_t>(k)];
        out[static_cast<std::size_t>(k) + 1] = lambda_L * c + curvature * c * c + trPW;
    }
    return out;
}

}  // namespace satprs
