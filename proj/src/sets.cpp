#include "satprs/sets.hpp"

#include "satprs/bounds.hpp"
#include "satprs/errors.hpp"
#include "satprs/linalg.hpp"

#include <cmath>
#include <numbers>

namespace satprs {

namespace {

void require_levels(double lambda_hat, double epsilon) {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) {
        throw PreconditionError("violation level epsilon must lie in (0, 1]");
    }
    if (!(lambda_hat >= 0.0 && lambda_hat < 1.0)) {
        throw PreconditionError("lambda_hat must lie in [0, 1)");
    }
}

}  // namespace

std::vector<Ellipsoid> prs_sequence(const Eigen::MatrixXd& P, double lambda_hat, double trPW,
                                    double epsilon, int k_max) {
    require_levels(lambda_hat, epsilon);
    if (k_max < 0) throw PreconditionError("k_max must be nonnegative");
    std::vector<Ellipsoid> out;
    out.reserve(static_cast<std::size_t>(k_max) + 1);
    for (double b : expectation_bound_sequence(lambda_hat, trPW, k_max)) {
        out.push_back(Ellipsoid{P, b / epsilon});
    }
    return out;
}

Ellipsoid pub(const Eigen::MatrixXd& P, double lambda_hat, double trPW, double epsilon) {
    require_levels(lambda_hat, epsilon);
    return Ellipsoid{P, trPW / (epsilon * (1.0 - lambda_hat))};
}

bool within_scaling(double q, double r) {
    if (std::isinf(r)) return true;
    return q <= r + 1e-12 * std::max(1.0, r);
}

bool contains(const Ellipsoid& e, const Eigen::VectorXd& x) {
    if (x.size() != e.P.rows()) throw ShapeError("point dimension differs from the ellipsoid");
    return within_scaling(x.dot(e.P * x), e.r);
}

double area(const Ellipsoid& e) {
    if (e.P.rows() != 2 || e.P.cols() != 2) throw ShapeError("area is defined for planar ellipsoids only");
    const double det = e.P.determinant();
    if (!(det > 0.0)) throw CertificateError("ellipsoid shape matrix is not positive definite");
    return std::numbers::pi * e.r / std::sqrt(det);
}

std::vector<Eigen::Vector2d> boundary_polyline(const Ellipsoid& e, int num_points) {
    if (e.P.rows() != 2 || e.P.cols() != 2) throw ShapeError("boundary polyline needs n = 2");
    if (num_points < 3) throw PreconditionError("boundary polyline needs at least 3 points");
    const Eigen::Matrix2d l = linalg::cholesky_lower(linalg::symmetrize(e.P));
    const auto lt = l.transpose().triangularView<Eigen::Upper>();
    const double scale = std::sqrt(e.r);

    std::vector<Eigen::Vector2d> out;
    out.reserve(static_cast<std::size_t>(num_points));
    for (int j = 0; j < num_points; ++j) {
        const double theta = 2.0 * std::numbers::pi * j / num_points;
        const Eigen::Vector2d unit(std::cos(theta), std::sin(theta));
        out.emplace_back(scale * lt.solve(unit));
    }
    return out;
}

}  // namespace satprs
