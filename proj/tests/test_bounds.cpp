#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "satprs/bounds.hpp"
#include "satprs/errors.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace satprs;
using Catch::Approx;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLambda = 0.9802;
constexpr double kLambdaL = 0.7684;
constexpr double kTrPW = 7.05;
constexpr double kRL = 485.47;

Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }
}  // namespace

TEST_CASE("region_of_linearity_scaling", "[bounds]") {
    SECTION("reference values") {
        const double r = region_of_linearity_scaling(reference_system::P(), reference_system::K(), scalar(10.0),
                                                     scalar(0.0));
        CHECK(r == Approx(485.47).epsilon(0.01));
    }
    SECTION("unit row, unit bound") {
        const Eigen::MatrixXd k = (Eigen::MatrixXd(1, 2) << 1.0, 0.0).finished();
        CHECK(region_of_linearity_scaling(Eigen::MatrixXd::Identity(2, 2), k, scalar(1.0), scalar(0.0)) ==
              Approx(1.0));
    }
    SECTION("nominal input exhausts the bound") {
        CHECK(region_of_linearity_scaling(reference_system::P(), reference_system::K(), scalar(10.0),
                                          scalar(10.0)) == 0.0);
    }
    SECTION("K = 0 never saturates") {
        CHECK(region_of_linearity_scaling(reference_system::P(), Eigen::MatrixXd::Zero(1, 2), scalar(1.0),
                                          scalar(0.0)) == kInf);
    }
    SECTION("the binding row wins and zero rows are skipped") {
        const Eigen::MatrixXd k = (Eigen::MatrixXd(3, 2) << 1.0, 0.0, 0.0, 0.0, 0.0, 2.0).finished();
        const Eigen::VectorXd ubar = (Eigen::VectorXd(3) << 3.0, 1.0, 3.0).finished();
        // rows: 9/1 and 9/4
        CHECK(region_of_linearity_scaling(Eigen::MatrixXd::Identity(2, 2), k, ubar, Eigen::VectorXd::Zero(3)) ==
              Approx(2.25));
    }
    SECTION("boundary of 𝓔(P, r_L) touches the saturation limit") {
        std::mt19937_64 rng(3);
        for (int trial = 0; trial < 20; ++trial) {
            const Eigen::MatrixXd P = oracle::random_spd(rng, 3);
            const Eigen::MatrixXd k = oracle::random_matrix(rng, 2, 3);
            const Eigen::VectorXd ubar = (Eigen::VectorXd(2) << 1.5, 0.7).finished();
            const double r = region_of_linearity_scaling(P, k, ubar, Eigen::VectorXd::Zero(2));
            // max over 𝓔(P, r) of |K_i x| is √(r·K_i P⁻¹ K_iᵀ).
            const Eigen::MatrixXd kpk = k * P.inverse() * k.transpose();
            double worst = 0.0;
            for (int i = 0; i < 2; ++i) worst = std::max(worst, std::sqrt(r * kpk(i, i)) / ubar(i));
            CHECK(worst == Approx(1.0).epsilon(1e-12));
        }
    }
    SECTION("vbar above ubar is rejected") {
        CHECK_THROWS_AS(region_of_linearity_scaling(reference_system::P(), reference_system::K(), scalar(1.0),
                                                    scalar(2.0)),
                        PreconditionError);
    }
}

TEST_CASE("trace_PW", "[bounds]") {
    CHECK(trace_PW(reference_system::P(), reference_system::W()) == Approx(7.05).margin(1e-12));
    CHECK(trace_PW(reference_system::P(), Eigen::MatrixXd::Zero(2, 2)) == 0.0);
    const Eigen::MatrixXd w = (Eigen::MatrixXd(2, 2) << 2.0, 0.3, 0.3, 0.5).finished();
    CHECK(trace_PW(Eigen::MatrixXd::Identity(2, 2), w) == Approx(2.5));
    CHECK_THROWS_AS(trace_PW(Eigen::MatrixXd::Identity(3, 3), w), ShapeError);
}

TEST_CASE("effective_rate", "[bounds]") {
    SECTION("reference tuple") {
        CHECK(effective_rate(kLambda, kLambdaL, kTrPW, kRL) == Approx(0.7826).margin(0.005));
    }
    SECTION("noise-free root sits at λ_L") {
        CHECK(effective_rate(kLambda, kLambdaL, 0.0, kRL) == kLambdaL);
    }
    SECTION("condition violated") {
        CHECK_THROWS_AS(effective_rate(kLambda, kLambdaL, kTrPW, 300.0), NotApplicableError);
        CHECK_THROWS_AS(effective_rate(kLambda, kLambdaL, kTrPW, 0.0), NotApplicableError);
    }
    SECTION("self-consistency at the root") {
        const double mu = effective_rate(kLambda, kLambdaL, kTrPW, kRL);
        const double lhs = kTrPW / (1.0 - mu);
        const double rhs = (mu - kLambdaL) / (kLambda - kLambdaL) * kRL;
        CHECK(lhs <= rhs + 1e-6);
        CHECK(lhs == Approx(rhs).epsilon(1e-6));
    }
}

TEST_CASE("effective_rate matches a dense grid scan", "[bounds][oracle]") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checked = 0;
    while (checked < 100) {
        const double lambda = 0.5 + 0.499 * u(rng);
        const double lambda_L = lambda * u(rng) * 0.95;
        const double trPW = 0.01 + 20.0 * u(rng);
        const double lhs = trPW / (1.0 - lambda);
        const double r_L = lhs * (1.0 + 5.0 * u(rng)) + 1e-3;
        const double root = effective_rate(lambda, lambda_L, trPW, r_L);
        const double grid = oracle::grid_scan_root(lambda, lambda_L, trPW, r_L);
        const double h = (lambda - lambda_L) / 999'999.0;
        CHECK(std::abs(root - grid) <= h + 1e-8);
        CHECK(root >= lambda_L);
        CHECK(root <= lambda);
        ++checked;
    }
}

TEST_CASE("effective_rate is homogeneous in (trPW, r_L)", "[bounds][property]") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> c(0.01, 100.0);
    const double base = effective_rate(kLambda, kLambdaL, kTrPW, kRL);
    for (int i = 0; i < 50; ++i) {
        const double s = c(rng);
        CHECK(effective_rate(kLambda, kLambdaL, s * kTrPW, s * kRL) == Approx(base).margin(1e-8));
    }
}

TEST_CASE("select_rate", "[bounds]") {
    SECTION("reference tuple takes the effective rate") {
        const ContractionProfile p = select_rate(kLambda, kLambdaL, kTrPW, kRL);
        CHECK(p.condition_lhs == Approx(356.06).margin(0.05));
        REQUIRE(p.lambda_bar_star);
        CHECK(p.lambda_hat == *p.lambda_bar_star);
        CHECK(p.lambda_hat == Approx(0.7826).margin(0.005));
        CHECK_FALSE(p.fallback());
    }
    SECTION("r_L = 0 falls back to λ") {
        const ContractionProfile p = select_rate(kLambda, kLambdaL, kTrPW, 0.0);
        CHECK(p.fallback());
        CHECK(p.lambda_hat == kLambda);
    }
    SECTION("noise-free") {
        CHECK(select_rate(kLambda, kLambdaL, 0.0, 1.0).lambda_hat == kLambdaL);
    }
    SECTION("K = 0 degenerate case") {
        CHECK(select_rate(kLambda, kLambdaL, kTrPW, kInf).lambda_hat == kLambdaL);
    }
    SECTION("equality takes the conservative branch") {
        const double lhs = kTrPW / (1.0 - kLambda);
        CHECK(select_rate(kLambda, kLambdaL, kTrPW, lhs).fallback());
    }
    SECTION("invalid rates") {
        CHECK_THROWS(select_rate(1.0, 0.5, kTrPW, kRL));
        CHECK_THROWS(select_rate(0.9, 0.95, kTrPW, kRL));
    }
}

TEST_CASE("expectation_bound_sequence", "[bounds]") {
    const auto b = expectation_bound_sequence(0.7826, kTrPW, 2000);
    CHECK(b[0] == 0.0);
    CHECK(b[1] == Approx(kTrPW).margin(1e-12));
    CHECK(b.back() == Approx(32.43).margin(0.5));
    for (std::size_t k = 1; k < b.size(); ++k) CHECK(b[k] >= b[k - 1]);
    CHECK(b[50] > b[49]);

    for (double v : expectation_bound_sequence(0.9, 0.0, 50)) CHECK(v == 0.0);
    CHECK(expectation_bound_sequence(0.0, kTrPW, 3) == std::vector<double>{0.0, kTrPW, kTrPW, kTrPW});
    CHECK_THROWS(expectation_bound_sequence(1.0, kTrPW, 5));
    CHECK(expectation_bound_sequence(0.5, 1.0, 0).size() == 1);
}

TEST_CASE("bound sequences are ordered by rate", "[bounds][property]") {
    const double lbar = effective_rate(kLambda, kLambdaL, kTrPW, kRL);
    const auto ll = expectation_bound_sequence(kLambdaL, kTrPW, 100);
    const auto lb = expectation_bound_sequence(lbar, kTrPW, 100);
    const auto l = expectation_bound_sequence(kLambda, kTrPW, 100);
    const auto c = quadratic_recursion_bound(kLambda, kLambdaL, kRL, kTrPW, 100);
    for (std::size_t k = 0; k <= 100; ++k) {
        CHECK(ll[k] <= lb[k]);
        CHECK(lb[k] <= l[k]);
        CHECK(c[k] <= l[k] + 1e-9);
    }

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double lambda = 0.5 + 0.49 * u(rng);
        const double lambda_L = lambda * 0.9 * u(rng);
        const double trPW = 0.1 + 10.0 * u(rng);
        const double r_L = trPW / (1.0 - lambda) * (1.0 + 3.0 * u(rng));
        const auto q = quadratic_recursion_bound(lambda, lambda_L, r_L, trPW, 100);
        const auto s = expectation_bound_sequence(lambda, trPW, 100);
        for (std::size_t k = 0; k <= 100; ++k) CHECK(q[k] <= s[k] * (1.0 + 1e-12));
    }
}

TEST_CASE("quadratic_recursion_bound", "[bounds]") {
    const auto c = quadratic_recursion_bound(kLambda, kLambdaL, kRL, kTrPW, 5);
    CHECK(c[0] == 0.0);
    CHECK(c[1] == kTrPW);
    CHECK(c[2] == Approx(kLambdaL * kTrPW + (kLambda - kLambdaL) / kRL * kTrPW * kTrPW + kTrPW));
    for (double v : quadratic_recursion_bound(kLambda, kLambdaL, kRL, 0.0, 20)) CHECK(v == 0.0);
    CHECK_THROWS_AS(quadratic_recursion_bound(kLambda, kLambdaL, 0.0, kTrPW, 5), NotApplicableError);
    // Infinite r_L removes the curvature term: the λ_L series.
    const auto lin = quadratic_recursion_bound(kLambda, kLambdaL, kInf, kTrPW, 30);
    const auto ll = expectation_bound_sequence(kLambdaL, kTrPW, 30);
    for (std::size_t k = 0; k <= 30; ++k) CHECK(lin[k] == Approx(ll[k]).epsilon(1e-12));
}
