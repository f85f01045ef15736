#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "satprs/bounds.hpp"
#include "satprs/certify.hpp"
#include "satprs/errors.hpp"
#include "satprs/linalg.hpp"
#include "satprs/montecarlo.hpp"

#include <cmath>
#include <limits>

using namespace satprs;
using Catch::Approx;

namespace {

SystemSpec reference(const Eigen::MatrixXd& W = reference_system::W()) {
    return make_system(reference_system::A(), reference_system::B(), W, reference_system::ubar());
}

struct Moments {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

Moments moments(NoiseKind kind, const Eigen::MatrixXd& W, int draws, std::uint64_t seed) {
    const Eigen::MatrixXd m = linalg::psd_factor(W);
    TrajectoryRng rng(seed, 0);
    const Eigen::Index n = W.rows();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < draws; ++i) {
        const Eigen::VectorXd w = sample_noise(kind, m, rng);
        sum += w;
        outer += w * w.transpose();
    }
    Moments out;
    out.mean = sum / draws;
    out.cov = outer / draws - out.mean * out.mean.transpose();
    return out;
}

SimulationConfig small_config(int traj, unsigned workers) {
    SimulationConfig cfg;
    cfg.horizon = 30;
    cfg.num_traj = traj;
    cfg.seed = 99;
    cfg.workers = workers;
    return cfg;
}

}  // namespace

TEST_CASE("noise kinds", "[montecarlo]") {
    CHECK(parse_noise_kind("gaussian") == NoiseKind::Gaussian);
    CHECK(parse_noise_kind("uniform") == NoiseKind::Uniform);
    CHECK(parse_noise_kind("rademacher_scaled") == NoiseKind::RademacherScaled);
    CHECK(to_string(NoiseKind::Uniform) == "uniform");
    CHECK_THROWS(parse_noise_kind("cauchy"));
}

TEST_CASE("sample_noise moments", "[montecarlo][oracle]") {
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
    for (NoiseKind kind : {NoiseKind::Gaussian, NoiseKind::Uniform, NoiseKind::RademacherScaled}) {
        CAPTURE(to_string(kind));
        const Moments m = moments(kind, I, 100'000, 4);
        CHECK(m.mean.norm() < 0.02);
        CHECK((m.cov - I).norm() < 0.05);
    }
    SECTION("correlated and singular covariances") {
        const Eigen::MatrixXd w = (Eigen::MatrixXd(2, 2) << 2.0, 0.6, 0.6, 0.5).finished();
        const Moments m = moments(NoiseKind::Uniform, w, 100'000, 5);
        CHECK((m.cov - w).norm() < 0.05 * w.norm());
        const Eigen::MatrixXd rank1 = (Eigen::MatrixXd(2, 2) << 1.0, 1.0, 1.0, 1.0).finished();
        const Moments r = moments(NoiseKind::Gaussian, rank1, 100'000, 6);
        CHECK((r.cov - rank1).norm() < 0.05);
    }
    SECTION("zero covariance") {
        const Eigen::MatrixXd zero = linalg::psd_factor(Eigen::MatrixXd::Zero(2, 2));
        TrajectoryRng rng(1, 1);
        for (int i = 0; i < 100; ++i) CHECK(sample_noise(NoiseKind::Gaussian, zero, rng).isZero(0.0));
    }
    SECTION("indefinite covariance") {
        CHECK_THROWS_AS(linalg::psd_factor((Eigen::MatrixXd(2, 2) << 1.0, 0.0, 0.0, -1.0).finished()),
                        PreconditionError);
    }
}

TEST_CASE("uniform and Rademacher draws have the advertised support", "[montecarlo]") {
    TrajectoryRng rng(8, 3);
    for (int i = 0; i < 10'000; ++i) {
        const double u = rng.uniform01();
        CHECK((u >= 0.0 && u < 1.0));
        const double r = rng.rademacher();
        CHECK(std::abs(r) == 1.0);
        CHECK(std::abs(standard_draw(NoiseKind::Uniform, 1, rng)(0)) <= std::sqrt(3.0));
    }
}

TEST_CASE("trajectory streams depend only on (seed, index)", "[montecarlo]") {
    TrajectoryRng a(42, 7);
    TrajectoryRng b(42, 7);
    TrajectoryRng c(42, 8);
    TrajectoryRng d(43, 7);
    bool differs_c = false;
    bool differs_d = false;
    for (int i = 0; i < 64; ++i) {
        const double x = a.standard_normal();
        CHECK(x == b.standard_normal());
        differs_c = differs_c || x != c.standard_normal();
        differs_d = differs_d || x != d.standard_normal();
    }
    CHECK(differs_c);
    CHECK(differs_d);
}

TEST_CASE("noise-free ensembles stay at the origin", "[montecarlo]") {
    const SystemSpec sys = reference(Eigen::MatrixXd::Zero(2, 2));
    const EnsembleStats s =
        simulate_ensemble(sys, FeedbackGain{reference_system::K()}, reference_system::P(), small_config(20, 2));
    for (double q : s.mean_q) CHECK(q == 0.0);
    CHECK(s.q.isZero(0.0));
    CHECK(s.final_states.isZero(0.0));
}

TEST_CASE("ensembles are bitwise independent of the worker count", "[montecarlo][determinism]") {
    const SystemSpec sys = reference();
    const FeedbackGain gain{reference_system::K()};
    const Eigen::MatrixXd P = reference_system::P();
    const Ellipsoid tracked{P, 40.0};
    for (int traj : {1, 37}) {
        const EnsembleStats base = simulate_ensemble(sys, gain, P, small_config(traj, 1), {&tracked, 1});
        for (unsigned workers : {2u, 3u, 8u}) {
            CAPTURE(traj, workers);
            const EnsembleStats other = simulate_ensemble(sys, gain, P, small_config(traj, workers), {&tracked, 1});
            CHECK(other.q == base.q);
            CHECK(other.mean_q == base.mean_q);
            CHECK(other.stderr_q == base.stderr_q);
            CHECK(other.containment == base.containment);
            CHECK(other.final_states == base.final_states);
        }
    }
}

TEST_CASE("ensemble bookkeeping", "[montecarlo]") {
    const SystemSpec sys = reference();
    const FeedbackGain gain{reference_system::K()};
    const Eigen::MatrixXd P = reference_system::P();
    SimulationConfig cfg = small_config(50, 2);
    cfg.final_state_stride = 4;
    const EnsembleStats s = simulate_ensemble(sys, gain, P, cfg);
    CHECK(s.mean_q.size() == 31);
    CHECK(s.mean_q[0] == 0.0);
    CHECK(s.q.rows() == 50);
    CHECK(s.q.cols() == 31);
    CHECK(s.final_states.cols() == 13);
    REQUIRE(s.states.size() == 31);
    // q is recomputable from the stored states.
    for (int k : {1, 17, 30}) {
        for (int j = 0; j < 50; ++j) {
            const Eigen::VectorXd e = s.states[static_cast<std::size_t>(k)].col(j);
            CHECK(s.q(j, k) == Approx(e.dot(P * e)).epsilon(1e-14));
        }
        CHECK(s.mean_q[static_cast<std::size_t>(k)] == Approx(s.q.col(k).mean()).epsilon(1e-12));
    }
    CHECK(s.final_states.col(1) == s.states.back().col(4));
}

TEST_CASE("nominal inputs", "[montecarlo]") {
    const SystemSpec sys = reference(Eigen::MatrixXd::Zero(2, 2));
    const FeedbackGain gain{reference_system::K()};
    SimulationConfig cfg = small_config(3, 1);
    cfg.v_policy.kind = NominalPolicy::Kind::Constant;
    cfg.v_policy.values = {Eigen::VectorXd::Constant(1, 10.5)};
    CHECK_THROWS_AS(simulate_ensemble(sys, gain, reference_system::P(), cfg), PreconditionError);

    cfg.v_policy.values = {Eigen::VectorXd::Constant(1, 5.0)};
    const EnsembleStats s = simulate_ensemble(sys, gain, reference_system::P(), cfg);
    CHECK(s.q.isZero(0.0));  // e = 0 stays put for any admissible v

    cfg.v_policy.kind = NominalPolicy::Kind::Sequence;
    cfg.v_policy.values.assign(5, Eigen::VectorXd::Zero(1));
    CHECK_THROWS_AS(simulate_ensemble(sys, gain, reference_system::P(), cfg), PreconditionError);
}

TEST_CASE("violation_rate", "[montecarlo]") {
    const SystemSpec sys = reference();
    const FeedbackGain gain{reference_system::K()};
    const Eigen::MatrixXd P = reference_system::P();
    const EnsembleStats s = simulate_ensemble(sys, gain, P, small_config(200, 2));
    CHECK(violation_rate(s, Ellipsoid{P, 1e12}, 30) == 0.0);
    CHECK(violation_rate(s, Ellipsoid{P, 0.0}, 30) == 1.0);
    CHECK(violation_rate(s, Ellipsoid{P, 0.0}, 0) == 0.0);
    // A different shape matrix is evaluated on the stored states.
    CHECK(violation_rate(s, Ellipsoid{Eigen::MatrixXd::Identity(2, 2), 1e12}, 10) == 0.0);
    CHECK_THROWS(violation_rate(s, Ellipsoid{P, 1.0}, 31));
    CHECK_THROWS(violation_rate(s, Ellipsoid{P, 1.0}, -1));
}

TEST_CASE("reference ensemble respects the expectation bounds and PRS", "[montecarlo][reference]") {
    const SystemSpec sys = reference();
    const FeedbackGain gain{reference_system::K()};
    const Eigen::MatrixXd P = reference_system::P();
    const ContractionCertificate cert = certificate_for_P(P, sys, gain);
    const double trPW = trace_PW(P, sys.W);
    const double r_L = region_of_linearity_scaling(P, gain.K, sys.ubar, Eigen::VectorXd::Zero(1));
    const ContractionProfile prof = select_rate(cert.lambda, cert.lambda_L, trPW, r_L);
    REQUIRE_FALSE(prof.fallback());

    SimulationConfig cfg;
    cfg.horizon = 100;
    cfg.num_traj = 1000;
    cfg.seed = 20250101;
    const double eps = 0.2;
    const auto prs = prs_sequence(P, prof.lambda_hat, trPW, eps, cfg.horizon);
    const EnsembleStats s = simulate_ensemble(sys, gain, P, cfg, prs);

    const auto b_hat = expectation_bound_sequence(prof.lambda_hat, trPW, cfg.horizon);
    const auto b = expectation_bound_sequence(cert.lambda, trPW, cfg.horizon);
    const double slack = eps + 3.0 * std::sqrt(eps * (1.0 - eps) / cfg.num_traj);
    for (int k = 0; k <= cfg.horizon; ++k) {
        const auto i = static_cast<std::size_t>(k);
        CAPTURE(k);
        CHECK(s.mean_q[i] <= b_hat[i] + 3.0 * s.stderr_q[i]);
        CHECK(s.mean_q[i] <= b[i] + 3.0 * s.stderr_q[i]);
        CHECK(1.0 - s.containment[i] <= slack);
        CHECK(violation_rate(s, prs[i], k) == Approx(1.0 - s.containment[i]).margin(1e-15));
    }
    CHECK(violation_rate(s, pub(P, prof.lambda_hat, trPW, eps), cfg.horizon) <= eps);
}

TEST_CASE("pairwise_sum", "[montecarlo]") {
    CHECK(pairwise_sum({}) == 0.0);
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0, 5.0};
    CHECK(pairwise_sum(v) == 15.0);
    std::vector<double> many(100'001, 0.1);
    CHECK(pairwise_sum(many) == Approx(10'000.1).epsilon(1e-14));
}
