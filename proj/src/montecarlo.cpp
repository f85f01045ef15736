#include "satprs/montecarlo.hpp"

#include "satprs/errors.hpp"
#include "satprs/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <thread>

namespace satprs {

NoiseKind parse_noise_kind(std::string_view name) {
    if (name == "gaussian") return NoiseKind::Gaussian;
    if (name == "uniform") return NoiseKind::Uniform;
    if (name == "rademacher_scaled") return NoiseKind::RademacherScaled;
    throw ConfigError("unknown noise kind '" + std::string(name) + "'");
}

std::string_view to_string(NoiseKind kind) {
    switch (kind) {
        case NoiseKind::Gaussian: return "gaussian";
        case NoiseKind::Uniform: return "uniform";
        case NoiseKind::RademacherScaled: return "rademacher_scaled";
    }
    return "gaussian";
}

Eigen::VectorXd NominalPolicy::at(int k, Eigen::Index m) const {
    switch (kind) {
        case Kind::Zero: return Eigen::VectorXd::Zero(m);
        case Kind::Constant: return values.front();
        case Kind::Sequence: return values[static_cast<std::size_t>(k)];
    }
    return Eigen::VectorXd::Zero(m);
}

TrajectoryRng::TrajectoryRng(std::uint64_t seed, std::uint64_t trajectory) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trajectory),
                      static_cast<std::uint32_t>(trajectory >> 32)};
    engine_.seed(seq);
}

double TrajectoryRng::uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double TrajectoryRng::standard_normal() {
    if (spare_normal_) {
        const double z = *spare_normal_;
        spare_normal_.reset();
        return z;
    }
    // 1 − U lies in (0, 1], keeping the logarithm finite.
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_normal_ = radius * std::sin(angle);
    return radius * std::cos(angle);
}

double TrajectoryRng::rademacher() {
    return (engine_() >> 63) != 0 ? 1.0 : -1.0;
}

Eigen::VectorXd standard_draw(NoiseKind kind, Eigen::Index n, TrajectoryRng& rng) {
    Eigen::VectorXd xi(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        switch (kind) {
            case NoiseKind::Gaussian: xi(i) = rng.standard_normal(); break;
            case NoiseKind::Uniform: xi(i) = std::sqrt(3.0) * (2.0 * rng.uniform01() - 1.0); break;
            case NoiseKind::RademacherScaled: xi(i) = rng.rademacher(); break;
        }
    }
    return xi;
}

Eigen::VectorXd sample_noise(NoiseKind kind, const Eigen::MatrixXd& W_factor, TrajectoryRng& rng) {
    return W_factor * standard_draw(kind, W_factor.cols(), rng);
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

namespace {

void validate(const SystemSpec& sys, const Eigen::MatrixXd& P, const SimulationConfig& cfg,
              std::span<const Ellipsoid> tracked) {
    if (cfg.horizon < 1) throw PreconditionError("horizon must be at least 1");
    if (cfg.num_traj < 1) throw PreconditionError("num_traj must be at least 1");
    if (cfg.final_state_stride < 1) throw PreconditionError("final_state_stride must be at least 1");
    if (P.rows() != sys.state_dim() || P.cols() != sys.state_dim()) throw ShapeError("P must be n×n");

    const auto check_v = [&](const Eigen::VectorXd& v) {
        if (v.size() != sys.input_dim()) throw ShapeError("nominal input must have m entries");
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            if (!(std::abs(v(i)) <= sys.ubar(i))) {
                throw PreconditionError("nominal input exceeds the saturation bound");
            }
        }
    };
    const NominalPolicy& policy = cfg.v_policy;
    if (policy.kind == NominalPolicy::Kind::Constant) {
        if (policy.values.size() != 1) throw PreconditionError("constant policy needs one vector");
        check_v(policy.values.front());
    } else if (policy.kind == NominalPolicy::Kind::Sequence) {
        if (policy.values.size() < static_cast<std::size_t>(cfg.horizon)) {
            throw PreconditionError("nominal sequence is shorter than the horizon");
        }
        for (const auto& v : policy.values) check_v(v);
    }
    if (!tracked.empty() && tracked.size() != 1 &&
        tracked.size() != static_cast<std::size_t>(cfg.horizon) + 1) {
        throw PreconditionError("tracked ellipsoids must be one set or one per step");
    }
}

}  // namespace

EnsembleStats simulate_ensemble(const SystemSpec& sys, const FeedbackGain& gain,
                                const Eigen::MatrixXd& P, const SimulationConfig& cfg,
                                std::span<const Ellipsoid> tracked) {
    check_gain(sys, gain);
    validate(sys, P, cfg, tracked);

    const Eigen::Index n = sys.state_dim();
    const Eigen::Index m = sys.input_dim();
    const int steps = cfg.horizon + 1;
    const Eigen::MatrixXd factor = linalg::psd_factor(sys.W);

    EnsembleStats stats;
    stats.horizon = cfg.horizon;
    stats.num_traj = cfg.num_traj;
    stats.P = P;
    stats.q = Eigen::MatrixXd::Zero(cfg.num_traj, steps);
    if (cfg.keep_states) {
        stats.states.assign(static_cast<std::size_t>(steps), Eigen::MatrixXd::Zero(n, cfg.num_traj));
    }
    Eigen::MatrixXd finals(n, cfg.num_traj);
    // Membership flags, num_traj × steps; stored as doubles to reuse pairwise_sum.
    Eigen::MatrixXd inside;
    if (!tracked.empty()) inside = Eigen::MatrixXd::Zero(cfg.num_traj, steps);

    std::vector<Eigen::VectorXd> nominal(static_cast<std::size_t>(cfg.horizon));
    for (int k = 0; k < cfg.horizon; ++k) nominal[static_cast<std::size_t>(k)] = cfg.v_policy.at(k, m);

    const auto run = [&](int traj) {
        TrajectoryRng rng(cfg.seed, static_cast<std::uint64_t>(traj));
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        for (int k = 0; k < steps; ++k) {
            if (k > 0) {
                const Eigen::VectorXd& v = nominal[static_cast<std::size_t>(k - 1)];
                const Eigen::VectorXd u = gain.K * e + v;
                e = sys.A * e + sys.B * (saturate(u, sys.ubar) - v) + sample_noise(cfg.noise, factor, rng);
            }
            stats.q(traj, k) = e.dot(P * e);
            if (cfg.keep_states) stats.states[static_cast<std::size_t>(k)].col(traj) = e;
            if (!tracked.empty()) {
                const Ellipsoid& set = tracked.size() == 1 ? tracked.front()
                                                           : tracked[static_cast<std::size_t>(k)];
                inside(traj, k) = contains(set, e) ? 1.0 : 0.0;
            }
        }
        finals.col(traj) = e;
    };

    unsigned workers = cfg.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.workers;
    workers = std::min<unsigned>(workers, static_cast<unsigned>(cfg.num_traj));
    if (workers <= 1) {
        for (int t = 0; t < cfg.num_traj; ++t) run(t);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (int t = static_cast<int>(w); t < cfg.num_traj; t += static_cast<int>(workers)) run(t);
            });
        }
    }

    const auto count = static_cast<double>(cfg.num_traj);
    stats.mean_q.resize(static_cast<std::size_t>(steps));
    stats.stderr_q.resize(static_cast<std::size_t>(steps));
    std::vector<double> column(static_cast<std::size_t>(cfg.num_traj));
    for (int k = 0; k < steps; ++k) {
        for (int t = 0; t < cfg.num_traj; ++t) column[static_cast<std::size_t>(t)] = stats.q(t, k);
        const double mean = pairwise_sum(column) / count;
        for (double& c : column) c = (c - mean) * (c - mean);
        const double var = cfg.num_traj > 1 ? pairwise_sum(column) / (count - 1.0) : 0.0;
        stats.mean_q[static_cast<std::size_t>(k)] = mean;
        stats.stderr_q[static_cast<std::size_t>(k)] = std::sqrt(var / count);
    }
    if (!tracked.empty()) {
        stats.containment.resize(static_cast<std::size_t>(steps));
        for (int k = 0; k < steps; ++k) {
            for (int t = 0; t < cfg.num_traj; ++t) column[static_cast<std::size_t>(t)] = inside(t, k);
            stats.containment[static_cast<std::size_t>(k)] = pairwise_sum(column) / count;
        }
    }

    const int kept = (cfg.num_traj + cfg.final_state_stride - 1) / cfg.final_state_stride;
    stats.final_states.resize(n, kept);
    for (int j = 0; j < kept; ++j) stats.final_states.col(j) = finals.col(j * cfg.final_state_stride);
    return stats;
}

double violation_rate(const EnsembleStats& stats, const Ellipsoid& e, int k) {
    if (k < 0 || k > stats.horizon) throw PreconditionError("step index out of range");
    int outside = 0;
    if (!stats.states.empty()) {
        const Eigen::MatrixXd& xs = stats.states[static_cast<std::size_t>(k)];
        for (Eigen::Index t = 0; t < xs.cols(); ++t) {
            if (!contains(e, xs.col(t))) ++outside;
        }
    } else if (e.P.rows() == stats.P.rows() && e.P == stats.P) {
        for (int t = 0; t < stats.num_traj; ++t) {
            if (!within_scaling(stats.q(t, k), e.r)) ++outside;
        }
    } else {
        throw PreconditionError("states were not kept and the ellipsoid shape differs from the ensemble P");
    }
    return static_cast<double>(outside) / static_cast<double>(stats.num_traj);
}

}  // namespace satprs
