#pragma once

#include "satprs/model.hpp"
#include "satprs/sets.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace satprs {

enum class NoiseKind { Gaussian, Uniform, RademacherScaled };

NoiseKind parse_noise_kind(std::string_view name);
std::string_view to_string(NoiseKind kind);

/// Nominal input schedule v_k.
struct NominalPolicy {
    enum class Kind { Zero, Constant, Sequence };
    Kind kind = Kind::Zero;
    /// One vector for Constant, one per step for Sequence.
    std::vector<Eigen::VectorXd> values;

    [[nodiscard]] Eigen::VectorXd at(int k, Eigen::Index m) const;
};

struct SimulationConfig {
    int horizon = 100;
    int num_traj = 1000;
    std::uint64_t seed = 0;
    NoiseKind noise = NoiseKind::Gaussian;
    NominalPolicy v_policy;
    /// 0 selects std::thread::hardware_concurrency().
    unsigned workers = 0;
    /// Keep every e_k of every trajectory (needed for violation_rate on
    /// ellipsoids with a different shape matrix).
    bool keep_states = true;
    /// Emit every stride-th final state; 1 keeps all.
    int final_state_stride = 1;
};

/// Per-trajectory random stream. The engine is std::mt19937_64 seeded through
/// std::seed_seq from (seed, trajectory index), so a trajectory's draws do not
/// depend on which worker computes it. Uniform and normal deviates are
/// produced here rather than by std distributions so the sequence is
/// identical across standard-library implementations.
class TrajectoryRng {
public:
    TrajectoryRng(std::uint64_t seed, std::uint64_t trajectory);

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01();
    /// Standard normal via Box–Muller.
    double standard_normal();
    /// ±1 with probability 1/2 each.
    double rademacher();

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_normal_;
};

/// Unit-variance standard draws ξ for the given kind.
Eigen::VectorXd standard_draw(NoiseKind kind, Eigen::Index n, TrajectoryRng& rng);

/// w = M·ξ with W = MMᵀ, so E[w] = 0 and E[wwᵀ] = W for every kind.
Eigen::VectorXd sample_noise(NoiseKind kind, const Eigen::MatrixXd& W_factor, TrajectoryRng& rng);

struct EnsembleStats {
    int horizon = 0;
    int num_traj = 0;
    Eigen::MatrixXd P;
    /// Empirical mean of q_k = e_kᵀPe_k, k = 0..horizon.
    std::vector<double> mean_q;
    /// Sample standard deviation of q_k divided by √num_traj.
    std::vector<double> stderr_q;
    /// Fraction of trajectories inside the tracked ellipsoid(s) per step; empty if none tracked.
    std::vector<double> containment;
    /// q values, num_traj × (horizon+1).
    Eigen::MatrixXd q;
    /// Final-step error cloud, n × (subsampled count).
    Eigen::MatrixXd final_states;
    /// All states per step (n × num_traj each) when keep_states.
    std::vector<Eigen::MatrixXd> states;
};

/// Simulates num_traj trajectories of e_{k+1} = f(e_k, v_k) + w_k from e_0 = 0.
/// `tracked` may hold one ellipsoid (used at every step) or horizon+1 of them.
/// Results are bitwise identical for fixed (seed, cfg) regardless of workers.
EnsembleStats simulate_ensemble(const SystemSpec& sys, const FeedbackGain& gain,
                                const Eigen::MatrixXd& P, const SimulationConfig& cfg,
                                std::span<const Ellipsoid> tracked = {});

/// Fraction of trajectories with e_k ∉ E.
double violation_rate(const EnsembleStats& stats, const Ellipsoid& e, int k);

/// Order-fixed pairwise summation.
double pairwise_sum(std::span<const double> values);

}  // namespace satprs
