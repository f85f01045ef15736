#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace satprs {

/// Saturated plant x⁺ = Ax + B·sat(u) + w with E[w] = 0 and E[wwᵀ] = W.
///
/// Construct through make_system(), which enforces the invariants:
/// W symmetric PSD, every saturation bound positive, A Schur stable.
struct SystemSpec {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    Eigen::MatrixXd W;
    Eigen::VectorXd ubar;

    [[nodiscard]] Eigen::Index state_dim() const { return A.rows(); }
    [[nodiscard]] Eigen::Index input_dim() const { return B.cols(); }
};

/// Error-feedback gain, u = v + K·e. K is m×n.
struct FeedbackGain {
    Eigen::MatrixXd K;
};

/// The 2^m matrices A + Σ_{i∈J} B_(i) K_i, indexed by subset bitmask J.
/// Index 0 is A, the last index is A + BK.
class VertexSet {
public:
    explicit VertexSet(std::vector<Eigen::MatrixXd> vertices) : vertices_(std::move(vertices)) {}

    [[nodiscard]] std::size_t size() const { return vertices_.size(); }
    [[nodiscard]] const Eigen::MatrixXd& operator[](std::size_t mask) const { return vertices_[mask]; }
    [[nodiscard]] const Eigen::MatrixXd& open_loop() const { return vertices_.front(); }
    [[nodiscard]] const Eigen::MatrixXd& closed_loop() const { return vertices_.back(); }

    [[nodiscard]] auto begin() const { return vertices_.begin(); }
    [[nodiscard]] auto end() const { return vertices_.end(); }

private:
    std::vector<Eigen::MatrixXd> vertices_;
};

inline constexpr Eigen::Index kMaxVertexInputs = 20;

/// Validates and normalizes a plant. W is symmetrized (asymmetry tolerance 1e-9).
/// Throws ShapeError or PreconditionError.
SystemSpec make_system(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd W, Eigen::VectorXd ubar);

/// Throws ShapeError unless K is m×n for the given plant.
void check_gain(const SystemSpec& sys, const FeedbackGain& gain);

/// Componentwise sign(u_i)·min(|u_i|, ubar_i).
Eigen::VectorXd saturate(const Eigen::VectorXd& u, const Eigen::VectorXd& ubar);

/// One step of the saturated error dynamics:
/// A·e + B·(sat(K·e + v) − v) + w. Requires |v_i| ≤ ubar_i.
Eigen::VectorXd error_step(const Eigen::VectorXd& e, const Eigen::VectorXd& v,
                           const Eigen::VectorXd& w, const SystemSpec& sys,
                           const FeedbackGain& gain);

/// Nominal dynamics A·z + B·v.
Eigen::VectorXd nominal_step(const Eigen::VectorXd& z, const Eigen::VectorXd& v,
                             const SystemSpec& sys);

/// Enumerates the saturation hull vertices. Refuses m > 20.
VertexSet vertex_matrices(const SystemSpec& sys, const FeedbackGain& gain);

}  // namespace satprs
