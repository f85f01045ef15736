#pragma once

#include "satprs/certify.hpp"
#include "satprs/model.hpp"
#include "satprs/montecarlo.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace satprs {

/// Whole-pipeline configuration, read from a single JSON document.
/// Matrices are row-major nested arrays.
struct AnalysisConfig {
    SystemSpec system;
    FeedbackGain gain;

    struct Rates {
        /// Fixed shape matrix; bypasses synthesis.
        std::optional<Eigen::MatrixXd> P;
        /// Path to a previously written certificate JSON (only P is read back).
        std::optional<std::filesystem::path> certificate;
        SynthesisOptions synthesis;
    } rates;

    struct Prs {
        double epsilon = 0.2;
        int k_max = 100;
        Eigen::VectorXd vbar;  ///< worst-case |v_i|, defaults to zero
    } prs;

    struct Simulation {
        bool enabled = false;
        SimulationConfig config;
    } simulation;

    struct Output {
        std::filesystem::path directory = "out";
        std::set<std::string> csv{"data", "lell", "lbell", "states", "convergence"};
        int ellipse_points = 200;
    } output;

    struct Sweep {
        std::vector<double> ubar;
    };
    std::optional<Sweep> sweep;
};

/// Throws ConfigError (malformed document), ShapeError or PreconditionError.
/// Relative certificate paths resolve against `base_dir`.
AnalysisConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

AnalysisConfig load_config(const std::filesystem::path& path);

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& name);
nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);

}  // namespace satprs
