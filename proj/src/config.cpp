#include "satprs/config.hpp"

#include "satprs/errors.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace satprs {

using nlohmann::json;

namespace {

double number(const json& j, const std::string& name) {
    if (!j.is_number()) throw ConfigError(name + " must be a number");
    return j.get<double>();
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& name, Eigen::Index broadcast) {
    if (j.is_number()) return Eigen::VectorXd::Constant(broadcast, j.get<double>());
    if (!j.is_array()) throw ConfigError(name + " must be a number or an array of numbers");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = number(j[i], name + "[" + std::to_string(i) + "]");
    }
    return v;
}

const json& required(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw ConfigError("missing required field " + where + "." + key);
    }
    return obj.at(key);
}

template <typename T>
T value_or(const json& obj, const char* key, T fallback) {
    if (!obj.is_object() || !obj.contains(key) || obj.at(key).is_null()) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("field ") + key + ": " + ex.what());
    }
}

NominalPolicy parse_policy(const json& j, Eigen::Index m) {
    NominalPolicy policy;
    if (j.is_null()) return policy;
    const std::string kind = value_or<std::string>(j, "kind", "zero");
    if (kind == "zero") {
        policy.kind = NominalPolicy::Kind::Zero;
    } else if (kind == "constant") {
        policy.kind = NominalPolicy::Kind::Constant;
        policy.values.push_back(vector_from_json(required(j, "value", "simulation.v_policy"),
                                                 "simulation.v_policy.value", m));
    } else if (kind == "sequence") {
        policy.kind = NominalPolicy::Kind::Sequence;
        const json& seq = required(j, "values", "simulation.v_policy");
        if (!seq.is_array()) throw ConfigError("simulation.v_policy.values must be an array");
        for (const auto& v : seq) policy.values.push_back(vector_from_json(v, "simulation.v_policy.values", m));
    } else {
        throw ConfigError("unknown v_policy kind '" + kind + "'");
    }
    return policy;
}

std::vector<double> parse_sweep(const json& j) {
    std::vector<double> out;
    if (j.contains("ubar")) {
        const json& list = j.at("ubar");
        if (!list.is_array()) throw ConfigError("sweep.ubar must be an array");
        for (const auto& v : list) out.push_back(number(v, "sweep.ubar"));
    } else {
        const double from = number(required(j, "from", "sweep"), "sweep.from");
        const double to = number(required(j, "to", "sweep"), "sweep.to");
        const double step = number(required(j, "step", "sweep"), "sweep.step");
        if (!(step > 0.0) || !(to >= from)) throw ConfigError("sweep range needs step > 0 and to ≥ from");
        const auto count = static_cast<long>(std::floor((to - from) / step + 1e-9));
        for (long i = 0; i <= count; ++i) out.push_back(from + static_cast<double>(i) * step);
    }
    return out;
}

}  // namespace

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& name) {
    if (!j.is_array() || j.empty() || !j.front().is_array()) {
        throw ConfigError(name + " must be a non-empty array of row arrays");
    }
    const std::size_t rows = j.size();
    const std::size_t cols = j.front().size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) throw ConfigError(name + " has ragged rows");
        for (std::size_t c = 0; c < cols; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                number(j[r][c], name + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
        }
    }
    return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

AnalysisConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
    AnalysisConfig cfg;

    const json& sys = required(doc, "system", "");
    Eigen::MatrixXd A = matrix_from_json(required(sys, "A", "system"), "system.A");
    Eigen::MatrixXd B = matrix_from_json(required(sys, "B", "system"), "system.B");
    Eigen::MatrixXd W = matrix_from_json(required(sys, "W", "system"), "system.W");
    Eigen::VectorXd ubar = vector_from_json(required(sys, "ubar", "system"), "system.ubar", B.cols());
    cfg.system = make_system(std::move(A), std::move(B), std::move(W), std::move(ubar));

    const json& gain = required(doc, "gain", "");
    cfg.gain.K = matrix_from_json(required(gain, "K", "gain"), "gain.K");
    check_gain(cfg.system, cfg.gain);

    const json rates = doc.value("rates", json::object());
    if (rates.contains("P") && !rates.at("P").is_null()) {
        cfg.rates.P = matrix_from_json(rates.at("P"), "rates.P");
    }
    if (rates.contains("certificate") && !rates.at("certificate").is_null()) {
        std::filesystem::path p = value_or<std::string>(rates, "certificate", "");
        cfg.rates.certificate = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    auto& synth = cfg.rates.synthesis;
    synth.feas_tol = value_or(rates, "feas_tol", synth.feas_tol);
    synth.bisect_tol = value_or(rates, "bisect_tol", synth.bisect_tol);
    synth.max_iterations = value_or(rates, "max_iterations", synth.max_iterations);
    synth.lift_scale = value_or(rates, "lift_scale", synth.lift_scale);
    if (rates.contains("trace_scale") && !rates.at("trace_scale").is_null()) {
        synth.trace_scale = number(rates.at("trace_scale"), "rates.trace_scale");
    }

    const json prs = doc.value("prs", json::object());
    cfg.prs.epsilon = value_or(prs, "epsilon", cfg.prs.epsilon);
    cfg.prs.k_max = value_or(prs, "k_max", cfg.prs.k_max);
    const Eigen::Index m = cfg.system.input_dim();
    cfg.prs.vbar = prs.contains("vbar") ? vector_from_json(prs.at("vbar"), "prs.vbar", m)
                                        : Eigen::VectorXd::Zero(m);
    if (cfg.prs.vbar.size() != m) throw ShapeError("prs.vbar must have m entries");
    if (!(cfg.prs.epsilon > 0.0 && cfg.prs.epsilon <= 1.0)) {
        throw PreconditionError("prs.epsilon must lie in (0, 1]");
    }
    if (cfg.prs.k_max < 0) throw PreconditionError("prs.k_max must be nonnegative");

    const json sim = doc.value("simulation", json::object());
    auto& sc = cfg.simulation.config;
    cfg.simulation.enabled = value_or(sim, "enabled", false);
    sc.horizon = value_or(sim, "horizon", sc.horizon);
    sc.num_traj = value_or(sim, "num_traj", sc.num_traj);
    sc.seed = value_or<std::uint64_t>(sim, "seed", sc.seed);
    sc.noise = parse_noise_kind(value_or<std::string>(sim, "noise", "gaussian"));
    sc.workers = value_or(sim, "workers", sc.workers);
    sc.final_state_stride = value_or(sim, "final_state_stride", sc.final_state_stride);
    sc.v_policy = parse_policy(sim.value("v_policy", json()), m);

    const json out = doc.value("output", json::object());
    cfg.output.directory = value_or<std::string>(out, "directory", cfg.output.directory.string());
    cfg.output.ellipse_points = value_or(out, "ellipse_points", cfg.output.ellipse_points);
    if (out.contains("csv")) {
        cfg.output.csv.clear();
        for (const auto& name : out.at("csv")) {
            if (!name.is_string()) throw ConfigError("output.csv entries must be strings");
            cfg.output.csv.insert(name.get<std::string>());
        }
    }

    if (doc.contains("sweep") && !doc.at("sweep").is_null()) {
        cfg.sweep = AnalysisConfig::Sweep{parse_sweep(doc.at("sweep"))};
    }
    return cfg;
}

AnalysisConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& ex) {
        throw ConfigError(std::string("malformed JSON: ") + ex.what());
    }
    return parse_config(doc, path.parent_path());
}

}  // namespace satprs
