#include "satprs/pipeline.hpp"

#include "satprs/errors.hpp"
#include "satprs/linalg.hpp"
#include "satprs/sets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>

namespace satprs {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json finite_or_null(double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
}

void write_json(const fs::path& path, const json& doc) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

bool wants(const AnalysisConfig& cfg, const char* csv) {
    return cfg.output.csv.count(csv) != 0;
}

void write_polyline(const fs::path& path, const Ellipsoid& e, int points) {
    std::vector<std::vector<std::optional<double>>> rows;
    for (const auto& p : boundary_polyline(e, points)) rows.push_back({p.x(), p.y()});
    write_csv(path, {"x", "y"}, rows);
}

void write_data_csv(const fs::path& path, const Analysis& a, const std::vector<double>* empirical) {
    std::vector<std::vector<std::optional<double>>> rows;
    for (std::size_t k = 0; k < a.lambda_series.size(); ++k) {
        std::optional<double> e;
        if (empirical != nullptr && k < empirical->size()) e = (*empirical)[k];
        rows.push_back({static_cast<double>(k), e, a.lambda_series[k], a.lambda_L_series[k],
                        a.lambda_hat_series[k]});
    }
    write_csv(path, {"k", "e", "l", "ll", "lb"}, rows);
}

json analysis_to_json(const AnalysisConfig& cfg, const Analysis& a) {
    const ContractionProfile& p = a.profile;
    json doc;
    doc["command"] = "analyze";
    doc["certificate"] = certificate_to_json(a.cert);
    doc["lambda"] = p.lambda;
    doc["lambda_L"] = p.lambda_L;
    doc["trPW"] = p.trPW;
    doc["r_L"] = finite_or_null(p.r_L);
    doc["condition_lhs"] = p.condition_lhs;
    doc["condition_holds"] = !p.fallback();
    doc["lambda_bar_star"] = p.lambda_bar_star ? json(*p.lambda_bar_star) : json(nullptr);
    doc["lambda_hat"] = p.lambda_hat;
    doc["fallback"] = p.fallback();
    doc["epsilon"] = cfg.prs.epsilon;
    doc["k_max"] = cfg.prs.k_max;
    doc["vbar"] = std::vector<double>(cfg.prs.vbar.data(), cfg.prs.vbar.data() + cfg.prs.vbar.size());
    doc["pub"] = {{"r_lambda", a.pub_lambda.r}, {"r_lambda_hat", a.pub_lambda_hat.r}};
    doc["scaling_reduction"] =
        a.pub_lambda.r > 0.0 ? json(1.0 - a.pub_lambda_hat.r / a.pub_lambda.r) : json(nullptr);
    doc["area_reduction"] = a.area_reduction ? json(*a.area_reduction) : json(nullptr);
    doc["series"] = {{"l", "lambda"}, {"ll", "lambda_L"}, {"lb", "lambda_hat"},
                     {"ll_reference_only", true}};
    return doc;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::optional<double>>>& rows) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            if (row[i]) out << format_double(*row[i]);
        }
        out << '\n';
    }
}

json certificate_to_json(const ResolvedCertificate& rc) {
    const ContractionCertificate& c = rc.certificate;
    const VerificationReport& v = rc.verification;
    json doc;
    doc["command"] = "certify";
    doc["source"] = rc.source;
    doc["P"] = matrix_to_json(c.P);
    doc["lambda"] = c.lambda;
    doc["lambda_L"] = c.lambda_L;
    doc["feas_tol"] = c.feas_tol;
    doc["bisect_tol"] = c.bisect_tol;
    if (rc.source == "synthesized") doc["bisection_steps"] = rc.bisection_steps;
    doc["residuals"] = {{"vertices", v.vertex_residuals},
                        {"lambda_L", v.lambda_L_residual},
                        {"rate_gap", v.rate_gap},
                        {"p_min_eigenvalue", v.p_min_eigenvalue}};
    doc["pass"] = v.passed;
    return doc;
}

ResolvedCertificate resolve_certificate(const AnalysisConfig& cfg) {
    const auto& synth = cfg.rates.synthesis;
    ResolvedCertificate rc;
    if (cfg.rates.P) {
        rc.certificate = certificate_for_P(*cfg.rates.P, cfg.system, cfg.gain, synth.feas_tol, synth.bisect_tol);
        rc.source = "fixed_P";
    } else if (cfg.rates.certificate) {
        std::ifstream in(*cfg.rates.certificate);
        if (!in) throw ConfigError("cannot open certificate " + cfg.rates.certificate->string());
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& ex) {
            throw ConfigError(std::string("malformed certificate JSON: ") + ex.what());
        }
        if (!doc.contains("P")) throw ConfigError("certificate file has no P");
        rc.certificate = certificate_for_P(matrix_from_json(doc.at("P"), "certificate.P"), cfg.system,
                                           cfg.gain, synth.feas_tol, synth.bisect_tol);
        rc.source = "certificate_file";
    } else {
        const RateSynthesis s = synthesize_P_lambda(cfg.system, cfg.gain, synth);
        rc.certificate.P = s.P;
        rc.certificate.lambda = s.lambda;
        rc.certificate.lambda_L = lambda_L_for_P(s.P, cfg.system, cfg.gain);
        rc.certificate.feas_tol = synth.feas_tol;
        rc.certificate.bisect_tol = synth.bisect_tol;
        rc.bisection_steps = s.bisection_steps;
        rc.source = "synthesized";
    }
    rc.verification = verify_certificate(rc.certificate, cfg.system, cfg.gain);
    return rc;
}

Analysis run_analysis(const AnalysisConfig& cfg) {
    Analysis a;
    a.cert = resolve_certificate(cfg);
    const ContractionCertificate& c = a.cert.certificate;
    if (!(c.lambda_L < c.lambda)) {
        throw PreconditionError("compatibility condition lambda_L < lambda fails for this certificate");
    }
    const double trPW = trace_PW(c.P, cfg.system.W);
    const double r_L = region_of_linearity_scaling(c.P, cfg.gain.K, cfg.system.ubar, cfg.prs.vbar);
    a.profile = select_rate(c.lambda, c.lambda_L, trPW, r_L);

    const int k_max = cfg.prs.k_max;
    a.lambda_series = expectation_bound_sequence(c.lambda, trPW, k_max);
    a.lambda_L_series = expectation_bound_sequence(c.lambda_L, trPW, k_max);
    a.lambda_hat_series = expectation_bound_sequence(a.profile.lambda_hat, trPW, k_max);

    a.pub_lambda = pub(c.P, c.lambda, trPW, cfg.prs.epsilon);
    a.pub_lambda_hat = pub(c.P, a.profile.lambda_hat, trPW, cfg.prs.epsilon);
    if (cfg.system.state_dim() == 2) {
        const double full = area(a.pub_lambda);
        if (full > 0.0) a.area_reduction = 1.0 - area(a.pub_lambda_hat) / full;
    }
    return a;
}

json cmd_certify(const AnalysisConfig& cfg, const fs::path& out_dir) {
    const json doc = certificate_to_json(resolve_certificate(cfg));
    write_json(out_dir / "certificate.json", doc);
    return doc;
}

json cmd_analyze(const AnalysisConfig& cfg, const fs::path& out_dir) {
    const Analysis a = run_analysis(cfg);
    if (wants(cfg, "data")) {
        if (cfg.simulation.enabled) {
            SimulationConfig sc = cfg.simulation.config;
            sc.keep_states = false;
            const EnsembleStats stats = simulate_ensemble(cfg.system, cfg.gain, a.cert.certificate.P, sc);
            write_data_csv(out_dir / "data.csv", a, &stats.mean_q);
        } else {
            write_data_csv(out_dir / "data.csv", a, nullptr);
        }
    }
    if (cfg.system.state_dim() == 2) {
        if (wants(cfg, "lell")) write_polyline(out_dir / "lell.csv", a.pub_lambda, cfg.output.ellipse_points);
        if (wants(cfg, "lbell")) {
            write_polyline(out_dir / "lbell.csv", a.pub_lambda_hat, cfg.output.ellipse_points);
        }
    } else {
        std::cerr << "warning: n != 2, PUB boundary polylines not written\n";
    }
    const json doc = analysis_to_json(cfg, a);
    write_json(out_dir / "analysis.json", doc);
    return doc;
}

json cmd_simulate(const AnalysisConfig& cfg, const fs::path& out_dir) {
    const Analysis a = run_analysis(cfg);
    const SimulationConfig& sc = cfg.simulation.config;
    const ContractionCertificate& c = a.cert.certificate;
    const ContractionProfile& p = a.profile;

    const bool beyond_vbar = std::any_of(sc.v_policy.values.begin(), sc.v_policy.values.end(), [&](const auto& v) {
        return v.size() == cfg.prs.vbar.size() && (v.array().abs() > cfg.prs.vbar.array()).any();
    });
    if (beyond_vbar) std::cerr << "warning: nominal input exceeds prs.vbar; r_L does not cover it\n";

    const std::vector<Ellipsoid> prs = prs_sequence(c.P, p.lambda_hat, p.trPW, cfg.prs.epsilon, sc.horizon);
    const EnsembleStats stats = simulate_ensemble(cfg.system, cfg.gain, c.P, sc, prs);

    if (wants(cfg, "data")) write_data_csv(out_dir / "data.csv", a, &stats.mean_q);
    const bool planar = cfg.system.state_dim() == 2;
    if (planar) {
        if (wants(cfg, "lell")) write_polyline(out_dir / "lell.csv", a.pub_lambda, cfg.output.ellipse_points);
        if (wants(cfg, "lbell")) {
            write_polyline(out_dir / "lbell.csv", a.pub_lambda_hat, cfg.output.ellipse_points);
        }
        if (wants(cfg, "states")) {
            std::vector<std::vector<std::optional<double>>> rows;
            for (Eigen::Index j = 0; j < stats.final_states.cols(); ++j) {
                rows.push_back({stats.final_states(0, j), stats.final_states(1, j)});
            }
            write_csv(out_dir / "states.csv", {"x", "y"}, rows);
        }
    } else {
        std::cerr << "warning: n != 2, states.csv omitted\n";
    }

    // Bound checks in units of ensemble standard errors.
    const auto bound_check = [&](const std::vector<double>& bound) {
        double worst = -std::numeric_limits<double>::infinity();
        int violations = 0;
        for (int k = 0; k <= sc.horizon && k < static_cast<int>(bound.size()); ++k) {
            const auto i = static_cast<std::size_t>(k);
            const double excess = stats.mean_q[i] - bound[i];
            worst = std::max(worst, excess);
            if (excess > 3.0 * stats.stderr_q[i]) ++violations;
        }
        return json{{"max_excess", worst}, {"violations_beyond_3se", violations}};
    };
    const std::vector<double> l_bound = expectation_bound_sequence(c.lambda, p.trPW, sc.horizon);
    const std::vector<double> hat_bound = expectation_bound_sequence(p.lambda_hat, p.trPW, sc.horizon);

    double max_pub_violation = 0.0;
    double max_prs_violation = 0.0;
    for (int k = 0; k <= sc.horizon; ++k) {
        max_pub_violation = std::max(max_pub_violation, violation_rate(stats, a.pub_lambda_hat, k));
        max_prs_violation = std::max(max_prs_violation, 1.0 - stats.containment[static_cast<std::size_t>(k)]);
    }
    int inside_final = 0;
    for (Eigen::Index j = 0; j < stats.final_states.cols(); ++j) {
        if (contains(a.pub_lambda_hat, stats.final_states.col(j))) ++inside_final;
    }

    json doc = analysis_to_json(cfg, a);
    doc["command"] = "simulate";
    doc["simulation"] = {
        {"seed", sc.seed},
        {"num_traj", sc.num_traj},
        {"horizon", sc.horizon},
        {"noise", std::string(to_string(sc.noise))},
        {"state_cloud_step", sc.horizon},
        {"final_state_stride", sc.final_state_stride},
        {"mean_q_final", stats.mean_q.back()},
        {"stderr_q_final", stats.stderr_q.back()},
        {"lambda_bound_check", bound_check(l_bound)},
        {"lambda_hat_bound_check", bound_check(hat_bound)},
        {"max_violation_pub_lambda_hat", max_pub_violation},
        {"max_violation_prs_lambda_hat", max_prs_violation},
        {"final_states_in_pub_lambda_hat",
         static_cast<double>(inside_final) / static_cast<double>(stats.final_states.cols())},
    };
    write_json(out_dir / "simulation.json", doc);
    return doc;
}

json cmd_sweep(const AnalysisConfig& cfg, const fs::path& out_dir) {
    if (!cfg.sweep || cfg.sweep->ubar.empty()) throw ConfigError("sweep block missing or empty");
    const ResolvedCertificate rc = resolve_certificate(cfg);
    const ContractionCertificate& c = rc.certificate;
    if (!(c.lambda_L < c.lambda)) {
        throw PreconditionError("compatibility condition lambda_L < lambda fails for this certificate");
    }
    const double trPW = trace_PW(c.P, cfg.system.W);
    const double lhs = trPW / (1.0 - c.lambda);
    const Eigen::Index m = cfg.system.input_dim();
    const Eigen::VectorXd& vbar = cfg.prs.vbar;

    // Condition lhs < min_i (s − vbar_i)²/κ_i holds iff s > max_i (vbar_i + √(lhs·κ_i)).
    const Eigen::LLT<Eigen::MatrixXd> llt(c.P);
    std::optional<double> exact;
    for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::VectorXd row = cfg.gain.K.row(i).transpose();
        if (row.isZero(0.0)) continue;
        const double kappa = row.dot(llt.solve(row));
        const double s = vbar(i) + std::sqrt(lhs * kappa);
        exact = exact ? std::max(*exact, s) : s;
    }

    std::vector<std::vector<std::optional<double>>> rows;
    std::optional<double> grid_threshold;
    bool monotone = true;
    double prev_rate = std::numeric_limits<double>::infinity();
    double prev_rl = -std::numeric_limits<double>::infinity();
    json points = json::array();
    for (double s : cfg.sweep->ubar) {
        if (!(s > 0.0) || (vbar.array() > s).any()) continue;
        const Eigen::VectorXd ubar = Eigen::VectorXd::Constant(m, s);
        const double r_L = region_of_linearity_scaling(c.P, cfg.gain.K, ubar, vbar);
        const ContractionProfile prof = select_rate(c.lambda, c.lambda_L, trPW, r_L);
        if (prof.fallback()) continue;
        const double lb = *prof.lambda_bar_star;
        if (!grid_threshold) grid_threshold = s;
        if (r_L > prev_rl && !(lb < prev_rate)) monotone = false;
        prev_rate = lb;
        prev_rl = r_L;
        rows.push_back({r_L, c.lambda_L, lb});
        points.push_back({{"ubar", s}, {"r_L", finite_or_null(r_L)}, {"lambda_bar_star", lb}});
    }
    if (wants(cfg, "convergence")) write_csv(out_dir / "convergence.csv", {"rl", "ll", "lb"}, rows);

    json doc;
    doc["command"] = "sweep";
    doc["certificate"] = certificate_to_json(rc);
    doc["lambda"] = c.lambda;
    doc["lambda_L"] = c.lambda_L;
    doc["trPW"] = trPW;
    doc["condition_lhs"] = lhs;
    doc["threshold_ubar_exact"] = exact ? json(*exact) : json(nullptr);
    doc["threshold_ubar_grid"] = grid_threshold ? json(*grid_threshold) : json(nullptr);
    doc["admissible_points"] = rows.size();
    doc["lambda_bar_star_decreasing"] = monotone;
    doc["final_gap_to_lambda_L"] = rows.empty() ? json(nullptr) : json(*rows.back()[2] - c.lambda_L);
    doc["points"] = points;
    if (rows.empty()) std::cerr << "warning: no swept bound satisfies the region-of-linearity condition\n";
    write_json(out_dir / "sweep.json", doc);
    return doc;
}

json cmd_report(const std::vector<fs::path>& inputs, const fs::path& out_dir) {
    std::vector<fs::path> files = inputs;
    if (files.empty()) {
        for (const char* name : {"certificate.json", "analysis.json", "simulation.json", "sweep.json"}) {
            if (fs::exists(out_dir / name)) files.push_back(out_dir / name);
        }
    }
    json merged = json::object();
    for (const auto& f : files) {
        std::ifstream in(f);
        if (!in) throw ConfigError("cannot open report input " + f.string());
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& ex) {
            throw ConfigError("malformed report input " + f.string() + ": " + ex.what());
        }
        const std::string key = doc.is_object() && doc.contains("command") && doc.at("command").is_string()
                                    ? doc.at("command").get<std::string>()
                                    : f.stem().string();
        merged[key] = std::move(doc);
    }
    write_json(out_dir / "report.json", merged);
    return merged;
}

}  // namespace satprs
