#pragma once

#include "satprs/bounds.hpp"
#include "satprs/certify.hpp"
#include "satprs/config.hpp"
#include "satprs/montecarlo.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace satprs {

/// Certificate plus how it was obtained ("fixed_P", "certificate_file", "synthesized").
struct ResolvedCertificate {
    ContractionCertificate certificate;
    VerificationReport verification;
    std::string source;
    int bisection_steps = 0;
};

ResolvedCertificate resolve_certificate(const AnalysisConfig& cfg);

/// All derived quantities behind data.csv / lell.csv / lbell.csv.
struct Analysis {
    ResolvedCertificate cert;
    ContractionProfile profile;
    std::vector<double> lambda_series;     ///< column l
    std::vector<double> lambda_L_series;   ///< column ll (reference only)
    std::vector<double> lambda_hat_series; ///< column lb
    Ellipsoid pub_lambda;
    Ellipsoid pub_lambda_hat;
    std::optional<double> area_reduction;  ///< n = 2 only
};

Analysis run_analysis(const AnalysisConfig& cfg);

/// Full-precision ("%.17g") rendering used by every CSV.
std::string format_double(double v);

/// Writes `header` then rows of optional cells (std::nullopt → empty cell), LF endings.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::optional<double>>>& rows);

/// Each command writes its files under `out_dir` and returns the JSON report it also saved.
nlohmann::json cmd_certify(const AnalysisConfig& cfg, const std::filesystem::path& out_dir);
nlohmann::json cmd_analyze(const AnalysisConfig& cfg, const std::filesystem::path& out_dir);
nlohmann::json cmd_simulate(const AnalysisConfig& cfg, const std::filesystem::path& out_dir);
nlohmann::json cmd_sweep(const AnalysisConfig& cfg, const std::filesystem::path& out_dir);

/// Merges prior JSON reports keyed by their "command" field. With no inputs,
/// the known report files in `out_dir` are merged.
nlohmann::json cmd_report(const std::vector<std::filesystem::path>& inputs,
                          const std::filesystem::path& out_dir);

nlohmann::json certificate_to_json(const ResolvedCertificate& cert);

}  // namespace satprs
