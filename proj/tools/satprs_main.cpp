// Command-line front end: certify, analyze, simulate, sweep, report.

#include "satprs/config.hpp"
#include "satprs/errors.hpp"
#include "satprs/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

enum ExitCode : int {
    kOk = 0,
    kInternal = 1,
    kConfig = 2,
    kSynthesis = 3,
    kPrecondition = 4,
};

int exit_code_for(const satprs::Error& err) {
    using C = satprs::Error::Category;
    switch (err.category()) {
        case C::Config:
        case C::Shape: return kConfig;
        case C::Synthesis: return kSynthesis;
        case C::Precondition:
        case C::Certificate:
        case C::NotApplicable: return kPrecondition;
    }
    return kInternal;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Probabilistic reachable sets for saturated linear systems"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::vector<std::string> report_inputs;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON configuration")->required();
        sub->add_option("--out", out_dir, "output directory (overrides output.directory)");
        sub->add_option("--seed", seed, "simulation seed (overrides simulation.seed)");
        sub->add_option("--workers", workers, "simulation worker threads (0 = all cores)");
    };
    auto* certify = app.add_subcommand("certify", "synthesize or check the contraction certificate");
    auto* analyze = app.add_subcommand("analyze", "rates, bound sequences and PUBs; data/lell/lbell CSVs");
    auto* simulate = app.add_subcommand("simulate", "analysis plus Monte Carlo validation; states.csv");
    auto* sweep = app.add_subcommand("sweep", "effective rate versus region-of-linearity size");
    auto* report = app.add_subcommand("report", "merge prior JSON outputs into report.json");
    for (auto* sub : {certify, analyze, simulate, sweep}) add_common(sub);
    report->add_option("--out", out_dir, "directory holding prior outputs")->required();
    report->add_option("inputs", report_inputs, "JSON files to merge (default: known files in --out)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        // --help and friends exit 0; usage errors share the config-error code.
        return app.exit(err) == 0 ? kOk : kConfig;
    }

    try {
        if (report->parsed()) {
            std::vector<std::filesystem::path> inputs(report_inputs.begin(), report_inputs.end());
            std::cout << satprs::cmd_report(inputs, out_dir).dump(2) << '\n';
            return kOk;
        }

        satprs::AnalysisConfig cfg = satprs::load_config(config_path);
        if (!out_dir.empty()) cfg.output.directory = out_dir;
        if (seed) cfg.simulation.config.seed = *seed;
        if (workers) cfg.simulation.config.workers = *workers;
        const auto& dir = cfg.output.directory;

        if (certify->parsed()) {
            const auto doc = satprs::cmd_certify(cfg, dir);
            std::cout << doc.dump(2) << '\n';
            return doc.at("pass").get<bool>() ? kOk : kPrecondition;
        }
        if (analyze->parsed()) {
            std::cout << satprs::cmd_analyze(cfg, dir).dump(2) << '\n';
        } else if (simulate->parsed()) {
            std::cout << satprs::cmd_simulate(cfg, dir).dump(2) << '\n';
        } else if (sweep->parsed()) {
            std::cout << satprs::cmd_sweep(cfg, dir).dump(2) << '\n';
        }
        return kOk;
    } catch (const satprs::SynthesisError& err) {
        std::cerr << "synthesis failure: " << err.what()
                  << " (last infeasible lambda " << err.last_infeasible_lambda() << ")\n";
        return kSynthesis;
    } catch (const satprs::Error& err) {
        std::cerr << "error: " << err.what() << '\n';
        return exit_code_for(err);
    } catch (const std::exception& err) {
        std::cerr << "internal error: " << err.what() << '\n';
        return kInternal;
    }
}
