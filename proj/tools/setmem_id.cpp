#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "setmem/config.hpp"
#include "setmem/errors.hpp"
#include "setmem/experiments.hpp"

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kNumerical = 3, kIo = 4 };

int run(setmem::ExperimentConfig config, setmem::ExperimentKind kind) {
    using namespace setmem;
    if (config.experiment != kind) {
        throw ConfigError("config describes '" + std::string(to_string(config.experiment)) + "', not '" +
                          std::string(to_string(kind)) + "'");
    }
    const auto out_dir = config.output_dir;
    switch (kind) {
        case ExperimentKind::CompareOls: {
            const auto r = run_compare_ols(config);
            std::cout << "wrote " << (out_dir / "compare_ols.csv").string() << " (" << r.rows.size() << " rows)\n";
            return kOk;
        }
        case ExperimentKind::Bandit: {
            const auto r = run_bandit(config);
            std::cout << "wrote " << (out_dir / "trace.csv").string() << '\n';
            int code = kOk;
            for (const auto& tr : r.traces) {
                if (tr.status != "ok") {
                    std::cerr << "seed " << tr.seed << ": " << tr.status << " after " << tr.steps.size() << " steps\n";
                    code = kNumerical;
                }
            }
            return code;
        }
        case ExperimentKind::Simulate: {
            const auto traj = run_simulate(config);
            std::cout << "wrote " << (out_dir / "trajectory.csv").string() << " (T=" << traj.horizon() << ")\n";
            return kOk;
        }
        case ExperimentKind::Estimate: {
            const auto r = run_estimate(config);
            std::cout << r.csv;
            for (const auto& row : r.rows) {
                if (row.result && row.result->status == EstimateStatus::Infeasible) {
                    std::cerr << "subsystem " << row.system + 1 << ": no matrix is consistent with the noise set\n";
                    return kNumerical;
                }
            }
            return kOk;
        }
        case ExperimentKind::Spectral:
            std::cout << run_spectral(config).csv;
            return kOk;
    }
    return kOk;
}

const char* summary(setmem::ExperimentKind kind) {
    switch (kind) {
        case setmem::ExperimentKind::CompareOls: return "SME vs OLS error on a single system";
        case setmem::ExperimentKind::Bandit: return "greedy stabilizing arm selection";
        case setmem::ExperimentKind::Simulate: return "simulate a switched trajectory";
        case setmem::ExperimentKind::Estimate: return "estimate each subsystem from a trajectory CSV";
        case setmem::ExperimentKind::Spectral: return "spectral radius and norm of each system";
    }
    return "";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Set-membership identification of switched linear systems"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> metric;

    for (const auto kind : {setmem::ExperimentKind::CompareOls, setmem::ExperimentKind::Bandit,
                            setmem::ExperimentKind::Simulate, setmem::ExperimentKind::Estimate,
                            setmem::ExperimentKind::Spectral}) {
        auto* sub = app.add_subcommand(std::string(setmem::to_string(kind)), summary(kind));
        sub->add_option("--config", config_path, "JSON experiment config")->required();
        sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
        sub->add_option("--seed", seed, "run a single seed");
        sub->add_option("--metric", metric, "error metric")->check(CLI::IsMember({"frobenius", "spectral"}));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    const auto kind = setmem::parse_experiment_kind(app.get_subcommands().front()->get_name());
    try {
        setmem::ExperimentConfig config = setmem::load_config(config_path);
        if (out_dir) config.output_dir = *out_dir;
        if (seed) config.seeds = {*seed};
        if (metric) config.error_metric = setmem::parse_error_metric(*metric);
        return run(std::move(config), kind);
    } catch (const setmem::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const setmem::DimensionError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const setmem::UnsupportedError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const setmem::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const setmem::IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIo;
    }
}
