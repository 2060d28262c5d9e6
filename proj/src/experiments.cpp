#include "setmem/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>

#include "setmem/chart.hpp"
#include "setmem/csv.hpp"
#include "setmem/errors.hpp"

namespace setmem {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Re-throws the active exception with `context` prepended, keeping its kind.
[[noreturn]] void rethrow_with(const std::string& context) {
    try {
        throw;
    } catch (const NumericalError& e) {
        throw NumericalError(context + e.what());
    } catch (const DimensionError& e) {
        throw DimensionError(context + e.what());
    } catch (const UnsupportedError& e) {
        throw UnsupportedError(context + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(context + e.what());
    } catch (const IoError& e) {
        throw IoError(context + e.what());
    }
}

// Runs body(i) for i in [0, n), in parallel when asked; the first failure (by
// index) is re-thrown after the loop.
template <typename Body>
void for_each_index(std::size_t n, Execution execution, Body&& body) {
    std::vector<std::exception_ptr> errors(n);
    const auto count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic) if (execution == Execution::Parallel)
    for (long i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

SwitchedSystem system_of(const ExperimentConfig& c) {
    std::vector<Matrix> ms;
    for (const auto& s : c.systems) ms.push_back(s.value);
    return SwitchedSystem(std::move(ms));
}

Vector start_state(const ExperimentConfig& c) { return c.x0 ? *c.x0 : Vector::Zero(c.dim()); }

EstimateOptions estimate_options(const ExperimentConfig& c) {
    EstimateOptions o;
    o.loss = c.loss;
    o.ridge = c.ridge;
    // Parallelism lives at the seed level.
    o.execution = Execution::Serial;
    return o;
}

double median(std::vector<double> v) {
    v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
    if (v.empty()) return kNaN;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string fmt(double v) { return csv::format_double(v); }

}  // namespace

std::string trace_header(std::size_t q) {
    std::string h = "seed,t,arm,state_norm";
    for (std::size_t p = 1; p <= q; ++p) h += ",rho_hat_" + std::to_string(p);
    for (std::size_t p = 1; p <= q; ++p) h += ",err_" + std::to_string(p);
    return h + ",status";
}

std::string trace_csv(const std::vector<PolicyTrace>& traces, std::size_t q) {
    std::ostringstream out;
    out << trace_header(q) << '\n';
    for (const auto& tr : traces) {
        for (const auto& s : tr.steps) {
            out << tr.seed << ',' << s.t << ',' << (s.arm + 1) << ',' << fmt(s.state_norm);
            for (double r : s.radii) out << ',' << fmt(r);
            for (double e : s.errors) out << ',' << fmt(e);
            out << ',' << tr.status << '\n';
        }
    }
    return out.str();
}

CompareOlsResult run_compare_ols(const ExperimentConfig& config, const RunOptions& options) {
    const ExperimentConfig c = config.resolved();
    if (c.experiment != ExperimentKind::CompareOls) throw ConfigError("config is not a compare-ols experiment");
    const SwitchedSystem sys = system_of(c);
    const Matrix& truth = sys.matrix(0);
    const std::size_t horizon = c.checkpoints.back();
    const EstimateOptions est = estimate_options(c);

    std::vector<std::vector<CompareOlsRow>> per_seed(c.seeds.size());
    for_each_index(c.seeds.size(), options.execution, [&](std::size_t k) {
        const std::uint64_t seed = c.seeds[k];
        const std::string where = "seed " + std::to_string(seed) + ": ";
        Trajectory traj;
        try {
            NoiseSampler sampler(*c.noise, derive_seed(seed, kNoiseStream));
            traj = simulate(sys, std::vector<std::size_t>(horizon, 0), start_state(c), sampler);
        } catch (...) {
            rethrow_with(where);
        }
        const MeasurementGroup all = group(traj, 1).front();
        for (std::size_t n : c.checkpoints) {
            try {
                const MeasurementGroup g = all.prefix(n);
                const EstimateResult sme = sme_estimate(g, *c.noise, est);
                const EstimateResult ols = ols_estimate(g);
                CompareOlsRow row;
                row.seed = seed;
                row.n = n;
                row.status_sme = sme.status;
                row.status_ols = ols.status;
                row.err_sme = estimation_error(sme.a_hat, truth, c.error_metric);
                row.err_ols = estimation_error(ols.a_hat, truth, c.error_metric);
                row.max_violation = sme.max_violation;
                row.kkt_residual = sme.kkt_residual;
                per_seed[k].push_back(row);
            } catch (...) {
                rethrow_with(where + "n " + std::to_string(n) + ": ");
            }
        }
    });

    CompareOlsResult out;
    std::ostringstream text;
    text << kCompareOlsHeader << '\n';
    for (auto& rows : per_seed) {
        for (const auto& r : rows) {
            text << r.seed << ',' << r.n << ',' << to_string(r.status_sme) << ',' << to_string(r.status_ols) << ','
                 << fmt(r.err_sme) << ',' << fmt(r.err_ols) << '\n';
            out.rows.push_back(r);
        }
    }
    out.csv = text.str();

    if (options.write_files) {
        csv::write_file(c.output_dir / "compare_ols.csv", out.csv);
        Table table{{"n", "median_err_sme", "median_err_ols"}, {}};
        for (std::size_t n : c.checkpoints) {
            std::vector<double> sme, ols;
            for (const auto& r : out.rows) {
                if (r.n != n) continue;
                sme.push_back(r.err_sme);
                ols.push_back(r.err_ols);
            }
            table.rows.push_back({static_cast<double>(n), median(sme), median(ols)});
        }
        ChartSpec spec{"Estimation error vs samples (median over seeds)", "n",
                       {"median_err_sme", "median_err_ols"}, true, "n", std::string(to_string(c.error_metric)) + " error"};
        emit_chart(table, spec, c.output_dir / "compare_ols.svg");
    }
    return out;
}

BanditResult run_bandit(const ExperimentConfig& config, const RunOptions& options) {
    const ExperimentConfig c = config.resolved();
    if (c.experiment != ExperimentKind::Bandit) throw ConfigError("config is not a bandit experiment");
    const SwitchedSystem sys = system_of(c);
    PolicyOptions popts;
    popts.estimate = estimate_options(c);
    popts.metric = c.error_metric;
    popts.x0 = start_state(c);

    BanditResult out;
    out.traces.resize(c.seeds.size());
    for_each_index(c.seeds.size(), options.execution, [&](std::size_t k) {
        try {
            out.traces[k] = run_policy(sys, *c.noise, *c.horizon, c.seeds[k], popts);
        } catch (...) {
            rethrow_with("seed " + std::to_string(c.seeds[k]) + ": ");
        }
    });
    out.csv = trace_csv(out.traces, sys.q());

    if (options.write_files) {
        csv::write_file(c.output_dir / "trace.csv", out.csv);
        const PolicyTrace& first = out.traces.front();
        if (!first.steps.empty()) {
            Table table;
            table.columns = {"t", "arm", "state_norm"};
            std::vector<std::string> err_cols;
            for (std::size_t p = 1; p <= sys.q(); ++p) err_cols.push_back("err_" + std::to_string(p));
            table.columns.insert(table.columns.end(), err_cols.begin(), err_cols.end());
            for (const auto& s : first.steps) {
                std::vector<double> row = {static_cast<double>(s.t), static_cast<double>(s.arm + 1), s.state_norm};
                row.insert(row.end(), s.errors.begin(), s.errors.end());
                table.rows.push_back(std::move(row));
            }
            const std::string suffix = " (seed " + std::to_string(first.seed) + ")";
            emit_chart(table, {"Estimation error" + suffix, "t", err_cols, true, "t", "error"},
                       c.output_dir / "error.svg");
            emit_chart(table, {"Arm chosen" + suffix, "t", {"arm"}, false, "t", "arm"}, c.output_dir / "arm.svg");
            emit_chart(table, {"Norm of system state" + suffix, "t", {"state_norm"}, true, "t", "|x_t|"},
                       c.output_dir / "state_norm.svg");
        }
    }
    return out;
}

Trajectory run_simulate(const ExperimentConfig& config, const RunOptions& options) {
    const ExperimentConfig c = config.resolved();
    if (c.experiment != ExperimentKind::Simulate) throw ConfigError("config is not a simulate experiment");
    const SwitchedSystem sys = system_of(c);
    const std::uint64_t seed = c.seeds.front();

    std::vector<std::size_t> switches = c.switches;
    if (switches.empty()) {
        RandomStream rng(derive_seed(seed, kSwitchStream));
        for (std::size_t t = 0; t < *c.horizon; ++t) switches.push_back(rng.uniform_index(sys.q()));
    }
    NoiseSampler sampler(*c.noise, derive_seed(seed, kNoiseStream));
    Trajectory traj = simulate(sys, switches, start_state(c), sampler);
    if (options.write_files) write_trajectory_csv(traj, c.output_dir / "trajectory.csv");
    return traj;
}

EstimateRunResult run_estimate(const ExperimentConfig& config, const RunOptions& options) {
    const ExperimentConfig c = config.resolved();
    if (c.experiment != ExperimentKind::Estimate) throw ConfigError("config is not an estimate experiment");
    const Trajectory traj = read_trajectory_csv(*c.trajectory);
    const Eigen::Index d = c.noise->dim();
    if (traj.dim() != d) throw ConfigError("trajectory dimension does not match the noise set");

    std::size_t q = c.systems.size();
    if (q == 0) {
        for (std::size_t s : traj.switches) q = std::max(q, s + 1);
    }
    const auto groups = group(traj, q);

    EstimateOptions est = estimate_options(c);
    est.execution = options.execution;

    EstimateRunResult out;
    std::ostringstream text, mats;
    text << kEstimateHeader << '\n';
    mats << "p,i";
    for (Eigen::Index j = 1; j <= d; ++j) mats << ",a_" << j;
    mats << '\n';
    for (std::size_t p = 0; p < q; ++p) {
        EstimateRow row;
        row.system = p;
        row.n = groups[p].size();
        text << (p + 1) << ',' << row.n << ',';
        if (row.n == 0) {
            text << "empty,,,,\n";
            out.rows.push_back(row);
            continue;
        }
        try {
            row.result = sme_estimate(groups[p], *c.noise, est);
        } catch (...) {
            rethrow_with("subsystem " + std::to_string(p + 1) + ": ");
        }
        const EstimateResult& r = *row.result;
        if (p < c.systems.size()) row.error = estimation_error(r.a_hat, c.systems[p].value, ErrorMetric::Frobenius);
        text << to_string(r.status) << ',' << (row.error ? fmt(*row.error) : "") << ',' << fmt(r.objective) << ','
             << fmt(r.max_violation) << ',' << fmt(r.kkt_residual) << '\n';
        for (Eigen::Index i = 0; i < d; ++i) {
            mats << (p + 1) << ',' << (i + 1);
            for (Eigen::Index j = 0; j < d; ++j) mats << ',' << fmt(r.a_hat(i, j));
            mats << '\n';
        }
        out.rows.push_back(std::move(row));
    }
    out.csv = text.str();
    out.matrices_csv = mats.str();
    if (options.write_files) {
        csv::write_file(c.output_dir / "estimate.csv", out.csv);
        csv::write_file(c.output_dir / "estimate_matrices.csv", out.matrices_csv);
    }
    return out;
}

SpectralRunResult run_spectral(const ExperimentConfig& config, const RunOptions& options) {
    const ExperimentConfig c = config.resolved();
    if (c.experiment != ExperimentKind::Spectral) throw ConfigError("config is not a spectral experiment");
    const Eigen::Index d = c.dim();

    SpectralRunResult out;
    std::ostringstream text;
    text << "name,radius,norm";
    for (Eigen::Index j = 1; j <= d; ++j) text << ",modulus_" << j;
    text << ",iterations,converged\n";
    for (const auto& s : c.systems) {
        SpectralReport rep = spectral_report(s.value);
        text << s.name << ',' << fmt(rep.radius) << ',' << fmt(rep.norm);
        for (double m : rep.eigen_moduli) text << ',' << fmt(m);
        text << ',' << rep.iterations << ',' << (rep.converged ? "true" : "false") << '\n';
        out.reports.push_back(std::move(rep));
    }
    out.csv = text.str();
    if (options.write_files) csv::write_file(c.output_dir / "spectral.csv", out.csv);
    return out;
}

}  // namespace setmem
