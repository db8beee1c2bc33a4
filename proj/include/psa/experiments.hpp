#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "psa/channel_model.hpp"
#include "psa/detection.hpp"
#include "psa/mm_admm.hpp"

namespace psa {

enum class Scenario { UnawareUnknownHB, UnawareKnownHB, DetectGeneral, DetectWorst };
enum class SolverKind { MM_ADMM, SDR, NCAS, Oracle };

const char* to_string(Scenario s);
const char* to_string(SolverKind s);
Scenario parse_scenario(const std::string& name);
SolverKind parse_solver(const std::string& name);

/// Parameters a sweep may vary. Power-like values are in dBm.
enum class SweepVar { None, K, N, P_dBm, P_T_dBm, P_S_dBm, epsilon, tau };

const char* to_string(SweepVar v);
SweepVar parse_sweep_var(const std::string& name);

struct ExperimentSpec {
    Scenario scenario = Scenario::UnawareUnknownHB;
    SweepVar sweep = SweepVar::None;
    std::vector<double> sweep_values;  // ignored for SweepVar::None
    std::size_t trials = 100;
    std::vector<SolverKind> solvers{SolverKind::MM_ADMM};
    SystemParams base;  // uniform caps and noise are taken from entry 0 when K is swept
    double eta = 0.05;
    double epsilon = 0.2;
    SolverConfig solver_config;
    std::uint64_t seed = 1;
    unsigned threads = 0;  // 0: hardware concurrency
    bool timing = false;   // record wall time per solve (otherwise reported as 0)
    bool record_traces = false;
    // CAS targets the Eve that is best under NCAS in the same realization,
    // so the per-realization comparison is like for like.
    bool target_best_ncas_eve = false;
    std::optional<ChannelRealization> fixed_channels;  // replayed for every trial
    std::size_t oracle_mag_steps = 64;
    std::size_t oracle_phase_steps = 64;
    double sdr_tol = 1e-8;

    /// Throws std::invalid_argument on an inconsistent combination.
    void validate() const;
};

struct TrialRecord {
    std::size_t point = 0;
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    SolverKind solver = SolverKind::MM_ADMM;
    bool ok = false;
    std::string error;
    double snr = 0.0;        // linear
    double objective = 0.0;  // unscaled ratio
    double bound = 0.0;      // SDR relaxation value (unscaled), 0 otherwise
    double time_ms = 0.0;
    int mm_iterations = 0;
    bool converged = false;
    double eig_ratio = 0.0;
    bool heuristic = false;
    double residual = 0.0;   // constraint violation, detection excess included
    std::size_t target = 0;  // original index of the target Eve
    std::vector<double> trace;
};

struct PointSummary {
    double sweep_value = 0.0;
    SolverKind solver = SolverKind::MM_ADMM;
    std::size_t trials = 0;  // successful trials
    std::size_t failures = 0;
    double mean_snr_linear = 0.0;
    double mean_snr_db = 0.0;
    double stderr_db = 0.0;
    double mean_time_ms = 0.0;
    double mean_mm_iters = 0.0;
    double mean_eig_ratio = 0.0;
    double constraint_residual = 0.0;  // worst over trials
};

struct ExperimentResult {
    ExperimentSpec spec;
    std::vector<PointSummary> summary;  // point-major, solver order as in spec
    std::vector<TrialRecord> records;   // (point, trial, solver) order
};

/// Seed of trial t; identical across sweep points so every point sees the same channels.
std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial);

/// Parameters at one sweep point.
SystemParams params_at(const ExperimentSpec& spec, double sweep_value);

ExperimentResult run_experiment(const ExperimentSpec& spec);

struct OracleResult {
    ComplexVector nu;
    double objective = 0.0;
};

/// Exhaustive grid over magnitudes {0, ..., sqrt(P_k)} and phases. With
/// theta = 0 and gamma = 0 the last phase is pinned to 0. K <= 2 only.
OracleResult oracle_grid(const ProblemData& data, std::size_t mag_steps = 64, std::size_t phase_steps = 64);

struct TimingEntry {
    std::size_t K = 0;
    SolverKind solver = SolverKind::MM_ADMM;
    double mean_ms = 0.0;
    std::size_t trials = 0;
};

/// Mean wall time per (K, solver) for base.scenario, single-threaded, with identical channel sets for every solver.
std::vector<TimingEntry> timing_run(const std::vector<std::size_t>& K_list, std::size_t trials,
                                    const std::vector<SolverKind>& solvers, const ExperimentSpec& base);

/// Summary CSV: sweep column (if any), then the fixed metric columns.
void write_summary_csv(std::ostream& os, const ExperimentResult& result);

/// Several experiments over the same sweep in one table, led by a scenario column.
void write_summary_csv(std::ostream& os, const std::vector<ExperimentResult>& results);

/// One row per MM iteration: trial,iteration,snr_linear,snr_db.
void write_trace_csv(std::ostream& os, const ExperimentResult& result);

/// JSON manifest with every parameter and per-trial seed.
std::string manifest_json(const ExperimentResult& result, const std::vector<std::string>& argv);

}  // namespace psa
