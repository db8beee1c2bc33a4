#include "psa/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "psa/sdr.hpp"

namespace psa {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::string fmt_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

bool sweeps_shape(SweepVar v) { return v == SweepVar::K || v == SweepVar::N; }

double epsilon_at(const ExperimentSpec& spec, double value) {
    return spec.sweep == SweepVar::epsilon ? value : spec.epsilon;
}

bool is_detection(Scenario s) { return s == Scenario::DetectGeneral || s == Scenario::DetectWorst; }

std::vector<double> point_values(const ExperimentSpec& spec) {
    if (spec.sweep == SweepVar::None) return {0.0};
    return spec.sweep_values;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

const char* to_string(Scenario s) {
    switch (s) {
        case Scenario::UnawareUnknownHB: return "unaware-unknown-hb";
        case Scenario::UnawareKnownHB: return "unaware-known-hb";
        case Scenario::DetectGeneral: return "detect-general";
        case Scenario::DetectWorst: return "detect-worst";
    }
    return "?";
}

const char* to_string(SolverKind s) {
    switch (s) {
        case SolverKind::MM_ADMM: return "mm-admm";
        case SolverKind::SDR: return "sdr";
        case SolverKind::NCAS: return "ncas";
        case SolverKind::Oracle: return "oracle";
    }
    return "?";
}

Scenario parse_scenario(const std::string& name) {
    for (auto s : {Scenario::UnawareUnknownHB, Scenario::UnawareKnownHB, Scenario::DetectGeneral,
                   Scenario::DetectWorst})
        if (name == to_string(s)) return s;
    throw std::invalid_argument("unknown scenario '" + name + "'");
}

SolverKind parse_solver(const std::string& name) {
    for (auto s : {SolverKind::MM_ADMM, SolverKind::SDR, SolverKind::NCAS, SolverKind::Oracle})
        if (name == to_string(s)) return s;
    throw std::invalid_argument("unknown solver '" + name + "'");
}

const char* to_string(SweepVar v) {
    switch (v) {
        case SweepVar::None: return "none";
        case SweepVar::K: return "K";
        case SweepVar::N: return "N";
        case SweepVar::P_dBm: return "P_dBm";
        case SweepVar::P_T_dBm: return "P_T_dBm";
        case SweepVar::P_S_dBm: return "P_S_dBm";
        case SweepVar::epsilon: return "epsilon";
        case SweepVar::tau: return "tau";
    }
    return "?";
}

SweepVar parse_sweep_var(const std::string& name) {
    for (auto v : {SweepVar::None, SweepVar::K, SweepVar::N, SweepVar::P_dBm, SweepVar::P_T_dBm, SweepVar::P_S_dBm,
                   SweepVar::epsilon, SweepVar::tau})
        if (name == to_string(v)) return v;
    throw std::invalid_argument("unknown sweep variable '" + name + "'");
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) {
    return splitmix64(seed + static_cast<std::uint64_t>(trial));
}

SystemParams params_at(const ExperimentSpec& spec, double v) {
    SystemParams p = spec.base;
    auto as_count = [&](const char* what) {
        if (!(v >= 1.0) || v != std::floor(v)) {
            throw std::invalid_argument(std::string("sweep value for ") + what + " must be a positive integer");
        }
        return static_cast<std::size_t>(v);
    };
    switch (spec.sweep) {
        case SweepVar::None:
        case SweepVar::epsilon: break;
        case SweepVar::K: {
            const double cap = p.P.at(0), noise = p.sigma_E2.at(0);
            p.K = as_count("K");
            p.P.assign(p.K, cap);
            p.sigma_E2.assign(p.K, noise);
            break;
        }
        case SweepVar::N: p.N = as_count("N"); break;
        case SweepVar::P_dBm: p.P.assign(p.K, dbm_to_linear(v)); break;
        case SweepVar::P_T_dBm: p.P_T = dbm_to_linear(v); break;
        case SweepVar::P_S_dBm: p.P_S = dbm_to_linear(v); break;
        case SweepVar::tau: p.tau = as_count("tau"); break;
    }
    p.validate();
    return p;
}

void ExperimentSpec::validate() const {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (solvers.empty()) throw std::invalid_argument("at least one solver is required");
    if (sweep != SweepVar::None && sweep_values.empty()) throw std::invalid_argument("sweep has no values");
    solver_config.validate();
    if (!(sdr_tol > 0.0)) throw std::invalid_argument("sdr tolerance must be positive");
    if (oracle_mag_steps < 2 || oracle_phase_steps < 1) throw std::invalid_argument("oracle grid too small");
    if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in (0, 1)");
    if (scenario == Scenario::DetectWorst && !(eta < 0.5)) {
        throw std::invalid_argument("worst-case detector requires eta < 0.5");
    }
    for (SolverKind s : solvers) {
        if (s == SolverKind::SDR && scenario == Scenario::UnawareKnownHB) {
            throw std::invalid_argument("sdr applies only to theta = 0 scenarios");
        }
        if (s == SolverKind::NCAS && scenario != Scenario::UnawareUnknownHB) {
            throw std::invalid_argument("ncas is defined for the unaware-unknown-hb scenario only");
        }
    }
    if (fixed_channels && sweeps_shape(sweep)) {
        throw std::invalid_argument("a replayed channel file fixes N and K; they cannot be swept");
    }
    for (double v : point_values(*this)) {
        const SystemParams p = params_at(*this, v);
        const double eps = epsilon_at(*this, v);
        if (is_detection(scenario) && !(eps > eta && eps < 1.0)) {
            throw std::invalid_argument("epsilon must lie in (eta, 1) for detection scenarios");
        }
        if (std::find(solvers.begin(), solvers.end(), SolverKind::Oracle) != solvers.end() && p.K > 2) {
            throw std::invalid_argument("oracle supports K <= 2 only");
        }
        if (fixed_channels && (fixed_channels->N() != p.N || fixed_channels->K() != p.K)) {
            throw std::invalid_argument("channel file dimensions disagree with --n/--k");
        }
    }
}

OracleResult oracle_grid(const ProblemData& data, std::size_t mag_steps, std::size_t phase_steps) {
    const std::size_t K = data.K();
    if (K < 1 || K > 2) throw std::invalid_argument("oracle_grid: supports K <= 2 only");
    if (mag_steps < 2 || phase_steps < 1) throw std::invalid_argument("oracle_grid: grid too small");

    const ComplexMatrix T = gram(data.A);
    const ComplexVector g = adjoint_times(data.A, data.gamma);
    const double gg = norm_sq(data.gamma);
    const bool pin_last = data.is_homogeneous();

    std::vector<std::vector<double>> mags(K);
    for (std::size_t k = 0; k < K; ++k) {
        const double r = std::sqrt(data.power_caps[k]);
        for (std::size_t i = 0; i < mag_steps; ++i)
            mags[k].push_back(r * static_cast<double>(i) / static_cast<double>(mag_steps - 1));
    }
    std::vector<cplx> phasors(phase_steps);
    for (std::size_t j = 0; j < phase_steps; ++j)
        phasors[j] = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(phase_steps));

    OracleResult best{ComplexVector(K), -1.0};
    auto consider = [&](cplx v0, cplx v1) {
        cplx num = std::conj(data.alpha[0]) * v0 + data.theta;
        double leak = std::norm(v0) * T(0, 0).real();
        double lin = 2.0 * (std::conj(g[0]) * v0).real();
        if (K == 2) {
            num += std::conj(data.alpha[1]) * v1;
            leak += std::norm(v1) * T(1, 1).real() + 2.0 * (std::conj(v0) * T(0, 1) * v1).real();
            lin += 2.0 * (std::conj(g[1]) * v1).real();
        }
        if (data.has_power_cap() && leak > data.varpi2) return;
        const double val = std::norm(num) / (leak + lin + gg + data.varrho);
        if (val > best.objective) {
            best.objective = val;
            best.nu[0] = v0;
            if (K == 2) best.nu[1] = v1;
        }
    };

    const std::size_t last_phases = pin_last ? 1 : phase_steps;
    if (K == 1) {
        for (double r : mags[0])
            for (std::size_t j = 0; j < last_phases; ++j) consider(r * phasors[j], cplx{});
    } else {
        for (double r0 : mags[0])
            for (std::size_t j0 = 0; j0 < phase_steps; ++j0) {
                const cplx v0 = r0 * phasors[j0];
                for (double r1 : mags[1])
                    for (std::size_t j1 = 0; j1 < last_phases; ++j1) consider(v0, r1 * phasors[j1]);
            }
    }
    return best;
}

namespace {

std::vector<TrialRecord> run_trial(const ExperimentSpec& spec, std::size_t point, double value, std::size_t trial) {
    std::vector<TrialRecord> out(spec.solvers.size());
    const std::uint64_t tseed = trial_seed(spec.seed, trial);
    for (std::size_t s = 0; s < spec.solvers.size(); ++s) {
        out[s].point = point;
        out[s].trial = trial;
        out[s].seed = tseed;
        out[s].solver = spec.solvers[s];
    }
    try {
        const SystemParams params = params_at(spec, value);
        const ChannelRealization ch = spec.fixed_channels ? *spec.fixed_channels
                                                          : generate_channels(tseed, params.N, params.K);
        std::optional<std::size_t> target;
        if (spec.target_best_ncas_eve) target = ncas_snr(params, ch).best_eve;

        const double eps = epsilon_at(spec, value);
        std::optional<DetectionModel> model;
        ProblemData data;
        switch (spec.scenario) {
            case Scenario::UnawareUnknownHB: data = build_unaware_unknown_hB(params, ch, target); break;
            case Scenario::UnawareKnownHB: data = build_unaware_known_hB(params, ch, target); break;
            case Scenario::DetectGeneral:
            case Scenario::DetectWorst: {
                const auto kind =
                    spec.scenario == Scenario::DetectGeneral ? DetectorCase::General : DetectorCase::Worst;
                model = DetectionModel::make(kind, spec.eta, params.N, params.sigma_BT2());
                data = build_detection_aware(params, ch, *model, eps, target);
                break;
            }
        }
        auto residual = [&](const ComplexVector& nu) {
            double r = std::max(constraint_violation(data, nu), 0.0);
            if (model) r = std::max(r, detect_prob(norm(data.A * nu), *model) - eps);
            return r;
        };

        SolverConfig cfg = spec.solver_config;
        cfg.init_seed = splitmix64(tseed ^ 0x6a09e667f3bcc909ULL);

        for (TrialRecord& rec : out) {
            rec.target = data.eve_order.back();
            try {
                const auto start = std::chrono::steady_clock::now();
                switch (rec.solver) {
                    case SolverKind::MM_ADMM: {
                        SolveResult r = solve(data, cfg);
                        rec.time_ms = elapsed_ms(start);
                        rec.objective = r.objective_value;
                        rec.snr = r.snr;
                        rec.mm_iterations = r.mm_iterations;
                        rec.converged = r.status == SolveStatus::Converged;
                        rec.residual = residual(r.nu);
                        if (spec.record_traces) rec.trace = std::move(r.trace);
                        break;
                    }
                    case SolverKind::SDR: {
                        const SdpInstance inst = build_sdp(data);
                        const SdpSolution sol = solve_sdp(inst, spec.sdr_tol);
                        rec.time_ms = elapsed_ms(start);
                        rec.objective = objective(data, sol.nu);
                        rec.snr = data.snr_scale * rec.objective;
                        rec.bound = sol.objective;
                        rec.eig_ratio = sol.eig_ratio;
                        rec.heuristic = sol.heuristic;
                        rec.residual = residual(sol.nu);
                        rec.converged = true;
                        break;
                    }
                    case SolverKind::NCAS: {
                        const NcasResult r = ncas_snr(params, ch);
                        rec.time_ms = elapsed_ms(start);
                        rec.snr = r.snr;
                        rec.objective = r.snr * params.sigma_E2[r.best_eve] / params.P_S;
                        rec.target = r.best_eve;
                        rec.converged = true;
                        break;
                    }
                    case SolverKind::Oracle: {
                        const OracleResult r = oracle_grid(data, spec.oracle_mag_steps, spec.oracle_phase_steps);
                        rec.time_ms = elapsed_ms(start);
                        rec.objective = r.objective;
                        rec.snr = data.snr_scale * r.objective;
                        rec.residual = residual(r.nu);
                        rec.converged = true;
                        break;
                    }
                }
                if (!spec.timing) rec.time_ms = 0.0;
                rec.ok = std::isfinite(rec.snr);
                if (!rec.ok) rec.error = "non-finite SNR";
            } catch (const std::exception& e) {
                rec.ok = false;
                rec.error = e.what();
                rec.time_ms = 0.0;
            }
        }
    } catch (const std::exception& e) {
        for (TrialRecord& rec : out) {
            rec.ok = false;
            rec.error = e.what();
        }
    }
    return out;
}

PointSummary summarize(const std::vector<const TrialRecord*>& recs, double value, SolverKind solver) {
    PointSummary s;
    s.sweep_value = value;
    s.solver = solver;
    double sum = 0.0, sum_sq = 0.0;
    for (const TrialRecord* r : recs) {
        if (!r->ok) {
            ++s.failures;
            continue;
        }
        ++s.trials;
        sum += r->snr;
        sum_sq += r->snr * r->snr;
        s.mean_time_ms += r->time_ms;
        s.mean_mm_iters += r->mm_iterations;
        s.mean_eig_ratio += r->eig_ratio;
        s.constraint_residual = std::max(s.constraint_residual, r->residual);
    }
    if (s.trials == 0) return s;
    const double n = static_cast<double>(s.trials);
    s.mean_snr_linear = sum / n;
    s.mean_time_ms /= n;
    s.mean_mm_iters /= n;
    s.mean_eig_ratio /= n;
    // Floor keeps the dB columns finite when every trial returned zero SNR.
    s.mean_snr_db = linear_to_db(std::max(s.mean_snr_linear, 1e-300));
    if (s.trials > 1 && s.mean_snr_linear > 0.0) {
        const double var = std::max(sum_sq - n * s.mean_snr_linear * s.mean_snr_linear, 0.0) / (n - 1.0);
        const double se_lin = std::sqrt(var / n);
        s.stderr_db = 10.0 / std::log(10.0) * se_lin / s.mean_snr_linear;
    }
    return s;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const std::vector<double> values = point_values(spec);
    const std::size_t jobs = values.size() * spec.trials;
    std::vector<std::vector<TrialRecord>> slots(jobs);

    unsigned workers = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, jobs));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t j = next++; j < jobs; j = next++) {
            const std::size_t point = j / spec.trials, trial = j % spec.trials;
            slots[j] = run_trial(spec, point, values[point], trial);
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }

    ExperimentResult result;
    result.spec = spec;
    for (auto& slot : slots)
        for (auto& rec : slot) result.records.push_back(std::move(rec));

    const std::size_t ns = spec.solvers.size();
    for (std::size_t p = 0; p < values.size(); ++p)
        for (std::size_t s = 0; s < ns; ++s) {
            std::vector<const TrialRecord*> recs;
            for (std::size_t t = 0; t < spec.trials; ++t) recs.push_back(&result.records[(p * spec.trials + t) * ns + s]);
            result.summary.push_back(summarize(recs, values[p], spec.solvers[s]));
        }
    return result;
}

std::vector<TimingEntry> timing_run(const std::vector<std::size_t>& K_list, std::size_t trials,
                                    const std::vector<SolverKind>& solvers, const ExperimentSpec& base) {
    ExperimentSpec spec = base;
    spec.sweep = SweepVar::K;
    spec.sweep_values.clear();
    for (std::size_t K : K_list) spec.sweep_values.push_back(static_cast<double>(K));
    spec.trials = trials;
    spec.solvers = solvers;
    spec.timing = true;
    spec.threads = 1;
    spec.record_traces = false;
    const ExperimentResult res = run_experiment(spec);

    std::vector<TimingEntry> out;
    for (const PointSummary& s : res.summary) {
        out.push_back({static_cast<std::size_t>(s.sweep_value), s.solver, s.mean_time_ms, s.trials});
    }
    return out;
}

namespace {

void write_summary_rows(std::ostream& os, const ExperimentResult& result, const std::string* label, bool header) {
    const bool swept = result.spec.sweep != SweepVar::None;
    if (header) {
        if (label) os << "scenario,";
        if (swept) os << to_string(result.spec.sweep) << ',';
        os << "solver,trials,mean_snr_linear,mean_snr_db,stderr_db,mean_time_ms,mean_mm_iters,mean_eig_ratio,"
              "constraint_residual\n";
    }
    for (const PointSummary& s : result.summary) {
        if (label) os << *label << ',';
        if (swept) os << fmt_num(s.sweep_value) << ',';
        os << to_string(s.solver) << ',' << s.trials << ',' << fmt_num(s.mean_snr_linear) << ','
           << fmt_num(s.mean_snr_db) << ',' << fmt_num(s.stderr_db) << ',' << fmt_num(s.mean_time_ms) << ','
           << fmt_num(s.mean_mm_iters) << ',' << fmt_num(s.mean_eig_ratio) << ',' << fmt_num(s.constraint_residual)
           << '\n';
    }
}

}  // namespace

void write_summary_csv(std::ostream& os, const ExperimentResult& result) {
    write_summary_rows(os, result, nullptr, true);
}

void write_summary_csv(std::ostream& os, const std::vector<ExperimentResult>& results) {
    for (std::size_t i = 0; i < results.size(); ++i) {
        const std::string label = to_string(results[i].spec.scenario);
        write_summary_rows(os, results[i], &label, i == 0);
    }
}

void write_trace_csv(std::ostream& os, const ExperimentResult& result) {
    const bool swept = result.spec.sweep != SweepVar::None;
    const std::vector<double> values = point_values(result.spec);
    if (swept) os << to_string(result.spec.sweep) << ',';
    os << "trial,iteration,snr_linear,snr_db\n";
    for (const TrialRecord& r : result.records) {
        if (r.solver != SolverKind::MM_ADMM || !r.ok) continue;
        // The trace is stored unscaled; recover the scale from the final point.
        const double scale = r.objective > 0.0 ? r.snr / r.objective : 0.0;
        for (std::size_t i = 0; i < r.trace.size(); ++i) {
            const double snr = scale * r.trace[i];
            if (swept) os << fmt_num(values[r.point]) << ',';
            os << r.trial << ',' << i << ',' << fmt_num(snr) << ',' << fmt_num(linear_to_db(std::max(snr, 1e-300)))
               << '\n';
        }
    }
}

std::string manifest_json(const ExperimentResult& result, const std::vector<std::string>& argv) {
    using nlohmann::json;
    const ExperimentSpec& spec = result.spec;
    json j;
    j["argv"] = argv;
    j["scenario"] = to_string(spec.scenario);
    j["sweep"] = {{"variable", to_string(spec.sweep)}, {"values", spec.sweep_values}};
    j["trials"] = spec.trials;
    std::vector<std::string> solvers;
    for (SolverKind s : spec.solvers) solvers.emplace_back(to_string(s));
    j["solvers"] = solvers;
    j["params"] = {{"N", spec.base.N},         {"K", spec.base.K},           {"tau", spec.base.tau},
                   {"P_T", spec.base.P_T},     {"P_S", spec.base.P_S},       {"sigma_T2", spec.base.sigma_T2},
                   {"sigma_E2", spec.base.sigma_E2}, {"P", spec.base.P}};
    j["eta"] = spec.eta;
    j["epsilon"] = spec.epsilon;
    const SolverConfig& c = spec.solver_config;
    j["solver_config"] = {{"penalty", c.penalty == PenaltyScaling::Scaled ? "scaled" : "absolute"},
                          {"rho", c.rho},         {"rho_scaled", c.rho_scaled},
                          {"delta_M", c.delta_M}, {"delta_A", c.delta_A},
                          {"T_M_MAX", c.T_M_MAX}, {"T_A_MAX", c.T_A_MAX},
                          {"newton_tol", c.newton_tol}};
    j["seed"] = spec.seed;
    j["timing"] = spec.timing;
    j["target_best_ncas_eve"] = spec.target_best_ncas_eve;
    j["channels_replayed"] = spec.fixed_channels.has_value();
    j["oracle_grid"] = {spec.oracle_mag_steps, spec.oracle_phase_steps};
    j["sdr_tol"] = spec.sdr_tol;
    std::vector<std::uint64_t> seeds;
    for (std::size_t t = 0; t < spec.trials; ++t) seeds.push_back(trial_seed(spec.seed, t));
    j["trial_seeds"] = seeds;
    json failures = json::array();
    for (const TrialRecord& r : result.records)
        if (!r.ok) failures.push_back({{"point", r.point}, {"trial", r.trial}, {"solver", to_string(r.solver)},
                                       {"error", r.error}});
    j["failures"] = failures;
    return j.dump(2) + "\n";
}

}  // namespace psa
