#include "psa/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "psa/channel_model.hpp"
#include "psa/detection.hpp"
#include "psa/experiments.hpp"
#include "psa/mm_admm.hpp"
#include "psa/sdr.hpp"

namespace psa {

namespace {

// Raised for bad flag values that CLI11 cannot check on its own.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Options {
    std::size_t n = 8;
    std::size_t k = 3;
    std::size_t tau = 16;
    double p_dbm = 10.0;
    double pt_dbm = 10.0;
    double ps_dbm = 20.0;
    double sigma_t_dbm = 0.0;
    double sigma_e_dbm = 0.0;
    double eta = 0.05;
    double epsilon = 0.2;
    std::string penalty = "scaled";
    double rho = 0.01;
    double rho_scaled = 5.0;
    double delta_m = 1e-3;
    double delta_a = 1e-4;
    int tm_max = 500;
    int ta_max = 5;
    std::size_t trials = 0;  // 0: subcommand default
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::string output = "-";
    std::string manifest;
    std::string channels_file;
    std::vector<std::string> solvers;  // empty: subcommand default
    std::vector<double> values;        // empty: subcommand default
    bool timing = false;
    bool no_timing = false;

    // Subcommand options.
    std::string scenario;
    std::string mode = "k";
    std::string detect_case = "general";
    std::string detect_sweep = "p";
    bool quick = false;
};

SystemParams system_params(const Options& o) {
    return SystemParams::uniform(o.n, o.k, dbm_to_linear(o.pt_dbm), dbm_to_linear(o.ps_dbm), dbm_to_linear(o.p_dbm),
                                 dbm_to_linear(o.sigma_t_dbm), dbm_to_linear(o.sigma_e_dbm), o.tau);
}

SolverConfig solver_config(const Options& o) {
    SolverConfig c;
    if (o.penalty == "scaled") {
        c.penalty = PenaltyScaling::Scaled;
    } else if (o.penalty == "absolute") {
        c.penalty = PenaltyScaling::Absolute;
    } else {
        throw UsageError("--penalty must be 'scaled' or 'absolute'");
    }
    c.rho = o.rho;
    c.rho_scaled = o.rho_scaled;
    c.delta_M = o.delta_m;
    c.delta_A = o.delta_a;
    c.T_M_MAX = o.tm_max;
    c.T_A_MAX = o.ta_max;
    c.validate();
    return c;
}

ExperimentSpec base_spec(const Options& o, Scenario scenario, std::size_t default_trials,
                         std::vector<SolverKind> default_solvers) {
    ExperimentSpec spec;
    spec.scenario = scenario;
    spec.base = system_params(o);
    spec.eta = o.eta;
    spec.epsilon = o.epsilon;
    spec.solver_config = solver_config(o);
    spec.seed = o.seed;
    spec.threads = o.threads;
    spec.trials = o.trials ? o.trials : default_trials;
    spec.timing = o.timing;
    if (o.solvers.empty()) {
        spec.solvers = std::move(default_solvers);
    } else {
        spec.solvers.clear();
        for (const auto& s : o.solvers) spec.solvers.push_back(parse_solver(s));
    }
    if (!o.channels_file.empty()) {
        std::ifstream in(o.channels_file);
        if (!in) throw std::runtime_error("cannot read channel file '" + o.channels_file + "'");
        ChannelRealization ch = read_channels(in);
        spec.base.N = ch.N();
        spec.base.K = ch.K();
        spec.base.P.assign(ch.K(), dbm_to_linear(o.p_dbm));
        spec.base.sigma_E2.assign(ch.K(), dbm_to_linear(o.sigma_e_dbm));
        spec.fixed_channels = std::move(ch);
    }
    return spec;
}

void set_sweep(ExperimentSpec& spec, const Options& o, SweepVar var, std::vector<double> defaults) {
    spec.sweep = var;
    spec.sweep_values = o.values.empty() ? std::move(defaults) : o.values;
}

std::vector<double> integer_range(int lo, int hi, int step) {
    std::vector<double> v;
    for (int x = lo; x <= hi; x += step) v.push_back(x);
    return v;
}

class Output {
public:
    Output(const std::string& path, std::ostream& fallback) : out_(&fallback) {
        if (path != "-") {
            file_.open(path);
            if (!file_) throw std::runtime_error("cannot open output file '" + path + "'");
            out_ = &file_;
        }
    }
    std::ostream& stream() { return *out_; }
    void finish(const std::string& path) {
        out_->flush();
        if (!*out_) throw std::runtime_error("failed writing output '" + path + "'");
    }

private:
    std::ofstream file_;
    std::ostream* out_;
};

void write_manifest(const Options& o, const ExperimentResult& result, const std::vector<std::string>& argv) {
    if (o.manifest.empty()) return;
    std::ofstream f(o.manifest);
    if (!f) throw std::runtime_error("cannot open manifest file '" + o.manifest + "'");
    f << manifest_json(result, argv);
    if (!f) throw std::runtime_error("failed writing manifest '" + o.manifest + "'");
}

int run_convergence(const Options& o, const std::vector<std::string>& argv, std::ostream& out) {
    const Scenario sc = o.scenario.empty() ? Scenario::UnawareUnknownHB : parse_scenario(o.scenario);
    ExperimentSpec spec = base_spec(o, sc, 30, {SolverKind::MM_ADMM});
    spec.solvers = {SolverKind::MM_ADMM};
    spec.record_traces = true;
    const ExperimentResult res = run_experiment(spec);
    Output sink(o.output, out);
    write_trace_csv(sink.stream(), res);
    sink.finish(o.output);
    write_manifest(o, res, argv);
    return 0;
}

int run_compare(const Options& o, const std::vector<std::string>& argv, std::ostream& out) {
    const Scenario sc = o.scenario.empty() ? Scenario::DetectGeneral : parse_scenario(o.scenario);
    Options opts = o;
    opts.timing = !o.no_timing;
    ExperimentSpec spec = base_spec(opts, sc, 100, {SolverKind::MM_ADMM, SolverKind::SDR});
    set_sweep(spec, o, SweepVar::K, integer_range(2, 16, 2));
    const ExperimentResult res = run_experiment(spec);
    Output sink(o.output, out);
    write_summary_csv(sink.stream(), res);
    sink.finish(o.output);
    write_manifest(o, res, argv);
    return 0;
}

int run_unaware(const Options& o, const std::vector<std::string>& argv, std::ostream& out) {
    std::vector<ExperimentResult> results;
    if (o.mode == "k") {
        ExperimentSpec spec =
            base_spec(o, Scenario::UnawareUnknownHB, 100, {SolverKind::MM_ADMM, SolverKind::NCAS});
        spec.target_best_ncas_eve = true;
        set_sweep(spec, o, SweepVar::K, integer_range(1, 8, 1));
        results.push_back(run_experiment(spec));
    } else if (o.mode == "pt") {
        for (Scenario sc : {Scenario::UnawareUnknownHB, Scenario::UnawareKnownHB}) {
            ExperimentSpec spec = base_spec(o, sc, 100, {SolverKind::MM_ADMM});
            set_sweep(spec, o, SweepVar::P_T_dBm, integer_range(0, 30, 5));
            results.push_back(run_experiment(spec));
        }
    } else {
        throw UsageError("--mode must be 'k' or 'pt'");
    }
    Output sink(o.output, out);
    if (results.size() == 1) {
        write_summary_csv(sink.stream(), results.front());
    } else {
        write_summary_csv(sink.stream(), results);
    }
    sink.finish(o.output);
    write_manifest(o, results.front(), argv);
    return 0;
}

int run_detect(const Options& o, const std::vector<std::string>& argv, std::ostream& out) {
    Scenario sc;
    if (o.detect_case == "general") {
        sc = Scenario::DetectGeneral;
    } else if (o.detect_case == "worst") {
        sc = Scenario::DetectWorst;
    } else {
        throw UsageError("--case must be 'general' or 'worst'");
    }
    ExperimentSpec spec = base_spec(o, sc, 100, {SolverKind::MM_ADMM});
    if (o.detect_sweep == "p") {
        set_sweep(spec, o, SweepVar::P_dBm, integer_range(0, 30, 5));
    } else if (o.detect_sweep == "epsilon") {
        set_sweep(spec, o, SweepVar::epsilon, {0.1, 0.2, 0.3, 0.4, 0.5});
    } else {
        throw UsageError("--sweep must be 'p' or 'epsilon'");
    }
    const ExperimentResult res = run_experiment(spec);
    Output sink(o.output, out);
    write_summary_csv(sink.stream(), res);
    sink.finish(o.output);
    write_manifest(o, res, argv);
    return 0;
}

// ---------------------------------------------------------------- validation

struct Check {
    std::ostream& out;
    bool all_ok = true;

    void report(const std::string& name, bool ok, const std::string& detail) {
        out << (ok ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
        all_ok = all_ok && ok;
    }
};

std::string frac(std::size_t num, std::size_t den) { return std::to_string(num) + "/" + std::to_string(den); }

ProblemData small_instance(std::uint64_t seed, bool capped) {
    const SystemParams p = SystemParams::uniform(4, 2, 10.0, 100.0, 10.0);
    const ChannelRealization ch = generate_channels(seed, 4, 2);
    if (!capped) return build_unaware_unknown_hB(p, ch);
    return build_detection_aware(p, ch, DetectionModel::general(0.05, 4, p.sigma_BT2()), 0.2);
}

}  // namespace

bool run_validation(bool quick, std::uint64_t seed, std::ostream& out) {
    Check check{out};
    std::mt19937_64 rng(seed);
    auto next_seed = [&] { return rng(); };
    SolverConfig cfg;

    // Oracle equivalence and relaxation sandwich on K = 2, N = 4.
    {
        const std::size_t n = quick ? 6 : 25;
        std::size_t near = 0, below = 0, within = 0, total = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (bool capped : {false, true}) {
                const ProblemData d = small_instance(next_seed(), capped);
                cfg.init_seed = next_seed();
                const SolveResult r = solve(d, cfg);
                const OracleResult o = oracle_grid(d, 64, 64);
                const SdpSolution s = solve_sdp(build_sdp(d));
                ++total;
                if (r.objective_value >= 0.99 * o.objective) ++near;
                if (r.objective_value <= s.objective * (1.0 + 1e-6)) ++below;
                if (10.0 * std::log10(s.objective / r.objective_value) <= 0.1) ++within;
            }
        check.report("oracle-equivalence", near * 100 >= total * 95,
                     frac(near, total) + " instances at >= 0.99 x grid optimum");
        check.report("relaxation-upper-bound", below == total, frac(below, total) + " instances with MM <= SDR bound");
        check.report("relaxation-gap", within * 100 >= total * 95, frac(within, total) + " instances within 0.1 dB");
    }

    // Rank-one relaxation for K <= N.
    {
        const std::size_t n = quick ? 4 : 14;
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t K = 2 + i % 7;
            const SystemParams p = SystemParams::uniform(10, K, 10.0, 100.0, dbm_to_linear(8.0));
            const ProblemData d = build_detection_aware(p, generate_channels(next_seed(), 10, K),
                                                        DetectionModel::general(0.05, 10, p.sigma_BT2()), 0.2);
            worst = std::max(worst, solve_sdp(build_sdp(d)).eig_ratio);
        }
        std::ostringstream s;
        s << "max eig ratio " << worst << " over " << n << " instances with K <= N";
        check.report("sdr-rank-one", worst <= 1e-6, s.str());
    }

    // MM ascent and iteration counts, N = 8, K = 3.
    {
        const std::size_t n = quick ? 8 : 30;
        std::size_t monotone = 0, fast = 0;
        const SystemParams p = SystemParams::uniform(8, 3, 10.0, 100.0, 10.0);
        for (std::size_t i = 0; i < n; ++i) {
            const ProblemData d = build_unaware_unknown_hB(p, generate_channels(next_seed(), 8, 3));
            cfg.init_seed = next_seed();
            const SolveResult r = solve(d, cfg);
            bool ok = true;
            for (std::size_t t = 1; t < r.trace.size(); ++t) ok = ok && r.trace[t] >= r.trace[t - 1] - 1e-9;
            monotone += ok;
            fast += r.mm_iterations <= 100;
        }
        check.report("mm-ascent", monotone == n, frac(monotone, n) + " nondecreasing traces");
        check.report("mm-convergence", fast * 10 >= n * 9, frac(fast, n) + " runs within 100 MM iterations");
    }

    // Minorization and touching of the surrogate.
    {
        const SystemParams p = SystemParams::uniform(6, 3, 10.0, 100.0, 10.0);
        const ProblemData d = build_unaware_known_hB(p, generate_channels(next_seed(), 6, 3));
        const ComplexVector nu_hat = random_feasible_start(d, next_seed());
        const SurrogateCoeffs c = surrogate_coeffs(d, nu_hat);
        const double touch = std::abs(surrogate_value(c, d, nu_hat) - objective(d, nu_hat));
        std::normal_distribution<double> g(0.0, 2.0);
        double worst = -kInfinity;
        for (int i = 0; i < 1000; ++i) {
            ComplexVector nu(3);
            for (auto& v : nu) v = cplx(g(rng), g(rng));
            worst = std::max(worst, surrogate_value(c, d, nu) - objective(d, nu));
        }
        std::ostringstream s;
        s << "touching error " << touch << ", max surrogate excess " << worst;
        check.report("surrogate-minorizer", touch <= 1e-10 && worst <= 1e-12, s.str());
    }

    // Closed-form detection probabilities against the simulated detectors.
    for (DetectorCase kind : {DetectorCase::General, DetectorCase::Worst}) {
        const std::size_t points = quick ? 3 : 6;
        const std::size_t trials = quick ? 20000 : 100000;
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::size_t ok = 0;
        double worst_z = 0.0;
        for (std::size_t i = 0; i < points; ++i) {
            const std::size_t N = 2 + static_cast<std::size_t>(u(rng) * 10.0);
            const double eta = 0.01 + 0.2 * u(rng);
            const DetectionModel m = DetectionModel::make(kind, eta, N, 1.0 + u(rng));
            ComplexVector h(N);
            std::normal_distribution<double> g(0.0, 1.0);
            for (auto& v : h) v = cplx(g(rng), g(rng));
            h *= (0.2 + 3.0 * u(rng)) * std::sqrt(m.sigma_BT2) / norm(h);
            const double p = detect_prob(norm(h), m);
            const double emp = simulate_detector(m, h, trials, next_seed());
            const double z = std::abs(emp - p) / std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
            worst_z = std::max(worst_z, z);
            ok += z <= 3.0;
        }
        std::ostringstream s;
        s << frac(ok, points) << " points within 3 standard errors (worst " << worst_z << ")";
        check.report(kind == DetectorCase::General ? "detection-general" : "detection-worst", ok == points, s.str());
    }

    // Budget round trip and evasion of MM outputs.
    {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double worst = 0.0;
        for (int i = 0; i < 40; ++i) {
            const auto kind = i % 2 ? DetectorCase::Worst : DetectorCase::General;
            const double eta = 0.01 + 0.2 * u(rng);
            const DetectionModel m = DetectionModel::make(kind, eta, 2 + i % 10, 1.0 + u(rng));
            const double eps = eta + (0.95 - eta) * (0.05 + 0.9 * u(rng));
            worst = std::max(worst, std::abs(detect_prob(power_cap_bisect(m, eps), m) - eps));
        }
        std::ostringstream s;
        s << "max |P(varpi) - eps| = " << worst;
        check.report("budget-round-trip", worst <= 1e-8, s.str());

        double excess = -kInfinity;
        const std::size_t n = quick ? 4 : 12;
        const SystemParams p = SystemParams::uniform(8, 3, 10.0, 100.0, 1000.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto kind = i % 2 ? DetectorCase::Worst : DetectorCase::General;
            const DetectionModel m = DetectionModel::make(kind, 0.05, 8, p.sigma_BT2());
            const ProblemData d = build_detection_aware(p, generate_channels(next_seed(), 8, 3), m, 0.3);
            cfg.init_seed = next_seed();
            const SolveResult r = solve(d, cfg);
            excess = std::max(excess, detect_prob(norm(d.A * r.nu), m) - 0.3);
        }
        std::ostringstream e;
        e << "max detection excess over epsilon " << excess;
        check.report("evasion", excess <= 1e-6, e.str());
    }

    return check.all_ok;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Cooperative pilot spoofing attack: solvers and Monte Carlo experiments", "psa_cli"};
    app.fallthrough();
    app.require_subcommand(1);

    app.add_option("--n", o.n, "BS antennas")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--k", o.k, "eavesdroppers")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--tau", o.tau, "pilot length")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--p-dbm", o.p_dbm, "per-Eve attack power cap (dBm)")->capture_default_str();
    app.add_option("--pt-dbm", o.pt_dbm, "LU training power (dBm)")->capture_default_str();
    app.add_option("--ps-dbm", o.ps_dbm, "BS data power (dBm)")->capture_default_str();
    app.add_option("--sigma-t-dbm", o.sigma_t_dbm, "training noise (dBm)")->capture_default_str();
    app.add_option("--sigma-e-dbm", o.sigma_e_dbm, "Eve receive noise (dBm)")->capture_default_str();
    app.add_option("--eta", o.eta, "false-alarm level")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    app.add_option("--epsilon", o.epsilon, "detection-probability budget")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    app.add_option("--penalty", o.penalty, "ADMM penalty mode: scaled or absolute")->capture_default_str();
    app.add_option("--rho", o.rho, "ADMM penalty for --penalty absolute")->capture_default_str();
    app.add_option("--rho-scaled", o.rho_scaled, "dimensionless ADMM penalty for --penalty scaled")
        ->capture_default_str();
    app.add_option("--delta-m", o.delta_m, "MM relative-change tolerance")->capture_default_str();
    app.add_option("--delta-a", o.delta_a, "ADMM relative-change tolerance")->capture_default_str();
    app.add_option("--tm-max", o.tm_max, "MM iteration cap")->capture_default_str();
    app.add_option("--ta-max", o.ta_max, "ADMM iterations per block")->capture_default_str();
    app.add_option("--trials", o.trials, "Monte Carlo trials (0: subcommand default)")->capture_default_str();
    app.add_option("--seed", o.seed, "master seed")->capture_default_str();
    app.add_option("--threads", o.threads, "worker threads (0: all cores)")->capture_default_str();
    app.add_option("--output,-o", o.output, "CSV output path, - for stdout")->capture_default_str();
    app.add_option("--manifest", o.manifest, "write a JSON replay manifest here");
    app.add_option("--channels-file", o.channels_file, "replay one channel realization for every trial");
    app.add_option("--solver", o.solvers, "solvers: mm-admm, sdr, ncas, oracle")->delimiter(',');
    app.add_option("--values", o.values, "sweep values overriding the subcommand default")->delimiter(',');
    app.add_flag("--timing", o.timing, "record wall time per solve");
    app.add_flag("--no-timing", o.no_timing, "leave the time column at 0 (compare records time by default)");

    auto* conv = app.add_subcommand("convergence", "per-iteration MM objective traces");
    conv->add_option("--scenario", o.scenario, "unaware-unknown-hb, unaware-known-hb, detect-general, detect-worst");
    auto* cmp = app.add_subcommand("compare", "MM-ADMM vs SDR: time, eigenvalue ratio and SNR vs K");
    cmp->add_option("--scenario", o.scenario, "scenario with theta = 0 (default detect-general)");
    auto* un = app.add_subcommand("unaware", "no detection: CAS vs NCAS over K, or known vs unknown h_B over P_T");
    un->add_option("--mode", o.mode, "k or pt")->capture_default_str();
    auto* det = app.add_subcommand("detect", "detection-aware attack: SNR vs P or vs epsilon");
    det->add_option("--case", o.detect_case, "general or worst")->capture_default_str();
    det->add_option("--sweep", o.detect_sweep, "p or epsilon")->capture_default_str();
    auto* val = app.add_subcommand("validate", "oracle, relaxation, detection and invariant checks");
    val->add_flag("--quick", o.quick, "smaller sample sizes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        if (app.get_subcommands().empty()) {
            err << app.help();
        } else {
            err << "psa_cli: " << e.what() << '\n';
        }
        return 2;
    }

    std::vector<std::string> args(argv, argv + argc);
    try {
        if (conv->parsed()) return run_convergence(o, args, out);
        if (cmp->parsed()) return run_compare(o, args, out);
        if (un->parsed()) return run_unaware(o, args, out);
        if (det->parsed()) return run_detect(o, args, out);
        if (val->parsed()) return run_validation(o.quick, o.seed, out) ? 0 : 1;
    } catch (const std::invalid_argument& e) {
        err << "psa_cli: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "psa_cli: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace psa
