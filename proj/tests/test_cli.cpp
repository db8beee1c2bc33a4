#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "psa/channel_model.hpp"
#include "psa/cli.hpp"

using namespace psa;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "psa_cli");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("missing subcommand prints usage and exits 2") {
    const Run r = run({});
    CHECK(r.code == 2);
    CHECK(r.err.find("Usage") != std::string::npos);
}

TEST_CASE("help exits 0") {
    const Run r = run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("validate") != std::string::npos);
}

TEST_CASE("bad flags and values exit 2 with one-line diagnostics") {
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"compare", "--bogus"},
             {"--eta", "1.5", "detect"},
             {"detect", "--case", "typical"},
             {"unaware", "--mode", "x"},
             {"--penalty", "adaptive", "unaware"},
             {"--epsilon", "0.01", "detect"},
             {"--trials", "1", "--solver", "sdr", "unaware", "--mode", "pt"}}) {
        const Run r = run(args);
        CHECK(r.code == 2);
        CHECK(r.err.find("psa_cli: ") == 0);
        CHECK(r.err.find('\n') == r.err.size() - 1);
    }
}

TEST_CASE("unwritable output exits 1") {
    const Run r = run({"--trials", "1", "--output", "/nonexistent/dir/out.csv", "unaware"});
    CHECK(r.code == 1);
    CHECK(r.err.find("cannot open output") != std::string::npos);
}

TEST_CASE("identical argv gives byte-identical CSV") {
    const std::vector<std::string> args{"--trials", "3", "--k", "2", "--values", "0,10", "--threads", "2",
                                        "detect"};
    const Run a = run(args);
    const Run b = run(args);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(first_line(a.out) ==
          "P_dBm,solver,trials,mean_snr_linear,mean_snr_db,stderr_db,mean_time_ms,mean_mm_iters,mean_eig_ratio,"
          "constraint_residual");
}

TEST_CASE("subcommands produce their tables") {
    const Run conv = run({"--trials", "2", "convergence"});
    CHECK(conv.code == 0);
    CHECK(first_line(conv.out) == "trial,iteration,snr_linear,snr_db");

    const Run cmp = run({"--trials", "2", "--values", "2,4", "--n", "10", "--p-dbm", "8", "compare"});
    CHECK(cmp.code == 0);
    CHECK(cmp.out.find(",sdr,") != std::string::npos);

    const Run pt = run({"--trials", "2", "--values", "0,10", "unaware", "--mode", "pt"});
    CHECK(pt.code == 0);
    CHECK(first_line(pt.out).rfind("scenario,P_T_dBm,solver", 0) == 0);
    CHECK(pt.out.find("unaware-known-hb") != std::string::npos);

    const Run eps = run({"--trials", "2", "--values", "0.1,0.3", "detect", "--case", "worst", "--sweep", "epsilon"});
    CHECK(eps.code == 0);
    CHECK(first_line(eps.out).rfind("epsilon,solver", 0) == 0);
}

TEST_CASE("channel file replay and manifest") {
    const auto dir = std::filesystem::temp_directory_path() / "psa_cli_test";
    std::filesystem::create_directories(dir);
    const auto chan = (dir / "ch.txt").string();
    const auto man = (dir / "manifest.json").string();
    {
        std::ofstream f(chan);
        write_channels(f, generate_channels(4, 5, 2));
    }
    const Run r = run({"--trials", "2", "--channels-file", chan, "--manifest", man, "--values", "0", "detect"});
    CHECK(r.code == 0);
    std::ifstream m(man);
    std::stringstream ss;
    ss << m.rdbuf();
    CHECK(ss.str().find("\"trial_seeds\"") != std::string::npos);

    const Run missing = run({"--channels-file", (dir / "none.txt").string(), "unaware"});
    CHECK(missing.code == 1);
    std::filesystem::remove_all(dir);
}

TEST_CASE("validate --quick passes") {
    const Run r = run({"validate", "--quick"});
    CHECK(r.code == 0);
    CHECK(r.out.find("FAIL") == std::string::npos);
}
