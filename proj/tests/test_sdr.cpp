#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "psa/channel_model.hpp"
#include "psa/detection.hpp"
#include "psa/experiments.hpp"
#include "psa/mm_admm.hpp"
#include "psa/sdr.hpp"

using namespace psa;

namespace {

ProblemData detect_instance(std::uint64_t seed, std::size_t N, std::size_t K, double P_dBm = 8.0) {
    const SystemParams p = SystemParams::uniform(N, K, 10.0, 100.0, dbm_to_linear(P_dBm));
    return build_detection_aware(p, generate_channels(seed, N, K), DetectionModel::general(0.05, N, p.sigma_BT2()),
                                 0.2);
}

}  // namespace

TEST_CASE("build_sdp") {
    const SystemParams p = SystemParams::uniform(4, 1, 10.0, 100.0, 5.0);
    const ProblemData d1 = build_unaware_unknown_hB(p, generate_channels(1, 4, 1));
    const SdpInstance s1 = build_sdp(d1);
    CHECK(s1.Theta(0, 0).real() == doctest::Approx(std::norm(d1.alpha[0])).epsilon(1e-14));
    CHECK(s1.T(0, 0).real() == doctest::Approx(norm_sq(d1.A.column(0))).epsilon(1e-14));

    const ProblemData d = detect_instance(2, 6, 3);
    const SdpInstance s = build_sdp(d);
    CHECK(test::max_abs_diff(s.Theta, outer(d.alpha)) <= 1e-14);
    CHECK(s.varpi2 == d.varpi2);

    const SystemParams q = SystemParams::uniform(4, 2, 10.0, 100.0, 5.0);
    CHECK_THROWS_AS(build_sdp(build_unaware_known_hB(q, generate_channels(3, 4, 2))), UnsupportedInstance);
}

TEST_CASE("rank_ratio") {
    std::mt19937_64 rng(1);
    CHECK(rank_ratio(outer(test::random_vector(rng, 4))) <= 1e-12);
    CHECK(rank_ratio(ComplexMatrix::identity(2)) == doctest::Approx(1.0));
    CHECK(rank_ratio(ComplexMatrix::identity(1)) == 0.0);
}

TEST_CASE("solve_sdp: single Eve") {
    const SystemParams p = SystemParams::uniform(4, 1, 10.0, 100.0, 5.0);
    const ProblemData d = build_unaware_unknown_hB(p, generate_channels(4, 4, 1));
    const SdpSolution s = solve_sdp(build_sdp(d));
    CHECK(std::norm(s.nu[0]) == doctest::Approx(5.0).epsilon(1e-6));
    CHECK(s.objective == doctest::Approx(objective(d, s.nu)).epsilon(1e-6));
}

TEST_CASE("solve_sdp: K <= N certificates and extraction") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const std::size_t K = 2 + seed % 6;
        const ProblemData d = detect_instance(seed, 10, K);
        const SdpInstance inst = build_sdp(d);
        const SdpSolution s = solve_sdp(inst);
        CHECK(s.kappa > 0.0);
        CHECK(s.eig_ratio <= 1e-6);
        CHECK_FALSE(s.heuristic);
        CHECK(s.max_feasibility_residual <= 1e-8);
        CHECK(s.dual_slack_min_eig >= -1e-8);
        CHECK(std::abs(s.complementarity) <= 1e-6);
        CHECK(s.duality_gap <= 1e-8 * std::max(1.0, s.objective));
        const auto e = herm_eig(s.X);
        CHECK(e.eigenvalues.front() >= -1e-9 * e.eigenvalues.back());
        // Tr(T X) + kappa varrho = 1.
        CHECK(std::abs((inst.T * s.X).trace().real() + s.kappa * inst.varrho - 1.0) <= 1e-8);

        CHECK(constraint_violation(d, s.nu) <= 1e-9);
        CHECK(std::abs(objective(d, s.nu) - s.objective) <= 1e-4 * s.objective);
        CHECK(test::max_abs_diff(extract_rank_one(inst, s), s.nu) <= 1e-12 * std::max(1.0, norm(s.nu)));

        SolverConfig cfg;
        cfg.init_seed = seed;
        CHECK(solve(d, cfg).objective_value <= s.objective * (1.0 + 1e-6));
    }
}

TEST_CASE("solve_sdp: unbounded attack power") {
    const SystemParams p = SystemParams::uniform(6, 3, 10.0, 100.0, 10.0);
    const ProblemData d = build_unaware_unknown_hB(p, generate_channels(5, 6, 3));
    const SdpSolution s = solve_sdp(build_sdp(d));
    CHECK(s.eig_ratio <= 1e-6);
    CHECK(std::abs(objective(d, s.nu) - s.objective) <= 1e-4 * s.objective);
}

TEST_CASE("solve_sdp: K = 2 agrees with the grid oracle") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const ProblemData d = detect_instance(seed, 4, 2, 10.0);
        const SdpSolution s = solve_sdp(build_sdp(d));
        const OracleResult o = oracle_grid(d, 64, 64);
        CHECK(o.objective <= s.objective * (1.0 + 1e-6));
        CHECK(objective(d, s.nu) >= 0.99 * o.objective);
    }
}

TEST_CASE("solve_sdp: K > N is flagged heuristic but stays a valid bound") {
    const ProblemData d = detect_instance(7, 4, 8);
    const SdpSolution s = solve_sdp(build_sdp(d));
    CHECK(s.max_feasibility_residual <= 1e-8);
    CHECK(constraint_violation(d, s.nu) <= 1e-9);
    CHECK(objective(d, s.nu) <= s.objective * (1.0 + 1e-6));
    CHECK(s.heuristic == (s.eig_ratio > 1e-4));
    SolverConfig cfg;
    CHECK(solve(d, cfg).objective_value <= s.objective * (1.0 + 1e-6));
}
