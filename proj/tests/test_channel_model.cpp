#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "psa/channel_model.hpp"
#include "psa/detection.hpp"

using namespace psa;

namespace {

// Aggregate attack channel sum_k nu_k / sqrt(P_T) h_{E,k}.
ComplexVector aggregate(const SystemParams& p, const ChannelRealization& ch, const ComplexVector& nu) {
    ComplexVector h(ch.N());
    for (std::size_t k = 0; k < ch.K(); ++k)
        for (std::size_t n = 0; n < ch.N(); ++n) h[n] += nu[k] / std::sqrt(p.P_T) * ch.H_E(n, k);
    return h;
}

double snr_unknown_direct(const SystemParams& p, const ChannelRealization& ch, const ComplexVector& nu,
                          std::size_t target) {
    const ComplexVector hk = ch.H_E.column(target);
    const ComplexVector hE = aggregate(p, ch, nu);
    const double s2 = p.sigma_BT2();
    const double se = p.sigma_E2[target];
    return p.P_S * std::norm(dot(hk, hE)) /
           (p.P_S * s2 * norm_sq(hk) + static_cast<double>(p.N) * s2 * se + norm_sq(hE) * se);
}

double snr_known_direct(const SystemParams& p, const ChannelRealization& ch, const ComplexVector& nu) {
    const std::size_t K = ch.K() - 1;
    const ComplexVector hk = ch.H_E.column(K);
    const ComplexVector hE = aggregate(p, ch, nu);
    const double r = p.sigma_T2 / (static_cast<double>(p.tau) * p.P_T);
    const double se = p.sigma_E2[K];
    return p.P_S * std::norm(dot(hk, hE) + dot(hk, ch.h_B)) /
           (p.P_S * r * norm_sq(hk) + static_cast<double>(p.N) * r * se + norm_sq(hE + ch.h_B) * se);
}

SystemParams mixed_params(std::size_t N, std::size_t K) {
    SystemParams p = SystemParams::uniform(N, K, 3.0, 40.0, 5.0, 0.7, 1.0, 8);
    for (std::size_t k = 0; k < K; ++k) {
        p.P[k] = 1.0 + 2.0 * static_cast<double>(k);
        p.sigma_E2[k] = 0.5 + 0.25 * static_cast<double>(k);
    }
    return p;
}

}  // namespace

TEST_CASE("unit conversion and sigma_BT2") {
    CHECK(dbm_to_linear(0.0) == 1.0);
    CHECK(dbm_to_linear(20.0) == doctest::Approx(100.0));
    CHECK(linear_to_db(1000.0) == doctest::Approx(30.0));
    SystemParams p = SystemParams::uniform(4, 2, 2.0, 1.0, 1.0, 3.0, 1.0, 6);
    CHECK(p.sigma_BT2() == doctest::Approx(1.0 + 3.0 / 12.0));
}

TEST_CASE("SystemParams validation") {
    SystemParams p = SystemParams::uniform(4, 2, 1.0, 1.0, 1.0);
    CHECK_NOTHROW(p.validate());
    p.P.pop_back();
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = SystemParams::uniform(4, 2, 1.0, 1.0, 1.0);
    p.P_T = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("generate_channels: determinism and moments") {
    const auto a = generate_channels(77, 5, 3);
    const auto b = generate_channels(77, 5, 3);
    CHECK(a.h_B == b.h_B);
    CHECK(a.H_E == b.H_E);
    CHECK_FALSE(generate_channels(78, 5, 3).h_B == a.h_B);

    const auto big = generate_channels(5, 1000, 99);  // 10^5 entries
    cplx mean{};
    double var = 0.0;
    std::size_t count = 0;
    for (std::size_t n = 0; n < 1000; ++n)
        for (std::size_t k = 0; k < 99; ++k) {
            mean += big.H_E(n, k);
            var += std::norm(big.H_E(n, k));
            ++count;
        }
    for (const auto& v : big.h_B) {
        mean += v;
        var += std::norm(v);
        ++count;
    }
    CHECK(std::abs(mean / static_cast<double>(count)) <= 0.02);
    CHECK(std::abs(var / static_cast<double>(count) - 1.0) <= 0.02);
}

TEST_CASE("channel file round trip") {
    const auto ch = generate_channels(3, 4, 2);
    std::stringstream ss;
    write_channels(ss, ch);
    const auto back = read_channels(ss);
    CHECK(test::max_abs_diff(back.h_B, ch.h_B) == 0.0);
    CHECK(test::max_abs_diff(back.H_E, ch.H_E) == 0.0);
    std::stringstream bad("2 1\n1 0\n");
    CHECK_THROWS(read_channels(bad));
}

TEST_CASE("build_unaware_unknown_hB") {
    SUBCASE("hand-computed varrho") {
        const SystemParams p = SystemParams::uniform(2, 1, 1.0, 1.0, 1.0, 1.0, 1.0, 1);
        const auto ch = generate_channels(1, 2, 1);
        const auto d = build_unaware_unknown_hB(p, ch);
        CHECK(p.sigma_BT2() == 2.0);
        CHECK(d.varrho == doctest::Approx(2.0 * norm_sq(ch.H_E.column(0)) + 4.0).epsilon(1e-14));
        CHECK(d.theta == cplx{});
        CHECK(norm_sq(d.gamma) == 0.0);
        CHECK_FALSE(d.has_power_cap());
    }
    SUBCASE("formula re-evaluation and SNR") {
        std::mt19937_64 rng(4);
        const SystemParams p = mixed_params(6, 3);
        const auto ch = generate_channels(19, 6, 3);
        const auto d = build_unaware_unknown_hB(p, ch);
        const ComplexVector hk = ch.H_E.column(2);
        const double varrho =
            p.P_S * p.sigma_BT2() / p.sigma_E2[2] * norm_sq(hk) + 6.0 * p.sigma_BT2();
        CHECK(std::abs(d.varrho - varrho) <= 1e-12 * varrho);
        CHECK(d.is_homogeneous());
        for (int rep = 0; rep < 10; ++rep) {
            const ComplexVector nu = test::random_vector(rng, 3);
            const double direct = snr_unknown_direct(p, ch, nu, 2);
            CHECK(std::abs(evaluate_snr(d, nu) - direct) <= 1e-12 * direct);
        }
        CHECK(evaluate_snr(d, ComplexVector(3)) == 0.0);
    }
    SUBCASE("target permutation") {
        const SystemParams p = mixed_params(5, 3);
        const auto ch = generate_channels(8, 5, 3);
        const auto d = build_unaware_unknown_hB(p, ch, 0);
        CHECK(d.eve_order.back() == 0);
        std::mt19937_64 rng(1);
        const ComplexVector nu = test::random_vector(rng, 3);
        const double direct = snr_unknown_direct(p, ch, d.to_original_order(nu), 0);
        CHECK(std::abs(evaluate_snr(d, nu) - direct) <= 1e-12 * direct);
        CHECK(d.power_caps[2] == p.P[0]);
    }
    SUBCASE("purity") {
        const SystemParams p = mixed_params(5, 3);
        const auto ch = generate_channels(8, 5, 3);
        const auto a = build_unaware_unknown_hB(p, ch);
        const auto b = build_unaware_unknown_hB(p, ch);
        CHECK(a.A == b.A);
        CHECK(a.alpha == b.alpha);
        CHECK(a.varrho == b.varrho);
    }
}

TEST_CASE("build_unaware_known_hB") {
    const SystemParams p = mixed_params(6, 3);
    auto ch = generate_channels(12, 6, 3);
    const auto d = build_unaware_known_hB(p, ch);
    std::mt19937_64 rng(2);
    for (int rep = 0; rep < 10; ++rep) {
        const ComplexVector nu = test::random_vector(rng, 3);
        const double direct = snr_known_direct(p, ch, nu);
        CHECK(std::abs(evaluate_snr(d, nu) - direct) <= 1e-12 * direct);
    }

    ch.h_B = ComplexVector(6);
    const auto z = build_unaware_known_hB(p, ch);
    const auto u = build_unaware_unknown_hB(p, ch);
    CHECK(z.theta == cplx{});
    CHECK(norm_sq(z.gamma) == 0.0);
    CHECK(z.A == u.A);
    CHECK(z.alpha == u.alpha);
    CHECK(z.varrho < u.varrho);

    SystemParams strong = p;
    strong.P_T = 1e12;
    CHECK(build_unaware_known_hB(strong, ch).varrho < 1e-9);
}

TEST_CASE("build_detection_aware") {
    const SystemParams p = SystemParams::uniform(10, 3, 10.0, 100.0, 10.0);
    const auto ch = generate_channels(6, 10, 3);
    const auto m = DetectionModel::general(0.05, 10, p.sigma_BT2());
    const auto d = build_detection_aware(p, ch, m, 0.2);
    CHECK(std::abs(detect_prob(std::sqrt(d.varpi2), m) - 0.2) <= 1e-8);
    CHECK(d.varrho == build_unaware_unknown_hB(p, ch).varrho);
    CHECK_THROWS_AS(build_detection_aware(p, ch, m, 0.05), InfeasibleBudget);
    CHECK(build_detection_aware(p, ch, m, 0.05 + 1e-9).varpi2 < 1e-3);
    CHECK(build_detection_aware(p, ch, m, 1.0 - 1e-9).varpi2 > build_detection_aware(p, ch, m, 0.9).varpi2);
}

TEST_CASE("objective properties") {
    const SystemParams p = mixed_params(5, 3);
    const auto ch = generate_channels(31, 5, 3);
    const auto known = build_unaware_known_hB(p, ch);
    CHECK(objective(known, ComplexVector(3)) ==
          doctest::Approx(std::norm(known.theta) / (norm_sq(known.gamma) + known.varrho)).epsilon(1e-14));

    const auto d = build_unaware_unknown_hB(p, ch);
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 20; ++rep) {
        const ComplexVector nu = test::random_vector(rng, 3);
        const double s = objective(d, nu);
        CHECK(s >= 0.0);
        const cplx rot = std::polar(1.0, 0.37 * rep);
        CHECK(std::abs(objective(d, rot * nu) - s) <= 1e-12 * std::max(1.0, s));
    }
    CHECK_THROWS_AS(objective(d, ComplexVector(2)), DimensionError);

    const SystemParams p1 = SystemParams::uniform(4, 1, 10.0, 100.0, 10.0);
    const auto d1 = build_unaware_unknown_hB(p1, generate_channels(2, 4, 1));
    double prev = 0.0;
    for (int i = 1; i <= 100; ++i) {
        const double s = objective(d1, ComplexVector{cplx(0.05 * i, 0.0)});
        CHECK(s > prev);
        prev = s;
    }
}

TEST_CASE("constraint_violation") {
    const SystemParams p = SystemParams::uniform(4, 2, 10.0, 100.0, 4.0);
    const auto ch = generate_channels(3, 4, 2);
    auto d = build_unaware_unknown_hB(p, ch);
    CHECK(constraint_violation(d, ComplexVector{cplx(2.0), cplx(0.0, 2.0)}) == 0.0);
    CHECK(constraint_violation(d, ComplexVector{cplx(4.0), cplx(0.0)}) > 0.0);
    d.varpi2 = 1e-6;
    CHECK(constraint_violation(d, ComplexVector{cplx(1.0), cplx(0.0)}) > 0.0);
}

TEST_CASE("ncas_snr") {
    SUBCASE("single Eve") {
        const SystemParams p = SystemParams::uniform(4, 1, 10.0, 100.0, 7.0);
        const auto ch = generate_channels(14, 4, 1);
        const auto r = ncas_snr(p, ch);
        const auto d = build_unaware_unknown_hB(p, ch);
        CHECK(r.snr == doctest::Approx(evaluate_snr(d, ComplexVector{cplx(std::sqrt(7.0))})).epsilon(1e-13));
    }
    SUBCASE("per-Eve re-evaluation") {
        const SystemParams p = mixed_params(6, 4);
        const auto ch = generate_channels(15, 6, 4);
        const auto r = ncas_snr(p, ch);
        ComplexVector nu(4);
        for (std::size_t k = 0; k < 4; ++k) nu[k] = std::sqrt(p.P[k]);
        double best = 0.0;
        for (std::size_t k = 0; k < 4; ++k) {
            const double direct = snr_unknown_direct(p, ch, nu, k);
            CHECK(std::abs(r.per_eve_snr[k] - direct) <= 1e-12 * direct);
            best = std::max(best, direct);
        }
        CHECK(r.snr == doctest::Approx(best).epsilon(1e-14));
        CHECK(r.per_eve_snr[r.best_eve] == r.snr);
    }
}
