#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "psa/detection.hpp"
#include "psa/special_functions.hpp"

using namespace psa;

namespace {

ComplexVector vector_with_norm(std::size_t N, double r, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    ComplexVector h = test::random_vector(rng, N);
    return cplx(r / norm(h)) * h;
}

}  // namespace

TEST_CASE("threshold_general") {
    CHECK(threshold_general(0.05, 1, 1.0) == doctest::Approx(-std::log(0.05)).epsilon(1e-12));
    CHECK(threshold_general(0.05, 7, 2.5) == doctest::Approx(2.5 * threshold_general(0.05, 7, 1.0)).epsilon(1e-14));
    const auto m = DetectionModel::general(0.05, 10, 1.3);
    CHECK(std::abs(reg_upper_gamma(10.0, m.threshold / 1.3) - 0.05) <= 1e-10);
    CHECK_THROWS(threshold_general(0.0, 4, 1.0));
    CHECK_THROWS(threshold_general(1.0, 4, 1.0));

    const double rate = simulate_detector(m, ComplexVector(10), 100000, 101);
    CHECK(test::binomial_z(rate, 0.05, 100000) <= 3.0);
}

TEST_CASE("detect_prob_general") {
    const auto m = DetectionModel::general(0.05, 10, 1.1);
    CHECK(detect_prob_general(0.0, m) == doctest::Approx(0.05).epsilon(1e-10));
    CHECK(detect_prob_general(1e3 * std::sqrt(1.1), m) == doctest::Approx(1.0).epsilon(1e-12));
    double prev = 0.0;
    for (int i = 0; i <= 400; ++i) {
        const double p = detect_prob_general(0.02 * i, m);
        CHECK(p > prev);
        prev = p;
    }
    CHECK_THROWS(detect_prob_general(-1.0, m));

    const double p3 = detect_prob_general(3.0, m);
    const double rate = simulate_detector(m, vector_with_norm(10, 3.0, 4), 100000, 102);
    CHECK(test::binomial_z(rate, p3, 100000) <= 3.0);
}

TEST_CASE("threshold_worst") {
    const double q = erfinv(0.5);
    CHECK(q == doctest::Approx(0.4769362762).epsilon(1e-9));
    CHECK(threshold_worst(0.25, 1.0, 1.0) == doctest::Approx(2.0 * q - 1.0).epsilon(1e-12));
    CHECK(threshold_worst(0.25, 2.0, 2.0) == doctest::Approx(2.0 * q - 1.0).epsilon(1e-12));
    CHECK(std::abs(threshold_worst(0.1, 2.0 * erfinv(0.8), 1.0)) <= 1e-12);
    CHECK_THROWS(threshold_worst(0.5, 1.0, 1.0));
    CHECK_THROWS(threshold_worst(0.1, 0.0, 1.0));

    // False alarm of the LLR test with this threshold, for several N.
    for (std::size_t N : {1u, 4u, 12u}) {
        const auto m = DetectionModel::worst(0.1, N, 1.2);
        const double rate = simulate_detector(m, vector_with_norm(N, 1e-6, N), 100000, 200 + N);
        CHECK(test::binomial_z(rate, 0.1, 100000) <= 3.0);
    }
}

TEST_CASE("detect_prob_worst") {
    const double eta = 0.05;
    const auto m = DetectionModel::worst(eta, 6, 1.0);
    CHECK(detect_prob_worst(0.0, m) == doctest::Approx(eta).epsilon(1e-12));
    const double knee = 2.0 * erfinv(1.0 - 2.0 * eta);
    CHECK(detect_prob_worst(knee, m) == doctest::Approx(1.0 - eta).epsilon(1e-12));
    // Strict growth while the probability is representably below 1.
    double prev = 0.0;
    for (int i = 0; i <= 400; ++i) {
        const double p = detect_prob_worst(0.01 * i, m);
        CHECK(p > prev);
        prev = p;
    }
    const auto m2 = DetectionModel::worst(0.05, 8, 1.44);
    const double h = 1.5 * 1.2;
    const double rate = simulate_detector(m2, vector_with_norm(8, h, 5), 100000, 103);
    CHECK(test::binomial_z(rate, detect_prob_worst(h, m2), 100000) <= 3.0);
    CHECK_THROWS(DetectionModel::worst(0.5, 4, 1.0));
}

TEST_CASE("power_cap_bisect") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const auto kind = i % 2 ? DetectorCase::Worst : DetectorCase::General;
        const double eta = 0.01 + 0.3 * u(rng);
        const auto m = DetectionModel::make(kind, eta, 1 + i % 16, 1.0 + 2.0 * u(rng));
        const double eps = eta + (0.999 - eta) * (0.001 + 0.998 * u(rng));
        const double w = power_cap_bisect(m, eps);
        CHECK(std::abs(detect_prob(w, m) - eps) <= 1e-8);
    }

    const auto g = DetectionModel::general(0.05, 8, 1.1);
    CHECK(power_cap_bisect(g, 0.05 + 1e-10) < 1e-3);
    CHECK_THROWS_AS(power_cap_bisect(g, 0.05), InfeasibleBudget);
    CHECK_THROWS_AS(power_cap_bisect(g, 0.01), InfeasibleBudget);
    CHECK_THROWS_AS(power_cap_bisect(g, 1.0), DomainError);

    const double w = power_cap_bisect(g, 0.2);
    const double rate = simulate_detector(g, vector_with_norm(8, w, 9), 100000, 104);
    CHECK(test::binomial_z(rate, 0.2, 100000) <= 3.0);
}

TEST_CASE("simulate_detector is deterministic in its seed") {
    const auto m = DetectionModel::general(0.1, 4, 1.0);
    const ComplexVector h = vector_with_norm(4, 1.0, 1);
    CHECK(simulate_detector(m, h, 5000, 7) == simulate_detector(m, h, 5000, 7));
}
