#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include "psa/linalg.hpp"

namespace psa {

struct DetectionModel;

/// Linear power from a dBm figure, with 0 dBm normalized to 1.0.
double dbm_to_linear(double dbm);
double linear_to_db(double linear);

/// Link and attack parameters, all in linear units.
struct SystemParams {
    std::size_t N = 8;         // BS antennas
    std::size_t K = 3;         // eavesdroppers
    std::size_t tau = 16;      // pilot length
    double P_T = 10.0;         // LU training power
    double P_S = 100.0;        // BS data power
    double sigma_T2 = 1.0;     // training noise variance
    std::vector<double> sigma_E2;  // per-Eve receive noise, length K
    std::vector<double> P;         // per-Eve attack power caps, length K

    /// Aggregate H0 observation variance 1 + sigma_T^2 / (tau P_T).
    double sigma_BT2() const;
    /// Throws std::invalid_argument if any invariant is violated.
    void validate() const;

    /// Equal per-Eve caps and noise; the common experiment setup.
    static SystemParams uniform(std::size_t N, std::size_t K, double P_T, double P_S, double P,
                                double sigma_T2 = 1.0, double sigma_E2 = 1.0, std::size_t tau = 16);
};

struct ChannelRealization {
    ComplexVector h_B;   // length N
    ComplexMatrix H_E;   // N x K, column k is h_{E,k}

    std::size_t N() const { return h_B.size(); }
    std::size_t K() const { return H_E.cols(); }
};

/// I.i.d. CN(0,1) entries, deterministic in the seed.
ChannelRealization generate_channels(std::uint64_t seed, std::size_t N, std::size_t K);

/// Plain-text format: a header line "N K", then one "re im" pair per line,
/// h_B first, then H_E column by column.
void write_channels(std::ostream& os, const ChannelRealization& ch);
ChannelRealization read_channels(std::istream& is);

constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// One instance of max |alpha^H nu + theta|^2 / (||A nu + gamma||^2 + varrho)
/// subject to |nu_k|^2 <= power_caps[k] and ||A nu||^2 <= varpi2.
struct ProblemData {
    ComplexMatrix A;         // N x K
    ComplexVector alpha;     // K
    cplx theta{};
    ComplexVector gamma;     // N
    double varrho = 1.0;
    std::vector<double> power_caps;  // K
    double varpi2 = kInfinity;
    double snr_scale = 1.0;  // P_S / sigma_{E,target}^2
    /// Column j of A holds Eve eve_order[j]; the target is the last column.
    std::vector<std::size_t> eve_order;

    std::size_t K() const { return alpha.size(); }
    std::size_t N() const { return A.rows(); }
    bool has_power_cap() const { return varpi2 < kInfinity; }
    bool is_homogeneous() const;  // theta == 0 and gamma == 0

    /// Maps a solution in problem column order back to original Eve indices.
    ComplexVector to_original_order(const ComplexVector& nu) const;
};

/// Unaware BS, Eves do not know h_B.
ProblemData build_unaware_unknown_hB(const SystemParams& params, const ChannelRealization& ch,
                                     std::optional<std::size_t> target = std::nullopt);
/// Unaware BS, Eves know h_B (upper-bound scenario).
ProblemData build_unaware_known_hB(const SystemParams& params, const ChannelRealization& ch,
                                   std::optional<std::size_t> target = std::nullopt);
/// Detecting BS: unknown-h_B instance plus the detection-derived cap on ||A nu||.
/// Throws InfeasibleBudget when epsilon <= model.eta.
ProblemData build_detection_aware(const SystemParams& params, const ChannelRealization& ch,
                                  const DetectionModel& model, double epsilon,
                                  std::optional<std::size_t> target = std::nullopt);

/// |alpha^H nu + theta|^2 / (||A nu + gamma||^2 + varrho)
double objective(const ProblemData& data, const ComplexVector& nu);
/// Wiretapping SNR of the target Eve: snr_scale * objective.
double evaluate_snr(const ProblemData& data, const ComplexVector& nu);

/// Largest relative violation of the K power caps and the ||A nu|| cap;
/// 0 when nu is feasible.
double constraint_violation(const ProblemData& data, const ComplexVector& nu);

struct NcasResult {
    double snr = 0.0;
    std::size_t best_eve = 0;
    std::vector<double> per_eve_snr;
};

/// Non-cooperative baseline: every Eve attacks at full power with zero phase;
/// reports the best wiretapping SNR over all Eves, each with its own noise level.
NcasResult ncas_snr(const SystemParams& params, const ChannelRealization& ch);

}  // namespace psa
