#include "psa/channel_model.hpp"

#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

#include "psa/detection.hpp"

namespace psa {

double dbm_to_linear(double dbm) { return std::pow(10.0, dbm / 10.0); }

double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

double SystemParams::sigma_BT2() const {
    return 1.0 + sigma_T2 / (static_cast<double>(tau) * P_T);
}

void SystemParams::validate() const {
    if (N < 1 || K < 1) throw std::invalid_argument("SystemParams: N and K must be >= 1");
    if (tau < 1) throw std::invalid_argument("SystemParams: tau must be >= 1");
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!positive(P_T) || !positive(P_S) || !positive(sigma_T2)) {
        throw std::invalid_argument("SystemParams: powers and variances must be positive");
    }
    if (sigma_E2.size() != K || P.size() != K) {
        throw std::invalid_argument("SystemParams: sigma_E2 and P must have length K");
    }
    for (std::size_t k = 0; k < K; ++k) {
        if (!positive(sigma_E2[k]) || !positive(P[k])) {
            throw std::invalid_argument("SystemParams: per-Eve noise and caps must be positive");
        }
    }
}

SystemParams SystemParams::uniform(std::size_t N, std::size_t K, double P_T, double P_S, double P,
                                   double sigma_T2, double sigma_E2, std::size_t tau) {
    SystemParams p;
    p.N = N;
    p.K = K;
    p.tau = tau;
    p.P_T = P_T;
    p.P_S = P_S;
    p.sigma_T2 = sigma_T2;
    p.sigma_E2.assign(K, sigma_E2);
    p.P.assign(K, P);
    p.validate();
    return p;
}

ChannelRealization generate_channels(std::uint64_t seed, std::size_t N, std::size_t K) {
    if (N < 1 || K < 1) throw std::invalid_argument("generate_channels: N and K must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    ChannelRealization ch{ComplexVector(N), ComplexMatrix(N, K)};
    for (std::size_t i = 0; i < N; ++i) ch.h_B[i] = cplx(gauss(rng), gauss(rng));
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t i = 0; i < N; ++i) ch.H_E(i, k) = cplx(gauss(rng), gauss(rng));
    return ch;
}

void write_channels(std::ostream& os, const ChannelRealization& ch) {
    const auto old_precision = os.precision(17);
    os << ch.N() << ' ' << ch.K() << '\n';
    for (const auto& v : ch.h_B) os << v.real() << ' ' << v.imag() << '\n';
    for (std::size_t k = 0; k < ch.K(); ++k)
        for (std::size_t i = 0; i < ch.N(); ++i) os << ch.H_E(i, k).real() << ' ' << ch.H_E(i, k).imag() << '\n';
    os.precision(old_precision);
}

ChannelRealization read_channels(std::istream& is) {
    std::size_t N = 0, K = 0;
    if (!(is >> N >> K) || N < 1 || K < 1) {
        throw std::runtime_error("read_channels: malformed header, expected \"N K\"");
    }
    auto next = [&](std::size_t index) {
        double re = 0.0, im = 0.0;
        if (!(is >> re >> im)) {
            throw std::runtime_error("read_channels: truncated input at entry " + std::to_string(index));
        }
        if (!std::isfinite(re) || !std::isfinite(im)) {
            throw std::runtime_error("read_channels: non-finite entry " + std::to_string(index));
        }
        return cplx(re, im);
    };
    ChannelRealization ch{ComplexVector(N), ComplexMatrix(N, K)};
    std::size_t index = 0;
    for (std::size_t i = 0; i < N; ++i) ch.h_B[i] = next(index++);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t i = 0; i < N; ++i) ch.H_E(i, k) = next(index++);
    return ch;
}

bool ProblemData::is_homogeneous() const {
    if (theta != cplx{}) return false;
    for (const auto& g : gamma)
        if (g != cplx{}) return false;
    return true;
}

ComplexVector ProblemData::to_original_order(const ComplexVector& nu) const {
    if (nu.size() != K()) throw DimensionError("to_original_order: length mismatch");
    ComplexVector out(K());
    for (std::size_t j = 0; j < K(); ++j) out[eve_order[j]] = nu[j];
    return out;
}

namespace {

void check_inputs(const SystemParams& params, const ChannelRealization& ch) {
    params.validate();
    if (ch.N() != params.N || ch.K() != params.K || ch.H_E.rows() != params.N) {
        throw DimensionError("instance builder: channel dimensions disagree with parameters");
    }
}

// Column order with the target Eve moved to the end.
std::vector<std::size_t> target_last_order(std::size_t K, std::optional<std::size_t> target) {
    std::vector<std::size_t> order(K);
    std::iota(order.begin(), order.end(), 0);
    if (target) {
        if (*target >= K) throw std::out_of_range("instance builder: target Eve index out of range");
        order.erase(order.begin() + static_cast<std::ptrdiff_t>(*target));
        order.push_back(*target);
    }
    return order;
}

// Common skeleton: A, alpha, caps, scale; theta/gamma/varrho left to the caller.
ProblemData base_instance(const SystemParams& params, const ChannelRealization& ch,
                          std::optional<std::size_t> target) {
    ProblemData d;
    d.eve_order = target_last_order(params.K, target);
    const double inv_sqrt_pt = 1.0 / std::sqrt(params.P_T);
    d.A = ComplexMatrix(params.N, params.K);
    d.power_caps.resize(params.K);
    for (std::size_t j = 0; j < params.K; ++j) {
        const std::size_t eve = d.eve_order[j];
        for (std::size_t i = 0; i < params.N; ++i) d.A(i, j) = ch.H_E(i, eve) * inv_sqrt_pt;
        d.power_caps[j] = params.P[eve];
    }
    const std::size_t tgt = d.eve_order.back();
    d.alpha = adjoint_times(d.A, ch.H_E.column(tgt));
    d.gamma = ComplexVector(params.N);
    d.snr_scale = params.P_S / params.sigma_E2[tgt];
    return d;
}

}  // namespace

ProblemData build_unaware_unknown_hB(const SystemParams& params, const ChannelRealization& ch,
                                     std::optional<std::size_t> target) {
    check_inputs(params, ch);
    ProblemData d = base_instance(params, ch, target);
    const std::size_t tgt = d.eve_order.back();
    const double s2 = params.sigma_BT2();
    d.theta = 0.0;
    d.varrho = params.P_S * s2 / params.sigma_E2[tgt] * norm_sq(ch.H_E.column(tgt)) +
               static_cast<double>(params.N) * s2;
    d.varpi2 = kInfinity;
    return d;
}

ProblemData build_unaware_known_hB(const SystemParams& params, const ChannelRealization& ch,
                                   std::optional<std::size_t> target) {
    check_inputs(params, ch);
    ProblemData d = base_instance(params, ch, target);
    const std::size_t tgt = d.eve_order.back();
    const double est_noise = params.sigma_T2 / (static_cast<double>(params.tau) * params.P_T);
    const ComplexVector h_target = ch.H_E.column(tgt);
    d.theta = dot(h_target, ch.h_B);
    d.gamma = ch.h_B;
    d.varrho = params.P_S * est_noise / params.sigma_E2[tgt] * norm_sq(h_target) +
               static_cast<double>(params.N) * est_noise;
    d.varpi2 = kInfinity;
    return d;
}

ProblemData build_detection_aware(const SystemParams& params, const ChannelRealization& ch,
                                  const DetectionModel& model, double epsilon,
                                  std::optional<std::size_t> target) {
    ProblemData d = build_unaware_unknown_hB(params, ch, target);
    const double varpi = power_cap_bisect(model, epsilon);
    d.varpi2 = varpi * varpi;
    return d;
}

double objective(const ProblemData& data, const ComplexVector& nu) {
    if (nu.size() != data.K()) throw DimensionError("objective: nu length must equal K");
    const cplx num = dot(data.alpha, nu) + data.theta;
    ComplexVector r = data.A * nu;
    r += data.gamma;
    return std::norm(num) / (norm_sq(r) + data.varrho);
}

double evaluate_snr(const ProblemData& data, const ComplexVector& nu) {
    return data.snr_scale * objective(data, nu);
}

double constraint_violation(const ProblemData& data, const ComplexVector& nu) {
    if (nu.size() != data.K()) throw DimensionError("constraint_violation: nu length must equal K");
    double worst = 0.0;
    for (std::size_t k = 0; k < data.K(); ++k) {
        worst = std::max(worst, std::norm(nu[k]) / data.power_caps[k] - 1.0);
    }
    if (data.has_power_cap()) worst = std::max(worst, norm_sq(data.A * nu) / data.varpi2 - 1.0);
    return worst;
}

NcasResult ncas_snr(const SystemParams& params, const ChannelRealization& ch) {
    check_inputs(params, ch);
    ComplexVector nu(params.K);
    for (std::size_t k = 0; k < params.K; ++k) nu[k] = std::sqrt(params.P[k]);
    const double inv_sqrt_pt = 1.0 / std::sqrt(params.P_T);
    ComplexMatrix A = ch.H_E;
    A *= inv_sqrt_pt;
    const double leak = norm_sq(A * nu);
    const double s2 = params.sigma_BT2();

    NcasResult res;
    res.per_eve_snr.resize(params.K);
    for (std::size_t k = 0; k < params.K; ++k) {
        const ComplexVector hk = ch.H_E.column(k);
        const double hk_sq = norm_sq(hk);
        const ComplexVector alpha = adjoint_times(A, hk);
        const double varrho = params.P_S * s2 / params.sigma_E2[k] * hk_sq + static_cast<double>(params.N) * s2;
        const double snr = params.P_S / params.sigma_E2[k] * std::norm(dot(alpha, nu)) / (leak + varrho);
        res.per_eve_snr[k] = snr;
        if (k == 0 || snr > res.snr) {
            res.snr = snr;
            res.best_eve = k;
        }
    }
    return res;
}

}  // namespace psa
