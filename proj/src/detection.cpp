#include "psa/detection.hpp"

#include <cmath>
#include <random>

#include "psa/special_functions.hpp"

namespace psa {

namespace {

void check_eta(DetectorCase kind, double eta) {
    if (!(eta > 0.0 && eta < 1.0)) throw DomainError("detection: false-alarm level must lie in (0, 1)");
    if (kind == DetectorCase::Worst && !(eta < 0.5)) {
        throw DomainError("detection: worst-case false-alarm level must be below 1/2");
    }
}

}  // namespace

DetectionModel DetectionModel::general(double eta, std::size_t N, double sigma_BT2) {
    return make(DetectorCase::General, eta, N, sigma_BT2);
}

DetectionModel DetectionModel::worst(double eta, std::size_t N, double sigma_BT2) {
    return make(DetectorCase::Worst, eta, N, sigma_BT2);
}

DetectionModel DetectionModel::make(DetectorCase kind, double eta, std::size_t N, double sigma_BT2) {
    check_eta(kind, eta);
    if (N < 1) throw DomainError("detection: N must be >= 1");
    if (!(sigma_BT2 > 0.0)) throw DomainError("detection: sigma_BT2 must be positive");
    DetectionModel m;
    m.kind = kind;
    m.eta = eta;
    m.N = N;
    m.sigma_BT2 = sigma_BT2;
    if (kind == DetectorCase::General) m.threshold = threshold_general(eta, N, sigma_BT2);
    return m;
}

double threshold_general(double eta_G, std::size_t N, double sigma_BT2) {
    check_eta(DetectorCase::General, eta_G);
    return sigma_BT2 * inv_reg_upper_gamma(static_cast<double>(N), eta_G);
}

double threshold_worst(double eta_W, double hE_norm, double sigma_BT) {
    check_eta(DetectorCase::Worst, eta_W);
    if (!(hE_norm > 0.0)) throw DomainError("threshold_worst: degenerate model, ||h_E|| must be positive");
    const double r = hE_norm / sigma_BT;
    return r * (2.0 * erfinv(1.0 - 2.0 * eta_W) - r);
}

double detect_prob_general(double hE_norm, const DetectionModel& model) {
    if (model.kind != DetectorCase::General) throw DomainError("detect_prob_general: wrong detector case");
    if (!(hE_norm >= 0.0)) throw DomainError("detect_prob_general: negative norm");
    const int dof = static_cast<int>(2 * model.N);
    const double lambda = 2.0 * hE_norm * hE_norm / model.sigma_BT2;
    const double x = 2.0 * model.threshold / model.sigma_BT2;
    return noncentral_chi2_sf(dof, lambda, x);
}

double detect_prob_worst(double hE_norm, const DetectionModel& model) {
    if (model.kind != DetectorCase::Worst) throw DomainError("detect_prob_worst: wrong detector case");
    if (!(hE_norm >= 0.0)) throw DomainError("detect_prob_worst: negative norm");
    check_eta(DetectorCase::Worst, model.eta);
    const double r = hE_norm / std::sqrt(model.sigma_BT2);
    return 0.5 * (1.0 - std::erf(-r + erfinv(1.0 - 2.0 * model.eta)));
}

double detect_prob(double hE_norm, const DetectionModel& model) {
    return model.kind == DetectorCase::General ? detect_prob_general(hE_norm, model)
                                               : detect_prob_worst(hE_norm, model);
}

double power_cap_bisect(const DetectionModel& model, double epsilon) {
    if (!(epsilon < 1.0)) throw DomainError("power_cap_bisect: epsilon must be below 1");
    if (!(epsilon > model.eta)) {
        throw InfeasibleBudget("power_cap_bisect: budget epsilon does not exceed the false-alarm level");
    }
    double lo = 0.0;
    double hi = std::sqrt(model.sigma_BT2);
    for (int d = 0; d < 60 && detect_prob(hi, model) < epsilon; ++d) {
        lo = hi;
        hi *= 2.0;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double p = detect_prob(mid, model);
        if (p < epsilon) lo = mid; else hi = mid;
        if (std::abs(p - epsilon) < 1e-11 || hi - lo <= 1e-15 * hi) break;
    }
    return 0.5 * (lo + hi);
}

double simulate_detector(const DetectionModel& model, const ComplexVector& hE, std::size_t trials,
                         std::uint64_t seed) {
    if (hE.size() != model.N) throw DimensionError("simulate_detector: h_E length must equal N");
    if (trials == 0) return 0.0;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5 * model.sigma_BT2));

    const double hE_sq = norm_sq(hE);
    double llr_threshold = 0.0;
    if (model.kind == DetectorCase::Worst) {
        llr_threshold = threshold_worst(model.eta, std::sqrt(hE_sq), std::sqrt(model.sigma_BT2));
    }

    std::size_t alarms = 0;
    ComplexVector y(model.N);
    for (std::size_t t = 0; t < trials; ++t) {
        for (std::size_t i = 0; i < model.N; ++i) y[i] = hE[i] + cplx(gauss(rng), gauss(rng));
        bool alarm;
        if (model.kind == DetectorCase::General) {
            alarm = norm_sq(y) > model.threshold;
        } else {
            const double stat = (2.0 * dot(y, hE).real() - hE_sq) / model.sigma_BT2;
            alarm = stat > llr_threshold;
        }
        alarms += alarm ? 1 : 0;
    }
    return static_cast<double>(alarms) / static_cast<double>(trials);
}

}  // namespace psa
