#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>

#include "psa/linalg.hpp"

namespace psa {

enum class DetectorCase { General, Worst };

/// Raised when a detection budget cannot be met by any nonzero attack.
class InfeasibleBudget : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// The BS-side detector. For the General case the energy threshold E_G is
/// fixed by (eta, N, sigma_BT2); for the Worst case the LLR threshold
/// depends on ||h_E|| and is computed per query.
struct DetectionModel {
    DetectorCase kind = DetectorCase::General;
    double eta = 0.05;
    std::size_t N = 1;
    double sigma_BT2 = 1.0;
    double threshold = 0.0;  // E_G; unused for Worst

    static DetectionModel general(double eta, std::size_t N, double sigma_BT2);
    static DetectionModel worst(double eta, std::size_t N, double sigma_BT2);
    static DetectionModel make(DetectorCase kind, double eta, std::size_t N, double sigma_BT2);
};

/// E_G = sigma_BT2 * Q^{-1}(N, eta_G); ||y_T||^2 > E_G raises the alarm.
double threshold_general(double eta_G, std::size_t N, double sigma_BT2);

/// Lambda_W = (h/s)(2 erfinv(1 - 2 eta_W) - h/s) with h = ||h_E||, s = sigma_BT.
double threshold_worst(double eta_W, double hE_norm, double sigma_BT);

double detect_prob_general(double hE_norm, const DetectionModel& model);
double detect_prob_worst(double hE_norm, const DetectionModel& model);
/// Dispatches on model.kind.
double detect_prob(double hE_norm, const DetectionModel& model);

/// Largest aggregate-channel norm varpi with detect_prob(varpi) = epsilon.
/// Throws InfeasibleBudget for epsilon <= eta and DomainError for epsilon >= 1.
double power_cap_bisect(const DetectionModel& model, double epsilon);

/// Monte Carlo alarm frequency of the model's detector when the attack
/// contributes h_E to the combined pilot observation.
double simulate_detector(const DetectionModel& model, const ComplexVector& hE, std::size_t trials,
                         std::uint64_t seed);

}  // namespace psa
