#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "psa/channel_model.hpp"
#include "psa/linalg.hpp"

namespace psa {

/// Absolute uses rho as given. Scaled multiplies rho_scaled by
/// b / (rms|beta_k| * rms sqrt(P_k)) of each surrogate, which keeps the ADMM
/// step comparable across instances whose |beta| differ by orders of magnitude.
enum class PenaltyScaling { Scaled, Absolute };

struct SolverConfig {
    PenaltyScaling penalty = PenaltyScaling::Scaled;
    double rho = 0.01;         // ADMM penalty in Absolute mode
    double rho_scaled = 5.0;   // dimensionless penalty in Scaled mode
    double delta_M = 1e-3;     // outer relative-change tolerance
    double delta_A = 1e-4;     // inner relative-change tolerance
    int T_M_MAX = 500;
    int T_A_MAX = 5;
    double newton_tol = 1e-12; // relative tolerance on ||A nu||^2 = varpi^2
    std::uint64_t init_seed = 1;

    void validate() const;
};

/// Coefficients of the touching quadratic minorizer at nu_hat:
///   S_hat(nu) = -a ||A nu + gamma||^2 + 2 b Re{beta^H nu} - c.
/// B = diag(conj(beta)) is implicit and Y = B^H B is stored by its diagonal.
struct SurrogateCoeffs {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    ComplexVector beta;
    std::vector<double> Y;
    ComplexVector lin_shift;  // a * A^H gamma

    bool degenerate() const;  // a == 0 and beta == 0
};

SurrogateCoeffs surrogate_coeffs(const ProblemData& data, const ComplexVector& nu_hat);
double surrogate_value(const SurrogateCoeffs& coeffs, const ProblemData& data, const ComplexVector& nu);

struct NuUpdate {
    ComplexVector nu;
    double zeta = 0.0;       // multiplier of ||A nu||^2 <= varpi^2
    bool regularized = false;
};

/// The nu-step of the inner ADMM for one surrogate. Factorizes
/// Z = Y^{-1/2} T Y^{-1/2} once so every inner iteration, including the
/// multiplier search on the ||A nu|| cap, reduces to diagonal solves.
class NuSubproblem {
public:
    NuSubproblem(const SurrogateCoeffs& coeffs, const ProblemData& data, const ComplexMatrix& T,
                 double rho, double newton_tol = 1e-12);

    /// Minimizer of a||A nu + gamma||^2 + (rho/2)||B nu - Xi||^2 + Re<y, B nu - Xi>
    /// over ||A nu||^2 <= varpi^2, given mu_tilde = (rho/2)B^H Xi - (1/2)B^H y - a A^H gamma.
    NuUpdate solve(const ComplexVector& mu_tilde) const;

    /// ||A nu(zeta)||^2 for the current right-hand side.
    double cap_function(const ComplexVector& mu_prime, double zeta) const;

private:
    ComplexVector nu_of(const ComplexVector& mu_prime, double zeta) const;

    double a_;
    double half_rho_;
    double varpi2_;
    double newton_tol_;
    bool regularized_ = false;
    std::vector<double> inv_sqrt_y_;
    std::vector<double> pi_;
    ComplexMatrix q_;
};

/// Penalty used by the inner ADMM for this surrogate.
double admm_penalty(const SolverConfig& config, const SurrogateCoeffs& coeffs, const ProblemData& data);

/// mu_tilde for the current ADMM state.
ComplexVector admm_rhs(const SurrogateCoeffs& coeffs, const ComplexVector& Xi, const ComplexVector& y,
                       double rho);

NuUpdate admm_nu_update(const SurrogateCoeffs& coeffs, const ProblemData& data, const ComplexVector& Xi_prev,
                        const ComplexVector& y_prev, const SolverConfig& config);

/// Per-coordinate projection onto |Xi_k| <= |beta_k| sqrt(P_k).
ComplexVector admm_xi_update(const SurrogateCoeffs& coeffs, const ComplexVector& nu, const ComplexVector& y_prev,
                             const std::vector<double>& power_caps, double rho);

/// y + rho (B nu - Xi) with B = diag(conj(beta)).
ComplexVector admm_dual_update(const ComplexVector& y_prev, const ComplexVector& beta, const ComplexVector& nu,
                               const ComplexVector& Xi, double rho);

/// Radial clip onto the power caps followed by a uniform scale onto ||A nu|| <= varpi.
ComplexVector project_feasible(const ProblemData& data, const ComplexVector& nu);

/// CN(0, I) draw scaled so every constraint holds, one of them with equality.
ComplexVector random_feasible_start(const ProblemData& data, std::uint64_t seed);

enum class SolveStatus { Converged, IterationCapReached };

struct SolveResult {
    ComplexVector nu;
    double objective_value = 0.0;
    double snr = 0.0;
    int mm_iterations = 0;
    int total_admm_iterations = 0;
    std::vector<double> trace;  // objective at the start, then after each MM iteration
    SolveStatus status = SolveStatus::IterationCapReached;
    bool regularized = false;
    bool rerandomized = false;
};

SolveResult solve(const ProblemData& data, const SolverConfig& config,
                  std::optional<ComplexVector> initial = std::nullopt);

}  // namespace psa
