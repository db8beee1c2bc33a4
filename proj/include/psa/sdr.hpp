#pragma once

#include <stdexcept>
#include <vector>

#include "psa/channel_model.hpp"
#include "psa/linalg.hpp"

namespace psa {

class UnsupportedInstance : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Barrier iterations failed to make progress (non-finite values, no
/// feasible step, or the Newton system lost definiteness).
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Relaxation data for the homogeneous (theta = 0, gamma = 0) instance,
/// after the Charnes-Cooper substitution V = X / kappa. The diagonal
/// selectors D_k are implicit.
struct SdpInstance {
    ComplexMatrix Theta;  // alpha alpha^H
    ComplexMatrix T;      // A^H A
    std::vector<double> P;
    double varpi2 = kInfinity;
    double varrho = 1.0;

    std::size_t K() const { return P.size(); }
};

struct SdpSolution {
    ComplexMatrix X;
    double kappa = 0.0;
    double objective = 0.0;     // Tr(Theta X): the relaxation's optimal ratio
    double duality_gap = 0.0;   // barrier bound m / t in objective units
    double eig_ratio = 0.0;     // lambda_2 / lambda_1 of X
    ComplexVector nu;           // rank-one extraction
    bool heuristic = false;     // eig_ratio too large for a certified extraction

    // Dual certificate in the solver's normalized coordinates.
    double dual_slack_min_eig = 0.0;   // smallest eigenvalue of the PSD multiplier
    double complementarity = 0.0;      // Tr(Z X)
    double max_feasibility_residual = 0.0;
    int newton_steps = 0;
};

/// Throws UnsupportedInstance unless theta == 0 and gamma == 0.
SdpInstance build_sdp(const ProblemData& data);

/// Maximizes Tr(Theta X) over X >= 0 with kappa = (1 - Tr(T X)) / varrho
/// eliminated, leaving the caps, the optional varpi cap and kappa >= 0 as
/// linear inequalities. Log-barrier path following with dense Newton steps
/// on the K^2 real coordinates of X. tol bounds the duality gap relative to
/// the objective scale.
SdpSolution solve_sdp(const SdpInstance& inst, double tol = 1e-8);

/// nu = sqrt(lambda_1) u_1 of V = X / kappa, scaled down if needed to satisfy
/// every cap. Throws NumericalFailure when lambda_1 <= 0.
ComplexVector extract_rank_one(const SdpInstance& inst, const SdpSolution& sol);

/// lambda_2 / lambda_1 of a Hermitian PSD matrix; 0 when K = 1.
double rank_ratio(const ComplexMatrix& X);

}  // namespace psa
