#pragma once

#include <stdexcept>

namespace psa {

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Regularized lower incomplete gamma P(s, x) = gamma_s(x) / Gamma(s).
double reg_lower_gamma(double s, double x);

/// Regularized upper incomplete gamma Q(s, x) = Gamma_s(x) / Gamma(s).
/// Series for x < s + 1, Lentz continued fraction otherwise.
double reg_upper_gamma(double s, double x);

/// Solves reg_upper_gamma(s, x) = p for x >= 0 by bracketed Newton.
double inv_reg_upper_gamma(double s, double p);

/// (2/sqrt(pi)) * integral_0^x exp(-t^2) dt
double erf(double x);
double erfinv(double p);

/// CDF of a central chi-square variable with k degrees of freedom.
double central_chi2_cdf(int k, double x);

/// Survival function of a noncentral chi-square variable,
/// 1 - exp(-lambda/2) * sum_j (lambda/2)^j / j! * Q_{k+2j}(x).
/// The Poisson mixture is summed outward from its mode until the analytic
/// tail bound of the remaining weight drops below 1e-12.
double noncentral_chi2_sf(int k, double lambda, double x);

}  // namespace psa
