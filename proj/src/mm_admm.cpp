#include "psa/mm_admm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace psa {

void SolverConfig::validate() const {
    if (!(rho > 0.0) || !(rho_scaled > 0.0)) throw std::invalid_argument("SolverConfig: rho must be positive");
    if (!(delta_M > 0.0) || !(delta_A > 0.0) || !(newton_tol > 0.0)) {
        throw std::invalid_argument("SolverConfig: tolerances must be positive");
    }
    if (T_M_MAX < 1 || T_A_MAX < 1) throw std::invalid_argument("SolverConfig: iteration caps must be >= 1");
}

double admm_penalty(const SolverConfig& config, const SurrogateCoeffs& coeffs, const ProblemData& data) {
    if (config.penalty == PenaltyScaling::Absolute) return config.rho;
    // rho_scaled * b / (rms|beta_k| * rms sqrt(P_k)) puts the penalty on the
    // scale of the surrogate's linear term.
    double y_sum = 0.0, p_sum = 0.0;
    for (std::size_t k = 0; k < data.K(); ++k) {
        y_sum += coeffs.Y[k];
        p_sum += data.power_caps[k];
    }
    const double scale = std::sqrt(y_sum * p_sum) / static_cast<double>(data.K());
    if (!(scale > 0.0) || !(coeffs.b > 0.0)) return config.rho_scaled;
    return config.rho_scaled * coeffs.b / scale;
}

bool SurrogateCoeffs::degenerate() const {
    if (a != 0.0) return false;
    return std::all_of(beta.begin(), beta.end(), [](const cplx& v) { return v == cplx{}; });
}

SurrogateCoeffs surrogate_coeffs(const ProblemData& data, const ComplexVector& nu_hat) {
    if (nu_hat.size() != data.K()) throw DimensionError("surrogate_coeffs: nu length must equal K");
    const cplx x_hat = dot(data.alpha, nu_hat) + data.theta;
    ComplexVector r = data.A * nu_hat;
    r += data.gamma;
    const double y_hat = norm_sq(r) + data.varrho;

    SurrogateCoeffs s;
    s.a = std::norm(x_hat) / (y_hat * y_hat);
    s.b = 1.0 / y_hat;
    // Expanding the tangent plane of |x|^2/y gives -c = -a varrho + 2b Re{conj(theta) x_hat}.
    s.c = s.a * data.varrho - 2.0 * s.b * (std::conj(data.theta) * x_hat).real();
    s.beta = x_hat * data.alpha;
    s.Y.resize(data.K());
    for (std::size_t k = 0; k < data.K(); ++k) s.Y[k] = std::norm(s.beta[k]);
    s.lin_shift = adjoint_times(data.A, data.gamma);
    s.lin_shift *= s.a;
    return s;
}

double surrogate_value(const SurrogateCoeffs& coeffs, const ProblemData& data, const ComplexVector& nu) {
    ComplexVector r = data.A * nu;
    r += data.gamma;
    return -coeffs.a * norm_sq(r) + 2.0 * coeffs.b * dot(coeffs.beta, nu).real() - coeffs.c;
}

NuSubproblem::NuSubproblem(const SurrogateCoeffs& coeffs, const ProblemData& data, const ComplexMatrix& T,
                           double rho, double newton_tol)
    : a_(coeffs.a), half_rho_(0.5 * rho), varpi2_(data.varpi2), newton_tol_(newton_tol) {
    const std::size_t K = data.K();
    const double y_max = *std::max_element(coeffs.Y.begin(), coeffs.Y.end());
    const double y_floor = 1e-12 * std::max(1.0, y_max);
    inv_sqrt_y_.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        double y = coeffs.Y[k];
        if (y <= y_floor) {
            y += 1e-12;
            regularized_ = true;
        }
        inv_sqrt_y_[k] = 1.0 / std::sqrt(y);
    }
    ComplexMatrix z(K, K);
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < K; ++j) z(i, j) = inv_sqrt_y_[i] * T(i, j) * inv_sqrt_y_[j];
    EigenDecomposition eig = herm_eig(z);
    pi_ = std::move(eig.eigenvalues);
    for (auto& p : pi_) p = std::max(p, 0.0);
    q_ = std::move(eig.eigenvectors);
}

ComplexVector NuSubproblem::nu_of(const ComplexVector& mu_prime, double zeta) const {
    const std::size_t K = pi_.size();
    ComplexVector w(K);
    for (std::size_t k = 0; k < K; ++k) w[k] = mu_prime[k] / (half_rho_ + (a_ + zeta) * pi_[k]);
    ComplexVector nu = q_ * w;
    for (std::size_t k = 0; k < K; ++k) nu[k] *= inv_sqrt_y_[k];
    return nu;
}

double NuSubproblem::cap_function(const ComplexVector& mu_prime, double zeta) const {
    double phi = 0.0;
    for (std::size_t k = 0; k < pi_.size(); ++k) {
        const double d = half_rho_ + (a_ + zeta) * pi_[k];
        phi += std::norm(mu_prime[k]) * pi_[k] / (d * d);
    }
    return phi;
}

NuUpdate NuSubproblem::solve(const ComplexVector& mu_tilde) const {
    const std::size_t K = pi_.size();
    ComplexVector scaled(K);
    for (std::size_t k = 0; k < K; ++k) scaled[k] = inv_sqrt_y_[k] * mu_tilde[k];
    const ComplexVector mu_prime = adjoint_times(q_, scaled);

    NuUpdate out;
    out.regularized = regularized_;
    if (!(varpi2_ < kInfinity) || cap_function(mu_prime, 0.0) <= varpi2_) {
        out.nu = nu_of(mu_prime, 0.0);
        return out;
    }

    // phi(zeta) is convex and decreasing; psi = 1/sqrt(phi) - 1/varpi is
    // close to linear, so Newton on psi converges fast. The bracket
    // [lo, hi] guards every step.
    const double target = 1.0 / std::sqrt(varpi2_);
    auto psi = [&](double zeta, double& dpsi) {
        double phi = 0.0, dphi = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            const double d = half_rho_ + (a_ + zeta) * pi_[k];
            const double m2 = std::norm(mu_prime[k]);
            phi += m2 * pi_[k] / (d * d);
            dphi += -2.0 * m2 * pi_[k] * pi_[k] / (d * d * d);
        }
        dpsi = -0.5 * dphi / (phi * std::sqrt(phi));
        return 1.0 / std::sqrt(phi) - target;
    };

    double lo = 0.0;
    double hi = kInfinity;
    double zeta = 0.0;
    for (int it = 0; it < 500; ++it) {
        double dpsi = 0.0;
        const double f = psi(zeta, dpsi);
        if (f < 0.0) lo = zeta; else hi = zeta;
        const double phi = cap_function(mu_prime, zeta);
        if (std::abs(phi - varpi2_) <= newton_tol_ * varpi2_) break;
        double next = (dpsi > 0.0 && std::isfinite(dpsi)) ? zeta - f / dpsi : kInfinity;
        if (!(next > lo && next < hi)) {
            next = std::isfinite(hi) ? 0.5 * (lo + hi) : std::max(2.0 * lo, 1.0);
        }
        if (std::isfinite(hi) && hi - lo <= 1e-15 * hi) break;
        zeta = next;
    }
    // The root is approached from the infeasible side only through bisection;
    // prefer the feasible end of the bracket when the tolerance was not met.
    if (cap_function(mu_prime, zeta) > varpi2_ * (1.0 + newton_tol_) && std::isfinite(hi)) zeta = hi;
    out.zeta = zeta;
    out.nu = nu_of(mu_prime, zeta);
    return out;
}

ComplexVector admm_rhs(const SurrogateCoeffs& coeffs, const ComplexVector& Xi, const ComplexVector& y,
                       double rho) {
    const std::size_t K = coeffs.beta.size();
    ComplexVector mu(K);
    for (std::size_t k = 0; k < K; ++k) {
        mu[k] = coeffs.beta[k] * (0.5 * rho * Xi[k] - 0.5 * y[k]) - coeffs.lin_shift[k];
    }
    return mu;
}

NuUpdate admm_nu_update(const SurrogateCoeffs& coeffs, const ProblemData& data, const ComplexVector& Xi_prev,
                        const ComplexVector& y_prev, const SolverConfig& config) {
    config.validate();
    const double rho = admm_penalty(config, coeffs, data);
    const NuSubproblem sub(coeffs, data, gram(data.A), rho, config.newton_tol);
    return sub.solve(admm_rhs(coeffs, Xi_prev, y_prev, rho));
}

ComplexVector admm_xi_update(const SurrogateCoeffs& coeffs, const ComplexVector& nu, const ComplexVector& y_prev,
                             const std::vector<double>& power_caps, double rho) {
    const std::size_t K = coeffs.beta.size();
    const double half_rho = 0.5 * rho;
    ComplexVector xi(K);
    for (std::size_t k = 0; k < K; ++k) {
        const cplx v = coeffs.b + 0.5 * y_prev[k] + half_rho * std::conj(coeffs.beta[k]) * nu[k];
        const double radius = std::abs(coeffs.beta[k]) * std::sqrt(power_caps[k]);
        const cplx free = v / half_rho;
        if (std::abs(free) <= radius) {
            xi[k] = free;
        } else {
            const double mag = std::abs(v);
            xi[k] = mag > 0.0 ? v * (radius / mag) : cplx{};
        }
    }
    return xi;
}

ComplexVector admm_dual_update(const ComplexVector& y_prev, const ComplexVector& beta, const ComplexVector& nu,
                               const ComplexVector& Xi, double rho) {
    ComplexVector y = y_prev;
    for (std::size_t k = 0; k < y.size(); ++k) y[k] += rho * (std::conj(beta[k]) * nu[k] - Xi[k]);
    return y;
}

ComplexVector project_feasible(const ProblemData& data, const ComplexVector& nu) {
    ComplexVector out = nu;
    for (std::size_t k = 0; k < data.K(); ++k) {
        const double cap = std::sqrt(data.power_caps[k]);
        const double mag = std::abs(out[k]);
        if (mag > cap) out[k] *= cap / mag;
    }
    if (data.has_power_cap()) {
        const double leak = norm_sq(data.A * out);
        if (leak > data.varpi2) out *= std::sqrt(data.varpi2 / leak);
    }
    return out;
}

ComplexVector random_feasible_start(const ProblemData& data, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    const std::size_t K = data.K();
    ComplexVector nu(K);
    double chi = kInfinity;
    for (std::size_t k = 0; k < K; ++k) {
        nu[k] = cplx(gauss(rng), gauss(rng));
        chi = std::min(chi, std::sqrt(data.power_caps[k]) / std::abs(nu[k]));
    }
    nu *= chi;
    if (data.has_power_cap()) {
        const double leak = norm_sq(data.A * nu);
        if (leak > data.varpi2) nu *= std::sqrt(data.varpi2 / leak);
    }
    return nu;
}

namespace {

constexpr int kMaxInnerBlocks = 20;

// Accept the ADMM output if it does not lose objective; otherwise backtrack
// along the feasible segment from nu_hat. Returns nu_hat if nothing improves.
ComplexVector monotone_step(const ProblemData& data, const ComplexVector& nu_hat, double s_hat,
                            const ComplexVector& candidate) {
    if (objective(data, candidate) >= s_hat) return candidate;
    const ComplexVector dir = candidate - nu_hat;
    double t = 0.5;
    for (int i = 0; i < 40; ++i, t *= 0.5) {
        ComplexVector trial = nu_hat;
        for (std::size_t k = 0; k < trial.size(); ++k) trial[k] += t * dir[k];
        if (objective(data, trial) > s_hat) return trial;
    }
    return nu_hat;
}

double relative_change(double now, double before) {
    const double denom = std::abs(now);
    if (denom == 0.0) return now == before ? 0.0 : kInfinity;
    return std::abs(now - before) / denom;
}

}  // namespace

SolveResult solve(const ProblemData& data, const SolverConfig& config, std::optional<ComplexVector> initial) {
    config.validate();
    const std::size_t K = data.K();
    if (data.power_caps.size() != K || data.A.cols() != K || data.gamma.size() != data.N()) {
        throw DimensionError("solve: inconsistent problem dimensions");
    }
    const ComplexMatrix T = gram(data.A);

    SolveResult res;
    ComplexVector nu_hat = initial ? project_feasible(data, *initial) : random_feasible_start(data, config.init_seed);
    if (nu_hat.size() != K) throw DimensionError("solve: initial point length must equal K");
    double s_hat = objective(data, nu_hat);
    res.trace.push_back(s_hat);

    for (int m = 1; m <= config.T_M_MAX; ++m) {
        SurrogateCoeffs coeffs = surrogate_coeffs(data, nu_hat);
        if (coeffs.degenerate()) {
            if (res.rerandomized) {
                res.status = SolveStatus::Converged;
                break;
            }
            res.rerandomized = true;
            nu_hat = random_feasible_start(data, config.init_seed ^ 0x9e3779b97f4a7c15ULL);
            s_hat = objective(data, nu_hat);
            coeffs = surrogate_coeffs(data, nu_hat);
            if (coeffs.degenerate()) {
                res.status = SolveStatus::Converged;
                break;
            }
        }
        const double rho = admm_penalty(config, coeffs, data);
        const NuSubproblem sub(coeffs, data, T, rho, config.newton_tol);

        ComplexVector xi(K);
        for (std::size_t k = 0; k < K; ++k) xi[k] = std::conj(coeffs.beta[k]) * nu_hat[k];
        ComplexVector y(K);
        ComplexVector nu = nu_hat;
        // The change test needs two ADMM iterates; the warm start is not one.
        // A block that ends without ascending the surrogate has not solved it
        // yet, so the same ADMM state runs for further blocks.
        const double s_start = surrogate_value(coeffs, data, nu_hat);
        for (int block = 0; block < kMaxInnerBlocks; ++block) {
            double s_prev = 0.0;
            for (int n = 1; n <= config.T_A_MAX; ++n) {
                const NuUpdate upd = sub.solve(admm_rhs(coeffs, xi, y, rho));
                res.regularized = res.regularized || upd.regularized;
                nu = upd.nu;
                xi = admm_xi_update(coeffs, nu, y, data.power_caps, rho);
                y = admm_dual_update(y, coeffs.beta, nu, xi, rho);
                ++res.total_admm_iterations;
                const double s_now = surrogate_value(coeffs, data, nu);
                if (n > 1 && relative_change(s_now, s_prev) < config.delta_A) break;
                s_prev = s_now;
            }
            if (surrogate_value(coeffs, data, project_feasible(data, nu)) >= s_start) break;
        }

        const ComplexVector next = monotone_step(data, nu_hat, s_hat, project_feasible(data, nu));
        const double s_next = objective(data, next);
        res.trace.push_back(s_next);
        res.mm_iterations = m;
        const double change = relative_change(s_next, s_hat);
        nu_hat = next;
        s_hat = s_next;
        if (change < config.delta_M) {
            res.status = SolveStatus::Converged;
            break;
        }
    }

    res.nu = project_feasible(data, nu_hat);
    res.objective_value = objective(data, res.nu);
    res.snr = data.snr_scale * res.objective_value;
    return res;
}

}  // namespace psa
