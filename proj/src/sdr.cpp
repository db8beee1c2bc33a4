#include "psa/sdr.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace psa {

namespace {

// Real coordinates of a K x K Hermitian matrix: K diagonal entries, then
// the real and imaginary parts of each strictly upper entry.
struct Coord {
    enum class Kind { Diag, Re, Im } kind;
    std::size_t i;
    std::size_t j;
};

std::vector<Coord> hermitian_coords(std::size_t K) {
    std::vector<Coord> c;
    c.reserve(K * K);
    for (std::size_t k = 0; k < K; ++k) c.push_back({Coord::Kind::Diag, k, k});
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = i + 1; j < K; ++j) {
            c.push_back({Coord::Kind::Re, i, j});
            c.push_back({Coord::Kind::Im, i, j});
        }
    return c;
}

// <G, E_c> = Re Tr(G E_c) for Hermitian G.
double basis_inner(const ComplexMatrix& g, const Coord& c) {
    switch (c.kind) {
        case Coord::Kind::Diag: return g(c.i, c.i).real();
        case Coord::Kind::Re: return 2.0 * g(c.i, c.j).real();
        case Coord::Kind::Im: return 2.0 * g(c.i, c.j).imag();
    }
    return 0.0;
}

void add_basis(ComplexMatrix& x, const Coord& c, double v) {
    switch (c.kind) {
        case Coord::Kind::Diag: x(c.i, c.i) += v; break;
        case Coord::Kind::Re:
            x(c.i, c.j) += v;
            x(c.j, c.i) += v;
            break;
        case Coord::Kind::Im:
            x(c.i, c.j) += cplx(0.0, v);
            x(c.j, c.i) -= cplx(0.0, v);
            break;
    }
}

// W E_c W for Hermitian W.
ComplexMatrix sandwich(const ComplexMatrix& w, const Coord& c) {
    const std::size_t K = w.rows();
    ComplexMatrix g(K, K);
    const std::size_t i = c.i, j = c.j;
    for (std::size_t p = 0; p < K; ++p)
        for (std::size_t q = 0; q < K; ++q) {
            switch (c.kind) {
                case Coord::Kind::Diag: g(p, q) = w(p, i) * w(i, q); break;
                case Coord::Kind::Re: g(p, q) = w(p, i) * w(j, q) + w(p, j) * w(i, q); break;
                case Coord::Kind::Im: g(p, q) = cplx(0.0, 1.0) * (w(p, i) * w(j, q) - w(p, j) * w(i, q)); break;
            }
        }
    return g;
}

struct Cholesky {
    ComplexMatrix L;
    double logdet = 0.0;
    bool ok = false;
};

Cholesky cholesky(const ComplexMatrix& m) {
    const std::size_t n = m.rows();
    Cholesky out;
    out.L = ComplexMatrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = m(j, j).real();
        for (std::size_t k = 0; k < j; ++k) d -= std::norm(out.L(j, k));
        if (!(d > 0.0) || !std::isfinite(d)) return out;
        const double ljj = std::sqrt(d);
        out.L(j, j) = ljj;
        out.logdet += 2.0 * std::log(ljj);
        for (std::size_t i = j + 1; i < n; ++i) {
            cplx acc = m(i, j);
            for (std::size_t k = 0; k < j; ++k) acc -= out.L(i, k) * std::conj(out.L(j, k));
            out.L(i, j) = acc / ljj;
        }
    }
    out.ok = true;
    return out;
}

ComplexMatrix inverse_from_cholesky(const ComplexMatrix& L) {
    const std::size_t n = L.rows();
    // Linv lower-triangular, then X^{-1} = Linv^H Linv.
    ComplexMatrix linv(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        linv(j, j) = 1.0 / L(j, j).real();
        for (std::size_t i = j + 1; i < n; ++i) {
            cplx acc{};
            for (std::size_t k = j; k < i; ++k) acc -= L(i, k) * linv(k, j);
            linv(i, j) = acc / L(i, i).real();
        }
    }
    ComplexMatrix inv(n, n);
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = p; q < n; ++q) {
            cplx acc{};
            for (std::size_t k = std::max(p, q); k < n; ++k) acc += std::conj(linv(k, p)) * linv(k, q);
            inv(p, q) = acc;
            inv(q, p) = std::conj(acc);
        }
    for (std::size_t p = 0; p < n; ++p) inv(p, p) = inv(p, p).real();
    return inv;
}

// Dense real SPD solve, row-major a (n x n) overwritten. False if not SPD.
bool solve_spd(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        const double ljj = std::sqrt(d);
        a[j * n + j] = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double acc = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) acc -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = acc / ljj;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double acc = b[i];
        for (std::size_t k = 0; k < i; ++k) acc -= a[i * n + k] * b[k];
        b[i] = acc / a[i * n + i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double acc = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) acc -= a[k * n + ii] * b[k];
        b[ii] = acc / a[ii * n + ii];
    }
    return true;
}

// Solves H d = g after symmetric diagonal scaling. Late in the path the
// Hessian is close to singular in floating point, so a failed factorization
// is retried with a growing diagonal shift (a slightly damped Newton step).
bool newton_direction(const std::vector<double>& hess, const std::vector<double>& grad, std::size_t n,
                      std::vector<double>& dir) {
    std::vector<double> d(n);
    for (std::size_t a = 0; a < n; ++a) {
        if (!(hess[a * n + a] > 0.0)) return false;
        d[a] = 1.0 / std::sqrt(hess[a * n + a]);
    }
    for (double shift = 0.0; shift <= 1e-4; shift = shift == 0.0 ? 1e-14 : shift * 100.0) {
        std::vector<double> work(n * n);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) work[a * n + b] = d[a] * hess[a * n + b] * d[b];
        for (std::size_t a = 0; a < n; ++a) work[a * n + a] += shift;
        dir.assign(n, 0.0);
        for (std::size_t a = 0; a < n; ++a) dir[a] = d[a] * grad[a];
        if (solve_spd(work, dir, n)) {
            for (std::size_t a = 0; a < n; ++a) dir[a] *= d[a];
            return true;
        }
    }
    return false;
}

struct LinearConstraint {
    ComplexMatrix F;
    double bound;
    std::vector<double> coords;  // <F, E_a>
};


// Multipliers of the active constraints fitted to complementarity Z X = 0
// with Z = sum lambda_i F_i - cost, by nonnegative least squares (active
// set). The barrier's own estimate 1/(t s_i) is limited by rounding in the
// stiff directions of a near rank-one X; this refit is not.
std::vector<double> fit_multipliers(const std::vector<LinearConstraint>& cons, const std::vector<bool>& active,
                                    const ComplexMatrix& cost, const ComplexMatrix& X) {
    const std::size_t m = cons.size();
    std::vector<ComplexMatrix> FX;
    for (const auto& c : cons) FX.push_back(c.F * X);
    const ComplexMatrix CX = cost * X;
    auto inner = [](const ComplexMatrix& a, const ComplexMatrix& b) {
        double acc = 0.0;
        for (std::size_t r = 0; r < a.rows(); ++r)
            for (std::size_t c = 0; c < a.cols(); ++c) acc += std::real(std::conj(a(r, c)) * b(r, c));
        return acc;
    };

    std::vector<double> lambda(m, 0.0);
    std::vector<bool> free = active;
    for (std::size_t round = 0; round <= m; ++round) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < m; ++i)
            if (free[i]) idx.push_back(i);
        std::fill(lambda.begin(), lambda.end(), 0.0);
        if (idx.empty()) break;
        const std::size_t n = idx.size();
        std::vector<double> g(n * n), rhs(n);
        double diag_max = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            rhs[a] = inner(FX[idx[a]], CX);
            for (std::size_t b = 0; b < n; ++b) g[a * n + b] = inner(FX[idx[a]], FX[idx[b]]);
            diag_max = std::max(diag_max, g[a * n + a]);
        }
        for (std::size_t a = 0; a < n; ++a) g[a * n + a] += 1e-15 * diag_max;
        if (!solve_spd(g, rhs, n)) break;
        bool clipped = false;
        for (std::size_t a = 0; a < n; ++a) {
            if (rhs[a] < 0.0) {
                free[idx[a]] = false;
                clipped = true;
            } else {
                lambda[idx[a]] = rhs[a];
            }
        }
        if (!clipped) break;
    }
    return lambda;
}

}  // namespace

SdpInstance build_sdp(const ProblemData& data) {
    if (!data.is_homogeneous()) {
        throw UnsupportedInstance("build_sdp: relaxation requires theta = 0 and gamma = 0");
    }
    SdpInstance inst;
    inst.Theta = outer(data.alpha);
    inst.T = gram(data.A);
    inst.P = data.power_caps;
    inst.varpi2 = data.varpi2;
    inst.varrho = data.varrho;
    return inst;
}

double rank_ratio(const ComplexMatrix& X) {
    if (X.rows() <= 1) return 0.0;
    const EigenDecomposition eig = herm_eig(X);
    const std::size_t n = eig.eigenvalues.size();
    const double l1 = eig.eigenvalues[n - 1];
    const double l2 = std::max(eig.eigenvalues[n - 2], 0.0);
    if (!(l1 > 0.0)) return 0.0;
    return l2 / l1;
}

ComplexVector extract_rank_one(const SdpInstance& inst, const SdpSolution& sol) {
    if (!(sol.kappa > 0.0)) throw NumericalFailure("extract_rank_one: kappa must be positive");
    ComplexMatrix V = sol.X;
    V *= 1.0 / sol.kappa;
    const EigenDecomposition eig = herm_eig(ComplexMatrix::hermitian(V));
    const double l1 = eig.eigenvalues.back();
    if (!(l1 > 0.0)) throw NumericalFailure("extract_rank_one: leading eigenvalue is not positive");
    ComplexVector nu = eig.eigenvectors.column(eig.eigenvalues.size() - 1);
    nu *= std::sqrt(l1);

    double factor = 1.0;
    for (std::size_t k = 0; k < inst.K(); ++k) {
        const double mag = std::abs(nu[k]);
        if (mag > 0.0) factor = std::min(factor, std::sqrt(inst.P[k]) / mag);
    }
    if (inst.varpi2 < kInfinity) {
        const double leak = dot(nu, inst.T * nu).real();
        if (leak > 0.0) factor = std::min(factor, std::sqrt(inst.varpi2 / leak));
    }
    nu *= factor;
    return nu;
}

SdpSolution solve_sdp(const SdpInstance& inst, double tol) {
    const std::size_t K = inst.K();
    if (K == 0 || inst.Theta.rows() != K || inst.T.rows() != K) throw DimensionError("solve_sdp: bad instance");
    if (!(tol > 0.0)) throw std::invalid_argument("solve_sdp: tolerance must be positive");

    // X = D Xs D with D = diag(sqrt(P_k / varrho)) puts every cap on the unit scale.
    std::vector<double> dscale(K);
    for (std::size_t k = 0; k < K; ++k) dscale[k] = std::sqrt(inst.P[k] / inst.varrho);
    auto congruence = [&](const ComplexMatrix& m) {
        ComplexMatrix out(K, K);
        for (std::size_t i = 0; i < K; ++i)
            for (std::size_t j = 0; j < K; ++j) out(i, j) = dscale[i] * m(i, j) * dscale[j];
        return out;
    };
    const ComplexMatrix theta_s = congruence(inst.Theta);
    const ComplexMatrix t_s = congruence(inst.T);
    const double obj_scale = std::max(theta_s.frobenius_norm(), 1e-300);
    ComplexMatrix cost = theta_s;
    cost *= 1.0 / obj_scale;

    const std::vector<Coord> coords = hermitian_coords(K);
    const std::size_t n = coords.size();

    std::vector<LinearConstraint> cons;
    for (std::size_t k = 0; k < K; ++k) {
        ComplexMatrix F = t_s;
        F(k, k) += 1.0;
        cons.push_back({std::move(F), 1.0, {}});
    }
    if (inst.varpi2 < kInfinity) {
        const double w = inst.varpi2 / inst.varrho;
        ComplexMatrix F = t_s;
        F *= 1.0 + w;
        cons.push_back({std::move(F), w, {}});
    }
    cons.push_back({t_s, 1.0, {}});  // kappa >= 0
    for (auto& c : cons) {
        c.coords.resize(n);
        for (std::size_t a = 0; a < n; ++a) c.coords[a] = basis_inner(c.F, coords[a]);
    }
    std::vector<double> cost_coords(n);
    for (std::size_t a = 0; a < n; ++a) cost_coords[a] = basis_inner(cost, coords[a]);

    // Strictly feasible start X = c0 I with every slack at half its bound.
    double c0 = kInfinity;
    for (const auto& c : cons) {
        const double tr = c.F.trace().real();
        if (tr > 0.0) c0 = std::min(c0, c.bound / tr);
    }
    if (!std::isfinite(c0)) c0 = 1.0;
    c0 *= 0.5;
    std::vector<double> x(n, 0.0);
    for (std::size_t k = 0; k < K; ++k) x[k] = c0;

    auto assemble = [&](const std::vector<double>& v) {
        ComplexMatrix X(K, K);
        for (std::size_t a = 0; a < n; ++a)
            if (v[a] != 0.0) add_basis(X, coords[a], v[a]);
        return X;
    };
    auto slacks = [&](const std::vector<double>& v) {
        std::vector<double> s(cons.size());
        for (std::size_t i = 0; i < cons.size(); ++i) {
            double acc = 0.0;
            for (std::size_t a = 0; a < n; ++a) acc += cons[i].coords[a] * v[a];
            s[i] = cons[i].bound - acc;
        }
        return s;
    };
    auto linear_cost = [&](const std::vector<double>& v) {
        double acc = 0.0;
        for (std::size_t a = 0; a < n; ++a) acc += cost_coords[a] * v[a];
        return acc;
    };
    // Barrier objective; NaN outside the domain.
    auto barrier = [&](const std::vector<double>& v, double t) {
        const std::vector<double> s = slacks(v);
        double acc = t * linear_cost(v);
        for (double si : s) {
            if (!(si > 0.0)) return std::nan("");
            acc += std::log(si);
        }
        const Cholesky ch = cholesky(assemble(v));
        if (!ch.ok) return std::nan("");
        return acc + ch.logdet;
    };

    const double m = static_cast<double>(K + cons.size());
    double t = 1.0;
    int newton_steps = 0;
    std::vector<double> grad(n), hess(n * n), dir(n);
    for (int outer = 0; outer < 200; ++outer) {
        for (int it = 0; it < 200; ++it) {
            const ComplexMatrix X = assemble(x);
            const Cholesky ch = cholesky(X);
            if (!ch.ok) throw NumericalFailure("solve_sdp: iterate left the PSD cone");
            const ComplexMatrix W = inverse_from_cholesky(ch.L);
            const std::vector<double> s = slacks(x);

            for (std::size_t a = 0; a < n; ++a) {
                double g = t * cost_coords[a] + basis_inner(W, coords[a]);
                for (std::size_t i = 0; i < cons.size(); ++i) g -= cons[i].coords[a] / s[i];
                grad[a] = g;
            }
            for (std::size_t a = 0; a < n; ++a) {
                const ComplexMatrix G = sandwich(W, coords[a]);
                for (std::size_t b = a; b < n; ++b) {
                    double h = basis_inner(G, coords[b]);
                    for (std::size_t i = 0; i < cons.size(); ++i) {
                        h += cons[i].coords[a] * cons[i].coords[b] / (s[i] * s[i]);
                    }
                    hess[a * n + b] = h;
                    hess[b * n + a] = h;
                }
            }
            if (!newton_direction(hess, grad, n, dir)) {
                throw NumericalFailure("solve_sdp: Newton system is not positive definite at m/t = " +
                                       std::to_string(m / t));
            }
            ++newton_steps;

            double decrement = 0.0;
            for (std::size_t a = 0; a < n; ++a) decrement += grad[a] * dir[a];
            if (!std::isfinite(decrement)) throw NumericalFailure("solve_sdp: non-finite Newton decrement");
            if (0.5 * decrement <= 1e-11) break;

            const double f0 = barrier(x, t);
            double step = 1.0;
            bool accepted = false;
            std::vector<double> trial(n);
            for (int ls = 0; ls < 80; ++ls, step *= 0.5) {
                for (std::size_t a = 0; a < n; ++a) trial[a] = x[a] + step * dir[a];
                const double f1 = barrier(trial, t);
                if (std::isfinite(f1) && f1 >= f0 + 0.01 * step * decrement) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                if (0.5 * decrement <= 1e-8) break;  // centered to rounding level
                throw NumericalFailure("solve_sdp: line search failed (decrement " + std::to_string(decrement) + ")");
            }
            x = trial;
        }
        if (m / t <= tol) break;
        t *= 5.0;
    }

    SdpSolution sol;
    sol.newton_steps = newton_steps;
    const ComplexMatrix Xs = assemble(x);
    const std::vector<double> s = slacks(x);

    // Dual certificate: Z = sum lambda_i F_i - cost with multipliers refit on
    // the active constraints; the barrier estimate 1/(t s_i) marks which
    // constraints are active.
    std::vector<bool> active(cons.size());
    for (std::size_t i = 0; i < cons.size(); ++i) active[i] = s[i] <= 1e-4 * cons[i].bound;
    const std::vector<double> lambda = fit_multipliers(cons, active, cost, Xs);
    ComplexMatrix Z = cost;
    Z *= -1.0;
    for (std::size_t i = 0; i < cons.size(); ++i) {
        ComplexMatrix term = cons[i].F;
        term *= lambda[i];
        Z += term;
    }
    Z = ComplexMatrix::hermitian(Z);
    sol.dual_slack_min_eig = herm_eig(Z).eigenvalues.front();
    sol.complementarity = (Z * Xs).trace().real();
    double resid = 0.0;
    for (std::size_t i = 0; i < cons.size(); ++i) resid = std::max(resid, -s[i] / cons[i].bound);
    sol.max_feasibility_residual = std::max(resid, 0.0);

    sol.X = ComplexMatrix(K, K);
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < K; ++j) sol.X(i, j) = dscale[i] * Xs(i, j) * dscale[j];
    sol.X = ComplexMatrix::hermitian(sol.X);
    sol.kappa = (1.0 - (t_s * Xs).trace().real()) / inst.varrho;
    sol.objective = (inst.Theta * sol.X).trace().real();
    sol.duality_gap = obj_scale * m / t;
    sol.eig_ratio = rank_ratio(sol.X);
    sol.heuristic = sol.eig_ratio > 1e-4;
    sol.nu = extract_rank_one(inst, sol);
    return sol;
}

}  // namespace psa
