#include "unobs/observability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "unobs/errors.hpp"
#include "unobs/finite_embedding.hpp"
#include "unobs/special_functions.hpp"

namespace unobs::observability {

using spectral::SpectralVec;

CMatrix gramian_matrix(double u, double T, const SpectralVec& zeta, double mu, int steps,
                       double* hermitian_defect) {
    if (!(T > 0.0)) throw std::invalid_argument("observability_gramian: T must be positive");
    if (steps < 100) throw std::invalid_argument("observability_gramian: steps must be >= 100");
    const double h = T / steps;
    const CMatrix step_adj = linalg::expm(spectral::generator_matrix(u, mu, zeta.N()), h).adjoint();
    const Eigen::Index n = zeta.size();
    CMatrix w = CMatrix::Zero(n, n);
    CVector v = zeta.coeffs();
    for (int i = 0; i <= steps; ++i) {
        const double weight = (i == 0 || i == steps) ? 0.5 * h : h;
        w.noalias() += weight * v * v.adjoint();
        v = step_adj * v;
    }
    if (hermitian_defect != nullptr) *hermitian_defect = (w - w.adjoint()).cwiseAbs().maxCoeff();
    return 0.5 * (w + w.adjoint());
}

GramianReport observability_gramian(double u, double T, const SpectralVec& zeta, double mu,
                                    int steps) {
    GramianReport rep;
    rep.u = u;
    rep.T = T;
    rep.N = zeta.N();
    const CMatrix w = gramian_matrix(u, T, zeta, mu, steps, &rep.hermitian_defect);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(w, Eigen::EigenvaluesOnly);
    rep.lambda_min = es.eigenvalues().minCoeff();
    rep.lambda_max = es.eigenvalues().maxCoeff();
    return rep;
}

std::map<int, Complex> obstruction_coeffs(const std::map<int, Complex>& c) {
    static const Complex ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    std::map<int, Complex> d;
    for (const auto& [k, ck] : c) d[k] = std::conj(ck) * ipow[((k % 4) + 4) % 4];
    return d;
}

Complex F_ell(int ell, double r, const std::map<int, Complex>& d) {
    Complex acc = 0.0;
    for (const auto& [k, dk] : d) acc += dk * special::bessel_j(k + ell, r);
    return acc;
}

std::vector<Complex> F_ell_range(int L, double r, const std::map<int, Complex>& d) {
    std::vector<Complex> out;
    out.reserve(static_cast<std::size_t>(2 * L + 1));
    for (int ell = -L; ell <= L; ++ell) out.push_back(F_ell(ell, r, d));
    return out;
}

double F_ell_zero_scan(int L, double r_max, const std::map<int, Complex>& d, int grid, double tol) {
    std::vector<Complex> prev;
    for (int g = 1; g <= grid; ++g) {
        const double r = r_max * g / grid;
        std::vector<Complex> cur;
        for (int ell = -L; ell <= L; ++ell) {
            const Complex f = F_ell(ell, r, d);
            double scale = 0.0;
            for (const auto& [k, dk] : d) scale += std::abs(dk) * std::fabs(special::bessel_j(k + ell, r));
            if (scale == 0.0 || std::abs(f) < tol * scale) return r;
            cur.push_back(f);
            if (!prev.empty()) {
                const Complex p = prev[static_cast<std::size_t>(ell + L)];
                const double small = 1e-12 * scale;
                const bool re_cross = p.real() * f.real() < 0.0 && std::fabs(p.imag()) <= small &&
                                      std::fabs(f.imag()) <= small;
                const bool im_cross = p.imag() * f.imag() < 0.0 && std::fabs(p.real()) <= small &&
                                      std::fabs(f.real()) <= small;
                if (re_cross || im_cross) return r;
            }
        }
        prev = std::move(cur);
    }
    return std::numeric_limits<double>::infinity();
}

double det_Q_formula(const GainMatrix& K, const Matrix& A, double delta, double alpha) {
    const Matrix ka = K.K * A;
    const double obs_det = linalg::kalman_matrix(ka, A, linalg::KalmanMode::Observability)
                               .matrix.partialPivLu()
                               .determinant();
    const double p = linalg::polyval(linalg::characteristic_polynomial(A), -alpha);
    return delta * delta * alpha * obs_det * p;
}

DetQReport det_Q_check(int trials, std::uint64_t rng_seed) {
    if (trials < 1) throw std::invalid_argument("det_Q_check: trials must be >= 1");
    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> delta_dist(0.1, 1.0);
    std::uniform_real_distribution<double> alpha_dist(0.1, 5.0);

    DetQReport rep;
    rep.trials = trials;
    for (int t = 0; t < trials; ++t) {
        const int n = (t % 2 == 0) ? 2 : 4;
        Matrix a;
        GainMatrix K;
        for (;;) {
            Matrix s(n, n);
            for (int i = 0; i < s.size(); ++i) s.data()[i] = normal(rng);
            a = s - s.transpose();
            K.K.resize(n);
            for (int i = 0; i < n; ++i) K.K(i) = normal(rng);
            const Matrix ka = K.K * a;
            if (linalg::numerical_rank(a) == n &&
                linalg::kalman_matrix(ka, a, linalg::KalmanMode::Observability).rank == n) {
                break;
            }
        }
        const double delta = delta_dist(rng);
        const double alpha = alpha_dist(rng);

        const double direct = finite::build_Q(K, a, delta, alpha).partialPivLu().determinant();
        const double formula = det_Q_formula(K, a, delta, alpha);
        const double scale = std::fabs(formula);
        rep.max_rel_err = std::max(rep.max_rel_err, std::fabs(direct - formula) / scale);
        rep.max_rel_err_corrected =
            std::max(rep.max_rel_err_corrected, std::fabs(direct + formula) / scale);

        const Matrix q0 = finite::build_Q(K, a, 0.0, alpha);
        if (linalg::numerical_rank(q0) >= n + 2 || det_Q_formula(K, a, 0.0, alpha) != 0.0) {
            rep.singular_at_zero_delta = false;
        }
    }
    return rep;
}

UmaxResult umax(double kappa, double j, double mu, double delta) {
    if (!(mu > 0.0)) throw std::invalid_argument("umax: mu must be positive");
    const double nu = spectral::nu_constant();
    UmaxResult r;
    r.value = kappa * j / mu + 16.0 * nu * nu * delta;
    r.applicable = mu * r.value < special::find_zeros().j0;
    return r;
}

Residuals check_bound_inequalities(const BoundParams& p) {
    const double nu2 = p.nu * p.nu;
    const double s = std::sqrt(2.0 * (1.0 - special::bessel_j(0, p.mu * p.R0)));
    Residuals r;
    r.ineq1 = p.R0 +
              p.M * (2.0 * p.kappa * p.ell_pi * s + 16.0 * nu2 * p.delta +
                     p.kappa * p.Delta * (p.R1 + 3.0 * p.kappa * p.ell_pi + 16.0 * nu2 * p.delta)) -
              p.R1;
    r.ineq2 = 2.0 * s + special::bessel_j(1, p.mu * p.R1) - special::bessel_j(1, p.mu * p.R2);
    return r;
}

double impulse_l1_norm(const Matrix& A, const Vector& b, const GainMatrix& K) {
    const Matrix f = A + b * K.K;
    if (!linalg::is_hurwitz(f)) throw NotHurwitzError("impulse_l1_norm: A + bK is not Hurwitz");
    double decay = -std::numeric_limits<double>::infinity();
    for (const auto& ev : linalg::eigenvalues(f)) decay = std::max(decay, ev.real());
    const double horizon = std::min(5000.0, 40.0 / -decay);
    const double h = 1e-3;
    const Matrix step = linalg::expm(f, h);
    Vector v = b;
    double acc = 0.5 * h * v.norm();
    const long steps = static_cast<long>(std::ceil(horizon / h));
    for (long i = 1; i <= steps; ++i) {
        v = step * v;
        acc += (i == steps ? 0.5 : 1.0) * h * v.norm();
    }
    return acc;
}

namespace {

void fill_lipschitz(BoundParams& p) {
    const double top = special::bessel_j(1, std::min(p.mu * p.R2, special::find_zeros().j1));
    p.ell_pi = spectral::lipschitz_f(p.mu, p.j, top);
    p.ell_f = spectral::lipschitz_f(p.mu, p.j, std::numeric_limits<double>::infinity());
    p.ell_tau = p.mu;
}

// Halves mu until Ineq2 holds with mu R2 < j; fixed mu is only checked.
bool settle_mu(BoundParams& p, bool fixed_mu, int max_iter) {
    if (!fixed_mu) p.mu = 0.99 * p.j / p.R2;
    for (int it = 0; it < max_iter; ++it) {
        if (p.mu * p.R2 < p.j) {
            fill_lipschitz(p);
            if (check_bound_inequalities(p).ineq2 < 0.0) return true;
        }
        if (fixed_mu) return false;
        p.mu *= 0.5;
    }
    return false;
}

}  // namespace

BoundParams choose_radii(double R0, const RadiiOptions& opt) {
    if (!(R0 > 0.0)) throw std::invalid_argument("choose_radii: R0 must be positive");
    BoundParams p;
    p.R0 = R0;
    p.j = opt.j > 0.0 ? opt.j : 0.9 * special::find_zeros().j1;
    p.kappa = opt.K.norm();
    p.nu = spectral::nu_constant();
    p.M = impulse_l1_norm(opt.A, opt.b, opt.K);
    p.beta1 = opt.beta1;
    p.beta2 = opt.beta2 > 0.0 ? opt.beta2 : 2.0 * std::numbers::sqrt2 + 3.0;
    const bool fixed_mu = opt.mu > 0.0;
    if (fixed_mu) p.mu = opt.mu;

    for (int round = 0;; ++round) {
        p.R1 = p.beta1 * R0;
        p.R2 = p.beta2 * R0;
        p.delta = 0.0;
        p.Delta = 0.0;
        const bool mu_ok = settle_mu(p, fixed_mu, opt.max_iter);
        if (mu_ok && check_bound_inequalities(p).ineq1 < 0.0) break;
        if (!opt.allow_widening || round >= 20) {
            throw SearchFailure(mu_ok ? "choose_radii: Ineq1 infeasible for the given radii"
                                      : "choose_radii: no mu satisfies Ineq2 with mu R2 < j");
        }
        if (!mu_ok) {
            throw SearchFailure("choose_radii: no mu satisfies Ineq2 with mu R2 < j");
        }
        // Ineq1 at delta = Delta = 0 reads R0 + M 2 kappa ell_pi s < beta1 R0.
        const double s = std::sqrt(2.0 * (1.0 - special::bessel_j(0, p.mu * R0)));
        p.beta1 = 1.25 * (1.0 + p.M * 2.0 * p.kappa * p.ell_pi * s / R0);
        p.beta2 = p.beta1 + 2.0 * std::numbers::sqrt2 + 1.0;
        p.beta_widened = true;
    }

    constexpr int kDeltaGridMax = 9;  // 0.512 / 2^9 = 0.001
    p.delta = 1.0;
    int delta_exp = 0;
    for (int it = 0; it < opt.max_iter; ++it) {
        p.Delta = 0.512 * std::ldexp(1.0, -delta_exp);
        if (check_bound_inequalities(p).ineq1 < 0.0) return p;
        p.delta *= 0.5;
        if (delta_exp < kDeltaGridMax) ++delta_exp;
    }
    throw SearchFailure("choose_radii: delta/Delta search exhausted");
}

}  // namespace unobs::observability
