#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "unobs/linalg.hpp"
#include "unobs/spectral_embedding.hpp"

namespace unobs::observability {

struct GramianReport {
    double u = 0.0;
    double T = 0.0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    int N = 0;
    double hermitian_defect = 0.0;  // ||W - W^*||_max before symmetrisation
};

/// W = int_0^T U(t)^* zeta zeta^* U(t) dt, U(t) = exp(t A(u)), by the trapezoid rule.
/// Requires T > 0 and steps >= 100.
CMatrix gramian_matrix(double u, double T, const spectral::SpectralVec& zeta, double mu, int steps,
                       double* hermitian_defect = nullptr);
GramianReport observability_gramian(double u, double T, const spectral::SpectralVec& zeta,
                                    double mu, int steps);

/// d_k = conj(c_k) i^k for the functional zeta built from Bessel coefficients c_k.
std::map<int, Complex> obstruction_coeffs(const std::map<int, Complex>& c);

/// sum_k d_k J_{k+ell}(r)
Complex F_ell(int ell, double r, const std::map<int, Complex>& d);
/// F_ell for ell = -L..L
std::vector<Complex> F_ell_range(int L, double r, const std::map<int, Complex>& d);

/// Smallest grid point r in (0, r_max] where some F_ell, |ell| <= L, vanishes: either a
/// relative magnitude below tol or a sign change of a (numerically) real/imaginary F_ell.
/// Returns +inf when none is found.
double F_ell_zero_scan(int L, double r_max, const std::map<int, Complex>& d, int grid = 2000,
                       double tol = 1e-10);

/// delta^2 alpha Det(KA, A) P(-alpha), P the characteristic polynomial of A.
double det_Q_formula(const GainMatrix& K, const Matrix& A, double delta, double alpha);

struct DetQReport {
    int trials = 0;
    double max_rel_err = 0.0;            // against +delta^2 alpha Delta P(-alpha)
    double max_rel_err_corrected = 0.0;  // against -delta^2 alpha Delta P(-alpha)
    bool singular_at_zero_delta = true;  // rank(Q) < n+2 and formula 0 in every trial
};

DetQReport det_Q_check(int trials, std::uint64_t rng_seed);

struct UmaxResult {
    double value = 0.0;
    bool applicable = false;  // mu * value < j0
};

UmaxResult umax(double kappa, double j, double mu, double delta);

struct BoundParams {
    double R0 = 0.0, R1 = 0.0, R2 = 0.0;
    double mu = 0.0, delta = 0.0, Delta = 0.0;
    double kappa = 0.0, nu = 0.0, M = 0.0;
    double ell_pi = 0.0;   // Lipschitz constant of pi over |<xi, e1>| <= J1(mu R2)
    double ell_tau = 0.0;  // Lipschitz constant of tau (= mu)
    double ell_f = 0.0;    // global Lipschitz constant of frak_f (diagnostic)
    double j = 0.0;
    double beta1 = 0.0, beta2 = 0.0;
    bool beta_widened = false;
};

struct Residuals {
    double ineq1 = 0.0;
    double ineq2 = 0.0;
};

/// Left minus right of both inequalities; negative means satisfied.
Residuals check_bound_inequalities(const BoundParams& p);

/// int_0^inf |exp(t(A + bK)) b| dt. Throws NotHurwitzError.
double impulse_l1_norm(const Matrix& A, const Vector& b, const GainMatrix& K);

struct RadiiOptions {
    GainMatrix K;
    Matrix A;
    Vector b;
    double j = 0.0;        // 0 means 0.9 j1
    double mu = 0.0;       // 0 means searched
    double beta1 = 2.0;
    double beta2 = 0.0;    // 0 means 2 sqrt 2 + 3
    bool allow_widening = true;
    int max_iter = 60;
};

/// R1 = beta1 R0, R2 = beta2 R0, then mu (unless fixed), delta and Delta by halving until both
/// inequalities hold. Delta is kept on the grid 0.512 / 2^k, k <= 9. Throws SearchFailure.
BoundParams choose_radii(double R0, const RadiiOptions& opt);

}  // namespace unobs::observability
