#pragma once

#include <map>
#include <string>
#include <vector>

#include "unobs/linalg.hpp"

// Truncated Fourier picture of the unitary embedding of the planar rotation
// plant: z_k = <z, e_k>, k = -N..N, inner product (1/2pi) int xi conj(zeta).
namespace unobs::spectral {

class SpectralVec {
public:
    SpectralVec() = default;
    explicit SpectralVec(int N);
    SpectralVec(int N, CVector coeffs);

    /// e_k; the target state 1 is unit(N, 0).
    static SpectralVec unit(int N, int k);

    int N() const { return N_; }
    Eigen::Index size() const { return c_.size(); }

    Complex& operator[](int k) { return c_(index(k)); }
    const Complex& operator[](int k) const { return c_(index(k)); }

    const CVector& coeffs() const { return c_; }
    CVector& coeffs() { return c_; }

    double norm() const { return c_.norm(); }

    /// <this, other> = sum_k this_k conj(other_k)
    Complex inner(const SpectralVec& other) const;

    SpectralVec operator-(const SpectralVec& o) const;
    SpectralVec operator+(const SpectralVec& o) const;

private:
    Eigen::Index index(int k) const;

    int N_ = 0;
    CVector c_;
};

enum class OutputKind { NormSq, J0Radial, J2Cos2Theta, Norm, BesselSeries };

std::string to_string(OutputKind kind);
/// Throws std::invalid_argument for an unknown name.
OutputKind output_kind_from_string(const std::string& name);

struct OutputSpec {
    OutputKind kind = OutputKind::NormSq;
    double mu = 0.1;
    std::map<int, Complex> coeffs;  // c_k, BesselSeries only
};

struct SpectralParams {
    GainMatrix K;
    double delta = 0.0;
    double alpha = 1.0;
    double Delta = 0.1;
    double mu = 0.1;
    double j = 0.0;  // 0 means 0.9 j1
    int N = 24;

    /// j with the default resolved.
    double j_value() const;
    /// Every violated constraint, one message per problem.
    std::vector<std::string> problems() const;
};

/// z_k = i^k J_k(mu r) e^{-ik theta} for x = (r cos theta, r sin theta).
SpectralVec tau_spec(const Vector& x, double mu, int N);

/// (A(u) z)_k = -ik z_k + (u mu / 2)(z_{k-1} - z_{k+1}), out-of-range neighbours dropped.
SpectralVec apply_Aop(double u, double mu, const SpectralVec& z);

/// Tridiagonal skew-Hermitian matrix of apply_Aop.
CMatrix generator_matrix(double u, double mu, int N);

/// A(u) - alpha zeta zeta^*
CMatrix assemble_Aop(double u, double mu, double alpha, const SpectralVec& zeta);

/// Plant output h(x); real for every kind except BesselSeries.
Complex output_h(const OutputSpec& spec, const Vector& x);

/// Map with frak_h(h(x)) = <tau(x), zeta>. Throws DomainError for y < 0 (NormSq, Norm).
Complex frak_h(const OutputSpec& spec, Complex y);

/// zeta with <tau(x), zeta> = frak_h(h(x)). Throws std::invalid_argument when N is too small
/// or a BesselSeries spec has no non-zero coefficient.
SpectralVec output_zeta(const OutputSpec& spec, int N);

double weak_norm_sq(const SpectralVec& z);
double weak_norm(const SpectralVec& z);

/// sqrt(pi coth pi)
double nu_constant();

enum class InverseRegion { Origin, Core, Blend, Clamped };

/// Radius profile of frak_f: J1^{-1} on [0, J1(j)], cubic Hermite up to J1(j1), then j1.
struct RadialInverse {
    double radius;
    double slope;
    InverseRegion region;
};
RadialInverse radial_inverse(double a, double j);

struct InverseResult {
    Vector x;
    InverseRegion region;
};

InverseResult frak_f_detail(Complex zeta, double mu, double j);
Vector frak_f(Complex zeta, double mu, double j);

/// frak_f(<z, e_1>)
InverseResult pi_spec_detail(const SpectralVec& z, double mu, double j);
Vector pi_spec(const SpectralVec& z, double mu, double j);

/// K pi(zhat) + delta N^2(zhat - 1)
double sample_hold_feedback(const SpectralVec& zhat, const SpectralParams& p);

/// Sampled Lipschitz constant of frak_f on |zeta| <= max_abs (whole plane when max_abs is infinite).
double lipschitz_f(double mu, double j, double max_abs, int samples = 4000);

}  // namespace unobs::spectral
