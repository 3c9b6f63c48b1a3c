#include "unobs/spectral_embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "unobs/errors.hpp"
#include "unobs/special_functions.hpp"

namespace unobs::spectral {
namespace {

Complex i_pow(int k) {
    switch (((k % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

void check_same(const SpectralVec& a, const SpectralVec& b) {
    if (a.N() != b.N()) throw ShapeError("SpectralVec: truncation orders differ");
}

}  // namespace

SpectralVec::SpectralVec(int N) : N_(N), c_(CVector::Zero(2 * N + 1)) {
    if (N < 0) throw std::invalid_argument("SpectralVec: N must be >= 0");
}

SpectralVec::SpectralVec(int N, CVector coeffs) : N_(N), c_(std::move(coeffs)) {
    if (N < 0 || c_.size() != 2 * N + 1) throw ShapeError("SpectralVec: expected 2N+1 coefficients");
}

SpectralVec SpectralVec::unit(int N, int k) {
    SpectralVec v(N);
    v[k] = 1.0;
    return v;
}

Eigen::Index SpectralVec::index(int k) const {
    if (k < -N_ || k > N_) throw std::out_of_range("SpectralVec: index outside [-N, N]");
    return static_cast<Eigen::Index>(k + N_);
}

Complex SpectralVec::inner(const SpectralVec& other) const {
    check_same(*this, other);
    return other.c_.dot(c_);  // Eigen's dot conjugates the left operand
}

SpectralVec SpectralVec::operator-(const SpectralVec& o) const {
    check_same(*this, o);
    return SpectralVec(N_, c_ - o.c_);
}

SpectralVec SpectralVec::operator+(const SpectralVec& o) const {
    check_same(*this, o);
    return SpectralVec(N_, c_ + o.c_);
}

std::string to_string(OutputKind kind) {
    switch (kind) {
        case OutputKind::NormSq: return "norm_sq";
        case OutputKind::J0Radial: return "j0_radial";
        case OutputKind::J2Cos2Theta: return "j2_cos2theta";
        case OutputKind::Norm: return "norm";
        case OutputKind::BesselSeries: return "bessel_series";
    }
    return "unknown";
}

OutputKind output_kind_from_string(const std::string& name) {
    for (auto kind : {OutputKind::NormSq, OutputKind::J0Radial, OutputKind::J2Cos2Theta,
                      OutputKind::Norm, OutputKind::BesselSeries}) {
        if (to_string(kind) == name) return kind;
    }
    throw std::invalid_argument("unknown output kind '" + name + "'");
}

double SpectralParams::j_value() const {
    return j > 0.0 ? j : 0.9 * special::find_zeros().j1;
}

std::vector<std::string> SpectralParams::problems() const {
    std::vector<std::string> out;
    const double j1 = special::find_zeros().j1;
    if (K.size() != 2) out.emplace_back("K must have two entries");
    if (!(delta >= 0.0) || !std::isfinite(delta)) out.emplace_back("delta must be >= 0");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) out.emplace_back("alpha must be > 0");
    if (!(Delta > 0.0 && Delta < std::numbers::pi)) out.emplace_back("Delta must lie in (0, pi)");
    if (!(mu > 0.0) || !std::isfinite(mu)) out.emplace_back("mu must be > 0");
    if (j != 0.0 && !(j > 0.0 && j < j1)) out.emplace_back("j must lie in (0, j1)");
    if (N < 2) out.emplace_back("N must be >= 2");
    return out;
}

SpectralVec tau_spec(const Vector& x, double mu, int N) {
    if (x.size() != 2) throw ShapeError("tau_spec: x must be planar");
    if (N < 1) throw std::invalid_argument("tau_spec: N must be >= 1");
    const double r = x.norm();
    const double theta = std::atan2(x(1), x(0));
    SpectralVec z(N);
    for (int k = -N; k <= N; ++k) {
        z[k] = i_pow(k) * special::bessel_j(k, mu * r) * std::polar(1.0, -k * theta);
    }
    return z;
}

SpectralVec apply_Aop(double u, double mu, const SpectralVec& z) {
    const int N = z.N();
    const double c = 0.5 * u * mu;
    SpectralVec out(N);
    for (int k = -N; k <= N; ++k) {
        Complex v = Complex(0.0, -static_cast<double>(k)) * z[k];
        if (k > -N) v += c * z[k - 1];
        if (k < N) v -= c * z[k + 1];
        out[k] = v;
    }
    return out;
}

CMatrix generator_matrix(double u, double mu, int N) {
    const Eigen::Index n = 2 * N + 1;
    const double c = 0.5 * u * mu;
    CMatrix m = CMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        m(i, i) = Complex(0.0, -static_cast<double>(i - N));
        if (i > 0) m(i, i - 1) = c;
        if (i + 1 < n) m(i, i + 1) = -c;
    }
    return m;
}

CMatrix assemble_Aop(double u, double mu, double alpha, const SpectralVec& zeta) {
    CMatrix m = generator_matrix(u, mu, zeta.N());
    m.noalias() -= alpha * zeta.coeffs() * zeta.coeffs().adjoint();
    return m;
}

Complex output_h(const OutputSpec& spec, const Vector& x) {
    if (x.size() != 2) throw ShapeError("output_h: x must be planar");
    const double r = x.norm();
    switch (spec.kind) {
        case OutputKind::NormSq: return 0.5 * r * r;
        case OutputKind::J0Radial: return special::bessel_j(0, spec.mu * r) - 1.0;
        case OutputKind::Norm: return r;
        case OutputKind::J2Cos2Theta: {
            const double theta = std::atan2(x(1), x(0));
            return special::bessel_j(2, spec.mu * r) * std::cos(2.0 * theta);
        }
        case OutputKind::BesselSeries: {
            const double theta = std::atan2(x(1), x(0));
            Complex acc = 0.0;
            for (const auto& [k, c] : spec.coeffs) {
                acc += c * special::bessel_j(k, spec.mu * r) * std::polar(1.0, -k * theta);
            }
            return acc;
        }
    }
    throw std::logic_error("output_h: unhandled kind");
}

Complex frak_h(const OutputSpec& spec, Complex y) {
    switch (spec.kind) {
        case OutputKind::NormSq:
            if (y.real() < 0.0) throw DomainError("frak_h: y must be >= 0 for norm_sq");
            return special::bessel_j(0, spec.mu * std::sqrt(2.0 * y.real()));
        case OutputKind::J0Radial: return y + 1.0;
        case OutputKind::Norm:
            if (y.real() < 0.0) throw DomainError("frak_h: y must be >= 0 for norm");
            return special::bessel_j(0, spec.mu * y.real());
        case OutputKind::J2Cos2Theta:
        case OutputKind::BesselSeries: return y;
    }
    throw std::logic_error("frak_h: unhandled kind");
}

SpectralVec output_zeta(const OutputSpec& spec, int N) {
    switch (spec.kind) {
        case OutputKind::NormSq:
        case OutputKind::J0Radial:
        case OutputKind::Norm:
            if (N < 0) break;
            return SpectralVec::unit(N, 0);
        case OutputKind::J2Cos2Theta: {
            if (N < 2) throw std::invalid_argument("output_zeta: j2_cos2theta needs N >= 2");
            SpectralVec z(N);
            z[2] = -0.5;
            z[-2] = -0.5;
            return z;
        }
        case OutputKind::BesselSeries: {
            SpectralVec z(N);
            bool nonzero = false;
            for (const auto& [k, c] : spec.coeffs) {
                if (std::abs(k) > N) {
                    throw std::invalid_argument("output_zeta: coefficient order exceeds N");
                }
                z[k] = std::conj(c) * i_pow(k);
                nonzero = nonzero || c != 0.0;
            }
            if (!nonzero) throw std::invalid_argument("output_zeta: bessel_series needs a non-zero c_k");
            return z;
        }
    }
    throw std::invalid_argument("output_zeta: unsupported kind");
}

double weak_norm_sq(const SpectralVec& z) {
    double acc = 0.0;
    for (int k = -z.N(); k <= z.N(); ++k) {
        acc += std::norm(z[k]) / (static_cast<double>(k) * k + 1.0);
    }
    return acc;
}

double weak_norm(const SpectralVec& z) { return std::sqrt(weak_norm_sq(z)); }

double nu_constant() {
    const double pi = std::numbers::pi;
    return std::sqrt(pi / std::tanh(pi));
}

RadialInverse radial_inverse(double a, double j) {
    const auto& zeros = special::find_zeros();
    if (!(j > 0.0 && j < zeros.j1)) throw DomainError("radial_inverse: j must lie in (0, j1)");
    if (a <= 0.0) return {0.0, 2.0, InverseRegion::Origin};
    const double a0 = special::bessel_j(1, j);
    const double a1 = special::bessel_j(1, zeros.j1);
    if (a <= a0) {
        const double r = special::inv_j1(a, j);
        return {r, 1.0 / special::bessel_j_prime(1, r), InverseRegion::Core};
    }
    if (a >= a1) return {zeros.j1, 0.0, InverseRegion::Clamped};
    const double h = a1 - a0;
    const double t = (a - a0) / h;
    const double m0 = 1.0 / special::bessel_j_prime(1, j);
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double radius = (2 * t3 - 3 * t2 + 1) * j + (t3 - 2 * t2 + t) * h * m0 +
                          (-2 * t3 + 3 * t2) * zeros.j1;
    const double slope =
        ((6 * t2 - 6 * t) * j + (3 * t2 - 4 * t + 1) * h * m0 + (-6 * t2 + 6 * t) * zeros.j1) / h;
    return {radius, slope, InverseRegion::Blend};
}

InverseResult frak_f_detail(Complex zeta, double mu, double j) {
    const double a = std::abs(zeta);
    const auto rad = radial_inverse(a, j);
    if (rad.region == InverseRegion::Origin) return {Vector::Zero(2), rad.region};
    const Complex w = Complex(0.0, 1.0) * std::conj(zeta) / a * (rad.radius / mu);
    Vector x(2);
    x << w.real(), w.imag();
    return {x, rad.region};
}

Vector frak_f(Complex zeta, double mu, double j) { return frak_f_detail(zeta, mu, j).x; }

InverseResult pi_spec_detail(const SpectralVec& z, double mu, double j) {
    if (z.N() < 1) throw std::invalid_argument("pi_spec: N must be >= 1");
    return frak_f_detail(z[1], mu, j);
}

Vector pi_spec(const SpectralVec& z, double mu, double j) { return pi_spec_detail(z, mu, j).x; }

double sample_hold_feedback(const SpectralVec& zhat, const SpectralParams& p) {
    const Vector xhat = pi_spec(zhat, p.mu, p.j_value());
    return p.K(xhat) + p.delta * weak_norm_sq(zhat - SpectralVec::unit(zhat.N(), 0));
}

double lipschitz_f(double mu, double j, double max_abs, int samples) {
    const double a1 = special::bessel_j(1, special::find_zeros().j1);
    const double top = std::min(max_abs, a1);
    double best = 2.0;  // limit of r / J1(r) as r -> 0
    for (int i = 1; i <= samples; ++i) {
        const double a = top * static_cast<double>(i) / samples;
        const auto rad = radial_inverse(a, j);
        best = std::max({best, std::fabs(rad.slope), rad.radius / a});
    }
    return best / mu;
}

}  // namespace unobs::spectral
