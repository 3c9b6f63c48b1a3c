#pragma once

namespace unobs::special {

/// First positive zeros used throughout: j1 is the first zero of J_1', j0 the first zero of J_0.
struct BesselZeros {
    double j1;
    double j0;
};

/// Largest |r| accepted by the Bessel routines.
inline constexpr double kBesselArgLimit = 50.0;

/// J_k(r) for integer k (negative orders allowed) and |r| < 50.
///
/// Ascending power series (accumulated in long double) for |r| <= 12, Miller
/// backward recurrence normalised by J_0 + 2 sum J_2m = 1 above. Absolute error
/// is below 1e-13 on the whole range. Throws DomainError for |r| >= 50.
double bessel_j(int k, double r);

/// J_k'(r) = (J_{k-1}(r) - J_{k+1}(r)) / 2.
double bessel_j_prime(int k, double r);

/// j1 and j0 located by bisection on hard-coded sign brackets; computed once.
const BesselZeros& find_zeros();

/// Inverse of J_1 restricted to [0, cap], 0 < cap <= j1.
///
/// Returns the unique r in [0, cap] with J_1(r) = y. Throws DomainError when
/// cap is outside (0, j1] or y is outside [0, J_1(cap)].
double inv_j1(double y, double cap);
double inv_j1(double y);

}  // namespace unobs::special
