#include "unobs/special_functions.hpp"

#include <cmath>
#include <cstdlib>
#include <functional>
#include <string>

#include "unobs/errors.hpp"

namespace unobs::special {
namespace {

constexpr double kSeriesLimit = 12.0;

void check_argument(double r) {
    if (!std::isfinite(r) || std::fabs(r) >= kBesselArgLimit) {
        throw DomainError("bessel_j: |r| must be < 50, got " + std::to_string(r));
    }
}

// J_n(r) for n >= 0, r >= 0 by the ascending series.
double series_nonneg(int n, double r) {
    const long double half = static_cast<long double>(r) / 2.0L;
    long double term = 1.0L;
    for (int i = 1; i <= n; ++i) {
        term *= half / static_cast<long double>(i);
    }
    if (term == 0.0L) return 0.0;
    const long double q = half * half;
    long double sum = term;
    for (int m = 1; m < 500; ++m) {
        term *= -q / (static_cast<long double>(m) * static_cast<long double>(m + n));
        sum += term;
        if (std::fabs(term) <= 1e-21L * std::fabs(sum)) break;
    }
    return static_cast<double>(sum);
}

// J_n(r) for n >= 0, 12 < r < 50 by Miller's backward recurrence.
double miller_nonneg(int n, double r) {
    const double scale = std::max(static_cast<double>(n), r);
    int start = static_cast<int>(scale + 30.0 + 10.0 * std::sqrt(scale));
    if (start % 2 != 0) ++start;

    double next = 0.0;  // J_{m+1}
    double curr = 1e-300;  // J_m
    double wanted = 0.0;
    double norm = 0.0;
    for (int m = start; m >= 1; --m) {
        const double prev = 2.0 * m / r * curr - next;  // J_{m-1}
        next = curr;
        curr = prev;
        if (m - 1 == n) wanted = curr;
        if ((m - 1) % 2 == 0 && m - 1 > 0) norm += 2.0 * curr;
        if (std::fabs(curr) > 1e250) {
            next *= 1e-250;
            curr *= 1e-250;
            wanted *= 1e-250;
            norm *= 1e-250;
        }
    }
    norm += curr;  // J_0 term
    if (n == 0) wanted = curr;
    return wanted / norm;
}

double bessel_nonneg(int n, double r) {
    return r <= kSeriesLimit ? series_nonneg(n, r) : miller_nonneg(n, r);
}

double bisect(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo);
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = f(mid);
        if (fmid == 0.0) return mid;
        if ((fmid < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

BesselZeros compute_zeros() {
    BesselZeros z{};
    z.j1 = bisect([](double r) { return bessel_j_prime(1, r); }, 1.5, 2.0);
    z.j0 = bisect([](double r) { return bessel_j(0, r); }, 2.0, 3.0);
    if (!(0.0 < z.j1 && z.j1 < z.j0) || std::fabs(bessel_j_prime(1, z.j1)) > 1e-12 ||
        std::fabs(bessel_j(0, z.j0)) > 1e-12) {
        throw std::logic_error("find_zeros: postcondition violated");
    }
    return z;
}

}  // namespace

double bessel_j(int k, double r) {
    check_argument(r);
    int n = std::abs(k);
    double sign = 1.0;
    // J_{-k} = (-1)^k J_k and J_k(-r) = (-1)^k J_k(r)
    if (k < 0 && n % 2 != 0) sign = -sign;
    if (r < 0.0) {
        r = -r;
        if (n % 2 != 0) sign = -sign;
    }
    return sign * bessel_nonneg(n, r);
}

double bessel_j_prime(int k, double r) {
    return 0.5 * (bessel_j(k - 1, r) - bessel_j(k + 1, r));
}

const BesselZeros& find_zeros() {
    static const BesselZeros zeros = compute_zeros();
    return zeros;
}

double inv_j1(double y, double cap) {
    const double j1 = find_zeros().j1;
    if (!(cap > 0.0) || cap > j1) {
        throw DomainError("inv_j1: cap must lie in (0, j1]");
    }
    const double top = bessel_j(1, cap);
    constexpr double slack = 1e-15;
    if (!(y >= 0.0) || y > top + slack) {
        throw DomainError("inv_j1: y outside [0, J1(cap)]");
    }
    if (y == 0.0) return 0.0;
    if (y >= top) return cap;

    // Newton on the monotone branch, guarded by a bracket.
    double lo = 0.0;
    double hi = cap;
    double r = std::min(2.0 * y, cap);
    for (int it = 0; it < 100; ++it) {
        const double f = bessel_j(1, r) - y;
        if (f > 0.0) hi = r; else lo = r;
        const double d = bessel_j_prime(1, r);
        double next = d > 0.0 ? r - f / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::fabs(next - r) <= 1e-16 * std::max(1.0, r) || hi - lo < 1e-15) {
            r = next;
            break;
        }
        r = next;
    }
    return r;
}

double inv_j1(double y) { return inv_j1(y, find_zeros().j1); }

}  // namespace unobs::special
