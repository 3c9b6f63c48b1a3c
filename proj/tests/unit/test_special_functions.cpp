#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "bessel_oracle.hpp"
#include "unobs/errors.hpp"
#include "unobs/special_functions.hpp"

using Catch::Approx;
using unobs::special::bessel_j;
using unobs::special::bessel_j_prime;
using unobs::special::find_zeros;
using unobs::special::inv_j1;

TEST_CASE("bessel_j at the origin", "[bessel]") {
    CHECK(bessel_j(0, 0.0) == 1.0);
    CHECK(bessel_j(1, 0.0) == 0.0);
    CHECK(bessel_j(-3, 0.0) == 0.0);
}

TEST_CASE("bessel_j(1, 1) matches the series oracle", "[bessel]") {
    const double want = oracle::bessel(1, 1.0);
    CHECK(std::fabs(bessel_j(1, 1.0) - want) < 1e-15);
    CHECK(std::fabs(want - 0.4400505857449335) < 1e-15);
}

TEST_CASE("bessel_j agrees with two independent oracles", "[bessel]") {
    double worst_series = 0.0;
    double worst_integral = 0.0;
    for (int k = -10; k <= 10; ++k) {
        for (int i = 0; i <= 100; ++i) {
            const double r = 0.05 * i;
            worst_series = std::max(worst_series, std::fabs(bessel_j(k, r) - oracle::bessel(k, r)));
            worst_integral =
                std::max(worst_integral, std::fabs(bessel_j(k, r) - oracle::bessel_integral(k, r)));
        }
    }
    CHECK(worst_series < 1e-13);
    CHECK(worst_integral < 1e-13);
}

TEST_CASE("bessel_j on the recurrence branch", "[bessel]") {
    double worst = 0.0;
    for (int k : {0, 1, 2, 5, 13, 30}) {
        for (double r : {12.5, 17.0, 23.3, 31.0, 40.0, 49.9}) {
            worst = std::max(worst, std::fabs(bessel_j(k, r) - oracle::bessel_integral(k, r, 800)));
            worst = std::max(worst, std::fabs(bessel_j(k, r) - std::cyl_bessel_j(static_cast<double>(k), r)));
        }
    }
    CHECK(worst < 1e-13);
}

TEST_CASE("bessel_j rejects |r| >= 50", "[bessel]") {
    CHECK_THROWS_AS(bessel_j(0, 50.0), unobs::DomainError);
    CHECK_THROWS_AS(bessel_j(2, -51.0), unobs::DomainError);
    CHECK_THROWS_AS(bessel_j_prime(1, 60.0), unobs::DomainError);
    CHECK_THROWS_AS(bessel_j(0, std::nan("")), unobs::DomainError);
}

TEST_CASE("negative orders and arguments obey the symmetries", "[bessel][property]") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> rd(-20.0, 20.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double r = rd(rng);
        const int k = static_cast<int>(trial % 15);
        const double sign = (k % 2) ? -1.0 : 1.0;
        CHECK(bessel_j(-k, r) == sign * bessel_j(k, r));
        CHECK(bessel_j(k, -r) == sign * bessel_j(k, r));
    }
}

TEST_CASE("bessel_j_prime", "[bessel]") {
    CHECK(bessel_j_prime(1, 0.0) == Approx(0.5).margin(1e-15));
    CHECK(bessel_j_prime(0, 0.0) == 0.0);
    CHECK(std::fabs(bessel_j_prime(1, find_zeros().j1)) < 1e-12);
    const double h = 1e-5;
    for (int k = -4; k <= 4; ++k) {
        for (double r : {0.3, 1.1, 2.7, 8.0, 15.0}) {
            const double fd = (bessel_j(k, r + h) - bessel_j(k, r - h)) / (2 * h);
            CHECK(std::fabs(bessel_j_prime(k, r) - fd) < 1e-8);
        }
    }
}

TEST_CASE("find_zeros", "[bessel]") {
    const auto& z = find_zeros();
    CHECK(z.j1 == Approx(1.8411837813406593).margin(1e-13));
    CHECK(z.j0 == Approx(2.404825557695773).margin(1e-13));
    CHECK(z.j1 < z.j0);
    CHECK(std::fabs(bessel_j_prime(1, z.j1)) < 1e-12);
    CHECK(std::fabs(bessel_j(0, z.j0)) < 1e-12);
    // the oracle sees the same zeros
    CHECK(std::fabs(oracle::bessel(0, z.j0)) < 1e-12);
    CHECK(std::fabs(0.5 * (oracle::bessel(0, z.j1) - oracle::bessel(2, z.j1))) < 1e-12);
}

TEST_CASE("inv_j1", "[bessel]") {
    const double j1 = find_zeros().j1;
    CHECK(inv_j1(0.0, j1) == 0.0);
    CHECK(inv_j1(bessel_j(1, 1.0), j1) == Approx(1.0).margin(1e-10));
    CHECK_THROWS_AS(inv_j1(bessel_j(1, j1) + 0.1, j1), unobs::DomainError);
    CHECK_THROWS_AS(inv_j1(0.1, j1 + 0.01), unobs::DomainError);
    CHECK_THROWS_AS(inv_j1(-0.01), unobs::DomainError);
    CHECK_THROWS_AS(inv_j1(0.3, 0.5), unobs::DomainError);  // J1(0.5) < 0.3
}

TEST_CASE("normalisation identity sum J_k(r)^2 = 1", "[bessel][property]") {
    for (double r : {0.1, 0.7, 1.3, 2.0}) {
        long double acc = 0.0L;
        for (int k = -20; k <= 20; ++k) acc += static_cast<long double>(bessel_j(k, r)) * bessel_j(k, r);
        CHECK(std::fabs(static_cast<double>(acc) - 1.0) < 1e-12);
    }
}

TEST_CASE("tail bound |J_k(r)| <= (|r|/2)^k / k!", "[bessel][property]") {
    for (int k = 0; k <= 15; ++k) {
        for (int i = 0; i <= 60; ++i) {
            const double r = 0.1 * i;
            const double bound = std::pow(r / 2.0, k) / std::tgamma(k + 1.0);
            CHECK(std::fabs(bessel_j(k, r)) <= bound * (1.0 + 1e-12) + 1e-300);
        }
    }
}

TEST_CASE("J1 increasing on [0, j1] and inv_j1 inverts it", "[bessel][property]") {
    const double j1 = find_zeros().j1;
    double prev = -1.0;
    double worst = 0.0;
    double prev_inv = -1.0;
    for (int i = 0; i <= 500; ++i) {
        const double r = j1 * i / 500.0;
        const double y = bessel_j(1, r);
        CHECK(y > prev);
        prev = y;
        const double back = inv_j1(y, j1);
        CHECK(back >= prev_inv);
        prev_inv = back;
        if (i < 500) worst = std::max(worst, std::fabs(back - r));
    }
    CHECK(worst < 1e-10);
}
