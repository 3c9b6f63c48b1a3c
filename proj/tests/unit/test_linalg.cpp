#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "matrix_oracle.hpp"
#include "unobs/errors.hpp"
#include "unobs/linalg.hpp"

using Catch::Approx;
using namespace unobs;
using namespace unobs::linalg;

namespace {

Matrix rotation() {
    Matrix a(2, 2);
    a << 0, -1, 1, 0;
    return a;
}

Matrix random_matrix(std::mt19937& rng, int n, double scale) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(n, n);
    for (int i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
    return m * (scale / m.norm());
}

CMatrix random_skew_hermitian(std::mt19937& rng, int n) {
    std::normal_distribution<double> g(0.0, 1.0);
    CMatrix m(n, n);
    for (int i = 0; i < m.size(); ++i) m.data()[i] = Complex(g(rng), g(rng));
    return 0.5 * (m - m.adjoint());
}

}  // namespace

TEST_CASE("expm basics", "[expm]") {
    CHECK((expm(Matrix(Matrix::Zero(3, 3))) - Matrix::Identity(3, 3)).norm() == 0.0);
    const Matrix r = expm(rotation(), std::numbers::pi / 2);
    CHECK((r - rotation()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK_THROWS_AS(expm(Matrix(Matrix::Zero(2, 3))), ShapeError);
    CHECK_THROWS_AS(expm(Matrix(Matrix::Identity(2, 2)), 2e4), OverflowError);
}

TEST_CASE("expm of skew-Hermitian matrices is unitary", "[expm][property]") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const CMatrix m = random_skew_hermitian(rng, 5);
        const CMatrix u = expm(m, 0.7);
        CHECK((u.adjoint() * u - CMatrix::Identity(5, 5)).norm() < 1e-11);
    }
}

TEST_CASE("expm agrees with Eigen's MatrixFunctions across Pade degrees", "[expm]") {
    std::mt19937 rng(3);
    for (double scale : {1e-3, 0.1, 0.5, 1.5, 4.0, 30.0, 200.0}) {
        const Matrix m = random_matrix(rng, 6, scale);
        const Matrix want = oracle::expm_eigen(m);
        CHECK((expm(m) - want).norm() <= 1e-12 * std::max(1.0, want.norm()));
        const CMatrix c = random_skew_hermitian(rng, 7) * scale;
        const CMatrix cw = oracle::expm_eigen(c);
        CHECK((expm(c) - cw).norm() <= 1e-11 * std::max(1.0, cw.norm()));
    }
}

TEST_CASE("expm semigroup property", "[expm][property]") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        const Matrix m = random_matrix(rng, 6, 2.0);
        const double s = ud(rng), t = ud(rng);
        CHECK((expm(m, s) * expm(m, t) - expm(m, s + t)).norm() < 1e-9);
    }
}

TEST_CASE("solve_lyapunov", "[lyapunov]") {
    const Matrix p = solve_lyapunov(-Matrix::Identity(2, 2), 2.0 * Matrix::Identity(2, 2));
    CHECK((p - Matrix::Identity(2, 2)).norm() < 1e-14);
    CHECK_THROWS_AS(solve_lyapunov(Matrix::Identity(2, 2), Matrix::Identity(2, 2)), NotHurwitzError);
    CHECK_THROWS_AS(solve_lyapunov(-Matrix::Identity(2, 2), Matrix::Identity(3, 3)), ShapeError);

    Vector b(2);
    b << 0, 1;
    const auto K = place_poles(rotation(), b, {Complex(-1, 0), Complex(-2, 0)});
    const Matrix f = rotation() + b * K.K;
    const Matrix q = 2.0 * Matrix::Identity(2, 2);
    const Matrix pl = solve_lyapunov(f, q);
    CHECK((f.transpose() * pl + pl * f + q).norm() < 1e-10);
    CHECK((pl - oracle::lyapunov_kron(f, q)).norm() < 1e-12);
    CHECK((pl - oracle::lyapunov_integral(f, q, 60.0, 30000)).norm() < 1e-9);
}

TEST_CASE("solve_lyapunov returns symmetric positive definite P", "[lyapunov][property]") {
    std::mt19937 rng(9);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 2 + trial % 4;
        Matrix f = random_matrix(rng, n, 3.0);
        double shift = 0.0;
        for (const auto& ev : eigenvalues(f)) shift = std::max(shift, ev.real());
        f -= (shift + 0.5) * Matrix::Identity(n, n);
        const Matrix p = solve_lyapunov(f, 2.0 * Matrix::Identity(n, n));
        CHECK((p - p.transpose()).cwiseAbs().maxCoeff() < 1e-12);
        Eigen::SelfAdjointEigenSolver<Matrix> es(p);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
        CHECK((f.transpose() * p + p * f + 2.0 * Matrix::Identity(n, n)).norm() < 1e-10);
    }
}

TEST_CASE("place_poles", "[poles]") {
    Vector b(2);
    b << 0, 1;
    const auto K = place_poles(rotation(), b, {Complex(-1, 0), Complex(-1, 0)});
    const auto want = oracle::poly_from_roots({-1.0, -1.0});
    const auto got = characteristic_polynomial(rotation() + b * K.K);
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::fabs(got[i] - want[i]) < 1e-8);

    const auto k1 = place_poles(Matrix::Zero(1, 1), Vector::Ones(1), {Complex(-3, 0)});
    CHECK(k1.K(0) == Approx(-3.0).margin(1e-14));

    Vector b2(2);
    b2 << 1, 0;
    CHECK_THROWS_AS(place_poles(Matrix::Identity(2, 2), b2, {Complex(-1, 0), Complex(-2, 0)}),
                    UncontrollableError);
    CHECK_THROWS_AS(place_poles(rotation(), b, {Complex(-1, 1), Complex(-1, 2)}), std::invalid_argument);
    CHECK_THROWS_AS(place_poles(rotation(), b, {Complex(-1, 0)}), std::invalid_argument);
}

TEST_CASE("place_poles then is_hurwitz for random stable pole sets", "[poles][property]") {
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> re(-3.0, -0.1), im(0.0, 2.0);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + 2 * (trial % 2);
        Matrix a = random_matrix(rng, n, 2.0);
        Vector b(n);
        for (int i = 0; i < n; ++i) b(i) = g(rng);
        std::vector<Complex> poles;
        for (int i = 0; i < n / 2; ++i) {
            const Complex p(re(rng), im(rng));
            poles.push_back(p);
            poles.push_back(std::conj(p));
        }
        const auto K = place_poles(a, b, poles);
        const Matrix f = a + b * K.K;
        CHECK(is_hurwitz(f));
        const auto got = characteristic_polynomial(f);
        const auto want = oracle::poly_from_roots(poles);
        for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::fabs(got[i] - want[i]) < 1e-6 * (1 + std::fabs(want[i])));
    }
}

TEST_CASE("kalman_matrix", "[kalman]") {
    Matrix c(1, 2);
    c << 1, 0;
    auto obs = kalman_matrix(c, rotation(), KalmanMode::Observability);
    Matrix want(2, 2);
    want << 1, 0, 0, -1;
    CHECK(obs.matrix == want);
    CHECK(obs.rank == 2);

    Matrix b(2, 1);
    b << 0, 1;
    auto ctrb = kalman_matrix(b, rotation(), KalmanMode::Controllability);
    Matrix want_c(2, 2);
    want_c << 0, -1, 1, 0;
    CHECK(ctrb.matrix == want_c);
    CHECK(ctrb.rank == 2);

    CHECK(kalman_matrix(c, Matrix::Identity(2, 2), KalmanMode::Observability).rank == 1);
    CHECK_THROWS_AS(kalman_matrix(Matrix::Ones(1, 3), rotation(), KalmanMode::Observability), ShapeError);
}

TEST_CASE("is_hurwitz", "[hurwitz]") {
    CHECK(is_hurwitz(-Matrix::Identity(3, 3)));
    CHECK_FALSE(is_hurwitz(rotation()));
    Vector b(2);
    b << 0, 1;
    const auto K = place_poles(rotation(), b, {Complex(-1, 0), Complex(-2, 0)});
    CHECK(is_hurwitz(rotation() + b * K.K));
    CHECK_THROWS_AS(is_hurwitz(Matrix::Zero(2, 3)), ShapeError);
}

TEST_CASE("characteristic polynomial against eigenvalue product", "[charpoly][property]") {
    std::mt19937 rng(2);
    for (int n = 1; n <= 6; ++n) {
        const Matrix a = random_matrix(rng, n, 3.0);
        const auto got = characteristic_polynomial(a);
        const auto want = oracle::poly_from_roots(eigenvalues(a));
        for (int i = 0; i <= n; ++i) CHECK(std::fabs(got[i] - want[i]) < 1e-10);
        CHECK(std::fabs(polyval(got, 0.3) - (0.3 * Matrix::Identity(n, n) - a).determinant()) < 1e-10);
    }
}
