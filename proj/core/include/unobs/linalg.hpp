#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace unobs {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;
using RowVector = Eigen::RowVectorXd;

/// Feedback gain K (1 x n) for u = K x.
struct GainMatrix {
    RowVector K;

    Eigen::Index size() const { return K.size(); }
    double norm() const { return K.norm(); }
    double operator()(const Vector& x) const { return K.dot(x); }
};

}  // namespace unobs

namespace unobs::linalg {

/// e^{tM} by scaling and squaring with diagonal Padé approximants (Higham 2005).
///
/// Throws ShapeError for a non-square M and OverflowError when |t| * ||M||_1 > 1e4.
Matrix expm(const Matrix& m, double t = 1.0);
CMatrix expm(const CMatrix& m, double t = 1.0);

/// Solves F' P + P F = -Qr for symmetric positive definite P (Kronecker form, n <= 8).
/// Throws NotHurwitzError if F is not Hurwitz, ShapeError on mismatched sizes.
Matrix solve_lyapunov(const Matrix& f, const Matrix& qr);

/// Ackermann pole placement for single-input (A, b): eig(A + b K) = poles.
/// Throws UncontrollableError, or std::invalid_argument for a pole set that is
/// not closed under conjugation or whose size differs from n.
GainMatrix place_poles(const Matrix& a, const Vector& b, const std::vector<Complex>& poles);

enum class KalmanMode { Observability, Controllability };

struct KalmanResult {
    Matrix matrix;
    int rank = 0;
};

/// [C; CA; ...; CA^{n-1}] or [b, Ab, ..., A^{n-1} b] with its numerical rank
/// (singular values above 1e-10 * max(1, sigma_max)).
KalmanResult kalman_matrix(const Matrix& c_or_b, const Matrix& a, KalmanMode mode);

/// Numerical rank at relative tolerance `tol`.
int numerical_rank(const Matrix& m, double tol = 1e-10);

std::vector<Complex> eigenvalues(const Matrix& m);

/// True iff every eigenvalue has real part < -1e-12.
bool is_hurwitz(const Matrix& m);

/// Coefficients c_0..c_n (c_n = 1) of det(X I - A), Faddeev-LeVerrier.
std::vector<double> characteristic_polynomial(const Matrix& a);

double polyval(const std::vector<double>& coeffs, double x);

}  // namespace unobs::linalg
