#include "unobs/linalg.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "unobs/errors.hpp"

namespace unobs::linalg {
namespace {

constexpr double kExpmNormLimit = 1e4;

// Backward-error bounds for the diagonal Padé approximants of degree 3, 5, 7, 9, 13.
constexpr std::array<double, 5> kTheta = {1.495585217958292e-2, 2.539398330063230e-1,
                                          9.504178996162932e-1, 2.097847961257068e0,
                                          5.371920351148152e0};

template <typename Mat>
Mat pade_low(const Mat& a, int degree) {
    static constexpr std::array<double, 4> b3 = {120.0, 60.0, 12.0, 1.0};
    static constexpr std::array<double, 6> b5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
    static constexpr std::array<double, 8> b7 = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                                 25200.0,    1512.0,    56.0,      1.0};
    static constexpr std::array<double, 10> b9 = {17643225600.0, 8821612800.0, 2075673600.0,
                                                  302702400.0,   30270240.0,   2162160.0,
                                                  110880.0,      3960.0,       90.0,
                                                  1.0};
    const double* b = nullptr;
    switch (degree) {
        case 3: b = b3.data(); break;
        case 5: b = b5.data(); break;
        case 7: b = b7.data(); break;
        default: b = b9.data(); break;
    }
    const auto n = a.rows();
    const Mat ident = Mat::Identity(n, n);
    const Mat a2 = a * a;
    Mat power = ident;  // a^{2i}
    Mat u_inner = b[1] * ident;
    Mat v = b[0] * ident;
    for (int i = 1; 2 * i <= degree; ++i) {
        power = power * a2;
        v += b[2 * i] * power;
        u_inner += b[2 * i + 1] * power;
    }
    const Mat u = a * u_inner;
    return (v - u).partialPivLu().solve(v + u);
}

template <typename Mat>
Mat pade13(const Mat& a) {
    static constexpr std::array<double, 14> b = {
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
        129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
        1323241920.0,        40840800.0,          960960.0,           16380.0,
        182.0,               1.0};
    const auto n = a.rows();
    const Mat ident = Mat::Identity(n, n);
    const Mat a2 = a * a;
    const Mat a4 = a2 * a2;
    const Mat a6 = a4 * a2;
    const Mat u_hi = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2);
    const Mat u = a * (u_hi + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident);
    const Mat v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 +
                  b[2] * a2 + b[0] * ident;
    return (v - u).partialPivLu().solve(v + u);
}

template <typename Mat>
Mat expm_impl(const Mat& m, double t) {
    if (m.rows() != m.cols()) {
        throw ShapeError("expm: matrix must be square");
    }
    const Mat a = m * t;
    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    if (!std::isfinite(norm1) || norm1 > kExpmNormLimit) {
        throw OverflowError("expm: |t| * ||M|| exceeds 1e4");
    }
    if (a.rows() == 0) return a;

    constexpr std::array<int, 4> low_degrees = {3, 5, 7, 9};
    for (std::size_t i = 0; i < low_degrees.size(); ++i) {
        if (norm1 <= kTheta[i]) return pade_low(a, low_degrees[i]);
    }
    int squarings = 0;
    if (norm1 > kTheta[4]) {
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / kTheta[4])));
    }
    Mat r = pade13(Mat(a / std::ldexp(1.0, squarings)));
    for (int i = 0; i < squarings; ++i) r = r * r;
    return r;
}

}  // namespace

Matrix expm(const Matrix& m, double t) { return expm_impl(m, t); }

CMatrix expm(const CMatrix& m, double t) { return expm_impl(m, t); }

std::vector<Complex> eigenvalues(const Matrix& m) {
    if (m.rows() != m.cols()) throw ShapeError("eigenvalues: matrix must be square");
    std::vector<Complex> out;
    if (m.rows() == 0) return out;
    Eigen::EigenSolver<Matrix> solver(m, false);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("eigenvalues: QR iteration did not converge");
    }
    const auto& ev = solver.eigenvalues();
    out.assign(ev.data(), ev.data() + ev.size());
    return out;
}

bool is_hurwitz(const Matrix& m) {
    for (const auto& lambda : eigenvalues(m)) {
        if (!(lambda.real() < -1e-12)) return false;
    }
    return true;
}

Matrix solve_lyapunov(const Matrix& f, const Matrix& qr) {
    if (f.rows() != f.cols()) throw ShapeError("solve_lyapunov: F must be square");
    if (qr.rows() != f.rows() || qr.cols() != f.cols()) {
        throw ShapeError("solve_lyapunov: Qr must match F");
    }
    if (f.rows() > 8) throw ShapeError("solve_lyapunov: Kronecker solve limited to n <= 8");
    if ((qr - qr.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, qr.norm())) {
        throw std::invalid_argument("solve_lyapunov: Qr must be symmetric");
    }
    if (!is_hurwitz(f)) throw NotHurwitzError("solve_lyapunov: F is not Hurwitz");

    const auto n = f.rows();
    const Matrix ident = Matrix::Identity(n, n);
    const Matrix ft = f.transpose();
    // vec(F'P) = (I kron F') vec P, vec(PF) = (F' kron I) vec P, column-major vec.
    Matrix big = Matrix::Zero(n * n, n * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            big.block(i * n, j * n, n, n) += ident(i, j) * ft;
            big.block(i * n, j * n, n, n) += ft(i, j) * ident;
        }
    }
    const Vector rhs = -Eigen::Map<const Vector>(Matrix(qr).data(), n * n);
    const Vector sol = big.fullPivLu().solve(rhs);
    Matrix p = Eigen::Map<const Matrix>(sol.data(), n, n);
    return 0.5 * (p + p.transpose());
}

int numerical_rank(const Matrix& m, double tol) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& s = svd.singularValues();
    const double cut = tol * std::max(1.0, s(0));
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > cut) ++rank;
    }
    return rank;
}

KalmanResult kalman_matrix(const Matrix& c_or_b, const Matrix& a, KalmanMode mode) {
    if (a.rows() != a.cols()) throw ShapeError("kalman_matrix: A must be square");
    const auto n = a.rows();
    KalmanResult out;
    if (mode == KalmanMode::Observability) {
        if (c_or_b.cols() != n) throw ShapeError("kalman_matrix: C must have n columns");
        const auto p = c_or_b.rows();
        out.matrix.resize(p * n, n);
        Matrix block = c_or_b;
        for (Eigen::Index i = 0; i < n; ++i) {
            out.matrix.middleRows(i * p, p) = block;
            block = block * a;
        }
    } else {
        if (c_or_b.rows() != n) throw ShapeError("kalman_matrix: b must have n rows");
        const auto p = c_or_b.cols();
        out.matrix.resize(n, p * n);
        Matrix block = c_or_b;
        for (Eigen::Index i = 0; i < n; ++i) {
            out.matrix.middleCols(i * p, p) = block;
            block = a * block;
        }
    }
    out.rank = numerical_rank(out.matrix);
    return out;
}

GainMatrix place_poles(const Matrix& a, const Vector& b, const std::vector<Complex>& poles) {
    if (a.rows() != a.cols() || b.size() != a.rows()) {
        throw ShapeError("place_poles: A must be n x n and b of length n");
    }
    const auto n = a.rows();
    if (static_cast<Eigen::Index>(poles.size()) != n) {
        throw std::invalid_argument("place_poles: need exactly n poles");
    }
    std::vector<bool> used(poles.size(), false);
    for (std::size_t i = 0; i < poles.size(); ++i) {
        if (used[i]) continue;
        used[i] = true;
        const double scale = std::max(1.0, std::abs(poles[i]));
        if (std::fabs(poles[i].imag()) <= 1e-12 * scale) continue;
        bool matched = false;
        for (std::size_t j = 0; j < poles.size(); ++j) {
            if (!used[j] && std::abs(poles[j] - std::conj(poles[i])) <= 1e-9 * scale) {
                used[j] = true;
                matched = true;
                break;
            }
        }
        if (!matched) {
            throw std::invalid_argument("place_poles: pole set is not closed under conjugation");
        }
    }

    const auto ctrb = kalman_matrix(b, a, KalmanMode::Controllability);
    if (ctrb.rank < n) throw UncontrollableError("place_poles: (A, b) is not controllable");

    // Desired characteristic polynomial, highest degree first.
    std::vector<Complex> coeffs = {Complex(1.0, 0.0)};
    for (const auto& p : poles) {
        std::vector<Complex> next(coeffs.size() + 1, Complex(0.0, 0.0));
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            next[i] += coeffs[i];
            next[i + 1] -= p * coeffs[i];
        }
        coeffs = std::move(next);
    }
    Matrix phi = Matrix::Zero(n, n);
    for (const auto& c : coeffs) {
        phi = phi * a + c.real() * Matrix::Identity(n, n);
    }
    RowVector last = RowVector::Zero(n);
    last(n - 1) = 1.0;
    const RowVector ackermann =
        last * ctrb.matrix.fullPivLu().inverse() * phi;  // A - b * ackermann has the poles
    return GainMatrix{-ackermann};
}

std::vector<double> characteristic_polynomial(const Matrix& a) {
    if (a.rows() != a.cols()) throw ShapeError("characteristic_polynomial: A must be square");
    const auto n = a.rows();
    std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
    c[static_cast<std::size_t>(n)] = 1.0;
    Matrix m = Matrix::Zero(n, n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        m = a * m + c[static_cast<std::size_t>(n - k + 1)] * Matrix::Identity(n, n);
        c[static_cast<std::size_t>(n - k)] = -(a * m).trace() / static_cast<double>(k);
    }
    return c;
}

double polyval(const std::vector<double>& coeffs, double x) {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
}

}  // namespace unobs::linalg
