#include "unobs/finite_embedding.hpp"

#include <cmath>
#include <stdexcept>

#include "unobs/errors.hpp"

namespace unobs::finite {
namespace {

void check_plant(const PlantSpec& plant) {
    if (plant.A.rows() != plant.A.cols() || plant.b.size() != plant.A.rows()) {
        throw ShapeError("plant: A must be n x n and b of length n");
    }
}

}  // namespace

PlantSpec rotation_plant() {
    PlantSpec p;
    p.A.resize(2, 2);
    p.A << 0.0, -1.0, 1.0, 0.0;
    p.b.resize(2);
    p.b << 0.0, 1.0;
    return p;
}

Vector tau_fin(const Vector& x) {
    Vector z(x.size() + 1);
    z.head(x.size()) = x;
    z(x.size()) = 0.5 * x.squaredNorm();
    return z;
}

Vector pi_fin(const Vector& z) {
    if (z.size() < 1) throw ShapeError("pi_fin: empty vector");
    return z.head(z.size() - 1);
}

EmbeddedMatrices assemble_embedded(double u, double alpha, const PlantSpec& plant) {
    check_plant(plant);
    const auto n = plant.n();
    if ((plant.A + plant.A.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw std::invalid_argument("assemble_embedded: A must be skew-symmetric");
    }
    EmbeddedMatrices m;
    m.A_u = Matrix::Zero(n + 1, n + 1);
    m.A_u.topLeftCorner(n, n) = plant.A;
    m.A_u.block(n, 0, 1, n) = u * plant.b.transpose();
    m.B = Vector::Zero(n + 1);
    m.B.head(n) = plant.b;
    m.C = RowVector::Zero(n + 1);
    m.C(n) = 1.0;
    m.L.resize(n + 1);
    m.L.head(n) = plant.b * u;
    m.L(n) = alpha;
    return m;
}

double lambda_delta(const Vector& zhat, const GainMatrix& K, double delta) {
    const auto n = K.size();
    if (zhat.size() != n + 1) throw ShapeError("lambda_delta: zhat must have n+1 entries");
    return K.K.dot(zhat.head(n)) + delta * zhat(n);
}

void closed_loop_rhs_flat(const PlantSpec& plant, const FinParams& p, const Vector& s, Vector& ds) {
    const auto n = plant.n();
    const auto x = s.head(n);
    const auto zx = s.segment(n, n);
    const double zy = s(2 * n);
    const double u = p.K.K.dot(zx) + p.delta * zy;
    const double innov = zy - 0.5 * x.squaredNorm();
    ds.resize(2 * n + 1);
    ds.head(n) = plant.A * x + plant.b * u;
    ds.segment(n, n) = plant.A * zx + plant.b * (u * (1.0 - innov));
    ds(2 * n) = u * plant.b.dot(zx) - p.alpha * innov;
}

FinLoopState closed_loop_rhs(const FinLoopState& s, const FinParams& p, const PlantSpec& plant) {
    check_plant(plant);
    const auto n = plant.n();
    if (s.x.size() != n || s.zhat.size() != n + 1 || p.K.size() != n) {
        throw ShapeError("closed_loop_rhs: inconsistent dimensions");
    }
    Vector flat(2 * n + 1);
    flat << s.x, s.zhat;
    Vector d;
    closed_loop_rhs_flat(plant, p, flat, d);
    return FinLoopState{d.head(n), d.tail(n + 1)};
}

double delta0_bound(const GainMatrix& K, double rho, const PlantSpec& plant) {
    check_plant(plant);
    if (!(rho > 0.0)) throw std::invalid_argument("delta0_bound: rho must be positive");
    const auto n = plant.n();
    const Matrix f = plant.A + plant.b * K.K;
    const Matrix p = linalg::solve_lyapunov(f, 2.0 * Matrix::Identity(n, n));
    return 1.0 / (rho * (p * plant.b).norm());
}

Matrix build_Q(const GainMatrix& K, const Matrix& A, double delta, double alpha) {
    if (A.rows() != A.cols() || K.size() != A.rows()) {
        throw ShapeError("build_Q: K must be 1 x n and A n x n");
    }
    const auto n = A.rows();
    if (!A.fullPivLu().isInvertible()) throw std::invalid_argument("build_Q: A is singular");
    Matrix q = Matrix::Zero(n + 2, n + 2);
    RowVector row = K.K;
    q.block(0, 0, 1, n) = row;
    q(0, n) = delta;
    double power = 1.0;
    for (Eigen::Index k = 1; k <= n + 1; ++k) {
        row = row * A;
        power *= -alpha;
        q.block(k, 0, 1, n) = row;
        q(k, n + 1) = delta * power;
    }
    return q;
}

}  // namespace unobs::finite
