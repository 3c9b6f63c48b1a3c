#pragma once

#include "unobs/linalg.hpp"

// Finite-dimensional embedded observer for plants x' = Ax + bu with output
// y = |x|^2 / 2 and skew-symmetric A.
namespace unobs::finite {

struct PlantSpec {
    Matrix A;
    Vector b;

    Eigen::Index n() const { return A.rows(); }
};

/// The 2x2 rotation plant A = [[0,-1],[1,0]], b = (0,1).
PlantSpec rotation_plant();

struct FinParams {
    GainMatrix K;
    double delta = 0.0;
    double alpha = 10.0;
};

struct FinLoopState {
    Vector x;     // plant state, R^n
    Vector zhat;  // observer state, R^{n+1}
};

struct EmbeddedMatrices {
    Matrix A_u;     // [[A, 0], [u b', 0]]
    Vector B;       // (b, 0)
    RowVector C;    // (0, ..., 0, 1)
    Vector L;       // (b u, alpha)
};

/// (x, |x|^2 / 2)
Vector tau_fin(const Vector& x);

/// First n entries of an (n+1)-vector.
Vector pi_fin(const Vector& z);

/// Throws std::invalid_argument if plant.A is not skew-symmetric.
EmbeddedMatrices assemble_embedded(double u, double alpha, const PlantSpec& plant);

/// K zhat_{1..n} + delta zhat_{n+1}
double lambda_delta(const Vector& zhat, const GainMatrix& K, double delta);

FinLoopState closed_loop_rhs(const FinLoopState& s, const FinParams& p, const PlantSpec& plant);

/// Same vector field on the flat layout (x, zhat) of length 2n+1; used by the integrator.
void closed_loop_rhs_flat(const PlantSpec& plant, const FinParams& p, const Vector& s, Vector& ds);

/// 1 / (rho |P b|) with F'P + PF = -2I, F = A + bK. Throws NotHurwitzError.
double delta0_bound(const GainMatrix& K, double rho, const PlantSpec& plant);

/// (n+2) x (n+2) matrix with rows (K, delta, 0) and (K A^k, 0, delta (-alpha)^k), k = 1..n+1.
/// Throws std::invalid_argument if A is singular.
Matrix build_Q(const GainMatrix& K, const Matrix& A, double delta, double alpha);

}  // namespace unobs::finite
