#pragma once

#include <functional>
#include <string>
#include <vector>

#include "unobs/finite_embedding.hpp"
#include "unobs/linalg.hpp"
#include "unobs/spectral_embedding.hpp"

namespace unobs::sim {

enum class Method { Rk4Coupled, ExactLinear };

std::string to_string(Method m);
Method method_from_string(const std::string& name);

struct IntegratorConfig {
    Method method = Method::ExactLinear;
    double step = 1e-3;
    double horizon = 10.0;
    int record_every = 1;          // keep every k-th step in the recorded series
    double monotone_tol = 1e-8;    // allowed per-step increase of eps_norm
    double divergence = 1e6;

    long steps() const;  // horizon / step, throws if not (close to) an integer
};

/// Recorded series (every record_every steps, plus the final step) and run-wide diagnostics
/// evaluated on every integrator step.
struct Trajectory {
    std::vector<double> t;
    std::vector<Vector> x;
    std::vector<Vector> zhat;  // finite runs only
    std::vector<double> u;
    std::vector<double> eps_norm;
    std::vector<double> c_eps_abs;
    std::vector<double> weak_eps;  // spectral runs only

    long dissipativity_violations = 0;
    double max_eps_increase = 0.0;
    long clamp_count = 0;
    std::vector<double> clamp_times;  // first few clamp instants
    bool diverged = false;
    bool aborted = false;
    std::string diagnostic;

    Vector final_x;
    Vector final_zhat;             // finite
    spectral::SpectralVec final_zhat_spec;  // spectral

    std::size_t size() const { return t.size(); }
};

using Rhs = std::function<void(double t, const Vector& s, Vector& ds)>;
/// Called after every step with the new state; return false to stop early.
using StepHook = std::function<bool(long step, double t, const Vector& s)>;

struct Rk4Result {
    std::vector<double> t;
    std::vector<Vector> s;
    bool aborted = false;
    std::string diagnostic;
};

/// Classical fixed-step RK4. Stops with aborted = true on a non-finite state.
Rk4Result rk4_integrate(const Rhs& rhs, const Vector& s0, const IntegratorConfig& cfg,
                        const StepHook& hook = nullptr);

Trajectory run_finite_loop(const finite::PlantSpec& plant, const finite::FinParams& p,
                           const Vector& x0, const Vector& zhat0, const IntegratorConfig& cfg);

/// exp(t (A(u) - alpha zeta zeta^*)) v using the tridiagonal plus rank-one structure
/// (Taylor series on sub-intervals of norm <= 1/2, summed to machine precision).
CVector exp_action(double u, double mu, double alpha, const spectral::SpectralVec& zeta, double t,
                   const CVector& v);

/// Plant flow over time t with frozen u: R(t) x + u (-(1 - cos t), sin t).
Vector rotation_flow(const Vector& x, double u, double t);

/// Sample-and-hold spectral loop on the rotation plant with b = (0, 1). Delta / step must be an
/// integer. zhat(0) = tau(xhat0).
Trajectory run_spectral_loop(const spectral::OutputSpec& spec, const spectral::SpectralParams& p,
                             const Vector& x0, const Vector& xhat0, const IntegratorConfig& cfg);

/// max_t | ||z(t)|| - ||z(0)|| | for z(t) = exp(t A(u)) z0 sampled every `step` up to `horizon`.
double unitary_drift(const spectral::SpectralVec& z0, double u, double mu, double step,
                     double horizon);

struct ConvergenceReport {
    double trailing_max_x = 0.0;
    double final_weak_eps = 0.0;
    double final_eps_norm = 0.0;
    double initial_eps_norm = 0.0;
    double final_c_eps = 0.0;
    long dissipativity_violations = 0;
    long clamp_count = 0;
    bool diverged = false;
};

/// Trailing window is the last `window` fraction of the recorded time span.
ConvergenceReport convergence_metrics(const Trajectory& traj, double window = 0.1);

}  // namespace unobs::sim
