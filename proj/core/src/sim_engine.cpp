#include "unobs/sim_engine.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <stdexcept>

#include "unobs/errors.hpp"

namespace unobs::sim {

using spectral::SpectralVec;

namespace {

constexpr std::size_t kMaxClampTimes = 32;

long integral_ratio(double num, double den, const char* what) {
    const double q = num / den;
    const long n = std::lround(q);
    if (n < 1 || std::fabs(q - static_cast<double>(n)) > 1e-9 * std::max(1.0, q)) {
        throw std::invalid_argument(std::string(what) + " must be an integer multiple of the step");
    }
    return n;
}

bool all_finite(const Vector& v) { return v.allFinite(); }

// out = (A(u) - alpha zeta zeta^*) w
void apply_error_generator(double c, double alpha, const CVector& zeta, const CVector& w,
                           CVector& out) {
    const Eigen::Index n = w.size();
    const int N = static_cast<int>((n - 1) / 2);
    const Complex proj = alpha != 0.0 ? zeta.dot(w) : Complex(0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        Complex v = Complex(0.0, -static_cast<double>(i - N)) * w(i);
        if (i > 0) v += c * w(i - 1);
        if (i + 1 < n) v -= c * w(i + 1);
        out(i) = v;
    }
    if (alpha != 0.0) out.noalias() -= (alpha * proj) * zeta;
}

}  // namespace

std::string to_string(Method m) {
    return m == Method::Rk4Coupled ? "rk4_coupled" : "exact_linear";
}

Method method_from_string(const std::string& name) {
    if (name == "rk4_coupled") return Method::Rk4Coupled;
    if (name == "exact_linear") return Method::ExactLinear;
    throw std::invalid_argument("unknown integrator method '" + name + "'");
}

long IntegratorConfig::steps() const {
    if (!(step > 0.0) || !(horizon > 0.0)) {
        throw std::invalid_argument("integrator: step and horizon must be positive");
    }
    return integral_ratio(horizon, step, "horizon");
}

Rk4Result rk4_integrate(const Rhs& rhs, const Vector& s0, const IntegratorConfig& cfg,
                        const StepHook& hook) {
    const long n = cfg.steps();
    const double h = cfg.step;
    const int every = std::max(1, cfg.record_every);
    Rk4Result out;
    out.t.push_back(0.0);
    out.s.push_back(s0);
    if (!all_finite(s0)) {
        out.aborted = true;
        out.diagnostic = "non-finite initial state";
        return out;
    }
    Vector s = s0, k1, k2, k3, k4, tmp;
    for (long i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * h;
        rhs(t, s, k1);
        tmp = s + 0.5 * h * k1;
        rhs(t + 0.5 * h, tmp, k2);
        tmp = s + 0.5 * h * k2;
        rhs(t + 0.5 * h, tmp, k3);
        tmp = s + h * k3;
        rhs(t + h, tmp, k4);
        s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double t_next = static_cast<double>(i + 1) * h;
        if (!all_finite(s)) {
            out.aborted = true;
            out.diagnostic = "non-finite state at t=" + std::to_string(t_next);
            return out;
        }
        const bool last = i + 1 == n;
        const bool keep_going = !hook || hook(i + 1, t_next, s);
        if ((i + 1) % every == 0 || last || !keep_going) {
            out.t.push_back(t_next);
            out.s.push_back(s);
        }
        if (!keep_going) break;
    }
    return out;
}

Trajectory run_finite_loop(const finite::PlantSpec& plant, const finite::FinParams& p,
                           const Vector& x0, const Vector& zhat0, const IntegratorConfig& cfg) {
    const auto n = plant.n();
    if (x0.size() != n || zhat0.size() != n + 1 || p.K.size() != n) {
        throw ShapeError("run_finite_loop: inconsistent dimensions");
    }
    Trajectory traj;
    const int every = std::max(1, cfg.record_every);
    const long total = cfg.steps();

    auto record = [&](double t, const Vector& s) {
        const Vector x = s.head(n);
        const Vector z = s.tail(n + 1);
        const Vector eps = z - finite::tau_fin(x);
        traj.t.push_back(t);
        traj.x.push_back(x);
        traj.zhat.push_back(z);
        traj.u.push_back(finite::lambda_delta(z, p.K, p.delta));
        traj.eps_norm.push_back(eps.norm());
        traj.c_eps_abs.push_back(std::fabs(eps(n)));
    };

    Vector s0(2 * n + 1);
    s0 << x0, zhat0;
    record(0.0, s0);
    double prev_eps = traj.eps_norm.back();

    auto rhs = [&](double, const Vector& s, Vector& ds) {
        finite::closed_loop_rhs_flat(plant, p, s, ds);
    };
    auto hook = [&](long step, double t, const Vector& s) {
        const Vector x = s.head(n);
        const Vector eps = s.tail(n + 1) - finite::tau_fin(x);
        const double e = eps.norm();
        const double inc = e - prev_eps;
        traj.max_eps_increase = std::max(traj.max_eps_increase, inc);
        if (inc > cfg.monotone_tol) ++traj.dissipativity_violations;
        prev_eps = e;
        if (s.norm() > cfg.divergence) {
            traj.diverged = true;
            traj.diagnostic = "state norm exceeded divergence threshold at t=" + std::to_string(t);
            record(t, s);
            return false;
        }
        if (step % every == 0 || step == total) record(t, s);
        return true;
    };
    const Rk4Result res = rk4_integrate(rhs, s0, cfg, hook);
    if (res.aborted) {
        traj.aborted = true;
        traj.diagnostic = res.diagnostic;
    }
    traj.final_x = traj.x.back();
    traj.final_zhat = traj.zhat.back();
    return traj;
}

CVector exp_action(double u, double mu, double alpha, const SpectralVec& zeta, double t,
                   const CVector& v) {
    if (v.size() != zeta.size()) throw ShapeError("exp_action: size mismatch");
    const int N = zeta.N();
    const double c = 0.5 * u * mu;
    const double bound = (N + std::fabs(u) * mu + alpha * zeta.coeffs().squaredNorm()) * std::fabs(t);
    if (!std::isfinite(bound) || bound > 1e6) throw OverflowError("exp_action: |t| ||M|| too large");
    const long sub = std::max(1L, static_cast<long>(std::ceil(bound / 0.5)));
    const double dt = t / static_cast<double>(sub);
    CVector w = v, term(v.size()), next(v.size()), sum(v.size());
    for (long s = 0; s < sub; ++s) {
        sum = w;
        term = w;
        for (int k = 1; k <= 60; ++k) {
            apply_error_generator(c, alpha, zeta.coeffs(), term, next);
            term = next * (dt / k);
            sum += term;
            if (term.norm() <= 1e-18 * sum.norm()) break;
        }
        w = sum;
    }
    return w;
}

Vector rotation_flow(const Vector& x, double u, double t) {
    const double c = std::cos(t);
    const double s = std::sin(t);
    Vector out(2);
    out(0) = c * x(0) - s * x(1) - u * (1.0 - c);
    out(1) = s * x(0) + c * x(1) + u * s;
    return out;
}

namespace {

struct SpectralRecorder {
    Trajectory& traj;
    const SpectralVec& zeta;

    void operator()(double t, const Vector& x, double u, const SpectralVec& eps) const {
        traj.t.push_back(t);
        traj.x.push_back(x);
        traj.u.push_back(u);
        traj.eps_norm.push_back(eps.norm());
        traj.c_eps_abs.push_back(std::abs(eps.inner(zeta)));
        traj.weak_eps.push_back(spectral::weak_norm(eps));
    }
};

void note_clamp(Trajectory& traj, spectral::InverseRegion region, double t) {
    if (region == spectral::InverseRegion::Blend || region == spectral::InverseRegion::Clamped) {
        ++traj.clamp_count;
        if (traj.clamp_times.size() < kMaxClampTimes) traj.clamp_times.push_back(t);
    }
}

double feedback(const SpectralVec& zhat, const spectral::SpectralParams& p, Trajectory& traj,
                double t) {
    const auto inv = spectral::pi_spec_detail(zhat, p.mu, p.j_value());
    note_clamp(traj, inv.region, t);
    return p.K(inv.x) + p.delta * spectral::weak_norm_sq(zhat - SpectralVec::unit(zhat.N(), 0));
}

Trajectory spectral_exact(const spectral::OutputSpec& spec, const spectral::SpectralParams& p,
                          const Vector& x0, const Vector& xhat0, const IntegratorConfig& cfg) {
    const int N = p.N;
    const SpectralVec zeta = spectral::output_zeta(spec, N);
    const long per = integral_ratio(p.Delta, cfg.step, "Delta");
    const long total = cfg.steps();
    const int every = std::max(1, cfg.record_every);
    const double h = cfg.step;

    Trajectory traj;
    SpectralRecorder record{traj, zeta};
    Vector x = x0;
    SpectralVec eps = spectral::tau_spec(xhat0, p.mu, N) - spectral::tau_spec(x0, p.mu, N);
    double u = 0.0;
    double prev_eps = eps.norm();
    for (long i = 0; i <= total; ++i) {
        const double t = static_cast<double>(i) * h;
        if (i % per == 0 && i < total) {
            u = feedback(spectral::tau_spec(x, p.mu, N) + eps, p, traj, t);
        }
        if (i % every == 0 || i == total) record(t, x, u, eps);
        if (i == total) break;
        x = rotation_flow(x, u, h);
        eps = SpectralVec(N, exp_action(u, p.mu, p.alpha, zeta, h, eps.coeffs()));
        const double e = eps.norm();
        const double inc = e - prev_eps;
        traj.max_eps_increase = std::max(traj.max_eps_increase, inc);
        if (inc > cfg.monotone_tol) ++traj.dissipativity_violations;
        prev_eps = e;
        if (!x.allFinite() || !eps.coeffs().allFinite()) {
            traj.aborted = true;
            traj.diagnostic = "non-finite state at t=" + std::to_string(t + h);
            record(t + h, x, u, eps);
            break;
        }
        if (x.norm() > cfg.divergence) {
            traj.diverged = true;
            traj.diagnostic = "state norm exceeded divergence threshold at t=" + std::to_string(t + h);
            record(t + h, x, u, eps);
            break;
        }
    }
    traj.final_x = x;
    traj.final_zhat_spec = spectral::tau_spec(x, p.mu, N) + eps;
    return traj;
}

Trajectory spectral_rk4(const spectral::OutputSpec& spec, const spectral::SpectralParams& p,
                        const Vector& x0, const Vector& xhat0, const IntegratorConfig& cfg) {
    const int N = p.N;
    const Eigen::Index m = 2 * N + 1;
    const SpectralVec zeta = spectral::output_zeta(spec, N);
    const long per = integral_ratio(p.Delta, cfg.step, "Delta");
    const long total = cfg.steps();
    const int every = std::max(1, cfg.record_every);

    auto unpack = [&](const Vector& s) {
        CVector z(m);
        for (Eigen::Index i = 0; i < m; ++i) z(i) = Complex(s(2 + i), s(2 + m + i));
        return SpectralVec(N, std::move(z));
    };

    Trajectory traj;
    SpectralRecorder record{traj, zeta};
    Vector s0(2 + 2 * m);
    const SpectralVec z0 = spectral::tau_spec(xhat0, p.mu, N);
    s0.head(2) = x0;
    s0.segment(2, m) = z0.coeffs().real();
    s0.segment(2 + m, m) = z0.coeffs().imag();

    double u = feedback(z0, p, traj, 0.0);
    SpectralVec eps0 = z0 - spectral::tau_spec(x0, p.mu, N);
    record(0.0, x0, u, eps0);
    double prev_eps = eps0.norm();

    CVector w(m), out(m);
    auto rhs = [&](double, const Vector& s, Vector& ds) {
        ds.resize(s.size());
        const Vector x = s.head(2);
        ds(0) = -x(1);
        ds(1) = x(0) + u;
        for (Eigen::Index i = 0; i < m; ++i) w(i) = Complex(s(2 + i), s(2 + m + i));
        apply_error_generator(0.5 * u * p.mu, p.alpha, zeta.coeffs(), w, out);
        const Complex y = spectral::frak_h(spec, spectral::output_h(spec, x));
        out.noalias() += (p.alpha * y) * zeta.coeffs();
        ds.segment(2, m) = out.real();
        ds.segment(2 + m, m) = out.imag();
    };
    auto hook = [&](long step, double t, const Vector& s) {
        const Vector x = s.head(2);
        const SpectralVec zhat = unpack(s);
        const SpectralVec eps = zhat - spectral::tau_spec(x, p.mu, N);
        const double e = eps.norm();
        const double inc = e - prev_eps;
        traj.max_eps_increase = std::max(traj.max_eps_increase, inc);
        if (inc > cfg.monotone_tol) ++traj.dissipativity_violations;
        prev_eps = e;
        if (x.norm() > cfg.divergence) {
            traj.diverged = true;
            traj.diagnostic = "state norm exceeded divergence threshold at t=" + std::to_string(t);
            record(t, x, u, eps);
            return false;
        }
        if (step % per == 0 && step < total) u = feedback(zhat, p, traj, t);
        if (step % every == 0 || step == total) record(t, x, u, eps);
        return true;
    };
    IntegratorConfig inner = cfg;
    inner.record_every = std::numeric_limits<int>::max();
    const Rk4Result res = rk4_integrate(rhs, s0, inner, hook);
    if (res.aborted) {
        traj.aborted = true;
        traj.diagnostic = res.diagnostic;
    }
    const Vector& last = res.s.back();
    traj.final_x = last.head(2);
    traj.final_zhat_spec = unpack(last);
    return traj;
}

}  // namespace

Trajectory run_spectral_loop(const spectral::OutputSpec& spec, const spectral::SpectralParams& p,
                             const Vector& x0, const Vector& xhat0, const IntegratorConfig& cfg) {
    if (x0.size() != 2 || xhat0.size() != 2) throw ShapeError("run_spectral_loop: planar states");
    const auto problems = p.problems();
    if (!problems.empty()) throw std::invalid_argument("run_spectral_loop: " + problems.front());
    if (cfg.step > p.Delta) throw std::invalid_argument("run_spectral_loop: step must be <= Delta");
    return cfg.method == Method::ExactLinear ? spectral_exact(spec, p, x0, xhat0, cfg)
                                             : spectral_rk4(spec, p, x0, xhat0, cfg);
}

double unitary_drift(const SpectralVec& z0, double u, double mu, double step, double horizon) {
    const long n = integral_ratio(horizon, step, "horizon");
    const SpectralVec none(z0.N());
    const double n0 = z0.norm();
    CVector z = z0.coeffs();
    double worst = 0.0;
    for (long i = 0; i < n; ++i) {
        z = exp_action(u, mu, 0.0, none, step, z);
        worst = std::max(worst, std::fabs(z.norm() - n0));
    }
    return worst;
}

ConvergenceReport convergence_metrics(const Trajectory& traj, double window) {
    if (traj.t.empty()) throw std::invalid_argument("convergence_metrics: empty trajectory");
    ConvergenceReport r;
    const double t_end = traj.t.back();
    const double t_start = t_end - window * (t_end - traj.t.front());
    for (std::size_t i = 0; i < traj.t.size(); ++i) {
        if (traj.t[i] >= t_start) r.trailing_max_x = std::max(r.trailing_max_x, traj.x[i].norm());
    }
    r.final_eps_norm = traj.eps_norm.back();
    r.initial_eps_norm = traj.eps_norm.front();
    r.final_c_eps = traj.c_eps_abs.back();
    r.final_weak_eps = traj.weak_eps.empty() ? 0.0 : traj.weak_eps.back();
    r.dissipativity_violations = traj.dissipativity_violations;
    r.clamp_count = traj.clamp_count;
    r.diverged = traj.diverged || traj.aborted;
    return r;
}

}  // namespace unobs::sim
