#include "unobs/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "unobs/artifacts.hpp"
#include "unobs/errors.hpp"
#include "unobs/special_functions.hpp"

namespace unobs::scenario {
namespace {

using artifacts::fmt;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    return out;
}

bool parse_real(const std::string& s, double& v) {
    if (s.empty()) return false;
    char* end = nullptr;
    v = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && std::isfinite(v);
}

bool parse_int(const std::string& s, long long& v) {
    if (s.empty()) return false;
    char* end = nullptr;
    v = std::strtoll(s.c_str(), &end, 10);
    return end == s.c_str() + s.size();
}

bool parse_complex(const std::string& s, Complex& z) {
    static const std::regex re(
        R"(^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)(?:([+-](?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)i)?$)");
    std::smatch m;
    if (!std::regex_match(s, m, re)) return false;
    z = Complex(std::stod(m[1].str()), m[2].matched ? std::stod(m[2].str()) : 0.0);
    return true;
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "name", "strategy", "seed", "runs",
        "plant.A", "plant.b", "plant.poles", "plant.gain",
        "params.alpha", "params.delta", "params.delta_fraction", "params.rho",
        "params.Delta", "params.mu", "params.j", "params.N", "params.R0",
        "output.kind", "output.mu", "output.coeffs",
        "ic.radius_x", "ic.radius_xhat", "ic.list",
        "integrator.method", "integrator.step", "integrator.horizon", "integrator.record_every",
        "integrator.monotone_tol",
        "metrics.window", "metrics.x_threshold", "metrics.c_eps_threshold",
        "metrics.require_eps_decrease",
        "analysis.detq_trials", "analysis.gramian_u", "analysis.gramian_T", "analysis.gramian_N",
        "analysis.gramian_steps", "analysis.f_ell_L"};
    return keys;
}

// Typed access to the raw key/value map; every problem is appended, nothing throws.
class Reader {
public:
    Reader(std::map<std::string, std::string> raw, std::vector<std::string>& errors)
        : raw_(std::move(raw)), errors_(errors) {}

    bool has(const std::string& key) const { return raw_.count(key) != 0; }
    std::string raw(const std::string& key) const { return has(key) ? raw_.at(key) : ""; }

    void error(const std::string& key, const std::string& msg) { errors_.push_back(key + ": " + msg); }

    std::string str(const std::string& key, const std::string& def) const {
        return has(key) ? raw_.at(key) : def;
    }

    double real(const std::string& key, double def) {
        if (!has(key)) return def;
        double v = 0.0;
        if (!parse_real(raw_.at(key), v)) {
            error(key, "expected a real number, got '" + raw_.at(key) + "'");
            return def;
        }
        return v;
    }

    long long integer(const std::string& key, long long def) {
        if (!has(key)) return def;
        long long v = 0;
        if (!parse_int(raw_.at(key), v)) {
            error(key, "expected an integer, got '" + raw_.at(key) + "'");
            return def;
        }
        return v;
    }

    bool boolean(const std::string& key, bool def) {
        if (!has(key)) return def;
        const auto& v = raw_.at(key);
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        error(key, "expected true or false, got '" + v + "'");
        return def;
    }

    std::vector<double> reals(const std::string& key, std::vector<double> def) {
        if (!has(key)) return def;
        std::vector<double> out;
        for (const auto& item : split(raw_.at(key), ',')) {
            double v = 0.0;
            if (!parse_real(item, v)) {
                error(key, "expected a comma-separated list of reals, got '" + item + "'");
                return def;
            }
            out.push_back(v);
        }
        return out;
    }

    std::vector<Complex> complexes(const std::string& key, std::vector<Complex> def) {
        if (!has(key)) return def;
        std::vector<Complex> out;
        for (const auto& item : split(raw_.at(key), ',')) {
            Complex z;
            if (!parse_complex(item, z)) {
                error(key, "expected complex numbers like -0.5+0.8i, got '" + item + "'");
                return def;
            }
            out.push_back(z);
        }
        return out;
    }

private:
    std::map<std::string, std::string> raw_;
    std::vector<std::string>& errors_;
};

Vector draw_in_ball(std::mt19937_64& rng, double radius) {
    std::uniform_real_distribution<double> d(-radius, radius);
    Vector v(2);
    do {
        v << d(rng), d(rng);
    } while (v.squaredNorm() > radius * radius);
    return v;
}

std::string vec_str(const Vector& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) s += ' ';
        s += fmt(v(i));
    }
    return s;
}

bool is_rotation(const finite::PlantSpec& p) {
    const auto r = finite::rotation_plant();
    return p.A.rows() == 2 && p.A.cols() == 2 && p.b.size() == 2 && (p.A - r.A).norm() == 0.0 &&
           (p.b - r.b).norm() == 0.0;
}

}  // namespace

ScenarioConfig parse_config_text(const std::string& text) {
    std::vector<std::string> errors;
    std::map<std::string, std::string> raw;
    {
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
                continue;
            }
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (!known_keys().count(key)) {
                errors.push_back(key + ": unknown key");
            } else if (raw.count(key)) {
                errors.push_back(key + ": duplicate key");
            } else if (value.empty()) {
                errors.push_back(key + ": empty value");
            } else {
                raw[key] = value;
            }
        }
    }

    Reader rd(raw, errors);
    ScenarioConfig cfg;
    cfg.name = rd.str("name", "scenario");

    if (!rd.has("strategy")) {
        rd.error("strategy", "missing required key (finite or spectral)");
    } else if (rd.raw("strategy") == "finite") {
        cfg.strategy = Strategy::Finite;
    } else if (rd.raw("strategy") == "spectral") {
        cfg.strategy = Strategy::Spectral;
    } else {
        rd.error("strategy", "must be finite or spectral, got '" + rd.raw("strategy") + "'");
    }
    const bool spectral_run = cfg.strategy == Strategy::Spectral;

    const long long seed = rd.integer("seed", 0);
    if (seed < 0) rd.error("seed", "must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(std::max(0LL, seed));
    const long long runs = rd.integer("runs", 1);
    if (runs < 1 || runs > 100000) rd.error("runs", "must lie in [1, 100000]");
    cfg.runs = static_cast<int>(std::clamp(runs, 1LL, 100000LL));

    // plant
    const auto a_entries = rd.reals("plant.A", {0.0, -1.0, 1.0, 0.0});
    const auto b_entries = rd.reals("plant.b", {0.0, 1.0});
    const auto n = static_cast<Eigen::Index>(b_entries.size());
    bool plant_ok = true;
    if (static_cast<Eigen::Index>(a_entries.size()) != n * n || n < 1 || n > 8) {
        rd.error("plant.A", "must hold n*n entries (row-major) for b of length n <= 8");
        plant_ok = false;
    } else {
        cfg.plant.A = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                     Eigen::RowMajor>>(a_entries.data(), n, n);
        cfg.plant.b = Eigen::Map<const Vector>(b_entries.data(), n);
        if ((cfg.plant.A + cfg.plant.A.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
            rd.error("plant.A", "must be skew-symmetric");
            plant_ok = false;
        }
        if (spectral_run && !is_rotation(cfg.plant)) {
            rd.error("plant.A", "the spectral strategy requires the rotation plant A=[[0,-1],[1,0]], b=(0,1)");
            plant_ok = false;
        }
    }

    if (rd.has("plant.gain") && rd.has("plant.poles")) {
        rd.error("plant.gain", "give either plant.gain or plant.poles, not both");
    }
    if (plant_ok) {
        if (rd.has("plant.gain")) {
            const auto g = rd.reals("plant.gain", {});
            if (static_cast<Eigen::Index>(g.size()) != n) {
                rd.error("plant.gain", "must have n entries");
                plant_ok = false;
            } else {
                cfg.K.K = Eigen::Map<const RowVector>(g.data(), n);
            }
        } else {
            const std::vector<Complex> def =
                spectral_run ? std::vector<Complex>{{-0.5, std::sqrt(3.0) / 2}, {-0.5, -std::sqrt(3.0) / 2}}
                             : std::vector<Complex>{{-1.0, 0.0}, {-2.0, 0.0}};
            cfg.poles = rd.complexes("plant.poles", def);
            try {
                cfg.K = linalg::place_poles(cfg.plant.A, cfg.plant.b, cfg.poles);
            } catch (const std::exception& e) {
                rd.error("plant.poles", e.what());
                plant_ok = false;
            }
        }
        if (plant_ok && !linalg::is_hurwitz(cfg.plant.A + cfg.plant.b * cfg.K.K)) {
            rd.error(rd.has("plant.gain") ? "plant.gain" : "plant.poles", "A + bK is not Hurwitz");
            plant_ok = false;
        }
    }

    // initial conditions
    cfg.radius_x = rd.real("ic.radius_x", 1.0);
    cfg.radius_xhat = rd.real("ic.radius_xhat", 1.0);
    if (!(cfg.radius_x > 0.0)) rd.error("ic.radius_x", "must be > 0");
    if (!(cfg.radius_xhat > 0.0)) rd.error("ic.radius_xhat", "must be > 0");
    if (rd.has("ic.list")) {
        for (const auto& group : split(rd.raw("ic.list"), ';')) {
            std::istringstream in(group);
            std::vector<double> vals;
            std::string tok;
            bool ok = true;
            while (in >> tok) {
                double v = 0.0;
                if (!parse_real(tok, v)) ok = false;
                vals.push_back(v);
            }
            if (!ok || static_cast<Eigen::Index>(vals.size()) != 2 * n) {
                rd.error("ic.list", "each ';'-separated entry needs 2n reals (x0 then xhat0)");
                break;
            }
            InitialCondition ic;
            ic.x0 = Eigen::Map<const Vector>(vals.data(), n);
            ic.xhat0 = Eigen::Map<const Vector>(vals.data() + n, n);
            cfg.explicit_ics.push_back(ic);
        }
    }

    // integrator
    try {
        cfg.integrator.method = sim::method_from_string(rd.str("integrator.method", "exact_linear"));
    } catch (const std::exception& e) {
        rd.error("integrator.method", e.what());
    }
    if (!spectral_run && cfg.integrator.method == sim::Method::ExactLinear && rd.has("integrator.method")) {
        rd.error("integrator.method", "the finite strategy is integrated with rk4_coupled");
    }
    if (!spectral_run) cfg.integrator.method = sim::Method::Rk4Coupled;
    cfg.integrator.step = rd.real("integrator.step", 1e-3);
    cfg.integrator.horizon = rd.real("integrator.horizon", 10.0);
    cfg.integrator.record_every = static_cast<int>(rd.integer("integrator.record_every", 1));
    cfg.integrator.monotone_tol = rd.real("integrator.monotone_tol", 1e-8);
    if (!(cfg.integrator.step > 0.0)) rd.error("integrator.step", "must be > 0");
    if (!(cfg.integrator.horizon > 0.0)) rd.error("integrator.horizon", "must be > 0");
    if (cfg.integrator.record_every < 1) rd.error("integrator.record_every", "must be >= 1");
    if (!(cfg.integrator.monotone_tol >= 0.0)) rd.error("integrator.monotone_tol", "must be >= 0");
    if (cfg.integrator.step > 0.0 && cfg.integrator.horizon > 0.0) {
        try {
            (void)cfg.integrator.steps();
        } catch (const std::exception&) {
            rd.error("integrator.horizon", "must be an integer multiple of integrator.step");
        }
    }

    // thresholds
    cfg.thresholds.window = rd.real("metrics.window", 0.1);
    cfg.thresholds.x_max = rd.real("metrics.x_threshold", 1e-3);
    cfg.thresholds.c_eps_max = rd.real("metrics.c_eps_threshold", 0.0);
    cfg.thresholds.require_eps_decrease = rd.boolean("metrics.require_eps_decrease", true);
    if (!(cfg.thresholds.window > 0.0 && cfg.thresholds.window <= 1.0)) {
        rd.error("metrics.window", "must lie in (0, 1]");
    }
    if (!(cfg.thresholds.x_max > 0.0)) rd.error("metrics.x_threshold", "must be > 0");
    if (!(cfg.thresholds.c_eps_max >= 0.0)) rd.error("metrics.c_eps_threshold", "must be >= 0");

    // analysis
    cfg.analysis.detq_trials = static_cast<int>(rd.integer("analysis.detq_trials", 100));
    cfg.analysis.gramian_u = rd.reals("analysis.gramian_u", cfg.analysis.gramian_u);
    cfg.analysis.gramian_T = rd.real("analysis.gramian_T", cfg.analysis.gramian_T);
    cfg.analysis.gramian_N = static_cast<int>(rd.integer("analysis.gramian_N", 12));
    cfg.analysis.gramian_steps = static_cast<int>(rd.integer("analysis.gramian_steps", 2000));
    cfg.analysis.f_ell_L = static_cast<int>(rd.integer("analysis.f_ell_L", 8));
    if (cfg.analysis.detq_trials < 1) rd.error("analysis.detq_trials", "must be >= 1");
    if (!(cfg.analysis.gramian_T > 0.0)) rd.error("analysis.gramian_T", "must be > 0");
    if (cfg.analysis.gramian_N < 1) rd.error("analysis.gramian_N", "must be >= 1");
    if (cfg.analysis.gramian_steps < 100) rd.error("analysis.gramian_steps", "must be >= 100");
    if (cfg.analysis.f_ell_L < 0) rd.error("analysis.f_ell_L", "must be >= 0");

    if (!spectral_run) {
        for (const auto* key : {"params.Delta", "params.mu", "params.j", "params.N", "params.R0",
                                "output.kind", "output.mu", "output.coeffs"}) {
            if (rd.has(key)) rd.error(key, "only meaningful for the spectral strategy");
        }
        cfg.fin.K = cfg.K;
        cfg.fin.alpha = rd.real("params.alpha", 10.0);
        if (!(cfg.fin.alpha > 0.0)) rd.error("params.alpha", "must be > 0");
        cfg.rho = rd.real("params.rho", std::max(cfg.radius_x, cfg.radius_xhat));
        if (!(cfg.rho > 0.0)) rd.error("params.rho", "must be > 0");
        if (plant_ok && cfg.rho > 0.0) cfg.delta0 = finite::delta0_bound(cfg.K, cfg.rho, cfg.plant);
        if (rd.has("params.delta") && rd.has("params.delta_fraction")) {
            rd.error("params.delta", "give either params.delta or params.delta_fraction, not both");
        }
        if (rd.has("params.delta")) {
            cfg.fin.delta = rd.real("params.delta", 0.0);
        } else {
            const double frac = rd.real("params.delta_fraction", 0.5);
            if (!(frac >= 0.0)) rd.error("params.delta_fraction", "must be >= 0");
            cfg.fin.delta = frac * cfg.delta0;
        }
        if (!(cfg.fin.delta >= 0.0)) rd.error("params.delta", "must be >= 0");
        if (cfg.delta0 > 0.0 && cfg.fin.delta >= cfg.delta0) {
            cfg.warnings.push_back("params.delta: delta = " + fmt(cfg.fin.delta) +
                                   " >= delta0 = " + fmt(cfg.delta0) +
                                   "; the perturbed state feedback is not certified on B(0, rho)");
        }
        if (cfg.fin.delta == 0.0) {
            cfg.warnings.push_back("params.delta: delta = 0 makes the target unobservable for the loop");
        }
    } else {
        for (const auto* key : {"params.delta_fraction", "params.rho"}) {
            if (rd.has(key)) rd.error(key, "only meaningful for the finite strategy");
        }
        auto& sp = cfg.spec;
        sp.K = cfg.K;
        try {
            cfg.output.kind = spectral::output_kind_from_string(rd.str("output.kind", "norm_sq"));
        } catch (const std::exception& e) {
            rd.error("output.kind", e.what());
        }
        if (rd.has("params.mu") && rd.has("output.mu")) {
            rd.error("params.mu", "give either params.mu or output.mu, not both");
        }
        cfg.output.mu = rd.real(rd.has("params.mu") ? "params.mu" : "output.mu", 0.1);
        sp.mu = cfg.output.mu;
        if (!(sp.mu > 0.0)) rd.error("output.mu", "mu must be > 0");
        if (rd.has("output.coeffs")) {
            for (const auto& item : split(rd.raw("output.coeffs"), ',')) {
                const auto parts = split(item, ':');
                long long k = 0;
                Complex c;
                if (parts.size() != 2 || !parse_int(parts[0], k) || !parse_complex(parts[1], c)) {
                    rd.error("output.coeffs", "entries must look like k:c, e.g. 2:0.5 or -1:0.5-0.5i");
                    break;
                }
                cfg.output.coeffs[static_cast<int>(k)] += c;
            }
        }
        sp.alpha = rd.real("params.alpha", 1.0);
        sp.N = static_cast<int>(rd.integer("params.N", 24));
        const double j1 = special::find_zeros().j1;
        sp.j = rd.real("params.j", 0.9 * j1);
        cfg.R0 = rd.real("params.R0", 1.0);
        if (!(sp.alpha > 0.0)) rd.error("params.alpha", "alpha must be > 0");
        if (sp.N < 2 || sp.N > 200) rd.error("params.N", "N must lie in [2, 200]");
        if (!(sp.j > 0.0 && sp.j < j1)) rd.error("params.j", "j must lie in (0, j1)");
        if (!(cfg.R0 > 0.0)) rd.error("params.R0", "R0 must be > 0");
        if (cfg.output.kind == spectral::OutputKind::BesselSeries) {
            bool nonzero = false;
            for (const auto& [k, c] : cfg.output.coeffs) {
                nonzero = nonzero || c != 0.0;
                if (std::abs(k) > sp.N) rd.error("output.coeffs", "order " + std::to_string(k) + " exceeds params.N");
            }
            if (!nonzero) rd.error("output.coeffs", "bessel_series needs at least one non-zero c_k");
        } else if (rd.has("output.coeffs")) {
            rd.error("output.coeffs", "only meaningful for output.kind = bessel_series");
        }

        const bool auto_delta = rd.str("params.delta", "auto") == "auto";
        const bool auto_Delta = rd.str("params.Delta", "auto") == "auto";
        if (!auto_delta) {
            sp.delta = rd.real("params.delta", 0.0);
            if (!(sp.delta >= 0.0)) rd.error("params.delta", "delta must be >= 0");
        }
        if (!auto_Delta) {
            sp.Delta = rd.real("params.Delta", 0.1);
            if (!(sp.Delta > 0.0 && sp.Delta < std::numbers::pi)) {
                rd.error("params.Delta", "Delta must lie in (0, pi), got " + rd.raw("params.Delta"));
            }
        }
        if ((auto_delta || auto_Delta) && plant_ok && sp.mu > 0.0 && sp.j > 0.0 && sp.j < j1 &&
            cfg.R0 > 0.0) {
            observability::RadiiOptions opt;
            opt.K = cfg.K;
            opt.A = cfg.plant.A;
            opt.b = cfg.plant.b;
            opt.j = sp.j;
            try {
                cfg.radii = observability::choose_radii(cfg.R0, opt);
                if (cfg.radii->mu < sp.mu) {
                    cfg.warnings.push_back("output.mu: mu = " + fmt(sp.mu) +
                                           " exceeds the certified mu0 = " + fmt(cfg.radii->mu) +
                                           " for R0 = " + fmt(cfg.R0));
                }
                if (auto_delta) sp.delta = cfg.radii->delta;
                if (auto_Delta) sp.Delta = cfg.radii->Delta;
                if (cfg.radii->beta_widened) {
                    cfg.warnings.push_back("params.R0: radii widened beyond beta1 = 2, beta2 = 2 sqrt 2 + 3 (R1 = " +
                                           fmt(cfg.radii->R1) + ", R2 = " + fmt(cfg.radii->R2) + ")");
                }
            } catch (const SearchFailure& e) {
                rd.error(auto_delta ? "params.delta" : "params.Delta",
                         std::string("automatic choice failed: ") + e.what());
            }
        }
        if (sp.Delta > 0.0 && cfg.integrator.step > 0.0) {
            if (cfg.integrator.step > sp.Delta) {
                rd.error("integrator.step", "must not exceed params.Delta");
            } else {
                const double q = sp.Delta / cfg.integrator.step;
                if (std::fabs(q - std::round(q)) > 1e-9 * q) {
                    rd.error("integrator.step", "params.Delta must be an integer multiple of the step");
                }
            }
        }
        if (plant_ok && sp.mu > 0.0 && sp.j > 0.0) {
            const auto um = observability::umax(cfg.K.norm(), sp.j, sp.mu, sp.delta);
            if (!um.applicable) {
                cfg.warnings.push_back("params: mu * u_max = " + fmt(sp.mu * um.value) +
                                       " >= j0; the Gramian observability certificate does not apply");
            }
        }
    }

    if (!errors.empty()) throw ConfigError(errors);
    return cfg;
}

ScenarioConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"config: cannot read " + path.string()});
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

void apply_seed_override(ScenarioConfig& cfg) {
    const char* env = std::getenv("UNOBS_STAB_SEED");
    if (env == nullptr || *env == '\0') return;
    long long v = 0;
    if (!parse_int(trim(env), v) || v < 0) {
        throw ConfigError({std::string("UNOBS_STAB_SEED: expected a non-negative integer, got '") + env + "'"});
    }
    cfg.seed = static_cast<std::uint64_t>(v);
}

std::vector<InitialCondition> initial_conditions(const ScenarioConfig& cfg) {
    if (!cfg.explicit_ics.empty()) return cfg.explicit_ics;
    std::mt19937_64 rng(cfg.seed);
    std::vector<InitialCondition> out;
    const auto n = cfg.plant.n();
    for (int i = 0; i < cfg.runs; ++i) {
        InitialCondition ic;
        if (n == 2) {
            ic.x0 = draw_in_ball(rng, cfg.radius_x);
            ic.xhat0 = draw_in_ball(rng, cfg.radius_xhat);
        } else {
            std::normal_distribution<double> g(0.0, 1.0);
            std::uniform_real_distribution<double> un(0.0, 1.0);
            auto ball = [&](double r) {
                Vector v(n);
                for (Eigen::Index k = 0; k < n; ++k) v(k) = g(rng);
                return Vector(v.normalized() * (r * std::pow(un(rng), 1.0 / static_cast<double>(n))));
            };
            ic.x0 = ball(cfg.radius_x);
            ic.xhat0 = ball(cfg.radius_xhat);
        }
        out.push_back(ic);
    }
    return out;
}

RunResult execute_run(const ScenarioConfig& cfg, int index, const InitialCondition& ic) {
    RunResult r;
    r.index = index;
    r.ic = ic;
    if (cfg.strategy == Strategy::Finite) {
        r.traj = sim::run_finite_loop(cfg.plant, cfg.fin, ic.x0, finite::tau_fin(ic.xhat0), cfg.integrator);
    } else {
        r.traj = sim::run_spectral_loop(cfg.output, cfg.spec, ic.x0, ic.xhat0, cfg.integrator);
    }
    r.metrics = sim::convergence_metrics(r.traj, cfg.thresholds.window);
    const auto& m = r.metrics;
    std::vector<std::string> why;
    if (m.diverged) why.push_back("diverged: " + r.traj.diagnostic);
    if (m.dissipativity_violations > 0) {
        why.push_back(std::to_string(m.dissipativity_violations) + " dissipativity violations");
    }
    if (!(m.trailing_max_x < cfg.thresholds.x_max)) {
        why.push_back("trailing max |x| = " + fmt(m.trailing_max_x) + " >= " + fmt(cfg.thresholds.x_max));
    }
    if (cfg.thresholds.c_eps_max > 0.0 && !(m.final_c_eps < cfg.thresholds.c_eps_max)) {
        why.push_back("final |C eps| = " + fmt(m.final_c_eps) + " >= " + fmt(cfg.thresholds.c_eps_max));
    }
    if (cfg.thresholds.require_eps_decrease &&
        m.final_eps_norm > m.initial_eps_norm + cfg.integrator.monotone_tol) {
        why.push_back("||eps(T)|| > ||eps(0)||");
    }
    r.pass = why.empty();
    for (const auto& w : why) r.failure += (r.failure.empty() ? "" : "; ") + w;
    return r;
}

std::vector<RunResult> run_batch(const ScenarioConfig& cfg, int jobs) {
    const auto ics = initial_conditions(cfg);
    std::vector<RunResult> results(ics.size());
    std::vector<std::string> errors(ics.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < ics.size(); i = next++) {
            try {
                results[i] = execute_run(cfg, static_cast<int>(i), ics[i]);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const int n_threads = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(1, ics.size())));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (std::size_t i = 0; i < ics.size(); ++i) {
        if (!errors[i].empty()) {
            results[i].index = static_cast<int>(i);
            results[i].ic = ics[i];
            results[i].pass = false;
            results[i].failure = "run error: " + errors[i];
        }
    }
    return results;
}

namespace {

artifacts::KeyValues config_summary(const ScenarioConfig& cfg) {
    artifacts::KeyValues kv;
    const bool spec = cfg.strategy == Strategy::Spectral;
    kv.emplace_back("scenario", cfg.name);
    kv.emplace_back("strategy", spec ? "spectral" : "finite");
    kv.emplace_back("seed", std::to_string(cfg.seed));
    kv.emplace_back("method", sim::to_string(cfg.integrator.method));
    kv.emplace_back("step", fmt(cfg.integrator.step));
    kv.emplace_back("horizon", fmt(cfg.integrator.horizon));
    kv.emplace_back("K", vec_str(cfg.K.K.transpose()));
    if (!spec) {
        kv.emplace_back("alpha", fmt(cfg.fin.alpha));
        kv.emplace_back("delta", fmt(cfg.fin.delta));
        kv.emplace_back("rho", fmt(cfg.rho));
        kv.emplace_back("delta0", fmt(cfg.delta0));
    } else {
        kv.emplace_back("output_kind", spectral::to_string(cfg.output.kind));
        kv.emplace_back("alpha", fmt(cfg.spec.alpha));
        kv.emplace_back("delta", fmt(cfg.spec.delta));
        kv.emplace_back("Delta", fmt(cfg.spec.Delta));
        kv.emplace_back("mu", fmt(cfg.spec.mu));
        kv.emplace_back("j", fmt(cfg.spec.j_value()));
        kv.emplace_back("N", std::to_string(cfg.spec.N));
        if (cfg.radii) {
            kv.emplace_back("R0", fmt(cfg.radii->R0));
            kv.emplace_back("R1", fmt(cfg.radii->R1));
            kv.emplace_back("R2", fmt(cfg.radii->R2));
            kv.emplace_back("beta_widened", cfg.radii->beta_widened ? "1" : "0");
            kv.emplace_back("ell_pi", fmt(cfg.radii->ell_pi));
            kv.emplace_back("M", fmt(cfg.radii->M));
            kv.emplace_back("mu0", fmt(cfg.radii->mu));
        }
    }
    kv.emplace_back("warnings", std::to_string(cfg.warnings.size()));
    for (std::size_t i = 0; i < cfg.warnings.size(); ++i) {
        kv.emplace_back("warning." + std::to_string(i), cfg.warnings[i]);
    }
    return kv;
}

std::string run_tag(int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "run_%03d", i);
    return buf;
}

}  // namespace

ScenarioOutcome run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir,
                             int jobs, bool svg) {
    std::filesystem::create_directories(out_dir);
    ScenarioOutcome outcome;
    outcome.runs = run_batch(cfg, jobs);
    const bool spec = cfg.strategy == Strategy::Spectral;

    auto kv = config_summary(cfg);
    kv.emplace_back("runs", std::to_string(outcome.runs.size()));
    int passed = 0;
    for (const auto& r : outcome.runs) {
        const std::string p = "run." + std::to_string(r.index) + ".";
        kv.emplace_back(p + "x0", vec_str(r.ic.x0));
        kv.emplace_back(p + "xhat0", vec_str(r.ic.xhat0));
        kv.emplace_back(p + "pass", r.pass ? "1" : "0");
        if (!r.traj.t.empty()) {
            const std::string tag = run_tag(r.index);
            const auto csv = out_dir / (tag + ".csv");
            artifacts::write_csv(csv, r.traj, spec);
            outcome.files.push_back(csv);
            if (svg) {
                const auto path = out_dir / (tag + ".svg");
                artifacts::write_svg(path, r.traj, cfg.name + " " + tag);
                outcome.files.push_back(path);
            }
            const auto& m = r.metrics;
            kv.emplace_back(p + "trailing_max_x", fmt(m.trailing_max_x));
            kv.emplace_back(p + "eps_initial", fmt(m.initial_eps_norm));
            kv.emplace_back(p + "eps_final", fmt(m.final_eps_norm));
            kv.emplace_back(p + "c_eps_final", fmt(m.final_c_eps));
            if (spec) kv.emplace_back(p + "weak_eps_final", fmt(m.final_weak_eps));
            kv.emplace_back(p + "dissipativity_violations", std::to_string(m.dissipativity_violations));
            kv.emplace_back(p + "max_eps_increase", fmt(r.traj.max_eps_increase));
            kv.emplace_back(p + "clamp_count", std::to_string(m.clamp_count));
            kv.emplace_back(p + "diverged", m.diverged ? "1" : "0");
        }
        if (!r.pass) kv.emplace_back(p + "failure", r.failure);
        passed += r.pass ? 1 : 0;
    }
    outcome.all_pass = passed == static_cast<int>(outcome.runs.size());
    kv.emplace_back("passed_runs", std::to_string(passed));
    kv.emplace_back("all_pass", outcome.all_pass ? "1" : "0");
    const auto summary = out_dir / "summary.txt";
    artifacts::write_key_values(summary, kv);
    outcome.files.push_back(summary);
    return outcome;
}

std::vector<std::pair<std::string, std::string>> analyze(const ScenarioConfig& cfg) {
    artifacts::KeyValues kv;
    const auto& zeros = special::find_zeros();
    kv.emplace_back("scenario", cfg.name);
    kv.emplace_back("j0", fmt(zeros.j0));
    kv.emplace_back("j1", fmt(zeros.j1));
    kv.emplace_back("nu", fmt(spectral::nu_constant()));
    kv.emplace_back("K", vec_str(cfg.K.K.transpose()));
    kv.emplace_back("kappa", fmt(cfg.K.norm()));

    if (cfg.strategy == Strategy::Finite) {
        kv.emplace_back("strategy", "finite");
        kv.emplace_back("rho", fmt(cfg.rho));
        kv.emplace_back("delta0", fmt(cfg.delta0));
        kv.emplace_back("delta", fmt(cfg.fin.delta));
        kv.emplace_back("alpha", fmt(cfg.fin.alpha));
        try {
            const Matrix q = finite::build_Q(cfg.K, cfg.plant.A, cfg.fin.delta, cfg.fin.alpha);
            const int rank = linalg::numerical_rank(q);
            kv.emplace_back("Q.det", fmt(q.partialPivLu().determinant()));
            kv.emplace_back("Q.formula", fmt(observability::det_Q_formula(cfg.K, cfg.plant.A, cfg.fin.delta, cfg.fin.alpha)));
            kv.emplace_back("Q.rank", std::to_string(rank));
            kv.emplace_back("Q.singular", rank < q.rows() ? "1" : "0");
        } catch (const std::exception& e) {
            kv.emplace_back("Q.error", e.what());
        }
        const auto rep = observability::det_Q_check(cfg.analysis.detq_trials, cfg.seed);
        kv.emplace_back("detq.trials", std::to_string(rep.trials));
        kv.emplace_back("detq.max_rel_err", fmt(rep.max_rel_err));
        kv.emplace_back("detq.max_rel_err_sign_corrected", fmt(rep.max_rel_err_corrected));
        kv.emplace_back("detq.singular_at_zero_delta", rep.singular_at_zero_delta ? "1" : "0");
        return kv;
    }

    kv.emplace_back("strategy", "spectral");
    const auto& sp = cfg.spec;
    kv.emplace_back("mu", fmt(sp.mu));
    kv.emplace_back("j", fmt(sp.j_value()));
    kv.emplace_back("delta", fmt(sp.delta));
    kv.emplace_back("Delta", fmt(sp.Delta));
    const auto um = observability::umax(cfg.K.norm(), sp.j_value(), sp.mu, sp.delta);
    kv.emplace_back("umax", fmt(um.value));
    kv.emplace_back("umax.applicable", um.applicable ? "1" : "0");

    const auto zeta_g = spectral::output_zeta(cfg.output, std::max(cfg.analysis.gramian_N, 2));
    for (double u : cfg.analysis.gramian_u) {
        const auto g = observability::observability_gramian(u, cfg.analysis.gramian_T, zeta_g, sp.mu,
                                                             cfg.analysis.gramian_steps);
        const std::string p = "gramian.u=" + fmt(u) + ".";
        kv.emplace_back(p + "lambda_min", fmt(g.lambda_min));
        kv.emplace_back(p + "lambda_max", fmt(g.lambda_max));
    }

    std::map<int, Complex> d;
    for (int k = -zeta_g.N(); k <= zeta_g.N(); ++k) {
        if (zeta_g[k] != 0.0) d[k] = zeta_g[k];
    }
    const double scan = observability::F_ell_zero_scan(cfg.analysis.f_ell_L, 0.95 * special::kBesselArgLimit, d);
    kv.emplace_back("F_ell.first_zero_estimate", std::isfinite(scan) ? fmt(scan) : "inf");

    kv.emplace_back("ell_f", fmt(spectral::lipschitz_f(sp.mu, sp.j_value(), std::numeric_limits<double>::infinity())));
    if (cfg.radii) {
        const auto& b = *cfg.radii;
        kv.emplace_back("radii.R0", fmt(b.R0));
        kv.emplace_back("radii.R1", fmt(b.R1));
        kv.emplace_back("radii.R2", fmt(b.R2));
        kv.emplace_back("radii.beta1", fmt(b.beta1));
        kv.emplace_back("radii.beta2", fmt(b.beta2));
        kv.emplace_back("radii.beta_widened", b.beta_widened ? "1" : "0");
        kv.emplace_back("radii.mu0", fmt(b.mu));
        kv.emplace_back("radii.M", fmt(b.M));
        kv.emplace_back("radii.ell_pi", fmt(b.ell_pi));
        const auto res = observability::check_bound_inequalities(b);
        kv.emplace_back("ineq1.residual", fmt(res.ineq1));
        kv.emplace_back("ineq2.residual", fmt(res.ineq2));
    }
    return kv;
}

}  // namespace unobs::scenario
