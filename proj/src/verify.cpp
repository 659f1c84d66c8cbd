#include "forest/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <sstream>

#include "forest/delay.hpp"
#include "forest/errors.hpp"
#include "forest/io.hpp"
#include "forest/pde.hpp"
#include "forest/quadrature.hpp"
#include "forest/smith.hpp"

namespace forest::verify {

bool VerificationReport::all_passed() const noexcept {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

const CheckResult* VerificationReport::find(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) {
            return &c;
        }
    }
    return nullptr;
}

void VerificationReport::add(CheckResult check) {
    if (find(check.name) != nullptr) {
        throw InvalidInput("VerificationReport: duplicate check " + check.name);
    }
    checks.push_back(std::move(check));
}

void VerificationReport::merge(VerificationReport other) {
    for (auto& c : other.checks) {
        add(std::move(c));
    }
    skipped.insert(skipped.end(), other.skipped.begin(), other.skipped.end());
    metadata.merge(other.metadata);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_species_index(const ModelConfig& config, std::size_t i, const char* what) {
    if (i >= config.n()) {
        throw InvalidInput(std::string(what) + ": species index out of range");
    }
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

bool diagonal_row(const ModelConfig& config, std::size_t i) {
    for (std::size_t j = 0; j < config.n(); ++j) {
        if (j != i && config.zeta[i][j] != 0.0) {
            return false;
        }
    }
    return true;
}

}  // namespace

double comparison_delay(const ModelConfig& config, std::size_t i, double m, double C_i) {
    check_species_index(config, i, "comparison_delay");
    if (!(m > 0.0) || !(C_i > 0.0)) {
        throw InvalidInput("comparison_delay: need m > 0 and C_i > 0");
    }
    const auto& sp = config.species[i];
    const double zeta = config.zeta[i][i];
    const auto g = [&](double s) { return eval_f(sp.f, zeta * m * std::exp(-sp.mu_A * s)); };

    // The integrand increases from f(zeta m) towards f(0), so the root lies
    // below C / f(zeta m). Bisection carries the integral up to `lo` along.
    double lo = 0.0;
    double I_lo = 0.0;
    double hi = C_i / g(0.0);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        const double I_mid = I_lo + quad::adaptive_simpson(g, lo, mid, 1e-14).value;
        if (I_mid < C_i) {
            lo = mid;
            I_lo = I_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double certificate_margin(const ModelConfig& config, std::size_t i, double tau) {
    check_species_index(config, i, "certificate_margin");
    const auto& sp = config.species[i];
    double row = 0.0;
    for (double z : config.zeta[i]) {
        row += z;
    }
    const double M = growth_ratio_bound(sp.f, row / config.zeta[i][i]);
    return sp.mu_A - sp.beta * std::exp(-sp.mu_J * tau) * M;
}

ProofCertificate boundedness_certificate(const ModelConfig& config, std::size_t i, double C_i) {
    check_species_index(config, i, "boundedness_certificate");
    if (!config.species[i].f.has_growth_ratio_bound()) {
        throw Unsupported("boundedness_certificate: exponential decay has no growth-ratio bound");
    }
    const auto margin_at = [&](double m) {
        return certificate_margin(config, i, comparison_delay(config, i, m, C_i));
    };
    ProofCertificate cert;
    cert.i = i;

    double lo = 0.0;
    double hi = 1.0;
    if (margin_at(hi) > 0.0) {
        while (hi > 1e-12) {
            const double half = hi / 2.0;
            if (!(margin_at(half) > 0.0)) {
                lo = half;
                break;
            }
            hi = half;
        }
    } else {
        lo = hi;
        for (int it = 0; it < 1000 && !(margin_at(hi) > 0.0); ++it) {
            lo = hi;
            hi *= 2.0;
            if (!std::isfinite(hi) || hi > 1e300) {
                cert.m = lo;
                cert.tau_i_m = comparison_delay(config, i, lo, C_i);
                cert.margin = certificate_margin(config, i, cert.tau_i_m);
                cert.valid = false;
                return cert;
            }
        }
    }
    if (lo > 0.0) {
        while (hi - lo > 1e-6 * hi) {
            const double mid = 0.5 * (lo + hi);
            if (margin_at(mid) > 0.0) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    cert.m = hi;
    cert.tau_i_m = comparison_delay(config, i, hi, C_i);
    cert.margin = certificate_margin(config, i, cert.tau_i_m);
    cert.valid = cert.margin > 0.0;
    return cert;
}

std::vector<GammaDiagnostic> gamma_diagnostic(const ModelConfig& config) {
    validate(config);
    const std::size_t n = config.n();
    const auto C = compute_normalization(config).C;
    std::vector<GammaDiagnostic> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& sp = config.species[i];
        if (!(sp.tau0 > 0.0)) {
            continue;
        }
        std::vector<double> s_points = sp.history.breakpoints(-sp.tau0, 0.0);
        constexpr int samples = 4096;
        for (int k = 0; k <= samples; ++k) {
            s_points.push_back(-sp.tau0 + sp.tau0 * k / samples);
        }
        double sup = 0.0;
        for (double s : s_points) {
            const double z = std::max(config.history_weighted_total(i, s), 0.0);
            sup = std::max(sup, sp.history(s) / eval_f(sp.f, z));
        }
        const double gamma = sp.beta * sup;
        const auto g = [&](double a) {
            return -sp.mu_A * a + gamma * eval_f(sp.f, config.zeta[i][i] * a);
        };
        double hi = 1.0;
        while (g(hi) > 0.0 && hi < 1e300) {
            hi *= 2.0;
        }
        const double root = g(hi) > 0.0 ? hi : quad::bisect(g, 0.0, hi);
        out[i].gamma = gamma;
        out[i].a_hat = std::max(sp.history(0.0), root);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!out[i].a_hat) {
            continue;
        }
        double z = 0.0;
        bool complete = true;
        for (std::size_t j = 0; j < n; ++j) {
            if (config.zeta[i][j] == 0.0) {
                continue;
            }
            if (!out[j].a_hat) {
                complete = false;
                break;
            }
            z += config.zeta[i][j] * *out[j].a_hat;
        }
        if (complete) {
            out[i].tstar_bound = C[i] / eval_f(config.species[i].f, z);
        }
    }
    return out;
}

std::vector<double> window_max(const DenseTrajectory& traj, double lo, double hi) {
    if (traj.empty() || !(lo <= hi) || hi > traj.t_current() || lo < 0.0) {
        throw InvalidInput("window_max: window outside the integrated range");
    }
    const std::size_t n = traj.n();
    std::vector<double> out(n, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::max(traj.eval_state(i, lo), traj.eval_state(i, hi));
    }
    const auto& t = traj.knot_times();
    auto it = std::lower_bound(t.begin(), t.end(), lo);
    for (; it != t.end() && *it <= hi; ++it) {
        const auto A = traj.knot_A(static_cast<std::size_t>(it - t.begin()));
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = std::max(out[i], A[i]);
        }
    }
    return out;
}

namespace {

LimsupEstimate estimate_at(const DenseTrajectory& traj, double T, double window_fraction) {
    if (!(window_fraction > 0.0) || !(window_fraction < 1.0)) {
        throw InvalidInput("limsup_estimate: window fraction must lie in (0, 1)");
    }
    if (!(T > 0.0) || T > traj.t_current()) {
        throw InvalidInput("limsup_estimate: end time outside the run");
    }
    const double lo = (1.0 - window_fraction) * T;
    const double mid = 0.5 * (lo + T);
    LimsupEstimate est;
    est.value = window_max(traj, lo, T);
    const auto first = window_max(traj, lo, mid);
    const auto second = window_max(traj, mid, T);
    est.conclusive = true;
    for (std::size_t i = 0; i < traj.n(); ++i) {
        if (!(traj.eval_lag(i, T) > 0.8 * T)) {
            est.conclusive = false;
        }
        est.growing.push_back(second[i] > 1.01 * first[i]);
    }
    return est;
}

}  // namespace

LimsupEstimate limsup_estimate(const DenseTrajectory& traj, double window_fraction) {
    if (traj.empty()) {
        throw InvalidInput("limsup_estimate: empty trajectory");
    }
    return estimate_at(traj, traj.t_current(), window_fraction);
}

ModelConfig with_initial_condition(const ModelConfig& config, const InitialCondition& ic) {
    if (ic.tau0.size() != config.n() || ic.history.size() != config.n()) {
        throw InvalidInput("initial condition: need one tau0 and one history per species");
    }
    ModelConfig out = config;
    for (std::size_t i = 0; i < config.n(); ++i) {
        out.species[i].tau0 = ic.tau0[i];
        out.species[i].history = ic.history[i];
    }
    return out;
}

InitialCondition normalized_constant_member(const ModelConfig& config, double amplitude,
                                            const std::vector<double>& C) {
    if (!(amplitude >= 0.0) || C.size() != config.n()) {
        throw InvalidInput("normalized_constant_member: need amplitude >= 0 and one C per species");
    }
    InitialCondition ic;
    for (std::size_t i = 0; i < config.n(); ++i) {
        double row = 0.0;
        for (double z : config.zeta[i]) {
            row += z;
        }
        ic.tau0.push_back(C[i] / eval_f(config.species[i].f, row * amplitude));
        ic.history.push_back(InitialHistory::constant(amplitude));
    }
    return ic;
}

void check_intake(const ModelConfig& config, double delta, const InitialCondition& member) {
    const ModelConfig cfg = with_initial_condition(config, member);
    validate(cfg);
    const auto C = compute_normalization(cfg).C;
    for (std::size_t i = 0; i < cfg.n(); ++i) {
        std::ostringstream os;
        os << "species " << i + 1 << ": ";
        if (!(cfg.species[i].tau0 > 0.0)) {
            os << "tau0 = 0, but ensemble members need tau0 > 0";
            throw ValidationError("dissipativity-intake", os.str());
        }
        // Members built to carry exactly delta may land an ulp or a
        // quadrature tolerance below it.
        if (C[i] < delta - 1e-10 * std::max(1.0, delta)) {
            os << "integral of f over the history is " << fmt(C[i]) << ", below delta = " << fmt(delta);
            throw ValidationError("dissipativity-intake", os.str());
        }
    }
}

std::vector<EnsembleRun> run_ensemble(const ModelConfig& config,
                                      const std::vector<InitialCondition>& members,
                                      const std::vector<double>& amplitudes,
                                      const IntegratorSettings& settings) {
    std::vector<std::future<SolveResult>> jobs;
    jobs.reserve(members.size());
    for (const auto& m : members) {
        jobs.push_back(std::async(std::launch::async, [cfg = with_initial_condition(config, m), settings] {
            return solve(cfg, settings);
        }));
    }
    std::vector<EnsembleRun> out;
    for (std::size_t k = 0; k < members.size(); ++k) {
        out.push_back({members[k], k < amplitudes.size() ? amplitudes[k] : 0.0, jobs[k].get()});
    }
    return out;
}

namespace {

VerificationReport dissipativity_from_runs(const std::vector<EnsembleRun>& runs, double T,
                                           double window_fraction, double spread_tol) {
    const auto start = Clock::now();
    VerificationReport report;
    if (runs.empty()) {
        throw InvalidInput("dissipativity: empty ensemble");
    }
    const std::size_t n = runs.front().result.trajectory.n();
    std::vector<double> lo(n, std::numeric_limits<double>::infinity()), hi(n, 0.0);
    std::size_t inconclusive = 0;
    for (const auto& r : runs) {
        const auto est = estimate_at(r.result.trajectory, T, window_fraction);
        if (!est.conclusive) {
            ++inconclusive;
        }
        for (std::size_t i = 0; i < n; ++i) {
            lo[i] = std::min(lo[i], est.value[i]);
            hi[i] = std::max(hi[i], est.value[i]);
        }
    }
    double spread = 0.0;
    std::ostringstream bounds;
    for (std::size_t i = 0; i < n; ++i) {
        spread = std::max(spread, 1.0 - lo[i] / hi[i]);
        report.metadata["dissipativity.M_hat." + std::to_string(i + 1)] = fmt(hi[i]);
        bounds << (i ? ", " : "") << "M_hat_" << i + 1 << " = " << fmt(hi[i]);
    }
    const double elapsed = seconds_since(start);
    report.add({"dissipativity.conclusive", inconclusive == 0, static_cast<double>(inconclusive), 0.0,
                elapsed, "members whose lag(T) <= 0.8 T"});
    report.add({"dissipativity.bound", true, 0.0, 0.0, elapsed,
                "every estimate <= ensemble max; " + bounds.str()});
    report.add({"dissipativity.ic-independence", spread <= spread_tol, spread, spread_tol, elapsed,
                "1 - min/max of the trailing-window estimates over " + std::to_string(runs.size()) +
                    " members"});
    return report;
}

}  // namespace

VerificationReport dissipativity_suite(const ModelConfig& config, double delta,
                                       const std::vector<InitialCondition>& ensemble,
                                       const IntegratorSettings& settings, double window_fraction,
                                       double spread_tol) {
    for (const auto& m : ensemble) {
        check_intake(config, delta, m);
    }
    const auto runs = run_ensemble(config, ensemble, {}, settings);
    return dissipativity_from_runs(runs, settings.t_end, window_fraction, spread_tol);
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{
        "degenerate", "conservation", "delay-equivalence", "lag-monotonicity", "equilibrium",
        "boundedness", "dissipativity", "smith", "pde", "certificates"};
    return names;
}

namespace {

class SuiteRunner {
public:
    SuiteRunner(const ModelConfig& config, const SuiteOptions& options)
        : config_(config), options_(options) {
        validate(config_);
        C_ = compute_normalization(config_).C;
    }

    void run(const std::string& name, VerificationReport& report) {
        if (name == "degenerate") {
            degenerate(report);
        } else if (name == "conservation") {
            conservation(report);
        } else if (name == "delay-equivalence") {
            delay_equivalence(report);
        } else if (name == "lag-monotonicity") {
            lag_monotonicity(report);
        } else if (name == "equilibrium") {
            equilibrium_suite(report);
        } else if (name == "boundedness") {
            boundedness(report);
        } else if (name == "dissipativity") {
            dissipativity(report);
        } else if (name == "smith") {
            smith_suite(report);
        } else if (name == "pde") {
            pde_suite(report);
        } else if (name == "certificates") {
            certificates(report);
        } else {
            throw InvalidInput("unknown suite '" + name + "'");
        }
    }

private:
    bool all_delayed() const {
        return std::all_of(config_.species.begin(), config_.species.end(),
                           [](const SpeciesParams& s) { return s.tau0 > 0.0; });
    }

    // Pure delay-ODE run (no re-anchoring), shared by the trajectory checks.
    const SolveResult& base() {
        if (!base_) {
            IntegratorSettings s = options_.settings;
            s.reanchor_every = 0;
            base_start_ = Clock::now();
            base_ = solve(config_, s);
            base_seconds_ = seconds_since(base_start_);
        }
        return *base_;
    }

    const std::vector<EnsembleRun>& ensemble() {
        if (!ensemble_) {
            std::vector<InitialCondition> members;
            for (double a : options_.amplitudes) {
                members.push_back(normalized_constant_member(config_, a, C_));
            }
            IntegratorSettings s = options_.settings;
            s.h = options_.long_run_h;
            s.t_end = options_.t_long;
            s.residual_every = 0;
            ensemble_ = run_ensemble(config_, members, options_.amplitudes, s);
        }
        return *ensemble_;
    }

    void degenerate(VerificationReport& report) {
        const auto start = Clock::now();
        ModelConfig cfg = config_;
        for (auto& sp : cfg.species) {
            sp.tau0 = 0.0;
            sp.history = InitialHistory::constant(sp.history(0.0));
        }
        IntegratorSettings s = options_.settings;
        s.t_end = 10.0;
        const auto r = solve(cfg, s);
        double worst = 0.0;
        for (std::size_t i = 0; i < cfg.n(); ++i) {
            const auto& sp = cfg.species[i];
            const double exact = sp.history(0.0) * std::exp((sp.beta - sp.mu_A) * 10.0);
            const double got = r.trajectory.eval_state(i, 10.0);
            worst = std::max(worst, std::abs(got - exact) / std::abs(exact));
        }
        report.add({"degenerate.closed-form", worst <= 1e-8, worst, 1e-8, seconds_since(start),
                    "tau0 = 0: relative error of A(10) against A(0) e^{(beta - mu_A) 10}"});
    }

    void conservation(VerificationReport& report) {
        const auto& r = base();
        double worst = 0.0;
        for (std::size_t i = 0; i < config_.n(); ++i) {
            worst = std::max(worst, r.diagnostics.max_abs_residual[i] / std::max(C_[i], 1.0));
        }
        report.add({"conservation.residual", worst <= 1e-6, worst, 1e-6, base_seconds_,
                    "max |integral_{t - tau}^t f - C| / max(C, 1) over knots, pure delay ODE"});
    }

    void delay_equivalence(VerificationReport& report) {
        const auto& r = base();
        const auto start = Clock::now();
        const auto& traj = r.trajectory;
        double worst = 0.0;
        for (std::size_t k = 0; k < traj.knot_count(); ++k) {
            for (std::size_t i = 0; i < config_.n(); ++i) {
                if (C_[i] == 0.0) {
                    continue;
                }
                const double t = traj.knot_time(k);
                worst = std::max(worst, std::abs(traj.knot_tau(k)[i] - tau_from_integral(traj, i, t, C_[i])));
            }
        }
        report.add({"delay-equivalence.ode-vs-integral", worst <= 1e-8, worst, 1e-8,
                    seconds_since(start) + base_seconds_, "max |tau_ODE - tau_integral| over knots"});
    }

    void lag_monotonicity(VerificationReport& report) {
        const auto& r = base();
        const auto start = Clock::now();
        const bool monotone = lag_floor_check(r.trajectory);
        report.add({"lag.monotone", monotone, monotone ? 0.0 : 1.0, 0.0, seconds_since(start),
                    "knot lags strictly increasing from -tau0"});
        double worst = 0.0;
        std::string missing;
        for (std::size_t i = 0; i < config_.n(); ++i) {
            if (config_.species[i].tau0 == 0.0) {
                continue;
            }
            const auto ts = detect_tstar(r.trajectory, i);
            if (!ts) {
                missing += (missing.empty() ? "" : ", ") + std::to_string(i + 1);
                continue;
            }
            worst = std::max(worst, std::abs(r.trajectory.eval_lag(i, *ts)));
            report.metadata["tstar." + std::to_string(i + 1)] = fmt(*ts);
        }
        const bool ok = missing.empty() && worst <= 1e-10;
        report.add({"lag.tstar", ok, worst, 1e-10, seconds_since(start),
                    missing.empty() ? "|lag(t*)| per species"
                                    : "lag never crossed 0 for species " + missing});
    }

    void equilibrium_suite(VerificationReport& report) {
        const auto start = Clock::now();
        ModelConfig cfg = config_;
        std::vector<Equilibrium> eq;
        double stat_res = 0.0;
        for (std::size_t i = 0; i < config_.n(); ++i) {
            if (C_[i] == 0.0 || !diagonal_row(config_, i)) {
                report.skipped.push_back("equilibrium");
                return;
            }
            const auto out = equilibrium(config_, i, C_[i]);
            if (!out.value) {
                report.skipped.push_back("equilibrium");
                return;
            }
            const auto& sp = config_.species[i];
            const auto& e = *out.value;
            stat_res = std::max(stat_res, std::abs(sp.beta * std::exp(-sp.mu_J * e.delay) - sp.mu_A));
            stat_res = std::max(stat_res,
                                std::abs(eval_f(sp.f, config_.zeta[i][i] * e.adults) * e.delay - C_[i]));
            eq.push_back(e);
            cfg.species[i].tau0 = e.delay;
            cfg.species[i].history = InitialHistory::constant(e.adults);
            report.metadata["equilibrium.A_star." + std::to_string(i + 1)] = fmt(e.adults);
            report.metadata["equilibrium.tau_bar." + std::to_string(i + 1)] = fmt(e.delay);
        }
        report.add({"equilibrium.stationarity", stat_res < 1e-10, stat_res, 1e-10, seconds_since(start),
                    "residuals of beta e^{-mu_J tau} = mu_A and f(zeta A*) tau = C"});
        IntegratorSettings s = options_.settings;
        s.t_end = 100.0;
        const auto r = solve(cfg, s);
        double drift = 0.0;
        double tstar_err = 0.0;
        for (std::size_t k = 0; k < r.trajectory.knot_count(); ++k) {
            for (std::size_t i = 0; i < cfg.n(); ++i) {
                drift = std::max(drift, std::abs(r.trajectory.knot_A(k)[i] - eq[i].adults));
                drift = std::max(drift, std::abs(r.trajectory.knot_tau(k)[i] - eq[i].delay));
            }
        }
        for (std::size_t i = 0; i < cfg.n(); ++i) {
            const auto ts = detect_tstar(r.trajectory, i);
            tstar_err = std::max(tstar_err, ts ? std::abs(*ts - eq[i].delay) : HUGE_VAL);
        }
        const double elapsed = seconds_since(start);
        report.add({"equilibrium.flat", drift <= 1e-8, drift, 1e-8, elapsed,
                    "max deviation of (A, tau) from (A*, tau_bar) over t in [0, 100]"});
        report.add({"equilibrium.tstar", tstar_err <= 1e-6, tstar_err, 1e-6, elapsed,
                    "|t* - tau_bar| for the equilibrium run"});
    }

    void boundedness(VerificationReport& report) {
        if (!all_delayed()) {
            report.skipped.push_back("boundedness");
            return;
        }
        const auto start = Clock::now();
        const auto& runs = ensemble();
        const double w = options_.window_fraction;
        double growth = 0.0;
        bool finite = true;
        for (const auto& r : runs) {
            const auto& traj = r.result.trajectory;
            const auto early = window_max(traj, (1.0 - w) * options_.t_short, options_.t_short);
            const auto late = window_max(traj, (1.0 - w) * options_.t_long, options_.t_long);
            for (std::size_t i = 0; i < config_.n(); ++i) {
                finite = finite && std::isfinite(late[i]);
                growth = std::max(growth, late[i] / early[i] - 1.0);
            }
        }
        std::ostringstream os;
        os << "max over members of (late window max / early window max) - 1; windows ["
           << (1.0 - w) * options_.t_short << ", " << options_.t_short << "] and ["
           << (1.0 - w) * options_.t_long << ", " << options_.t_long << "]";
        report.add({"boundedness.no-growth", finite && growth < 0.01, growth, 0.01, seconds_since(start),
                    os.str()});
    }

    void dissipativity(VerificationReport& report) {
        if (!all_delayed()) {
            report.skipped.push_back("dissipativity");
            return;
        }
        const auto start = Clock::now();
        const double delta = *std::min_element(C_.begin(), C_.end());
        for (double a : options_.amplitudes) {
            check_intake(config_, delta, normalized_constant_member(config_, a, C_));
        }
        report.merge(dissipativity_from_runs(ensemble(), options_.t_short, options_.window_fraction, 0.05));

        // A member carrying half the required integral must be turned away.
        std::vector<double> half = C_;
        for (double& c : half) {
            c *= 0.5;
        }
        bool rejected = false;
        std::string why;
        try {
            check_intake(config_, delta, normalized_constant_member(config_, 1.0, half));
        } catch (const ValidationError& e) {
            rejected = true;
            why = e.what();
        }
        report.add({"dissipativity.intake-rejects", rejected, rejected ? 0.0 : 1.0, 0.0,
                    seconds_since(start), rejected ? why : "member with half the integral was accepted"});

        // Recorded only: the ensemble bound for other delta levels.
        IntegratorSettings s = options_.settings;
        s.h = options_.long_run_h;
        s.t_end = options_.t_short;
        s.residual_every = 0;
        std::ostringstream sweep;
        for (double scale : {0.5, 2.0}) {
            std::vector<double> C = C_;
            for (double& c : C) {
                c *= scale;
            }
            std::vector<InitialCondition> members;
            for (double a : options_.amplitudes) {
                members.push_back(normalized_constant_member(config_, a, C));
            }
            double m_hat = 0.0;
            for (const auto& r : run_ensemble(config_, members, options_.amplitudes, s)) {
                const auto est = estimate_at(r.result.trajectory, s.t_end, options_.window_fraction);
                m_hat = std::max(m_hat, *std::max_element(est.value.begin(), est.value.end()));
            }
            sweep << (sweep.tellp() > 0 ? "; " : "") << "delta x" << scale << ": " << fmt(m_hat);
        }
        report.metadata["dissipativity.delta_sweep"] = sweep.str();
    }

    void smith_suite(VerificationReport& report) {
        if (config_.n() != 1 || C_[0] == 0.0) {
            report.skipped.push_back("smith");
            return;
        }
        const auto& r = base();
        const auto start = Clock::now();
        const auto transform = smith::build_transform(r.trajectory);
        const auto history = smith::transform_history(config_, std::min(options_.settings.h, 1e-3));
        const auto sol = smith::solve_constant_delay(config_, history, transform.x_end() * (1.0 + 1e-9) + history.dx());
        const auto rt = smith::compare(r.trajectory, transform, sol, 10);
        const double elapsed = seconds_since(start);
        report.add({"smith.round-trip", rt.max_state_error <= 1e-5, rt.max_state_error, 1e-5, elapsed,
                    "sup |W(Phi(t)) - A(t)| over knots"});
        report.add({"smith.delay-recovery", rt.max_delay_error <= 1e-6, rt.max_delay_error, 1e-6, elapsed,
                    "sup |integral_{-delta}^0 1/f(W(Phi(t) + r)) dr - tau(t)|"});
        report.add({"smith.phi-shift", rt.max_phi_shift_error <= 1e-8, rt.max_phi_shift_error, 1e-8,
                    elapsed, "sup |Phi(t - tau(t)) - Phi(t) + delta| over knots"});
    }

    void pde_suite(VerificationReport& report) {
        if (config_.n() != 1 || C_[0] == 0.0 ||
            config_.species[0].history.kind != InitialHistory::Kind::Constant) {
            report.skipped.push_back("pde");
            return;
        }
        const auto start = Clock::now();
        const double A0 = config_.species[0].history.value;
        const double t_end = options_.settings.t_end;
        std::vector<double> err;
        for (std::size_t Ns : {std::size_t{2000}, std::size_t{4000}}) {
            const auto init = pde::consistent_pde_init(A0, config_, 0.0, C_[0], Ns);
            IntegratorSettings s = options_.settings;
            s.residual_every = 0;
            const auto ref = solve(init.sdde, s);
            const auto series = pde::pde_solve(init.grid, init.sdde, t_end);
            err.push_back(pde::sup_relative_difference(series, ref.trajectory));
        }
        const double elapsed = seconds_since(start);
        report.add({"pde.agreement", err[0] <= 0.02, err[0], 0.02, elapsed,
                    "sup relative |A_pde - A_sdde| at Ns = 2000"});
        const double ratio = err[0] / err[1];
        report.add({"pde.refinement", ratio >= 2.0, ratio, 2.0, elapsed,
                    "error ratio Ns = 2000 over Ns = 4000 (first order halves the error)"});
    }

    void certificates(VerificationReport& report) {
        const auto start = Clock::now();
        bool monotone = true;
        double worst_margin = HUGE_VAL;
        double worst_threshold_gap = HUGE_VAL;
        bool any = false;
        for (std::size_t i = 0; i < config_.n(); ++i) {
            if (C_[i] == 0.0 || !config_.species[i].f.has_growth_ratio_bound()) {
                continue;
            }
            any = true;
            double prev = 0.0;
            for (int k = 0; k < 10; ++k) {
                const double tau = comparison_delay(config_, i, 0.125 * std::ldexp(1.0, k), C_[i]);
                monotone = monotone && tau > prev;
                prev = tau;
            }
            const auto cert = boundedness_certificate(config_, i, C_[i]);
            const double margin = certificate_margin(config_, i, cert.tau_i_m);
            worst_margin = std::min(worst_margin, cert.valid ? margin : -HUGE_VAL);
            const auto& sp = config_.species[i];
            double row = 0.0;
            for (double z : config_.zeta[i]) {
                row += z;
            }
            const double need = sp.beta * growth_ratio_bound(sp.f, row / config_.zeta[i][i]) / sp.mu_A;
            const double threshold = need > 1.0 ? std::log(need) / sp.mu_J : 0.0;
            worst_threshold_gap = std::min(worst_threshold_gap, cert.tau_i_m - threshold);
            const std::string key = "certificate." + std::to_string(i + 1);
            report.metadata[key + ".m"] = fmt(cert.m);
            report.metadata[key + ".tau"] = fmt(cert.tau_i_m);
            report.metadata[key + ".margin"] = fmt(margin);
        }
        if (!any) {
            report.skipped.push_back("certificates");
            return;
        }
        const double elapsed = seconds_since(start);
        report.add({"certificates.monotone", monotone, monotone ? 0.0 : 1.0, 0.0, elapsed,
                    "comparison delay strictly increasing over m = 0.125 * 2^k, k = 0..9"});
        report.add({"certificates.margin", worst_margin > 0.0 && worst_threshold_gap > -1e-6, worst_margin,
                    0.0, elapsed, "re-evaluated margin > 0 and tau_m above ln(beta M_f / mu_A) / mu_J - 1e-6"});
    }

    const ModelConfig& config_;
    const SuiteOptions& options_;
    std::vector<double> C_;
    std::optional<SolveResult> base_;
    Clock::time_point base_start_;
    double base_seconds_ = 0.0;
    std::optional<std::vector<EnsembleRun>> ensemble_;
};

}  // namespace

VerificationReport run_suites(const ModelConfig& config, const std::vector<std::string>& names,
                              const SuiteOptions& options) {
    std::vector<std::string> expanded;
    for (const auto& name : names) {
        if (name == "all") {
            expanded.insert(expanded.end(), suite_names().begin(), suite_names().end());
        } else if (std::find(suite_names().begin(), suite_names().end(), name) != suite_names().end()) {
            expanded.push_back(name);
        } else {
            throw InvalidInput("unknown suite '" + name + "'");
        }
    }
    std::vector<std::string> unique;
    for (const auto& name : expanded) {
        if (std::find(unique.begin(), unique.end(), name) == unique.end()) {
            unique.push_back(name);
        }
    }

    options.settings.validate();
    VerificationReport report;
    report.metadata["config_hash"] = io::config_hash_hex(config);
    report.metadata["h"] = fmt(options.settings.h);
    report.metadata["t_end"] = fmt(options.settings.t_end);
    report.metadata["reanchor_every"] = std::to_string(options.settings.reanchor_every);
    report.metadata["version"] = io::kVersion;
    SuiteRunner runner(config, options);
    for (const auto& name : unique) {
        runner.run(name, report);
    }
    return report;
}

}  // namespace forest::verify
