#include "forest/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "forest/delay.hpp"
#include "forest/errors.hpp"

namespace forest {

void IntegratorSettings::validate() const {
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw InvalidInput("integrator: h must be > 0");
    }
    if (!(t_end > 0.0) || !std::isfinite(t_end)) {
        throw InvalidInput("integrator: t_end must be > 0");
    }
    if (max_fixed_point_iters < 1 || !(fp_tol > 0.0) || reanchor_every < 0 || max_halvings < 0 ||
        residual_every < 0 || breaking_point_levels < 0) {
        throw InvalidInput("integrator: invalid iteration settings");
    }
}

namespace {

struct FixedPointNotConverged {};

// Delayed-value source: committed dense output, plus an optional provisional
// segment covering the step currently being taken.
class Lookup {
public:
    explicit Lookup(const DenseTrajectory& traj) : traj_(traj), n_(traj.n()) {}

    void set_provisional(double t0, double h, const SystemState& y0, const SystemState& d0,
                         const std::vector<double>& y1, const std::vector<double>& d1) {
        has_prov_ = true;
        t0_ = t0;
        h_ = h;
        y0_ = y0.A;
        d0_ = d0.A;
        y1_ = y1;
        d1_ = d1;
    }
    void clear_provisional() { has_prov_ = false; }

    [[nodiscard]] bool touched() const noexcept { return touched_; }
    void reset_touched() noexcept { touched_ = false; }

    [[nodiscard]] double state(std::size_t j, double s) const {
        if (s <= 0.0 || traj_.empty() || s <= traj_.t_current()) {
            return traj_.state_unchecked(j, s);
        }
        if (!has_prov_) {
            throw NumericalFailure("delayed argument beyond the integrated range");
        }
        touched_ = true;
        return hermite(y0_[j], d0_[j], y1_[j], d1_[j], h_, (s - t0_) / h_);
    }

    [[nodiscard]] double weighted_total(std::size_t i, double s) const {
        if (s <= 0.0) {
            return traj_.config().history_weighted_total(i, s);
        }
        const auto& row = traj_.config().zeta[i];
        double z = 0.0;
        for (std::size_t j = 0; j < n_; ++j) {
            if (row[j] != 0.0) {
                z += row[j] * state(j, s);
            }
        }
        return z;
    }

private:
    const DenseTrajectory& traj_;
    std::size_t n_;
    bool has_prov_ = false;
    double t0_ = 0.0;
    double h_ = 1.0;
    std::vector<double> y0_, d0_, y1_, d1_;
    mutable bool touched_ = false;
};

void eval_rhs(const ModelConfig& cfg, const Lookup& lookup, double t, const SystemState& y,
              SystemState& dy) {
    const std::size_t n = cfg.n();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& sp = cfg.species[i];
        if (sp.tau0 == 0.0) {
            // tau stays identically zero and the delayed term is the current state.
            dy.A[i] = (sp.beta - sp.mu_A) * y.A[i];
            dy.tau[i] = 0.0;
            continue;
        }
        const double tau = y.tau[i];
        if (!(tau > 0.0)) {
            std::ostringstream os;
            os << "delay of species " << i + 1 << " became non-positive (" << tau << ") at t=" << t
               << "; reduce h";
            throw NumericalFailure(os.str());
        }
        double s = t - tau;
        if (s < -sp.tau0) {
            if (s < -sp.tau0 - 1e-12 * std::max(1.0, sp.tau0)) {
                std::ostringstream os;
                os << "lag of species " << i + 1 << " fell below -tau0 at t=" << t << " (lag " << s
                   << ")";
                throw NumericalFailure(os.str());
            }
            s = -sp.tau0;
        }
        const double f_now = eval_f(sp.f, std::max(cfg.weighted_total(i, y.A), 0.0));
        const double f_lag = eval_f(sp.f, std::max(lookup.weighted_total(i, s), 0.0));
        const double ratio = f_now / f_lag;
        const double a_lag = lookup.state(i, s);
        dy.A[i] = -sp.mu_A * y.A[i] + sp.beta * std::exp(-sp.mu_J * tau) * ratio * a_lag;
        dy.tau[i] = 1.0 - ratio;
    }
}

SystemState zero_state(std::size_t n) { return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)}; }

// Workspace for RK4 steps over a fixed species count.
class Stepper {
public:
    Stepper(const DenseTrajectory& traj, const IntegratorSettings& settings)
        : traj_(traj), cfg_(traj.config()), settings_(settings), n_(traj.n()), lookup_(traj),
          k1_(zero_state(n_)), k2_(zero_state(n_)), k3_(zero_state(n_)), k4_(zero_state(n_)),
          tmp_(zero_state(n_)) {}

    StepResult step(double t, const SystemState& y, const SystemState& dy, double h) {
        // Initial provisional end point: extrapolate the last committed segment.
        std::vector<double> y1(n_), d1(n_);
        const std::size_t K = traj_.knot_count();
        if (K >= 2) {
            const double ta = traj_.knot_time(K - 2);
            const double hp = t - ta;
            const double th = 1.0 + h / hp;
            const auto a0 = traj_.knot_A(K - 2);
            const auto da0 = traj_.knot_dA(K - 2);
            for (std::size_t j = 0; j < n_; ++j) {
                y1[j] = hermite(a0[j], da0[j], y.A[j], dy.A[j], hp, th);
                d1[j] = hermite_derivative(a0[j], da0[j], y.A[j], dy.A[j], hp, th);
            }
        } else {
            for (std::size_t j = 0; j < n_; ++j) {
                y1[j] = y.A[j] + h * dy.A[j];
                d1[j] = dy.A[j];
            }
        }
        lookup_.set_provisional(t, h, y, dy, y1, d1);

        StepResult out{zero_state(n_), zero_state(n_), 0};
        std::vector<double> previous;
        for (int iter = 0; iter < settings_.max_fixed_point_iters; ++iter) {
            lookup_.reset_touched();
            rk4(t, y, dy, h, out.next);
            eval_rhs(cfg_, lookup_, t + h, out.next, out.deriv_next);
            if (!lookup_.touched()) {
                out.fixed_point_iters = iter;
                lookup_.clear_provisional();
                check_positive(t + h, out.next);
                return out;
            }
            if (iter > 0) {
                double diff = 0.0;
                for (std::size_t j = 0; j < n_; ++j) {
                    diff = std::max(diff, std::abs(out.next.A[j] - previous[j]));
                }
                if (diff < settings_.fp_tol * std::max(1.0, max_abs(out.next.A))) {
                    out.fixed_point_iters = iter + 1;
                    lookup_.clear_provisional();
                    check_positive(t + h, out.next);
                    return out;
                }
            }
            previous = out.next.A;
            lookup_.set_provisional(t, h, y, dy, out.next.A, out.deriv_next.A);
        }
        lookup_.clear_provisional();
        throw FixedPointNotConverged{};
    }

    SystemState derivative(double t, const SystemState& y) {
        SystemState dy = zero_state(n_);
        eval_rhs(cfg_, lookup_, t, y, dy);
        return dy;
    }

private:
    static double max_abs(const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) {
            m = std::max(m, std::abs(x));
        }
        return m;
    }

    void check_positive(double t, const SystemState& y) const {
        for (std::size_t j = 0; j < n_; ++j) {
            if (!(y.A[j] >= 0.0) || !std::isfinite(y.A[j])) {
                std::ostringstream os;
                os << "population of species " << j + 1 << " became negative or non-finite ("
                   << y.A[j] << ") at t=" << t << "; halve h";
                throw NumericalFailure(os.str());
            }
        }
    }

    void axpy(const SystemState& y, double a, const SystemState& k, SystemState& out) const {
        for (std::size_t j = 0; j < n_; ++j) {
            out.A[j] = y.A[j] + a * k.A[j];
            out.tau[j] = y.tau[j] + a * k.tau[j];
        }
    }

    void rk4(double t, const SystemState& y, const SystemState& dy, double h, SystemState& next) {
        k1_ = dy;
        axpy(y, 0.5 * h, k1_, tmp_);
        eval_rhs(cfg_, lookup_, t + 0.5 * h, tmp_, k2_);
        axpy(y, 0.5 * h, k2_, tmp_);
        eval_rhs(cfg_, lookup_, t + 0.5 * h, tmp_, k3_);
        axpy(y, h, k3_, tmp_);
        eval_rhs(cfg_, lookup_, t + h, tmp_, k4_);
        const double w = h / 6.0;
        for (std::size_t j = 0; j < n_; ++j) {
            next.A[j] = y.A[j] + w * (k1_.A[j] + 2.0 * k2_.A[j] + 2.0 * k3_.A[j] + k4_.A[j]);
            next.tau[j] = y.tau[j] + w * (k1_.tau[j] + 2.0 * k2_.tau[j] + 2.0 * k3_.tau[j] + k4_.tau[j]);
            if (cfg_.species[j].tau0 == 0.0) {
                next.tau[j] = 0.0;
            }
        }
    }

    const DenseTrajectory& traj_;
    const ModelConfig& cfg_;
    const IntegratorSettings& settings_;
    std::size_t n_;
    Lookup lookup_;
    SystemState k1_, k2_, k3_, k4_, tmp_;
};

// Takes a step of size h, halving on fixed-point failure.
StepResult step_with_halving(Stepper& stepper, double t, const SystemState& y,
                             const SystemState& dy, double& h, const IntegratorSettings& settings,
                             BreakingPointLog& log) {
    const double h_min = h / std::ldexp(1.0, settings.max_halvings);
    while (true) {
        try {
            return stepper.step(t, y, dy, h);
        } catch (const FixedPointNotConverged&) {
            log.restarts.push_back(t);
            if (h / 2.0 < h_min * (1.0 - 1e-12)) {
                std::ostringstream os;
                os << "fixed-point iteration diverged at t=" << t << " down to h=" << h;
                throw NumericalFailure(os.str());
            }
            h /= 2.0;
        }
    }
}

void record_residuals(const DenseTrajectory& traj, SolveDiagnostics& diag) {
    ResidualSample sample{traj.t_current(), std::vector<double>(traj.n(), 0.0)};
    for (std::size_t i = 0; i < traj.n(); ++i) {
        if (traj.config().species[i].tau0 > 0.0) {
            sample.residual[i] = conservation_residual(traj, i, traj.t_current());
        }
        diag.max_abs_residual[i] = std::max(diag.max_abs_residual[i], std::abs(sample.residual[i]));
    }
    diag.residuals.push_back(std::move(sample));
}

}  // namespace

SystemState rhs(const DenseTrajectory& traj, double t, const SystemState& state) {
    if (state.A.size() != traj.n() || state.tau.size() != traj.n()) {
        throw InvalidInput("rhs: state size mismatch");
    }
    Lookup lookup(traj);
    SystemState dy = zero_state(traj.n());
    eval_rhs(traj.config(), lookup, t, state, dy);
    return dy;
}

StepResult step(const DenseTrajectory& traj, double t, const SystemState& state, double h,
                const IntegratorSettings& settings) {
    if (traj.empty() || t != traj.t_current()) {
        throw InvalidInput("step: t must equal the last knot of the trajectory");
    }
    if (!(h > 0.0)) {
        throw InvalidInput("step: h must be > 0");
    }
    Stepper stepper(traj, settings);
    const SystemState dy = stepper.derivative(t, state);
    try {
        return stepper.step(t, state, dy, h);
    } catch (const FixedPointNotConverged&) {
        throw NumericalFailure("step: fixed-point iteration did not converge");
    }
}

SolveResult solve(const ModelConfig& config, const IntegratorSettings& settings) {
    validate(config);
    settings.validate();
    const std::size_t n = config.n();

    SolveResult result{DenseTrajectory(config, compute_normalization(config)), {}, {}};
    DenseTrajectory& traj = result.trajectory;
    BreakingPointLog& log = result.breaks;
    SolveDiagnostics& diag = result.diagnostics;
    diag.max_abs_residual.assign(n, 0.0);
    log.tstar.assign(n, std::nullopt);

    log.points.push_back({0.0, 0, 0});
    // Indices into log.points of the discontinuities whose crossings cut steps,
    // and per species the next one its lag has not yet passed.
    std::vector<std::size_t> tracked{0};
    std::vector<std::size_t> next_point(n, 0);

    SystemState y = zero_state(n);
    for (std::size_t i = 0; i < n; ++i) {
        y.A[i] = config.species[i].history(0.0);
        y.tau[i] = config.species[i].tau0;
        if (config.species[i].tau0 == 0.0) {
            log.tstar[i] = 0.0;
        }
    }
    Stepper stepper(traj, settings);
    SystemState dy = stepper.derivative(0.0, y);
    traj.append(0.0, y.A, y.tau, dy.A, dy.tau);
    if (settings.residual_every > 0) {
        record_residuals(traj, diag);
    }

    const double t_end = settings.t_end;
    double t = 0.0;
    while (t < t_end) {
        double h = std::min(settings.h, t_end - t);
        if (t_end - (t + h) < 1e-9 * settings.h) {
            h = t_end - t;
        }
        StepResult out = step_with_halving(stepper, t, y, dy, h, settings, log);

        if (settings.breaking_point_levels > 0) {
            // Earliest crossing of a tracked point by any lag inside this step.
            std::optional<std::size_t> crossing;
            double t_cross = t + h;
            for (std::size_t i = 0; i < n; ++i) {
                if (config.species[i].tau0 == 0.0 || next_point[i] >= tracked.size()) {
                    continue;
                }
                const double d = log.points[tracked[next_point[i]]].t;
                const double lag0 = t - y.tau[i];
                const double lag1 = t + h - out.next.tau[i];
                if (lag0 < d && lag1 >= d) {
                    const auto lag_at = [&](double s) {
                        return s - d -
                               hermite(y.tau[i], dy.tau[i], out.next.tau[i], out.deriv_next.tau[i], h,
                                       (s - t) / h);
                    };
                    const double tc = quad::bisect(lag_at, t, t + h);
                    if (!crossing || tc < t_cross) {
                        t_cross = tc;
                        crossing = i;
                    }
                }
            }
            if (crossing) {
                const std::size_t i = *crossing;
                const BreakingPoint crossed = log.points[tracked[next_point[i]]];
                double t_mark = t + h;
                if (t_cross - t <= 1e-9 * h) {
                    t_mark = t;
                } else if (t + h - t_cross > 1e-9 * h) {
                    const double tol = 1e-14 * std::max(1.0, t);
                    double hc = t_cross - t;
                    for (int it = 0; it < 8; ++it) {
                        double h_try = hc;
                        out = step_with_halving(stepper, t, y, dy, h_try, settings, log);
                        hc = h_try;
                        const double miss = t + hc - out.next.tau[i] - crossed.t;
                        if (std::abs(miss) <= tol) {
                            break;
                        }
                        hc -= miss / (1.0 - out.deriv_next.tau[i]);
                    }
                    h = hc;
                    t_mark = t + h;
                }
                ++next_point[i];
                if (crossed.level == 0) {
                    log.tstar[i] = t_mark;
                }
                const bool duplicate = std::any_of(log.points.begin(), log.points.end(), [&](const BreakingPoint& b) {
                    return b.level == crossed.level + 1 && std::abs(b.t - t_mark) <= 1e-9 * settings.h;
                });
                if (!duplicate) {
                    log.points.push_back({t_mark, crossed.level + 1, i});
                    if (crossed.level + 1 < settings.breaking_point_levels) {
                        tracked.push_back(log.points.size() - 1);
                    }
                }
            }
        }

        t += h;
        y = std::move(out.next);
        dy = std::move(out.deriv_next);
        traj.append(t, y.A, y.tau, dy.A, dy.tau);
        ++diag.steps;
        if (out.fixed_point_iters > 0) {
            ++diag.fixed_point_steps;
        }

        if (settings.reanchor_every > 0 && diag.steps % static_cast<std::size_t>(settings.reanchor_every) == 0) {
            bool changed = false;
            for (std::size_t i = 0; i < n; ++i) {
                if (config.species[i].tau0 > 0.0) {
                    y.tau[i] = tau_from_integral(traj, i, t, traj.normalization().C[i]);
                    changed = true;
                }
            }
            if (changed) {
                dy = stepper.derivative(t, y);
                traj.replace_last(y.A, y.tau, dy.A, dy.tau);
                ++diag.reanchors;
            }
        }

        if (settings.residual_every > 0 &&
            (diag.steps % static_cast<std::size_t>(settings.residual_every) == 0 || t >= t_end)) {
            record_residuals(traj, diag);
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (!log.tstar[i]) {
            log.tstar[i] = detect_tstar(traj, i);
        }
    }
    return result;
}

}  // namespace forest
