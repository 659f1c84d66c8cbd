#include "forest/delay.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "forest/errors.hpp"

namespace forest {

DelayState delay_state(const DenseTrajectory& traj, double t) {
    DelayState st;
    st.t = t;
    st.C = traj.normalization().C;
    for (std::size_t i = 0; i < traj.n(); ++i) {
        st.tau.push_back(traj.eval_delay(i, t));
        st.lag.push_back(t - st.tau.back());
    }
    return st;
}

double tau_rhs(double f_now, double f_lag) {
    if (!(f_now > 0.0) || !(f_lag > 0.0) || !std::isfinite(f_now) || !std::isfinite(f_lag)) {
        throw InvalidInput("tau_rhs: growth rates must be positive and finite");
    }
    return 1.0 - f_now / f_lag;
}

double tau_from_integral(const DenseTrajectory& traj, std::size_t i, double t, double C_i) {
    if (i >= traj.n()) {
        throw InvalidInput("tau_from_integral: species index out of range");
    }
    if (!(t >= 0.0) || C_i < 0.0) {
        throw InvalidInput("tau_from_integral: need t >= 0 and C_i >= 0");
    }
    if (C_i == 0.0) {
        return 0.0;
    }
    const double tau0 = traj.config().species[i].tau0;
    const double since_zero = traj.cumulative_f(i, t);

    if (since_zero >= C_i) {
        // Lower limit lies in [0, t]: bracket on knots, then bisect inside one segment.
        const double target = since_zero - C_i;
        const auto& knots = traj.knot_times();
        std::size_t lo = 0;
        std::size_t hi = static_cast<std::size_t>(
            std::upper_bound(knots.begin(), knots.end(), t) - knots.begin());
        // Invariant: cumulative_f(knots[lo]) <= target, and knots[hi] (or t) is above it.
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            if (traj.cumulative_f(i, knots[mid]) <= target) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        const double a = knots[lo];
        const double b = hi < knots.size() ? std::min(knots[hi], t) : t;
        const auto g = [&](double s) { return traj.cumulative_f(i, s) - target; };
        const double s = quad::bisect(g, a, b);
        return t - s;
    }

    const double remaining = C_i - since_zero;
    const double available = history_f_integral(traj.config(), i, -tau0, 0.0);
    if (available < remaining) {
        throw DomainError("tau_from_integral: available integral " + std::to_string(available) +
                          " is below the required " + std::to_string(remaining));
    }
    const auto g = [&](double s) {
        return history_f_integral(traj.config(), i, s, 0.0) - remaining;
    };
    const double s = quad::bisect(g, -tau0, 0.0);
    return t - s;
}

double conservation_residual(const DenseTrajectory& traj, std::size_t i, double t) {
    const double tau = traj.eval_delay(i, t);
    const double tau0 = traj.config().species[i].tau0;
    double lag = t - tau;
    if (lag < -tau0 && lag > -tau0 - 1e-12 * std::max(1.0, tau0)) {
        lag = -tau0;
    }
    return traj.f_integral(i, lag, t) - traj.normalization().C[i];
}

std::optional<double> detect_tstar(const DenseTrajectory& traj, std::size_t i) {
    if (i >= traj.n()) {
        throw InvalidInput("detect_tstar: species index out of range");
    }
    if (traj.config().species[i].tau0 == 0.0) {
        return 0.0;
    }
    const std::size_t K = traj.knot_count();
    for (std::size_t k = 0; k < K; ++k) {
        const double tk = traj.knot_time(k);
        const double lag = tk - traj.knot_tau(k)[i];
        if (lag == 0.0) {
            return tk;
        }
        if (lag > 0.0) {
            if (k == 0) {
                return tk;
            }
            const auto g = [&](double s) { return traj.eval_lag(i, s); };
            return quad::bisect(g, traj.knot_time(k - 1), tk);
        }
    }
    return std::nullopt;
}

bool lag_floor_check(const DenseTrajectory& traj) {
    const std::size_t K = traj.knot_count();
    if (K == 0) {
        return false;
    }
    for (std::size_t i = 0; i < traj.n(); ++i) {
        const double tau0 = traj.config().species[i].tau0;
        const double first = traj.knot_time(0) - traj.knot_tau(0)[i];
        if (traj.knot_time(0) == 0.0 && std::abs(first + tau0) > 1e-12 * std::max(1.0, tau0)) {
            return false;
        }
        double prev = first;
        for (std::size_t k = 1; k < K; ++k) {
            const double lag = traj.knot_time(k) - traj.knot_tau(k)[i];
            if (!(lag > prev)) {
                return false;
            }
            prev = lag;
        }
    }
    return true;
}

}  // namespace forest
