#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "forest/trajectory.hpp"

namespace forest {

// Maturation delays of every species at one instant.
struct DelayState {
    double t = 0.0;
    std::vector<double> tau;
    std::vector<double> lag;  // t - tau_i(t)
    std::vector<double> C;
};

[[nodiscard]] DelayState delay_state(const DenseTrajectory& traj, double t);

/// Right-hand side of the delay ODE, tau' = 1 - f_now / f_lag.
[[nodiscard]] double tau_rhs(double f_now, double f_lag);

/// Delay recovered from the threshold condition: the tau solving
/// integral_{t - tau}^{t} f_i(Z_i) = C_i, by bisection on tau in [0, t + tau_i0].
[[nodiscard]] double tau_from_integral(const DenseTrajectory& traj, std::size_t i, double t,
                                       double C_i);

/// integral_{t - tau_i(t)}^{t} f_i(Z_i) - C_i with tau_i taken from the dense output.
[[nodiscard]] double conservation_residual(const DenseTrajectory& traj, std::size_t i, double t);

/// Time at which t - tau_i(t) crosses zero, if the run has reached it.
/// Returns 0 for tau_i0 = 0.
[[nodiscard]] std::optional<double> detect_tstar(const DenseTrajectory& traj, std::size_t i);

/// True iff every lag is strictly increasing across knots and starts at -tau_i0.
[[nodiscard]] bool lag_floor_check(const DenseTrajectory& traj);

}  // namespace forest
