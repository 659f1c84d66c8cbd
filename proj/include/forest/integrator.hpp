#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "forest/model.hpp"
#include "forest/trajectory.hpp"

namespace forest {

struct IntegratorSettings {
    double h = 1e-3;
    double t_end = 50.0;
    int max_fixed_point_iters = 10;
    double fp_tol = 1e-12;
    int reanchor_every = 100;  // 0 disables re-anchoring of the delay ODE
    // Steps are cut where a lag crosses a tracked discontinuity. Level 1 is the
    // crossing of t = 0 (t*), level 2 the crossing of a level-1 point (t**).
    // 0 disables cutting.
    int breaking_point_levels = 2;
    int max_halvings = 10;     // step may shrink down to h / 2^max_halvings
    int residual_every = 1;    // conservation residual sampling stride, 0 disables

    void validate() const;
};

// Populations and delays of all species at one time.
struct SystemState {
    std::vector<double> A;
    std::vector<double> tau;
};

struct BreakingPoint {
    double t = 0.0;
    int level = 0;            // 0 for the start of the run
    std::size_t species = 0;  // whose lag produced it
};

struct BreakingPointLog {
    std::vector<std::optional<double>> tstar;  // per species
    std::vector<BreakingPoint> points;         // in time order, starting with t = 0
    std::vector<double> restarts;              // step start times that needed halving
};

struct ResidualSample {
    double t = 0.0;
    std::vector<double> residual;  // one per species
};

struct SolveDiagnostics {
    std::size_t steps = 0;
    std::size_t fixed_point_steps = 0;  // steps whose delayed argument fell inside the step
    std::size_t reanchors = 0;
    std::vector<double> max_abs_residual;
    std::vector<ResidualSample> residuals;
};

struct SolveResult {
    DenseTrajectory trajectory;
    BreakingPointLog breaks;
    SolveDiagnostics diagnostics;
};

struct StepResult {
    SystemState next;
    SystemState deriv_next;
    int fixed_point_iters = 0;  // 0 when no delayed argument landed inside the step
};

/// Derivatives of (A, tau) at time t; delayed values come from `traj`.
[[nodiscard]] SystemState rhs(const DenseTrajectory& traj, double t, const SystemState& state);

/// One classical RK4 step of size h from the last knot of `traj` (t must equal
/// traj.t_current()). Delayed arguments inside (t, t + h) are resolved by a
/// fixed-point iteration on a provisional Hermite segment.
/// Throws NumericalFailure on negative populations or fixed-point divergence.
[[nodiscard]] StepResult step(const DenseTrajectory& traj, double t, const SystemState& state,
                              double h, const IntegratorSettings& settings = {});

/// Integrates the coupled population/delay system on [0, settings.t_end].
[[nodiscard]] SolveResult solve(const ModelConfig& config, const IntegratorSettings& settings);

}  // namespace forest
