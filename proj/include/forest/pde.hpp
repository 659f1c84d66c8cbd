#pragma once

#include <cstddef>
#include <vector>

#include "forest/model.hpp"
#include "forest/trajectory.hpp"

namespace forest::pde {

// Juvenile size density on the nodes s_min + k * ds, k = 0..Ns, plus the adult count.
struct PdeGrid {
    double s_min = 0.0;
    double s_max = 1.0;
    std::size_t Ns = 0;
    double dt = 0.0;
    std::vector<double> j;
    double A = 0.0;

    [[nodiscard]] double ds() const noexcept { return (s_max - s_min) / static_cast<double>(Ns); }
};

struct PdeInit {
    PdeGrid grid;
    ModelConfig sdde;  // phi = A0 on [-tau0, 0] with tau0 = (s_max - s_min) / f(zeta A0)
};

/// Characteristic-consistent pair for a constant history A0: juveniles born at
/// rate beta A0 and growing at speed f0 = f(zeta A0) give
/// j0(s) = (beta A0 / f0) e^{-mu_J (s - s_min) / f0}, and the matching delay
/// tau0 = (s_max - s_min) / f0, so C = s_max - s_min.
/// dt = cfl * ds / f(0), since f(0) bounds the growth speed for every A >= 0.
/// Species parameters come from config (n = 1); its tau0 and history are replaced.
[[nodiscard]] PdeInit consistent_pde_init(double A0, const ModelConfig& config, double s_min,
                                          double s_max, std::size_t Ns, double cfl = 0.9);

struct PdeSeries {
    std::vector<double> t;
    std::vector<double> A;
    std::size_t dt_reductions = 0;
};

/// First-order upwind in s, forward Euler in t, inflow j(s_min) = beta A / f(A)
/// and A' = -mu_A A + f(A) j(s_max). dt is halved whenever f(A) dt / ds would
/// exceed 0.9; a speed beyond 10x the bound the grid was built for aborts with
/// NumericalFailure. beta = 0 is allowed here (pure decay).
[[nodiscard]] PdeSeries pde_solve(PdeGrid grid, const ModelConfig& config, double t_end);

/// sup_k |A_pde(t_k) - A_sdde(t_k)| / |A_sdde(t_k)| over the PDE time samples.
[[nodiscard]] double sup_relative_difference(const PdeSeries& series, const DenseTrajectory& traj);

}  // namespace forest::pde
