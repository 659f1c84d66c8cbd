#include "forest/pde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "forest/errors.hpp"

namespace forest::pde {

namespace {

void check_species(const ModelConfig& config) {
    if (config.n() != 1 || config.zeta.size() != 1 || config.zeta[0].size() != 1) {
        throw Unsupported("pde: the size-structured oracle covers a single species only");
    }
    const auto& sp = config.species[0];
    if (!(sp.mu_A > 0.0) || !(sp.mu_J > 0.0) || !(sp.beta >= 0.0) || !(config.zeta[0][0] > 0.0)) {
        throw InvalidInput("pde: need mu_A, mu_J, zeta > 0 and beta >= 0");
    }
}

}  // namespace

PdeInit consistent_pde_init(double A0, const ModelConfig& config, double s_min, double s_max,
                            std::size_t Ns, double cfl) {
    check_species(config);
    if (!(A0 > 0.0) || !(s_max > s_min) || Ns < 1 || !(cfl > 0.0) || cfl > 0.9) {
        throw InvalidInput("consistent_pde_init: need A0 > 0, s_min < s_max, Ns >= 1, 0 < cfl <= 0.9");
    }
    const auto& sp = config.species[0];
    const double f0 = eval_f(sp.f, config.zeta[0][0] * A0);

    PdeInit out;
    out.grid.s_min = s_min;
    out.grid.s_max = s_max;
    out.grid.Ns = Ns;
    out.grid.dt = cfl * out.grid.ds() / eval_f(sp.f, 0.0);
    out.grid.A = A0;
    out.grid.j.resize(Ns + 1);
    const double inflow = sp.beta * A0 / f0;
    for (std::size_t k = 0; k <= Ns; ++k) {
        const double s = s_min + static_cast<double>(k) * out.grid.ds();
        out.grid.j[k] = inflow * std::exp(-sp.mu_J * (s - s_min) / f0);
    }

    out.sdde = config;
    out.sdde.species[0].tau0 = (s_max - s_min) / f0;
    out.sdde.species[0].history = InitialHistory::constant(A0);
    return out;
}

PdeSeries pde_solve(PdeGrid grid, const ModelConfig& config, double t_end) {
    check_species(config);
    if (!(t_end > 0.0) || grid.Ns < 1 || grid.j.size() != grid.Ns + 1 || !(grid.dt > 0.0)) {
        throw InvalidInput("pde_solve: malformed grid or t_end");
    }
    const auto& sp = config.species[0];
    const double zeta = config.zeta[0][0];
    const double ds = grid.ds();
    const double speed_bound = 0.9 * ds / grid.dt;  // speed the grid's dt was built for

    PdeSeries out;
    out.t.push_back(0.0);
    out.A.push_back(grid.A);
    std::vector<double>& j = grid.j;
    std::vector<double> next(j.size());
    double t = 0.0;
    double dt = grid.dt;
    while (t < t_end - 1e-12 * dt) {
        const double f = eval_f(sp.f, zeta * grid.A);
        if (f > 10.0 * speed_bound) {
            std::ostringstream os;
            os << "pde_solve: growth speed " << f << " exceeds 10x the CFL bound at t=" << t;
            throw NumericalFailure(os.str());
        }
        while (f * dt / ds > 0.9) {
            dt /= 2.0;
            ++out.dt_reductions;
        }
        const double step = std::min(dt, t_end - t);
        const double nu = f * step / ds;
        const double decay = 1.0 - sp.mu_J * step;
        for (std::size_t k = 1; k <= grid.Ns; ++k) {
            next[k] = j[k] * decay - nu * (j[k] - j[k - 1]);
        }
        const double A_next = grid.A + step * (-sp.mu_A * grid.A + f * j[grid.Ns]);
        if (!(A_next >= 0.0)) {
            throw NumericalFailure("pde_solve: adult count became negative; reduce dt");
        }
        grid.A = A_next;
        next[0] = sp.beta * grid.A / eval_f(sp.f, zeta * grid.A);
        j.swap(next);
        t += step;
        out.t.push_back(t);
        out.A.push_back(grid.A);
    }
    return out;
}

double sup_relative_difference(const PdeSeries& series, const DenseTrajectory& traj) {
    if (traj.n() != 1) {
        throw Unsupported("sup_relative_difference: single-species trajectories only");
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < series.t.size(); ++k) {
        const double t = series.t[k];
        if (t > traj.t_current()) {
            break;
        }
        const double ref = traj.eval_state(0, t);
        worst = std::max(worst, std::abs(series.A[k] - ref) / std::abs(ref));
    }
    return worst;
}

}  // namespace forest::pde
