#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "forest/errors.hpp"
#include "forest/integrator.hpp"
#include "forest/pde.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using namespace forest;

namespace {

SolveResult reference(const ModelConfig& c, double t_end) {
    IntegratorSettings s;
    s.h = 1e-3;
    s.t_end = t_end;
    s.residual_every = 0;
    return solve(c, s);
}

}  // namespace

TEST_CASE("consistent initial data", "[pde]") {
    const auto init = pde::consistent_pde_init(1.0, fixtures::f1(), 0.0, 1.0, 100);
    const double f0 = 0.5;
    CHECK_THAT(init.grid.j.front(), WithinRel(0.2 * 1.0 / f0, 1e-15));
    CHECK_THAT(init.grid.j.back(), WithinRel(0.4 * std::exp(-0.05 * 1.0 / f0), 1e-14));
    CHECK(init.grid.j.size() == 101);
    CHECK_THAT(init.sdde.species[0].tau0, WithinRel(2.0, 1e-15));
    CHECK_THAT(compute_normalization(init.sdde).C[0], WithinAbs(1.0, 1e-12));
    // The size interval fixes C whatever the starting population.
    const auto big = pde::consistent_pde_init(10.0, fixtures::f1(), 0.0, 1.0, 100);
    CHECK_THAT(compute_normalization(big.sdde).C[0], WithinAbs(1.0, 1e-12));
    CHECK_THAT(init.grid.dt, WithinRel(0.9 * 0.01 / 1.0, 1e-15));
}

TEST_CASE("pure decay without births", "[pde]") {
    auto c = fixtures::f1();
    const auto init = pde::consistent_pde_init(1.0, c, 0.0, 1.0, 200);
    auto grid = init.grid;
    std::fill(grid.j.begin(), grid.j.end(), 0.0);
    auto cfg = init.sdde;
    cfg.species[0].beta = 0.0;
    const auto series = pde::pde_solve(grid, cfg, 10.0);
    CHECK_THAT(series.A.back(), WithinRel(std::exp(-0.1 * series.t.back()), 1e-3));
}

TEST_CASE("equilibrium stays flat in the transport model", "[pde][equilibrium]") {
    const auto init = pde::consistent_pde_init(fixtures::kAStar, fixtures::f1(), 0.0, 1.0, 1000);
    CHECK_THAT(init.sdde.species[0].tau0, WithinRel(fixtures::kTauBar, 1e-12));
    const auto series = pde::pde_solve(init.grid, init.sdde, 50.0);
    double drift = 0.0;
    for (double a : series.A) {
        drift = std::max(drift, std::abs(a - fixtures::kAStar) / fixtures::kAStar);
    }
    CHECK(drift <= 1e-3);
}

TEST_CASE("transport model agrees with the delay equation and converges at first order", "[pde]") {
    double err[2];
    int k = 0;
    for (std::size_t Ns : {std::size_t{2000}, std::size_t{4000}}) {
        const auto init = pde::consistent_pde_init(1.0, fixtures::f1(), 0.0, 1.0, Ns);
        const auto ref = reference(init.sdde, 50.0);
        const auto series = pde::pde_solve(init.grid, init.sdde, 50.0);
        CHECK(series.dt_reductions == 0);
        CHECK(*std::min_element(series.A.begin(), series.A.end()) > 0.0);
        err[k++] = pde::sup_relative_difference(series, ref.trajectory);
    }
    CHECK(err[0] <= 0.02);
    CHECK(err[0] / err[1] >= 2.0);
}

TEST_CASE("transport model preconditions", "[pde]") {
    CHECK_THROWS_AS(pde::consistent_pde_init(1.0, fixtures::f3(), 0.0, 1.0, 100), Unsupported);
    CHECK_THROWS(pde::consistent_pde_init(1.0, fixtures::f1(), 1.0, 0.0, 100));
    CHECK_THROWS(pde::consistent_pde_init(1.0, fixtures::f1(), 0.0, 1.0, 0));
}
