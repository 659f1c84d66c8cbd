#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "forest/delay.hpp"
#include "forest/errors.hpp"
#include "forest/integrator.hpp"

using Catch::Matchers::WithinAbs;
using namespace forest;

namespace {

// A = 1 throughout: f = 1/2 everywhere, so C = 1 forces tau = 2.
DenseTrajectory constant_run(double tau_at_knot3 = 2.0) {
    const auto c = fixtures::f1();
    DenseTrajectory traj(c, compute_normalization(c));
    const std::vector<double> A{1.0}, zero{0.0};
    for (int k = 0; k <= 10; ++k) {
        const std::vector<double> tau{k == 3 ? tau_at_knot3 : 2.0};
        traj.append(0.5 * k, A, tau, zero, zero);
    }
    return traj;
}

}  // namespace

TEST_CASE("tau right-hand side", "[delay]") {
    CHECK(tau_rhs(0.5, 0.5) == 0.0);
    CHECK(tau_rhs(1.0, 0.5) == -1.0);
    CHECK(tau_rhs(0.25, 0.5) == 0.5);
    CHECK_THROWS_AS(tau_rhs(0.0, 1.0), InvalidInput);
}

TEST_CASE("delay recovered from the threshold integral", "[delay]") {
    const auto traj = constant_run();
    CHECK_THAT(tau_from_integral(traj, 0, 5.0, 1.0), WithinAbs(2.0, 1e-12));
    // Lower limit inside the history.
    CHECK_THAT(tau_from_integral(traj, 0, 1.0, 1.0), WithinAbs(2.0, 1e-12));
    CHECK_THAT(tau_from_integral(traj, 0, 5.0, 0.75), WithinAbs(1.5, 1e-12));
    CHECK(tau_from_integral(traj, 0, 5.0, 0.0) == 0.0);
    // Not enough history integral.
    CHECK_THROWS_AS(tau_from_integral(traj, 0, 0.5, 2.0), DomainError);
}

TEST_CASE("conservation residual and t* on a constant run", "[delay]") {
    const auto traj = constant_run();
    for (double t : {0.0, 0.7, 2.0, 4.9}) {
        CHECK_THAT(conservation_residual(traj, 0, t), WithinAbs(0.0, 1e-13));
    }
    const auto ts = detect_tstar(traj, 0);
    REQUIRE(ts);
    CHECK_THAT(*ts, WithinAbs(2.0, 1e-14));
    const auto st = delay_state(traj, 3.0);
    CHECK(st.tau[0] == 2.0);
    CHECK(st.lag[0] == 1.0);
}

TEST_CASE("lag floor check catches a corrupted delay", "[delay]") {
    CHECK(lag_floor_check(constant_run()));
    // Lag at knot 3 = 1.5 - 2.6 < lag at knot 2 = -1.
    CHECK_FALSE(lag_floor_check(constant_run(2.6)));
}

TEST_CASE("t* is zero without delay and absent before the crossing", "[delay]") {
    IntegratorSettings s;
    s.h = 0.01;
    s.t_end = 1.0;
    const auto d = solve(fixtures::degenerate(), s);
    CHECK(detect_tstar(d.trajectory, 0) == 0.0);
    const auto early = solve(fixtures::f1(), s);
    CHECK_FALSE(detect_tstar(early.trajectory, 0));
}
