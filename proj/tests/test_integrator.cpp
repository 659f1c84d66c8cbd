#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "forest/delay.hpp"
#include "forest/errors.hpp"
#include "forest/integrator.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using namespace forest;

namespace {

IntegratorSettings settings(double h, double t_end, int levels = 2) {
    IntegratorSettings s;
    s.h = h;
    s.t_end = t_end;
    s.reanchor_every = 0;
    s.breaking_point_levels = levels;
    return s;
}

double A_at(const ModelConfig& c, double h, double t, int levels = 2) {
    return solve(c, settings(h, t, levels)).trajectory.eval_state(0, t);
}

}  // namespace

TEST_CASE("tau0 = 0 reduces to exponential growth", "[integrator][degenerate]") {
    for (double A0 : {0.5, 1.0, 3.0}) {
        const auto r = solve(fixtures::degenerate(A0), settings(1e-3, 10.0));
        const double exact = A0 * std::exp((0.2 - 0.1) * 10.0);
        CHECK_THAT(r.trajectory.eval_state(0, 10.0), WithinRel(exact, 1e-8));
        CHECK(r.diagnostics.max_abs_residual[0] == 0.0);
    }
}

TEST_CASE("a single RK4 step without delay", "[integrator]") {
    const auto c = fixtures::degenerate();
    DenseTrajectory traj(c, compute_normalization(c));
    const std::vector<double> A{1.0}, tau{0.0}, dA{0.1}, dtau{0.0};
    traj.append(0.0, A, tau, dA, dtau);
    const SystemState y{{1.0}, {0.0}};
    const auto r = step(traj, 0.0, y, 0.01);
    CHECK_THAT(r.next.A[0], WithinRel(std::exp(0.001), 1e-15));
    CHECK(r.next.tau[0] == 0.0);
    CHECK_THROWS_AS(step(traj, 0.5, y, 0.01), InvalidInput);
}

TEST_CASE("right-hand side at the start of the reference run", "[integrator]") {
    const auto c = fixtures::f1();
    DenseTrajectory traj(c, compute_normalization(c));
    const std::vector<double> A{1.0}, tau{2.0}, zero{0.0};
    traj.append(0.0, A, tau, zero, zero);
    const auto d = rhs(traj, 0.0, SystemState{{1.0}, {2.0}});
    CHECK_THAT(d.A[0], WithinAbs(-0.1 + 0.2 * std::exp(-0.1), 1e-15));
    CHECK_THAT(d.tau[0], WithinAbs(0.0, 1e-15));
}

TEST_CASE("decoupled two-species run matches the single-species run", "[integrator]") {
    const auto one = solve(fixtures::f1(), settings(0.01, 60.0));
    const auto two = solve(fixtures::f2(), settings(0.01, 60.0));
    double worst = 0.0;
    for (std::size_t k = 0; k < one.trajectory.knot_count(); ++k) {
        const double t = one.trajectory.knot_time(k);
        for (std::size_t i = 0; i < 2; ++i) {
            worst = std::max(worst, std::abs(two.trajectory.eval_state(i, t) - one.trajectory.knot_A(k)[0]));
            worst = std::max(worst, std::abs(two.trajectory.eval_delay(i, t) - one.trajectory.knot_tau(k)[0]));
        }
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("equilibrium initial data stays put", "[integrator][equilibrium]") {
    const auto r = solve(fixtures::f1_equilibrium(), settings(0.01, 100.0));
    double drift = 0.0;
    for (std::size_t k = 0; k < r.trajectory.knot_count(); ++k) {
        drift = std::max(drift, std::abs(r.trajectory.knot_A(k)[0] - fixtures::kAStar));
        drift = std::max(drift, std::abs(r.trajectory.knot_tau(k)[0] - fixtures::kTauBar));
    }
    CHECK(drift <= 1e-8);
    const auto ts = detect_tstar(r.trajectory, 0);
    REQUIRE(ts);
    CHECK_THAT(*ts, WithinAbs(fixtures::kTauBar, 1e-6));
}

TEST_CASE("fourth order before the first breaking point", "[integrator][convergence]") {
    // On [0, t*) the delayed argument stays in the smooth history.
    const auto c = fixtures::f1();
    for (double h : {0.1, 0.05}) {
        const double e1 = std::abs(A_at(c, h, 1.5) - A_at(c, h / 2, 1.5));
        const double e2 = std::abs(A_at(c, h / 2, 1.5) - A_at(c, h / 4, 1.5));
        CHECK(e1 / e2 >= 12.0);
    }
}

TEST_CASE("breaking-point tracking keeps fourth order across t* and t**", "[integrator][convergence]") {
    const auto c = fixtures::f1();
    const double ref = A_at(c, 0.2 / 64, 20.0);
    const double coarse = std::abs(A_at(c, 0.2, 20.0) - ref);
    const double fine = std::abs(A_at(c, 0.025, 20.0) - ref);
    // Three halvings; order four would give 4096.
    CHECK(coarse / fine >= 12.0 * 12.0 * 12.0);
}

TEST_CASE("cutting steps at t* removes the post-t* error spike", "[integrator][breaking-points]") {
    const auto c = fixtures::f1();
    const auto ref = solve(c, settings(2.5e-4, 4.0));
    const auto spike = [&](int levels) {
        const auto r = solve(c, settings(0.05, 4.0, levels));
        double e = 0.0;
        for (std::size_t k = 0; k < r.trajectory.knot_count(); ++k) {
            const double t = r.trajectory.knot_time(k);
            if (t >= 2.0 && t <= 3.1) {
                e = std::max(e, std::abs(r.trajectory.knot_A(k)[0] - ref.trajectory.eval_state(0, t)));
            }
        }
        return e;
    };
    CHECK(spike(0) >= 10.0 * spike(2));
}

TEST_CASE("breaking-point log", "[integrator][breaking-points]") {
    const auto r = solve(fixtures::f3(), settings(0.01, 30.0));
    const auto& pts = r.breaks.points;
    REQUIRE(pts.size() >= 3);
    CHECK(pts.front().t == 0.0);
    CHECK(pts.front().level == 0);
    CHECK(std::is_sorted(pts.begin(), pts.end(),
                         [](const BreakingPoint& a, const BreakingPoint& b) { return a.t < b.t; }));
    for (std::size_t i = 0; i < 2; ++i) {
        REQUIRE(r.breaks.tstar[i]);
        CHECK(std::abs(r.trajectory.eval_lag(i, *r.breaks.tstar[i])) <= 1e-10);
        const auto detected = detect_tstar(r.trajectory, i);
        REQUIRE(detected);
        CHECK_THAT(*detected, WithinAbs(*r.breaks.tstar[i], 1e-10));
    }
    CHECK(std::any_of(pts.begin(), pts.end(), [](const BreakingPoint& p) { return p.level == 2; }));
    CHECK(lag_floor_check(r.trajectory));
}

TEST_CASE("conservation residual converges under refinement", "[integrator][conservation]") {
    const auto c = fixtures::f1();
    const auto coarse = solve(c, settings(0.2, 50.0));
    const auto fine = solve(c, settings(0.025, 50.0));
    CHECK(coarse.diagnostics.max_abs_residual[0] / fine.diagnostics.max_abs_residual[0] >= 512.0);
}

TEST_CASE("re-anchoring the delay does not move the solution", "[integrator]") {
    auto s = settings(0.01, 50.0);
    const auto plain = solve(fixtures::f3(), s);
    s.reanchor_every = 100;
    const auto anchored = solve(fixtures::f3(), s);
    CHECK(anchored.diagnostics.reanchors > 0);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK_THAT(anchored.trajectory.eval_state(i, 50.0), WithinAbs(plain.trajectory.eval_state(i, 50.0), 1e-8));
    }
}

TEST_CASE("populations stay positive over a long run", "[integrator]") {
    const auto r = solve(fixtures::f3(), settings(0.05, 300.0));
    double lowest = HUGE_VAL;
    for (std::size_t k = 0; k < r.trajectory.knot_count(); ++k) {
        for (double a : r.trajectory.knot_A(k)) {
            lowest = std::min(lowest, a);
        }
    }
    CHECK(lowest > 0.0);
}

TEST_CASE("settings and configurations are validated", "[integrator]") {
    CHECK_THROWS_AS(solve(fixtures::f1(), settings(0.0, 1.0)), InvalidInput);
    CHECK_THROWS_AS(solve(fixtures::f1(), settings(0.1, -1.0)), InvalidInput);
    CHECK_THROWS_AS(solve(fixtures::f1(), settings(0.1, 1.0, -1)), InvalidInput);
    auto bad = fixtures::f1();
    bad.zeta[0][0] = 0.0;
    CHECK_THROWS_AS(solve(bad, settings(0.1, 1.0)), ValidationError);
}
