#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "forest/errors.hpp"
#include "forest/trajectory.hpp"

using Catch::Matchers::WithinAbs;
using namespace forest;

namespace {

double cubic(double t) { return 1.0 + 0.5 * t - 0.2 * t * t + 0.03 * t * t * t; }
double cubic_d(double t) { return 0.5 - 0.4 * t + 0.09 * t * t; }

// F1 with A following the cubic above and tau = 2 + 0.1 t sampled at knots.
DenseTrajectory cubic_run(double t_end, double h) {
    const auto c = fixtures::f1();
    DenseTrajectory traj(c, compute_normalization(c));
    for (int k = 0; k * h <= t_end + 1e-12; ++k) {
        const double t = k * h;
        const std::vector<double> A{cubic(t)}, dA{cubic_d(t)}, tau{2.0 + 0.1 * t}, dtau{0.1};
        traj.append(t, A, tau, dA, dtau);
    }
    return traj;
}

}  // namespace

TEST_CASE("Hermite interpolant reproduces cubics and hits endpoints exactly", "[trajectory]") {
    const double y0 = cubic(1.0), y1 = cubic(1.7), d0 = cubic_d(1.0), d1 = cubic_d(1.7);
    CHECK(hermite(y0, d0, y1, d1, 0.7, 0.0) == y0);
    CHECK(hermite(y0, d0, y1, d1, 0.7, 1.0) == y1);
    for (double th : {0.1, 0.35, 0.8}) {
        CHECK_THAT(hermite(y0, d0, y1, d1, 0.7, th), WithinAbs(cubic(1.0 + 0.7 * th), 1e-14));
        CHECK_THAT(hermite_derivative(y0, d0, y1, d1, 0.7, th), WithinAbs(cubic_d(1.0 + 0.7 * th), 1e-13));
    }
}

TEST_CASE("dense trajectory evaluates history and segments", "[trajectory]") {
    const auto traj = cubic_run(5.0, 0.25);
    CHECK(traj.knot_count() == 21);
    CHECK(traj.eval_state(0, -1.5) == 1.0);
    CHECK_THAT(traj.eval_state(0, 3.3), WithinAbs(cubic(3.3), 1e-13));
    CHECK_THAT(traj.eval_delay(0, 3.3), WithinAbs(2.33, 1e-13));
    CHECK_THAT(traj.eval_lag(0, 3.3), WithinAbs(3.3 - 2.33, 1e-13));
    CHECK(traj.weighted_total_at(0, -0.5) == 1.0);
    CHECK_THROWS_AS(traj.eval_state(0, -2.5), DomainError);
    CHECK_THROWS_AS(traj.eval_state(0, 5.5), DomainError);
    CHECK_THROWS_AS(traj.eval_delay(0, -0.1), DomainError);
}

TEST_CASE("running f-integral agrees with a trapezoid oracle", "[trajectory]") {
    const auto traj = cubic_run(5.0, 0.25);
    const auto f = [](double t) { return 1.0 / (1.0 + (t <= 0.0 ? 1.0 : cubic(t))); };
    const int n = 1000000;
    const double lo = -1.25, hi = 4.6;
    const double step = (hi - lo) / n;
    double s = 0.5 * (f(lo) + f(hi));
    for (int k = 1; k < n; ++k) {
        s += f(lo + k * step);
    }
    // The integrand has a kink at 0 (history derivative 0 vs 0.5), so the
    // trapezoid oracle is good to O(step^2).
    CHECK_THAT(traj.f_integral(0, lo, hi), WithinAbs(s * step, 1e-9));
    CHECK_THAT(traj.cumulative_f(0, 2.0) + traj.f_integral(0, 2.0, 4.6), WithinAbs(traj.cumulative_f(0, 4.6), 1e-14));
    CHECK_THROWS_AS(traj.f_integral(0, 1.0, 0.5), InvalidInput);
}

TEST_CASE("append enforces increasing knots starting at zero", "[trajectory]") {
    const auto c = fixtures::f1();
    DenseTrajectory traj(c, compute_normalization(c));
    const std::vector<double> one{1.0}, zero{0.0}, two{2.0};
    CHECK_THROWS_AS(traj.append(0.5, one, two, zero, zero), InvalidInput);
    traj.append(0.0, one, two, zero, zero);
    CHECK_THROWS_AS(traj.append(0.0, one, two, zero, zero), InvalidInput);
    const std::vector<double> bad{1.0, 2.0};
    CHECK_THROWS_AS(traj.append(1.0, bad, two, zero, zero), InvalidInput);
}

TEST_CASE("pruning keeps what the delay still needs", "[trajectory]") {
    auto traj = cubic_run(20.0, 0.25);
    // Last knot: tau = 4, watermark = 16.
    CHECK_THAT(traj.watermark(), WithinAbs(16.0, 1e-12));
    CHECK_THROWS_AS(traj.prune_before(17.0), InvalidInput);
    const double before = traj.cumulative_f(0, 20.0) - traj.cumulative_f(0, 15.0);
    traj.prune_before(15.1);
    CHECK(traj.t_first() == 15.0);
    CHECK_THROWS_AS(traj.eval_state(0, 10.0), DomainError);
    CHECK_THAT(traj.eval_state(0, 17.3), WithinAbs(cubic(17.3), 1e-11));
    CHECK_THAT(traj.cumulative_f(0, 20.0) - traj.cumulative_f(0, 15.0), WithinAbs(before, 1e-13));
}
