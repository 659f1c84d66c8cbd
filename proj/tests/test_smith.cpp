#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "forest/errors.hpp"
#include "forest/integrator.hpp"
#include "forest/smith.hpp"

using Catch::Matchers::WithinAbs;
using namespace forest;

namespace {

SolveResult run(const ModelConfig& c, double h, double t_end) {
    IntegratorSettings s;
    s.h = h;
    s.t_end = t_end;
    s.reanchor_every = 0;
    return solve(c, s);
}

smith::RoundTrip round_trip(double h, double dx) {
    const auto c = fixtures::f1();
    const auto r = run(c, h, 50.0);
    const auto tr = smith::build_transform(r.trajectory);
    const auto hist = smith::transform_history(c, dx);
    const auto sol = smith::solve_constant_delay(c, hist, tr.x_end() + hist.dx());
    return smith::compare(r.trajectory, tr, sol, 10);
}

}  // namespace

TEST_CASE("transform of the equilibrium run is linear", "[smith]") {
    const auto c = fixtures::f1_equilibrium();
    const auto r = run(c, 0.01, 30.0);
    const auto tr = smith::build_transform(r.trajectory);
    const double f_star = 1.0 / (1.0 + fixtures::kAStar);
    CHECK_THAT(tr.delta(), WithinAbs(1.0, 1e-12));
    for (double t : {-5.0, 0.0, 7.3, 29.0}) {
        CHECK_THAT(tr.phi(t), WithinAbs(f_star * t, 1e-10));
    }
    CHECK_THAT(tr.phi_inverse(tr.phi(12.5)), WithinAbs(12.5, 1e-9));
    CHECK_THAT(tr.W(0.5), WithinAbs(fixtures::kAStar, 1e-9));
}

TEST_CASE("constant-delay equation keeps the equilibrium stationary", "[smith]") {
    const auto c = fixtures::f1_equilibrium();
    const auto hist = smith::transform_history(c, 1e-2);
    CHECK(hist.steps == 100);
    for (double w : hist.W) {
        CHECK_THAT(w, WithinAbs(fixtures::kAStar, 1e-12));
    }
    const auto sol = smith::solve_constant_delay(c, hist, 10.0);
    double drift = 0.0;
    for (std::size_t k = 0; k < sol.knot_count(); ++k) {
        drift = std::max(drift, std::abs(sol.knot_W(k) - fixtures::kAStar));
    }
    CHECK(drift <= 1e-10);
    CHECK_THAT(sol.delay(5.0), WithinAbs(fixtures::kTauBar, 1e-9));
    CHECK_THAT(smith::recovered_delay(sol, 5.0), WithinAbs(fixtures::kTauBar, 1e-8));
}

TEST_CASE("round trip on the reference fixture", "[smith]") {
    const auto rt = round_trip(1e-2, 1e-3);
    CHECK(rt.samples > 100);
    CHECK(rt.max_state_error <= 1e-5);
    CHECK(rt.max_delay_error <= 1e-6);
    CHECK(rt.max_phi_shift_error <= 1e-8);
}

TEST_CASE("round-trip error shrinks under joint refinement", "[smith][convergence]") {
    const double e1 = round_trip(0.4, 0.1).max_state_error;
    const double e2 = round_trip(0.2, 0.05).max_state_error;
    const double e3 = round_trip(0.1, 0.025).max_state_error;
    CHECK(e1 / e2 >= 8.0);
    CHECK(e2 / e3 >= 8.0);
}

TEST_CASE("transform preconditions", "[smith]") {
    const auto two = run(fixtures::f3(), 0.05, 5.0);
    CHECK_THROWS_AS(smith::build_transform(two.trajectory), Unsupported);
    const auto flat = run(fixtures::degenerate(), 0.05, 5.0);
    CHECK_THROWS_AS(smith::build_transform(flat.trajectory), DomainError);
    CHECK_THROWS_AS(smith::transform_history(fixtures::f3(), 0.01), Unsupported);
}
