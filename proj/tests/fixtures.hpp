#pragma once

#include <cmath>

#include "forest/model.hpp"

namespace forest::fixtures {

// Rational kappa = theta = p = 1, phi = 1, tau0 = 2, so C = 2 f(1) = 1.
inline SpeciesParams f1_species() {
    SpeciesParams s;
    s.mu_A = 0.1;
    s.mu_J = 0.05;
    s.beta = 0.2;
    s.tau0 = 2.0;
    s.f = CompetitionFunction::rational(1.0, 1.0, 1.0);
    s.history = InitialHistory::constant(1.0);
    return s;
}

inline ModelConfig f1() {
    ModelConfig c;
    c.species = {f1_species()};
    c.zeta = {{1.0}};
    return c;
}

// Two copies of F1 that do not see each other.
inline ModelConfig f2() {
    ModelConfig c;
    c.species = {f1_species(), f1_species()};
    c.zeta = {{1.0, 0.0}, {0.0, 1.0}};
    return c;
}

// Symmetric coupling; Z(phi) = 1.5, f = 0.4, C = 0.8.
inline ModelConfig f3() {
    ModelConfig c = f2();
    c.zeta = {{1.0, 0.5}, {0.5, 1.0}};
    return c;
}

// beta e^{-mu_J tau} = mu_A gives tau_bar = ln 2 / 0.05; f(A*) tau_bar = 1
// gives A* = tau_bar - 1.
inline const double kTauBar = std::log(2.0) / 0.05;
inline const double kAStar = kTauBar - 1.0;

inline ModelConfig f1_equilibrium() {
    ModelConfig c = f1();
    c.species[0].tau0 = kTauBar;
    c.species[0].history = InitialHistory::constant(kAStar);
    return c;
}

inline ModelConfig degenerate(double A0 = 1.0) {
    ModelConfig c = f1();
    c.species[0].tau0 = 0.0;
    c.species[0].history = InitialHistory::constant(A0);
    return c;
}

}  // namespace forest::fixtures
