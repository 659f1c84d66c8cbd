#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace forest {

// Positive, non-increasing juvenile growth rate as a function of the
// crowding pressure Z >= 0.
struct CompetitionFunction {
    enum class Kind { RationalDecay, ExponentialDecay, Constant };

    Kind kind = Kind::RationalDecay;
    double kappa = 1.0;  // f(0)
    double theta = 1.0;  // half-saturation scale (rational)
    double p = 1.0;      // exponent (rational)
    double rate = 1.0;   // decay rate (exponential)

    [[nodiscard]] static CompetitionFunction rational(double kappa, double theta, double p);
    [[nodiscard]] static CompetitionFunction exponential(double kappa, double rate);
    [[nodiscard]] static CompetitionFunction constant(double kappa);

    /// True for kinds whose ratio sup_x f(x)/f(cx) is finite for every c >= 1.
    [[nodiscard]] bool has_growth_ratio_bound() const noexcept { return kind != Kind::ExponentialDecay; }

    friend bool operator==(const CompetitionFunction&, const CompetitionFunction&) = default;
};

[[nodiscard]] const char* to_string(CompetitionFunction::Kind kind) noexcept;

// Initial population on [-tau0, 0].
struct InitialHistory {
    enum class Kind { Constant, Linear, Sinusoidal, Sampled };

    Kind kind = Kind::Constant;
    double value = 1.0;      // constant value; linear intercept phi(0); sinusoid mean
    double slope = 0.0;      // linear: phi(s) = value + slope * s
    double amplitude = 0.0;  // sinusoidal: value + amplitude * sin(omega * s + phase)
    double omega = 0.0;
    double phase = 0.0;
    std::vector<double> times;   // sampled abscissae, strictly increasing
    std::vector<double> values;  // sampled ordinates, linearly interpolated

    [[nodiscard]] static InitialHistory constant(double v);
    [[nodiscard]] static InitialHistory linear(double at_zero, double slope);
    [[nodiscard]] static InitialHistory sinusoidal(double mean, double amplitude, double omega,
                                                   double phase);
    [[nodiscard]] static InitialHistory sampled(std::vector<double> times, std::vector<double> values);

    /// phi(s); throws DomainError when s > 0 or outside the sampled abscissae.
    [[nodiscard]] double operator()(double s) const;

    /// Earliest time at which the history can be evaluated (-inf for closed forms).
    [[nodiscard]] double earliest() const noexcept;

    /// Interior breakpoints in (lo, hi) where the history is only piecewise smooth.
    [[nodiscard]] std::vector<double> breakpoints(double lo, double hi) const;

    friend bool operator==(const InitialHistory&, const InitialHistory&) = default;
};

[[nodiscard]] const char* to_string(InitialHistory::Kind kind) noexcept;

struct SpeciesParams {
    double mu_A = 0.1;
    double mu_J = 0.05;
    double beta = 0.2;
    double tau0 = 0.0;
    CompetitionFunction f;
    InitialHistory history;

    friend bool operator==(const SpeciesParams&, const SpeciesParams&) = default;
};

struct ModelConfig {
    std::vector<SpeciesParams> species;
    std::vector<std::vector<double>> zeta;  // n x n coupling weights

    [[nodiscard]] std::size_t n() const noexcept { return species.size(); }

    /// Z_i = sum_j zeta_ij * A_j.
    [[nodiscard]] double weighted_total(std::size_t i, std::span<const double> A) const;

    /// Z_i along the initial histories at time s <= 0.
    [[nodiscard]] double history_weighted_total(std::size_t i, double s) const;

    /// How far back species j's history must be evaluable: its own tau0 and
    /// the tau0 of every species whose crowding pressure it enters.
    [[nodiscard]] double history_lookback(std::size_t j) const;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Per-species value of the conserved delay integral
// C_i = integral over [-tau_i0, 0] of f_i(Z_i along the history).
struct DelayNormalization {
    std::vector<double> C;
};

struct Equilibrium {
    double adults = 0.0;  // A*
    double delay = 0.0;   // tau bar
};

struct EquilibriumOutcome {
    std::optional<Equilibrium> value;
    std::string diagnostic;  // reason when there is no positive equilibrium
};

/// f(x) in closed form. Throws InvalidInput for non-finite or negative x.
[[nodiscard]] double eval_f(const CompetitionFunction& f, double x);

/// M_f(c) = sup_{x >= 0} f(x) / f(cx). Throws Unsupported for exponential decay
/// and InvalidInput for c < 1.
[[nodiscard]] double growth_ratio_bound(const CompetitionFunction& f, double c);

/// Checks all structural conditions; throws ValidationError naming the
/// violated condition.
void validate(const ModelConfig& config);

/// Index-checked Z_i.
[[nodiscard]] double weighted_total(const ModelConfig& config, std::size_t i,
                                    std::span<const double> A);

[[nodiscard]] DelayNormalization compute_normalization(const ModelConfig& config);

/// Integral of f_i(Z_i along the history) over [lo, hi] with lo <= hi <= 0.
/// Splits at sampled-history breakpoints, adaptive Simpson on each piece.
[[nodiscard]] double history_f_integral(const ModelConfig& config, std::size_t i, double lo,
                                        double hi, double abs_tol = 1e-12);

/// Positive steady state of species i for a diagonal coupling row:
/// beta e^{-mu_J tau} = mu_A and f(zeta_ii A*) tau = C_i.
[[nodiscard]] EquilibriumOutcome equilibrium(const ModelConfig& config, std::size_t i, double C_i);

}  // namespace forest
