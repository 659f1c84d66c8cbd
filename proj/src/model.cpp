#include "forest/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "forest/errors.hpp"
#include "forest/quadrature.hpp"

namespace forest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

std::string species_label(std::size_t i) { return "species " + std::to_string(i + 1); }

}  // namespace

CompetitionFunction CompetitionFunction::rational(double kappa, double theta, double p) {
    return {Kind::RationalDecay, kappa, theta, p, 1.0};
}

CompetitionFunction CompetitionFunction::exponential(double kappa, double rate) {
    return {Kind::ExponentialDecay, kappa, 1.0, 1.0, rate};
}

CompetitionFunction CompetitionFunction::constant(double kappa) {
    return {Kind::Constant, kappa, 1.0, 1.0, 1.0};
}

const char* to_string(CompetitionFunction::Kind kind) noexcept {
    switch (kind) {
        case CompetitionFunction::Kind::RationalDecay: return "rational-decay";
        case CompetitionFunction::Kind::ExponentialDecay: return "exponential-decay";
        case CompetitionFunction::Kind::Constant: return "constant";
    }
    return "unknown";
}

InitialHistory InitialHistory::constant(double v) {
    InitialHistory h;
    h.kind = Kind::Constant;
    h.value = v;
    return h;
}

InitialHistory InitialHistory::linear(double at_zero, double slope) {
    InitialHistory h;
    h.kind = Kind::Linear;
    h.value = at_zero;
    h.slope = slope;
    return h;
}

InitialHistory InitialHistory::sinusoidal(double mean, double amplitude, double omega, double phase) {
    InitialHistory h;
    h.kind = Kind::Sinusoidal;
    h.value = mean;
    h.amplitude = amplitude;
    h.omega = omega;
    h.phase = phase;
    return h;
}

InitialHistory InitialHistory::sampled(std::vector<double> times, std::vector<double> values) {
    InitialHistory h;
    h.kind = Kind::Sampled;
    h.times = std::move(times);
    h.values = std::move(values);
    return h;
}

const char* to_string(InitialHistory::Kind kind) noexcept {
    switch (kind) {
        case InitialHistory::Kind::Constant: return "constant";
        case InitialHistory::Kind::Linear: return "linear";
        case InitialHistory::Kind::Sinusoidal: return "sinusoidal";
        case InitialHistory::Kind::Sampled: return "sampled";
    }
    return "unknown";
}

double InitialHistory::operator()(double s) const {
    if (s > 0.0) {
        throw DomainError("initial history evaluated at positive time " + std::to_string(s));
    }
    switch (kind) {
        case Kind::Constant: return value;
        case Kind::Linear: return value + slope * s;
        case Kind::Sinusoidal: return value + amplitude * std::sin(omega * s + phase);
        case Kind::Sampled: {
            if (times.empty() || s < times.front() || s > times.back()) {
                throw DomainError("sampled history does not cover time " + std::to_string(s));
            }
            const auto it = std::upper_bound(times.begin(), times.end(), s);
            if (it == times.end()) {
                return values.back();
            }
            const auto k = static_cast<std::size_t>(it - times.begin());
            const double w = (s - times[k - 1]) / (times[k] - times[k - 1]);
            return values[k - 1] + w * (values[k] - values[k - 1]);
        }
    }
    return value;
}

double InitialHistory::earliest() const noexcept {
    if (kind == Kind::Sampled) {
        return times.empty() ? 0.0 : times.front();
    }
    return -kInf;
}

std::vector<double> InitialHistory::breakpoints(double lo, double hi) const {
    std::vector<double> out;
    if (kind == Kind::Sampled) {
        for (double t : times) {
            if (t > lo && t < hi) {
                out.push_back(t);
            }
        }
    }
    return out;
}

double ModelConfig::weighted_total(std::size_t i, std::span<const double> A) const {
    const auto& row = zeta[i];
    double z = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
        z += row[j] * A[j];
    }
    return z;
}

double ModelConfig::history_weighted_total(std::size_t i, double s) const {
    const auto& row = zeta[i];
    double z = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (row[j] != 0.0) {
            z += row[j] * species[j].history(s);
        }
    }
    return z;
}

double ModelConfig::history_lookback(std::size_t j) const {
    double back = species[j].tau0;
    for (std::size_t i = 0; i < n(); ++i) {
        if (i != j && zeta[i][j] > 0.0) {
            back = std::max(back, species[i].tau0);
        }
    }
    return back;
}

double eval_f(const CompetitionFunction& f, double x) {
    if (!std::isfinite(x)) {
        throw InvalidInput("competition function evaluated at non-finite argument");
    }
    if (x < 0.0) {
        throw InvalidInput("competition function evaluated at negative argument " + std::to_string(x));
    }
    switch (f.kind) {
        case CompetitionFunction::Kind::RationalDecay:
            return f.kappa / (1.0 + std::pow(x / f.theta, f.p));
        case CompetitionFunction::Kind::ExponentialDecay:
            return f.kappa * std::exp(-f.rate * x);
        case CompetitionFunction::Kind::Constant:
            return f.kappa;
    }
    return f.kappa;
}

double growth_ratio_bound(const CompetitionFunction& f, double c) {
    if (!(c >= 1.0) || !std::isfinite(c)) {
        throw InvalidInput("growth_ratio_bound requires a finite c >= 1");
    }
    switch (f.kind) {
        case CompetitionFunction::Kind::RationalDecay:
            return std::pow(c, f.p);
        case CompetitionFunction::Kind::Constant:
            return 1.0;
        case CompetitionFunction::Kind::ExponentialDecay:
            if (c == 1.0) {
                return 1.0;
            }
            throw Unsupported(
                "exponential-decay competition function has unbounded f(x)/f(cx) for c > 1");
    }
    return 1.0;
}

void validate(const ModelConfig& config) {
    const std::size_t n = config.n();
    if (n == 0) {
        throw ValidationError("species-count", "at least one species is required");
    }
    if (config.zeta.size() != n) {
        throw ValidationError("coupling-shape", "zeta must have one row per species");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (config.zeta[i].size() != n) {
            throw ValidationError("coupling-shape",
                                  "zeta row " + std::to_string(i + 1) + " must have n entries");
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        const auto& sp = config.species[i];
        const auto who = species_label(i);
        if (!positive_finite(sp.mu_A) || !positive_finite(sp.mu_J) || !positive_finite(sp.beta)) {
            throw ValidationError("rates-positive", who + ": mu_A, mu_J and beta must be > 0");
        }
        if (!std::isfinite(sp.tau0) || sp.tau0 < 0.0) {
            throw ValidationError("initial-delay-nonnegative", who + ": tau0 must be >= 0");
        }
        const auto& f = sp.f;
        bool f_ok = positive_finite(f.kappa);
        if (f.kind == CompetitionFunction::Kind::RationalDecay) {
            f_ok = f_ok && positive_finite(f.theta) && positive_finite(f.p);
        } else if (f.kind == CompetitionFunction::Kind::ExponentialDecay) {
            f_ok = f_ok && positive_finite(f.rate);
        }
        if (!f_ok) {
            throw ValidationError("competition-function",
                                  who + ": competition function parameters must be positive");
        }

        for (std::size_t j = 0; j < n; ++j) {
            const double z = config.zeta[i][j];
            if (!std::isfinite(z) || z < 0.0) {
                throw ValidationError("coupling-nonnegative",
                                      "zeta_" + std::to_string(i + 1) + std::to_string(j + 1) +
                                          " must be finite and >= 0");
            }
        }
        if (!(config.zeta[i][i] > 0.0)) {
            const auto idx = std::to_string(i + 1);
            throw ValidationError("self-coupling-positive", "zeta_" + idx + idx + " must be > 0");
        }
        bool cross = false;
        for (std::size_t j = 0; j < n; ++j) {
            cross = cross || (j != i && config.zeta[i][j] > 0.0);
        }
        if (cross && !f.has_growth_ratio_bound()) {
            throw ValidationError("growth-ratio-bound",
                                  who + ": sup_x f(x)/f(cx) must be finite for c >= 1 when the "
                                        "species is cross-coupled; exponential-decay violates it");
        }
    }

    for (std::size_t j = 0; j < n; ++j) {
        const auto& h = config.species[j].history;
        const auto who = species_label(j);
        const double back = config.history_lookback(j);
        if (h.kind == InitialHistory::Kind::Sampled) {
            if (h.times.size() < 2 || h.times.size() != h.values.size()) {
                throw ValidationError("history-shape",
                                      who + ": sampled history needs >= 2 matching abscissae/values");
            }
            for (std::size_t k = 1; k < h.times.size(); ++k) {
                if (!(h.times[k] > h.times[k - 1])) {
                    throw ValidationError("history-shape",
                                          who + ": sampled abscissae must be strictly increasing");
                }
            }
            if (h.times.front() > -back || h.times.back() < 0.0 || h.times.back() > 0.0) {
                std::ostringstream os;
                os << who << ": sampled history must cover [" << -back << ", 0]";
                throw ValidationError("history-coverage", os.str());
            }
            for (double v : h.values) {
                if (!std::isfinite(v) || v < 0.0) {
                    throw ValidationError("history-nonnegative", who + ": history values must be >= 0");
                }
            }
        } else {
            double lowest = 0.0;
            switch (h.kind) {
                case InitialHistory::Kind::Constant: lowest = h.value; break;
                case InitialHistory::Kind::Linear:
                    lowest = std::min(h.value, h.value - h.slope * back);
                    break;
                case InitialHistory::Kind::Sinusoidal:
                    lowest = h.value - std::abs(h.amplitude);
                    break;
                default: break;
            }
            const bool finite = std::isfinite(h.value) && std::isfinite(h.slope) &&
                                std::isfinite(h.amplitude) && std::isfinite(h.omega) &&
                                std::isfinite(h.phase);
            if (!finite || lowest < 0.0) {
                throw ValidationError("history-nonnegative",
                                      who + ": history must be finite and >= 0 on its domain");
            }
        }
    }
}

double weighted_total(const ModelConfig& config, std::size_t i, std::span<const double> A) {
    if (i >= config.n()) {
        throw InvalidInput("weighted_total: species index out of range");
    }
    if (A.size() != config.n()) {
        throw InvalidInput("weighted_total: state vector has wrong length");
    }
    for (double a : A) {
        if (!std::isfinite(a) || a < 0.0) {
            throw InvalidInput("weighted_total: populations must be finite and >= 0");
        }
    }
    return config.weighted_total(i, A);
}

double history_f_integral(const ModelConfig& config, std::size_t i, double lo, double hi,
                          double abs_tol) {
    if (lo > hi || hi > 0.0) {
        throw InvalidInput("history_f_integral: need lo <= hi <= 0");
    }
    if (lo == hi) {
        return 0.0;
    }
    const auto& f = config.species[i].f;
    std::vector<double> cuts{lo, hi};
    for (std::size_t j = 0; j < config.n(); ++j) {
        if (config.zeta[i][j] != 0.0) {
            auto b = config.species[j].history.breakpoints(lo, hi);
            cuts.insert(cuts.end(), b.begin(), b.end());
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const quad::Integrand integrand = [&](double s) {
        return eval_f(f, config.history_weighted_total(i, s));
    };
    const double piece_tol = abs_tol / static_cast<double>(cuts.size() - 1);
    quad::CompensatedSum total;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        total.add(quad::adaptive_simpson(integrand, cuts[k], cuts[k + 1], piece_tol).value);
    }
    return total.value();
}

DelayNormalization compute_normalization(const ModelConfig& config) {
    DelayNormalization out;
    out.C.resize(config.n(), 0.0);
    for (std::size_t i = 0; i < config.n(); ++i) {
        const double tau0 = config.species[i].tau0;
        if (tau0 == 0.0) {
            continue;
        }
        for (std::size_t j = 0; j < config.n(); ++j) {
            if (config.zeta[i][j] != 0.0 && config.species[j].history.earliest() > -tau0) {
                throw InvalidInput("compute_normalization: history of species " +
                                   std::to_string(j + 1) + " does not cover [-tau0, 0] of species " +
                                   std::to_string(i + 1));
            }
        }
        out.C[i] = history_f_integral(config, i, -tau0, 0.0);
    }
    return out;
}

EquilibriumOutcome equilibrium(const ModelConfig& config, std::size_t i, double C_i) {
    if (i >= config.n()) {
        throw InvalidInput("equilibrium: species index out of range");
    }
    const auto& sp = config.species[i];
    if (!(sp.beta > sp.mu_A)) {
        return {std::nullopt, "beta <= mu_A: no equilibrium with positive delay"};
    }
    for (std::size_t j = 0; j < config.n(); ++j) {
        if (j != i && config.zeta[i][j] != 0.0) {
            return {std::nullopt, "closed form requires a diagonal coupling row"};
        }
    }
    if (!(C_i > 0.0)) {
        return {std::nullopt, "C_i must be > 0"};
    }
    if (sp.f.kind == CompetitionFunction::Kind::Constant) {
        return {std::nullopt, "constant competition function: A* undetermined"};
    }
    const double tau_bar = std::log(sp.beta / sp.mu_A) / sp.mu_J;
    const double target = C_i / tau_bar;
    const double zii = config.zeta[i][i];
    if (target >= eval_f(sp.f, 0.0)) {
        return {std::nullopt, "C_i / tau_bar >= f(0): no positive root"};
    }
    const auto g = [&](double a) { return eval_f(sp.f, zii * a) - target; };
    double hi = 1.0;
    while (g(hi) > 0.0) {
        hi *= 2.0;
        if (!std::isfinite(hi)) {
            return {std::nullopt, "failed to bracket A*"};
        }
    }
    const double a_star = quad::bisect(g, 0.0, hi);
    return {Equilibrium{a_star, tau_bar}, {}};
}

}  // namespace forest
