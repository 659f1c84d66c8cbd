#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "forest/model.hpp"
#include "forest/quadrature.hpp"

namespace forest {

/// Cubic Hermite interpolant on [t0, t0 + h] at relative position th = (s - t0) / h.
/// th in {0, 1} returns y0 / y1 exactly; th outside [0, 1] extrapolates.
[[nodiscard]] inline double hermite(double y0, double d0, double y1, double d1, double h,
                                    double th) noexcept {
    const double th2 = th * th;
    const double th3 = th2 * th;
    return (2.0 * th3 - 3.0 * th2 + 1.0) * y0 + (th3 - 2.0 * th2 + th) * h * d0 +
           (-2.0 * th3 + 3.0 * th2) * y1 + (th3 - th2) * h * d1;
}

/// Time derivative of the Hermite interpolant above.
[[nodiscard]] inline double hermite_derivative(double y0, double d0, double y1, double d1,
                                               double h, double th) noexcept {
    const double th2 = th * th;
    return ((6.0 * th2 - 6.0 * th) * y0 + (-6.0 * th2 + 6.0 * th) * y1) / h +
           (3.0 * th2 - 4.0 * th + 1.0) * d0 + (3.0 * th2 - 2.0 * th) * d1;
}

// One interval of dense output with endpoint values/derivatives of every
// population and delay channel.
struct DenseSegment {
    double t_lo = 0.0;
    double t_hi = 0.0;
    std::vector<double> A_lo, A_hi, dA_lo, dA_hi;
    std::vector<double> tau_lo, tau_hi, dtau_lo, dtau_hi;

    [[nodiscard]] double A(std::size_t i, double s) const noexcept;
    [[nodiscard]] double tau(std::size_t i, double s) const noexcept;
};

// Continuous extension of a run: the initial histories on s <= 0 spliced with
// piecewise cubic Hermite segments on [0, t_current]. Adjacent segments share
// knot storage, so C0 continuity is exact.
//
// Also keeps, per species, the running integral of f_i(Z_i) from 0 to every
// knot so delay-integral queries cost one binary search plus one partial
// Gauss-Legendre panel.
class DenseTrajectory {
public:
    DenseTrajectory(ModelConfig config, DelayNormalization normalization);

    [[nodiscard]] std::size_t n() const noexcept { return n_; }
    [[nodiscard]] const ModelConfig& config() const noexcept { return config_; }
    [[nodiscard]] const DelayNormalization& normalization() const noexcept { return norm_; }

    [[nodiscard]] std::size_t knot_count() const noexcept { return t_.size(); }
    [[nodiscard]] bool empty() const noexcept { return t_.empty(); }
    [[nodiscard]] double knot_time(std::size_t k) const { return t_[k]; }
    [[nodiscard]] const std::vector<double>& knot_times() const noexcept { return t_; }
    [[nodiscard]] std::span<const double> knot_A(std::size_t k) const { return {&A_[k * n_], n_}; }
    [[nodiscard]] std::span<const double> knot_dA(std::size_t k) const { return {&dA_[k * n_], n_}; }
    [[nodiscard]] std::span<const double> knot_tau(std::size_t k) const { return {&tau_[k * n_], n_}; }
    [[nodiscard]] std::span<const double> knot_dtau(std::size_t k) const {
        return {&dtau_[k * n_], n_};
    }
    [[nodiscard]] double t_first() const { return t_.front(); }
    [[nodiscard]] double t_current() const { return t_.back(); }

    /// Appends a knot at t > t_current (the first knot must be at t = 0).
    void append(double t, std::span<const double> A, std::span<const double> tau,
                std::span<const double> dA, std::span<const double> dtau);

    /// Overwrites the most recent knot in place (used when re-anchoring the delay).
    void replace_last(std::span<const double> A, std::span<const double> tau,
                      std::span<const double> dA, std::span<const double> dtau);

    [[nodiscard]] std::size_t segment_count() const noexcept { return t_.size() < 2 ? 0 : t_.size() - 1; }
    [[nodiscard]] DenseSegment segment(std::size_t k) const;

    /// A_i(s) for -tau_i0 <= s <= t_current; history values for s <= 0.
    [[nodiscard]] double eval_state(std::size_t i, double s) const;

    /// tau_i(s) for 0 <= s <= t_current.
    [[nodiscard]] double eval_delay(std::size_t i, double s) const;

    /// s - tau_i(s).
    [[nodiscard]] double eval_lag(std::size_t i, double s) const { return s - eval_delay(i, s); }

    /// Z_i(s) for -tau_i0 <= s <= t_current.
    [[nodiscard]] double weighted_total_at(std::size_t i, double s) const;

    /// f_i(Z_i(s)).
    [[nodiscard]] double f_at(std::size_t i, double s) const;

    /// Integral of f_i(Z_i) over [0, t] for t in [t_first, t_current].
    [[nodiscard]] double cumulative_f(std::size_t i, double t) const;

    /// Integral of f_i(Z_i) over [lo, hi] with -tau_i0 <= lo <= hi <= t_current.
    [[nodiscard]] double f_integral(std::size_t i, double lo, double hi) const;

    /// Earliest time any species can still look back to: min_i (t - tau_i(t))
    /// at the last knot. Knots strictly before the segment containing it are
    /// no longer needed by the integration.
    [[nodiscard]] double watermark() const;

    /// Drops knots that lie entirely before `t` (keeping the segment that
    /// contains it). Refuses to prune past the watermark.
    void prune_before(double t);

    /// Raw evaluation of A_j(s) without the per-species domain check; s must be
    /// within [history earliest, t_current].
    [[nodiscard]] double state_unchecked(std::size_t j, double s) const;

    /// All populations at s in (t_first, t_current] (no history).
    void states_on_segments(double s, std::span<double> out) const;

private:
    [[nodiscard]] std::size_t locate(double s) const;
    void add_segment_integral(std::size_t k);
    [[nodiscard]] double segment_f_integral(std::size_t i, std::size_t k, double lo, double hi) const;

    ModelConfig config_;
    DelayNormalization norm_;
    std::size_t n_;
    std::vector<double> t_;
    std::vector<double> A_, dA_, tau_, dtau_;
    std::vector<quad::CompensatedSum> prefix_;  // n per knot
};

}  // namespace forest
