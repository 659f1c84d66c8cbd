#pragma once

#include <cstddef>
#include <vector>

#include "forest/model.hpp"
#include "forest/trajectory.hpp"

namespace forest::smith {

// Change of time variable x = Phi(t) = integral_0^t f(zeta A) for a
// single-species run. Phi is the Hermite interpolant of the running integral
// at the knots (its derivative there is f(zeta A) itself); for t < 0 it is
// the history-side integral -integral_t^0 f(zeta phi).
class TransformData {
public:
    explicit TransformData(const DenseTrajectory& traj);

    [[nodiscard]] double delta() const noexcept { return delta_; }
    [[nodiscard]] double t_end() const noexcept { return t_.back(); }
    [[nodiscard]] double x_end() const noexcept { return phi_.back(); }
    [[nodiscard]] const std::vector<double>& knot_times() const noexcept { return t_; }

    /// Phi(t) for -tau0 <= t <= t_end.
    [[nodiscard]] double phi(double t) const;
    /// Phi^{-1}(x) for -delta <= x <= x_end, by bisection.
    [[nodiscard]] double phi_inverse(double x) const;
    /// W(x) = A(Phi^{-1}(x)).
    [[nodiscard]] double W(double x) const;

private:
    [[nodiscard]] std::size_t locate(double t) const;

    ModelConfig config_;
    double delta_ = 0.0;
    std::vector<double> t_, phi_, dphi_, A_, dA_;
};

/// Throws Unsupported unless traj has exactly one species, and DomainError
/// when delta = 0.
[[nodiscard]] TransformData build_transform(const DenseTrajectory& traj);

// The initial history carried to the x axis on the half-step lattice
// y_m = -delta + m * dx / 2, m = 0..2N, with dx = delta / N. G is the
// transformed time, so G(y_m) is the s with Phi_phi(s) = y_m.
struct TransformedHistory {
    double delta = 0.0;
    std::size_t steps = 0;  // N
    std::vector<double> W;
    std::vector<double> G;

    [[nodiscard]] double dx() const noexcept { return delta / static_cast<double>(steps); }
};

/// Samples W(y) = phi(Phi_phi^{-1}(y)) on [-delta, 0] with N = ceil(delta / dx_target).
[[nodiscard]] TransformedHistory transform_history(const ModelConfig& config, double dx_target);

// Dense solution of the constant-delay equation in W, augmented with
// G(x) = integral_0^x 1 / f(zeta W) so that the exponent is G(x) - G(x - delta).
class ConstantDelaySolution {
public:
    ConstantDelaySolution(ModelConfig config, TransformedHistory history);

    [[nodiscard]] const ModelConfig& config() const noexcept { return config_; }
    [[nodiscard]] const TransformedHistory& history() const noexcept { return history_; }
    [[nodiscard]] double x_end() const noexcept { return x_.back(); }
    [[nodiscard]] std::size_t knot_count() const noexcept { return x_.size(); }
    [[nodiscard]] double knot_x(std::size_t k) const { return x_[k]; }
    [[nodiscard]] double knot_W(std::size_t k) const { return W_[k]; }
    [[nodiscard]] double knot_G(std::size_t k) const { return G_[k]; }

    /// W(x) for 0 <= x <= x_end (Hermite), or the transformed history for x < 0.
    [[nodiscard]] double W(double x) const;
    /// G(x) on the same range.
    [[nodiscard]] double G(double x) const;
    /// Delay carried by the augmented state: G(x) - G(x - delta).
    [[nodiscard]] double delay(double x) const;

    /// The history time s <= 0 mapped to y in [-delta, 0]; lattice points
    /// come from the table, other points are re-solved by bisection.
    [[nodiscard]] double history_time(double y) const;

    void append(double x, double W, double dW, double G, double dG);

private:

    ModelConfig config_;
    TransformedHistory history_;
    std::vector<double> x_, W_, dW_, G_, dG_;
};

/// Integrates W'(x) = -mu_A W / f(zeta W) + beta e^{-mu_J (G(x) - G(x - delta))}
/// W(x - delta) / f(zeta W(x - delta)) with RK4 on the lattice dx = delta / N,
/// so every delayed stage argument lands on a stored knot or midpoint.
/// Throws Unsupported for n != 1 and DomainError for delta = 0.
[[nodiscard]] ConstantDelaySolution solve_constant_delay(const ModelConfig& config,
                                                         const TransformedHistory& history,
                                                         double x_end);

/// integral_{-delta}^{0} 1 / f(zeta W(x + r)) dr by adaptive Simpson over the
/// dense W (tolerance 1e-10); the part below x = 0 uses the exact history
/// value -Phi_phi^{-1}(x - delta).
[[nodiscard]] double recovered_delay(const ConstantDelaySolution& sol, double x);

struct RoundTrip {
    double max_state_error = 0.0;  // sup_t |W(Phi(t)) - A(t)|
    double max_delay_error = 0.0;  // sup_t |recovered_delay(Phi(t)) - tau(t)|
    double max_phi_shift_error = 0.0;  // sup_t |Phi(t - tau(t)) - (Phi(t) - delta)|
    std::size_t samples = 0;
};

/// Compares the two formulations at every knot of traj inside the solved x
/// range; the delay identity, which needs a quadrature, at every
/// `delay_stride`-th knot.
[[nodiscard]] RoundTrip compare(const DenseTrajectory& traj, const TransformData& transform,
                                const ConstantDelaySolution& sol, std::size_t delay_stride = 10);

}  // namespace forest::smith
