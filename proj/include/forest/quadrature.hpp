#pragma once

#include <cstddef>
#include <functional>

namespace forest::quad {

using Integrand = std::function<double(double)>;

struct QuadratureResult {
    double value = 0.0;
    std::size_t intervals = 0;
    bool converged = true;
};

inline constexpr std::size_t kDefaultIntervalCap = std::size_t{1} << 20;

/// Adaptive Simpson on [a, b] to an absolute tolerance. Subdivision stops
/// once `interval_cap` leaves have been produced; `converged` reports whether
/// every leaf met its local tolerance.
[[nodiscard]] QuadratureResult adaptive_simpson(const Integrand& f, double a, double b,
                                                double abs_tol,
                                                std::size_t interval_cap = kDefaultIntervalCap);

/// Five-point Gauss-Legendre rule, exact for polynomials of degree <= 9.
template <class F>
[[nodiscard]] double gauss_legendre5(F&& f, double a, double b) {
    constexpr double x1 = 0.53846931010568309103631442070020880;
    constexpr double x2 = 0.90617984593866399279762687829939297;
    constexpr double w0 = 0.56888888888888888888888888888888889;
    constexpr double w1 = 0.47862867049936646804129151483563819;
    constexpr double w2 = 0.23692688505618908751426404071991736;
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = w0 * f(mid);
    sum += w1 * (f(mid - half * x1) + f(mid + half * x1));
    sum += w2 * (f(mid - half * x2) + f(mid + half * x2));
    return half * sum;
}

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) noexcept;
    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Root of a monotone function on [lo, hi] by bisection. `g(lo)` and `g(hi)`
/// must bracket zero. Iterates until the bracket stops shrinking (floating
/// point collapse) or |g| <= residual_tol.
[[nodiscard]] double bisect(const std::function<double(double)>& g, double lo, double hi,
                            double residual_tol = 0.0, int max_iter = 200);

}  // namespace forest::quad
