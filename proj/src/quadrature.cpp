#include "forest/quadrature.hpp"

#include <cmath>
#include <utility>

#include "forest/errors.hpp"

namespace forest::quad {

namespace {

struct SimpsonState {
    const Integrand& f;
    std::size_t cap;
    std::size_t leaves = 0;
    bool converged = true;
};

double simpson_recurse(SimpsonState& st, double a, double fa, double m, double fm, double b,
                       double fb, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = st.f(lm);
    const double frm = st.f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    // leaves grows by one for each split; stop splitting at the cap.
    if (std::abs(delta) <= 15.0 * tol || depth >= 60 || st.leaves + 1 >= st.cap ||
        !(lm > a && m > lm && rm > m && b > rm)) {
        if (std::abs(delta) > 15.0 * tol) {
            st.converged = false;
        }
        return left + right + delta / 15.0;
    }
    ++st.leaves;
    return simpson_recurse(st, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth + 1) +
           simpson_recurse(st, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth + 1);
}

}  // namespace

QuadratureResult adaptive_simpson(const Integrand& f, double a, double b, double abs_tol,
                                  std::size_t interval_cap) {
    if (!std::isfinite(a) || !std::isfinite(b)) {
        throw InvalidInput("adaptive_simpson: non-finite interval bounds");
    }
    if (a == b) {
        return {0.0, 0, true};
    }
    double sign = 1.0;
    if (b < a) {
        std::swap(a, b);
        sign = -1.0;
    }
    SimpsonState st{f, interval_cap};
    st.leaves = 1;
    const double fa = f(a);
    const double fb = f(b);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double v = simpson_recurse(st, a, fa, m, fm, b, fb, whole, abs_tol, 0);
    return {sign * v, st.leaves, st.converged};
}

void CompensatedSum::add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
        comp_ += (sum_ - t) + x;
    } else {
        comp_ += (x - t) + sum_;
    }
    sum_ = t;
}

double bisect(const std::function<double(double)>& g, double lo, double hi, double residual_tol,
              int max_iter) {
    double glo = g(lo);
    if (glo == 0.0) {
        return lo;
    }
    const double ghi = g(hi);
    if (ghi == 0.0) {
        return hi;
    }
    if ((glo > 0.0) == (ghi > 0.0)) {
        throw DomainError("bisect: endpoints do not bracket a root");
    }
    for (int it = 0; it < max_iter; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) {
            break;
        }
        const double gm = g(mid);
        if (gm == 0.0 || std::abs(gm) <= residual_tol) {
            return mid;
        }
        if ((gm > 0.0) == (glo > 0.0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace forest::quad
