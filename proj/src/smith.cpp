#include "forest/smith.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "forest/errors.hpp"
#include "forest/quadrature.hpp"

namespace forest::smith {

namespace {

void require_single_species(const ModelConfig& config, const char* what) {
    if (config.n() != 1) {
        throw Unsupported(std::string(what) +
                          ": the change of variable exists for a single species only");
    }
}

// s in [-tau0, 0] with -integral_s^0 f(zeta phi) = y.
double history_time_exact(const ModelConfig& config, double y) {
    if (y >= 0.0) {
        return 0.0;
    }
    const double tau0 = config.species[0].tau0;
    const auto g = [&](double s) { return history_f_integral(config, 0, s, 0.0) + y; };
    if (g(-tau0) <= 0.0) {
        return -tau0;
    }
    return quad::bisect(g, -tau0, 0.0);
}

double f_of(const ModelConfig& config, double W) {
    return eval_f(config.species[0].f, std::max(config.zeta[0][0] * W, 0.0));
}

}  // namespace

TransformData::TransformData(const DenseTrajectory& traj) : config_(traj.config()) {
    require_single_species(config_, "build_transform");
    delta_ = traj.normalization().C[0];
    if (!(delta_ > 0.0)) {
        throw DomainError("build_transform: delta = 0, the transform degenerates");
    }
    const std::size_t K = traj.knot_count();
    if (K < 2) {
        throw InvalidInput("build_transform: trajectory needs at least two knots");
    }
    t_ = traj.knot_times();
    phi_.resize(K);
    dphi_.resize(K);
    A_.resize(K);
    dA_.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        phi_[k] = traj.cumulative_f(0, t_[k]);
        dphi_[k] = traj.f_at(0, t_[k]);
        A_[k] = traj.knot_A(k)[0];
        dA_[k] = traj.knot_dA(k)[0];
    }
}

std::size_t TransformData::locate(double t) const {
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    const auto k = static_cast<std::size_t>(it - t_.begin());
    return std::clamp<std::size_t>(k, 1, t_.size() - 1) - 1;
}

double TransformData::phi(double t) const {
    if (t < 0.0) {
        return -history_f_integral(config_, 0, t, 0.0);
    }
    if (t > t_.back()) {
        throw DomainError("TransformData::phi: t beyond the transformed range");
    }
    const std::size_t k = locate(t);
    const double h = t_[k + 1] - t_[k];
    return hermite(phi_[k], dphi_[k], phi_[k + 1], dphi_[k + 1], h, (t - t_[k]) / h);
}

double TransformData::phi_inverse(double x) const {
    if (x < 0.0) {
        if (x < -delta_ * (1.0 + 1e-12)) {
            throw DomainError("TransformData::phi_inverse: x below -delta");
        }
        return history_time_exact(config_, x);
    }
    if (x > phi_.back()) {
        throw DomainError("TransformData::phi_inverse: x beyond the transformed range");
    }
    const auto it = std::upper_bound(phi_.begin(), phi_.end(), x);
    const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(it - phi_.begin()), 1,
                                                  phi_.size() - 1) - 1;
    if (x == phi_[k]) {
        return t_[k];
    }
    const auto g = [&](double t) { return phi(t) - x; };
    return quad::bisect(g, t_[k], t_[k + 1]);
}

double TransformData::W(double x) const {
    const double t = phi_inverse(x);
    if (t <= 0.0) {
        return config_.species[0].history(t);
    }
    const std::size_t k = locate(t);
    const double h = t_[k + 1] - t_[k];
    return hermite(A_[k], dA_[k], A_[k + 1], dA_[k + 1], h, (t - t_[k]) / h);
}

TransformData build_transform(const DenseTrajectory& traj) { return TransformData(traj); }

TransformedHistory transform_history(const ModelConfig& config, double dx_target) {
    require_single_species(config, "transform_history");
    if (!(dx_target > 0.0)) {
        throw InvalidInput("transform_history: dx must be > 0");
    }
    const double delta = compute_normalization(config).C[0];
    if (!(delta > 0.0)) {
        throw DomainError("transform_history: delta = 0, the transform degenerates");
    }
    TransformedHistory out;
    out.delta = delta;
    out.steps = static_cast<std::size_t>(std::ceil(delta / dx_target));
    const std::size_t M = 2 * out.steps;
    const double half = out.dx() / 2.0;
    out.W.resize(M + 1);
    out.G.resize(M + 1);
    for (std::size_t m = 0; m <= M; ++m) {
        double s = 0.0;
        if (m == 0) {
            s = -config.species[0].tau0;
        } else if (m < M) {
            s = history_time_exact(config, -delta + static_cast<double>(m) * half);
        }
        out.G[m] = s;
        out.W[m] = config.species[0].history(s);
    }
    return out;
}

ConstantDelaySolution::ConstantDelaySolution(ModelConfig config, TransformedHistory history)
    : config_(std::move(config)), history_(std::move(history)) {}

void ConstantDelaySolution::append(double x, double W, double dW, double G, double dG) {
    x_.push_back(x);
    W_.push_back(W);
    dW_.push_back(dW);
    G_.push_back(G);
    dG_.push_back(dG);
}

double ConstantDelaySolution::history_time(double y) const {
    const double half = history_.dx() / 2.0;
    const double m = (y + history_.delta) / half;
    const double r = std::round(m);
    if (std::abs(m - r) < 1e-9 && r >= 0.0 && r <= static_cast<double>(history_.G.size() - 1)) {
        return history_.G[static_cast<std::size_t>(r)];
    }
    return history_time_exact(config_, y);
}

double ConstantDelaySolution::W(double x) const {
    if (x <= 0.0) {
        return config_.species[0].history(history_time(x));
    }
    if (x_.empty() || x > x_.back()) {
        throw DomainError("ConstantDelaySolution::W: x beyond the solved range");
    }
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t k =
        std::clamp<std::size_t>(static_cast<std::size_t>(it - x_.begin()), 1, x_.size() - 1) - 1;
    const double h = x_[k + 1] - x_[k];
    return hermite(W_[k], dW_[k], W_[k + 1], dW_[k + 1], h, (x - x_[k]) / h);
}

double ConstantDelaySolution::G(double x) const {
    if (x <= 0.0) {
        return history_time(x);
    }
    if (x_.empty() || x > x_.back()) {
        throw DomainError("ConstantDelaySolution::G: x beyond the solved range");
    }
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t k =
        std::clamp<std::size_t>(static_cast<std::size_t>(it - x_.begin()), 1, x_.size() - 1) - 1;
    const double h = x_[k + 1] - x_[k];
    return hermite(G_[k], dG_[k], G_[k + 1], dG_[k + 1], h, (x - x_[k]) / h);
}

double ConstantDelaySolution::delay(double x) const { return G(x) - G(x - history_.delta); }

ConstantDelaySolution solve_constant_delay(const ModelConfig& config,
                                           const TransformedHistory& history, double x_end) {
    require_single_species(config, "solve_constant_delay");
    if (!(history.delta > 0.0) || history.steps == 0) {
        throw DomainError("solve_constant_delay: delta = 0, the transform degenerates");
    }
    if (!(x_end > 0.0)) {
        throw InvalidInput("solve_constant_delay: x_end must be > 0");
    }
    const auto& sp = config.species[0];
    const std::size_t N = history.steps;
    const double dx = history.dx();
    const std::size_t steps = static_cast<std::size_t>(std::ceil(x_end / dx - 1e-9));

    ConstantDelaySolution sol(config, history);
    std::vector<double> W{history.W.back()}, dW, G{0.0}, dG;
    W.reserve(steps + 1);
    G.reserve(steps + 1);

    // Delayed (W, G) at x_n - delta + c * dx / 2 for c in {0, 1, 2}: the
    // half-lattice index m = 2n + c is either a history sample or a knot /
    // segment midpoint of the solution computed so far.
    const auto delayed = [&](std::size_t n, std::size_t c, double& w, double& g) {
        const std::size_t m = 2 * n + c;
        if (m <= 2 * N) {
            w = history.W[m];
            g = history.G[m];
            return;
        }
        const std::size_t r = m - 2 * N;
        const std::size_t k = r / 2;
        if (r % 2 == 0) {
            w = W[k];
            g = G[k];
        } else {
            w = 0.5 * (W[k] + W[k + 1]) + dx * (dW[k] - dW[k + 1]) / 8.0;
            g = 0.5 * (G[k] + G[k + 1]) + dx * (dG[k] - dG[k + 1]) / 8.0;
        }
    };
    const auto rhs = [&](double w, double g, double w_lag, double g_lag, double& dw, double& dg) {
        const double f_now = f_of(config, w);
        dw = -sp.mu_A * w / f_now +
             sp.beta * std::exp(-sp.mu_J * (g - g_lag)) * w_lag / f_of(config, w_lag);
        dg = 1.0 / f_now;
    };

    double wl = 0.0, gl = 0.0, d_w = 0.0, d_g = 0.0;
    delayed(0, 0, wl, gl);
    rhs(W[0], G[0], wl, gl, d_w, d_g);
    dW.push_back(d_w);
    dG.push_back(d_g);

    for (std::size_t n = 0; n < steps; ++n) {
        const double w0 = W[n], g0 = G[n];
        const double k1w = dW[n], k1g = dG[n];
        double k2w = 0.0, k2g = 0.0, k3w = 0.0, k3g = 0.0, k4w = 0.0, k4g = 0.0;
        delayed(n, 1, wl, gl);
        rhs(w0 + 0.5 * dx * k1w, g0 + 0.5 * dx * k1g, wl, gl, k2w, k2g);
        rhs(w0 + 0.5 * dx * k2w, g0 + 0.5 * dx * k2g, wl, gl, k3w, k3g);
        delayed(n, 2, wl, gl);
        rhs(w0 + dx * k3w, g0 + dx * k3g, wl, gl, k4w, k4g);
        const double w1 = w0 + dx / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        const double g1 = g0 + dx / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
        if (!(w1 >= 0.0) || !std::isfinite(w1)) {
            throw NumericalFailure("solve_constant_delay: W became negative or non-finite; refine dx");
        }
        W.push_back(w1);
        G.push_back(g1);
        rhs(w1, g1, wl, gl, d_w, d_g);
        dW.push_back(d_w);
        dG.push_back(d_g);
    }
    for (std::size_t n = 0; n <= steps; ++n) {
        sol.append(static_cast<double>(n) * dx, W[n], dW[n], G[n], dG[n]);
    }
    return sol;
}

double recovered_delay(const ConstantDelaySolution& sol, double x) {
    const double delta = sol.history().delta;
    const double lo = x - delta;
    double below = 0.0;
    if (lo < 0.0) {
        below = -sol.history_time(lo) + (x < 0.0 ? sol.history_time(x) : 0.0);
    }
    const double a = std::max(lo, 0.0);
    if (x <= a) {
        return below;
    }
    const auto integrand = [&](double y) { return 1.0 / f_of(sol.config(), sol.W(y)); };
    return below + quad::adaptive_simpson(integrand, a, x, 1e-10).value;
}

RoundTrip compare(const DenseTrajectory& traj, const TransformData& transform,
                  const ConstantDelaySolution& sol, std::size_t delay_stride) {
    require_single_species(traj.config(), "compare");
    if (delay_stride == 0) {
        throw InvalidInput("compare: stride must be >= 1");
    }
    RoundTrip out;
    const double delta = transform.delta();
    for (std::size_t k = 0; k < traj.knot_count(); ++k) {
        const double t = traj.knot_time(k);
        const double x = transform.phi(t);
        if (x > sol.x_end()) {
            break;
        }
        ++out.samples;
        out.max_state_error = std::max(out.max_state_error, std::abs(sol.W(x) - traj.knot_A(k)[0]));
        const double tau = traj.knot_tau(k)[0];
        out.max_phi_shift_error =
            std::max(out.max_phi_shift_error, std::abs(transform.phi(t - tau) - (x - delta)));
        if (k % delay_stride == 0) {
            out.max_delay_error = std::max(out.max_delay_error, std::abs(recovered_delay(sol, x) - tau));
        }
    }
    return out;
}

}  // namespace forest::smith
