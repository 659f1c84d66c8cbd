#include "forest/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "forest/errors.hpp"

namespace forest {

double DenseSegment::A(std::size_t i, double s) const noexcept {
    const double h = t_hi - t_lo;
    return hermite(A_lo[i], dA_lo[i], A_hi[i], dA_hi[i], h, (s - t_lo) / h);
}

double DenseSegment::tau(std::size_t i, double s) const noexcept {
    const double h = t_hi - t_lo;
    return hermite(tau_lo[i], dtau_lo[i], tau_hi[i], dtau_hi[i], h, (s - t_lo) / h);
}

DenseTrajectory::DenseTrajectory(ModelConfig config, DelayNormalization normalization)
    : config_(std::move(config)), norm_(std::move(normalization)), n_(config_.n()) {
    if (norm_.C.size() != n_) {
        throw InvalidInput("DenseTrajectory: normalization size does not match species count");
    }
}

void DenseTrajectory::append(double t, std::span<const double> A, std::span<const double> tau,
                             std::span<const double> dA, std::span<const double> dtau) {
    if (A.size() != n_ || tau.size() != n_ || dA.size() != n_ || dtau.size() != n_) {
        throw InvalidInput("DenseTrajectory::append: channel size mismatch");
    }
    if (t_.empty() ? t != 0.0 : !(t > t_.back())) {
        throw InvalidInput("DenseTrajectory::append: knots must start at 0 and increase");
    }
    t_.push_back(t);
    A_.insert(A_.end(), A.begin(), A.end());
    dA_.insert(dA_.end(), dA.begin(), dA.end());
    tau_.insert(tau_.end(), tau.begin(), tau.end());
    dtau_.insert(dtau_.end(), dtau.begin(), dtau.end());
    if (t_.size() == 1) {
        prefix_.assign(n_, quad::CompensatedSum{});
    } else {
        add_segment_integral(t_.size() - 2);
    }
}

void DenseTrajectory::replace_last(std::span<const double> A, std::span<const double> tau,
                                   std::span<const double> dA, std::span<const double> dtau) {
    if (t_.empty()) {
        throw InvalidInput("DenseTrajectory::replace_last: trajectory is empty");
    }
    const std::size_t off = (t_.size() - 1) * n_;
    std::copy(A.begin(), A.end(), A_.begin() + static_cast<std::ptrdiff_t>(off));
    std::copy(dA.begin(), dA.end(), dA_.begin() + static_cast<std::ptrdiff_t>(off));
    std::copy(tau.begin(), tau.end(), tau_.begin() + static_cast<std::ptrdiff_t>(off));
    std::copy(dtau.begin(), dtau.end(), dtau_.begin() + static_cast<std::ptrdiff_t>(off));
    if (t_.size() > 1) {
        prefix_.resize(off);
        add_segment_integral(t_.size() - 2);
    }
}

void DenseTrajectory::add_segment_integral(std::size_t k) {
    for (std::size_t i = 0; i < n_; ++i) {
        quad::CompensatedSum next = prefix_[k * n_ + i];
        next.add(segment_f_integral(i, k, t_[k], t_[k + 1]));
        prefix_.push_back(next);
    }
}

double DenseTrajectory::segment_f_integral(std::size_t i, std::size_t k, double lo,
                                           double hi) const {
    const double t0 = t_[k];
    const double h = t_[k + 1] - t0;
    const auto& row = config_.zeta[i];
    const std::size_t a = k * n_;
    const std::size_t b = (k + 1) * n_;
    const auto integrand = [&](double s) {
        const double th = (s - t0) / h;
        double z = 0.0;
        for (std::size_t j = 0; j < n_; ++j) {
            if (row[j] != 0.0) {
                z += row[j] * hermite(A_[a + j], dA_[a + j], A_[b + j], dA_[b + j], h, th);
            }
        }
        return eval_f(config_.species[i].f, std::max(z, 0.0));
    };
    return quad::gauss_legendre5(integrand, lo, hi);
}

DenseSegment DenseTrajectory::segment(std::size_t k) const {
    if (k + 1 >= t_.size()) {
        throw InvalidInput("DenseTrajectory::segment: index out of range");
    }
    const auto lo = static_cast<std::ptrdiff_t>(k * n_);
    const auto hi = static_cast<std::ptrdiff_t>((k + 1) * n_);
    const auto w = static_cast<std::ptrdiff_t>(n_);
    const auto slice = [&](const std::vector<double>& v, std::ptrdiff_t off) {
        return std::vector<double>(v.begin() + off, v.begin() + off + w);
    };
    return DenseSegment{t_[k],          t_[k + 1],        slice(A_, lo),   slice(A_, hi),
                        slice(dA_, lo), slice(dA_, hi),   slice(tau_, lo), slice(tau_, hi),
                        slice(dtau_, lo), slice(dtau_, hi)};
}

std::size_t DenseTrajectory::locate(double s) const {
    // Segment index k with t_k <= s <= t_{k+1}; knots resolve to the segment on their left
    // except the first knot.
    auto it = std::lower_bound(t_.begin(), t_.end(), s);
    std::size_t k = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
    return std::min(k, t_.size() - 2);
}

double DenseTrajectory::state_unchecked(std::size_t j, double s) const {
    if (s <= 0.0 || t_.empty()) {
        return config_.species[j].history(std::min(s, 0.0));
    }
    if (t_.size() == 1) {
        return A_[j];
    }
    const std::size_t k = locate(s);
    if (s == t_[k + 1]) {
        return A_[(k + 1) * n_ + j];
    }
    const double h = t_[k + 1] - t_[k];
    const std::size_t a = k * n_ + j;
    const std::size_t b = (k + 1) * n_ + j;
    return hermite(A_[a], dA_[a], A_[b], dA_[b], h, (s - t_[k]) / h);
}

void DenseTrajectory::states_on_segments(double s, std::span<double> out) const {
    const std::size_t k = locate(s);
    const double h = t_[k + 1] - t_[k];
    const double th = (s - t_[k]) / h;
    for (std::size_t j = 0; j < n_; ++j) {
        const std::size_t a = k * n_ + j;
        const std::size_t b = (k + 1) * n_ + j;
        out[j] = hermite(A_[a], dA_[a], A_[b], dA_[b], h, th);
    }
}

double DenseTrajectory::eval_state(std::size_t i, double s) const {
    if (i >= n_) {
        throw InvalidInput("eval_state: species index out of range");
    }
    if (s < -config_.species[i].tau0) {
        throw DomainError("eval_state: time " + std::to_string(s) + " precedes -tau0 of species " +
                          std::to_string(i + 1));
    }
    if (t_.empty() || s > t_.back()) {
        throw DomainError("eval_state: time " + std::to_string(s) + " is past the integrated range");
    }
    if (s > 0.0 && s < t_.front()) {
        throw DomainError("eval_state: time " + std::to_string(s) + " was pruned");
    }
    return state_unchecked(i, s);
}

double DenseTrajectory::eval_delay(std::size_t i, double s) const {
    if (i >= n_) {
        throw InvalidInput("eval_delay: species index out of range");
    }
    if (t_.empty() || s < t_.front() || s > t_.back()) {
        throw DomainError("eval_delay: time " + std::to_string(s) + " outside [t_first, t_current]");
    }
    if (t_.size() == 1) {
        return tau_[i];
    }
    const std::size_t k = locate(s);
    const std::size_t a = k * n_ + i;
    const std::size_t b = (k + 1) * n_ + i;
    if (s == t_[k + 1]) {
        return tau_[b];
    }
    const double h = t_[k + 1] - t_[k];
    return hermite(tau_[a], dtau_[a], tau_[b], dtau_[b], h, (s - t_[k]) / h);
}

double DenseTrajectory::weighted_total_at(std::size_t i, double s) const {
    if (i >= n_) {
        throw InvalidInput("weighted_total_at: species index out of range");
    }
    if (s < -config_.species[i].tau0 || t_.empty() || s > t_.back()) {
        throw DomainError("weighted_total_at: time " + std::to_string(s) + " out of range");
    }
    if (s <= 0.0) {
        return config_.history_weighted_total(i, s);
    }
    const auto& row = config_.zeta[i];
    double z = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
        if (row[j] != 0.0) {
            z += row[j] * state_unchecked(j, s);
        }
    }
    return z;
}

double DenseTrajectory::f_at(std::size_t i, double s) const {
    return eval_f(config_.species[i].f, std::max(weighted_total_at(i, s), 0.0));
}

double DenseTrajectory::cumulative_f(std::size_t i, double t) const {
    if (t_.empty() || t < t_.front() || t > t_.back()) {
        throw DomainError("cumulative_f: time " + std::to_string(t) + " outside [t_first, t_current]");
    }
    if (t_.size() == 1) {
        return 0.0;
    }
    const std::size_t k = locate(t);
    if (t == t_[k + 1]) {
        return prefix_[(k + 1) * n_ + i].value();
    }
    return prefix_[k * n_ + i].value() + segment_f_integral(i, k, t_[k], t);
}

double DenseTrajectory::f_integral(std::size_t i, double lo, double hi) const {
    if (i >= n_) {
        throw InvalidInput("f_integral: species index out of range");
    }
    if (lo > hi) {
        throw InvalidInput("f_integral: lo > hi");
    }
    if (lo < -config_.species[i].tau0 || t_.empty() || hi > t_.back()) {
        throw DomainError("f_integral: [" + std::to_string(lo) + ", " + std::to_string(hi) +
                          "] outside the evaluable range");
    }
    double total = 0.0;
    if (lo < 0.0) {
        total += history_f_integral(config_, i, lo, std::min(hi, 0.0));
    }
    if (hi > 0.0) {
        total += cumulative_f(i, hi) - cumulative_f(i, std::max(lo, 0.0));
    }
    return total;
}

double DenseTrajectory::watermark() const {
    if (t_.empty()) {
        throw DomainError("watermark: trajectory is empty");
    }
    const std::size_t last = (t_.size() - 1) * n_;
    double w = t_.back();
    for (std::size_t i = 0; i < n_; ++i) {
        w = std::min(w, t_.back() - tau_[last + i]);
    }
    return w;
}

void DenseTrajectory::prune_before(double t) {
    if (t_.size() < 2 || t <= t_.front()) {
        return;
    }
    if (t > watermark()) {
        throw InvalidInput("prune_before: refusing to prune past the watermark");
    }
    const std::size_t k = locate(t);
    if (k == 0) {
        return;
    }
    const auto drop = static_cast<std::ptrdiff_t>(k);
    const auto drop_n = static_cast<std::ptrdiff_t>(k * n_);
    t_.erase(t_.begin(), t_.begin() + drop);
    A_.erase(A_.begin(), A_.begin() + drop_n);
    dA_.erase(dA_.begin(), dA_.begin() + drop_n);
    tau_.erase(tau_.begin(), tau_.begin() + drop_n);
    dtau_.erase(dtau_.begin(), dtau_.begin() + drop_n);
    prefix_.erase(prefix_.begin(), prefix_.begin() + drop_n);
}

}  // namespace forest
