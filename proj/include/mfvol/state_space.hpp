#pragma once

// State-space realization of a discrete filter and the lag-weight sequence
// C A^(k-1) B that drives the variance recursion
//   Z(t+1) = A Z(t) + B y^2(t),   sigma^2(t) = C Z(t).

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "filter_design.hpp"

namespace mfvol {

struct StateSpaceModel {
    Eigen::MatrixXd A;     // n x n
    Eigen::VectorXd B;     // n x 1
    Eigen::RowVectorXd C;  // 1 x n
    double d = 0.0;        // feedthrough, excluded from the volatility weights

    Eigen::Index dim() const { return A.rows(); }

    double spectral_radius() const {
        if (A.size() == 0) return 0.0;
        return A.eigenvalues().cwiseAbs().maxCoeff();
    }
};

struct LagWeights {
    std::vector<double> h;  // h[k-1] is the weight at lag k
    std::size_t truncation_length = 0;
    double raw_sum = 0.0;   // sum before any clipping or normalization
    /// Set by clip-mode validation when a negative weight had to be removed.
    std::optional<WeightViolation> clipped;
};

enum class WeightMode { strict, clip };

/// Controller canonical form: A is the companion matrix of a (first row
/// -a1..-an, ones on the subdiagonal), B = e1, C = b_i - b0 a_i, d = b0.
inline StateSpaceModel to_controller_canonical(const DiscreteFilter& filter) {
    if (filter.a.empty() || filter.a[0] != 1.0) {
        throw Error(Errc::parameter, "state_space", "denominator must satisfy a[0] == 1");
    }
    if (filter.b.empty()) throw Error(Errc::parameter, "state_space", "empty numerator");
    if (!is_stable(filter.a)) {
        throw Error(Errc::instability, "state_space", "denominator has a root on or outside the unit circle");
    }
    const std::size_t n = filter.order();
    auto coef = [](const std::vector<double>& v, std::size_t i) { return i < v.size() ? v[i] : 0.0; };

    StateSpaceModel ss;
    const auto dim = static_cast<Eigen::Index>(n);
    ss.A = Eigen::MatrixXd::Zero(dim, dim);
    ss.B = Eigen::VectorXd::Zero(dim);
    ss.C = Eigen::RowVectorXd::Zero(dim);
    ss.d = filter.b[0];
    for (std::size_t i = 1; i <= n; ++i) {
        const auto col = static_cast<Eigen::Index>(i - 1);
        ss.A(0, col) = -coef(filter.a, i);
        ss.C(col) = coef(filter.b, i) - filter.b[0] * coef(filter.a, i);
        if (i < n) ss.A(col + 1, col) = 1.0;
    }
    if (n > 0) ss.B(0) = 1.0;
    return ss;
}

/// h_k = C A^(k-1) B for k = 1..length.
inline LagWeights impulse_weights(const StateSpaceModel& ss, std::size_t length) {
    if (length == 0) throw Error(Errc::parameter, "state_space", "truncation length must be positive");
    LagWeights w;
    w.h.reserve(length);
    Eigen::VectorXd v = ss.B;
    for (std::size_t k = 0; k < length; ++k) {
        const double hk = ss.dim() == 0 ? 0.0 : ss.C.dot(v);
        w.h.push_back(hk);
        w.raw_sum += hk;
        if (ss.dim() > 0) v = ss.A * v;
    }
    w.truncation_length = length;
    return w;
}

/// Smaller of `cap` and the lag at which the cumulative absolute weight first
/// reaches `mass` of the (numerically) infinite total.
inline std::size_t default_truncation(const StateSpaceModel& ss, std::size_t cap = 750,
                                      double mass = 0.9999) {
    if (ss.dim() == 0) return 1;
    constexpr std::size_t horizon_limit = 2'000'000;
    std::vector<double> cumulative;
    double total = 0.0;
    Eigen::VectorXd v = ss.B;
    const double c_norm = ss.C.norm();
    for (std::size_t k = 0; k < horizon_limit; ++k) {
        total += std::abs(ss.C.dot(v));
        cumulative.push_back(total);
        v = ss.A * v;
        if (k > static_cast<std::size_t>(ss.dim()) && c_norm * v.norm() <= 1e-17 * total) break;
    }
    for (std::size_t k = 0; k < cumulative.size(); ++k) {
        if (cumulative[k] >= mass * total) return std::min(cap, k + 1);
    }
    return std::min(cap, cumulative.size());
}

/// Enforces positivity and summability of the lag weights and rescales them
/// to sum exactly one.
///
/// strict: any weight below -1e-12, or a raw sum not below one, raises
///         ConstraintViolationError carrying the first offending lag.
/// clip:   negative weights are zeroed (the first one is recorded in
///         `clipped`) and the remainder renormalized.
/// All-zero weights are rejected in both modes.
inline LagWeights validate_weights(const LagWeights& weights, WeightMode mode) {
    constexpr double neg_tol = 1e-12;
    LagWeights out = weights;
    std::optional<WeightViolation> first_negative;
    for (std::size_t k = 0; k < weights.h.size(); ++k) {
        if (weights.h[k] < -neg_tol) {
            first_negative = WeightViolation{k + 1, weights.h[k], "negative-weight"};
            break;
        }
    }
    if (mode == WeightMode::strict) {
        if (first_negative) throw ConstraintViolationError(*first_negative);
        if (weights.raw_sum >= 1.0) {
            throw ConstraintViolationError(WeightViolation{0, weights.raw_sum, "sum-not-below-one"});
        }
    }
    double positive_mass = 0.0;
    for (double& hk : out.h) {
        if (hk < 0.0) hk = 0.0;
        positive_mass += hk;
    }
    if (!(positive_mass > 0.0)) {
        throw Error(Errc::degenerate_weights, "state_space", "lag weights carry no positive mass");
    }
    for (double& hk : out.h) hk /= positive_mass;
    out.clipped = mode == WeightMode::clip ? first_negative : std::nullopt;
    return out;
}

}  // namespace mfvol
