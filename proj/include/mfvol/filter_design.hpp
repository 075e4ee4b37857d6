#pragma once

// MAXFLAT (Butterworth) low-pass design: analog prototype poles, the analog
// denominator polynomial, the magnitude response, and the bilinear
// discretization to a rational filter in lag form.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace mfvol {

using Complex = std::complex<double>;

inline constexpr int kMaxFilterOrder = 12;

struct FilterSpec {
    int order = 2;
    double cutoff = 1.0 / 500.0;  // cycles per sample

    void validate() const {
        if (order < 1 || order > kMaxFilterOrder) {
            throw Error(Errc::invalid_order, "filter_design",
                        "order must lie in [1, " + std::to_string(kMaxFilterOrder) + "], got " +
                            std::to_string(order));
        }
        if (!(cutoff > 0.0 && cutoff < 0.5)) {
            throw Error(Errc::invalid_cutoff, "filter_design",
                        "cutoff must lie strictly inside (0, 0.5) cycles/sample, got " +
                            std::to_string(cutoff));
        }
    }
};

struct AnalogPrototype {
    std::vector<Complex> poles;
    double gain = 1.0;
};

/// Rational filter H(z) = (b0 + b1 z^-1 + ...) / (1 + a1 z^-1 + ...).
/// Both coefficient lists are in ascending lag order and a[0] == 1.
struct DiscreteFilter {
    std::vector<double> b;
    std::vector<double> a;

    std::size_t order() const { return std::max(a.size(), b.size()) - 1; }
    double dc_gain() const;
};

namespace detail {

inline std::vector<double> poly_multiply(std::span<const double> p, std::span<const double> q) {
    std::vector<double> out(p.size() + q.size() - 1, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (std::size_t j = 0; j < q.size(); ++j) out[i + j] += p[i] * q[j];
    }
    return out;
}

inline double sum(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

}  // namespace detail

inline double DiscreteFilter::dc_gain() const { return detail::sum(b) / detail::sum(a); }

/// Left-half-plane poles s_k = exp(j*pi*(2k - 1 + n) / (2n)), k = 1..n.
/// Pole k and pole n+1-k are stored as exact conjugates; the middle pole of
/// an odd order is exactly -1.
inline std::vector<Complex> butterworth_poles(int n) {
    if (n < 1) {
        throw Error(Errc::invalid_order, "filter_design",
                    "order must be positive, got " + std::to_string(n));
    }
    std::vector<Complex> poles(static_cast<std::size_t>(n));
    for (int k = 1; k <= n / 2; ++k) {
        const double angle = std::numbers::pi * (2.0 * k - 1.0 + n) / (2.0 * n);
        const Complex p = std::polar(1.0, angle);
        poles[static_cast<std::size_t>(k - 1)] = p;
        poles[static_cast<std::size_t>(n - k)] = std::conj(p);
    }
    if (n % 2 == 1) poles[static_cast<std::size_t>(n / 2)] = Complex(-1.0, 0.0);
    return poles;
}

inline AnalogPrototype analog_prototype(int n) { return {butterworth_poles(n), 1.0}; }

/// Real coefficients of prod(s - s_k), highest power first: {1, c1, ..., cn}.
/// Conjugate pairs are multiplied into real quadratics before the full
/// expansion.
inline std::vector<double> analog_denominator(std::span<const Complex> poles) {
    constexpr double real_tol = 1e-12;
    constexpr double pair_tol = 1e-9;
    std::vector<bool> used(poles.size(), false);
    std::vector<double> poly{1.0};
    for (std::size_t i = 0; i < poles.size(); ++i) {
        if (used[i]) continue;
        used[i] = true;
        const Complex p = poles[i];
        const double scale = std::max(1.0, std::abs(p));
        if (std::abs(p.imag()) <= real_tol * scale) {
            const double factor[] = {1.0, -p.real()};
            poly = detail::poly_multiply(poly, factor);
            continue;
        }
        std::size_t partner = poles.size();
        for (std::size_t j = i + 1; j < poles.size(); ++j) {
            if (!used[j] && std::abs(poles[j] - std::conj(p)) <= pair_tol * scale) {
                partner = j;
                break;
            }
        }
        if (partner == poles.size()) {
            throw Error(Errc::asymmetry, "filter_design",
                        "pole set is not closed under conjugation");
        }
        used[partner] = true;
        const double factor[] = {1.0, -2.0 * p.real(), std::norm(p)};
        poly = detail::poly_multiply(poly, factor);
    }
    return poly;
}

/// |H_n(jw)| = 1 / sqrt(1 + w^(2n)) for the unit-cutoff prototype.
inline double magnitude_response(int n, double w) {
    return 1.0 / std::sqrt(1.0 + std::pow(w, 2.0 * n));
}

/// Pre-warped analog cutoff tan(pi * f). Near f = 1/4 the tangent is formed
/// from the offset angle so that f = 0.25 maps to exactly 1.
inline double prewarp(double cutoff) {
    if (cutoff >= 0.125 && cutoff <= 0.375) {
        const double t = std::tan(std::numbers::pi * (cutoff - 0.25));
        return (1.0 + t) / (1.0 - t);
    }
    return std::tan(std::numbers::pi * cutoff);
}

/// Roots of 1 + a1 x + ... + an x^n read as the polynomial z^n + a1 z^(n-1) + ... + an,
/// i.e. the poles of the filter in the z-plane.
inline std::vector<Complex> denominator_roots(std::span<const double> a) {
    std::size_t n = a.size() - 1;
    while (n > 0 && a[n] == 0.0) --n;  // trailing zeros are poles at the origin
    std::vector<Complex> roots(a.size() - 1 - n, Complex(0.0, 0.0));
    if (n == 0) return roots;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                      static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) companion(0, static_cast<Eigen::Index>(j)) = -a[j + 1] / a[0];
    for (std::size_t i = 1; i < n; ++i) {
        companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
    }
    const Eigen::VectorXcd ev = companion.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) roots.push_back(ev(i));
    return roots;
}

inline bool is_stable(std::span<const double> a) {
    for (const Complex& r : denominator_roots(a)) {
        if (!(std::abs(r) < 1.0)) return false;
    }
    return true;
}

/// Bilinear transform of the order-n prototype with the cutoff pre-warped so
/// that the digital response is exactly half-power at spec.cutoff.
///
/// Analog poles map to z_k = (1 + W p_k) / (1 - W p_k) with W = tan(pi f_c);
/// all n zeros land on z = -1 and the gain is set for unity DC response.
/// Throws instability when the expanded denominator cannot represent the
/// poles inside the unit circle in double precision (very high order at very
/// low cutoff).
inline DiscreteFilter discretize(const FilterSpec& spec) {
    spec.validate();
    const int n = spec.order;
    const double warped = prewarp(spec.cutoff);
    const std::vector<Complex> poles = butterworth_poles(n);

    auto map_pole = [warped](Complex p) { return (1.0 + warped * p) / (1.0 - warped * p); };

    std::vector<double> a{1.0};
    for (int k = 0; k < n / 2; ++k) {
        const Complex z = map_pole(poles[static_cast<std::size_t>(k)]);
        const double section[] = {1.0, -2.0 * z.real(), std::norm(z)};
        a = detail::poly_multiply(a, section);
    }
    if (n % 2 == 1) {
        const double z = map_pole(poles[static_cast<std::size_t>(n / 2)]).real();
        const double section[] = {1.0, -z + 0.0};  // no negative zero
        a = detail::poly_multiply(a, section);
    }

    std::vector<double> b{1.0};
    const double zero_section[] = {1.0, 1.0};
    for (int k = 0; k < n; ++k) b = detail::poly_multiply(b, zero_section);
    const double gain = detail::sum(a) / std::ldexp(1.0, n);
    for (double& c : b) c *= gain;

    if (!is_stable(a)) {
        throw Error(Errc::instability, "filter_design",
                    "order " + std::to_string(n) + " at cutoff " + std::to_string(spec.cutoff) +
                        " is not representable as a stable transfer function in double precision");
    }
    return {std::move(b), std::move(a)};
}

/// |sum b_m e^{-j 2 pi f m}| / |sum a_m e^{-j 2 pi f m}|.
inline double discrete_magnitude(const DiscreteFilter& filter, double freq) {
    const double omega = 2.0 * std::numbers::pi * freq;
    auto eval = [omega](std::span<const double> c) {
        Complex acc(0.0, 0.0);
        for (std::size_t m = 0; m < c.size(); ++m) {
            acc += c[m] * std::polar(1.0, -omega * static_cast<double>(m));
        }
        return acc;
    };
    return std::abs(eval(filter.b)) / std::abs(eval(filter.a));
}

}  // namespace mfvol
