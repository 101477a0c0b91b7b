#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "cdxou/errors.hpp"
#include "cdxou/math.hpp"

namespace cdxou {

// Receiver/payer option prices on an ascending strike grid. Strikes are per
// annum; prices in bps of notional. A small tolerance absorbs Monte Carlo
// noise in the no-arbitrage monotonicity check.
struct PriceCurve {
    std::vector<double> strikes;
    std::vector<double> receiver_prices, payer_prices;

    void validate(double tol_bps = 1e-9) const {
        const std::size_t n = strikes.size();
        if (n < 2 || receiver_prices.size() != n || payer_prices.size() != n)
            throw std::invalid_argument("PriceCurve: need >= 2 aligned quotes");
        for (std::size_t i = 1; i < n; ++i) {
            if (!(strikes[i] > strikes[i - 1]))
                throw std::invalid_argument("PriceCurve: strikes must ascend");
            if (receiver_prices[i] < receiver_prices[i - 1] - tol_bps)
                throw std::invalid_argument("PriceCurve: receiver prices must be nondecreasing");
            if (payer_prices[i] > payer_prices[i - 1] + tol_bps)
                throw std::invalid_argument("PriceCurve: payer prices must be nonincreasing");
        }
    }
};

// Annuity-measure spread statistics extracted from a strike continuum.
// mu4 uses the conventional mu2^2 normalizer, which reproduces reported
// kurtosis magnitudes; mu4_display_norm keeps the mu2^4 normalizer that
// sometimes appears in print, dimensionally inconsistent but retained for
// reference. Moments are in bps powers (mu2 in bps^2; mu3, mu4 unitless).
struct MomentReport {
    double c_f = 0.0;      // forward spread, per annum
    double annuity = 0.0;  // E[A_0] estimate
    double mu2 = 0.0, mu3 = 0.0, mu4 = 0.0;
    double mu4_display_norm = 0.0;
    // moments recomputed after dropping the outermost quote on each wing
    double mu2_drop_outer = 0.0, mu3_drop_outer = 0.0, mu4_drop_outer = 0.0;
};

namespace detail {

struct StrikeInterp {
    MonotoneCubic receiver, payer;
    double lo, hi;
};

inline StrikeInterp make_interp(const PriceCurve& c) {
    return {MonotoneCubic(c.strikes, c.receiver_prices), MonotoneCubic(c.strikes, c.payer_prices),
            c.strikes.front(), c.strikes.back()};
}

}  // namespace detail

// Root of payer(c) - receiver(c): the put-call-parity strike.
inline double forward_spread(const PriceCurve& curve) {
    curve.validate(1e-3);
    const auto interp = detail::make_interp(curve);
    const double dlo = interp.payer(interp.lo) - interp.receiver(interp.lo);
    const double dhi = interp.payer(interp.hi) - interp.receiver(interp.hi);
    if (dlo < 0.0 || dhi > 0.0)
        throw extraction_error("forward_spread: payer-receiver difference does not change sign");
    return find_root([&](double k) { return interp.payer(k) - interp.receiver(k); }, interp.lo,
                     interp.hi, 1e-14);
}

// E[A_0] = u_p(0,0) / c_f with the payer curve extrapolated linearly to
// strike zero from the two lowest quotes, floored at the monotonicity bound
// u_p(k_min) (receivers at strike 0 are worthless, so parity gives
// f_p(0,0) = u_p(0,0) directly).
inline double annuity_estimate(const PriceCurve& curve, double c_f) {
    if (!(c_f > 0.0)) throw extraction_error("annuity_estimate: need positive forward spread");
    const double k0 = curve.strikes[0], k1 = curve.strikes[1];
    const double p0 = curve.payer_prices[0], p1 = curve.payer_prices[1];
    const double extrapolated = p0 + (p1 - p0) / (k1 - k0) * (0.0 - k0);
    const double up0 = std::max(extrapolated, p0);
    if (!(up0 > 0.0)) throw extraction_error("annuity_estimate: nonpositive payer value at zero strike");
    return up0 * 1e-4 / c_f;  // prices in bps, annuity in notional units
}

// Carr-Madan decomposition of a C^2 payoff around c_hat: cash + forward +
// strike densities H'' on the receiver ([0, c_hat]) and payer wings.
struct SmoothPayoff {
    std::function<double(double)> value, d1, d2;
};

struct CarrMadanDecomp {
    double level, slope, c_hat;
    std::function<double(double)> receiver_density, payer_density;

    // Reconstruct H(c) by quadrature of the decomposition.
    double reconstruct(double c, int panels = 4000) const {
        double acc = level + slope * (c - c_hat);
        auto trapz = [&](double lo, double hi, const std::function<double(double)>& w,
                         const std::function<double(double)>& payoff) {
            if (hi <= lo) return 0.0;
            const int m = panels;
            double s = 0.0;
            const double h = (hi - lo) / m;
            for (int i = 0; i <= m; ++i) {
                const double k = lo + h * i;
                const double f = w(k) * payoff(k);
                s += (i == 0 || i == m) ? 0.5 * f : f;
            }
            return s * h;
        };
        acc += trapz(c_hat, std::max(c, c_hat), payer_density,
                     [&](double k) { return std::max(c - k, 0.0); });
        acc += trapz(std::min(c, c_hat), c_hat, receiver_density,
                     [&](double k) { return std::max(k - c, 0.0); });
        return acc;
    }
};

inline CarrMadanDecomp carr_madan_weights(const SmoothPayoff& H, double c_hat) {
    CarrMadanDecomp d;
    d.level = H.value(c_hat);
    d.slope = H.d1(c_hat);
    d.c_hat = c_hat;
    d.receiver_density = H.d2;
    d.payer_density = H.d2;
    return d;
}

namespace detail {

// Trapezoid of w(k) * price(k) over the quoted grid restricted to one wing,
// with a node inserted at the wing boundary c_f and zero extension beyond
// the outermost quote.
inline double wing_integral(const std::vector<double>& strikes, const std::vector<double>& prices,
                            double c_f, bool payer_wing,
                            const std::function<double(double)>& weight) {
    std::vector<double> k, v;
    const MonotoneCubic interp(strikes, prices);
    if (payer_wing) {
        if (c_f >= strikes.back()) return 0.0;
        k.push_back(c_f);
        v.push_back(std::max(interp(c_f), 0.0));
        for (std::size_t i = 0; i < strikes.size(); ++i)
            if (strikes[i] > c_f) {
                k.push_back(strikes[i]);
                v.push_back(prices[i]);
            }
    } else {
        if (c_f <= strikes.front()) return 0.0;
        for (std::size_t i = 0; i < strikes.size(); ++i)
            if (strikes[i] < c_f) {
                k.push_back(strikes[i]);
                v.push_back(prices[i]);
            }
        k.push_back(c_f);
        v.push_back(std::max(interp(c_f), 0.0));
    }
    double s = 0.0;
    for (std::size_t i = 1; i < k.size(); ++i)
        s += 0.5 * (weight(k[i - 1]) * v[i - 1] + weight(k[i]) * v[i]) * (k[i] - k[i - 1]);
    return s;
}

inline void moments_from(const PriceCurve& curve, double c_f_pa, double fp0_bps, MomentReport& out,
                         bool diagnostics) {
    const double cf = c_f_pa * 1e4;  // work in bps
    std::vector<double> k_bps(curve.strikes.size());
    for (std::size_t i = 0; i < k_bps.size(); ++i) k_bps[i] = curve.strikes[i] * 1e4;
    auto I = [&](int pw) {
        auto w = [&](double k) { return std::pow(k - cf, pw); };
        return wing_integral(k_bps, curve.payer_prices, cf, true, w) +
               wing_integral(k_bps, curve.receiver_prices, cf, false, w);
    };
    const double i0 = I(0), i1 = I(1), i2 = I(2);
    const double mu2 = 2.0 * cf / fp0_bps * i0;
    if (!(mu2 > 0.0)) throw extraction_error("implied_moments: nonpositive variance");
    out.mu2 = mu2;
    out.mu3 = 6.0 * cf / (std::pow(mu2, 1.5) * fp0_bps) * i1;
    out.mu4 = 12.0 * cf / (mu2 * mu2 * fp0_bps) * i2;
    out.mu4_display_norm = 12.0 * cf / (std::pow(mu2, 4.0) * fp0_bps) * i2;
    if (diagnostics && curve.strikes.size() > 3) {
        PriceCurve trimmed;
        trimmed.strikes.assign(curve.strikes.begin() + 1, curve.strikes.end() - 1);
        trimmed.receiver_prices.assign(curve.receiver_prices.begin() + 1,
                                       curve.receiver_prices.end() - 1);
        trimmed.payer_prices.assign(curve.payer_prices.begin() + 1, curve.payer_prices.end() - 1);
        MomentReport inner;
        moments_from(trimmed, c_f_pa, fp0_bps, inner, false);
        out.mu2_drop_outer = inner.mu2;
        out.mu3_drop_outer = inner.mu3;
        out.mu4_drop_outer = inner.mu4;
    }
}

}  // namespace detail

// Variance / skewness / kurtosis of the spread under the annuity measure,
// from the quoted strike grid with zero extension beyond the last quote.
inline MomentReport implied_moments(const PriceCurve& curve, double c_f, double annuity) {
    curve.validate(1e-3);
    if (!(c_f > curve.strikes.front() && c_f < curve.strikes.back()))
        throw extraction_error("implied_moments: c_f outside the quoted strike range");
    MomentReport out;
    out.c_f = c_f;
    out.annuity = annuity;
    const double fp0_bps = annuity * c_f * 1e4;  // f_p(0,0) = E[A_0] c_f, in bps
    detail::moments_from(curve, c_f, fp0_bps, out, true);
    return out;
}

inline MomentReport implied_moments(const PriceCurve& curve) {
    const double cf = forward_spread(curve);
    return implied_moments(curve, cf, annuity_estimate(curve, cf));
}

}  // namespace cdxou
