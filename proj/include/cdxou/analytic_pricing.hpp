#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "cdxou/math.hpp"
#include "cdxou/ou_process.hpp"

namespace cdxou {

// Premium schedule of a (forward-start) index swap. t0 is the inception of
// the underlying swap; for swaptions it is also the option expiry.
struct TenorStructure {
    double t0 = 15.0 / 252.0;
    std::vector<double> payments;  // T_1 < ... < T_M
    double delta = 0.6;            // loss given default
    int n_names = 125;
    double strike = 0.0060;        // spread kappa, per annum

    // Semiannual schedule of `years` length starting at inception.
    static TenorStructure semiannual(double t0, double years, double delta, int n_names,
                                     double strike) {
        TenorStructure ts;
        ts.t0 = t0;
        ts.delta = delta;
        ts.n_names = n_names;
        ts.strike = strike;
        const int m = static_cast<int>(std::lround(2.0 * years));
        for (int i = 1; i <= m; ++i) ts.payments.push_back(t0 + 0.5 * i);
        ts.validate();
        return ts;
    }

    void validate() const {
        if (t0 < 0.0) throw std::invalid_argument("TenorStructure: t0 must be nonnegative");
        if (payments.empty()) throw std::invalid_argument("TenorStructure: empty payment schedule");
        double prev = t0;
        for (double T : payments) {
            if (!(T > prev)) throw std::invalid_argument("TenorStructure: payments must ascend from t0");
            prev = T;
        }
        if (delta < 0.0 || delta > 1.0)
            throw std::invalid_argument("TenorStructure: delta must lie in [0,1]");
        if (n_names < 1) throw std::invalid_argument("TenorStructure: pool size must be positive");
    }

    double maturity() const { return payments.back(); }
    double accrual(std::size_t ell) const {  // T_ell - T_{ell-1}, ell in [0, M)
        return payments[ell] - (ell == 0 ? t0 : payments[ell - 1]);
    }
};

// Per-period building blocks g_ell, h_ell and the derived legs.
struct LegValues {
    std::vector<double> g, h;
    std::vector<double> accruals;
    double delta = 0.0;

    double annuity() const {
        double a = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i) a += accruals[i] * h[i];
        return a;
    }
    double protection() const {
        const double gs = std::accumulate(g.begin(), g.end(), 0.0);
        const double hs = std::accumulate(h.begin(), h.end(), 0.0);
        return delta * (gs - hs);
    }
};

namespace detail {

// int_a^b -gamma_r log(1 + psi_r(u)/c_r) du with psi from the given loadings,
// one 64-point panel per call; callers split at payment dates.
inline double rate_jump_integral(const ModelParams& p, double a, double b, double T,
                                 const LoadingCoeffs& c) {
    if (b <= a) return 0.0;
    return quad::gauss_legendre_64(
        [&](double u) { return gamma_laplace_exponent(p.rate, psi_r(p, u, T, c)); }, a, b);
}

inline double intensity_jump_integral(const ModelParams& p, double a, double b, double T,
                                      const LoadingCoeffs& c) {
    if (b <= a) return 0.0;
    return quad::gauss_legendre_64(
        [&](double u) { return double_gamma_laplace_exponent(p.intensity, psi_lambda(p, u, T, c)); },
        a, b);
}

// Same integrals split at the payment dates lying inside [a, b].
inline double jump_integrals_split(const ModelParams& p, double a, double b, double T,
                                   const LoadingCoeffs& c, const std::vector<double>& knots) {
    double total = 0.0, left = a;
    for (double k : knots) {
        if (k <= left || k >= b) continue;
        total += rate_jump_integral(p, left, k, T, c) + intensity_jump_integral(p, left, k, T, c);
        left = k;
    }
    total += rate_jump_integral(p, left, b, T, c) + intensity_jump_integral(p, left, b, T, c);
    return total;
}

inline double decay_loading(double theta, double dt) { return (1.0 - std::exp(-theta * dt)) / theta; }

}  // namespace detail

// Default-free zero coupon bond P(t, T) given r_t.
inline double zcb_price(const ModelParams& p, double t, double T, double r_t,
                        const QuadraturePolicy& = {}) {
    p.validate();
    if (t > T) throw std::invalid_argument("zcb_price: t must not exceed T");
    if (t == T) return 1.0;
    const LoadingCoeffs c{1.0, 0.0, 0.0, 0.0};
    const double jump = detail::rate_jump_integral(p, t, T, T, c);
    return std::exp(-r_t * detail::decay_loading(p.theta_r, T - t) + jump);
}

// E[ e^{-int_t^{T0} r} E[ e^{-int_{T0}^{T_ell} (r+lambda)} | F_{T0} ] | F_t ]:
// discounted survival-to-T_ell block of a forward-start swap, t <= T0.
inline double h_leg(const ModelParams& p, double t, double r_t, double lambda_t, double T0,
                    double T_ell, const QuadraturePolicy& = {},
                    const std::vector<double>& knots = {}) {
    p.validate();
    if (!(t <= T0 && T0 <= T_ell)) throw std::invalid_argument("h_leg: need t <= T0 <= T_ell");
    const double b3 = detail::decay_loading(p.theta_r, T_ell - T0);
    const double b4 = detail::decay_loading(p.theta_lambda, T_ell - T0);
    const LoadingCoeffs outer{1.0, 0.0, b3, b4};
    const LoadingCoeffs inner{1.0, 1.0, 0.0, 0.0};
    double log_h = -xi_r(p, T0 - t, r_t, 1.0, b3) - xi_lambda(p, T0 - t, lambda_t, 0.0, b4);
    log_h += detail::rate_jump_integral(p, t, T0, T0, outer) +
             detail::intensity_jump_integral(p, t, T0, T0, outer);
    log_h += detail::jump_integrals_split(p, T0, T_ell, T_ell, inner, knots);
    return std::exp(log_h);
}

// E[ e^{-int_t^{T0} r} E[ e^{-int_{T0}^{T_{ell-1}} (r+lambda)} P(T_{ell-1}, T_ell) | F_{T0} ] | F_t ]:
// discounted survival-to-T_{ell-1} block, t <= T0 <= T_{ell-1} <= T_ell.
inline double g_leg(const ModelParams& p, double t, double r_t, double lambda_t, double T0,
                    double T_prev, double T_ell, const QuadraturePolicy& = {},
                    const std::vector<double>& knots = {}) {
    p.validate();
    if (!(t <= T0 && T0 <= T_prev && T_prev <= T_ell))
        throw std::invalid_argument("g_leg: need t <= T0 <= T_{ell-1} <= T_ell");
    const double zeta = detail::decay_loading(p.theta_r, T_ell - T_prev);
    const double a3 = detail::decay_loading(p.theta_r, T_prev - T0) +
                      zeta * std::exp(-p.theta_r * (T_prev - T0));
    const double a4 = detail::decay_loading(p.theta_lambda, T_prev - T0);
    const LoadingCoeffs outer{1.0, 0.0, a3, a4};
    const LoadingCoeffs mid{1.0, 1.0, zeta, 0.0};
    const LoadingCoeffs zcb_loading{1.0, 0.0, 0.0, 0.0};
    double log_g = -xi_r(p, T0 - t, r_t, 1.0, a3) - xi_lambda(p, T0 - t, lambda_t, 0.0, a4);
    log_g += detail::rate_jump_integral(p, t, T0, T0, outer) +
             detail::intensity_jump_integral(p, t, T0, T0, outer);
    log_g += detail::jump_integrals_split(p, T0, T_prev, T_prev, mid, knots);
    log_g += detail::rate_jump_integral(p, T_prev, T_ell, T_ell, zcb_loading);
    return std::exp(log_g);
}

// Spot-survival variants: survival indicators counted from t itself (used by
// the front-end-protection price). On {tau > t}:
//   H_spot = E[e^{-int_t^{T_ell} r} 1{tau > T_ell} | F_t] / 1{tau > t}.
inline double h_leg_spot(const ModelParams& p, double t, double r_t, double lambda_t, double T_ell,
                         const QuadraturePolicy& = {}, const std::vector<double>& knots = {}) {
    p.validate();
    if (!(t <= T_ell)) throw std::invalid_argument("h_leg_spot: need t <= T_ell");
    const LoadingCoeffs c{1.0, 1.0, 0.0, 0.0};
    double lg = -xi_r(p, T_ell - t, r_t, 1.0, 0.0) - xi_lambda(p, T_ell - t, lambda_t, 1.0, 0.0);
    lg += detail::jump_integrals_split(p, t, T_ell, T_ell, c, knots);
    return std::exp(lg);
}

inline double g_leg_spot(const ModelParams& p, double t, double r_t, double lambda_t, double T_prev,
                         double T_ell, const QuadraturePolicy& = {},
                         const std::vector<double>& knots = {}) {
    p.validate();
    if (!(t <= T_prev && T_prev <= T_ell))
        throw std::invalid_argument("g_leg_spot: need t <= T_{ell-1} <= T_ell");
    const double zeta = detail::decay_loading(p.theta_r, T_ell - T_prev);
    const LoadingCoeffs mid{1.0, 1.0, zeta, 0.0};
    const LoadingCoeffs zcb_loading{1.0, 0.0, 0.0, 0.0};
    double lg = -xi_r(p, T_prev - t, r_t, 1.0, zeta) - xi_lambda(p, T_prev - t, lambda_t, 1.0, 0.0);
    lg += detail::jump_integrals_split(p, t, T_prev, T_prev, mid, knots);
    lg += detail::rate_jump_integral(p, T_prev, T_ell, T_ell, zcb_loading);
    return std::exp(lg);
}

// All g/h blocks of a tenor structure seen from (t, r, lambda), t <= T0.
inline LegValues forward_legs(const ModelParams& p, const TenorStructure& tenor, double t, double r,
                              double lambda, const QuadraturePolicy& policy = {}) {
    tenor.validate();
    if (t > tenor.t0) throw std::invalid_argument("forward_legs: t must not exceed inception");
    LegValues legs;
    legs.delta = tenor.delta;
    const std::size_t m = tenor.payments.size();
    for (std::size_t ell = 0; ell < m; ++ell) {
        const double T_prev = (ell == 0) ? tenor.t0 : tenor.payments[ell - 1];
        const double T_ell = tenor.payments[ell];
        legs.g.push_back(g_leg(p, t, r, lambda, tenor.t0, T_prev, T_ell, policy, tenor.payments));
        legs.h.push_back(h_leg(p, t, r, lambda, tenor.t0, T_ell, policy, tenor.payments));
        legs.accruals.push_back(tenor.accrual(ell));
    }
    return legs;
}

// At inception (t = T0) every block is exp(A - Br * r - Bl * lambda);
// precomputing the coefficients makes payoff lattices and per-path payoff
// evaluation cheap.
struct InceptionLegCoeffs {
    std::vector<double> g_const, g_r, g_lambda;
    std::vector<double> h_const, h_r, h_lambda;
    std::vector<double> accruals;
    double delta = 0.0;
    double strike = 0.0;

    double h_ell(std::size_t ell, double r, double lambda) const {
        return std::exp(h_const[ell] - h_r[ell] * r - h_lambda[ell] * lambda);
    }
    double g_ell(std::size_t ell, double r, double lambda) const {
        return std::exp(g_const[ell] - g_r[ell] * r - g_lambda[ell] * lambda);
    }
    double annuity(double r, double lambda) const {
        double a = 0.0;
        for (std::size_t i = 0; i < h_const.size(); ++i) a += accruals[i] * h_ell(i, r, lambda);
        return a;
    }
    double protection(double r, double lambda) const {
        double d = 0.0;
        for (std::size_t i = 0; i < g_const.size(); ++i)
            d += g_ell(i, r, lambda) - h_ell(i, r, lambda);
        return delta * d;
    }
    // Value of the forward-start swap to the protection buyer at inception.
    double forward_value(double r, double lambda) const {
        return protection(r, lambda) - strike * annuity(r, lambda);
    }
    double spread(double r, double lambda) const {
        const double a = annuity(r, lambda);
        if (!(a > 0.0)) throw degenerate_annuity_error("InceptionLegCoeffs: annuity vanished");
        return protection(r, lambda) / a;
    }
};

inline InceptionLegCoeffs make_inception_coeffs(const ModelParams& p, const TenorStructure& tenor,
                                                const QuadraturePolicy& = {}) {
    p.validate();
    tenor.validate();
    InceptionLegCoeffs c;
    c.delta = tenor.delta;
    c.strike = tenor.strike;
    const double T0 = tenor.t0;
    const std::size_t m = tenor.payments.size();
    for (std::size_t ell = 0; ell < m; ++ell) {
        const double T_prev = (ell == 0) ? T0 : tenor.payments[ell - 1];
        const double T_ell = tenor.payments[ell];
        // h block.
        const double b3 = detail::decay_loading(p.theta_r, T_ell - T0);
        const double b4 = detail::decay_loading(p.theta_lambda, T_ell - T0);
        const LoadingCoeffs inner{1.0, 1.0, 0.0, 0.0};
        c.h_r.push_back(b3);
        c.h_lambda.push_back(b4);
        c.h_const.push_back(detail::jump_integrals_split(p, T0, T_ell, T_ell, inner, tenor.payments));
        // g block.
        const double zeta = detail::decay_loading(p.theta_r, T_ell - T_prev);
        const double a3 = detail::decay_loading(p.theta_r, T_prev - T0) +
                          zeta * std::exp(-p.theta_r * (T_prev - T0));
        const double a4 = detail::decay_loading(p.theta_lambda, T_prev - T0);
        const LoadingCoeffs mid{1.0, 1.0, zeta, 0.0};
        const LoadingCoeffs zcb_loading{1.0, 0.0, 0.0, 0.0};
        c.g_r.push_back(a3);
        c.g_lambda.push_back(a4);
        c.g_const.push_back(detail::jump_integrals_split(p, T0, T_prev, T_prev, mid, tenor.payments) +
                            detail::rate_jump_integral(p, T_prev, T_ell, T_ell, zcb_loading));
        c.accruals.push_back(tenor.accrual(ell));
    }
    return c;
}

// Par spread delta (g - h) / annuity at (t, r, lambda), t <= T0.
inline double cdx_spread(const ModelParams& p, const TenorStructure& tenor, double t, double r,
                         double lambda, const QuadraturePolicy& policy = {}) {
    const LegValues legs = forward_legs(p, tenor, t, r, lambda, policy);
    const double a = legs.annuity();
    if (!(a > 0.0)) throw degenerate_annuity_error("cdx_spread: annuity vanished");
    return legs.protection() / a;
}

// Discounted expected loss paid at inception for defaults in (t, T0].
inline double front_end_protection(const ModelParams& p, const TenorStructure& tenor, double t,
                                   double r, double lambda, const QuadraturePolicy& policy = {}) {
    const double survival = h_leg_spot(p, t, r, lambda, tenor.t0, policy);
    return tenor.delta * (zcb_price(p, t, tenor.t0, r, policy) - survival);
}

// Value to the protection buyer of the forward-start CDX at t <= T0.
// Without FEP: defaults before inception are assumed away (two-stage legs).
// With FEP: survival is counted from t and the front-end loss is added.
inline double forward_cdx_value(const ModelParams& p, const TenorStructure& tenor, double t,
                                double r, double lambda, bool include_fep,
                                const QuadraturePolicy& policy = {}) {
    tenor.validate();
    if (!include_fep) {
        const LegValues legs = forward_legs(p, tenor, t, r, lambda, policy);
        return legs.protection() - tenor.strike * legs.annuity();
    }
    double prot = 0.0, annuity = 0.0;
    for (std::size_t ell = 0; ell < tenor.payments.size(); ++ell) {
        const double T_prev = (ell == 0) ? tenor.t0 : tenor.payments[ell - 1];
        const double T_ell = tenor.payments[ell];
        const double gs = g_leg_spot(p, t, r, lambda, T_prev, T_ell, policy, tenor.payments);
        const double hs = h_leg_spot(p, t, r, lambda, T_ell, policy, tenor.payments);
        prot += tenor.delta * (gs - hs);
        annuity += tenor.accrual(ell) * hs;
    }
    return prot - tenor.strike * annuity + front_end_protection(p, tenor, t, r, lambda, policy);
}

enum class OptionSide { receiver, payer };

// Option payoff at inception: receiver pays when the strike exceeds the
// realized par spread, payer mirrors it.
inline double cdxo_terminal_payoff(const InceptionLegCoeffs& legs, double r, double lambda,
                                   OptionSide side) {
    const double premium = legs.strike * legs.annuity(r, lambda);
    const double prot = legs.protection(r, lambda);
    const double v = (side == OptionSide::receiver) ? premium - prot : prot - premium;
    return std::max(v, 0.0);
}

inline double cdxo_terminal_payoff(const ModelParams& p, const TenorStructure& tenor, double r,
                                   double lambda, OptionSide side,
                                   const QuadraturePolicy& policy = {}) {
    return cdxo_terminal_payoff(make_inception_coeffs(p, tenor, policy), r, lambda, side);
}

// Back out lambda_0 from the strike at which the forward contract is worth
// zero (the put-call-parity strike). Bracketed on [0, 1].
inline double implied_lambda0(const ModelParams& p, const TenorStructure& tenor, double r0,
                              double parity_strike, const QuadraturePolicy& policy = {}) {
    TenorStructure ts = tenor;
    ts.strike = parity_strike;
    auto f = [&](double lam) { return forward_cdx_value(p, ts, 0.0, r0, lam, false, policy); };
    return find_root(f, 0.0, 1.0, 1e-10);
}

}  // namespace cdxou
