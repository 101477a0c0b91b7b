#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "cdxou/analytic_pricing.hpp"
#include "cdxou/monte_carlo.hpp"
#include "cdxou/pide.hpp"

namespace cdxou {

enum class QuoteSide { receiver, payer };

struct Quote {
    double maturity = 0.0;    // option expiry, years
    double strike_bps = 0.0;  // strike spread, bps
    QuoteSide side = QuoteSide::receiver;
    double bid = 0.0, ask = 0.0, mid = 0.0;  // bps
};

struct CurvePoint {
    double tenor = 0.0;  // years
    double yield = 0.0;  // continuously compounded, per annum
};

struct QuoteSurface {
    std::vector<Quote> quotes;
    std::vector<CurvePoint> curve_points;

    void validate() const {
        for (const auto& q : quotes)
            if (!(q.bid <= q.mid && q.mid <= q.ask))
                throw std::invalid_argument("QuoteSurface: requires bid <= mid <= ask");
        for (const auto& c : curve_points)
            if (!(c.tenor > 0.0)) throw std::invalid_argument("QuoteSurface: tenors must be positive");
    }

    std::vector<double> maturities() const {
        std::vector<double> out;
        for (const auto& q : quotes)
            if (std::find_if(out.begin(), out.end(), [&](double m) {
                    return std::abs(m - q.maturity) < 1e-9;
                }) == out.end())
                out.push_back(q.maturity);
        std::sort(out.begin(), out.end());
        return out;
    }
};

struct CalibrationResult {
    ModelParams params;
    double objective = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
    std::vector<double> residuals;  // model - mid, bps, per used quote
};

namespace detail {

// Logistic box transform: the optimizer works on the whole real line, the
// model sees parameters strictly inside (lo, hi).
struct BoxTransform {
    std::vector<double> lo, hi;

    double to_model(double z, std::size_t i) const {
        return lo[i] + (hi[i] - lo[i]) / (1.0 + std::exp(-z));
    }
    double to_opt(double p, std::size_t i) const {
        const double w = std::clamp((p - lo[i]) / (hi[i] - lo[i]), 1e-12, 1.0 - 1e-12);
        return std::log(w / (1.0 - w));
    }
};

struct NelderMeadOptions {
    int max_iter = 500;
    double diameter_tol = 1e-6;
    double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
    double initial_step = 0.25;
};

struct NelderMeadResult {
    std::vector<double> x;
    double fx = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

// Standard reflect/expand/contract/shrink simplex search with best-so-far
// tracking (the best vertex value never increases).
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, const NelderMeadOptions& opt = {}) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> xs(n + 1, x0);
    std::vector<double> fs(n + 1);
    for (std::size_t i = 0; i < n; ++i) xs[i + 1][i] += opt.initial_step;
    for (std::size_t i = 0; i <= n; ++i) fs[i] = f(xs[i]);

    NelderMeadResult res;
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        // order
        std::vector<std::size_t> ord(n + 1);
        for (std::size_t i = 0; i <= n; ++i) ord[i] = i;
        std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
        std::vector<std::vector<double>> xs2;
        std::vector<double> fs2;
        for (std::size_t i = 0; i <= n; ++i) {
            xs2.push_back(xs[ord[i]]);
            fs2.push_back(fs[ord[i]]);
        }
        xs = std::move(xs2);
        fs = std::move(fs2);

        double diam = 0.0;
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t d = 0; d < n; ++d) diam = std::max(diam, std::abs(xs[i][d] - xs[0][d]));
        if (diam < opt.diameter_tol) {
            res.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t d = 0; d < n; ++d) centroid[d] += xs[i][d] / n;

        auto blend = [&](double t) {
            std::vector<double> x(n);
            for (std::size_t d = 0; d < n; ++d) x[d] = centroid[d] + t * (centroid[d] - xs[n][d]);
            return x;
        };
        const std::vector<double> xr = blend(opt.alpha);
        const double fr = f(xr);
        if (fr < fs[0]) {
            const std::vector<double> xe = blend(opt.gamma);
            const double fe = f(xe);
            if (fe < fr) {
                xs[n] = xe;
                fs[n] = fe;
            } else {
                xs[n] = xr;
                fs[n] = fr;
            }
        } else if (fr < fs[n - 1]) {
            xs[n] = xr;
            fs[n] = fr;
        } else {
            const std::vector<double> xc = blend(fr < fs[n] ? opt.rho : -opt.rho);
            const double fc = f(xc);
            if (fc < std::min(fr, fs[n])) {
                xs[n] = xc;
                fs[n] = fc;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t d = 0; d < n; ++d)
                        xs[i][d] = xs[0][d] + opt.sigma * (xs[i][d] - xs[0][d]);
                    fs[i] = f(xs[i]);
                }
            }
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i <= n; ++i)
        if (fs[i] < fs[best]) best = i;
    res.x = xs[best];
    res.fx = fs[best];
    res.iterations = it;
    return res;
}

}  // namespace detail

// Fit (r0, theta_r, c_r, gamma_r) to continuously compounded yields by
// least squares on model ZCB-implied yields.
inline CalibrationResult calibrate_rate(const std::vector<CurvePoint>& curve,
                                        const ModelParams& initial,
                                        const detail::NelderMeadOptions& opt = {}) {
    if (curve.size() < 3) throw std::invalid_argument("calibrate_rate: need >= 3 curve points");
    detail::BoxTransform box;
    box.lo = {1e-4, 1e-3, 1e-3, 1e-3};    // r0, theta_r, c_r, gamma_r
    box.hi = {0.25, 10.0, 1e3, 1e3};
    std::vector<double> z = {box.to_opt(initial.r0, 0), box.to_opt(initial.theta_r, 1),
                             box.to_opt(initial.rate.c, 2), box.to_opt(initial.rate.gamma, 3)};
    auto apply = [&](const std::vector<double>& x) {
        ModelParams p = initial;
        p.r0 = box.to_model(x[0], 0);
        p.theta_r = box.to_model(x[1], 1);
        p.rate.c = box.to_model(x[2], 2);
        p.rate.gamma = box.to_model(x[3], 3);
        return p;
    };
    auto objective = [&](const std::vector<double>& x) {
        const ModelParams p = apply(x);
        double s = 0.0;
        for (const auto& cp : curve) {
            const double y = -std::log(zcb_price(p, 0.0, cp.tenor, p.r0)) / cp.tenor;
            s += (y - cp.yield) * (y - cp.yield);
        }
        return s;
    };
    const auto nm = detail::nelder_mead(objective, z, opt);
    CalibrationResult out;
    out.params = apply(nm.x);
    out.objective = nm.fx;
    out.iterations = nm.iterations;
    out.converged = nm.converged;
    for (const auto& cp : curve) {
        const double y = -std::log(zcb_price(out.params, 0.0, cp.tenor, out.params.r0)) / cp.tenor;
        out.residuals.push_back((y - cp.yield) * 1e4);
    }
    return out;
}

enum class PricingEngine { mc, pide };
enum class Lambda0Mode { joint, parity };

struct IntensityCalibrationConfig {
    PricingEngine engine = PricingEngine::mc;
    Lambda0Mode lambda0_mode = Lambda0Mode::joint;
    double underlying_years = 5.0;
    double delta = 0.6;
    int n_names = 125;
    double spot_spread_bps = 0.0;  // 0: use the strike closest to par via quotes
    double otm_band = 0.30;
    std::size_t mc_paths = 20000;
    std::uint64_t seed = 20200102;
    GridSpec pide_grid{};  // used when engine == pide
    detail::NelderMeadOptions nm{};
};

namespace detail {

// Prices in bps for all quotes of one maturity. The MC engine shares one
// terminal path set across the strikes (common random numbers).
inline std::vector<double> price_quotes(const ModelParams& p, const std::vector<Quote>& quotes,
                                        const IntensityCalibrationConfig& cfg) {
    std::vector<double> out(quotes.size());
    const double maturity = quotes.front().maturity;
    TenorStructure tenor =
        TenorStructure::semiannual(maturity, cfg.underlying_years, cfg.delta, cfg.n_names, 0.0);
    if (cfg.engine == PricingEngine::mc) {
        const InceptionLegCoeffs legs = make_inception_coeffs(p, tenor);
        const TerminalSample s = simulate_terminals(p, tenor.t0, default_steps_to(tenor.t0),
                                                    cfg.mc_paths, cfg.seed);
        const std::size_t n = cfg.mc_paths;
        std::vector<double> disc_annuity(n), spread(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double a = legs.annuity(s.r[i], s.lambda[i]);
            disc_annuity[i] = std::exp(-s.yr[i]) * a;
            spread[i] = legs.protection(s.r[i], s.lambda[i]) / a;
        }
        for (std::size_t q = 0; q < quotes.size(); ++q) {
            const double k = quotes[q].strike_bps * 1e-4;
            double acc = 0.0;
            if (quotes[q].side == QuoteSide::receiver)
                for (std::size_t i = 0; i < n; ++i) acc += disc_annuity[i] * std::max(k - spread[i], 0.0);
            else
                for (std::size_t i = 0; i < n; ++i) acc += disc_annuity[i] * std::max(spread[i] - k, 0.0);
            out[q] = acc / n * 1e4;
        }
        return out;
    }
    for (std::size_t q = 0; q < quotes.size(); ++q) {
        tenor.strike = quotes[q].strike_bps * 1e-4;
        const OptionSide side =
            (quotes[q].side == QuoteSide::receiver) ? OptionSide::receiver : OptionSide::payer;
        GridSpec grid = cfg.pide_grid;
        grid.seed = cfg.seed;
        const InceptionLegCoeffs legs = make_inception_coeffs(p, tenor);
        const FDSolution sol = solve_pide(
            p, [&](double r, double l) { return cdxo_terminal_payoff(legs, r, l, side); }, tenor.t0,
            grid);
        out[q] = sol.extract(0.0, p.r0, p.lambda0) * 1e4;
    }
    return out;
}

inline double price_quote(const ModelParams& p, const Quote& q,
                          const IntensityCalibrationConfig& cfg) {
    return price_quotes(p, {q}, cfg).front();
}

}  // namespace detail

// Per-maturity fit of (theta_lambda, rho, c_lambda, gamma_lambda, c_tau,
// gamma_tau[, lambda0]) to OTM mid quotes of one expiry, squared error in
// bps. Rate parameters are held fixed.
inline CalibrationResult calibrate_intensity(const std::vector<Quote>& maturity_quotes,
                                             const ModelParams& initial,
                                             const IntensityCalibrationConfig& cfg = {}) {
    // OTM filter relative to the spot spread.
    double spot = cfg.spot_spread_bps;
    if (spot <= 0.0) {
        const TenorStructure tenor = TenorStructure::semiannual(
            maturity_quotes.front().maturity, cfg.underlying_years, cfg.delta, cfg.n_names, 0.0);
        spot = cdx_spread(initial, tenor, 0.0, initial.r0, initial.lambda0) * 1e4;
    }
    std::vector<Quote> used;
    for (const auto& q : maturity_quotes) {
        const bool otm = (q.side == QuoteSide::receiver) ? q.strike_bps < spot : q.strike_bps > spot;
        if (otm && std::abs(q.strike_bps / spot - 1.0) <= cfg.otm_band + 1e-12) used.push_back(q);
    }
    if (used.size() < 4)
        throw std::invalid_argument("calibrate_intensity: need >= 4 OTM quotes for the maturity");

    const bool joint_lambda0 = cfg.lambda0_mode == Lambda0Mode::joint;
    detail::BoxTransform box;
    box.lo = {1e-3, 1e-6, 1e-3, 1e-3, 1e-3, 1e-3};
    box.hi = {10.0, 5.0, 1e3, 1e3, 1e3, 1e3};
    if (joint_lambda0) {
        box.lo.push_back(0.0);
        box.hi.push_back(0.25);
    }
    std::vector<double> z = {
        box.to_opt(initial.theta_lambda, 0),          box.to_opt(std::max(initial.rho, 1e-5), 1),
        box.to_opt(initial.intensity.inner.c, 2),     box.to_opt(initial.intensity.inner.gamma, 3),
        box.to_opt(initial.intensity.subordinator.c, 4),
        box.to_opt(initial.intensity.subordinator.gamma, 5)};
    if (joint_lambda0) z.push_back(box.to_opt(std::max(initial.lambda0, 1e-6), 6));

    auto apply = [&](const std::vector<double>& x) {
        ModelParams p = initial;
        p.theta_lambda = box.to_model(x[0], 0);
        p.rho = box.to_model(x[1], 1);
        p.intensity.inner.c = box.to_model(x[2], 2);
        p.intensity.inner.gamma = box.to_model(x[3], 3);
        p.intensity.subordinator.c = box.to_model(x[4], 4);
        p.intensity.subordinator.gamma = box.to_model(x[5], 5);
        if (joint_lambda0) p.lambda0 = box.to_model(x[6], 6);
        return p;
    };
    auto objective = [&](const std::vector<double>& x) {
        ModelParams p = apply(x);
        try {
            if (!joint_lambda0) {
                const TenorStructure tenor =
                    TenorStructure::semiannual(used.front().maturity, cfg.underlying_years,
                                               cfg.delta, cfg.n_names, 0.0);
                p.lambda0 = implied_lambda0(p, tenor, p.r0, spot * 1e-4);
            }
            const std::vector<double> prices = detail::price_quotes(p, used, cfg);
            double s = 0.0;
            for (std::size_t i = 0; i < used.size(); ++i) {
                const double e = prices[i] - used[i].mid;
                s += e * e;
            }
            return s;
        } catch (const std::exception&) {
            return 1e12;  // reject pathological vertices
        }
    };

    const auto nm = detail::nelder_mead(objective, z, cfg.nm);
    CalibrationResult out;
    out.params = apply(nm.x);
    if (!joint_lambda0) {
        const TenorStructure tenor = TenorStructure::semiannual(
            used.front().maturity, cfg.underlying_years, cfg.delta, cfg.n_names, 0.0);
        out.params.lambda0 = implied_lambda0(out.params, tenor, out.params.r0, spot * 1e-4);
    }
    out.objective = nm.fx;
    out.iterations = nm.iterations;
    out.converged = nm.converged;
    const std::vector<double> fitted = detail::price_quotes(out.params, used, cfg);
    for (std::size_t i = 0; i < used.size(); ++i) out.residuals.push_back(fitted[i] - used[i].mid);
    return out;
}

}  // namespace cdxou
