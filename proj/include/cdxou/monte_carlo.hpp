#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

#include "cdxou/analytic_pricing.hpp"
#include "cdxou/math.hpp"
#include "cdxou/ou_process.hpp"
#include "cdxou/random.hpp"

namespace cdxou {

// Simulated paths of (r, lambda) and their running integrals (Y^r, Y^lambda)
// on a uniform grid. Values are stored path-major.
struct PathSet {
    std::vector<double> times;  // steps + 1 entries, times[0] = 0
    std::size_t n_paths = 0;
    std::vector<double> r, lambda, int_r, int_lambda;  // n_paths x times.size()

    double at(const std::vector<double>& field, std::size_t path, std::size_t step) const {
        return field[path * times.size() + step];
    }
    double r_at(std::size_t path, std::size_t step) const { return at(r, path, step); }
    double lambda_at(std::size_t path, std::size_t step) const { return at(lambda, path, step); }
    double int_r_at(std::size_t path, std::size_t step) const { return at(int_r, path, step); }
    double int_lambda_at(std::size_t path, std::size_t step) const { return at(int_lambda, path, step); }
};

namespace detail {

struct McState {
    double r, lambda, yr, yl;
};

// One exact-decay Euler step of size h: decay the state, accumulate the
// integral by trapezoid of the decayed segment, then add the jumps at the
// end of the step.
inline void mc_step(const ModelParams& p, McState& s, double h, RandomSource& rng) {
    const double er = std::exp(-p.theta_r * h), el = std::exp(-p.theta_lambda * h);
    s.yr += 0.5 * h * (s.r + s.r * er);
    s.yl += 0.5 * h * (s.lambda + s.lambda * el);
    const double jr = sample_gamma_increment(p.rate, h, rng);
    const double jl = sample_double_gamma_increment(p.intensity, h, rng);
    s.r = s.r * er + jr;
    s.lambda = s.lambda * el + p.rho * jr + jl;
}

inline std::size_t default_blocks() { return 16; }

}  // namespace detail

inline PathSet simulate_paths(const ModelParams& p, double T, int steps, std::size_t n_paths,
                              RandomSource& rng) {
    p.validate();
    if (steps < 1) throw std::invalid_argument("simulate_paths: steps must be >= 1");
    if (!(T > 0.0)) throw std::invalid_argument("simulate_paths: T must be positive");
    PathSet ps;
    ps.n_paths = n_paths;
    ps.times.resize(steps + 1);
    const double h = T / steps;
    for (int j = 0; j <= steps; ++j) ps.times[j] = h * j;
    const std::size_t stride = ps.times.size();
    ps.r.resize(n_paths * stride);
    ps.lambda.resize(n_paths * stride);
    ps.int_r.resize(n_paths * stride);
    ps.int_lambda.resize(n_paths * stride);
    for (std::size_t i = 0; i < n_paths; ++i) {
        detail::McState s{p.r0, p.lambda0, 0.0, 0.0};
        ps.r[i * stride] = s.r;
        ps.lambda[i * stride] = s.lambda;
        ps.int_r[i * stride] = 0.0;
        ps.int_lambda[i * stride] = 0.0;
        for (int j = 1; j <= steps; ++j) {
            detail::mc_step(p, s, h, rng);
            ps.r[i * stride + j] = s.r;
            ps.lambda[i * stride + j] = s.lambda;
            ps.int_r[i * stride + j] = s.yr;
            ps.int_lambda[i * stride + j] = s.yl;
        }
    }
    return ps;
}

// Terminal-state sample (r_T, lambda_T, Y^r_T, Y^lambda_T) produced without
// storing whole paths; the workhorse for pricing. Work is split into fixed
// blocks with derived sub-seeds so results are independent of the thread
// count.
struct TerminalSample {
    std::vector<double> r, lambda, yr, yl;
};

inline TerminalSample simulate_terminals(const ModelParams& p, double T, int steps,
                                         std::size_t n_paths, std::uint64_t seed,
                                         unsigned n_threads = 0) {
    p.validate();
    if (steps < 1) throw std::invalid_argument("simulate_terminals: steps must be >= 1");
    TerminalSample out;
    out.r.resize(n_paths);
    out.lambda.resize(n_paths);
    out.yr.resize(n_paths);
    out.yl.resize(n_paths);
    const std::size_t blocks = detail::default_blocks();
    const double h = T / steps;
    auto run_block = [&](std::size_t b) {
        RandomSource rng = RandomSource::substream(seed, b);
        const std::size_t lo = n_paths * b / blocks, hi = n_paths * (b + 1) / blocks;
        for (std::size_t i = lo; i < hi; ++i) {
            detail::McState s{p.r0, p.lambda0, 0.0, 0.0};
            for (int j = 0; j < steps; ++j) detail::mc_step(p, s, h, rng);
            out.r[i] = s.r;
            out.lambda[i] = s.lambda;
            out.yr[i] = s.yr;
            out.yl[i] = s.yl;
        }
    };
    unsigned hw = n_threads ? n_threads : std::max(1u, std::thread::hardware_concurrency());
    hw = std::min<unsigned>(hw, blocks);
    if (hw <= 1) {
        for (std::size_t b = 0; b < blocks; ++b) run_block(b);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < hw; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t b = t; b < blocks; b += hw) run_block(b);
            });
        for (auto& th : pool) th.join();
    }
    return out;
}

struct PricingResult {
    double price = 0.0;
    double std_error = 0.0;
};

inline int default_steps_to(double T) { return std::max(1, static_cast<int>(std::lround(T * 252.0))); }

// Discounted payoff average for a payoff given (r_T0, lambda_T0).
inline PricingResult mc_value_at_inception(const ModelParams& p, const TenorStructure& tenor,
                                           const std::function<double(double, double)>& payoff,
                                           std::size_t n_paths, std::uint64_t seed, int steps = 0,
                                           unsigned n_threads = 0) {
    tenor.validate();
    if (steps <= 0) steps = default_steps_to(tenor.t0);
    const TerminalSample s = simulate_terminals(p, tenor.t0, steps, n_paths, seed, n_threads);
    std::vector<double> vals(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i)
        vals[i] = std::exp(-s.yr[i]) * payoff(s.r[i], s.lambda[i]);
    const SampleStats st = sample_stats(vals);
    return {st.mean, st.std_error};
}

inline PricingResult price_cdxo_mc(const ModelParams& p, const TenorStructure& tenor,
                                   OptionSide side, std::size_t n_paths, std::uint64_t seed,
                                   int steps = 0, unsigned n_threads = 0) {
    const InceptionLegCoeffs legs = make_inception_coeffs(p, tenor);
    return mc_value_at_inception(
        p, tenor, [&](double r, double l) { return cdxo_terminal_payoff(legs, r, l, side); },
        n_paths, seed, steps, n_threads);
}

inline PricingResult price_forward_mc(const ModelParams& p, const TenorStructure& tenor,
                                      std::size_t n_paths, std::uint64_t seed, int steps = 0,
                                      unsigned n_threads = 0) {
    const InceptionLegCoeffs legs = make_inception_coeffs(p, tenor);
    return mc_value_at_inception(
        p, tenor, [&](double r, double l) { return legs.forward_value(r, l); }, n_paths, seed,
        steps, n_threads);
}

// Doubly stochastic default times for one simulated intensity path: race the
// integrated intensity against unit-exponential thresholds, inverting by
// linear interpolation on the grid.
struct DefaultSample {
    std::vector<double> thresholds;
    std::vector<double> default_times;  // +inf when the threshold is never hit
};

inline DefaultSample sample_defaults(const std::vector<double>& times,
                                     const std::vector<double>& integrated_lambda, int n_names,
                                     RandomSource& rng) {
    if (times.size() != integrated_lambda.size() || times.size() < 2)
        throw std::invalid_argument("sample_defaults: grid mismatch");
    if (n_names < 1) throw std::invalid_argument("sample_defaults: n_names must be positive");
    DefaultSample out;
    out.thresholds.reserve(n_names);
    out.default_times.reserve(n_names);
    for (int i = 0; i < n_names; ++i) {
        const double eps = rng.exponential(1.0);
        out.thresholds.push_back(eps);
        double tau = std::numeric_limits<double>::infinity();
        for (std::size_t j = 1; j < times.size(); ++j) {
            if (integrated_lambda[j] >= eps) {
                const double l0 = integrated_lambda[j - 1], l1 = integrated_lambda[j];
                const double w = (l1 > l0) ? (eps - l0) / (l1 - l0) : 1.0;
                tau = times[j - 1] + w * (times[j] - times[j - 1]);
                break;
            }
        }
        out.default_times.push_back(tau);
    }
    return out;
}

inline DefaultSample sample_defaults(const PathSet& paths, std::size_t path, int n_names,
                                     RandomSource& rng) {
    const std::size_t stride = paths.times.size();
    std::vector<double> lam(paths.int_lambda.begin() + path * stride,
                            paths.int_lambda.begin() + (path + 1) * stride);
    return sample_defaults(paths.times, lam, n_names, rng);
}

// Annuity-measure expectation E^{Q^A}[H(c_{T0})] as the ratio of discounted
// annuity-weighted payoff to the time-0 annuity, both estimated on the same
// path set. Standard error by propagating block means through the ratio.
struct StatisticResult {
    double value = 0.0;
    double std_error = 0.0;
};

inline StatisticResult model_implied_statistic(const ModelParams& p, const TenorStructure& tenor,
                                               const std::function<double(double)>& H,
                                               std::size_t n_paths, std::uint64_t seed,
                                               int steps = 0, unsigned n_threads = 0) {
    tenor.validate();
    if (steps <= 0) steps = default_steps_to(tenor.t0);
    const InceptionLegCoeffs legs = make_inception_coeffs(p, tenor);
    const TerminalSample s = simulate_terminals(p, tenor.t0, steps, n_paths, seed, n_threads);
    const std::size_t blocks = detail::default_blocks();
    std::vector<double> num_block(blocks, 0.0), den_block(blocks, 0.0), cnt(blocks, 0.0);
    for (std::size_t i = 0; i < n_paths; ++i) {
        const std::size_t b = std::min(blocks - 1, i * blocks / n_paths);
        const double annuity = legs.annuity(s.r[i], s.lambda[i]);
        const double spread = legs.protection(s.r[i], s.lambda[i]) / annuity;
        const double disc_annuity = std::exp(-s.yr[i]) * annuity;
        num_block[b] += disc_annuity * H(spread);
        den_block[b] += std::exp(-s.yr[i] - s.yl[i]) * annuity;
        cnt[b] += 1.0;
    }
    double num = 0.0, den = 0.0;
    std::vector<double> block_ratio;
    for (std::size_t b = 0; b < blocks; ++b) {
        num += num_block[b];
        den += den_block[b];
        if (cnt[b] > 0.0 && den_block[b] > 0.0) block_ratio.push_back(num_block[b] / den_block[b]);
    }
    if (!(den > 0.0)) throw degenerate_annuity_error("model_implied_statistic: annuity vanished");
    StatisticResult out;
    out.value = num / den;
    const SampleStats bs = sample_stats(block_ratio);
    out.std_error = bs.std_error;
    return out;
}

// Receiver/payer price curves across strikes on a shared path set (common
// random numbers across strikes).
struct McCurve {
    std::vector<double> strikes;  // per annum
    std::vector<double> receiver, payer;          // discounted prices
    std::vector<double> receiver_se, payer_se;
};

inline McCurve mc_price_curve(const ModelParams& p, const TenorStructure& tenor,
                              const std::vector<double>& strikes, std::size_t n_paths,
                              std::uint64_t seed, int steps = 0, unsigned n_threads = 0) {
    tenor.validate();
    if (steps <= 0) steps = default_steps_to(tenor.t0);
    const InceptionLegCoeffs legs = make_inception_coeffs(p, tenor);
    const TerminalSample s = simulate_terminals(p, tenor.t0, steps, n_paths, seed, n_threads);
    McCurve curve;
    curve.strikes = strikes;
    std::vector<double> disc_annuity(n_paths), spread(n_paths), disc(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) {
        const double annuity = legs.annuity(s.r[i], s.lambda[i]);
        disc[i] = std::exp(-s.yr[i]);
        disc_annuity[i] = disc[i] * annuity;
        spread[i] = legs.protection(s.r[i], s.lambda[i]) / annuity;
    }
    std::vector<double> tmp(n_paths);
    for (double k : strikes) {
        for (std::size_t i = 0; i < n_paths; ++i)
            tmp[i] = disc_annuity[i] * std::max(k - spread[i], 0.0);
        SampleStats st = sample_stats(tmp);
        curve.receiver.push_back(st.mean);
        curve.receiver_se.push_back(st.std_error);
        for (std::size_t i = 0; i < n_paths; ++i)
            tmp[i] = disc_annuity[i] * std::max(spread[i] - k, 0.0);
        st = sample_stats(tmp);
        curve.payer.push_back(st.mean);
        curve.payer_se.push_back(st.std_error);
    }
    return curve;
}

}  // namespace cdxou
