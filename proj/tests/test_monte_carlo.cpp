#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cdxou/monte_carlo.hpp"

using namespace cdxou;

namespace {

TenorStructure reference_tenor(double strike = 0.0060) {
    return TenorStructure::semiannual(15.0 / 252.0, 5.0, 0.6, 125, strike);
}

}  // namespace

TEST_CASE("zero shape parameters give deterministic decay paths") {
    ModelParams p;
    p.rate.gamma = 0.0;
    p.intensity.inner.gamma = 0.0;
    p.intensity.subordinator.gamma = 0.0;
    p.lambda0 = 0.01;
    RandomSource rng(3);
    const PathSet ps = simulate_paths(p, 1.0, 16, 4, rng);
    const std::size_t last = ps.times.size() - 1;
    for (std::size_t i = 0; i < ps.n_paths; ++i) {
        CHECK(ps.r_at(i, last) == doctest::Approx(p.r0 * std::exp(-p.theta_r)).epsilon(1e-12));
        CHECK(ps.lambda_at(i, last) ==
              doctest::Approx(p.lambda0 * std::exp(-p.theta_lambda)).epsilon(1e-12));
    }
    // integrated paths nondecreasing, states nonnegative
    for (std::size_t j = 1; j <= last; ++j) {
        CHECK(ps.int_r_at(0, j) >= ps.int_r_at(0, j - 1));
        CHECK(ps.int_lambda_at(0, j) >= ps.int_lambda_at(0, j - 1));
    }
}

TEST_CASE("path positivity and closed-form moments") {
    const ModelParams p;
    RandomSource rng(17);
    const std::size_t n = 100000;
    const double T = 1.0;
    const PathSet ps = simulate_paths(p, T, 252, n, rng);
    const std::size_t last = ps.times.size() - 1;
    std::vector<double> rT(n), lT(n);
    for (std::size_t i = 0; i < n; ++i) {
        rT[i] = ps.r_at(i, last);
        lT[i] = ps.lambda_at(i, last);
        CHECK(rT[i] >= 0.0);
        CHECK(lT[i] >= 0.0);
    }
    const auto m = conditional_moments(p, T);
    const SampleStats sr = sample_stats(rT), sl = sample_stats(lT);
    CHECK(std::abs(sr.mean - m.mean_r) < 5.0 * sr.std_error);
    CHECK(std::abs(sl.mean - m.mean_lambda) < 5.0 * sl.std_error);
    // variance of the variance estimator approximated by the delta method
    const double se_var_r = sr.variance * std::sqrt(2.0 / n) * 3.0;  // conservative for heavy tails
    CHECK(std::abs(sr.variance - m.var_r) < 5.0 * se_var_r);
}

TEST_CASE("receiver option at zero strike is worthless") {
    const ModelParams p;
    const TenorStructure tenor = reference_tenor(0.0);
    const PricingResult res = price_cdxo_mc(p, tenor, OptionSide::receiver, 20000, 5);
    CHECK(res.price == 0.0);
}

TEST_CASE("payer-receiver difference reproduces the forward (parity)") {
    const ModelParams p;
    const TenorStructure tenor = reference_tenor(0.0055);
    const auto rec = price_cdxo_mc(p, tenor, OptionSide::receiver, 60000, 101);
    const auto pay = price_cdxo_mc(p, tenor, OptionSide::payer, 60000, 101);
    const auto fwd = price_forward_mc(p, tenor, 60000, 707);  // independent draws
    const double diff = pay.price - rec.price;
    const double se = std::sqrt(rec.std_error * rec.std_error + pay.std_error * pay.std_error +
                                fwd.std_error * fwd.std_error);
    CHECK(std::abs(diff - fwd.price) < 3.0 * se);
}

TEST_CASE("seeded determinism") {
    const ModelParams p;
    const TenorStructure tenor = reference_tenor();
    const auto a = price_cdxo_mc(p, tenor, OptionSide::receiver, 20000, 9);
    const auto b = price_cdxo_mc(p, tenor, OptionSide::receiver, 20000, 9);
    CHECK(a.price == b.price);
    CHECK(a.std_error == b.std_error);
}

TEST_CASE("doubly stochastic defaults: degenerate and constant intensity") {
    RandomSource rng(23);
    // zero integrated intensity: no defaults ever
    const std::vector<double> times{0.0, 1.0, 2.0, 3.0};
    const std::vector<double> zero{0.0, 0.0, 0.0, 0.0};
    const DefaultSample none = sample_defaults(times, zero, 50, rng);
    for (double tau : none.default_times) CHECK(std::isinf(tau));

    // constant lambda = 0.02 over five years: P(tau > 5) = exp(-0.1)
    std::vector<double> grid, cum;
    for (int j = 0; j <= 60; ++j) {
        grid.push_back(5.0 * j / 60.0);
        cum.push_back(0.02 * grid.back());
    }
    int survived = 0;
    const int trials = 100000;
    RandomSource rng2(29);
    for (int i = 0; i < trials; ++i) {
        const DefaultSample d = sample_defaults(grid, cum, 1, rng2);
        if (d.default_times[0] > 5.0) ++survived;
    }
    const double p_hat = static_cast<double>(survived) / trials;
    const double target = std::exp(-0.1);
    const double se = std::sqrt(target * (1.0 - target) / trials);
    CHECK(std::abs(p_hat - target) < 5.0 * se);
}

TEST_CASE("conditional independence of default times across names") {
    const ModelParams p;
    const double T = 1.0;
    const std::size_t n = 20000;
    RandomSource rng(31);
    const PathSet ps = simulate_paths(p, T, 126, n, rng);
    const std::size_t last = ps.times.size() - 1;
    RandomSource rng_def(37);
    int joint_survived = 0;
    double mean_e2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const DefaultSample d = sample_defaults(ps, i, 2, rng_def);
        if (d.default_times[0] > T && d.default_times[1] > T) ++joint_survived;
        mean_e2 += std::exp(-2.0 * ps.int_lambda_at(i, last));
    }
    mean_e2 /= n;
    const double p_hat = static_cast<double>(joint_survived) / n;
    const double se = std::sqrt(p_hat * (1.0 - p_hat) / n) + 2e-4;
    CHECK(std::abs(p_hat - mean_e2) < 5.0 * se);
}

TEST_CASE("Dellacherie identity: defaultable bond two ways") {
    const ModelParams p;
    const double T = 1.0;
    const std::size_t n = 40000;
    RandomSource rng(41);
    const PathSet ps = simulate_paths(p, T, 126, n, rng);
    const std::size_t last = ps.times.size() - 1;
    RandomSource rng_def(43);
    std::vector<double> lhs(n), rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const DefaultSample d = sample_defaults(ps, i, 1, rng_def);
        lhs[i] = (d.default_times[0] > T) ? std::exp(-ps.int_r_at(i, last)) : 0.0;
        rhs[i] = std::exp(-ps.int_r_at(i, last) - ps.int_lambda_at(i, last));
    }
    const SampleStats sl = sample_stats(lhs), sr = sample_stats(rhs);
    const double se = std::sqrt(sl.std_error * sl.std_error + sr.std_error * sr.std_error);
    CHECK(std::abs(sl.mean - sr.mean) < 5.0 * se);
}

TEST_CASE("annuity-measure statistic: normalization and moments") {
    const ModelParams p;
    const TenorStructure tenor = reference_tenor();
    const auto one = model_implied_statistic(p, tenor, [](double) { return 1.0; }, 60000, 51);
    // numerator discounts r over [0, T0] while the denominator also carries
    // the (tiny) integrated intensity, so the ratio is 1 up to that bias
    CHECK(one.value == doctest::Approx(1.0).epsilon(5e-3));

    const auto mean_spread = model_implied_statistic(p, tenor, [](double c) { return c; }, 60000, 51);
    const double cf = mean_spread.value;
    CHECK(cf > 0.0);
    const auto var_spread = model_implied_statistic(
        p, tenor, [cf](double c) { return (c - cf) * (c - cf); }, 60000, 51);
    CHECK(var_spread.value > 0.0);
    CHECK(std::isfinite(var_spread.value));
}
