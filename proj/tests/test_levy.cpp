#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "cdxou/levy.hpp"
#include "cdxou/math.hpp"

using namespace cdxou;

namespace {

// The reference intensity block: inner (c_lambda, gamma_lambda), clock
// (c_tau, gamma_tau) as calibrated for the two-month expiry.
const DoubleGammaSpec kIntensity{{4.3178, 6.0617}, {190.0001, 3.5298}};

}  // namespace

TEST_CASE("gamma Levy density closed form") {
    CHECK(gamma_levy_density({1.0, 1.0}, 1.0) == doctest::Approx(0.36787944117144233).epsilon(1e-12));
    CHECK(gamma_levy_density({2.0, 3.0}, 0.5) == doctest::Approx(2.2072766470286553).epsilon(1e-12));
    CHECK_THROWS_AS(gamma_levy_density({1.0, 1.0}, 0.0), std::domain_error);
    CHECK_THROWS_AS(gamma_levy_density({1.0, 1.0}, -0.3), std::domain_error);
    // monotone exponential decay
    const GammaSpec spec{400.0005, 3.9475};
    double prev = gamma_levy_density(spec, 0.01);
    for (double y : {0.02, 0.05, 0.1, 0.5}) {
        const double v = gamma_levy_density(spec, y);
        CHECK(v < prev);
        prev = v;
    }
    CHECK(gamma_levy_density(spec, 0.5) < 1e-50);
}

TEST_CASE("gamma characteristic exponent") {
    const GammaSpec unit{1.0, 1.0};
    CHECK(std::abs(gamma_char_exponent(unit, 0.0)) == 0.0);
    const Complex v = gamma_char_exponent(unit, Complex(1.0, 0.0));
    CHECK(v.real() == doctest::Approx(-0.34657359027997264).epsilon(1e-12));
    CHECK(v.imag() == doctest::Approx(0.7853981633974483).epsilon(1e-12));
    // mean identity: exponent'(0) / i = gamma / c
    const GammaSpec spec{400.0005, 3.9475};
    const double h = 1e-5;
    const Complex d = (gamma_char_exponent(spec, Complex(h, 0.0)) -
                       gamma_char_exponent(spec, Complex(-h, 0.0))) /
                      Complex(0.0, 2.0 * h);
    CHECK(d.real() == doctest::Approx(spec.mean_rate()).epsilon(1e-6));
    // branch cut rejection: 1 - iu/c real and <= 0 at u = -2ci
    CHECK_THROWS_AS(gamma_char_exponent(unit, Complex(0.0, -2.0)), admissibility_error);
}

TEST_CASE("double gamma characteristic exponent: moments by differentiation") {
    // Same four parameter values with the clock pair read the other way
    // around; kept as a second point for the pure formula checks.
    // Unit-time mean (g_t/c_t)(g_l/c_l) ~ 75.57 under this assignment.
    const DoubleGammaSpec swapped_clock{{4.3178, 6.0617}, {3.5298, 190.0001}};
    CHECK(swapped_clock.mean_rate() == doctest::Approx(75.57).epsilon(2e-4));
    CHECK(std::abs(double_gamma_char_exponent(swapped_clock, 0.0)) == 0.0);

    for (const auto& spec : {swapped_clock, kIntensity}) {
        const double h = 1e-4 / std::max(1.0, spec.mean_rate());
        const Complex f1 = double_gamma_char_exponent(spec, Complex(h, 0.0));
        const Complex fm1 = double_gamma_char_exponent(spec, Complex(-h, 0.0));
        const Complex d1 = (f1 - fm1) / Complex(0.0, 2.0 * h);
        CHECK(d1.real() == doctest::Approx(spec.mean_rate()).epsilon(1e-4));
        // second cumulant check: simulated increments of the subordinated
        // process (finite differencing the exponent at the origin drowns in
        // roundoff for these heavy-tailed specs)
        RandomSource rng(55);
        const double dt = 0.05;
        std::vector<double> draws(300000);
        for (auto& d : draws) d = sample_double_gamma_increment(spec, dt, rng);
        const SampleStats st = sample_stats(draws);
        const double se_var = st.variance * std::sqrt(2.0 / draws.size()) * 4.0;  // heavy tails
        CHECK(std::abs(st.variance - dt * spec.variance_rate()) < 5.0 * se_var);
    }
}

TEST_CASE("negative real part of the exponents on real frequencies") {
    const GammaSpec g{400.0005, 3.9475};
    for (double u = -50.0; u <= 50.0; u += 2.5) {
        if (u == 0.0) continue;
        CHECK(gamma_char_exponent(g, Complex(u, 0.0)).real() <= 1e-15);
        CHECK(double_gamma_char_exponent(kIntensity, Complex(u, 0.0)).real() <= 1e-15);
    }
}

TEST_CASE("subordinated Levy density: decay, divergence, integrability") {
    const QuadraturePolicy policy;
    // dominated by the exponential prefactor
    for (double y : {3.0, 5.0, 8.0})
        CHECK(double_gamma_levy_density(kIntensity, y, policy) <
              std::exp(-0.5 * kIntensity.inner.c * y));

    // int_eps^1 phi(y) dy grows without bound as eps -> 0 (infinite activity)
    auto mass_above = [&](double eps) {
        // integrate in w = log y for stability near zero
        return quad::integrate_adaptive(
                   [&](double w) {
                       const double y = std::exp(w);
                       return double_gamma_levy_density(kIntensity, y, policy) * y;
                   },
                   std::log(eps), 0.0, QuadraturePolicy{1e-8, 1e-12, 60})
            .value;
    };
    double prev = mass_above(1e-1);
    for (double eps : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
        const double m = mass_above(eps);
        CHECK(m > prev + 0.05);  // strictly growing along eps = 10^{-k}
        prev = m;
    }

    // finite variation: int_0^1 y phi(y) dy converges and is stable under
    // tolerance halving
    auto first_moment = [&](double rel) {
        return quad::integrate_adaptive(
                   [&](double w) {
                       const double y = std::exp(w);
                       return double_gamma_levy_density(kIntensity, y, policy) * y * y;
                   },
                   std::log(1e-12), 0.0, QuadraturePolicy{rel, 1e-13, 60})
            .value;
    };
    const double fv1 = first_moment(1e-8), fv2 = first_moment(5e-9);
    CHECK(fv1 == doctest::Approx(fv2).epsilon(1e-6));
    CHECK(fv1 > 0.0);
    CHECK(std::isfinite(fv1));

    // log-moment integrability: int_1^inf log(y) phi(y) dy finite and stable
    auto log_moment = [&](double rel) {
        return quad::integrate_adaptive(
                   [&](double y) {
                       return std::log(y) * double_gamma_levy_density(kIntensity, y, policy);
                   },
                   1.0, 40.0, QuadraturePolicy{rel, 1e-13, 60})
            .value;
    };
    const double lm1 = log_moment(1e-8), lm2 = log_moment(5e-9);
    CHECK(lm1 == doctest::Approx(lm2).epsilon(1e-6));
    CHECK(std::isfinite(lm1));
}

TEST_CASE("density table matches direct quadrature") {
    const DoubleGammaDensityTable table(kIntensity);
    for (double y : {1e-6, 1e-4, 0.01, 0.1, 0.5, 2.0, 10.0})
        CHECK(table(y) == doctest::Approx(double_gamma_levy_density(kIntensity, y)).epsilon(1e-6));
}

TEST_CASE("gamma increment sampler moments") {
    const GammaSpec spec{400.0005, 3.9475};
    RandomSource rng(11);
    const std::size_t n = 1000000;
    std::vector<double> draws(n);
    for (auto& d : draws) d = sample_gamma_increment(spec, 1.0, rng);
    const SampleStats st = sample_stats(draws);
    CHECK(std::abs(st.mean - 0.009869) < 3.0 * st.std_error);
    // variance -> gamma dt / c^2
    const double var_target = spec.variance_rate();
    CHECK(st.variance == doctest::Approx(var_target).epsilon(0.01));
    // mean scales linearly in dt
    RandomSource rng2(12);
    double sum_half = 0.0;
    for (std::size_t i = 0; i < 200000; ++i) sum_half += sample_gamma_increment(spec, 0.5, rng2);
    CHECK(sum_half / 200000 == doctest::Approx(0.5 * spec.mean_rate()).epsilon(0.02));
    CHECK(sample_gamma_increment(spec, 0.0, rng) == 0.0);
}

TEST_CASE("double gamma increment sampler: tower mean and empirical CF") {
    RandomSource rng(21);
    const std::size_t n = 400000;
    const double dt = 0.25;
    std::vector<double> draws(n);
    for (auto& d : draws) d = sample_double_gamma_increment(kIntensity, dt, rng);
    const SampleStats st = sample_stats(draws);
    CHECK(std::abs(st.mean - dt * kIntensity.mean_rate()) < 5.0 * st.std_error);
    CHECK(sample_double_gamma_increment(kIntensity, 0.0, rng) == 0.0);

    // empirical characteristic function vs exp(dt * exponent) at 5 points
    for (double u : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        double cr = 0.0, ci = 0.0, cr2 = 0.0, ci2 = 0.0;
        for (double d : draws) {
            const double re = std::cos(u * d), im = std::sin(u * d);
            cr += re;
            ci += im;
            cr2 += re * re;
            ci2 += im * im;
        }
        cr /= n;
        ci /= n;
        const double se_r = std::sqrt((cr2 / n - cr * cr) / n);
        const double se_i = std::sqrt((ci2 / n - ci * ci) / n);
        const Complex target = std::exp(dt * double_gamma_char_exponent(kIntensity, Complex(u, 0)));
        CHECK(std::abs(cr - target.real()) < 5.0 * se_r);
        CHECK(std::abs(ci - target.imag()) < 5.0 * se_i);
    }
}

TEST_CASE("plain gamma sampler matches its transform at five frequencies") {
    const GammaSpec spec{400.0005, 3.9475};
    RandomSource rng(61);
    const double dt = 0.5;
    const std::size_t n = 300000;
    std::vector<double> draws(n);
    for (auto& d : draws) d = sample_gamma_increment(spec, dt, rng);
    for (double u : {20.0, 50.0, 100.0, 200.0, 400.0}) {
        double cr = 0, ci = 0, cr2 = 0, ci2 = 0;
        for (double d : draws) {
            const double re = std::cos(u * d), im = std::sin(u * d);
            cr += re;
            ci += im;
            cr2 += re * re;
            ci2 += im * im;
        }
        cr /= n;
        ci /= n;
        const double se_r = std::sqrt((cr2 / n - cr * cr) / n);
        const double se_i = std::sqrt((ci2 / n - ci * ci) / n);
        const Complex target = std::exp(dt * gamma_char_exponent(spec, Complex(u, 0.0)));
        CHECK(std::abs(cr - target.real()) < 5.0 * se_r);
        CHECK(std::abs(ci - target.imag()) < 5.0 * se_i);
    }
}

TEST_CASE("adaptive quadrature reports the achieved error on failure") {
    // an oscillatory integrand with a depth cap too small to converge
    bool threw = false;
    try {
        quad::integrate_adaptive([](double x) { return std::cos(1e4 * x * x); }, 0.0, 3.0,
                                 QuadraturePolicy{1e-14, 1e-16, 3});
    } catch (const numerical_error& e) {
        threw = true;
        CHECK(e.achieved_error > 0.0);
    }
    CHECK(threw);
}

TEST_CASE("simulated jump counts match the Levy tail mass") {
    // Count increments above y0 on a fine grid; compare to the Poisson rate
    // int_{y0}^inf phi(y) dy.
    const double T = 2000.0;
    const int per_year = 1000;
    RandomSource rng(31);
    std::vector<int> counts{0, 0};
    const double thresholds[2] = {0.1, 0.5};
    const double dt = 1.0 / per_year;
    const long steps = static_cast<long>(T * per_year);
    for (long s = 0; s < steps; ++s) {
        const double inc = sample_double_gamma_increment(kIntensity, dt, rng);
        if (inc > thresholds[0]) ++counts[0];
        if (inc > thresholds[1]) ++counts[1];
    }
    for (int j = 0; j < 2; ++j) {
        const double rate = quad::integrate_adaptive(
                                [&](double y) { return double_gamma_levy_density(kIntensity, y); },
                                thresholds[j], 60.0, QuadraturePolicy{1e-9, 1e-14, 60})
                                .value;
        const double expected = rate * T;
        CHECK(std::abs(counts[j] - expected) < 5.0 * std::sqrt(expected));
    }
}
