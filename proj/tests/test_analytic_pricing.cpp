#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cdxou/analytic_pricing.hpp"
#include "cdxou/monte_carlo.hpp"

using namespace cdxou;

namespace {

TenorStructure reference_tenor(double strike = 0.0060) {
    return TenorStructure::semiannual(15.0 / 252.0, 5.0, 0.6, 125, strike);
}

// Definitional full-path oracle for the forward-start blocks:
//   h_l = E[exp(-int_0^{T_l} r - int_{T0}^{T_l} lambda)]
//   g_l = E[exp(-int_0^{T_l} r - int_{T0}^{T_{l-1}} lambda)]
struct LegOracle {
    std::vector<double> g, h, g_se, h_se;
};

LegOracle simulate_legs(const ModelParams& p, const TenorStructure& tenor, std::size_t n_paths,
                        int steps_per_year, std::uint64_t seed) {
    const double T = tenor.maturity();
    const int steps = static_cast<int>(std::lround(T * steps_per_year));
    const double h = T / steps;
    const std::size_t M = tenor.payments.size();
    std::vector<double> sg(M, 0.0), sh(M, 0.0), sg2(M, 0.0), sh2(M, 0.0);
    RandomSource rng(seed);
    for (std::size_t path = 0; path < n_paths; ++path) {
        double r = p.r0, lam = p.lambda0, yr = 0.0, yl = 0.0;
        double t = 0.0, yl_t0 = 0.0;
        bool past_t0 = tenor.t0 <= 0.0;
        std::vector<double> yr_pay(M), yl_pay(M);
        std::size_t next = 0;
        for (int s = 0; s < steps; ++s) {
            const double er = std::exp(-p.theta_r * h), el = std::exp(-p.theta_lambda * h);
            yr += 0.5 * h * (r + r * er);
            yl += 0.5 * h * (lam + lam * el);
            const double jr = sample_gamma_increment(p.rate, h, rng);
            const double jl = sample_double_gamma_increment(p.intensity, h, rng);
            r = r * er + jr;
            lam = lam * el + p.rho * jr + jl;
            t += h;
            if (!past_t0 && t >= tenor.t0 - 1e-12) {
                past_t0 = true;
                yl_t0 = yl;
            }
            while (next < M && t >= tenor.payments[next] - 1e-12) {
                yr_pay[next] = yr;
                yl_pay[next] = yl;
                ++next;
            }
        }
        for (std::size_t l = 0; l < M; ++l) {
            const double yl_prev = (l == 0) ? yl_t0 : yl_pay[l - 1];
            const double hv = std::exp(-yr_pay[l] - (yl_pay[l] - yl_t0));
            const double gv = std::exp(-yr_pay[l] - (yl_prev - yl_t0));
            sh[l] += hv;
            sg[l] += gv;
            sh2[l] += hv * hv;
            sg2[l] += gv * gv;
        }
    }
    LegOracle out;
    for (std::size_t l = 0; l < M; ++l) {
        const double mg = sg[l] / n_paths, mh = sh[l] / n_paths;
        out.g.push_back(mg);
        out.h.push_back(mh);
        out.g_se.push_back(std::sqrt(std::max(sg2[l] / n_paths - mg * mg, 0.0) / n_paths));
        out.h_se.push_back(std::sqrt(std::max(sh2[l] / n_paths - mh * mh, 0.0) / n_paths));
    }
    return out;
}

ModelParams random_params(int seed) {
    RandomSource rng(seed);
    ModelParams p;
    p.theta_r = 0.3 + 0.6 * rng.uniform();
    p.theta_lambda = 1.0 + 3.0 * rng.uniform();
    p.rho = 0.05 + 0.4 * rng.uniform();
    p.rate = {200.0 + 300.0 * rng.uniform(), 1.0 + 4.0 * rng.uniform()};
    p.intensity = {{3.0 + 4.0 * rng.uniform(), 3.0 + 5.0 * rng.uniform()},
                   {80.0 + 200.0 * rng.uniform(), 2.0 + 3.0 * rng.uniform()}};
    p.r0 = 0.005 + 0.02 * rng.uniform();
    p.lambda0 = 0.003 * rng.uniform();
    return p;
}

}  // namespace

TEST_CASE("zero coupon bond basics") {
    const ModelParams p;
    CHECK(zcb_price(p, 1.0, 1.0, 0.02) == doctest::Approx(1.0).epsilon(1e-15));
    // degenerate no-jump limit
    ModelParams det = p;
    det.rate.gamma = 0.0;
    const double dt = 2.0;
    CHECK(zcb_price(det, 0.0, dt, 0.02) ==
          doctest::Approx(std::exp(-0.02 * (1.0 - std::exp(-det.theta_r * dt)) / det.theta_r))
              .epsilon(1e-12));
    // decreasing in maturity, contained in (0, 1]
    double prev = 1.0;
    for (double T : {0.5, 1.0, 2.0, 5.0, 10.0, 30.0}) {
        const double v = zcb_price(p, 0.0, T, p.r0);
        CHECK(v > 0.0);
        CHECK(v <= prev + 1e-15);
        prev = v;
    }
}

TEST_CASE("zero coupon bond matches the discount-factor simulation") {
    const ModelParams p;
    const double T = 1.0;
    RandomSource rng(99);
    const std::size_t n = 50000;
    const PathSet ps = simulate_paths(p, T, 252, n, rng);
    std::vector<double> disc(n);
    for (std::size_t i = 0; i < n; ++i) disc[i] = std::exp(-ps.int_r_at(i, ps.times.size() - 1));
    const SampleStats st = sample_stats(disc);
    CHECK(std::abs(st.mean - zcb_price(p, 0.0, T, p.r0)) < 5.0 * st.std_error);
}

TEST_CASE("leg degeneracies") {
    const ModelParams p;
    const double t0 = 15.0 / 252.0;
    // T_l = T0 = t: trivial expectation
    CHECK(h_leg(p, t0, 0.02, 0.001, t0, t0) == doctest::Approx(1.0).epsilon(1e-14));
    // collapsed accrual interval: g_l == h_l
    CHECK(g_leg(p, 0.0, 0.02, 0.001, t0, t0 + 0.5, t0 + 0.5) ==
          doctest::Approx(h_leg(p, 0.0, 0.02, 0.001, t0, t0 + 0.5)).epsilon(1e-12));
    // no default risk: h reduces to the zero coupon bond
    ModelParams risk_free = p;
    risk_free.rho = 0.0;
    risk_free.intensity.inner.gamma = 0.0;
    risk_free.intensity.subordinator.gamma = 0.0;
    CHECK(h_leg(risk_free, t0, 0.02, 0.0, t0, t0 + 2.0) ==
          doctest::Approx(zcb_price(risk_free, t0, t0 + 2.0, 0.02)).epsilon(1e-12));
}

TEST_CASE("two-stage legs match the full-path oracle at the reference set") {
    const ModelParams p;
    const TenorStructure tenor = reference_tenor();
    // only the first payment block is simulated to keep the runtime modest
    TenorStructure short_tenor = tenor;
    short_tenor.payments.assign(tenor.payments.begin(), tenor.payments.begin() + 2);
    const LegOracle mc = simulate_legs(p, short_tenor, 30000, 252, 5);
    for (std::size_t l = 0; l < 2; ++l) {
        const double T_prev = (l == 0) ? tenor.t0 : tenor.payments[l - 1];
        const double ga = g_leg(p, 0.0, p.r0, p.lambda0, tenor.t0, T_prev, tenor.payments[l]);
        const double ha = h_leg(p, 0.0, p.r0, p.lambda0, tenor.t0, tenor.payments[l]);
        CHECK(std::abs(ga - mc.g[l]) < 5.0 * mc.g_se[l]);
        CHECK(std::abs(ha - mc.h[l]) < 5.0 * mc.h_se[l]);
    }
}

TEST_CASE("legs match the oracle on random parameter draws") {
    for (int seed : {41, 42, 43}) {
        const ModelParams p = random_params(seed);
        TenorStructure tenor;
        tenor.t0 = 0.1;
        tenor.payments = {0.6, 1.1};
        tenor.delta = 0.6;
        tenor.n_names = 125;
        tenor.strike = 0.006;
        // fine oracle step: end-of-step jump placement biases the integrals
        // by O(h), which would rival the 5-sigma band at coarse steps
        const LegOracle mc = simulate_legs(p, tenor, 12000, 1008, seed);
        for (std::size_t l = 0; l < tenor.payments.size(); ++l) {
            const double T_prev = (l == 0) ? tenor.t0 : tenor.payments[l - 1];
            const double ga = g_leg(p, 0.0, p.r0, p.lambda0, tenor.t0, T_prev, tenor.payments[l]);
            const double ha = h_leg(p, 0.0, p.r0, p.lambda0, tenor.t0, tenor.payments[l]);
            CHECK(std::abs(ga - mc.g[l]) < 5.0 * mc.g_se[l]);
            CHECK(std::abs(ha - mc.h[l]) < 5.0 * mc.h_se[l]);
            CHECK(ga >= ha);  // survival to T_{l-1} is weaker than to T_l
        }
    }
}

TEST_CASE("par spread behavior in the intensity") {
    const ModelParams p;
    const TenorStructure tenor = reference_tenor();
    // no default risk at all: zero spread
    ModelParams risk_free = p;
    risk_free.rho = 0.0;
    risk_free.lambda0 = 0.0;
    risk_free.intensity.inner.gamma = 0.0;
    risk_free.intensity.subordinator.gamma = 0.0;
    CHECK(cdx_spread(risk_free, tenor, 0.0, p.r0, 0.0) == doctest::Approx(0.0).epsilon(1e-12));

    // strictly increasing in lambda
    const double s0 = cdx_spread(p, tenor, 0.0, p.r0, 0.0);
    const double s1 = cdx_spread(p, tenor, 0.0, p.r0, 0.005);
    const double s2 = cdx_spread(p, tenor, 0.0, p.r0, 0.010);
    CHECK(s1 > s0);
    CHECK(s2 > s1);

    // near-affine for small lambda: R^2 of the linear fit above 0.99
    std::vector<double> xs, ys;
    for (double lam = 0.0; lam <= 0.002 + 1e-12; lam += 0.00025) {
        xs.push_back(lam);
        ys.push_back(cdx_spread(p, tenor, 0.0, p.r0, lam));
    }
    const double r = pearson_correlation(xs, ys);
    CHECK(r * r > 0.99);
}

TEST_CASE("forward value vanishes at the par strike and FEP is a small nonnegative add-on") {
    const ModelParams p;
    TenorStructure tenor = reference_tenor();
    tenor.strike = cdx_spread(p, tenor, 0.0, p.r0, p.lambda0);
    CHECK(forward_cdx_value(p, tenor, 0.0, p.r0, p.lambda0, false) ==
          doctest::Approx(0.0).epsilon(1e-12));

    tenor.strike = 0.0060;
    const double plain = forward_cdx_value(p, tenor, 0.0, p.r0, p.lambda0, false);
    const double with_fep = forward_cdx_value(p, tenor, 0.0, p.r0, p.lambda0, true);
    const double contribution = with_fep - plain;
    CHECK(contribution >= 0.0);
    CHECK(contribution < 2e-4);  // below 2 bps at lambda0 = 0
}

TEST_CASE("terminal payoff: moneyness limits and parity") {
    const ModelParams p;
    const TenorStructure tenor = reference_tenor(0.0060);
    const InceptionLegCoeffs legs = make_inception_coeffs(p, tenor);
    // deep out of the money receiver at enormous intensity
    CHECK(cdxo_terminal_payoff(legs, p.r0, 1.0, OptionSide::receiver) == 0.0);
    // zero intensity parameters: payoff equals strike times annuity
    ModelParams risk_free = p;
    risk_free.rho = 0.0;
    risk_free.intensity.inner.gamma = 0.0;
    risk_free.intensity.subordinator.gamma = 0.0;
    const InceptionLegCoeffs legs_rf = make_inception_coeffs(risk_free, tenor);
    CHECK(cdxo_terminal_payoff(legs_rf, p.r0, 0.0, OptionSide::receiver) ==
          doctest::Approx(tenor.strike * legs_rf.annuity(p.r0, 0.0)).epsilon(1e-12));
    // receiver - payer = strike * annuity - protection pointwise
    for (double lam : {0.0, 0.002, 0.01, 0.04}) {
        const double rec = cdxo_terminal_payoff(legs, p.r0, lam, OptionSide::receiver);
        const double pay = cdxo_terminal_payoff(legs, p.r0, lam, OptionSide::payer);
        const double fwd = tenor.strike * legs.annuity(p.r0, lam) - legs.protection(p.r0, lam);
        CHECK(rec - pay == doctest::Approx(fwd).epsilon(1e-12));
    }
}

TEST_CASE("inception coefficients agree with the two-stage legs at t = T0") {
    const ModelParams p;
    const TenorStructure tenor = reference_tenor();
    const InceptionLegCoeffs legs = make_inception_coeffs(p, tenor);
    for (double lam : {0.0, 0.005, 0.02}) {
        const LegValues lv = forward_legs(p, tenor, tenor.t0, 0.02, lam);
        double g_sum = 0.0, g_ref = 0.0;
        for (std::size_t l = 0; l < tenor.payments.size(); ++l) {
            g_sum += legs.g_ell(l, 0.02, lam);
            g_ref += lv.g[l];
        }
        CHECK(g_sum == doctest::Approx(g_ref).epsilon(1e-11));
        CHECK(legs.annuity(0.02, lam) == doctest::Approx(lv.annuity()).epsilon(1e-11));
    }
}

TEST_CASE("implied lambda0 recovers the state from the parity strike") {
    const ModelParams p;
    TenorStructure tenor = reference_tenor();
    ModelParams truth = p;
    truth.lambda0 = 0.003;
    const double parity_strike = cdx_spread(truth, tenor, 0.0, truth.r0, truth.lambda0);
    const double recovered = implied_lambda0(p, tenor, p.r0, parity_strike);
    CHECK(recovered == doctest::Approx(0.003).epsilon(1e-6));
}
