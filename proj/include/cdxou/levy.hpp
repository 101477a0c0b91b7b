#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "cdxou/errors.hpp"
#include "cdxou/quadrature.hpp"
#include "cdxou/random.hpp"

namespace cdxou {

using Complex = std::complex<double>;

// Gamma process: Levy density gamma * exp(-c y) / y. Unit-time increment is
// Gamma(shape=gamma, rate=c), mean gamma/c, variance gamma/c^2.
struct GammaSpec {
    double c = 1.0;      // scale (rate of the exponential tilt)
    double gamma = 1.0;  // shape / arrival-rate

    // gamma == 0 is the degenerate no-jump limit; accepted so deterministic
    // decay cases stay expressible.
    void validate() const {
        if (!(c > 0.0) || !(gamma >= 0.0))
            throw std::invalid_argument("GammaSpec: need c > 0 and gamma >= 0");
    }
    double mean_rate() const { return gamma / c; }
    double variance_rate() const { return gamma / (c * c); }
};

// Gamma process subordinated to an independent gamma clock:
// inner process run on the subordinator's time.
struct DoubleGammaSpec {
    GammaSpec inner;         // (c_lambda, gamma_lambda)
    GammaSpec subordinator;  // (c_tau, gamma_tau)

    void validate() const {
        inner.validate();
        subordinator.validate();
    }
    double mean_rate() const { return subordinator.mean_rate() * inner.mean_rate(); }
    double variance_rate() const {
        // Var of unit-time increment by conditioning on the clock.
        const double gl = inner.gamma, cl = inner.c;
        const double gt = subordinator.gamma, ct = subordinator.c;
        return gt * gl * (gl + ct) / (ct * ct * cl * cl);
    }
};

namespace detail {

// Principal-branch complex log that rejects arguments on the cut.
inline Complex checked_log(Complex z, const char* where) {
    if (z.real() <= 0.0 && std::abs(z.imag()) <= 1e-14 * (1.0 + std::abs(z.real())))
        throw admissibility_error(std::string(where) + ": log argument on branch cut");
    return std::log(z);
}

}  // namespace detail

inline double gamma_levy_density(const GammaSpec& spec, double y) {
    spec.validate();
    if (!(y > 0.0)) throw std::domain_error("gamma_levy_density: y must be positive");
    return spec.gamma * std::exp(-spec.c * y) / y;
}

// Unit-time exponent: log E[exp(i u g_1)] = -gamma log(1 - i u / c).
inline Complex gamma_char_exponent(const GammaSpec& spec, Complex u) {
    spec.validate();
    const Complex z = 1.0 - Complex(0.0, 1.0) * u / spec.c;
    return -spec.gamma * detail::checked_log(z, "gamma_char_exponent");
}

// Unit-time exponent of the subordinated process:
// -gamma_tau log(1 + (gamma_lambda / c_tau) log(1 - i u / c_lambda)).
inline Complex double_gamma_char_exponent(const DoubleGammaSpec& spec, Complex u) {
    spec.validate();
    const Complex inner_log =
        detail::checked_log(1.0 - Complex(0.0, 1.0) * u / spec.inner.c, "double_gamma_char_exponent(inner)");
    const Complex z = 1.0 + (spec.inner.gamma / spec.subordinator.c) * inner_log;
    return -spec.subordinator.gamma * detail::checked_log(z, "double_gamma_char_exponent(outer)");
}

// Laplace forms with real arithmetic: log E[exp(-s g_1)] for s > -c.
inline double gamma_laplace_exponent(const GammaSpec& spec, double s) {
    if (s / spec.c <= -1.0)
        throw admissibility_error("gamma_laplace_exponent: s/c <= -1");
    return -spec.gamma * std::log1p(s / spec.c);
}

inline double double_gamma_laplace_exponent(const DoubleGammaSpec& spec, double s) {
    if (s / spec.inner.c <= -1.0)
        throw admissibility_error("double_gamma_laplace_exponent: s/c_lambda <= -1");
    const double inner = std::log1p(s / spec.inner.c);
    const double z = (spec.inner.gamma / spec.subordinator.c) * inner;
    if (z <= -1.0)
        throw admissibility_error("double_gamma_laplace_exponent: nested log argument <= 0");
    return -spec.subordinator.gamma * std::log1p(z);
}

// Levy density of the subordinated process,
//   phi(y) = gamma_tau e^{-c_l y}/y * I(y),
//   I(y)   = int_0^inf (c_l y)^{g_l x} / Gamma(g_l x) * e^{-c_t x} / x dx
//          = int_0^inf g_l exp(-x (c_t - g_l log(c_l y))) / Gamma(g_l x + 1) dx,
// the second form removing the 1/x singularity at the origin.
inline double double_gamma_levy_density(const DoubleGammaSpec& spec, double y,
                                        const QuadraturePolicy& policy = {}) {
    spec.validate();
    if (!(y > 0.0)) throw std::domain_error("double_gamma_levy_density: y must be positive");
    const double gl = spec.inner.gamma, cl = spec.inner.c;
    const double ct = spec.subordinator.c, gt = spec.subordinator.gamma;
    const double slope = ct - gl * std::log(cl * y);

    auto integrand = [&](double x) {
        return gl * std::exp(-x * slope - std::lgamma(gl * x + 1.0));
    };
    // Extend the truncation point until the integrand falls below 1e-14 of
    // the accumulated scale; Gamma(g_l x + 1) eventually beats any
    // exponential growth, so x_max always exists.
    double x_max = std::max(1.0, 4.0 / gl);
    const double scale = std::max(integrand(0.0), 1e-300);
    while (integrand(x_max) > 1e-14 * scale && x_max < 1e6) x_max *= 2.0;
    const auto inner = quad::integrate_adaptive(integrand, 0.0, x_max, policy);
    return gt * std::exp(-cl * y) / y * inner.value;
}

// Dense log-spaced cache of the subordinated Levy density. phi(y) is smooth
// on log scale, so cubic interpolation of log I(y) is accurate to ~1e-10;
// the exact e^{-c_l y}/y prefactor is reapplied on evaluation.
class DoubleGammaDensityTable {
  public:
    DoubleGammaDensityTable() = default;
    DoubleGammaDensityTable(const DoubleGammaSpec& spec, const QuadraturePolicy& policy = {},
                            double y_min = 1e-8, double y_max = 60.0, int n = 1000)
        : spec_(spec), log_y_min_(std::log(y_min)), log_y_max_(std::log(y_max)) {
        spec.validate();
        log_I_.resize(n);
        step_ = (log_y_max_ - log_y_min_) / (n - 1);
        for (int i = 0; i < n; ++i) {
            const double y = std::exp(log_y_min_ + i * step_);
            const double phi = double_gamma_levy_density(spec_, y, policy);
            log_I_[i] = std::log(phi * y) + spec_.inner.c * y;  // log I(y) + log gamma_tau
        }
    }

    bool empty() const { return log_I_.empty(); }

    double operator()(double y) const {
        if (!(y > 0.0)) throw std::domain_error("DoubleGammaDensityTable: y must be positive");
        const double ly = std::log(y);
        double log_I;
        if (ly <= log_y_min_)
            log_I = log_I_.front();
        else if (ly >= log_y_max_)
            log_I = log_I_.back() + (log_I_[log_I_.size() - 1] - log_I_[log_I_.size() - 2]) / step_ *
                                        (ly - log_y_max_);
        else {
            const double t = (ly - log_y_min_) / step_;
            const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(t), log_I_.size() - 2);
            const double f = t - static_cast<double>(i);
            // Catmull-Rom in log-log space.
            const std::size_t i0 = (i == 0) ? 0 : i - 1;
            const std::size_t i3 = std::min(i + 2, log_I_.size() - 1);
            const double p0 = log_I_[i0], p1 = log_I_[i], p2 = log_I_[i + 1], p3 = log_I_[i3];
            const double m1 = 0.5 * (p2 - p0), m2 = 0.5 * (p3 - p1);
            const double f2 = f * f, f3 = f2 * f;
            log_I = (2 * f3 - 3 * f2 + 1) * p1 + (f3 - 2 * f2 + f) * m1 + (-2 * f3 + 3 * f2) * p2 +
                    (f3 - f2) * m2;
        }
        return std::exp(log_I - spec_.inner.c * y) / y;
    }

  private:
    DoubleGammaSpec spec_;
    double log_y_min_ = 0.0, log_y_max_ = 0.0, step_ = 1.0;
    std::vector<double> log_I_;
};

inline double sample_gamma_increment(const GammaSpec& spec, double dt, RandomSource& rng) {
    spec.validate();
    if (dt < 0.0) throw std::invalid_argument("sample_gamma_increment: dt must be nonnegative");
    if (dt == 0.0) return 0.0;
    return rng.gamma(spec.gamma * dt, spec.c);
}

// Draw the clock increment, then the inner process over that much
// operational time.
inline double sample_double_gamma_increment(const DoubleGammaSpec& spec, double dt,
                                            RandomSource& rng) {
    spec.validate();
    if (dt < 0.0) throw std::invalid_argument("sample_double_gamma_increment: dt must be nonnegative");
    if (dt == 0.0) return 0.0;
    const double clock = rng.gamma(spec.subordinator.gamma * dt, spec.subordinator.c);
    if (clock == 0.0) return 0.0;
    return rng.gamma(spec.inner.gamma * clock, spec.inner.c);
}

}  // namespace cdxou
