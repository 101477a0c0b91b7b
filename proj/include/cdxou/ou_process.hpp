#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "cdxou/levy.hpp"
#include "cdxou/quadrature.hpp"

namespace cdxou {

// Bivariate Levy-driven OU model of (short rate r, default intensity lambda):
//   dX_t = -diag(theta_r, theta_lambda) X_t dt + d(g^r, rho g^r + gtilde^lambda)_t
// with g^r a gamma process and gtilde^lambda a gamma-subordinated gamma process.
struct ModelParams {
    double theta_r = 0.55;
    double theta_lambda = 3.3533;
    double rho = 0.1548;           // loading of rate jumps on the intensity
    GammaSpec rate{400.0005, 3.9475};
    DoubleGammaSpec intensity{{4.3178, 6.0617}, {190.0001, 3.5298}};
    double r0 = 0.0146;
    double lambda0 = 0.0;

    void validate() const {
        if (!(theta_r > 0.0) || !(theta_lambda > 0.0))
            throw std::invalid_argument("ModelParams: mean-reversion speeds must be positive");
        if (rho < 0.0) throw std::invalid_argument("ModelParams: rho must be nonnegative");
        if (r0 < 0.0 || lambda0 < 0.0)
            throw std::invalid_argument("ModelParams: initial state must be nonnegative");
        rate.validate();
        intensity.validate();
    }
};

// Coefficients (a1, a2, a3, a4) multiplying (DY^r, DY^lambda, r_T, lambda_T)
// in the joint transform.
struct LoadingCoeffs {
    double a1 = 0.0, a2 = 0.0, a3 = 0.0, a4 = 0.0;

    bool nonnegative() const { return a1 >= 0.0 && a2 >= 0.0 && a3 >= 0.0 && a4 >= 0.0; }
};

enum class Branch {
    oscillatory,  // upsilon = 1: characteristic function
    laplace       // upsilon = i: Laplace transform, requires nonnegative loadings
};

// State loadings xi: contribution of the time-t state to the transform.
inline double xi_r(const ModelParams& p, double t, double r, double a1, double a3) {
    if (t < 0.0) throw std::invalid_argument("xi_r: t must be nonnegative");
    return a1 * r * (1.0 - std::exp(-p.theta_r * t)) / p.theta_r + a3 * r * std::exp(-p.theta_r * t);
}

inline double xi_lambda(const ModelParams& p, double t, double lambda, double a2, double a4) {
    if (t < 0.0) throw std::invalid_argument("xi_lambda: t must be nonnegative");
    return a2 * lambda * (1.0 - std::exp(-p.theta_lambda * t)) / p.theta_lambda +
           a4 * lambda * std::exp(-p.theta_lambda * t);
}

// Deterministic loadings psi of the jump integrals, at time u for horizon T.
inline double psi_r(const ModelParams& p, double u, double T, const LoadingCoeffs& c) {
    if (u > T) throw std::invalid_argument("psi_r: u must not exceed T");
    const double er = std::exp(-p.theta_r * (T - u));
    const double el = std::exp(-p.theta_lambda * (T - u));
    return c.a1 * (1.0 - er) / p.theta_r + c.a2 * p.rho * (1.0 - el) / p.theta_lambda + c.a3 * er +
           c.a4 * p.rho * el;
}

inline double psi_lambda(const ModelParams& p, double u, double T, const LoadingCoeffs& c) {
    if (u > T) throw std::invalid_argument("psi_lambda: u must not exceed T");
    const double el = std::exp(-p.theta_lambda * (T - u));
    return c.a2 * (1.0 - el) / p.theta_lambda + c.a4 * el;
}

// Jump part of the joint exponent: the two u-integrals of (CharExp), with the
// inner y-integrals in closed logarithmic form. The state part i*ups*(xi_r +
// xi_lambda) is NOT included here.
inline Complex joint_char_exponent(const ModelParams& p, double t, double T,
                                   const LoadingCoeffs& coeffs, Branch branch,
                                   const QuadraturePolicy& = {}) {
    p.validate();
    if (t > T) throw std::invalid_argument("joint_char_exponent: t must not exceed T");
    if (t == T) return Complex(0.0, 0.0);
    if (branch == Branch::laplace) {
        if (!coeffs.nonnegative())
            throw admissibility_error("joint_char_exponent: laplace branch needs nonnegative loadings");
        const double re = quad::gauss_legendre_64(
            [&](double u) {
                return gamma_laplace_exponent(p.rate, psi_r(p, u, T, coeffs)) +
                       double_gamma_laplace_exponent(p.intensity, psi_lambda(p, u, T, coeffs));
            },
            t, T);
        return Complex(re, 0.0);
    }
    return quad::gauss_legendre_64(
        [&](double u) -> Complex {
            return gamma_char_exponent(p.rate, Complex(psi_r(p, u, T, coeffs), 0.0)) +
                   double_gamma_char_exponent(p.intensity, Complex(psi_lambda(p, u, T, coeffs), 0.0));
        },
        t, T);
}

// Full conditional log-transform:
//   log E[ exp(i ups (a1 DY^r + a2 DY^lambda + a3 r_T + a4 lambda_T)) | F_t ]
inline Complex joint_log_cf(const ModelParams& p, double t, double T, const LoadingCoeffs& coeffs,
                            Branch branch, double r_t, double lambda_t,
                            const QuadraturePolicy& policy = {}) {
    const Complex jump = joint_char_exponent(p, t, T, coeffs, branch, policy);
    const double xr = xi_r(p, T - t, r_t, coeffs.a1, coeffs.a3);
    const double xl = xi_lambda(p, T - t, lambda_t, coeffs.a2, coeffs.a4);
    const Complex i_ups = (branch == Branch::laplace) ? Complex(-1.0, 0.0) : Complex(0.0, 1.0);
    return jump + i_ups * (xr + xl);
}

struct ConditionalMoments {
    double mean_r, var_r, mean_lambda, var_lambda;
};

// Closed-form conditional mean/variance of r_t and lambda_t given time 0.
inline ConditionalMoments conditional_moments(const ModelParams& p, double t) {
    p.validate();
    if (t < 0.0) throw std::invalid_argument("conditional_moments: t must be nonnegative");
    const double er = std::exp(-p.theta_r * t), er2 = std::exp(-2.0 * p.theta_r * t);
    const double el = std::exp(-p.theta_lambda * t), el2 = std::exp(-2.0 * p.theta_lambda * t);
    ConditionalMoments m{};
    m.mean_r = p.r0 * er + p.rate.mean_rate() * (1.0 - er) / p.theta_r;
    m.var_r = p.rate.variance_rate() * (1.0 - er2) / (2.0 * p.theta_r);
    m.mean_lambda = p.lambda0 * el + (p.rho * p.rate.mean_rate() + p.intensity.mean_rate()) *
                                         (1.0 - el) / p.theta_lambda;
    m.var_lambda = (p.rho * p.rho * p.rate.variance_rate() + p.intensity.variance_rate()) *
                   (1.0 - el2) / (2.0 * p.theta_lambda);
    return m;
}

// Fourier transform of X_t given X_0, in the cycle convention used for the
// density inversion: phi_t(a) = E[exp(-2 pi i (a1 r_t + a2 lambda_t))].
inline Complex transition_log_cf(const ModelParams& p, double t, double alpha1, double alpha2,
                                 const QuadraturePolicy& policy = {}) {
    const double two_pi = 2.0 * M_PI;
    const LoadingCoeffs c{0.0, 0.0, -two_pi * alpha1, -two_pi * alpha2};
    return joint_log_cf(p, 0.0, t, c, Branch::oscillatory, p.r0, p.lambda0, policy);
}

// Fourier transform of the stationary law, truncating the v-integrals at
// policy.stationary_v_max.
inline Complex stationary_char_fn(const ModelParams& p, double alpha1, double alpha2,
                                  const QuadraturePolicy& policy = {}) {
    p.validate();
    const double vmax = policy.stationary_v_max;
    const Complex i2pi(0.0, 2.0 * M_PI);
    auto integrand = [&](double v) -> Complex {
        const Complex zr = 1.0 + i2pi / p.rate.c *
                                     (alpha1 * std::exp(-p.theta_r * v) +
                                      p.rho * alpha2 * std::exp(-p.theta_lambda * v));
        const Complex zl =
            1.0 + (p.intensity.inner.gamma / p.intensity.subordinator.c) *
                      detail::checked_log(1.0 + i2pi / p.intensity.inner.c * alpha2 *
                                                    std::exp(-p.theta_lambda * v),
                                          "stationary_char_fn");
        return -p.rate.gamma * detail::checked_log(zr, "stationary_char_fn") -
               p.intensity.subordinator.gamma * detail::checked_log(zl, "stationary_char_fn");
    };
    const auto re = quad::integrate_adaptive([&](double v) { return integrand(v).real(); }, 0.0,
                                             vmax, policy);
    const auto im = quad::integrate_adaptive([&](double v) { return integrand(v).imag(); }, 0.0,
                                             vmax, policy);
    return std::exp(Complex(re.value, im.value));
}

}  // namespace cdxou
