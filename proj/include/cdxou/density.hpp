#pragma once

#include <algorithm>
#include <array>
#include <functional>
#include <cmath>
#include <complex>
#include <cstddef>
#include <ostream>
#include <thread>
#include <vector>

#include "cdxou/ou_process.hpp"
#include "cdxou/parallel.hpp"

namespace cdxou {

// Conjugate frequency/space lattice pair for the 2D inversion. Constructed
// from (n, B); the remaining fields follow from eta * space_step = 2 pi / n.
struct FFTGrid {
    int n = 1024;          // points per axis, power of two >= 4
    double b_freq = 1000;  // frequency half-width B (angular)
    double eta = 0.0;      // frequency step 2B/n
    double space_step = 0.0;
    double b_space = 0.0;

    static FFTGrid make(int n, double b_freq) {
        if (n < 4 || (n & (n - 1)) != 0)
            throw std::invalid_argument("FFTGrid: n must be a power of two >= 4");
        if (!(b_freq > 0.0)) throw std::invalid_argument("FFTGrid: B must be positive");
        FFTGrid g;
        g.n = n;
        g.b_freq = b_freq;
        g.eta = 2.0 * b_freq / n;
        g.space_step = 2.0 * M_PI / (n * g.eta);  // = pi / B
        g.b_space = 0.5 * n * g.space_step;
        return g;
    }

    // Published stress configuration (N = 2^13, B = 1e6). Expensive; the
    // desk default trades frequency width for a space window that covers
    // the state's support.
    static FFTGrid stress_preset() { return make(1 << 13, 1e6); }
    static FFTGrid desk_preset() { return make(1 << 10, 3500.0); }

    double freq(int k) const { return -b_freq + k * eta; }
    double coord(int l) const { return -b_space + l * space_step; }
};

namespace detail {

inline void fft_inplace(std::vector<Complex>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
        const Complex wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            Complex w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const Complex u = a[i + j];
                const Complex v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// In-place 2D inverse DFT with 1/n^2 normalization, rows then columns.
inline void ifft2_inplace(std::vector<Complex>& a, int n) {
    std::vector<Complex> tmp(n);
    for (int r = 0; r < n; ++r) {
        std::copy(a.begin() + static_cast<std::size_t>(r) * n,
                  a.begin() + static_cast<std::size_t>(r + 1) * n, tmp.begin());
        fft_inplace(tmp, true);
        std::copy(tmp.begin(), tmp.end(), a.begin() + static_cast<std::size_t>(r) * n);
    }
    for (int c = 0; c < n; ++c) {
        for (int r = 0; r < n; ++r) tmp[r] = a[static_cast<std::size_t>(r) * n + c];
        fft_inplace(tmp, true);
        for (int r = 0; r < n; ++r) a[static_cast<std::size_t>(r) * n + c] = tmp[r];
    }
    const double norm = 1.0 / (static_cast<double>(n) * n);
    for (auto& z : a) z *= norm;
}

}  // namespace detail

// Raw density lattice over (r, lambda). Negative ringing values are kept;
// clipping happens only when exporting, with the clipped mass recorded.
struct DensityField {
    FFTGrid grid;
    std::vector<double> values;  // row-major: values[ir * n + il]

    double cell() const { return grid.space_step * grid.space_step; }
    double value(int ir, int il) const { return values[static_cast<std::size_t>(ir) * grid.n + il]; }

    double mass() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s * cell();
    }
    double negative_mass() const {
        double s = 0.0;
        for (double v : values) s += std::min(v, 0.0);
        return s * cell();
    }
    double mean_r() const { return moment(true, 1) / mass(); }
    double mean_lambda() const { return moment(false, 1) / mass(); }
    double var_r() const {
        const double m = mean_r();
        return moment(true, 2) / mass() - m * m;
    }
    double var_lambda() const {
        const double m = mean_lambda();
        return moment(false, 2) / mass() - m * m;
    }
    // L1 distance between two fields on the same grid.
    static double l1_distance(const DensityField& a, const DensityField& b) {
        if (a.grid.n != b.grid.n) throw std::invalid_argument("l1_distance: grid mismatch");
        double s = 0.0;
        for (std::size_t i = 0; i < a.values.size(); ++i) s += std::abs(a.values[i] - b.values[i]);
        return s * a.cell();
    }

  private:
    double moment(bool r_axis, int order) const {
        double s = 0.0;
        const int n = grid.n;
        for (int ir = 0; ir < n; ++ir) {
            const double xr = grid.coord(ir);
            for (int il = 0; il < n; ++il) {
                const double x = r_axis ? xr : grid.coord(il);
                s += std::pow(x, order) * values[static_cast<std::size_t>(ir) * n + il];
            }
        }
        return s * cell();
    }
};

namespace detail {

// Segmented fixed-order quadrature of the stationary-law v-integrals; the
// integrand decays like exp(-theta v) so a handful of panels resolves it.
inline Complex stationary_log_cf_fast(const ModelParams& p, double a1, double a2, double v_max) {
    static const double edges[] = {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 40.0, 100.0};
    const Complex i2pi(0.0, 2.0 * M_PI);
    auto integrand = [&](double v) -> Complex {
        const Complex zr = 1.0 + i2pi / p.rate.c *
                                     (a1 * std::exp(-p.theta_r * v) +
                                      p.rho * a2 * std::exp(-p.theta_lambda * v));
        const Complex zl = 1.0 + (p.intensity.inner.gamma / p.intensity.subordinator.c) *
                                     checked_log(1.0 + i2pi / p.intensity.inner.c * a2 *
                                                           std::exp(-p.theta_lambda * v),
                                                 "stationary density");
        return -p.rate.gamma * checked_log(zr, "stationary density") -
               p.intensity.subordinator.gamma * checked_log(zl, "stationary density");
    };
    Complex total(0.0, 0.0);
    for (std::size_t s = 0; s + 1 < sizeof(edges) / sizeof(edges[0]); ++s) {
        const double lo = std::min(edges[s], v_max), hi = std::min(edges[s + 1], v_max);
        if (hi <= lo) break;
        total += quad::gauss_legendre_64(integrand, lo, hi);
    }
    return total;
}

}  // namespace detail

// Invert the time-t characteristic function on the conjugate lattice.
// Follows the alternating-sign ifft2 factorization of the double Fourier
// sum; requires n = 0 mod 4 so the global phase collapses to +1.
inline DensityField transition_density(const ModelParams& p, double t, const FFTGrid& grid,
                                       const QuadraturePolicy& policy = {},
                                       unsigned n_threads = 0) {
    p.validate();
    if (!(t > 0.0)) throw std::invalid_argument("transition_density: t must be positive");
    const int n = grid.n;
    std::vector<Complex> F(static_cast<std::size_t>(n) * n);

    // Gauss-Legendre nodes for the u-integrals on [0, t], shared by all
    // frequencies; the lambda-only integral is cached per column.
    const auto& gl = quad::gl64();
    std::array<double, 64> vr{}, vl{}, wq{};
    for (int j = 0; j < 64; ++j) {
        const double v = 0.5 * t * (gl.x[j] + 1.0);
        vr[j] = std::exp(-p.theta_r * v);
        vl[j] = std::exp(-p.theta_lambda * v);
        wq[j] = 0.5 * t * gl.w[j];
    }
    const double er_t = std::exp(-p.theta_r * t), el_t = std::exp(-p.theta_lambda * t);
    const double gl_over_ct = p.intensity.inner.gamma / p.intensity.subordinator.c;

    detail::parallel_over(n, n_threads, [&](int k2) {
        const double a2 = grid.freq(k2);
        // lambda-part: depends on alpha2 only.
        Complex lam_part(0.0, 0.0);
        for (int j = 0; j < 64; ++j) {
            const Complex inner =
                detail::checked_log(1.0 + Complex(0.0, a2 * vl[j] / p.intensity.inner.c),
                                    "transition_density");
            lam_part -= wq[j] * p.intensity.subordinator.gamma *
                        detail::checked_log(1.0 + gl_over_ct * inner, "transition_density");
        }
        const Complex state2(0.0, -a2 * p.lambda0 * el_t);
        for (int k1 = 0; k1 < n; ++k1) {
            const double a1 = grid.freq(k1);
            Complex rate_part(0.0, 0.0);
            for (int j = 0; j < 64; ++j) {
                rate_part -= wq[j] * p.rate.gamma *
                             detail::checked_log(
                                 1.0 + Complex(0.0, (a1 * vr[j] + p.rho * a2 * vl[j]) / p.rate.c),
                                 "transition_density");
            }
            const Complex state1(0.0, -a1 * p.r0 * er_t);
            const Complex phi = std::exp(rate_part + lam_part + state1 + state2);
            const double sign = ((k1 + k2) & 1) ? -1.0 : 1.0;
            F[static_cast<std::size_t>(k1) * n + k2] = sign * phi;
        }
    });

    detail::ifft2_inplace(F, n);

    DensityField field;
    field.grid = grid;
    field.values.resize(static_cast<std::size_t>(n) * n);
    const double scale = std::pow(grid.eta * n / (2.0 * M_PI), 2);
    for (int l1 = 0; l1 < n; ++l1)
        for (int l2 = 0; l2 < n; ++l2) {
            const double sign = ((l1 + l2) & 1) ? -1.0 : 1.0;
            field.values[static_cast<std::size_t>(l1) * n + l2] =
                sign * scale * F[static_cast<std::size_t>(l1) * n + l2].real();
        }

    const double neg = field.negative_mass() / field.mass();
    if (neg < -1e-3)
        throw numerical_error("transition_density: grid too coarse (negative ringing mass)", -neg);
    (void)policy;
    return field;
}

inline DensityField stationary_density(const ModelParams& p, const FFTGrid& grid,
                                       const QuadraturePolicy& policy = {},
                                       unsigned n_threads = 0) {
    p.validate();
    const int n = grid.n;
    const double two_pi = 2.0 * M_PI;
    const double vmax = policy.stationary_v_max;
    static const double edges[] = {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 40.0, 100.0};
    // quadrature nodes shared by every frequency pair
    std::vector<double> vq, wq;
    const auto& gl = quad::gl64();
    for (std::size_t s = 0; s + 1 < sizeof(edges) / sizeof(edges[0]); ++s) {
        const double lo = std::min(edges[s], vmax), hi = std::min(edges[s + 1], vmax);
        if (hi <= lo) break;
        for (int j = 0; j < 64; ++j) {
            vq.push_back(0.5 * (lo + hi) + 0.5 * (hi - lo) * gl.x[j]);
            wq.push_back(0.5 * (hi - lo) * gl.w[j]);
        }
    }
    std::vector<double> er(vq.size()), el(vq.size());
    for (std::size_t j = 0; j < vq.size(); ++j) {
        er[j] = std::exp(-p.theta_r * vq[j]);
        el[j] = std::exp(-p.theta_lambda * vq[j]);
    }
    const double gl_over_ct = p.intensity.inner.gamma / p.intensity.subordinator.c;
    const Complex i2pi(0.0, two_pi);

    std::vector<Complex> F(static_cast<std::size_t>(n) * n);
    detail::parallel_over(n, n_threads, [&](int k2) {
        const double a2 = grid.freq(k2) / two_pi;
        // intensity integral depends on alpha2 only
        Complex lam_part(0.0, 0.0);
        for (std::size_t j = 0; j < vq.size(); ++j) {
            const Complex inner = detail::checked_log(
                1.0 + i2pi / p.intensity.inner.c * a2 * el[j], "stationary_density");
            lam_part -= wq[j] * p.intensity.subordinator.gamma *
                        detail::checked_log(1.0 + gl_over_ct * inner, "stationary_density");
        }
        for (int k1 = 0; k1 < n; ++k1) {
            const double a1 = grid.freq(k1) / two_pi;
            Complex rate_part(0.0, 0.0);
            for (std::size_t j = 0; j < vq.size(); ++j)
                rate_part -= wq[j] * p.rate.gamma *
                             detail::checked_log(
                                 1.0 + i2pi / p.rate.c * (a1 * er[j] + p.rho * a2 * el[j]),
                                 "stationary_density");
            const double sign = ((k1 + k2) & 1) ? -1.0 : 1.0;
            F[static_cast<std::size_t>(k1) * n + k2] = sign * std::exp(rate_part + lam_part);
        }
    });
    detail::ifft2_inplace(F, n);
    DensityField field;
    field.grid = grid;
    field.values.resize(static_cast<std::size_t>(n) * n);
    const double scale = std::pow(grid.eta * n / two_pi, 2);
    for (int l1 = 0; l1 < n; ++l1)
        for (int l2 = 0; l2 < n; ++l2) {
            const double sign = ((l1 + l2) & 1) ? -1.0 : 1.0;
            field.values[static_cast<std::size_t>(l1) * n + l2] =
                sign * scale * F[static_cast<std::size_t>(l1) * n + l2].real();
        }
    const double neg = field.negative_mass() / field.mass();
    if (neg < -1e-3)
        throw numerical_error("stationary_density: grid too coarse (negative ringing mass)", -neg);
    return field;
}

// CSV export as (r, lambda, value) triples. Values are clipped at zero for
// plotting; the clipped mass is returned for the caller to report.
inline double write_density_csv(const DensityField& f, std::ostream& os, bool clip = true) {
    os << "r,lambda,value\n";
    double clipped = 0.0;
    const int n = f.grid.n;
    for (int ir = 0; ir < n; ++ir)
        for (int il = 0; il < n; ++il) {
            double v = f.value(ir, il);
            if (clip && v < 0.0) {
                clipped += -v;
                v = 0.0;
            }
            os << f.grid.coord(ir) << ',' << f.grid.coord(il) << ',' << v << '\n';
        }
    return clipped * f.cell();
}

}  // namespace cdxou
