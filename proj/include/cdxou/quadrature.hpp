#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "cdxou/errors.hpp"

namespace cdxou {

// Tolerances for the adaptive integrals (the double-gamma Levy density and
// the stationary characteristic function). Fixed-order Gauss-Legendre rules
// ignore these.
struct QuadraturePolicy {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    int max_depth = 60;
    double stationary_v_max = 100.0;  // truncation of the stationary-law integrals
};

namespace quad {

// Gauss-Legendre nodes/weights on [-1,1], computed once by Newton iteration.
template <int N>
struct GaussLegendre {
    std::array<double, N> x{};
    std::array<double, N> w{};

    GaussLegendre() {
        for (int i = 0; i < (N + 1) / 2; ++i) {
            // Chebyshev initial guess.
            double z = std::cos(M_PI * (i + 0.75) / (N + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (int j = 0; j < N; ++j) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
                }
                pp = N * (z * p0 - p1) / (z * z - 1.0);
                const double dz = p0 / pp;
                z -= dz;
                if (std::abs(dz) < 1e-15) break;
            }
            x[i] = -z;
            x[N - 1 - i] = z;
            w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
            w[N - 1 - i] = w[i];
        }
    }
};

inline const GaussLegendre<64>& gl64() {
    static const GaussLegendre<64> table;
    return table;
}

// Fixed 64-point Gauss-Legendre on [a,b].
template <typename F>
auto gauss_legendre_64(F&& f, double a, double b) -> decltype(f(a)) {
    using R = decltype(f(a));
    const auto& t = gl64();
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    R sum = R(0);
    for (int i = 0; i < 64; ++i) sum += t.w[i] * f(c + h * t.x[i]);
    return sum * h;
}

// QUADPACK G7-K15 pair.
inline constexpr std::array<double, 8> kGK15Nodes = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr std::array<double, 8> kGK15WeightsK = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr std::array<double, 4> kGK15WeightsG = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct PanelEstimate {
    double value;
    double error;
};

template <typename F>
PanelEstimate gk15(F&& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double fc = f(c);
    double kronrod = kGK15WeightsK[7] * fc;
    double gauss = kGK15WeightsG[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = h * kGK15Nodes[i];
        const double fsum = f(c - dx) + f(c + dx);
        kronrod += kGK15WeightsK[i] * fsum;
        if (i % 2 == 1) gauss += kGK15WeightsG[i / 2] * fsum;
    }
    kronrod *= h;
    gauss *= h;
    const double err = std::pow(200.0 * std::abs(kronrod - gauss), 1.5);
    return {kronrod, std::min(err, std::abs(kronrod - gauss) * 200.0)};
}

struct AdaptiveResult {
    double value;
    double error;
};

// Adaptive bisection driven by the G7/K15 discrepancy.
template <typename F>
AdaptiveResult integrate_adaptive(F&& f, double a, double b, const QuadraturePolicy& policy) {
    struct Segment {
        double a, b, value, error;
        int depth;
    };
    const PanelEstimate whole = gk15(f, a, b);
    std::vector<Segment> active{{a, b, whole.value, whole.error, 0}};
    double total = whole.value, total_err = whole.error;
    auto tol = [&](void) { return std::max(policy.abs_tol, policy.rel_tol * std::abs(total)); };
    while (total_err > tol()) {
        // Split the worst segment.
        std::size_t worst = 0;
        for (std::size_t i = 1; i < active.size(); ++i)
            if (active[i].error > active[worst].error) worst = i;
        Segment seg = active[worst];
        if (seg.depth >= policy.max_depth || seg.b - seg.a < 1e-300)
            throw numerical_error("adaptive quadrature failed to converge", total_err);
        const double mid = 0.5 * (seg.a + seg.b);
        const PanelEstimate left = gk15(f, seg.a, mid);
        const PanelEstimate right = gk15(f, mid, seg.b);
        total += left.value + right.value - seg.value;
        total_err += left.error + right.error - seg.error;
        active[worst] = {seg.a, mid, left.value, left.error, seg.depth + 1};
        active.push_back({mid, seg.b, right.value, right.error, seg.depth + 1});
    }
    return {total, total_err};
}

}  // namespace quad
}  // namespace cdxou
