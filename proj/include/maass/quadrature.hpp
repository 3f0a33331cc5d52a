#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <queue>
#include <type_traits>
#include <vector>

#include "maass/errors.hpp"

namespace maass {

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
template <typename Scalar>
struct GaussRule {
    std::vector<Scalar> nodes;
    std::vector<Scalar> weights;
};

template <typename Scalar = double>
GaussRule<Scalar> gauss_legendre(int n) {
    GaussRule<Scalar> rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const Scalar pi = std::numbers::pi_v<Scalar>;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        Scalar x = std::cos(pi * (i + Scalar(0.75)) / (n + Scalar(0.5)));
        Scalar dp = 0;
        for (int iter = 0; iter < 100; ++iter) {
            Scalar p0 = 1, p1 = x;
            for (int k = 2; k <= n; ++k) {
                Scalar p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1;
            dp = n * (x * p1 - p0) / (x * x - 1);
            Scalar dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 4 * std::numeric_limits<Scalar>::epsilon()) break;
        }
        // recompute derivative at the converged node
        Scalar p0 = 1, p1 = x;
        for (int k = 2; k <= n; ++k) {
            Scalar p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1);
        Scalar w = 2 / ((1 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0;
    return rule;
}

template <typename T>
struct QuadratureResult {
    T value{};
    double error = 0;
    std::size_t intervals = 0;
};

namespace detail {

inline constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename T>
double magnitude(const T& v) {
    return std::abs(v);
}

/// One 15-point Kronrod panel with the embedded 7-point Gauss estimate.
template <typename F>
auto kronrod15(F& f, double a, double b) {
    using T = std::decay_t<decltype(f(a))>;
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const T fc = f(c);
    T kronrod = fc * kKronrodWeights[7];
    T gauss = fc * kGaussWeights[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kKronrodNodes[j];
        const T f1 = f(c - dx);
        const T f2 = f(c + dx);
        kronrod += (f1 + f2) * kKronrodWeights[j];
        if (j % 2 == 1) gauss += (f1 + f2) * kGaussWeights[j / 2];
    }
    struct Panel {
        double a, b;
        T value;
        double error;
    };
    return Panel{a, b, kronrod * h, magnitude((kronrod - gauss) * h)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) quadrature with interval bisection.
///
/// Refines the panel with the largest error estimate until the summed estimate
/// drops below max(abs_tol, rel_tol * |I|). Works for real or complex integrands.
template <typename F>
auto integrate_adaptive(F&& f, double a, double b, double abs_tol, double rel_tol = 0.0,
                        std::size_t max_intervals = 10000) {
    using T = std::decay_t<decltype(f(a))>;
    using Panel = decltype(detail::kronrod15(f, a, b));
    auto cmp = [](const Panel& l, const Panel& r) { return l.error < r.error; };
    std::priority_queue<Panel, std::vector<Panel>, decltype(cmp)> heap(cmp);

    QuadratureResult<T> result;
    if (a == b) return result;

    Panel first = detail::kronrod15(f, a, b);
    T total = first.value;
    double err = first.error;
    heap.push(first);
    std::size_t count = 1;
    while (!(err <= std::max(abs_tol, rel_tol * detail::magnitude(total)))) {
        if (!std::isfinite(err)) throw ConvergenceError("adaptive quadrature: non-finite integrand");
        if (count >= max_intervals) {
            throw ConvergenceError("adaptive quadrature exceeded its subinterval budget");
        }
        Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            throw ConvergenceError("adaptive quadrature interval collapsed");
        }
        Panel left = detail::kronrod15(f, worst.a, mid);
        Panel right = detail::kronrod15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++count;
        if (heap.size() > 64 && (count & 63) == 0) {
            // resum to keep rounding from accumulating in the running totals
            auto copy = heap;
            T t{};
            double e = 0;
            while (!copy.empty()) {
                t += copy.top().value;
                e += copy.top().error;
                copy.pop();
            }
            total = t;
            err = e;
        }
    }
    result.value = total;
    result.error = err;
    result.intervals = count;
    return result;
}

}  // namespace maass
