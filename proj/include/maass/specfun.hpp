#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>
#include <complex>
#include <limits>
#include <numbers>

#include "maass/errors.hpp"

namespace maass {

namespace detail {

// B_{2k} for k = 1..10
template <typename Scalar>
inline constexpr Scalar kBernoulli[10] = {
    Scalar(1) / 6,     Scalar(-1) / 30,        Scalar(1) / 42,   Scalar(-1) / 30,
    Scalar(5) / 66,    Scalar(-691) / 2730,    Scalar(7) / 6,    Scalar(-3617) / 510,
    Scalar(43867) / 798, Scalar(-174611) / 330};

template <typename Scalar>
bool is_nonpositive_integer(const std::complex<Scalar>& s) {
    return s.imag() == 0 && s.real() <= 0 && s.real() == std::round(s.real());
}

}  // namespace detail

/// Principal branch of log Gamma(s): analytic on C minus (-inf, 0], real on (0, inf).
///
/// Upward shift to |z| >= 20, Re z >= 0, then Stirling with ten Bernoulli terms.
template <typename Scalar>
std::complex<Scalar> log_gamma(std::complex<Scalar> s) {
    using C = std::complex<Scalar>;
    if (detail::is_nonpositive_integer(s)) {
        throw PoleError("log_gamma: pole at a nonpositive integer");
    }
    C shift_sum(0, 0);
    C z = s;
    while (z.real() < 0 || std::abs(z) < Scalar(20)) {
        shift_sum += std::log(z);
        z += Scalar(1);
    }
    const Scalar half_log_2pi = Scalar(0.5) * std::log(2 * std::numbers::pi_v<Scalar>);
    C result = (z - Scalar(0.5)) * std::log(z) - z + half_log_2pi;
    const C zinv = Scalar(1) / z;
    const C zinv2 = zinv * zinv;
    C power = zinv;
    for (int k = 1; k <= 10; ++k) {
        result += detail::kBernoulli<Scalar>[k - 1] / Scalar(2 * k * (2 * k - 1)) * power;
        power *= zinv2;
    }
    return result - shift_sum;
}

/// Digamma psi(s) for complex s away from the poles.
template <typename Scalar>
std::complex<Scalar> digamma(std::complex<Scalar> s) {
    using C = std::complex<Scalar>;
    if (detail::is_nonpositive_integer(s)) {
        throw PoleError("digamma: pole at a nonpositive integer");
    }
    C shift_sum(0, 0);
    C z = s;
    while (z.real() < 0 || std::abs(z) < Scalar(20)) {
        shift_sum += Scalar(1) / z;
        z += Scalar(1);
    }
    const C zinv = Scalar(1) / z;
    const C zinv2 = zinv * zinv;
    C result = std::log(z) - Scalar(0.5) * zinv;
    C power = zinv2;
    for (int k = 1; k <= 10; ++k) {
        result -= detail::kBernoulli<Scalar>[k - 1] / Scalar(2 * k) * power;
        power *= zinv2;
    }
    return result - shift_sum;
}

/// K_{iR}(y) together with the e^{pi R/2}-scaled value that every accuracy
/// contract in this library is stated against.
struct KBesselValue {
    double value = 0;       ///< K_{iR}(y); exactly 0 when it underflows
    double scaled = 0;      ///< e^{pi R/2} K_{iR}(y)
    bool underflow = false;  ///< true when `value` underflowed to 0
};

/// K-Bessel function of purely imaginary order iR at y > 0.
///
/// Absolute error of `scaled` is below eps (eps in (0, 1e-3]). Three regimes:
/// steepest-descent quadrature for y >= R, a long-double power series for
/// y < R with y <= 20, and a shifted-contour trapezoid rule beyond that.
KBesselValue kbessel_i_order(double R, double y, double eps = 1e-12);

/// e^{pi R/2} K_{iR}(y); the form used internally by the locator and L-functions.
double kbessel_scaled(double R, double y, double eps = 1e-13);

/// Piecewise Chebyshev interpolant of e^{pi R/2} K_{iR}(y) in log y for one R.
///
/// Built once per spectral parameter and then read-only; every panel is split
/// until its trailing coefficients fall below `tol` (absolute, scaled units).
/// Arguments above the cutoff where the scaled value drops below 1e-20 map to 0.
class KBesselTable {
public:
    KBesselTable(double R, double y_lo, double y_hi, double tol = 1e-13);

    double operator()(double y) const;

    double R() const { return R_; }
    double y_lo() const { return y_lo_; }
    double y_cut() const { return y_cut_; }
    std::size_t panels() const { return panels_.size(); }

    static constexpr int kDegree = 24;

private:
    struct Panel {
        double a = 0, b = 0;  // interval in log y
        std::array<double, kDegree> coeff{};
    };
    Panel fit(double a, double b) const;

    double R_;
    double y_lo_;
    double y_cut_;
    std::vector<Panel> panels_;
    std::vector<double> breaks_;
};

/// sqrt(pi/(2y)) e^{-y} e^{pi R/2}: truncation bound for y > 2R (throws otherwise).
double kbessel_decay_bound(double R, double y);

/// Same formula as kbessel_decay_bound without the y > 2R precondition.
double kbessel_decay_estimate(double R, double y);

/// log G(s) with G(s) = 2^{s-2} Gamma((s+iR)/2) Gamma((s-iR)/2).
std::complex<double> log_g_factor(std::complex<double> s, double R);

/// G(s) = int_0^inf K_{iR}(y) y^{s-1} dy in closed form.
std::complex<double> g_factor(std::complex<double> s, double R);

/// int_{y_lo}^{y_hi} K_{iR}(y) y^{w-1} dy.
struct BesselMoment {
    double R = 0;
    std::complex<double> w;
    double y_lo = 0;
    double y_hi = 0;
    std::complex<double> value;   ///< unscaled integral
    std::complex<double> scaled;  ///< e^{pi R/2} times the integral
};

/// Adaptive Gauss-Kronrod evaluation of the incomplete Bessel moment.
///
/// y_hi may be +infinity (truncated through the decay bound); y_lo may be 0
/// when Re w > 0. Error on `scaled` is at most max(eps, 1e-14 |scaled|). Throws ConvergenceError
/// when the subinterval budget is exhausted.
BesselMoment bessel_moment(double R, std::complex<double> w, double y_lo, double y_hi,
                           double eps = 1e-10);

/// Number of positive divisors of n (n >= 1).
int divisor_count(long n);

}  // namespace maass
