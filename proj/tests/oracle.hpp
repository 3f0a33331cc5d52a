#pragma once

// High-precision reference values used only by the tests.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

#include <complex>

namespace oracle {

using Real = boost::multiprecision::cpp_bin_float_50;
using Complex = boost::multiprecision::cpp_complex_50;

/// e^{pi R/2} * int_0^inf exp(-y cosh t) cos(R t) dt by the trapezoid rule in 50 digits.
/// The integrand is entire and decays double-exponentially, so a fixed small step is
/// accurate far beyond double precision; the step is halved once as a self-check.
inline double kbessel_scaled(double R, double y, double* halving_gap = nullptr) {
    const Real r = R, x = y;
    const Real pi = boost::math::constants::pi<Real>();
    auto rule = [&](Real h) {
        Real sum = 0.5 * exp(-x);
        for (int k = 1;; ++k) {
            const Real t = h * k;
            const Real e = x * cosh(t);
            if (e > 140) break;
            sum += exp(-e) * cos(r * t);
        }
        return sum * h;
    };
    const Real coarse = rule(Real(0.02));
    const Real fine = rule(Real(0.01));
    const Real scale = exp(pi * r / 2);
    if (halving_gap) *halving_gap = static_cast<double>(abs(fine - coarse) * scale);
    return static_cast<double>(fine * scale);
}

/// log Gamma by upward recursion to |s+n| > 60 followed by Stirling, all in 50 digits.
inline std::complex<double> log_gamma(std::complex<double> s0) {
    Complex s(s0.real(), s0.imag());
    Complex shift = 0;
    while (abs(s) < 60 || s.real() < 0) {
        shift += log(s);
        s += 1;
    }
    const Real pi = boost::math::constants::pi<Real>();
    Complex res = (s - Real(0.5)) * log(s) - s + log(2 * pi) / 2;
    // Bernoulli B_2k / (2k(2k-1)) for k = 1..12
    const double num[12] = {1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730,
                            7.0 / 6, -3617.0 / 510, 43867.0 / 798, -174611.0 / 330,
                            854513.0 / 138, -236364091.0 / 2730};
    Complex zinv = Real(1) / s;
    Complex p = zinv;
    for (int k = 1; k <= 12; ++k) {
        res += Real(num[k - 1]) / Real(2 * k * (2 * k - 1)) * p;
        p *= zinv * zinv;
    }
    res -= shift;
    return {static_cast<double>(res.real()), static_cast<double>(res.imag())};
}

}  // namespace oracle
