#include "maass/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "maass/quadrature.hpp"

namespace maass {

namespace {

constexpr double kPi = std::numbers::pi;

/// log(sinh x) for x > 0 without overflow.
long double log_sinh(long double x) {
    if (x > 20) return x + std::log1p(-std::exp(-2 * x)) - std::log(2.0L);
    return std::log(std::sinh(x));
}

/// sinh(u) - u, accurate for small u.
double sinh_minus_identity(double u) {
    if (std::abs(u) < 0.5) {
        const double u2 = u * u;
        // u^3/3! + u^5/5! + ... through u^15
        double term = u * u2 / 6.0;
        double sum = term;
        for (int k = 2; k <= 7; ++k) {
            term *= u2 / ((2.0 * k) * (2.0 * k + 1.0));
            sum += term;
        }
        return sum;
    }
    return std::sinh(u) - u;
}

/// Power series through I_{+-iR}, evaluated in long double (y < R, y <= 20).
/// Returns e^{pi R/2} K_{iR}(y).
double kbessel_series(double R, double y) {
    using LD = long double;
    using CLD = std::complex<LD>;
    const LD pi = std::numbers::pi_v<LD>;
    const LD r = R;
    const LD x = y;
    const CLD lg = log_gamma<LD>(CLD(1, r));
    const CLD log_prefactor =
        CLD(std::log(pi) + pi * r / 2 - log_sinh(pi * r), r * std::log(x / 2)) - lg;
    const CLD prefactor = std::exp(log_prefactor);

    const LD q = x * x / 4;
    CLD term(1, 0);
    CLD sum(1, 0);
    LD biggest = 1;
    for (int k = 1; k < 2000; ++k) {
        term *= q / (LD(k) * CLD(k, r));
        sum += term;
        const LD mag = std::abs(term);
        biggest = std::max(biggest, mag);
        if (k > x && mag < 1e-22L * biggest) break;
    }
    return static_cast<double>(-(prefactor * sum).imag());
}

struct ScaledLog {
    double integral;  // integral normalised by exp(peak)
    double peak;      // log of the scaled integrand maximum
};

/// Steepest-descent path through the saddle i*asin(R/y), valid for y >= R.
/// K_{iR}(y) = int_0^inf exp(-y cosh u cos v(u) - R v(u)) du,
/// sin v(u) = (R/y) u / sinh u. The integrand is positive.
ScaledLog kbessel_steepest(double R, double y, double eps) {
    const double rho = R / y;
    const double one_minus_rho = (y - R) / y;
    const double theta0 = std::asin(std::min(1.0, rho));
    const double e0 = -y * std::cos(theta0) - R * theta0;

    auto exponent = [&](double u) {
        if (u == 0) return e0;
        const double sh = std::sinh(u);
        const double q = u / sh;
        const double one_minus_q = sinh_minus_identity(u) / sh;
        const double sin_v = rho * q;
        const double cos_sq = one_minus_rho * (1 + rho) + rho * rho * one_minus_q * (1 + q);
        const double cos_v = std::sqrt(std::max(0.0, cos_sq));
        const double v = std::atan2(sin_v, cos_v);
        return -y * std::cosh(u) * cos_v - R * v;
    };

    double upper = std::acosh(std::max(1.0, (y * std::cos(theta0) + R * theta0 + 50.0) / y));
    upper = std::max(upper, 1e-3);
    while (exponent(upper) - e0 > -50.0) upper *= 1.25;

    auto integrand = [&](double u) { return std::exp(exponent(u) - e0); };
    if (rho > 0.9) {
        // branch points of asin approach u = 0 near the turning point
        const double rel = std::clamp(eps * 1e-2, 1e-14, 1e-10);
        return {integrate_adaptive(integrand, 0.0, upper, 1e-300, rel).value, e0 + kPi * R / 2};
    }
    // Even, analytic in a strip around the real axis: the trapezoid rule
    // converges geometrically, so halve h until successive sums agree.
    // exponent rounding grows like eps_machine * y
    const double tol = std::clamp(eps * 1e-3, 1e-15 + 2e-16 * (y + R), 1e-11);
    double h = std::min(0.25, upper / 8);
    long n = static_cast<long>(std::ceil(upper / h));
    double sum = 0.5 * integrand(0.0);
    for (long k = 1; k <= n; ++k) sum += integrand(k * h);
    double estimate = sum * h;
    for (int level = 0;; ++level) {
        if (level == 20) throw ConvergenceError("kbessel: steepest-descent rule did not settle");
        h *= 0.5;
        n *= 2;
        for (long k = 1; k <= n; k += 2) sum += integrand(k * h);
        const double next = sum * h;
        const double diff = std::abs(next - estimate);
        estimate = next;
        if (level >= 1 && diff <= tol * estimate) break;
    }
    struct { double value; } res{estimate};
    return {res.value, e0 + kPi * R / 2};
}

/// Trapezoid rule along Im t = theta for the full-line integral
/// 2 K_{iR}(y) = int exp(-y cosh t + i R t) dt, with theta chosen so the
/// integrand modulus exceeds the answer by at most e^{4.6}.
double kbessel_contour(double R, double y, double eps) {
    auto g = [&](double th) { return -y * std::cos(th) - R * th; };
    // g decreases on [0, theta*] where theta* = asin(min(1, R/y))
    const double theta_star = std::asin(std::min(1.0, R / y));
    const double g_min = g(theta_star);
    const double allowance = 4.6;
    double lo = 0, hi = theta_star;
    if (g(0) <= g_min + allowance) {
        hi = 0;
    } else {
        for (int i = 0; i < 80; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (g(mid) <= g_min + allowance) hi = mid; else lo = mid;
        }
    }
    const double theta = hi;
    const double ct = std::cos(theta), st = std::sin(theta);
    const double shift = kPi * R / 2;
    // cutoff where the modulus has dropped by e^{-45} from its peak at u = 0
    const double decay = std::max(y * ct, 1e-300);
    const double upper = std::acosh(1 + 45.0 / decay + 1e-12) + 0.5;

    auto f = [&](double u) {
        const double re = -y * std::cosh(u) * ct - R * theta + shift;
        const double im = -y * std::sinh(u) * st + R * u;
        return std::exp(re) * std::cos(im);  // real part only; imaginary part integrates to 0
    };

    // rounding floor set by the peak modulus of the integrand
    const double noise = 1e-15 * std::max(1.0, std::exp(-y * ct - R * theta + shift));
    double h = std::min(0.25, 1.0 / (1 + R));
    auto trapezoid = [&](double step, bool odd_only) {
        double s = 0;
        const long n = static_cast<long>(std::ceil(upper / step));
        for (long k = -n; k <= n; ++k) {
            if (odd_only && (k % 2 == 0)) continue;
            s += f(k * step);
        }
        return s;
    };
    double sum = trapezoid(h, false);
    double estimate = sum * h;
    for (int level = 0; level < 16; ++level) {
        h *= 0.5;
        sum += trapezoid(h, true);
        const double next = sum * h;
        const double diff = std::abs(next - estimate);
        estimate = next;
        if (diff < std::max(eps * 1e-2, noise) && level >= 1) break;
    }
    return 0.5 * estimate;
}

}  // namespace

KBesselValue kbessel_i_order(double R, double y, double eps) {
    if (!(y > 0)) throw DomainError("kbessel_i_order: y must be positive");
    if (!(R >= 0) || !std::isfinite(R)) throw DomainError("kbessel_i_order: R must be finite and >= 0");
    if (!(eps > 0) || eps > 1e-3) throw PreconditionError("kbessel_i_order: eps must lie in (0, 1e-3]");

    KBesselValue out;
    const double shift = kPi * R / 2;
    if (y >= R) {
        const ScaledLog s = kbessel_steepest(R, y, eps);
        const double log_scaled = s.peak + std::log(s.integral);
        const double log_value = log_scaled - shift;
        out.scaled = log_scaled < -745 ? 0.0 : std::exp(log_scaled);
        if (log_value < -745) {
            out.value = 0;
            out.underflow = true;
        } else {
            out.value = std::exp(log_value);
        }
        return out;
    }
    if (R < 1e-3) {
        // y < R < 1e-3: cosh integral has no cancellation worth the name
        auto f = [&](double t) { return std::exp(-y * std::cosh(t)) * std::cos(R * t); };
        const double upper = std::acosh(50.0 / y + 1);
        out.scaled = std::exp(shift) * integrate_adaptive(f, 0.0, upper, 1e-300, 1e-14).value;
    } else if (y <= 20) {
        out.scaled = kbessel_series(R, y);
    } else {
        out.scaled = kbessel_contour(R, y, eps);
    }
    out.value = out.scaled * std::exp(-shift);
    out.underflow = out.value == 0 && out.scaled != 0;
    return out;
}

double kbessel_scaled(double R, double y, double eps) {
    return kbessel_i_order(R, y, eps).scaled;
}

KBesselTable::KBesselTable(double R, double y_lo, double y_hi, double tol) : R_(R), y_lo_(y_lo) {
    if (!(y_lo > 0) || !(y_hi > y_lo)) throw PreconditionError("KBesselTable: need 0 < y_lo < y_hi");
    // beyond y_cut the scaled value is below 1e-20 (decay estimate overshoots K)
    double cut = std::max(2 * R + 1, y_lo);
    while (kbessel_decay_estimate(R, cut) > 1e-20) cut += 1;
    y_cut_ = std::min(y_hi, cut);
    if (y_cut_ <= y_lo_) {
        y_cut_ = y_lo_;
        return;
    }
    const double u_lo = std::log(y_lo_);
    const double u_hi = std::log(y_cut_);
    const double width = std::min(0.5, 4.0 / (1 + R));
    const int initial = std::max(1, static_cast<int>(std::ceil((u_hi - u_lo) / width)));
    std::vector<std::pair<double, double>> todo;
    for (int i = initial - 1; i >= 0; --i) {
        todo.emplace_back(u_lo + (u_hi - u_lo) * i / initial,
                          i + 1 == initial ? u_hi : u_lo + (u_hi - u_lo) * (i + 1) / initial);
    }
    while (!todo.empty()) {
        auto [a, b] = todo.back();
        todo.pop_back();
        Panel p = fit(a, b);
        const double tail = std::abs(p.coeff[kDegree - 1]) + std::abs(p.coeff[kDegree - 2]) +
                            std::abs(p.coeff[kDegree - 3]);
        if (tail > tol && b - a > 1e-3) {
            const double mid = 0.5 * (a + b);
            todo.emplace_back(mid, b);
            todo.emplace_back(a, mid);
            continue;
        }
        panels_.push_back(p);
        breaks_.push_back(b);
    }
}

KBesselTable::Panel KBesselTable::fit(double a, double b) const {
    Panel p;
    p.a = a;
    p.b = b;
    constexpr int n = kDegree;
    std::array<double, n> values{};
    for (int j = 0; j < n; ++j) {
        const double x = std::cos(kPi * (j + 0.5) / n);
        const double u = 0.5 * (a + b) + 0.5 * (b - a) * x;
        values[j] = kbessel_scaled(R_, std::exp(u), 1e-14);
    }
    for (int k = 0; k < n; ++k) {
        double s = 0;
        for (int j = 0; j < n; ++j) s += values[j] * std::cos(kPi * k * (j + 0.5) / n);
        p.coeff[k] = (k == 0 ? 1.0 : 2.0) * s / n;
    }
    return p;
}

double KBesselTable::operator()(double y) const {
    if (y >= y_cut_) return 0.0;
    if (y < y_lo_) return kbessel_scaled(R_, y);
    const double u = std::log(y);
    auto it = std::lower_bound(breaks_.begin(), breaks_.end(), u);
    if (it == breaks_.end()) --it;
    const Panel& p = panels_[static_cast<std::size_t>(it - breaks_.begin())];
    const double x = (2 * u - p.a - p.b) / (p.b - p.a);
    // Clenshaw
    double b1 = 0, b2 = 0;
    for (int k = kDegree - 1; k >= 1; --k) {
        const double b0 = 2 * x * b1 - b2 + p.coeff[k];
        b2 = b1;
        b1 = b0;
    }
    return x * b1 - b2 + p.coeff[0];
}

double kbessel_decay_estimate(double R, double y) {
    return std::sqrt(kPi / (2 * y)) * std::exp(-y + kPi * R / 2);
}

double kbessel_decay_bound(double R, double y) {
    if (!(y > std::max(2 * R, 0.0))) {
        throw PreconditionError("kbessel_decay_bound: requires y > 2R");
    }
    return kbessel_decay_estimate(R, y);
}

std::complex<double> log_g_factor(std::complex<double> s, double R) {
    using C = std::complex<double>;
    const C ir(0, R);
    const C z1 = (s + ir) / 2.0;
    const C z2 = (s - ir) / 2.0;
    if (detail::is_nonpositive_integer(z1) || detail::is_nonpositive_integer(z2)) {
        throw PoleError("g_factor: (s +- iR)/2 is a pole of Gamma");
    }
    return (s - 2.0) * std::log(2.0) + log_gamma(z1) + log_gamma(z2);
}

std::complex<double> g_factor(std::complex<double> s, double R) {
    return std::exp(log_g_factor(s, R));
}

BesselMoment bessel_moment(double R, std::complex<double> w, double y_lo, double y_hi,
                           double eps) {
    using C = std::complex<double>;
    if (!(eps > 0)) throw PreconditionError("bessel_moment: eps must be positive");
    if (!(y_lo >= 0) || !(y_hi >= y_lo)) {
        throw PreconditionError("bessel_moment: requires 0 <= y_lo <= y_hi");
    }
    BesselMoment out;
    out.R = R;
    out.w = w;
    out.y_lo = y_lo;
    out.y_hi = y_hi;
    if (y_lo == y_hi) return out;

    const double sigma = w.real() - 1;
    double lo = y_lo;
    double hi = y_hi;
    if (std::isinf(hi)) {
        hi = std::max(2 * R + 5, lo + 1);
        while (kbessel_decay_estimate(R, hi) * std::pow(hi, sigma) * (1 + hi) > eps * 1e-3) hi *= 1.1;
        hi = std::max(hi, lo);
    }
    if (lo == 0) {
        if (!(w.real() > 0)) throw PreconditionError("bessel_moment: y_lo = 0 needs Re w > 0");
        // |K| <= scaled bound ~ 1 near 0 in scaled units; drop [0, lo] below eps
        lo = std::pow(eps * 1e-3 * w.real(), 1.0 / w.real());
        lo = std::min(lo, 0.5 * hi);
    }
    const double kernel_eps = std::clamp(eps * 1e-3, 1e-15, 1e-12);
    auto scaled_k = [&](double y) { return kbessel_scaled(R, y, kernel_eps); };

    C total(0, 0);
    // log variable below 1, where K oscillates in log y
    const double split = std::clamp(1.0, lo, hi);
    const double tol = eps * 0.25;
    // below this relative size the error estimate is rounding noise
    constexpr double kRelFloor = 1e-14;
    if (lo < split) {
        auto g = [&](double u) {
            const double y = std::exp(u);
            return scaled_k(y) * std::exp(w * u);
        };
        total += integrate_adaptive(g, std::log(lo), std::log(split), tol, kRelFloor).value;
    }
    if (split < hi) {
        auto f = [&](double y) { return scaled_k(y) * std::pow(C(y, 0), w - 1.0); };
        total += integrate_adaptive(f, split, hi, tol, kRelFloor).value;
    }
    out.scaled = total;
    out.value = total * std::exp(-kPi * R / 2);
    return out;
}

int divisor_count(long n) {
    if (n < 1) throw DomainError("divisor_count: n must be positive");
    int count = 0;
    for (long d = 1; d * d <= n; ++d) {
        if (n % d == 0) count += (d * d == n) ? 1 : 2;
    }
    return count;
}

}  // namespace maass
