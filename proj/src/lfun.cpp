#include "maass/lfun.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "maass/quadrature.hpp"
#include "maass/specfun.hpp"

namespace maass {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2 * kPi;
constexpr double kTailTarget = 1e-8;
constexpr int kNodes = 20;

using C = std::complex<double>;

// bound on int_Y^inf |e^{pi R/2} K_{iR}(u)| u^{sw-1} du from the large-y estimate
double moment_tail(double R, double Y, double sw) {
    const double p = sw - 1.5;
    if (p > 0 && Y <= 2 * p) return HUGE_VAL;
    const double shrink = p > 0 ? 1 - p / Y : 1;
    return kbessel_decay_estimate(R, Y) * std::pow(Y, sw - 1) / shrink;
}

}  // namespace

LFunctionSpec LFunctionSpec::from_form(const MaassForm& form) {
    LFunctionSpec spec;
    spec.form = form;
    spec.a = form.symmetry.a();
    spec.epsilon = form.symmetry.root_number();
    spec.Delta = 1 / std::sqrt(static_cast<double>(form.level));
    return spec;
}

LFunction::LFunction(const LFunctionSpec& spec) : spec_(spec) {
    const auto& form = spec_.form;
    if (form.M() < 1) throw PreconditionError("L-function needs the form's coefficients");
    if (spec_.Delta <= 0) spec_.Delta = 1 / std::sqrt(static_cast<double>(form.level));
    if (spec_.m_max > form.M()) {
        throw PrecisionError("m_max exceeds the computed coefficients; recompute with larger M");
    }
    const double N = static_cast<double>(form.level);
    const double R = form.R;
    step_[0] = kTwoPi * spec_.Delta;
    step_[1] = kTwoPi / (N * spec_.Delta);
    // Coefficients past form.reliable are still usable here: the error of a_n scales
    // like 1/K(2 pi n y0) while its weight in xi is K(2 pi n Delta), and Delta > y0.
    const int m_cap = form.M();

    const double y_lo = 0.999 * std::min(step_[0], step_[1]);
    const double y_hi = 1.001 * std::max(step_[0], step_[1]) * (m_cap + 1);
    const KBesselTable kt(R, y_lo, y_hi);
    const auto rule = gauss_legendre<double>(kNodes);
    // phase of K_{iR}(u) u^{it} across a piece stays near R log(b/a) + t log(b/a)
    const double freq = R + t_window() + 5;
    for (int series = 0; series < 2; ++series) {
        panels_[series].resize(m_cap);
        for (int m = 1; m <= m_cap; ++m) {
            const double a = step_[series] * m, b = step_[series] * (m + 1);
            const double phase = freq * std::log(b / a) + (b - a);
            const int pieces = std::max(1, static_cast<int>(std::ceil(phase / 1.5)));
            Panel& panel = panels_[series][m - 1];
            for (int k = 0; k < pieces; ++k) {
                const double lo = a + (b - a) * k / pieces, hi = a + (b - a) * (k + 1) / pieces;
                const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
                for (int j = 0; j < kNodes; ++j) {
                    const double u = c + h * rule.nodes[j];
                    const double kv = kt(u);
                    if (kv == 0) continue;
                    panel.log_u.push_back(std::log(u));
                    panel.weight.push_back(h * rule.weights[j] * kv);
                }
            }
        }
    }
}

double LFunction::t_window() const { return std::min(20.0, spec_.form.R) + 2; }

C LFunction::panel_moment(int series, int m, C w) const {
    const Panel& panel = panels_[series].at(m - 1);
    C sum = 0;
    const C e = w - 1.0;
    for (std::size_t j = 0; j < panel.log_u.size(); ++j) sum += panel.weight[j] * std::exp(e * panel.log_u[j]);
    return sum;
}

double LFunction::tail_bound(int m, double sigma) const {
    const auto& form = spec_.form;
    const double N = static_cast<double>(form.level);
    const double R = form.R;
    const double a = spec_.a;
    auto coef = [&](long n) {
        if (n <= form.M()) return std::abs(form.coeffs[n - 1].real());
        return static_cast<double>(divisor_count(n));
    };
    const double pre[2] = {std::pow(kTwoPi, -sigma) * std::pow(N, sigma / 2 - 0.25),
                           std::pow(N, 0.5 - sigma) * std::pow(kTwoPi, sigma - 1) * std::pow(N, sigma / 2 - 0.25)};
    const double expo[2] = {-sigma, sigma - 1};
    const double sw[2] = {sigma + a, a - sigma + 1};
    double total = 0;
    for (int series = 0; series < 2; ++series) {
        double partial = 0;
        for (long n = 1; n <= m; ++n) partial += coef(n) * std::pow(static_cast<double>(n), expo[series]);
        double bound = partial * moment_tail(R, step_[series] * (m + 1), sw[series]);
        // terms n > m enter through their own lower limits
        for (long n = m + 1;; ++n) {
            const double term = coef(n) * std::pow(static_cast<double>(n), expo[series]) *
                                moment_tail(R, step_[series] * n, sw[series]);
            bound += term;
            if (term < 1e-6 * kTailTarget || n > m + 100000) break;
        }
        total += pre[series] * bound;
    }
    return total;
}

int LFunction::truncation(C s, double* bound) const {
    if (spec_.m_max > 0) {
        if (bound) *bound = tail_bound(spec_.m_max, s.real());
        return spec_.m_max;
    }
    for (int m = 1; m <= spec_.form.M(); ++m) {
        const double b = tail_bound(m, s.real());
        if (b < kTailTarget) {
            if (bound) *bound = b;
            return m;
        }
    }
    throw PrecisionError("L-function tail bound needs coefficients beyond a_" +
                         std::to_string(spec_.form.M()) + "; recompute the form with larger M");
}

C LFunction::lambda(C s) const {
    if (std::abs(s.real() - 0.5) > 4 || std::abs(s.imag()) > t_window()) {
        throw WindowError("s outside the supported evaluation window");
    }
    const auto& form = spec_.form;
    const double N = static_cast<double>(form.level);
    const int m_max = truncation(s);
    const double a = spec_.a;
    C S1 = 0, S2 = 0, sum1 = 0, sum2 = 0;
    for (int m = 1; m <= m_max; ++m) {
        const double an = form.coeffs[m - 1].real();
        const double ln = std::log(static_cast<double>(m));
        S1 += an * std::exp(-s * ln);
        S2 += an * std::exp((s - 1.0) * ln);
        sum1 += S1 * panel_moment(0, m, s + a);
        sum2 += S2 * panel_moment(1, m, a - s + 1.0);
    }
    const double lN = std::log(N), l2p = std::log(kTwoPi);
    const C big = std::exp(-s * l2p) * sum1 +
                  double(spec_.epsilon) * std::exp((0.5 - s) * lN + (s - 1.0) * l2p) * sum2;
    return std::exp((s / 2.0 - 0.25) * lN) * big;
}

C LFunction::l_value(C s) const {
    const auto& form = spec_.form;
    const double lN = std::log(static_cast<double>(form.level));
    const C log_gamma_factor = (s / 2.0 - 0.25) * lN - s * std::log(kTwoPi) +
                               log_g_factor(s + double(spec_.a), form.R) + kPi * form.R / 2;
    return lambda(s) / std::exp(log_gamma_factor);
}

double LFunction::z(double t, double* imag_leak) const {
    const C s(0.5, t);
    C rotated = lambda(s);
    if (spec_.epsilon != 1) rotated *= C(0, -1);
    const double log_norm = -0.5 * std::log(kTwoPi) + log_g_factor(s + double(spec_.a), spec_.form.R).real() +
                            kPi * spec_.form.R / 2;
    const double norm = std::exp(log_norm);
    if (imag_leak) *imag_leak = std::abs(rotated.imag()) / norm;
    return rotated.real() / norm;
}

std::complex<double> completed_lambda(const LFunctionSpec& spec, std::complex<double> s) {
    return LFunction(spec).lambda(s);
}

double z_function(const LFunctionSpec& spec, double t) { return LFunction(spec).z(t); }

CriticalValue critical_value(const LFunction& lf, double step) {
    if (lf.spec().epsilon == 1) return {std::abs(lf.z(0)), CriticalKind::Value};
    const double h = step;
    const double d = (8 * (lf.z(h) - lf.z(-h)) - (lf.z(2 * h) - lf.z(-2 * h))) / (12 * h);
    return {d, CriticalKind::Derivative};
}

CriticalValue critical_value(const LFunctionSpec& spec) { return critical_value(LFunction(spec)); }

namespace {

ZeroSearch zeros_from_samples(const LFunction& lf, const std::vector<double>& t, const std::vector<double>& z) {
    ZeroSearch out;
    for (std::size_t k = 0; k + 1 < t.size(); ++k) {
        if (z[k] == 0 && t[k] > 0) {
            out.zeros.push_back(t[k]);
            continue;
        }
        if ((z[k] < 0) == (z[k + 1] < 0) || z[k + 1] == 0) continue;
        double lo = t[k], hi = t[k + 1], zlo = z[k];
        for (int it = 0; it < 30; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double zm = lf.z(mid);
            if ((zm < 0) == (zlo < 0)) {
                lo = mid;
                zlo = zm;
            } else {
                hi = mid;
            }
        }
        out.zeros.push_back(0.5 * (lo + hi));
    }
    for (std::size_t k = 1; k + 1 < t.size(); ++k) {
        const double m = std::abs(z[k]);
        if (t[k] <= 0 || m >= 1e-5 || m > std::abs(z[k - 1]) || m > std::abs(z[k + 1])) continue;
        if ((z[k - 1] < 0) == (z[k] < 0) && (z[k + 1] < 0) == (z[k] < 0)) out.tangential.push_back(t[k]);
    }
    return out;
}

std::vector<double> grid(const LFunction& lf, double t_max, double step) {
    std::vector<double> t;
    const int n = static_cast<int>(std::ceil(t_max / step - 1e-9));
    // for epsilon = -1 the forced zero at 0 is skipped by starting one step out
    for (int k = lf.spec().epsilon == 1 ? 0 : 1; k <= n; ++k) t.push_back(std::min(k * step, t_max));
    return t;
}

}  // namespace

ZeroSearch find_zeros(const LFunction& lf, double t_max, double grid_step) {
    const auto t = grid(lf, t_max, grid_step);
    std::vector<double> z(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) z[k] = lf.z(t[k]);
    return zeros_from_samples(lf, t, z);
}

ZGrid z_grid(const LFunctionSpec& spec, double t_max, double grid_step) {
    const LFunction lf(spec);
    if (t_max <= 0) t_max = std::min(20.0, spec.form.R);
    ZGrid out;
    out.level = spec.form.level;
    out.R = spec.form.R;
    out.symmetry = spec.form.symmetry;
    out.epsilon = spec.epsilon;
    out.t = grid(lf, t_max, grid_step);
    if (spec.epsilon != 1) out.t.insert(out.t.begin(), 0.0);
    out.Z.resize(out.t.size());
    for (std::size_t k = 0; k < out.t.size(); ++k) {
        double leak = 0;
        out.Z[k] = lf.z(out.t[k], &leak);
        out.max_imag_leak = std::max(out.max_imag_leak, leak);
    }
    const std::size_t skip = spec.epsilon != 1 ? 1 : 0;
    const std::vector<double> t(out.t.begin() + skip, out.t.end()), z(out.Z.begin() + skip, out.Z.end());
    auto found = zeros_from_samples(lf, t, z);
    out.zeros = std::move(found.zeros);
    out.tangential = std::move(found.tangential);
    const CriticalValue cv = critical_value(lf);
    out.critical_value = cv.value;
    out.critical_kind = cv.kind;
    return out;
}

double zero_density(std::int64_t N, double R, int a, double t) {
    const C p = digamma(C(0.5 + a, t + R) / 2.0), m = digamma(C(0.5 + a, t - R) / 2.0);
    return (std::log(static_cast<double>(N) / (kPi * kPi)) + p.real() + m.real()) / kTwoPi;
}

double zero_count_estimate(std::int64_t N, double R, int a, double T) {
    return integrate_adaptive([&](double t) { return zero_density(N, R, a, t); }, 0, T, 1e-10, 1e-12).value;
}

std::string to_string(CriticalKind kind) { return kind == CriticalKind::Value ? "L(1/2)" : "L'(1/2)"; }

}  // namespace maass
