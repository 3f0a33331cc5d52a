#pragma once

#include <complex>
#include <string>
#include <vector>

#include "maass/locator.hpp"

namespace maass {

/// L-function of a Maass form with the evaluation parameters.
///
/// epsilon is the sign in xi(s) = epsilon xi(1 - s); with our Fricke labelling it
/// equals form.symmetry.root_number().
struct LFunctionSpec {
    MaassForm form;
    int a = 0;
    int epsilon = 1;
    double Delta = 0;  ///< 0 selects 1/sqrt(N)
    int m_max = 0;     ///< 0 picks the truncation from the tail bound at each s

    static LFunctionSpec from_form(const MaassForm& form);
};

/// Panel quadrature for xi(s), built once per spec.
///
/// xi(s) = N^{s/2-1/4} (2 pi)^{-s} L(s) G(s+a) is evaluated by the two partial
/// summed series, each panel integral of K_{iR}(u) u^{w-1} done by composite
/// Gauss-Legendre on cached K values. Every value carries the factor e^{pi R/2}.
class LFunction {
public:
    explicit LFunction(const LFunctionSpec& spec);

    const LFunctionSpec& spec() const { return spec_; }

    /// e^{pi R/2} xi(s). WindowError outside |Re s - 1/2| <= 4, |Im s| <= min(20, R) + 2;
    /// PrecisionError when the tail bound needs coefficients past form.M().
    std::complex<double> lambda(std::complex<double> s) const;

    /// L(s) itself: lambda divided by the gamma factor.
    std::complex<double> l_value(std::complex<double> s) const;

    /// Real rotation of xi on the critical line with |Z(t)| = |L(1/2 + it)|.
    /// `imag_leak` receives the discarded imaginary part.
    double z(double t, double* imag_leak = nullptr) const;

    /// Truncation index chosen at s, and the d(n) tail bound it reaches.
    int truncation(std::complex<double> s, double* bound = nullptr) const;

    /// Panel integral of K_{iR}(u) u^{w-1} (scaled) from the cache; series 0 or 1.
    std::complex<double> panel_moment(int series, int m, std::complex<double> w) const;
    double panel_lo(int series, int m) const { return step_[series] * m; }

    double t_window() const;

private:
    struct Panel {
        std::vector<double> log_u;
        std::vector<double> weight;  // quadrature weight times scaled K
    };
    double tail_bound(int m, double sigma) const;

    LFunctionSpec spec_;
    double step_[2];                    // panel width for the two series
    std::vector<Panel> panels_[2];      // index m - 1
};

/// Convenience wrappers constructing an LFunction each call.
std::complex<double> completed_lambda(const LFunctionSpec& spec, std::complex<double> s);
double z_function(const LFunctionSpec& spec, double t);

enum class CriticalKind { Value, Derivative };

struct CriticalValue {
    double value = 0;
    CriticalKind kind = CriticalKind::Value;
};

/// |Z(0)| when epsilon = +1, otherwise Z'(0) by a five-point difference with the given step.
CriticalValue critical_value(const LFunction& lf, double step = 1e-3);
CriticalValue critical_value(const LFunctionSpec& spec);

struct ZeroSearch {
    std::vector<double> zeros;
    /// grid points where |Z| has a local minimum below 1e-5 without a sign change
    std::vector<double> tangential;
};

/// Sign changes of Z on (0, t_max], each bisected 30 times after grid bracketing.
ZeroSearch find_zeros(const LFunction& lf, double t_max, double grid_step = 0.02);

struct ZGrid {
    std::int64_t level = 1;
    double R = 0;
    SymmetryType symmetry;
    int epsilon = 1;
    std::vector<double> t;
    std::vector<double> Z;
    double max_imag_leak = 0;
    std::vector<double> zeros;
    std::vector<double> tangential;
    double critical_value = 0;
    CriticalKind critical_kind = CriticalKind::Value;
};

/// Samples of Z on [0, t_max] together with zeros and the critical value.
/// t_max <= 0 selects min(20, R).
ZGrid z_grid(const LFunctionSpec& spec, double t_max = 0, double grid_step = 0.02);

/// Mean density of critical zeros at height t from the argument principle:
/// (1/2 pi) [log(N / pi^2) + Re psi((1/2 + a + i(t + R))/2) + Re psi((1/2 + a + i(t - R))/2)].
double zero_density(std::int64_t N, double R, int a, double t);

/// Integral of zero_density over [0, T].
double zero_count_estimate(std::int64_t N, double R, int a, double T);

std::string to_string(CriticalKind kind);

}  // namespace maass
