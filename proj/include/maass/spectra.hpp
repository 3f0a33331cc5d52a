#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "maass/lfun.hpp"
#include "maass/locator.hpp"

namespace maass {

struct SpectrumEntry {
    double R = 0;
    SymmetryType symmetry;
    bool is_oldform = false;

    double lambda() const { return 0.25 + R * R; }
};

struct Spectrum {
    std::int64_t level = 1;
    double R_lo = 0, R_hi = 0;
    std::vector<SpectrumEntry> entries;  ///< sorted by R

    /// Sorted analysis values x = 1/4 + R^2, newforms only unless include_old,
    /// optionally restricted to one symmetry type.
    std::vector<double> values(const SymmetryType* only = nullptr, bool include_old = false) const;
};

Spectrum make_spectrum(std::int64_t level, double R_lo, double R_hi, const std::vector<MaassForm>& forms);

// ---------------------------------------------------------------------------
// Weyl law

enum class WeylBasis {
    TwoTerm,  ///< A x + B sqrt(x)
    SixTerm,  ///< A x + B sqrt(x) log x + C sqrt(x) + D x^{1/4} + E log x + F
};

struct WeylFit {
    WeylBasis basis = WeylBasis::TwoTerm;
    std::vector<double> coefficients;
    std::vector<double> x;
    /// r_i = N(x_i) - f(x_i) with the midpoint count N(x_i) = i - 1/2 (i from 1).
    std::vector<double> r;
    int window = 0;
    std::vector<std::pair<double, double>> window_avg;  ///< (centre x, mean r) per full window
    double condition = 0;  ///< of the column-normalised basis matrix
    bool ill_conditioned = false;

    double operator()(double x) const;
};

std::vector<double> weyl_basis(WeylBasis basis, double x);

/// Least-squares fit of the counting function. window <= 0 picks 150 entries,
/// or 0.15 n when there are fewer than 1000 values. Needs at least 50 values.
WeylFit weyl_fit(const std::vector<double>& x_sorted, WeylBasis basis = WeylBasis::TwoTerm, int window = 0);

struct AuditFinding {
    double x = 0;      ///< between the two entries where the average shifts
    int index = 0;     ///< first entry after the shift
    double shift = 0;  ///< mean r after minus mean r before
    bool missing = true;
};

/// Places where the mean of r over the next window differs from the mean over the
/// previous window by more than threshold: negative shifts flag a missing value,
/// positive ones a spurious value. Only positions with a full window on both sides
/// are examined, so gaps within one window of either end go unnoticed.
std::vector<AuditFinding> audit_missing(const WeylFit& fit, double threshold = 0.6);

// ---------------------------------------------------------------------------
// Eigenvalue statistics

struct FirstEigenvalue {
    std::int64_t p = 0;
    double R = 0;
    SymmetryType symmetry;
};

/// (p + 1)/12 R^2.
double normalized_eigenvalue(std::int64_t p, double R);

struct EmpiricalCdf {
    std::vector<double> values;  ///< sorted
    std::vector<double> cdf;     ///< i/n at values[i - 1]
};

EmpiricalCdf empirical_cdf(std::vector<double> values);

/// Normalised first eigenvalues and their CDF for each symmetry type present.
std::map<std::string, EmpiricalCdf> normalized_first_eigenvalues(const std::vector<FirstEigenvalue>& table);

/// Unfolded consecutive gaps f(x_{i+1}) - f(x_i) with f the fitted counting function.
std::vector<double> nn_spacings(const std::vector<double>& x_sorted, const WeylFit& fit);

/// Newform spacings pooled (one list) or per symmetry class (one list per class with
/// at least 30 entries), each unfolded by its own two-term fit.
std::vector<std::vector<double>> nn_spacings(const Spectrum& spectrum, bool per_class);

/// (x - left)/(right - left) against the neighbouring newforms. BoundaryError when an
/// oldform lies outside the newform range.
std::vector<double> oldform_positions(const std::vector<double>& old_sorted, const std::vector<double>& new_sorted);

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);
double ks_two_sample(std::vector<double> a, std::vector<double> b);
/// Asymptotic 5% critical value for one sample of size n (Stephens' small-n correction).
double ks_critical(std::size_t n, double alpha = 0.05);
double ks_critical_two_sample(std::size_t n, std::size_t m, double alpha = 0.05);

// ---------------------------------------------------------------------------
// Random matrix references

enum class Ensemble { OPlus, OMinus, Unitary };

/// Haar Monte-Carlo samples. OPlus / OMinus: first eigenangle above 0 of SO(dim)
/// with dim rounded to even / odd (the forced eigenvalue 1 excluded), scaled by the
/// mean density floor(dim/2)/pi. Unitary: consecutive eigenangle gaps of U(dim)
/// scaled by dim/(2 pi); n_samples counts gaps. Split into 16 seeded streams run on
/// `threads` workers and merged in stream order, so the result depends only on seed.
std::vector<double> rmt_reference(Ensemble ensemble, int dim, int n_samples, std::uint64_t seed,
                                  unsigned threads = 1);

// ---------------------------------------------------------------------------
// L-function statistics

struct FirstZeroStats {
    std::vector<double> plus, minus;  ///< rescaled first zeros by root number
    double scale_plus = 0, scale_minus = 0;
};

/// First zero above 0 per form with R >= R_min, split by epsilon and multiplied so
/// each set has the given reference mean (unscaled when a reference mean is 0).
FirstZeroStats first_zero_stats(const std::vector<ZGrid>& grids, double R_min = 15, double ref_mean_plus = 0,
                                double ref_mean_minus = 0);

struct CriticalValueCdf {
    EmpiricalCdf cdf;   ///< full sample
    double x_cut = 0;   ///< fit region is values <= x_cut
    double c_prime = 0; ///< least squares CDF(x) ~ c' sqrt(x) on the fit region
};

/// InsufficientDataError below 20 values.
CriticalValueCdf critical_value_cdf(const std::vector<double>& values, double quantile = 0.25);

/// Critical values of the epsilon = +1 grids, skipping the first `skip` forms of each symmetry type.
std::vector<double> plus_critical_values(const std::vector<ZGrid>& grids, int skip = 30);

/// Gaps between consecutive zeros from the zero_start_index-th on (1-based) up to t_max,
/// multiplied by zero_density at the gap midpoint, pooled over forms with R > R_min.
std::vector<double> zero_spacing_stats(const std::vector<ZGrid>& grids, double R_min = 21.5, int zero_start_index = 5,
                                       double t_max = 20);

double mean(const std::vector<double>& v);

// ---------------------------------------------------------------------------
// Output

struct CsvSeries {
    std::vector<std::pair<std::string, std::string>> meta;  ///< written as "# key: value"
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

void write_csv(const std::string& path, const CsvSeries& series);

}  // namespace maass
