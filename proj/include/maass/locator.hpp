#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "maass/modgroup.hpp"
#include "maass/specfun.hpp"

namespace maass {

enum class Parity { Even, Odd };

/// Parity under x -> -x together with the Fricke sign.
///
/// The sign is the eigenvalue of f(z) -> f(1/(N conj z)); on odd forms it is minus
/// the eigenvalue of f(z) -> f(-1/(Nz)). With this labelling it is also the sign
/// of the functional equation, and level 1 only has even+ and odd-.
struct SymmetryType {
    Parity parity = Parity::Even;
    int fricke_sign = 1;

    int a() const { return parity == Parity::Even ? 0 : 1; }
    /// Eigenvalue of f(z) -> f(-1/(Nz)).
    int eta() const { return parity == Parity::Even ? fricke_sign : -fricke_sign; }
    /// Sign of the functional equation xi(s) = root_number * xi(1 - s).
    int root_number() const { return fricke_sign; }
    std::string name() const;

    static SymmetryType parse(const std::string& text);  ///< "even+", "odd-", ...
    static std::vector<SymmetryType> all();

    friend bool operator==(const SymmetryType&, const SymmetryType&) = default;
};

/// How the unknown coefficients enter the linear system.
enum class Layout {
    Complex,  ///< complex a_n for 0 < |n| <= M: 4M-2 real unknowns, parity as extra rows
    Real,     ///< real a_n, 2 <= n <= M, with cos/sin already folded in
};

struct LocatorConfig {
    int M = 0;
    int n_points = 0;
    double y0 = 0;
    double trunc_eps = 1e-8;
    bool fricke_rows = true;  ///< pull back through Gamma_0(N) and the Fricke involution
    Layout layout = Layout::Real;
};

/// Smallest M with decay_bound(R, 2 pi M y0) sqrt(M) < eps and 2 pi M y0 > 2R + 5.
int truncation_order(double R, double y0, double eps);

/// Line height used when none is given: 0.9 times the fundamental-domain floor.
double default_y0(std::int64_t N);

/// Truncation order for R (with n_points = 4M + 8) at the default line height.
LocatorConfig default_config(std::int64_t N, double R, double eps = 1e-8, Layout layout = Layout::Real);

/// Collocation points and their pullbacks, shared by every R and symmetry type.
struct CollocationGeometry {
    std::int64_t N = 1;
    double y0 = 0;
    std::vector<HPoint> z;
    std::vector<HPoint> zstar;
    std::vector<bool> fricke;

    /// Throws DegenerateSystemError if a point does not move.
    CollocationGeometry(std::int64_t level, const LocatorConfig& cfg);
};

struct CollocationSystem {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Layout layout = Layout::Real;
    /// Column j holds Re (component 0) or Im (component 1) of a_{index[j].first}.
    std::vector<std::pair<int, int>> index;
};

CollocationSystem assemble_system(std::int64_t N, double R, const SymmetryType& sym,
                                  const LocatorConfig& cfg);
CollocationSystem assemble_system(const CollocationGeometry& geo, const KBesselTable& kt,
                                  const SymmetryType& sym, const LocatorConfig& cfg);

struct ResidualResult {
    double value = 0;  ///< ||A x - b||_2
    std::vector<std::complex<double>> coeffs;  ///< a_1 .. a_M
    bool rank_warning = false;
};

/// Least-squares solve by column-pivoted Householder QR.
ResidualResult solve_system(const CollocationSystem& sys, int M);

ResidualResult residual(std::int64_t N, double R, const SymmetryType& sym, const LocatorConfig& cfg);

struct Bracket {
    double lo = 0, hi = 0;
    double R = 0;         ///< minimiser inside the bracket at scan precision
    double value = 0;     ///< residual there
    double ambient = 0;   ///< residual at the bracket ends
};

struct ScanOptions {
    double step = 0;            ///< 0 selects min(0.01, 0.1 * 24 / ((N + 1) R))
    double trunc_eps = 1e-8;
    double dip_factor = 1e3;
    double chunk = 1.0;         ///< R-width sharing one truncation order
    unsigned threads = 1;
};

/// Residual grid over [R_lo, R_hi] for each symmetry type, returning brackets
/// around local minima whose depth beats the ambient level by dip_factor.
std::vector<std::vector<Bracket>> scan_many(std::int64_t N, const std::vector<SymmetryType>& syms,
                                            double R_lo, double R_hi, const ScanOptions& opt = {});

std::vector<Bracket> scan(std::int64_t N, const SymmetryType& sym, double R_lo, double R_hi,
                          double step = 0);

struct MaassForm {
    std::int64_t level = 1;
    double R = 0;
    SymmetryType symmetry;
    std::vector<std::complex<double>> coeffs;  ///< a_1 .. a_M as solved (a_1 = 1)
    /// a_1 .. a_reliable have estimated error below the refine coeff_tol; the rest
    /// only serve to evaluate the expansion.
    int reliable = 0;
    double residual = 0;
    double trunc_eps = 1e-8;
    double dip_contrast = 0;  ///< residual at R +- 0.1 over residual at R
    bool is_oldform = false;
    LocatorConfig config;

    int M() const { return static_cast<int>(coeffs.size()); }
};

struct RefineOptions {
    double tol = 1e-9;
    double trunc_eps = 1e-8;
    /// Coefficients are kept only while their estimated error stays below this.
    double coeff_tol = 1e-6;
    /// Replaces the default configuration (M, n_points, y0) when set.
    std::optional<LocatorConfig> config;
    /// Reject forms whose Hecke or reality check fails the false-alarm filter.
    bool filter = true;
};

/// Minimise the residual inside the bracket and recompute the coefficients with the
/// complex layout. Throws LostMinimumError when the dip disappears or the
/// coefficients fail hecke_check < 1e3 trunc_eps or reality_check < 10 trunc_eps.
MaassForm refine(std::int64_t N, const SymmetryType& sym, const Bracket& bracket,
                 const RefineOptions& opt = {});

/// The checks below only look at the reliable coefficients.
/// max over coprime m, n with mn <= reliable of |a_m a_n - a_mn|.
double hecke_check(const MaassForm& form);
/// max over primes p not dividing N of |a_p|.
double ramanujan_check(const MaassForm& form);
double reality_check(const MaassForm& form);
/// max_n |a_n|, the coefficient growth companion of the Ramanujan check.
double growth_check(const MaassForm& form);

struct LevelOneEigenvalue {
    double R;
    Parity parity;
};

/// True when R matches a level-1 eigenvalue of the same parity to 1e-5.
/// `covered` receives false when the list does not reach form.R.
bool classify_oldform(const MaassForm& form, const std::vector<LevelOneEigenvalue>& level1,
                      bool* covered = nullptr);

/// The truncated expansion sum_n a_n sqrt(y) K_{iR}(2 pi n y) SC(2 pi n x), K scaled by e^{pi R/2}.
double evaluate(const MaassForm& form, HPoint z);

/// Residual at the form's R, and at R +- 0.1, with the same configuration.
double dip_contrast(const MaassForm& form);

}  // namespace maass
