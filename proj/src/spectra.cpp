#include "maass/spectra.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <thread>

#include <Eigen/Dense>

#include "maass/errors.hpp"

namespace maass {

namespace {

constexpr double kPi = std::numbers::pi;

// least squares of (i - 1/2) on the basis, without the size precondition
WeylFit fit_counting(const std::vector<double>& x, WeylBasis basis, int window) {
    const int n = static_cast<int>(x.size());
    const int k = static_cast<int>(weyl_basis(basis, 1.0).size());
    if (n <= k) throw InsufficientDataError("Weyl fit needs more values than basis functions");
    Eigen::MatrixXd A(n, k);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
        if (i > 0 && !(x[i] >= x[i - 1])) throw PreconditionError("Weyl fit needs sorted values");
        const auto row = weyl_basis(basis, x[i]);
        for (int j = 0; j < k; ++j) A(i, j) = row[j];
        b(i) = i + 0.5;
    }
    const Eigen::VectorXd norms = A.colwise().norm().transpose();
    const Eigen::MatrixXd scaled = A * norms.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd y = svd.solve(b);

    WeylFit fit;
    fit.basis = basis;
    fit.coefficients.resize(k);
    for (int j = 0; j < k; ++j) fit.coefficients[j] = y(j) / norms(j);
    const auto& sv = svd.singularValues();
    fit.condition = sv(0) / sv(k - 1);
    fit.ill_conditioned = !(fit.condition < 1e12);
    fit.x = x;
    fit.r.resize(n);
    for (int i = 0; i < n; ++i) fit.r[i] = b(i) - fit(x[i]);

    fit.window = window > 0 ? window : (n >= 1000 ? 150 : std::max(2, static_cast<int>(std::lround(0.15 * n))));
    const int w = std::min(fit.window, n);
    double sum = 0;
    for (int i = 0; i < n; ++i) {
        sum += fit.r[i];
        if (i >= w) sum -= fit.r[i - w];
        if (i >= w - 1) fit.window_avg.emplace_back(x[i - w / 2], sum / w);
    }
    return fit;
}

}  // namespace

std::vector<double> Spectrum::values(const SymmetryType* only, bool include_old) const {
    std::vector<double> out;
    for (const auto& e : entries) {
        if (e.is_oldform && !include_old) continue;
        if (only && !(e.symmetry == *only)) continue;
        out.push_back(e.lambda());
    }
    std::sort(out.begin(), out.end());
    return out;
}

Spectrum make_spectrum(std::int64_t level, double R_lo, double R_hi, const std::vector<MaassForm>& forms) {
    Spectrum s;
    s.level = level;
    s.R_lo = R_lo;
    s.R_hi = R_hi;
    for (const auto& f : forms) s.entries.push_back({f.R, f.symmetry, f.is_oldform});
    std::sort(s.entries.begin(), s.entries.end(),
              [](const SpectrumEntry& a, const SpectrumEntry& b) { return a.R < b.R; });
    return s;
}

std::vector<double> weyl_basis(WeylBasis basis, double x) {
    const double sq = std::sqrt(x);
    if (basis == WeylBasis::TwoTerm) return {x, sq};
    return {x, sq * std::log(x), sq, std::sqrt(sq), std::log(x), 1.0};
}

double WeylFit::operator()(double x) const {
    const auto row = weyl_basis(basis, x);
    double f = 0;
    for (std::size_t j = 0; j < row.size(); ++j) f += coefficients[j] * row[j];
    return f;
}

WeylFit weyl_fit(const std::vector<double>& x_sorted, WeylBasis basis, int window) {
    if (x_sorted.size() < 50) throw InsufficientDataError("Weyl fit needs at least 50 eigenvalues");
    return fit_counting(x_sorted, basis, window);
}

std::vector<AuditFinding> audit_missing(const WeylFit& fit, double threshold) {
    const int n = static_cast<int>(fit.r.size());
    const int w = fit.window;
    std::vector<double> prefix(n + 1, 0);
    for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + fit.r[i];
    std::vector<AuditFinding> out;
    AuditFinding run;
    bool in_run = false;
    for (int k = w; k <= n - w; ++k) {
        const double shift = (prefix[k + w] - prefix[k]) / w - (prefix[k] - prefix[k - w]) / w;
        const bool hit = std::abs(shift) > threshold;
        const bool missing = shift < 0;
        if (in_run && (!hit || missing != run.missing)) {
            out.push_back(run);
            in_run = false;
        }
        if (!hit) continue;
        if (!in_run || std::abs(shift) > std::abs(run.shift)) {
            run = {0.5 * (fit.x[k - 1] + fit.x[k]), k, shift, missing};
        }
        in_run = true;
    }
    if (in_run) out.push_back(run);
    // one shift makes a response 2w wide; noise can split it into several runs
    std::vector<AuditFinding> by_size = out;
    std::sort(by_size.begin(), by_size.end(),
              [](const AuditFinding& a, const AuditFinding& b) { return std::abs(a.shift) > std::abs(b.shift); });
    std::vector<AuditFinding> kept;
    for (const auto& f : by_size) {
        const bool shadowed = std::any_of(kept.begin(), kept.end(), [&](const AuditFinding& k) {
            return k.missing == f.missing && std::abs(k.index - f.index) < w;
        });
        if (!shadowed) kept.push_back(f);
    }
    std::sort(kept.begin(), kept.end(), [](const AuditFinding& a, const AuditFinding& b) { return a.index < b.index; });
    return kept;
}

double normalized_eigenvalue(std::int64_t p, double R) { return (p + 1) / 12.0 * R * R; }

EmpiricalCdf empirical_cdf(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    EmpiricalCdf out;
    const double n = static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out.cdf.push_back((i + 1) / n);
    out.values = std::move(values);
    return out;
}

std::map<std::string, EmpiricalCdf> normalized_first_eigenvalues(const std::vector<FirstEigenvalue>& table) {
    if (table.empty()) throw InsufficientDataError("no first eigenvalues given");
    std::map<std::string, std::vector<double>> split;
    for (const auto& e : table) split[e.symmetry.name()].push_back(normalized_eigenvalue(e.p, e.R));
    std::map<std::string, EmpiricalCdf> out;
    for (auto& [name, v] : split) out[name] = empirical_cdf(std::move(v));
    return out;
}

std::vector<double> nn_spacings(const std::vector<double>& x_sorted, const WeylFit& fit) {
    std::vector<double> s;
    for (std::size_t i = 1; i < x_sorted.size(); ++i) s.push_back(fit(x_sorted[i]) - fit(x_sorted[i - 1]));
    return s;
}

std::vector<std::vector<double>> nn_spacings(const Spectrum& spectrum, bool per_class) {
    std::vector<std::vector<double>> out;
    if (!per_class) {
        const auto x = spectrum.values();
        if (x.size() < 30) throw InsufficientDataError("spacing statistics need at least 30 newforms");
        out.push_back(nn_spacings(x, fit_counting(x, WeylBasis::TwoTerm, 0)));
        return out;
    }
    for (const auto& sym : SymmetryType::all()) {
        const auto x = spectrum.values(&sym);
        if (x.size() < 30) continue;
        out.push_back(nn_spacings(x, fit_counting(x, WeylBasis::TwoTerm, 0)));
    }
    if (out.empty()) throw InsufficientDataError("no symmetry class has 30 newforms");
    return out;
}

std::vector<double> oldform_positions(const std::vector<double>& old_sorted, const std::vector<double>& new_sorted) {
    std::vector<double> out;
    for (double x : old_sorted) {
        const auto it = std::upper_bound(new_sorted.begin(), new_sorted.end(), x);
        if (it == new_sorted.begin() || it == new_sorted.end()) {
            throw BoundaryError("oldform outside the newform range");
        }
        const double left = *(it - 1), right = *it;
        out.push_back((x - left) / (right - left));
    }
    return out;
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw InsufficientDataError("empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double F = cdf(sample[i]);
        d = std::max({d, F - i / n, (i + 1) / n - F});
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw InsufficientDataError("empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return d;
}

double ks_critical(std::size_t n, double alpha) {
    const double c = std::sqrt(-0.5 * std::log(alpha / 2));
    const double rn = std::sqrt(static_cast<double>(n));
    return c / (rn + 0.12 + 0.11 / rn);
}

double ks_critical_two_sample(std::size_t n, std::size_t m, double alpha) {
    const double c = std::sqrt(-0.5 * std::log(alpha / 2));
    return c * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * m));
}

namespace {

std::vector<double> rmt_stream(Ensemble ensemble, int dim, int count, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    std::vector<double> out;
    out.reserve(count);
    if (ensemble == Ensemble::Unitary) {
        using CM = Eigen::MatrixXcd;
        while (static_cast<int>(out.size()) < count) {
            CM g(dim, dim);
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j) g(i, j) = {gauss(rng), gauss(rng)};
            Eigen::HouseholderQR<CM> qr(g);
            CM q = qr.householderQ();
            const CM r = qr.matrixQR().triangularView<Eigen::Upper>();
            for (int j = 0; j < dim; ++j) q.col(j) *= r(j, j) / std::abs(r(j, j));
            Eigen::ComplexEigenSolver<CM> es(q, false);
            std::vector<double> theta(dim);
            for (int j = 0; j < dim; ++j) theta[j] = std::arg(es.eigenvalues()(j));
            std::sort(theta.begin(), theta.end());
            for (int j = 0; j < dim && static_cast<int>(out.size()) < count; ++j) {
                const double gap = j + 1 < dim ? theta[j + 1] - theta[j] : theta[0] + 2 * kPi - theta[j];
                out.push_back(gap * dim / (2 * kPi));
            }
        }
        return out;
    }
    const int pairs = std::max(1, dim / 2);
    const int n = ensemble == Ensemble::OPlus ? 2 * pairs : 2 * pairs + 1;
    for (int sample = 0; sample < count; ++sample) {
        Eigen::MatrixXd g(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) g(i, j) = gauss(rng);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
        Eigen::MatrixXd q = qr.householderQ();
        for (int j = 0; j < n; ++j)
            if (qr.matrixQR()(j, j) < 0) q.col(j) *= -1;
        if (q.determinant() < 0) q.col(0) *= -1;
        // Q + Q^T has eigenvalues 2 cos(theta), each pair twice, plus 2 for the forced 1
        const Eigen::MatrixXd s = q + q.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
        const double top = ensemble == Ensemble::OPlus ? es.eigenvalues()(n - 1) : es.eigenvalues()(n - 2);
        const double theta = std::acos(std::clamp(top / 2, -1.0, 1.0));
        out.push_back(theta * pairs / kPi);
    }
    return out;
}

}  // namespace

std::vector<double> rmt_reference(Ensemble ensemble, int dim, int n_samples, std::uint64_t seed, unsigned threads) {
    if (dim < 10 || n_samples < 1000) throw PreconditionError("rmt_reference needs dim >= 10 and at least 1000 samples");
    constexpr int kStreams = 16;
    std::vector<std::vector<double>> parts(kStreams);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int s; (s = next++) < kStreams;) {
            const int count = n_samples / kStreams + (s < n_samples % kStreams ? 1 : 0);
            std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                              static_cast<std::uint32_t>(s)};
            std::mt19937_64 rng(seq);
            parts[s] = rmt_stream(ensemble, dim, count, rng);
        }
    };
    threads = std::max(1u, std::min<unsigned>(threads, kStreams));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    std::vector<double> out;
    for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0;
    double s = 0;
    for (double x : v) s += x;
    return s / v.size();
}

FirstZeroStats first_zero_stats(const std::vector<ZGrid>& grids, double R_min, double ref_mean_plus,
                                double ref_mean_minus) {
    FirstZeroStats out;
    for (const auto& g : grids) {
        if (g.R < R_min) continue;
        const auto it = std::find_if(g.zeros.begin(), g.zeros.end(), [](double t) { return t > 1e-6; });
        if (it == g.zeros.end()) continue;
        (g.epsilon == 1 ? out.plus : out.minus).push_back(*it);
    }
    if (out.plus.empty() && out.minus.empty()) throw InsufficientDataError("no zeros from forms above R_min");
    auto rescale = [](std::vector<double>& v, double ref) {
        const double m = mean(v);
        const double k = ref > 0 && m > 0 ? ref / m : 1.0;
        for (double& x : v) x *= k;
        return k;
    };
    out.scale_plus = rescale(out.plus, ref_mean_plus);
    out.scale_minus = rescale(out.minus, ref_mean_minus);
    return out;
}

CriticalValueCdf critical_value_cdf(const std::vector<double>& values, double quantile) {
    if (values.size() < 20) throw InsufficientDataError("critical-value CDF needs at least 20 values");
    CriticalValueCdf out;
    out.cdf = empirical_cdf(values);
    const auto& v = out.cdf.values;
    const std::size_t last = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(quantile * v.size())));
    out.x_cut = v[last - 1];
    double num = 0, den = 0;
    for (std::size_t i = 0; i < last; ++i) {
        const double x = std::max(v[i], 0.0);
        num += out.cdf.cdf[i] * std::sqrt(x);
        den += x;
    }
    out.c_prime = den > 0 ? num / den : 0;
    return out;
}

std::vector<double> plus_critical_values(const std::vector<ZGrid>& grids, int skip) {
    std::map<std::string, std::vector<const ZGrid*>> by_type;
    for (const auto& g : grids) {
        if (g.epsilon == 1 && g.critical_kind == CriticalKind::Value) by_type[g.symmetry.name()].push_back(&g);
    }
    std::vector<double> out;
    for (auto& [name, list] : by_type) {
        std::sort(list.begin(), list.end(), [](const ZGrid* a, const ZGrid* b) { return a->R < b->R; });
        for (std::size_t i = static_cast<std::size_t>(std::max(skip, 0)); i < list.size(); ++i) {
            out.push_back(list[i]->critical_value);
        }
    }
    return out;
}

std::vector<double> zero_spacing_stats(const std::vector<ZGrid>& grids, double R_min, int zero_start_index,
                                       double t_max) {
    std::vector<double> out;
    for (const auto& g : grids) {
        if (!(g.R > R_min)) continue;
        std::vector<double> z;
        for (double t : g.zeros)
            if (t > 1e-6) z.push_back(t);
        std::sort(z.begin(), z.end());
        for (std::size_t k = static_cast<std::size_t>(std::max(zero_start_index, 1) - 1); k + 1 < z.size(); ++k) {
            if (z[k + 1] > t_max) break;
            const double mid = 0.5 * (z[k] + z[k + 1]);
            out.push_back((z[k + 1] - z[k]) * zero_density(g.level, g.R, g.symmetry.a(), mid));
        }
    }
    return out;
}

void write_csv(const std::string& path, const CsvSeries& series) {
    std::ofstream out(path);
    if (!out) throw NotFoundError("cannot write " + path);
    for (const auto& [key, value] : series.meta) out << "# " << key << ": " << value << '\n';
    for (std::size_t j = 0; j < series.columns.size(); ++j) out << (j ? "," : "") << series.columns[j];
    out << '\n';
    char buf[32];
    for (const auto& row : series.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", row[j]);
            out << (j ? "," : "") << buf;
        }
        out << '\n';
    }
}

}  // namespace maass
