#include "maass/locator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <thread>

namespace maass {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

/// Brent's minimiser (golden section with parabolic steps) on [lo, hi].
template <typename F>
std::pair<double, double> brent_minimize(F&& f, double lo, double hi, double tol, int max_iter = 200) {
    constexpr double golden = 0.3819660112501051;
    double a = lo, b = hi;
    double x = a + golden * (b - a), w = x, v = x;
    double fx = f(x), fw = fx, fv = fx;
    double d = 0, e = 0;
    for (int it = 0; it < max_iter; ++it) {
        const double m = 0.5 * (a + b);
        const double tol1 = tol + 1e-15 * std::abs(x);
        const double tol2 = 2 * tol1;
        if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) break;
        bool parabolic = false;
        if (std::abs(e) > tol1) {
            double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2 * (q - r);
            if (q > 0) p = -p;
            q = std::abs(q);
            if (std::abs(p) < std::abs(0.5 * q * e) && p > q * (a - x) && p < q * (b - x)) {
                e = d;
                d = p / q;
                const double u = x + d;
                if (u - a < tol2 || b - u < tol2) d = x < m ? tol1 : -tol1;
                parabolic = true;
            }
        }
        if (!parabolic) {
            e = (x < m ? b : a) - x;
            d = golden * e;
        }
        const double u = x + (std::abs(d) >= tol1 ? d : (d > 0 ? tol1 : -tol1));
        const double fu = f(u);
        if (fu <= fx) {
            (u < x ? b : a) = x;
            v = w; fv = fw;
            w = x; fw = fx;
            x = u; fx = fu;
        } else {
            (u < x ? a : b) = u;
            if (fu <= fw || w == x) {
                v = w; fv = fw;
                w = u; fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u; fv = fu;
            }
        }
    }
    return {x, fx};
}

KBesselTable make_table(double R, const LocatorConfig& cfg) {
    return KBesselTable(R, 0.999 * kTwoPi * cfg.y0, 1e12, 1e-13);
}

double sc(Parity p, double t) { return p == Parity::Even ? std::cos(t) : std::sin(t); }

int max_coefficient_index(double R, const LocatorConfig& cfg, double coeff_tol) {
    // error of a_n is about trunc_eps / (sqrt(y0) K(2 pi n y0)); past the turning point K decays
    int keep = 1;
    const double floor_k = cfg.trunc_eps / (coeff_tol * std::sqrt(cfg.y0));
    for (int n = 1; n <= cfg.M; ++n) {
        const double y = kTwoPi * n * cfg.y0;
        if (y > R && kbessel_scaled(R, y) < floor_k) break;
        keep = n;
    }
    return keep;
}

}  // namespace

std::string SymmetryType::name() const {
    return std::string(parity == Parity::Even ? "even" : "odd") + (fricke_sign > 0 ? "+" : "-");
}

SymmetryType SymmetryType::parse(const std::string& text) {
    if (text == "even+") return {Parity::Even, 1};
    if (text == "even-") return {Parity::Even, -1};
    if (text == "odd+") return {Parity::Odd, 1};
    if (text == "odd-") return {Parity::Odd, -1};
    throw DomainError("unknown symmetry type '" + text + "'");
}

std::vector<SymmetryType> SymmetryType::all() {
    return {{Parity::Even, 1}, {Parity::Even, -1}, {Parity::Odd, -1}, {Parity::Odd, 1}};
}

int truncation_order(double R, double y0, double eps) {
    if (!(y0 > 0)) throw DomainError("truncation_order: y0 must be positive");
    if (!(eps > 0) || eps > 1e-3) throw PreconditionError("truncation_order: eps must lie in (0, 1e-3]");
    for (int M = 1;; ++M) {
        const double y = kTwoPi * M * y0;
        if (y <= 2 * R + 5) continue;
        if (kbessel_decay_bound(R, y) * std::sqrt(double(M)) < eps) return M;
    }
}

double default_y0(std::int64_t N) { return 0.9 * domain_floor(N, true); }

LocatorConfig default_config(std::int64_t N, double R, double eps, Layout layout) {
    LocatorConfig cfg;
    cfg.y0 = default_y0(N);
    cfg.trunc_eps = eps;
    cfg.M = std::max(2, truncation_order(R, cfg.y0, eps));
    cfg.n_points = 4 * cfg.M + 8;
    cfg.layout = layout;
    return cfg;
}

CollocationGeometry::CollocationGeometry(std::int64_t level, const LocatorConfig& cfg)
    : N(level), y0(cfg.y0) {
    if (cfg.n_points <= 4 * cfg.M) throw PreconditionError("collocation needs n_points > 4M");
    if (!(cfg.y0 > 0)) throw PreconditionError("collocation line must lie in the upper half-plane");
    const int Q = cfg.n_points;
    z.reserve(Q);
    zstar.reserve(Q);
    fricke.reserve(Q);
    for (int j = 1; j <= Q; ++j) {
        const HPoint p{(j - 0.5) / Q - 0.5, cfg.y0};
        const PullbackResult r = cfg.fricke_rows ? pullback_plus(p, N) : pullback(p, N);
        if (!(r.point.y > p.y * (1 + 1e-12))) {
            throw DegenerateSystemError("collocation point did not move under the pullback; lower y0");
        }
        z.push_back(p);
        zstar.push_back(r.point);
        fricke.push_back(r.fricke);
    }
}

CollocationSystem assemble_system(std::int64_t N, double R, const SymmetryType& sym,
                                  const LocatorConfig& cfg) {
    const CollocationGeometry geo(N, cfg);
    return assemble_system(geo, make_table(R, cfg), sym, cfg);
}

CollocationSystem assemble_system(const CollocationGeometry& geo, const KBesselTable& kt,
                                  const SymmetryType& sym, const LocatorConfig& cfg) {
    if (!(kt.R() > 0)) throw PreconditionError("assemble_system: R must be positive");
    if (cfg.M < 2) throw PreconditionError("assemble_system: M must be at least 2");
    if (geo.N == 1 && sym.eta() != 1) {
        throw DomainError("level 1: the Fricke involution lies in the group, only even+ and odd- exist");
    }
    const int M = cfg.M;
    const int Q = static_cast<int>(geo.z.size());
    const double eta = sym.eta();

    // sqrt(y) K(2 pi n y) on the collocation line is shared by every point
    std::vector<double> k0(M + 1);
    for (int n = 1; n <= M; ++n) k0[n] = std::sqrt(geo.y0) * kt(kTwoPi * n * geo.y0);

    CollocationSystem sys;
    sys.layout = cfg.layout;
    if (cfg.layout == Layout::Real) {
        sys.A.resize(Q, M - 1);
        sys.b.resize(Q);
        for (int n = 2; n <= M; ++n) sys.index.emplace_back(n, 0);
        for (int j = 0; j < Q; ++j) {
            const HPoint& z = geo.z[j];
            const HPoint& w = geo.zstar[j];
            const double s = geo.fricke[j] ? eta : 1.0;
            const double root = std::sqrt(w.y);
            for (int n = 1; n <= M; ++n) {
                const double val = k0[n] * sc(sym.parity, kTwoPi * n * z.x) -
                                   s * root * kt(kTwoPi * n * w.y) * sc(sym.parity, kTwoPi * n * w.x);
                if (n == 1) sys.b(j) = -val;
                else sys.A(j, n - 2) = val;
            }
        }
        return sys;
    }

    // complex layout: columns (Re, Im) of a_n for n = 2..M, then of a_{-n} for n = 1..M
    const int cols = 4 * M - 2;
    auto col = [M](int n, int comp) {
        return n > 0 ? 2 * (n - 2) + comp : 2 * (M - 1) + 2 * (-n - 1) + comp;
    };
    for (int n = 2; n <= M; ++n) {
        sys.index.emplace_back(n, 0);
        sys.index.emplace_back(n, 1);
    }
    for (int n = 1; n <= M; ++n) {
        sys.index.emplace_back(-n, 0);
        sys.index.emplace_back(-n, 1);
    }
    sys.A = Eigen::MatrixXd::Zero(2 * Q + 2 * M, cols);
    sys.b = Eigen::VectorXd::Zero(2 * Q + 2 * M);
    for (int j = 0; j < Q; ++j) {
        const HPoint& z = geo.z[j];
        const HPoint& w = geo.zstar[j];
        const double s = geo.fricke[j] ? eta : 1.0;
        const double root = std::sqrt(w.y);
        for (int n = 1; n <= M; ++n) {
            const double kw = s * root * kt(kTwoPi * n * w.y);
            for (int sign : {1, -1}) {
                const int m = sign * n;
                const std::complex<double> D =
                    k0[n] * std::polar(1.0, kTwoPi * m * z.x) - kw * std::polar(1.0, kTwoPi * m * w.x);
                if (m == 1) {
                    sys.b(2 * j) = -D.real();
                    sys.b(2 * j + 1) = -D.imag();
                    continue;
                }
                sys.A(2 * j, col(m, 0)) = D.real();
                sys.A(2 * j, col(m, 1)) = -D.imag();
                sys.A(2 * j + 1, col(m, 0)) = D.imag();
                sys.A(2 * j + 1, col(m, 1)) = D.real();
            }
        }
    }
    // a_{-n} = sigma a_n selects the parity
    const double sigma = sym.parity == Parity::Even ? 1.0 : -1.0;
    for (int n = 1; n <= M; ++n) {
        const int row = 2 * Q + 2 * (n - 1);
        for (int comp = 0; comp < 2; ++comp) {
            sys.A(row + comp, col(-n, comp)) = 1.0;
            if (n > 1) sys.A(row + comp, col(n, comp)) = -sigma;
        }
        sys.b(row) = n == 1 ? sigma : 0.0;
    }
    return sys;
}

ResidualResult solve_system(const CollocationSystem& sys, int M) {
    const Eigen::VectorXd norms = sys.A.colwise().norm().transpose();
    Eigen::VectorXd inv = norms.unaryExpr([](double v) { return v > 0 ? 1.0 / v : 1.0; });
    const Eigen::MatrixXd scaled = sys.A * inv.asDiagonal();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
    const Eigen::VectorXd y = qr.solve(sys.b);
    const Eigen::VectorXd x = inv.asDiagonal() * y;

    ResidualResult out;
    out.value = (sys.A * x - sys.b).norm();
    const auto diag = qr.matrixQR().diagonal().cwiseAbs();
    out.rank_warning = diag.minCoeff() < 1e-12 * diag.maxCoeff();

    out.coeffs.assign(M, std::complex<double>(0, 0));
    out.coeffs[0] = 1.0;
    for (std::size_t j = 0; j < sys.index.size(); ++j) {
        const auto [n, comp] = sys.index[j];
        if (n < 2) continue;
        if (comp == 0) out.coeffs[n - 1].real(x(j));
        else out.coeffs[n - 1].imag(x(j));
    }
    return out;
}

ResidualResult residual(std::int64_t N, double R, const SymmetryType& sym, const LocatorConfig& cfg) {
    return solve_system(assemble_system(N, R, sym, cfg), cfg.M);
}

std::vector<std::vector<Bracket>> scan_many(std::int64_t N, const std::vector<SymmetryType>& syms,
                                            double R_lo, double R_hi, const ScanOptions& opt) {
    if (!(R_lo > 0) || !(R_hi > R_lo)) throw PreconditionError("scan: need 0 < R_lo < R_hi");
    std::vector<std::vector<Bracket>> found(syms.size());
    const double y0 = default_y0(N);

    for (double c0 = R_lo; c0 < R_hi; c0 += opt.chunk) {
        const double c1 = std::min(R_hi, c0 + opt.chunk);
        LocatorConfig cfg;
        cfg.y0 = y0;
        cfg.trunc_eps = opt.trunc_eps;
        cfg.M = std::max(2, truncation_order(c1 + 0.1, y0, opt.trunc_eps));
        cfg.n_points = 4 * cfg.M + 8;
        const CollocationGeometry geo(N, cfg);

        const double step = opt.step > 0 ? opt.step : std::min(0.01, 0.1 * 24 / ((N + 1) * c1));
        const int count = static_cast<int>(std::ceil((c1 - c0) / step));
        // one extra grid point on each side so minima at the chunk edges are seen
        std::vector<double> grid;
        for (int i = -1; i <= count + 1; ++i) grid.push_back(c0 + i * step);
        std::vector<std::vector<double>> values(syms.size(), std::vector<double>(grid.size()));

        auto work = [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                if (grid[i] <= 0) {
                    for (auto& v : values) v[i] = std::numeric_limits<double>::infinity();
                    continue;
                }
                const KBesselTable kt = make_table(grid[i], cfg);
                for (std::size_t s = 0; s < syms.size(); ++s) {
                    values[s][i] = solve_system(assemble_system(geo, kt, syms[s], cfg), cfg.M).value;
                }
            }
        };
        const unsigned threads = std::max(1u, opt.threads);
        if (threads == 1) {
            work(0, grid.size());
        } else {
            std::vector<std::thread> pool;
            const std::size_t per = (grid.size() + threads - 1) / threads;
            for (unsigned t = 0; t < threads; ++t) {
                const std::size_t b = t * per, e = std::min(grid.size(), b + per);
                if (b < e) pool.emplace_back(work, b, e);
            }
            for (auto& th : pool) th.join();
        }

        for (std::size_t s = 0; s < syms.size(); ++s) {
            const auto& v = values[s];
            auto f = [&](double R) {
                return solve_system(assemble_system(geo, make_table(R, cfg), syms[s], cfg), cfg.M).value;
            };
            // Near an eigenvalue the residual is V-shaped, r ~ slope |R - R0|. Flag grid points
            // whose distance estimate r / slope is within about a step; grid minima always count.
            std::vector<bool> flagged(grid.size(), false);
            for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
                const double slope = std::max(std::abs(v[i + 1] - v[i]), std::abs(v[i] - v[i - 1])) / step;
                const bool minimum = v[i] < v[i - 1] && v[i] <= v[i + 1];
                flagged[i] = minimum || v[i] <= 1.2 * step * slope;
            }
            for (std::size_t i = 1; i + 1 < grid.size();) {
                if (!flagged[i]) {
                    ++i;
                    continue;
                }
                std::size_t last = i;
                while (last + 2 < grid.size() && flagged[last + 1]) ++last;
                const std::size_t first = i;
                i = last + 1;
                if (grid[last] < c0 || grid[first] >= c1) continue;
                // resample the window at a tenth of the step so close pairs separate
                const double lo = grid[first - 1], hi = grid[last + 1];
                const int sub = static_cast<int>(10 * (last - first + 2));
                std::vector<double> sr(sub + 1), sv(sub + 1);
                double ambient = 0;
                for (int k = 0; k <= sub; ++k) {
                    sr[k] = lo + (hi - lo) * k / sub;
                    if (k % 10 == 0) sv[k] = v[first - 1 + k / 10];
                    else sv[k] = f(sr[k]);
                    ambient = std::max(ambient, sv[k]);
                }
                // Pass 0 minimises r itself; later passes minimise r / prod |R - R_j| over the
                // dips already found, which exposes a second dip hiding next to a first one.
                std::vector<double> local;
                for (int pass = 0; pass < 3; ++pass) {
                    auto deflate = [&](double R, double r) {
                        for (double Rj : local) r /= std::abs(R - Rj);
                        return r;
                    };
                    std::vector<double> g(sub + 1);
                    for (int k = 0; k <= sub; ++k) g[k] = deflate(sr[k], sv[k]);
                    bool added = false;
                    for (int k = 1; k < sub; ++k) {
                        if (!(g[k] < g[k - 1] && g[k] <= g[k + 1])) continue;
                        if (sr[k] < c0 - 0.5 * step || sr[k] >= c1 + 0.5 * step) continue;
                        auto objective = [&](double R) { return deflate(R, f(R)); };
                        const double Rm = brent_minimize(objective, sr[k - 1], sr[k + 1], 1e-9).first;
                        const double fm = f(Rm);
                        if (fm * opt.dip_factor > ambient) continue;
                        bool duplicate = false;
                        for (double Rj : local) duplicate |= std::abs(Rj - Rm) < 1e-6;
                        if (duplicate) continue;
                        local.push_back(Rm);
                        added = true;
                        if (Rm < c0 || Rm >= c1) continue;
                        for (const auto& b : found[s]) duplicate |= std::abs(b.R - Rm) < 1e-6;
                        if (!duplicate) found[s].push_back({sr[k - 1], sr[k + 1], Rm, fm, ambient});
                    }
                    if (!added) break;
                }
            }
        }
    }
    for (auto& list : found) {
        std::sort(list.begin(), list.end(), [](const Bracket& l, const Bracket& r) { return l.R < r.R; });
    }
    return found;
}

std::vector<Bracket> scan(std::int64_t N, const SymmetryType& sym, double R_lo, double R_hi, double step) {
    ScanOptions opt;
    opt.step = step;
    return scan_many(N, {sym}, R_lo, R_hi, opt).front();
}

MaassForm refine(std::int64_t N, const SymmetryType& sym, const Bracket& bracket, const RefineOptions& opt) {
    LocatorConfig cfg = opt.config ? *opt.config : default_config(N, bracket.hi + 0.1, opt.trunc_eps);
    cfg.layout = Layout::Real;
    const CollocationGeometry geo(N, cfg);
    auto f = [&](double R) {
        return solve_system(assemble_system(geo, make_table(R, cfg), sym, cfg), cfg.M).value;
    };
    auto [R, value] = brent_minimize(f, bracket.lo, bracket.hi, std::max(opt.tol, 1e-8));
    // near the minimum the squared residual is a parabola in R; jump to its vertex
    for (double h : {1e-5, 1e-6, 1e-7}) {
        const double fm = f(R - h), f0 = f(R), fp = f(R + h);
        const double curv = fp * fp - 2 * f0 * f0 + fm * fm;
        if (!(curv > 0)) break;
        const double shift = -0.5 * h * (fp * fp - fm * fm) / curv;
        if (std::abs(shift) > 2 * h) break;
        R += shift;
        if (std::abs(shift) < opt.tol) break;
    }
    value = f(R);
    const double ambient = std::max(f(bracket.lo), f(bracket.hi));
    if (!(value * 1e3 < ambient)) throw LostMinimumError("residual dip vanished during refinement");

    MaassForm form;
    form.level = N;
    form.R = R;
    form.symmetry = sym;
    form.trunc_eps = opt.trunc_eps;
    form.residual = value;

    LocatorConfig ccfg = cfg;
    ccfg.layout = Layout::Complex;
    const ResidualResult full = solve_system(assemble_system(geo, make_table(R, ccfg), sym, ccfg), ccfg.M);
    const int keep = max_coefficient_index(R, ccfg, opt.coeff_tol);
    form.coeffs = full.coeffs;
    form.reliable = keep;
    form.config = ccfg;
    if (opt.filter && !(hecke_check(form) < 1e3 * opt.trunc_eps && reality_check(form) < 10 * opt.trunc_eps)) {
        throw LostMinimumError("coefficients fail the Hecke or reality check");
    }
    form.dip_contrast = dip_contrast(form);
    return form;
}

double hecke_check(const MaassForm& form) {
    const int M = form.reliable;
    double worst = std::abs(form.coeffs[0] * form.coeffs[0] - form.coeffs[0]);
    for (int m = 2; m <= M; ++m) {
        for (int n = m + 1; m * n <= M; ++n) {
            if (std::gcd(m, n) != 1) continue;
            worst = std::max(worst, std::abs(form.coeffs[m - 1] * form.coeffs[n - 1] - form.coeffs[m * n - 1]));
        }
    }
    return worst;
}

double ramanujan_check(const MaassForm& form) {
    double worst = 0;
    for (int p = 2; p <= form.reliable; ++p) {
        if (!is_prime(p) || form.level % p == 0) continue;
        worst = std::max(worst, std::abs(form.coeffs[p - 1]));
    }
    return worst;
}

double reality_check(const MaassForm& form) {
    double worst = 0;
    for (int n = 0; n < form.reliable; ++n) worst = std::max(worst, std::abs(form.coeffs[n].imag()));
    return worst;
}

double growth_check(const MaassForm& form) {
    double worst = 0;
    for (int n = 0; n < form.reliable; ++n) worst = std::max(worst, std::abs(form.coeffs[n]));
    return worst;
}

bool classify_oldform(const MaassForm& form, const std::vector<LevelOneEigenvalue>& level1, bool* covered) {
    double top = 0;
    bool match = false;
    for (const auto& e : level1) {
        top = std::max(top, e.R);
        if (e.parity == form.symmetry.parity && std::abs(e.R - form.R) < 1e-5) match = true;
    }
    if (covered) *covered = top >= form.R;
    return match;
}

double evaluate(const MaassForm& form, HPoint z) {
    double sum = 0;
    for (int n = 1; n <= form.M(); ++n) {
        const double arg = kTwoPi * n * z.y;
        sum += form.coeffs[n - 1].real() * kbessel_scaled(form.R, arg) * sc(form.symmetry.parity, kTwoPi * n * z.x);
    }
    return sum * std::sqrt(z.y);
}

double dip_contrast(const MaassForm& form) {
    LocatorConfig cfg = default_config(form.level, form.R + 0.1, form.trunc_eps);
    const CollocationGeometry geo(form.level, cfg);
    auto f = [&](double R) {
        return solve_system(assemble_system(geo, make_table(R, cfg), form.symmetry, cfg), cfg.M).value;
    };
    const double at = f(form.R);
    return std::min(f(form.R - 0.1), f(form.R + 0.1)) / at;
}

}  // namespace maass
