#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <random>

#include "maass/errors.hpp"
#include "maass/spectra.hpp"

using namespace maass;

namespace {

// inverse of A x + B sqrt(x) for x > 0
double invert(double A, double B, double n) {
    const double s = (-B + std::sqrt(B * B + 4 * A * n)) / (2 * A);
    return s * s;
}

// jittered lattice whose counting function is A x + B sqrt(x)
std::vector<double> lattice(int n, double A, double B, double sigma, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0, sigma);
    std::vector<double> x;
    for (int i = 1; i <= n; ++i) x.push_back(invert(A, B, std::max(0.01, i - 0.5 + g(rng))));
    std::sort(x.begin(), x.end());
    return x;
}

double sum_sq(const WeylFit& fit, const std::vector<double>& coef) {
    WeylFit f = fit;
    f.coefficients = coef;
    double s = 0;
    for (std::size_t i = 0; i < f.x.size(); ++i) {
        const double r = i + 0.5 - f(f.x[i]);
        s += r * r;
    }
    return s;
}

}  // namespace

TEST_CASE("Weyl fit recovers an exact counting function") {
    std::vector<double> x;
    for (int i = 1; i <= 200; ++i) x.push_back(2 * (i - 0.5));
    const WeylFit fit = weyl_fit(x);
    CHECK(fit.coefficients[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(fit.coefficients[1]) < 1e-10);
    CHECK(!fit.ill_conditioned);
    for (double r : fit.r) CHECK(std::abs(r) < 1e-9);
    CHECK(fit.window == 30);
    CHECK(fit.window_avg.size() == 200 - 30 + 1);

    std::vector<double> few(x.begin(), x.begin() + 49);
    CHECK_THROWS_AS(weyl_fit(few), InsufficientDataError);
}

TEST_CASE("Weyl fit is unbiased on jittered spectra") {
    std::mt19937_64 rng(7);
    const double A = 10.0 / 12, B = -0.9;
    std::vector<double> as, bs;
    for (int t = 0; t < 60; ++t) {
        const WeylFit fit = weyl_fit(lattice(400, A, B, 0.35, rng));
        as.push_back(fit.coefficients[0]);
        bs.push_back(fit.coefficients[1]);
    }
    auto sd = [](const std::vector<double>& v) {
        const double m = mean(v);
        double s = 0;
        for (double x : v) s += (x - m) * (x - m);
        return std::sqrt(s / (v.size() - 1));
    };
    CHECK(std::abs(mean(as) - A) < 3 * sd(as) / std::sqrt(60.0));
    CHECK(std::abs(mean(bs) - B) < 3 * sd(bs) / std::sqrt(60.0));
}

TEST_CASE("Weyl fit minimises the squared residual and defines r") {
    std::mt19937_64 rng(3);
    const auto x = lattice(300, 0.8, 1.5, 0.35, rng);
    for (WeylBasis basis : {WeylBasis::TwoTerm, WeylBasis::SixTerm}) {
        const WeylFit fit = weyl_fit(x, basis);
        const double best = sum_sq(fit, fit.coefficients);
        for (std::size_t j = 0; j < fit.coefficients.size(); ++j) {
            for (double d : {-1e-3, 1e-3}) {
                auto c = fit.coefficients;
                c[j] += d * std::max(1.0, std::abs(c[j]));
                CHECK(sum_sq(fit, c) > best);
            }
        }
        for (std::size_t i = 0; i < x.size(); ++i) CHECK(fit.r[i] == doctest::Approx(i + 0.5 - fit(x[i])));
    }
}

TEST_CASE("audit finds deleted eigenvalues") {
    std::mt19937_64 rng(21);
    const double A = 10.0 / 12, B = -0.9;
    for (int n : {250, 1200}) {
        CAPTURE(n);
        int detected = 0, false_reports = 0, clean_reports = 0;
        for (int trial = 0; trial < 100; ++trial) {
            auto x = lattice(n, A, B, 0.35, rng);
            clean_reports += static_cast<int>(audit_missing(weyl_fit(x)).size());
            const int w = weyl_fit(x).window;
            std::uniform_int_distribution<int> pick(w, n - w - 1);
            const int k = pick(rng);
            const double gone = x[k];
            x.erase(x.begin() + k);
            bool hit = false;
            for (const auto& f : audit_missing(weyl_fit(x))) {
                // localised within one window of the removed value
                if (f.missing && std::abs(f.index - k) <= w) {
                    hit = true;
                    CHECK(std::abs(f.x - gone) < w / A);
                } else {
                    ++false_reports;
                }
            }
            detected += hit;
        }
        CHECK(clean_reports == 0);
        CHECK(detected >= 95);
        CHECK(false_reports == 0);

        // deletion inside the first window cannot be seen
        auto x = lattice(n, A, B, 0.35, rng);
        x.erase(x.begin() + 10);
        CHECK(audit_missing(weyl_fit(x)).empty());
    }
}

TEST_CASE("spacing statistics") {
    // Poisson spectra unfold to exponential spacings
    std::mt19937_64 rng(99);
    int pass = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::exponential_distribution<double> e(1.0);
        std::vector<double> x;
        double n = 0.5;
        for (int i = 0; i < 500; ++i) {
            n += e(rng);
            x.push_back(invert(0.8, 0.5, n));
        }
        const WeylFit fit = weyl_fit(x);
        const auto s = nn_spacings(x, fit);
        const double d = ks_statistic(s, [](double v) { return v <= 0 ? 0.0 : 1 - std::exp(-v); });
        if (d < ks_critical(s.size())) ++pass;
    }
    CHECK(pass >= 90);

    std::vector<double> ap;
    for (int i = 1; i <= 100; ++i) ap.push_back(3.0 * (i - 0.5));
    const auto s = nn_spacings(ap, weyl_fit(ap));
    for (double v : s) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("spectrum values and per-class spacings") {
    std::mt19937_64 rng(4);
    Spectrum sp;
    sp.level = 11;
    for (const auto& sym : SymmetryType::all()) {
        for (double x : lattice(60, 0.2, 0, 0.3, rng)) sp.entries.push_back({std::sqrt(x - 0.25 + 1), sym, false});
    }
    sp.entries.push_back({5.0, SymmetryType::parse("odd-"), true});
    CHECK(sp.values().size() == 240);
    CHECK(sp.values(nullptr, true).size() == 241);
    const auto odd_minus = SymmetryType::parse("odd-");
    CHECK(sp.values(&odd_minus).size() == 60);
    const auto v = sp.values();
    CHECK(std::is_sorted(v.begin(), v.end()));
    CHECK(nn_spacings(sp, true).size() == 4);
    CHECK(nn_spacings(sp, false).size() == 1);
}

TEST_CASE("oldform positions") {
    const std::vector<double> newforms{1, 2, 4, 8};
    const auto p = oldform_positions({1.5, 3, 7}, newforms);
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(0.5));
    CHECK(p[2] == doctest::Approx(0.75));
    CHECK_THROWS_AS(oldform_positions({0.5}, newforms), BoundaryError);
    CHECK_THROWS_AS(oldform_positions({9}, newforms), BoundaryError);

    // Gamma_0(11): the level-one value 9.5337 between its odd neighbours
    auto x = [](double R) { return 0.25 + R * R; };
    const auto q = oldform_positions({x(9.53369526135)}, {x(9.42103), x(9.64627)});
    CHECK(q[0] > 0);
    CHECK(q[0] < 1);

    // oldforms placed uniformly at random give uniform positions
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> grid, old;
    for (int i = 0; i <= 400; ++i) grid.push_back(i);
    for (int i = 0; i < 300; ++i) old.push_back(400 * u(rng));
    std::sort(old.begin(), old.end());
    const auto pos = oldform_positions(old, grid);
    CHECK(ks_statistic(pos, [](double v) { return std::clamp(v, 0.0, 1.0); }) < ks_critical(pos.size()));
}

TEST_CASE("normalised first eigenvalues") {
    CHECK(normalized_eigenvalue(11, 2.4835910595550) == doctest::Approx(6.168).epsilon(1e-4));
    struct Row { std::int64_t p; double R[4]; };
    // even+, even-, odd-, odd+
    const Row rows[] = {
        {2, {8.9228764869917, 12.092994875078, 7.220871975958, 5.4173348068447}},
        {3, {5.0987419087295, 8.7782823935545, 6.1205755330872, 4.3880535632221}},
        {5, {4.1324042150632, 5.436180461416, 4.897235015733, 3.028376293066}},
        {7, {3.454226503571, 4.8280076684720, 4.119009292925, 1.924644305111}},
        {11, {2.4835910595550, 4.018069188221, 2.96820576382, 2.033090993855}},
    };
    const char* names[] = {"even+", "even-", "odd-", "odd+"};
    std::vector<FirstEigenvalue> table;
    for (const auto& row : rows)
        for (int k = 0; k < 4; ++k) table.push_back({row.p, row.R[k], SymmetryType::parse(names[k])});
    const auto cdfs = normalized_first_eigenvalues(table);
    CHECK(cdfs.size() == 4);
    for (const auto& [name, c] : cdfs) {
        CHECK(c.values.size() == 5);
        CHECK(std::is_sorted(c.values.begin(), c.values.end()));
        CHECK(c.cdf.back() == doctest::Approx(1.0));
        for (std::size_t i = 0; i < c.cdf.size(); ++i) CHECK(c.cdf[i] == doctest::Approx((i + 1) / 5.0));
    }
    CHECK(mean(cdfs.at("even+").values) < mean(cdfs.at("even-").values));
    CHECK_THROWS_AS(normalized_first_eigenvalues({}), InsufficientDataError);
}

TEST_CASE("KS utilities") {
    CHECK(ks_critical(1000) == doctest::Approx(1.3581 / (std::sqrt(1000.0) + 0.12 + 0.11 / std::sqrt(1000.0))).epsilon(1e-3));
    CHECK(ks_two_sample({1, 2, 3}, {1, 2, 3}) == 0);
    CHECK(ks_two_sample({1, 2}, {3, 4}) == 1);
    CHECK(ks_statistic({0.5}, [](double v) { return v; }) == doctest::Approx(0.5));
}

TEST_CASE("random matrix references") {
    // the forced eigenvalue of odd orthogonal matrices is excluded, so first angles are positive
    const auto om = rmt_reference(Ensemble::OMinus, 21, 1000, 1);
    const auto op = rmt_reference(Ensemble::OPlus, 20, 1000, 1);
    CHECK(om.size() == 1000);
    for (double v : om) CHECK(v > 1e-6);
    // repulsion from the forced eigenvalue pushes the odd first angle up
    CHECK(mean(om) > mean(op) + 0.2);

    const auto u = rmt_reference(Ensemble::Unitary, 50, 10000, 2, 4);
    CHECK(u.size() == 10000);
    CHECK(mean(u) == doctest::Approx(1.0).epsilon(0.02));

    const auto small = rmt_reference(Ensemble::OPlus, 20, 20000, 3, 4);
    const auto large = rmt_reference(Ensemble::OPlus, 50, 20000, 4, 4);
    CHECK(ks_two_sample(small, large) < 0.03);

    // identical output regardless of thread count
    CHECK(rmt_reference(Ensemble::OMinus, 11, 1000, 42, 1) == rmt_reference(Ensemble::OMinus, 11, 1000, 42, 5));
    CHECK(rmt_reference(Ensemble::Unitary, 10, 1000, 42, 1) == rmt_reference(Ensemble::Unitary, 10, 1000, 42, 3));
    CHECK(rmt_reference(Ensemble::OPlus, 10, 1000, 42) != rmt_reference(Ensemble::OPlus, 10, 1000, 43));
    CHECK_THROWS_AS(rmt_reference(Ensemble::OPlus, 9, 1000, 0), PreconditionError);
    CHECK_THROWS_AS(rmt_reference(Ensemble::OPlus, 10, 999, 0), PreconditionError);
}

TEST_CASE("critical-value CDF") {
    // CDF c sqrt(x) near 0 with c = 0.8
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> v;
    for (int i = 0; i < 4000; ++i) {
        const double p = u(rng);
        v.push_back(p < 0.5 ? std::pow(p / 0.8, 2) : 0.390625 + 3 * (p - 0.5));
    }
    const auto c = critical_value_cdf(v);
    CHECK(c.c_prime == doctest::Approx(0.8).epsilon(0.1));
    CHECK(c.x_cut <= 0.1);
    CHECK_THROWS_AS(critical_value_cdf(std::vector<double>(19, 1.0)), InsufficientDataError);

    std::vector<ZGrid> grids;
    for (int i = 0; i < 40; ++i) {
        ZGrid g;
        g.R = 10 + i;
        g.symmetry = SymmetryType::parse(i % 2 ? "even+" : "odd+");
        g.epsilon = 1;
        g.critical_value = i;
        grids.push_back(g);
    }
    grids.push_back(ZGrid{});
    grids.back().epsilon = -1;
    grids.back().critical_kind = CriticalKind::Derivative;
    const auto pv = plus_critical_values(grids, 5);
    CHECK(pv.size() == 30);
    CHECK(*std::min_element(pv.begin(), pv.end()) == 10);
}

TEST_CASE("zero spacing unfolding round trip") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    std::vector<double> drawn;
    std::vector<ZGrid> grids;
    for (int f = 0; f < 60; ++f) {
        ZGrid g;
        g.level = 11;
        g.R = 22 + 0.3 * f;
        g.symmetry = SymmetryType::parse(f % 2 ? "even+" : "odd-");
        std::vector<double> z{0.3};
        std::vector<double> gaps;
        while (true) {
            const double gap = u(rng);
            double next = z.back() + 1;
            for (int it = 0; it < 60; ++it)
                next = z.back() + gap / zero_density(11, g.R, g.symmetry.a(), 0.5 * (z.back() + next));
            if (next > 20) break;
            z.push_back(next);
            gaps.push_back(gap);
        }
        g.zeros = z;
        grids.push_back(g);
        drawn.insert(drawn.end(), gaps.begin() + 4, gaps.end());
    }
    const auto s = zero_spacing_stats(grids);
    CHECK(s.size() == drawn.size());
    CHECK(ks_two_sample(s, drawn) < 0.02);
    CHECK(mean(s) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("first zero statistics") {
    std::vector<ZGrid> grids;
    for (int i = 0; i < 10; ++i) {
        ZGrid g;
        g.R = 14 + i;
        g.epsilon = i % 2 ? 1 : -1;
        g.zeros = g.epsilon == -1 ? std::vector<double>{0.0, 1.0 + i} : std::vector<double>{0.5 + i};
        grids.push_back(g);
    }
    const auto raw = first_zero_stats(grids);
    // R = 14 is below the cut; the central zero is not a first zero
    CHECK(raw.minus.size() == 4);
    CHECK(raw.plus.size() == 5);
    CHECK(raw.minus.front() == 3.0);
    CHECK(raw.scale_plus == 1.0);
    const auto scaled = first_zero_stats(grids, 15, 2.0, 3.0);
    CHECK(mean(scaled.plus) == doctest::Approx(2.0));
    CHECK(mean(scaled.minus) == doctest::Approx(3.0));
    CHECK_THROWS_AS(first_zero_stats(grids, 100), InsufficientDataError);
}

TEST_CASE("csv output") {
    CsvSeries s{{{"level", "11"}}, {"x", "y"}, {{1, 0.1}, {2, 1e-300}}};
    const std::string path = "/tmp/maass_spectra_test.csv";
    write_csv(path, s);
    std::ifstream in(path);
    std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(all == "# level: 11\nx,y\n1,0.10000000000000001\n2,1e-300\n");
}
