#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "maass/errors.hpp"
#include "maass/locator.hpp"

using namespace maass;

namespace {

SymmetryType sym(const char* s) { return SymmetryType::parse(s); }

Bracket around(double R, double w = 0.005) { return {R - w, R + w, R, 0, 0}; }

// exhaustive search on the bound, independent of the library's search
int brute_truncation(double R, double y0, double eps) {
    for (int M = 1;; ++M) {
        const double y = 2 * M_PI * M * y0;
        if (y > 2 * R + 5 && kbessel_decay_bound(R, y) * std::sqrt(M) < eps) return M;
    }
}

}  // namespace

TEST_CASE("symmetry types") {
    CHECK(sym("odd-").parity == Parity::Odd);
    CHECK(sym("odd-").fricke_sign == -1);
    CHECK(sym("even+").name() == "even+");
    CHECK(sym("odd+").a() == 1);
    CHECK(sym("odd+").eta() == -1);
    CHECK(SymmetryType::all().size() == 4);
    CHECK_THROWS_AS(sym("even"), DomainError);
}

TEST_CASE("truncation order") {
    const int M = truncation_order(0, 0.2, 1e-8);
    CHECK(M == brute_truncation(0, 0.2, 1e-8));
    CHECK(M >= 13);
    CHECK(M <= 17);
    for (double R : {1.0, 5.0, 13.0}) {
        for (double y0 : {0.05, 0.2, 0.8}) {
            CHECK(truncation_order(R, y0, 1e-8) == brute_truncation(R, y0, 1e-8));
            CHECK(truncation_order(R, y0, 1e-10) >= truncation_order(R, y0, 1e-8));
        }
    }
    CHECK(2 * M_PI * truncation_order(13, 0.05, 1e-8) * 0.05 > 31);
}

TEST_CASE("collocation system shape") {
    for (std::int64_t N : {1, 5, 11}) {
        LocatorConfig cfg = default_config(N, 5, 1e-8, Layout::Complex);
        CHECK(cfg.n_points > 4 * cfg.M);
        const auto sys = assemble_system(N, 5.0, sym("even+"), cfg);
        CHECK(sys.A.cols() == 4 * cfg.M - 2);
        CHECK(sys.A.rows() > sys.A.cols());
        CHECK(sys.b.size() == sys.A.rows());
        // a_1 has no column
        for (const auto& [n, comp] : sys.index) CHECK(!(n == 1 && comp == 0));
        cfg.layout = Layout::Real;
        const auto real = assemble_system(N, 5.0, sym("even+"), cfg);
        CHECK(real.A.cols() == cfg.M - 1);
    }
}

TEST_CASE("residual basics") {
    const LocatorConfig cfg = default_config(5, 4, 1e-8);
    const auto sys = assemble_system(5, 4.0, sym("even+"), cfg);
    const auto res = solve_system(sys, cfg.M);
    // zero coefficients give ||b||; least squares can only do better
    const double zero = sys.b.norm();
    CHECK(zero > 0);
    CHECK(res.value <= zero);
    CHECK(res.coeffs.size() == static_cast<std::size_t>(cfg.M));
    CHECK(res.coeffs[0] == std::complex<double>(1, 0));

    // row permutation leaves the residual unchanged
    std::vector<int> perm(sys.A.rows());
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937 rng(7);
    std::shuffle(perm.begin(), perm.end(), rng);
    CollocationSystem shuffled = sys;
    for (int i = 0; i < sys.A.rows(); ++i) {
        shuffled.A.row(i) = sys.A.row(perm[i]);
        shuffled.b(i) = sys.b(perm[i]);
    }
    CHECK(std::abs(solve_system(shuffled, cfg.M).value - res.value) < 1e-10);
}

TEST_CASE("level one residual dip") {
    // first eigenvalue of the full modular group, which is odd
    const auto odd = sym("odd-");
    const double R = 9.53369526135;
    CHECK(residual(1, R, odd, default_config(1, R)).value < 1e-6);
    CHECK(residual(1, 9.4, odd, default_config(1, 9.4)).value > 1e-2);
    CHECK_THROWS_AS(residual(1, R, sym("odd+"), default_config(1, R)), DomainError);
}

TEST_CASE("residual far from eigenvalues is order one") {
    const double r = residual(11, 3.0, sym("even+"), default_config(11, 3.0)).value;
    CHECK(r > 1e-3);
    CHECK(r < 1e2);
}

TEST_CASE("scan finds tabulated brackets") {
    SUBCASE("level 5 odd+") {
        const auto br = scan(5, sym("odd+"), 2.5, 3.5, 0.01);
        REQUIRE(br.size() == 1);
        CHECK(br[0].lo <= 3.028376293066);
        CHECK(br[0].hi >= 3.028376293066);
        CHECK(br[0].value * 1e3 <= br[0].ambient);
    }
    SUBCASE("level 11 even+") {
        const auto br = scan(11, sym("even+"), 2, 5);
        const double want[] = {2.48359, 3.28347, 4.71167, 4.93319};
        REQUIRE(br.size() == 4);
        for (int i = 0; i < 4; ++i) {
            CHECK(std::abs(br[i].R - want[i]) < 1e-5);
            CHECK(br[i].lo <= br[i].R);
            CHECK(br[i].hi >= br[i].R);
        }
    }
    SUBCASE("gap between eigenvalues") {
        CHECK(scan(11, sym("even+"), 2.6, 3.2).empty());
    }
}

TEST_CASE("refine reproduces tabulated values") {
    const MaassForm f11 = refine(11, sym("even+"), around(2.4836));
    CHECK(std::abs(f11.R - 2.48359105931) < 1e-8);
    CHECK(f11.residual <= 10 * f11.trunc_eps);
    CHECK(f11.coeffs[0] == std::complex<double>(1, 0));
    CHECK(hecke_check(f11) < 10 * f11.trunc_eps);
    CHECK(reality_check(f11) < 10 * f11.trunc_eps);
    CHECK(std::abs(f11.coeffs[1]) < 2);
    CHECK(ramanujan_check(f11) < 2);
    CHECK(growth_check(f11) < 4);
    CHECK(f11.dip_contrast > 1e4);

    const MaassForm f2 = refine(2, sym("odd+"), around(5.4173));
    CHECK(std::abs(f2.R - 5.4173348068447) < 1e-8);
    CHECK(hecke_check(f2) < 10 * f2.trunc_eps);
}

TEST_CASE("first eigenvalues at small prime levels") {
    struct Row { std::int64_t N; double R[4]; };
    // even+, even-, odd-, odd+
    const Row rows[] = {
        {3, {5.0987419087295, 8.7782823935545, 6.1205755330872, 4.3880535632221}},
        {5, {4.1324042150632, 5.436180461416, 4.897235015733, 3.028376293066}},
        {7, {3.454226503571, 4.8280076684720, 4.119009292925, 1.924644305111}},
    };
    for (const auto& row : rows) {
        for (int k = 0; k < 4; ++k) {
            const auto s = SymmetryType::all()[k];
            CAPTURE(row.N);
            CAPTURE(s.name());
            const MaassForm f = refine(row.N, s, around(row.R[k]));
            CHECK(std::abs(f.R - row.R[k]) < 1e-8);
            CHECK(f.dip_contrast > 1e4);
            CHECK(reality_check(f) < 10 * f.trunc_eps);
            CHECK(ramanujan_check(f) < 2);
        }
    }
}

TEST_CASE("coefficients away from an eigenvalue break multiplicativity") {
    const double R = 3.0;
    LocatorConfig cfg = default_config(11, R, 1e-8, Layout::Complex);
    MaassForm junk;
    junk.level = 11;
    junk.R = R;
    junk.coeffs = residual(11, R, sym("even+"), cfg).coeffs;
    junk.coeffs.resize(12);
    junk.reliable = 12;
    CHECK(hecke_check(junk) > 1e-2);
    CHECK(std::abs(junk.coeffs[0] * junk.coeffs[0] - junk.coeffs[0]) == 0.0);
}

TEST_CASE("configuration robustness") {
    const MaassForm base = refine(11, sym("odd-"), around(2.9682));
    LocatorConfig cfg = default_config(11, base.R + 0.1);
    cfg.n_points += 7;
    cfg.y0 *= 0.8;
    cfg.M = truncation_order(base.R + 0.1, cfg.y0, cfg.trunc_eps);
    cfg.n_points = std::max(cfg.n_points, 4 * cfg.M + 15);
    RefineOptions opt;
    opt.config = cfg;
    const MaassForm other = refine(11, sym("odd-"), around(2.9682), opt);
    CHECK(std::abs(other.R - base.R) < 10 * opt.tol);
    const int upto = std::min(base.reliable, other.reliable) / 2;
    for (int n = 1; n <= upto; ++n) {
        CAPTURE(n);
        CHECK(std::abs(other.coeffs[n - 1] - base.coeffs[n - 1]) < 100 * base.trunc_eps);
    }
}

TEST_CASE("Fricke consistency") {
    for (const char* name : {"even+", "odd+", "even-"}) {
        const auto s = sym(name);
        const auto brackets = scan(11, s, 2, 4.1);
        REQUIRE(!brackets.empty());
        const MaassForm f = refine(11, s, brackets.front());
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> ux(-0.5, 0.5), uy(0.08, 0.6);
        int tested = 0;
        while (tested < 20) {
            const HPoint z{ux(rng), uy(rng)};
            const HPoint w = pullback(fricke(z, 11), 11).point;
            if (w.y < f.config.y0) continue;
            ++tested;
            // f(-1/(Nz)) = eta f(z)
            CHECK(std::abs(evaluate(f, z) - s.eta() * evaluate(f, w)) < 100 * f.trunc_eps);
        }
    }
}

TEST_CASE("wrong Fricke sign shows no dip") {
    const double R = 2.48359105931;
    CHECK(residual(11, R, sym("even-"), default_config(11, R)).value > 1e-3);
    CHECK_THROWS_AS(refine(11, sym("even-"), around(R, 0.02)), LostMinimumError);
}

TEST_CASE("oldform classification") {
    std::vector<LevelOneEigenvalue> level1;
    for (const char* name : {"even+", "odd-"}) {
        for (const auto& b : scan(1, sym(name), 9, 14)) {
            level1.push_back({refine(1, sym(name), b).R, sym(name).parity});
        }
    }
    REQUIRE(level1.size() == 3);  // 9.5337 and 12.1730 odd, 13.7798 even

    const MaassForm old_odd = refine(11, sym("odd+"), around(9.5337));
    bool covered = false;
    CHECK(classify_oldform(old_odd, level1, &covered));
    CHECK(covered);

    const MaassForm old_even = refine(11, sym("even-"), around(13.7798));
    CHECK(classify_oldform(old_even, level1));

    const MaassForm fresh = refine(11, sym("even+"), around(2.4836));
    CHECK_FALSE(classify_oldform(fresh, level1));

    MaassForm high = fresh;
    high.R = 20;
    classify_oldform(high, level1, &covered);
    CHECK_FALSE(covered);
}
