#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "maass/modgroup.hpp"

using namespace maass;

namespace {

const GroupElement S{0, -1, 1, 0};
const GroupElement T = GroupElement::translation(1);

GroupElement random_word(std::mt19937_64& rng, const std::vector<GroupElement>& gens, int length) {
    GroupElement g = GroupElement::identity();
    std::uniform_int_distribution<std::size_t> pick(0, gens.size() - 1);
    std::bernoulli_distribution inv(0.5);
    for (int i = 0; i < length; ++i) {
        const GroupElement& s = gens[pick(rng)];
        g = g * (inv(rng) ? s.inverse() : s);
    }
    return g;
}

double distance_mod1(HPoint p, HPoint q) {
    double dx = std::abs(p.x - q.x);
    dx = std::min(dx, 1 - dx);
    return std::hypot(dx, p.y - q.y);
}

}  // namespace

TEST_CASE("apply basics") {
    const HPoint z{0.3, 2};
    const HPoint w = apply(GroupElement::identity(), z);
    CHECK(w.x == z.x);
    CHECK(w.y == z.y);
    const HPoint t = apply(T, z);
    CHECK(t.x == doctest::Approx(1.3));
    CHECK(t.y == doctest::Approx(2));
    const HPoint i = apply(S, {0, 1});
    CHECK(std::abs(i.x) < 1e-15);
    CHECK(i.y == doctest::Approx(1));
}

TEST_CASE("apply respects composition") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> ux(-2, 2), uy(0.2, 3);
    for (int i = 0; i < 200; ++i) {
        const GroupElement g = random_word(rng, {S, T}, 6);
        const GroupElement h = random_word(rng, {S, T}, 6);
        CHECK(g.det() == 1);
        const HPoint z{ux(rng), uy(rng)};
        const HPoint a = apply(g * h, z), b = apply(g, apply(h, z));
        const double scale = std::max(1.0, std::hypot(a.x, a.y));
        CHECK(std::hypot(a.x - b.x, a.y - b.y) < 1e-13 * scale * 100);
    }
}

TEST_CASE("overflow is detected") {
    const GroupElement big{1, 3'000'000'000LL, 0, 1};
    const GroupElement other{1, 0, 3'500'000'000LL, 1};
    CHECK_THROWS_AS(big * other * big, OverflowError);
}

TEST_CASE("fricke involution") {
    const HPoint f = fricke({0, 1 / std::sqrt(11.0)}, 11);
    CHECK(std::abs(f.x) < 1e-15);
    CHECK(f.y == doctest::Approx(1 / std::sqrt(11.0)).epsilon(1e-14));
    const HPoint i = fricke({0, 1}, 1);
    CHECK(i.y == doctest::Approx(1));
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> ux(-1, 1), uy(0.05, 2);
    for (int k = 0; k < 100; ++k) {
        const HPoint z{ux(rng), uy(rng)};
        const HPoint back = fricke(fricke(z, 7), 7);
        CHECK(std::hypot(back.x - z.x, back.y - z.y) < 1e-14);
        const HPoint m = apply(GroupElement::fricke(7), z);
        const HPoint f7 = fricke(z, 7);
        CHECK(std::hypot(m.x - f7.x, m.y - f7.y) < 1e-14);
    }
}

TEST_CASE("pullback examples") {
    auto r = pullback({1.3, 2}, 11);
    CHECK(r.point.x == doctest::Approx(0.3));
    CHECK(r.point.y == doctest::Approx(2));
    CHECK(r.g == GroupElement::translation(-1));

    r = pullback({0.2, 1.5}, 11);
    CHECK(r.g == GroupElement::identity());
    CHECK(r.point.x == doctest::Approx(0.2));

    CHECK_THROWS_AS(pullback({0.1, 0.0}, 3), DomainError);
    CHECK_THROWS_AS(pullback({0.1, 1e-9}, 3), IterationLimitError);
}

TEST_CASE("pullback is maximal against brute-force enumeration") {
    const HPoint z{0.13, 0.04};
    const auto r = pullback(z, 5);
    CHECK(r.g.in_gamma0(5));
    CHECK(r.point.y > 0.04);
    HPoint check = apply(r.g, z);
    CHECK(std::abs(check.y - r.point.y) < 1e-12);
    for (std::int64_t c = -60; c <= 60; c += 5) {
        for (std::int64_t d = -400; d <= 400; ++d) {
            if (std::gcd(c, d) != 1) continue;
            const double den = std::pow(c * z.x + d, 2) + std::pow(c * z.y, 2);
            CHECK(z.y / den <= r.point.y * (1 + 1e-12));
        }
    }
}

TEST_CASE("pullback_plus is maximal over Gamma_0(N) and its Fricke coset") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> ux(-0.5, 0.5), uy(0.01, 0.2);
    for (std::int64_t N : {2, 5, 11}) {
        for (int trial = 0; trial < 20; ++trial) {
            const HPoint z{ux(rng), uy(rng)};
            const auto r = pullback_plus(z, N);
            CHECK(r.g.det() == (r.fricke ? N : 1));
            if (r.fricke) CHECK(r.g.c % N == 0);
            else CHECK(r.g.in_gamma0(N));
            const HPoint w = apply(r.g, z);
            CHECK(std::abs(w.y - r.point.y) < 1e-12);
            double best = z.y;
            for (std::int64_t c = 0; c <= 60; c += N) {
                for (std::int64_t d = -300; d <= 300; ++d) {
                    if (std::gcd(c, d) != 1) continue;
                    best = std::max(best, z.y / (std::pow(c * z.x + d, 2) + std::pow(c * z.y, 2)));
                }
            }
            for (std::int64_t a = 1; a <= 60; ++a) {
                if (std::gcd(a, N) != 1) continue;
                for (std::int64_t b = -300; b <= 300; ++b) {
                    if (std::gcd(a, b) != 1) continue;
                    best = std::max(best, z.y / (N * (std::pow(a * z.x + b, 2) + std::pow(a * z.y, 2))));
                }
            }
            CHECK(best <= r.point.y * (1 + 1e-12));
        }
    }
}

TEST_CASE("pullback idempotence and invariance") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> ux(-3, 3), uy(0.02, 0.5);
    for (std::int64_t N : {1, 3, 11}) {
        const auto gens = generators(N);
        for (int trial = 0; trial < 30; ++trial) {
            const HPoint z{ux(rng), uy(rng)};
            for (bool plus : {false, true}) {
                auto pb = [&](HPoint p) { return plus ? pullback_plus(p, N) : pullback(p, N); };
                const auto r = pb(z);
                const auto again = pb(r.point);
                CHECK(again.g == GroupElement::identity());
                CHECK(distance_mod1(again.point, r.point) < 1e-12);

                const GroupElement gamma = random_word(rng, gens, 4);
                REQUIRE(gamma.in_gamma0(N));
                const HPoint moved = apply(gamma, z);
                if (moved.y < 1e-6) continue;
                const auto r2 = pb(moved);
                CHECK(distance_mod1(r2.point, r.point) < 1e-10);
            }
        }
    }
}

TEST_CASE("domain floor") {
    CHECK(domain_floor(1, false) == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-6));
    CHECK(domain_floor(11, false) == 0.0);
    for (std::int64_t N : {2, 3, 5, 7, 11}) {
        const double floor = domain_floor(N, true);
        CHECK(floor > 0);
        CHECK(floor < 1);
        // every point strictly below the floor moves up; something at the floor height does not
        int stays = 0;
        for (int j = 0; j < 4000; ++j) {
            const double x = -0.5 + (j + 0.5) / 4000;
            const auto low = pullback_plus({x, 0.995 * floor}, N);
            CHECK(low.point.y > 0.995 * floor);
            const auto high = pullback_plus({x, 1.01 * floor}, N);
            if (high.g == GroupElement::identity()) ++stays;
        }
        CHECK(stays > 0);
    }
}

TEST_CASE("generators") {
    const auto g1 = generators(1);
    REQUIRE(g1.size() == 2);
    CHECK(g1[0] == T);
    CHECK(g1[1] == S);
    CHECK_THROWS_AS(generators(6), DomainError);
    for (std::int64_t N : {2, 3, 5, 7, 11, 13}) {
        for (const auto& g : generators(N)) {
            CHECK(g.det() == 1);
            CHECK(g.c % N == 0);
        }
    }
}

TEST_CASE("Gamma_0(11) has index 12: coset enumeration") {
    // right cosets of Gamma_0(p) correspond to bottom rows (c : d) in P^1(F_p)
    const std::int64_t p = 11;
    auto key = [&](const GroupElement& g) {
        std::int64_t c = ((g.c % p) + p) % p, d = ((g.d % p) + p) % p;
        if (c == 0) return std::pair<std::int64_t, std::int64_t>{0, 1};
        std::int64_t inv = 1;
        while ((c * inv) % p != 1) ++inv;
        return std::pair<std::int64_t, std::int64_t>{1, (d * inv) % p};
    };
    std::set<std::pair<std::int64_t, std::int64_t>> seen{key(GroupElement::identity())};
    std::vector<GroupElement> frontier{GroupElement::identity()};
    for (int len = 0; len < 12; ++len) {
        std::vector<GroupElement> next;
        for (const auto& g : frontier) {
            for (const auto& s : {S, T, T.inverse()}) {
                const GroupElement h = g * s;
                if (seen.insert(key(h)).second) next.push_back(h);
            }
        }
        frontier = next;
    }
    CHECK(seen.size() == 12);
    // generators stabilise the trivial coset, so they lie in Gamma_0(11)
    for (const auto& g : generators(p)) CHECK(key(g) == key(GroupElement::identity()));
}
