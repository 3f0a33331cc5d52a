#include "maass/modgroup.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>

namespace maass {

namespace {

std::int64_t mul(std::int64_t x, std::int64_t y) {
    std::int64_t r;
    if (__builtin_mul_overflow(x, y, &r)) throw OverflowError("group element entry overflow");
    return r;
}

std::int64_t add(std::int64_t x, std::int64_t y) {
    std::int64_t r;
    if (__builtin_add_overflow(x, y, &r)) throw OverflowError("group element entry overflow");
    return r;
}

/// u*x + v*y = gcd(x, y) >= 0.
std::int64_t extended_gcd(std::int64_t x, std::int64_t y, std::int64_t& u, std::int64_t& v) {
    std::int64_t r0 = x, r1 = y, u0 = 1, u1 = 0, v0 = 0, v1 = 1;
    while (r1 != 0) {
        const std::int64_t q = r0 / r1;
        std::tie(r0, r1) = std::make_tuple(r1, r0 - q * r1);
        std::tie(u0, u1) = std::make_tuple(u1, u0 - q * u1);
        std::tie(v0, v1) = std::make_tuple(v1, v0 - q * v1);
    }
    if (r0 < 0) {
        r0 = -r0;
        u0 = -u0;
        v0 = -v0;
    }
    u = u0;
    v = v0;
    return r0;
}

struct Candidate {
    double q;  // |cz+d|^2 times det-normalisation; the image height is y / q
    GroupElement g;
    bool fricke;
};

/// Shift x into [-1/2, 1/2).
PullbackResult finish(HPoint z, const Candidate& cand) {
    PullbackResult out;
    HPoint w = apply(cand.g, z);
    const double shift = std::floor(w.x + 0.5);
    const auto k = static_cast<std::int64_t>(shift);
    out.g = GroupElement::translation(-k) * cand.g;
    out.point = {w.x - shift, w.y};
    if (out.point.x >= 0.5) out.point.x -= 1;  // rounding at the right edge
    out.fricke = cand.fricke;
    return out;
}

PullbackResult best_of(HPoint z, std::vector<Candidate>& cands) {
    double best = cands.front().q;
    for (const auto& c : cands) best = std::min(best, c.q);
    bool have = false;
    PullbackResult chosen;
    for (const auto& c : cands) {
        if (c.q > best * (1 + 1e-12)) continue;
        PullbackResult r = finish(z, c);
        auto key = [](const PullbackResult& p) { return std::make_pair(std::abs(p.point.x), p.point.x < 0); };
        if (!have || key(r) < key(chosen) || (key(r) == key(chosen) && r.fricke < chosen.fricke)) {
            chosen = r;
            have = true;
        }
    }
    return chosen;
}

/// Bottom rows (c, d) of Gamma_0(N), c > 0, that beat `bound`.
void search_gamma0(HPoint z, std::int64_t N, std::vector<Candidate>& cands, double& bound) {
    const double y2 = z.y * z.y;
    for (std::int64_t c = N;; c += N) {
        const double cy2 = double(c) * double(c) * y2;
        if (cy2 > bound * (1 + 1e-12)) break;
        const double s = std::sqrt(std::max(0.0, bound * (1 + 1e-12) - cy2));
        const auto d_lo = static_cast<std::int64_t>(std::ceil(-c * z.x - s));
        const auto d_hi = static_cast<std::int64_t>(std::floor(-c * z.x + s));
        for (std::int64_t d = d_lo; d <= d_hi; ++d) {
            if (std::gcd(c, d) != 1) continue;
            const double t = c * z.x + d;
            const double q = t * t + cy2;
            if (q > bound * (1 + 1e-12)) continue;
            std::int64_t u, v;
            extended_gcd(d, c, u, v);  // u d + v c = 1
            cands.push_back({q, GroupElement{u, -v, c, d}, false});
            bound = std::min(bound, q);
        }
    }
}

/// Top rows (a, b) of Gamma_0(N) composed with the Fricke involution.
void search_fricke(HPoint z, std::int64_t N, std::vector<Candidate>& cands, double& bound) {
    const double y2 = z.y * z.y;
    const double n = static_cast<double>(N);
    for (std::int64_t a = 1;; ++a) {
        const double ay2 = n * double(a) * double(a) * y2;
        if (ay2 > bound * (1 + 1e-12)) break;
        if (std::gcd(a, N) != 1) continue;
        const double s = std::sqrt(std::max(0.0, bound * (1 + 1e-12) / n - double(a) * double(a) * y2));
        const auto b_lo = static_cast<std::int64_t>(std::ceil(-a * z.x - s));
        const auto b_hi = static_cast<std::int64_t>(std::floor(-a * z.x + s));
        for (std::int64_t b = b_lo; b <= b_hi; ++b) {
            if (std::gcd(a, b) != 1) continue;
            const double t = a * z.x + b;
            const double q = n * (t * t) + ay2;
            if (q > bound * (1 + 1e-12)) continue;
            std::int64_t u, v;
            extended_gcd(a, mul(b, N), u, v);  // u a + v b N = 1
            const GroupElement gamma{a, b, mul(-v, N), u};
            cands.push_back({q, GroupElement::fricke(N) * gamma, true});
            bound = std::min(bound, q);
        }
    }
}

PullbackResult pullback_impl(HPoint z, std::int64_t N, bool plus) {
    if (!(z.y > 0) || !std::isfinite(z.x) || !std::isfinite(z.y)) {
        throw DomainError("pullback: point must lie in the upper half-plane");
    }
    if (N < 1) throw DomainError("pullback: level must be positive");
    if (z.y < 1e-7) throw IterationLimitError("pullback: point too close to the real axis");
    std::vector<Candidate> cands{{1.0, GroupElement::identity(), false}};
    double bound = 1.0;
    search_gamma0(z, N, cands, bound);
    if (plus && N > 1) search_fricke(z, N, cands, bound);
    return best_of(z, cands);
}

}  // namespace

std::int64_t GroupElement::det() const { return add(mul(a, d), -mul(b, c)); }

GroupElement GroupElement::normalized() const {
    if (c < 0 || (c == 0 && d < 0)) return {-a, -b, -c, -d};
    return *this;
}

bool operator==(const GroupElement& l, const GroupElement& r) {
    const GroupElement x = l.normalized(), y = r.normalized();
    return x.a == y.a && x.b == y.b && x.c == y.c && x.d == y.d;
}

GroupElement operator*(const GroupElement& l, const GroupElement& r) {
    return {add(mul(l.a, r.a), mul(l.b, r.c)), add(mul(l.a, r.b), mul(l.b, r.d)),
            add(mul(l.c, r.a), mul(l.d, r.c)), add(mul(l.c, r.b), mul(l.d, r.d))};
}

GroupElement reduce_scalar(const GroupElement& g, std::int64_t scalar) {
    if (scalar == 0 || g.a % scalar || g.b % scalar || g.c % scalar || g.d % scalar) {
        throw DomainError("reduce_scalar: entries not divisible");
    }
    return {g.a / scalar, g.b / scalar, g.c / scalar, g.d / scalar};
}

HPoint apply(const GroupElement& g, HPoint z) {
    const double a = double(g.a), b = double(g.b), c = double(g.c), d = double(g.d);
    const double re = c * z.x + d;
    const double im = c * z.y;
    const double den = re * re + im * im;
    const double x = ((a * z.x + b) * re + a * z.y * im) / den;
    const double y = double(g.det()) * z.y / den;
    return {x, y};
}

HPoint fricke(HPoint z, std::int64_t N) {
    const double den = double(N) * (z.x * z.x + z.y * z.y);
    return {-z.x / den, z.y / den};
}

PullbackResult pullback(HPoint z, std::int64_t N) { return pullback_impl(z, N, false); }

PullbackResult pullback_plus(HPoint z, std::int64_t N) { return pullback_impl(z, N, true); }

double domain_floor(std::int64_t N, bool plus) {
    if (N < 1) throw DomainError("domain_floor: level must be positive");
    // without the Fricke involution the cusp at 0 reaches the real axis
    if (N > 1 && !plus) return 0.0;
    constexpr int kGrid = 20001;
    std::vector<double> height(kGrid, 0.0);
    auto raise = [&](double center, double radius) {
        const double lo = std::max(-0.5, center - radius), hi = std::min(0.5, center + radius);
        if (lo > hi) return;
        const int j0 = static_cast<int>(std::ceil((lo + 0.5) * (kGrid - 1)));
        const int j1 = static_cast<int>(std::floor((hi + 0.5) * (kGrid - 1)));
        for (int j = j0; j <= j1; ++j) {
            const double x = -0.5 + double(j) / (kGrid - 1);
            const double h2 = radius * radius - (x - center) * (x - center);
            if (h2 > 0) height[j] = std::max(height[j], std::sqrt(h2));
        }
    };
    const double rootN = std::sqrt(double(N));
    double floor_est = 0;
    // circles of radius below the current floor cannot lower it; grow the search until that holds
    for (std::int64_t limit = 4;; limit *= 2) {
        std::fill(height.begin(), height.end(), 0.0);
        for (std::int64_t k = 1; k <= limit; ++k) {
            const std::int64_t c = k * N;
            const double r = 1.0 / double(c);
            for (std::int64_t d = -c - 1; d <= c + 1; ++d) {
                if (std::gcd(c, d) == 1) raise(-double(d) / double(c), r);
            }
        }
        if (plus && N > 1) {
            for (std::int64_t a = 1; a <= limit * N; ++a) {
                if (std::gcd(a, N) != 1) continue;
                const double r = 1.0 / (double(a) * rootN);
                for (std::int64_t b = -a - 1; b <= a + 1; ++b) {
                    if (std::gcd(a, b) == 1) raise(-double(b) / double(a), r);
                }
            }
        }
        floor_est = *std::min_element(height.begin(), height.end());
        const double smallest_radius = 1.0 / double(limit * N) / (plus ? rootN : 1.0);
        if (floor_est > smallest_radius) break;
        if (limit > 4096) throw IterationLimitError("domain_floor: circle search did not settle");
    }
    return floor_est;
}

bool is_prime(std::int64_t n) {
    if (n < 2) return false;
    for (std::int64_t k = 2; k * k <= n; ++k) {
        if (n % k == 0) return false;
    }
    return true;
}

std::vector<GroupElement> generators(std::int64_t N) {
    const GroupElement S{0, -1, 1, 0};
    const GroupElement T = GroupElement::translation(1);
    if (N == 1) return {T, S};
    if (!is_prime(N)) throw DomainError("generators: only prime levels are supported");

    auto inverse_mod = [N](std::int64_t v) {
        std::int64_t u, w;
        extended_gcd(((v % N) + N) % N, N, u, w);
        return ((u % N) + N) % N;
    };
    // right coset Gamma_0(N) g is fixed by the bottom row (c : d) mod N
    auto representative = [&](const GroupElement& g) {
        const std::int64_t c = ((g.c % N) + N) % N;
        if (c == 0) return GroupElement::identity();
        const std::int64_t k = (((g.d % N) + N) % N) * inverse_mod(c) % N;
        return GroupElement{0, -1, 1, k};  // S T^k
    };
    std::vector<GroupElement> reps{GroupElement::identity()};
    for (std::int64_t k = 0; k < N; ++k) reps.push_back(GroupElement{0, -1, 1, k});

    std::vector<GroupElement> out{T};
    for (const auto& r : reps) {
        for (const auto& s : {S, T}) {
            const GroupElement rs = r * s;
            const GroupElement g = (rs * representative(rs).inverse()).normalized();
            if (g == GroupElement::identity()) continue;
            if (std::find(out.begin(), out.end(), g) == out.end()) out.push_back(g);
        }
    }
    return out;
}

}  // namespace maass
