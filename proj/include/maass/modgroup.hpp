#pragma once

#include <cstdint>
#include <vector>

#include "maass/errors.hpp"

namespace maass {

/// Point of the upper half-plane.
struct HPoint {
    double x = 0;
    double y = 1;
};

/// Integer 2x2 matrix acting by Moebius transformations, taken modulo sign.
///
/// Elements of Gamma_0(N) have determinant 1 and N | c. Atkin-Lehner type
/// elements (Fricke involution composed with Gamma_0(N)) are stored with
/// determinant N and act as the matrix divided by sqrt(N).
struct GroupElement {
    std::int64_t a = 1, b = 0, c = 0, d = 1;

    static GroupElement identity() { return {}; }
    static GroupElement translation(std::int64_t k) { return {1, k, 0, 1}; }
    /// z -> -1/(Nz) as the integer matrix [[0, -1], [N, 0]].
    static GroupElement fricke(std::int64_t N) { return {0, -1, N, 0}; }

    std::int64_t det() const;
    bool in_gamma0(std::int64_t N) const { return det() == 1 && c % N == 0; }
    /// Same transformation with the sign fixed so that c > 0, or c == 0 and d > 0.
    GroupElement normalized() const;
    /// Inverse transformation (adjugate, so the determinant is preserved).
    GroupElement inverse() const { return {d, -b, -c, a}; }

    friend bool operator==(const GroupElement& l, const GroupElement& r);
};

/// Matrix product with overflow detection (throws OverflowError).
GroupElement operator*(const GroupElement& l, const GroupElement& r);

/// Product of two determinant-N elements divided by N, so W g W h stays in Gamma_0(N).
GroupElement reduce_scalar(const GroupElement& g, std::int64_t scalar);

HPoint apply(const GroupElement& g, HPoint z);

/// -1/(N z).
HPoint fricke(HPoint z, std::int64_t N);

struct PullbackResult {
    HPoint point;
    GroupElement g;       ///< point = g z (det 1, or det N when `fricke`)
    bool fricke = false;  ///< g involves one Fricke involution
};

/// Map z into the Ford fundamental domain of Gamma_0(N): Im is maximal over the
/// orbit and x lies in [-1/2, 1/2). Ties go to smaller |x|, then positive x.
PullbackResult pullback(HPoint z, std::int64_t N);

/// As pullback, over the group generated by Gamma_0(N) and the Fricke involution.
/// For N = 1 this coincides with pullback.
PullbackResult pullback_plus(HPoint z, std::int64_t N);

/// Height of the lowest point of the fundamental domain (of Gamma_0(N), or of
/// its Fricke extension when `plus`); estimated on a fine x-grid.
double domain_floor(std::int64_t N, bool plus);

/// T, S for N = 1; for prime N the Schreier generators of Gamma_0(N) built from
/// the coset representatives I, S T^k (k = 0..N-1). Composite N throws DomainError.
std::vector<GroupElement> generators(std::int64_t N);

bool is_prime(std::int64_t n);

}  // namespace maass
