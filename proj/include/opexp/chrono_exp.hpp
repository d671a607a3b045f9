#pragma once

// Truncated chronological exponentials (Peano-Baker / Dyson series) for
// matrix-valued L(tau) with polynomial entries, plus order-by-order checks
// of the operator identities that convert time-ordered exponents into
// proper ones: the inverse relation, the t-dependent BCH product, the
// t-dependent Zassenhaus split and its anti-chronological analog.
//
// Conventions: truncation depth K counts integral nesting; all expansions
// are exact polynomials in (t - a); both sides of an identity use the same
// K and must agree through order K.

#include "opexp/matrix_poly.hpp"

#include <random>
#include <string>
#include <vector>

namespace opexp {

namespace detail {

// T exp{int_0^t L}: nested integrals with later times multiplying from the
// left; term_n(t) = int_0^t L(s) term_{n-1}(s) ds.
inline MatrixPoly texp_trunc0(const MatrixPoly& L, int depth) {
    MatrixPoly sum = MatrixPoly::identity(L.d);
    MatrixPoly term = MatrixPoly::identity(L.d);
    for (int n = 1; n <= depth; ++n) {
        term = (L * term).integral();
        sum = sum + term;
    }
    return sum;
}

// T0 exp{int_0^t L}: later times multiply from the right.
inline MatrixPoly t0exp_trunc0(const MatrixPoly& L, int depth) {
    MatrixPoly sum = MatrixPoly::identity(L.d);
    MatrixPoly term = MatrixPoly::identity(L.d);
    for (int n = 1; n <= depth; ++n) {
        term = (term * L).integral();
        sum = sum + term;
    }
    return sum;
}

} // namespace detail

struct ChronoTruncation {
    Rational a = Rational(0);
    int depth = 0;
    bool anti = false;    // which ordering operator
    bool negated = false; // sign of the integrand relative to the input L
    MatrixPoly value;     // polynomial in (t - a)
};

// T exp{int_a^t L(tau) dtau} truncated at nesting depth K.
inline ChronoTruncation peano_baker(const MatrixPoly& L, const Rational& a, int depth) {
    if (depth < 0) throw std::invalid_argument("peano_baker: negative depth");
    ChronoTruncation out;
    out.a = a;
    out.depth = depth;
    out.value = detail::texp_trunc0(L.shifted(a), depth);
    return out;
}

// T0 exp{-int_a^t L(tau) dtau}: the inverse-side expansion.
inline ChronoTruncation anti_chrono(const MatrixPoly& L, const Rational& a, int depth) {
    if (depth < 0) throw std::invalid_argument("anti_chrono: negative depth");
    ChronoTruncation out;
    out.a = a;
    out.depth = depth;
    out.anti = true;
    out.negated = true;
    out.value = detail::t0exp_trunc0(-L.shifted(a), depth);
    return out;
}

enum class ChronoIdentity { inverse, bch_product, zassenhaus_split, anti_split };

inline const char* to_string(ChronoIdentity id) {
    switch (id) {
    case ChronoIdentity::inverse: return "inverse";
    case ChronoIdentity::bch_product: return "bch-product";
    case ChronoIdentity::zassenhaus_split: return "zassenhaus-split";
    case ChronoIdentity::anti_split: return "anti-split";
    }
    return "?";
}

inline ChronoIdentity chrono_identity_from(const std::string& name) {
    if (name == "inverse") return ChronoIdentity::inverse;
    if (name == "bch-product") return ChronoIdentity::bch_product;
    if (name == "zassenhaus-split") return ChronoIdentity::zassenhaus_split;
    if (name == "anti-split") return ChronoIdentity::anti_split;
    throw std::invalid_argument("unknown identity '" + name +
                                "' (inverse, bch-product, zassenhaus-split, anti-split)");
}

struct IdentityReport {
    ChronoIdentity id = ChronoIdentity::inverse;
    int dim = 0;
    int depth = 0;
    bool pass = false;
    int first_nonzero_order = -1; // of the difference; -1 means exactly equal
};

// Evaluate both sides with every chronological object truncated at nesting
// depth K and report the lowest (t-a)-order where they differ. PASS means
// that order exceeds K.
inline IdentityReport check_identity(ChronoIdentity id, const MatrixPoly& B,
                                     const MatrixPoly& AC, const Rational& a, int depth) {
    if (B.d != AC.d) throw std::invalid_argument("check_identity: dimension mismatch");
    using detail::t0exp_trunc0;
    using detail::texp_trunc0;

    MatrixPoly Bs = B.shifted(a);
    MatrixPoly As = AC.shifted(a);
    MatrixPoly lhs, rhs;
    switch (id) {
    case ChronoIdentity::inverse: {
        lhs = t0exp_trunc0(-Bs, depth) * texp_trunc0(Bs, depth);
        rhs = MatrixPoly::identity(B.d);
        break;
    }
    case ChronoIdentity::bch_product: {
        lhs = texp_trunc0(Bs, depth) * texp_trunc0(As, depth);
        MatrixPoly E = texp_trunc0(Bs, depth);
        MatrixPoly Einv = t0exp_trunc0(-Bs, depth);
        MatrixPoly M = Bs + E * As * Einv;
        rhs = texp_trunc0(M, depth);
        break;
    }
    case ChronoIdentity::zassenhaus_split: {
        lhs = texp_trunc0(Bs + As, depth);
        MatrixPoly N = t0exp_trunc0(-Bs, depth) * As * texp_trunc0(Bs, depth);
        rhs = texp_trunc0(Bs, depth) * texp_trunc0(N, depth);
        break;
    }
    case ChronoIdentity::anti_split: {
        lhs = t0exp_trunc0(Bs + As, depth);
        MatrixPoly P = t0exp_trunc0(Bs, depth) * As * texp_trunc0(-Bs, depth);
        rhs = t0exp_trunc0(P, depth) * t0exp_trunc0(Bs, depth);
        break;
    }
    }

    IdentityReport rep;
    rep.id = id;
    rep.dim = B.d;
    rep.depth = depth;
    MatrixPoly diff = lhs - rhs;
    rep.first_nonzero_order = diff.lowest_order();
    rep.pass = rep.first_nonzero_order < 0 || rep.first_nonzero_order > depth;
    return rep;
}

// exp(alpha d/ds) q(s) = q(s + alpha), verified through the finite sum
// sum_k alpha^k q^(k)(s) / k!.
struct ShiftReport {
    bool pass = false;
    PolyQ lhs, rhs;
};

inline ShiftReport shift_check(const PolyQ& q, const Rational& alpha) {
    PolyQ lhs;
    PolyQ dq = q;
    Rational fact(1);
    Rational ap(1);
    for (int k = 0; !dq.is_zero() || k == 0; ++k) {
        if (k > 0) {
            fact *= Rational(k);
            ap *= alpha;
        }
        lhs = lhs + (ap / fact) * dq;
        dq = dq.derivative();
        if (k > q.degree() + 1) break;
    }
    ShiftReport rep;
    rep.lhs = lhs;
    rep.rhs = q.shifted(alpha);
    rep.pass = rep.lhs == rep.rhs;
    return rep;
}

// Residual of the defining equation dE/dt = L E at truncation depth K:
// returns the lowest nonzero (t-a)-order of E' - L E (expected >= K).
inline int defining_residual_order(const MatrixPoly& L, const Rational& a, int depth) {
    MatrixPoly Ls = L.shifted(a);
    MatrixPoly E = detail::texp_trunc0(Ls, depth);
    MatrixPoly res = E.derivative() - Ls * E;
    return res.lowest_order();
}

} // namespace opexp
