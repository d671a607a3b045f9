#pragma once

// Truncated univariate series expansion of an expression around a rational
// point. Coefficients stay exact; exp and ln expand through their power
// series, ln requires a nonzero constant term.

#include "opexp/expr.hpp"

#include <string>
#include <vector>

namespace opexp {

namespace detail {

using Series = std::vector<Expr>; // s[k] is the coefficient of (sym - point)^k

inline Series s_zero(int n) { return Series(static_cast<size_t>(n) + 1); }

inline Series s_const(const Expr& e, int n) {
    Series s = s_zero(n);
    s[0] = e;
    return s;
}

inline Series s_add(const Series& a, const Series& b) {
    Series out = a;
    for (size_t k = 0; k < out.size(); ++k) out[k] = out[k] + b[k];
    return out;
}

inline Series s_mul(const Series& a, const Series& b) {
    Series out = s_zero(static_cast<int>(a.size()) - 1);
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].is_zero()) continue;
        for (size_t j = 0; i + j < out.size(); ++j) {
            if (b[j].is_zero()) continue;
            out[i + j] = out[i + j] + a[i] * b[j];
        }
    }
    return out;
}

inline Series s_scale(Series a, const Expr& c) {
    for (auto& x : a) x = c * x;
    return a;
}

// 1 / a; requires an invertible constant term
inline Series s_inverse(const Series& a) {
    if (a[0].is_zero())
        throw std::domain_error("taylor_expand: inverse of a series with zero constant term");
    Series out = s_zero(static_cast<int>(a.size()) - 1);
    Expr w0 = pow(a[0], -1);
    out[0] = w0;
    for (size_t n = 1; n < out.size(); ++n) {
        Expr acc;
        for (size_t j = 1; j <= n; ++j) acc = acc + a[j] * out[n - j];
        out[n] = simplify(-w0 * acc);
    }
    return out;
}

inline Series s_pow(const Series& a, long long k) {
    int n = static_cast<int>(a.size()) - 1;
    if (k == 0) return s_const(num(1), n);
    Series base = k < 0 ? s_inverse(a) : a;
    long long e = k < 0 ? -k : k;
    Series out = s_const(num(1), n);
    while (e > 0) {
        if (e & 1) out = s_mul(out, base);
        base = s_mul(base, base);
        e >>= 1;
    }
    return out;
}

inline Series series_of(const Expr& e, const Atom& var, const Rational& point, int n);

inline Series series_of_factor(const Factor& f, int k, const Atom& var, const Rational& point,
                               int n) {
    switch (f.kind) {
    case FactorKind::atom: {
        Series s = s_zero(n);
        if (cmp(f.atom, var) == 0) {
            s[0] = num(point);
            if (n >= 1) s[1] = num(1);
        } else {
            s[0] = make_atom(f.atom);
        }
        return s_pow(s, k);
    }
    case FactorKind::exp_fn: {
        Series u = series_of(num(k) * f.arg, var, point, n);
        Expr u0 = u[0];
        u[0] = Expr();
        // exp(u0) * sum_j v^j / j!
        Series out = s_const(num(1), n);
        Series vp = s_const(num(1), n);
        Rational fact(1);
        for (int j = 1; j <= n; ++j) {
            vp = s_mul(vp, u);
            fact *= Rational(j);
            out = s_add(out, s_scale(vp, num(Rational(1) / fact)));
        }
        return s_scale(out, exp_of(u0));
    }
    case FactorKind::ln_fn: {
        Series u = series_of(f.arg, var, point, n);
        Expr u0 = u[0];
        if (u0.is_zero())
            throw std::domain_error("taylor_expand: ln at a zero argument");
        u[0] = Expr();
        Series w = s_scale(u, pow(u0, -1));
        // ln(u0) + sum_j (-1)^{j+1} w^j / j
        Series out = s_const(ln_of(u0), n);
        Series wp = s_const(num(1), n);
        for (int j = 1; j <= n; ++j) {
            wp = s_mul(wp, w);
            Rational c = Rational(j % 2 == 0 ? -1 : 1) / Rational(j);
            out = s_add(out, s_scale(wp, num(c)));
        }
        return s_pow(out, k);
    }
    case FactorKind::sum_pow: {
        Series base = series_of(f.arg, var, point, n);
        return s_pow(base, k);
    }
    }
    return s_zero(n);
}

inline Series series_of(const Expr& e, const Atom& var, const Rational& point, int n) {
    Series out = s_zero(n);
    for (const auto& m : e.rep().terms) {
        Series s = s_const(num(m.coeff), n);
        for (const auto& [f, k] : m.factors)
            s = s_mul(s, series_of_factor(f, k, var, point, n));
        out = s_add(out, s);
    }
    for (auto& c : out) c = simplify(c);
    return out;
}

} // namespace detail

// Coefficients a_0..a_n of e around sym = point: e = sum a_k (sym-point)^k + O(^{n+1}).
inline std::vector<Expr> taylor_expand(const Expr& e, const std::string& sym_name,
                                       const Rational& point, int order) {
    if (order < 0) throw std::invalid_argument("taylor_expand: negative order");
    return detail::series_of(e, sym_atom(sym_name), point, order);
}

} // namespace opexp
