#pragma once

// Formal series solutions of Cauchy problems.
//
// Plain Taylor solutions come from iterating the augmented generator
// D = Delta + d/ds on each initial-data jet and restricting to s = a:
// the n-th coefficient is D^n(c)|_{s=a}, stored before division by n!.
//
// Resummed (generalized) series change the time variable through an
// invertible substitution, solve the auxiliary problem in tau by the same
// method, and carry the basis (forward(t) - tau0)^n; with the exponential
// substitution and p = i*omega the powers regroup into Fourier harmonics.

#include "opexp/derivation.hpp"
#include "opexp/substitution.hpp"
#include "opexp/taylor.hpp"

#include <string>
#include <vector>

namespace opexp {

struct SeriesSolution {
    std::string unknown;
    std::string tvar = "t";
    Rational a = Rational(0);
    int order = 0;
    std::vector<Expr> k; // k[n] = D^n(c)|_{s=a}; the basis carries the 1/n!
};

struct GeneralizedSeries {
    std::string unknown;
    std::string tvar = "t"; // original problem variable
    Rational a = Rational(0);
    Substitution sub;
    Rational tau0 = Rational(1);
    int order = 0;
    std::vector<Expr> b; // divided coefficients of (forward(t) - tau0)^n
};

struct FourierSeries {
    std::string unknown;
    Expr omega;
    int order = 0;
    std::vector<Expr> harmonics; // coefficient of exp(-i*k*omega*t)
};

// ---------------------------------------------------------------------------

inline std::vector<SeriesSolution> taylor_coefficients(const Problem& p, int order) {
    if (order < 0) throw std::invalid_argument("taylor_coefficients: negative order");
    if (!p.first_order())
        throw std::invalid_argument("taylor_coefficients: reduce the problem to first order");

    std::vector<std::string> jets = detail::jet_names(p);
    Generator gen = detail::make_generator(p, jets);
    const std::string s = gen.s_name();

    auto bind_data = [&](Expr e) {
        e = substitute(e, sym_atom(s), num(p.a));
        for (size_t i = 0; i < p.dim(); ++i) {
            if (p.is_pde())
                e = substitute_family(e, func_atom(jets[i], 0), p.inits[i][0], p.xvar, p.tvar);
            else
                e = substitute(e, sym_atom(jets[i]), p.inits[i][0]);
        }
        return e;
    };

    std::vector<SeriesSolution> out(p.dim());
    std::vector<Expr> cur(p.dim());
    for (size_t i = 0; i < p.dim(); ++i) {
        out[i].unknown = p.unknowns[i];
        out[i].tvar = p.tvar;
        out[i].a = p.a;
        out[i].order = order;
        cur[i] = p.is_pde() ? func(jets[i], 0) : sym(jets[i]);
    }
    for (int n = 0; n <= order; ++n) {
        for (size_t i = 0; i < p.dim(); ++i) {
            out[i].k.push_back(bind_data(cur[i]));
            if (n < order) cur[i] = gen.apply(cur[i]);
        }
    }
    return out;
}

inline const SeriesSolution& component(const std::vector<SeriesSolution>& all,
                                       const std::string& unknown) {
    for (const auto& s : all)
        if (s.unknown == unknown) return s;
    throw std::invalid_argument("no series component for unknown '" + unknown + "'");
}

// ---------------------------------------------------------------------------

inline std::vector<GeneralizedSeries> resummed_series(const Problem& p, const Substitution& sub,
                                                      int order) {
    Problem aux = change_time_variable(p, sub);
    Problem sys = reduce_to_first_order(aux);
    std::vector<SeriesSolution> taus = taylor_coefficients(sys, order);

    std::vector<GeneralizedSeries> out;
    for (const auto& u : p.unknowns) {
        const SeriesSolution& s = component(taus, u);
        GeneralizedSeries g;
        g.unknown = u;
        g.tvar = p.tvar;
        g.a = p.a;
        g.sub = retarget(sub, p.tvar);
        g.tau0 = aux.a;
        g.order = order;
        Rational fact(1);
        for (int n = 0; n <= order; ++n) {
            if (n > 0) fact *= Rational(n);
            g.b.push_back(simplify(num(Rational(1) / fact) * s.k[static_cast<size_t>(n)]));
        }
        out.push_back(std::move(g));
    }
    return out;
}

// The truncated series as a single expression in the problem's variables.
inline Expr series_polynomial(const SeriesSolution& s, int order = -1) {
    if (order < 0) order = s.order;
    Expr t = sym(s.tvar);
    Expr dt = t - num(s.a);
    Expr acc;
    Rational fact(1);
    for (int n = 0; n <= order; ++n) {
        if (n > 0) fact *= Rational(n);
        acc = acc + num(Rational(1) / fact) * s.k[static_cast<size_t>(n)] * pow(dt, n);
    }
    return acc;
}

inline Expr series_polynomial(const GeneralizedSeries& g, int order = -1) {
    if (order < 0) order = g.order;
    Expr basis = substitute(g.sub.forward, sym_atom(g.sub.told), sym(g.tvar)) - num(g.tau0);
    Expr acc;
    for (int n = 0; n <= order; ++n) acc = acc + g.b[static_cast<size_t>(n)] * pow(basis, n);
    return acc;
}

// Expand the truncated generalized series back into a plain Taylor series
// in t; with a symbolic parameter all parameter dependence must cancel
// through the requested order.
inline SeriesSolution expand_generalized(const GeneralizedSeries& g, int order) {
    if (order > g.order)
        throw std::invalid_argument("expand_generalized: order exceeds the series order");
    Expr poly = series_polynomial(g);
    std::vector<Expr> coeffs = taylor_expand(poly, g.tvar, g.a, order);
    SeriesSolution s;
    s.unknown = g.unknown;
    s.tvar = g.tvar;
    s.a = g.a;
    s.order = order;
    Rational fact(1);
    for (int n = 0; n <= order; ++n) {
        if (n > 0) fact *= Rational(n);
        s.k.push_back(simplify(num(fact) * coeffs[static_cast<size_t>(n)]));
    }
    return s;
}

// ---------------------------------------------------------------------------

// Regroup (exp(-p t) - 1)^n powers into harmonics exp(-i k omega t) after
// the substitution p = i*omega.
inline FourierSeries fourier_form(const GeneralizedSeries& g, const Expr& omega) {
    if (g.sub.name != "exp")
        throw std::invalid_argument("fourier_form: requires the exponential substitution");
    if (g.sub.param.empty())
        throw std::invalid_argument("fourier_form: the substitution parameter is already bound");
    FourierSeries f;
    f.unknown = g.unknown;
    f.omega = omega;
    f.order = g.order;
    f.harmonics.assign(static_cast<size_t>(g.order) + 1, Expr());
    Expr iw = imaginary() * omega;
    for (int n = 0; n <= g.order; ++n) {
        Expr bn = simplify(substitute(g.b[static_cast<size_t>(n)], sym_atom(g.sub.param), iw));
        // (e - 1)^n = sum_k C(n,k) (-1)^(n-k) e^k
        for (int k = 0; k <= n; ++k) {
            Rational c = binomial(n, k) * Rational((n - k) % 2 == 0 ? 1 : -1);
            f.harmonics[static_cast<size_t>(k)] =
                f.harmonics[static_cast<size_t>(k)] + num(c) * bn;
        }
    }
    for (auto& h : f.harmonics) h = simplify(h);
    return f;
}

inline Expr fourier_polynomial(const FourierSeries& f, const std::string& tvar = "t") {
    Expr acc;
    for (int k = 0; k <= f.order; ++k)
        acc = acc + f.harmonics[static_cast<size_t>(k)] *
                        exp_of(-imaginary() * num(k) * f.omega * sym(tvar));
    return acc;
}

// ---------------------------------------------------------------------------

// Substitute candidate solution expressions (one per unknown, in the
// problem's time variable) into the defining equations and expand each
// residual around a. A trustworthy order-N truncation leaves zeros through
// order N - torder.
inline std::vector<std::vector<Expr>> residual_expansion(const Problem& p,
                                                         const std::vector<Expr>& candidates,
                                                         int order) {
    if (candidates.size() != p.dim())
        throw std::invalid_argument("residual_expansion: one candidate per unknown");
    std::vector<std::vector<Expr>> out;
    for (size_t i = 0; i < p.dim(); ++i) {
        // residual = d^K u / dt^K - F(t, jets of the candidates)
        Expr lhs = candidates[i];
        for (int m = 0; m < p.torder[i]; ++m) lhs = diff(lhs, sym_atom(p.tvar));
        Expr rhs = p.rhs[i];
        for (const auto& at : atoms(rhs)) {
            if (at.kind != AtomKind::unknown) continue;
            size_t j = static_cast<size_t>(p.unknown_index(at.name));
            Expr v = candidates[j];
            for (int m = 0; m < at.tord; ++m) v = diff(v, sym_atom(p.tvar));
            for (int m = 0; m < at.xord; ++m) v = total_diff_x(v, p.xvar, "");
            rhs = substitute(rhs, at, v);
        }
        Expr residual = simplify(lhs - rhs);
        out.push_back(taylor_expand(residual, p.tvar, p.a, order));
    }
    return out;
}

} // namespace opexp
