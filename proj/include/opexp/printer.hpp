#pragma once

// LaTeX rendering and human-readable series output. Plain-text expression
// printing lives on Expr itself; everything here is presentation-only.

#include "opexp/series_engine.hpp"

#include <sstream>
#include <string>

namespace opexp {

namespace detail {

inline std::string atom_latex(const Atom& a) {
    if (a.kind == AtomKind::unknown) {
        if (a.tord == 0 && a.xord == 0) return a.name;
        std::string sub(static_cast<size_t>(a.tord), 't');
        sub += std::string(static_cast<size_t>(a.xord), 'x');
        return a.name + "_{" + sub + "}";
    }
    if (a.kind == AtomKind::func && a.xord > 0) {
        if (a.xord <= 2) return a.name + std::string(static_cast<size_t>(a.xord), '\'');
        return a.name + "^{(" + std::to_string(a.xord) + ")}";
    }
    if (a.name == "tau") return "\\tau";
    if (a.name == "omega") return "\\omega";
    return a.name;
}

std::string latex_impl(const Expr& e, bool parens_if_sum);

inline std::string factor_latex(const Factor& f) {
    switch (f.kind) {
    case FactorKind::atom:
        return atom_latex(f.atom);
    case FactorKind::exp_fn:
        return "\\mathrm{e}^{" + latex_impl(f.arg, false) + "}";
    case FactorKind::ln_fn:
        return "\\ln\\!\\left(" + latex_impl(f.arg, false) + "\\right)";
    case FactorKind::sum_pow:
        return "\\left(" + latex_impl(f.arg, false) + "\\right)";
    }
    return "";
}

inline std::string mono_latex(const Monomial& m) {
    std::vector<std::string> numer, denom;
    Rational c = m.coeff.abs();
    if (c.numerator() != 1) numer.push_back(c.numerator().str());
    if (c.denominator() != 1) denom.push_back(c.denominator().str());
    for (const auto& [f, k] : m.factors) {
        std::string base = factor_latex(f);
        int e = k > 0 ? k : -k;
        std::string piece = base;
        if (e != 1) piece += "^{" + std::to_string(e) + "}";
        (k > 0 ? numer : denom).push_back(piece);
    }
    std::string ns;
    if (numer.empty())
        ns = "1";
    else
        for (size_t i = 0; i < numer.size(); ++i) ns += (i ? "\\, " : "") + numer[i];
    if (denom.empty()) return ns;
    std::string ds;
    for (size_t i = 0; i < denom.size(); ++i) ds += (i ? "\\, " : "") + denom[i];
    return "\\frac{" + ns + "}{" + ds + "}";
}

inline std::string latex_impl(const Expr& e, bool parens_if_sum) {
    const auto& ts = e.rep().terms;
    if (ts.empty()) return "0";
    std::string out;
    for (size_t i = 0; i < ts.size(); ++i) {
        bool neg = ts[i].coeff < Rational(0);
        if (i == 0)
            out += neg ? "-" : "";
        else
            out += neg ? " - " : " + ";
        out += mono_latex(ts[i]);
    }
    if (parens_if_sum && ts.size() > 1) out = "\\left(" + out + "\\right)";
    return out;
}

// wrap a coefficient for use as a multiplier in front of a basis power
inline std::string coeff_text(const Expr& e) {
    return e.rep().terms.size() == 1 ? e.str() : "(" + e.str() + ")";
}

// true when the term is a single monomial with a negative coefficient, so
// the series printer can pull the sign out front
inline bool pull_minus(const Expr& e) {
    return e.rep().terms.size() == 1 && e.rep().terms[0].coeff < Rational(0);
}

} // namespace detail

inline std::string to_latex(const Expr& e) { return detail::latex_impl(e, false); }

// ---------------------------------------------------------------------------

inline std::string to_text(const SeriesSolution& s) {
    std::ostringstream os;
    os << s.unknown << " = ";
    std::string tbase = s.a.is_zero() ? s.tvar : "(" + s.tvar + " - " + s.a.str() + ")";
    bool first = true;
    Rational fact(1);
    for (int n = 0; n <= s.order; ++n) {
        if (n > 0) fact *= Rational(n);
        Expr k = s.k[static_cast<size_t>(n)];
        if (k.is_zero()) continue;
        bool neg = detail::pull_minus(k);
        if (neg) k = -k;
        os << (first ? (neg ? "-" : "") : (neg ? " - " : " + "));
        first = false;
        if (n == 0) {
            os << k.str();
            continue;
        }
        os << detail::coeff_text(k) << "*" << tbase;
        if (n > 1) os << "^" << n << "/" << fact.str();
    }
    if (first) os << "0";
    return os.str();
}

inline std::string to_latex(const SeriesSolution& s) {
    std::ostringstream os;
    os << s.unknown << " = ";
    std::string tbase =
        s.a.is_zero() ? s.tvar : "\\left(" + s.tvar + " - " + s.a.str() + "\\right)";
    bool first = true;
    Rational fact(1);
    for (int n = 0; n <= s.order; ++n) {
        if (n > 0) fact *= Rational(n);
        Expr k = s.k[static_cast<size_t>(n)];
        if (k.is_zero()) continue;
        bool neg = detail::pull_minus(k);
        if (neg) k = -k;
        os << (first ? (neg ? "-" : "") : (neg ? " - " : " + "));
        first = false;
        if (n == 0) {
            os << to_latex(k);
            continue;
        }
        os << detail::latex_impl(k, true) << "\\,";
        if (n == 1)
            os << tbase;
        else
            os << "\\frac{" << tbase << "^{" << n << "}}{" << fact.str() << "}";
    }
    if (first) os << "0";
    return os.str();
}

inline std::string basis_text(const GeneralizedSeries& g) {
    Expr fwd = substitute(g.sub.forward, sym_atom(g.sub.told), sym(g.tvar));
    Expr base = fwd - num(g.tau0);
    return "(" + base.str() + ")";
}

inline std::string to_text(const GeneralizedSeries& g) {
    std::ostringstream os;
    os << g.unknown << " = ";
    std::string base = basis_text(g);
    bool first = true;
    for (int n = 0; n <= g.order; ++n) {
        Expr b = g.b[static_cast<size_t>(n)];
        if (b.is_zero()) continue;
        bool neg = detail::pull_minus(b);
        if (neg) b = -b;
        os << (first ? (neg ? "-" : "") : (neg ? " - " : " + "));
        first = false;
        if (n == 0) {
            os << b.str();
            continue;
        }
        os << detail::coeff_text(b) << "*" << base;
        if (n > 1) os << "^" << n;
    }
    if (first) os << "0";
    return os.str();
}

inline std::string to_latex(const GeneralizedSeries& g) {
    std::ostringstream os;
    os << g.unknown << " = ";
    Expr fwd = substitute(g.sub.forward, sym_atom(g.sub.told), sym(g.tvar));
    Expr base_e = fwd - num(g.tau0);
    std::string base = "\\left(" + detail::latex_impl(base_e, false) + "\\right)";
    bool first = true;
    for (int n = 0; n <= g.order; ++n) {
        Expr b = g.b[static_cast<size_t>(n)];
        if (b.is_zero()) continue;
        bool neg = detail::pull_minus(b);
        if (neg) b = -b;
        os << (first ? (neg ? "-" : "") : (neg ? " - " : " + "));
        first = false;
        if (n == 0) {
            os << to_latex(b);
            continue;
        }
        os << detail::latex_impl(b, true) << "\\," << base;
        if (n > 1) os << "^{" << n << "}";
    }
    if (first) os << "0";
    return os.str();
}

inline std::string to_text(const FourierSeries& f, const std::string& tvar = "t") {
    std::ostringstream os;
    os << f.unknown << ": harmonics of exp(-i*k*" << f.omega.str() << "*" << tvar << ")\n";
    for (int k = 0; k <= f.order; ++k)
        os << "k=" << k << ": " << f.harmonics[static_cast<size_t>(k)].str() << "\n";
    return os.str();
}

} // namespace opexp
