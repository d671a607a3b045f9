#pragma once

// Invertible time-variable substitutions and the induced transformation of
// a Cauchy problem. A substitution is declared with an explicit inverse,
// never inverted symbolically; invertibility is verified at construction by
// composing both ways.
//
// Built-ins: identity, the exponential map tau = exp(-p*t), and the Moebius
// map tau = t/(1+p*t). Custom maps load from a small key = value file.

#include "opexp/problem.hpp"

#include <fstream>
#include <sstream>
#include <string>

namespace opexp {

struct SubstitutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Substitution {
    std::string name;  // identity | exp | mobius | custom label
    std::string param; // parameter symbol, may be empty
    std::string told;  // time variable the forward map is written in
    std::string tnew;  // new time variable
    Expr forward;      // tau as an expression in told
    Expr inverse;      // told as an expression in tnew
};

inline void check_invertible(const Substitution& s) {
    Expr f_of_i = simplify(substitute(s.forward, sym_atom(s.told), s.inverse));
    if (f_of_i != sym(s.tnew))
        throw SubstitutionError("substitution '" + s.name +
                                "': forward(inverse) does not simplify to " + s.tnew + " (got " +
                                f_of_i.str() + ")");
    Expr i_of_f = simplify(substitute(s.inverse, sym_atom(s.tnew), s.forward));
    if (i_of_f != sym(s.told))
        throw SubstitutionError("substitution '" + s.name +
                                "': inverse(forward) does not simplify to " + s.told + " (got " +
                                i_of_f.str() + ")");
}

inline Substitution identity_sub(const std::string& tvar = "t") {
    Substitution s;
    s.name = "identity";
    s.told = tvar;
    s.tnew = tvar;
    s.forward = sym(tvar);
    s.inverse = sym(tvar);
    return s;
}

inline Substitution exp_sub(const std::string& tvar = "t", const std::string& param = "p",
                            const std::string& tnew = "tau") {
    Substitution s;
    s.name = "exp";
    s.param = param;
    s.told = tvar;
    s.tnew = tnew;
    s.forward = exp_of(-sym(param) * sym(tvar));
    s.inverse = -ln_of(sym(tnew)) / sym(param);
    check_invertible(s);
    return s;
}

inline Substitution mobius_sub(const std::string& tvar = "t", const std::string& param = "p",
                               const std::string& tnew = "tau") {
    Substitution s;
    s.name = "mobius";
    s.param = param;
    s.told = tvar;
    s.tnew = tnew;
    s.forward = sym(tvar) / (num(1) + sym(param) * sym(tvar));
    s.inverse = sym(tnew) / (num(1) - sym(param) * sym(tnew));
    check_invertible(s);
    return s;
}

// Swap directions: the inverse map becomes the forward one.
inline Substitution inverted(const Substitution& s) {
    Substitution r;
    r.name = s.name + "-inverse";
    r.param = s.param;
    r.told = s.tnew;
    r.tnew = s.told;
    r.forward = s.inverse;
    r.inverse = s.forward;
    return r;
}

// Bind a rational value for the substitution parameter.
inline Substitution bind_param(const Substitution& s, const Rational& value) {
    if (s.param.empty())
        throw SubstitutionError("substitution '" + s.name + "' has no parameter");
    if (value.is_zero())
        throw SubstitutionError("substitution parameter must be nonzero");
    Substitution r = s;
    r.param.clear();
    r.forward = simplify(substitute(s.forward, sym_atom(s.param), num(value)));
    r.inverse = simplify(substitute(s.inverse, sym_atom(s.param), num(value)));
    return r;
}

// File format:
//   name = mysub
//   tvar = t
//   tnew = tau
//   param = p          (optional)
//   forward = exp(-p*t)
//   inverse = -ln(tau)/p
inline Substitution load_substitution(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SubstitutionError("cannot open substitution file '" + path + "'");
    Substitution s;
    s.name = "custom";
    s.told = "t";
    s.tnew = "tau";
    std::string fwd_text, inv_text;
    std::string raw;
    int no = 0;
    while (std::getline(in, raw)) {
        ++no;
        auto hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        raw = detail::trim(raw);
        if (raw.empty()) continue;
        auto eq = raw.find('=');
        if (eq == std::string::npos)
            throw SubstitutionError(path + ":" + std::to_string(no) + ": expected 'key = value'");
        std::string key = detail::trim(raw.substr(0, eq));
        std::string val = detail::trim(raw.substr(eq + 1));
        if (key == "name")
            s.name = val;
        else if (key == "tvar")
            s.told = val;
        else if (key == "tnew")
            s.tnew = val;
        else if (key == "param")
            s.param = val;
        else if (key == "forward")
            fwd_text = val;
        else if (key == "inverse")
            inv_text = val;
        else
            throw SubstitutionError(path + ":" + std::to_string(no) + ": unknown key '" + key +
                                    "'");
    }
    if (fwd_text.empty() || inv_text.empty())
        throw SubstitutionError(path + ": a substitution needs both forward and inverse maps");
    try {
        s.forward = parse(fwd_text);
        s.inverse = parse(inv_text);
    } catch (const ParseError& pe) {
        throw SubstitutionError(path + ": " + pe.what());
    }
    check_invertible(s);
    return s;
}

// Rewrite the substitution for a problem whose time variable has a
// different name.
inline Substitution retarget(const Substitution& s, const std::string& tvar) {
    if (s.told == tvar) return s;
    Substitution r = s;
    r.forward = substitute(s.forward, sym_atom(s.told), sym(tvar));
    r.told = tvar;
    if (r.tnew == s.told) {
        // identity-style maps keep the problem's variable name
        r.inverse = substitute(s.inverse, sym_atom(s.tnew), sym(tvar));
        r.tnew = tvar;
    }
    return r;
}

// Change the time variable of a Cauchy problem. The transformed problem has
// unknowns W_i(tau) with W_i(forward(t)) = u_i(t); initial data re-anchors
// at tau0 = forward(a) through the chain rule.
inline Problem change_time_variable(const Problem& p, const Substitution& sub_in) {
    Substitution sub = retarget(sub_in, p.tvar);

    if (sub.tnew != p.tvar) {
        for (const auto& u : p.unknowns)
            if (u == sub.tnew)
                throw SubstitutionError("new time variable '" + sub.tnew +
                                        "' collides with an unknown");
        for (const auto& q : p.params)
            if (q == sub.tnew)
                throw SubstitutionError("new time variable '" + sub.tnew +
                                        "' collides with a parameter");
    }

    const Atom told = sym_atom(p.tvar);
    const Atom tnew = sym_atom(sub.tnew);

    // d tau / d t expressed in tau
    Expr phi_prime = simplify(substitute(diff(sub.forward, told), told, sub.inverse));

    Expr tau0e = simplify(substitute(sub.forward, told, num(p.a)));
    if (!tau0e.is_rational())
        throw SubstitutionError("image of the expansion point is not rational: " + tau0e.str());
    Rational tau0 = tau0e.as_rational();

    Expr slope0 = simplify(substitute(phi_prime, tnew, num(tau0)));
    if (slope0.is_zero())
        throw SubstitutionError("substitution is singular at the expansion point (d tau/d t = 0)");

    // T[i][m]: the m-th t-derivative of u_i written in the new variable
    auto dtau = [&](const Expr& e) {
        return derive(e, [&](const Atom& at) -> Expr {
            if (at.kind == AtomKind::symbol)
                return cmp(at, tnew) == 0 ? num(1) : Expr();
            if (at.kind == AtomKind::unknown) {
                Atom up = at;
                up.tord += 1;
                return make_atom(up);
            }
            return Expr();
        });
    };
    std::vector<std::vector<Expr>> T(p.dim());
    for (size_t i = 0; i < p.dim(); ++i) {
        T[i].push_back(unknown(p.unknowns[i], 0, 0));
        for (int m = 1; m <= p.torder[i]; ++m)
            T[i].push_back(simplify(phi_prime * dtau(T[i][static_cast<size_t>(m - 1)])));
    }

    auto transform_rhs = [&](const Expr& f) {
        Expr out = f;
        for (const auto& at : atoms(f)) {
            if (at.kind != AtomKind::unknown) continue;
            size_t j = static_cast<size_t>(p.unknown_index(at.name));
            Expr repl = T[j][static_cast<size_t>(at.tord)];
            for (int k = 0; k < at.xord; ++k) repl = total_diff_x(repl, p.xvar, p.tvar);
            out = substitute(out, at, repl);
        }
        return simplify(substitute(out, told, sub.inverse));
    };

    Problem q;
    q.kind = p.kind;
    q.unknowns = p.unknowns;
    q.tvar = sub.tnew;
    q.xvar = p.xvar;
    q.a = tau0;
    q.params = p.params;
    q.torder = p.torder;
    q.rhs.resize(p.dim());
    q.inits.resize(p.dim());

    for (size_t i = 0; i < p.dim(); ++i) {
        int K = p.torder[i];
        Atom top = unknown_atom(p.unknowns[i], K, 0);
        Expr t_top = T[i][static_cast<size_t>(K)];
        Expr coef = diff(t_top, top);
        Expr rest = substitute(t_top, top, Expr());
        q.rhs[i] = simplify((transform_rhs(p.rhs[i]) - rest) / coef);

        q.inits[i].resize(static_cast<size_t>(K));
        q.inits[i][0] = p.inits[i][0];
        for (int j = 1; j < K; ++j) {
            Expr tj = simplify(substitute(T[i][static_cast<size_t>(j)], tnew, num(tau0)));
            for (int m = j - 1; m >= 1; --m) {
                Atom lower = unknown_atom(p.unknowns[i], m, 0);
                tj = substitute(tj, lower, q.inits[i][static_cast<size_t>(m)]);
            }
            tj = substitute(tj, unknown_atom(p.unknowns[i], 0, 0), p.inits[i][0]);
            Atom cur = unknown_atom(p.unknowns[i], j, 0);
            Expr coefj = diff(tj, cur);
            Expr restj = substitute(tj, cur, Expr());
            q.inits[i][static_cast<size_t>(j)] =
                simplify((p.inits[i][static_cast<size_t>(j)] - restj) / coefj);
        }
    }

    // parameters of the transformed problem: whatever still occurs, plus the
    // substitution's own parameter when it survives
    std::vector<std::string> candidates = p.params;
    if (!sub.param.empty()) {
        bool declared = false;
        for (const auto& s : candidates) declared = declared || s == sub.param;
        if (!declared) candidates.push_back(sub.param);
    }
    q.params.clear();
    for (const auto& name : candidates) {
        bool used = false;
        for (const auto& e : q.rhs) used = used || contains_name(e, name);
        for (const auto& is : q.inits)
            for (const auto& e : is) used = used || contains_name(e, name);
        if (used) q.params.push_back(name);
    }
    return q;
}

} // namespace opexp
