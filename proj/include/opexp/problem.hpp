#pragma once

// Cauchy problems: ODE systems and 1+1-dimensional PDEs, explicit in the
// highest t-derivative, with initial data at t = a. Loaded from a small
// line-oriented text format:
//
//   # comment
//   kind = ode | pde
//   unknowns = u, v         (ODE systems; `unknown = u` for a single one)
//   unknown = u             (PDE)
//   tvar = t                (optional, default t)
//   a = 0                   (optional rational, default 0)
//   param = p, omega        (optional, declares plain symbols)
//   eq: D(u,t) = u^2        (one per unknown, highest t-derivative on the left)
//   init: u|a = c           (one per needed order)
//   init: D(u,t)|a = g
//
// In PDE files, identifiers in initial data that are not parameters are
// abstract functions of x. Right-hand sides may reference t, x, parameters
// and derivatives of the unknowns strictly below each equation's t-order.

#include "opexp/expr.hpp"
#include "opexp/parser.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace opexp {

enum class ProblemKind { ode_system, pde_1d };

struct ProblemError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Problem {
    ProblemKind kind = ProblemKind::ode_system;
    std::vector<std::string> unknowns;
    std::string tvar = "t";
    std::string xvar = "x";
    Rational a = Rational(0);
    std::vector<std::string> params;
    std::vector<int> torder;              // per unknown
    std::vector<Expr> rhs;                // per unknown, for the highest t-derivative
    std::vector<std::vector<Expr>> inits; // inits[i][j] = D(u_i,t^j) at t = a

    bool is_pde() const { return kind == ProblemKind::pde_1d; }
    size_t dim() const { return unknowns.size(); }
    bool first_order() const {
        for (int k : torder)
            if (k != 1) return false;
        return true;
    }
    int unknown_index(const std::string& name) const {
        for (size_t i = 0; i < unknowns.size(); ++i)
            if (unknowns[i] == name) return static_cast<int>(i);
        return -1;
    }

    friend bool operator==(const Problem& a, const Problem& b) {
        return a.kind == b.kind && a.unknowns == b.unknowns && a.tvar == b.tvar &&
               a.xvar == b.xvar && a.a == b.a && a.params == b.params && a.torder == b.torder &&
               a.rhs == b.rhs && a.inits == b.inits;
    }
    friend bool operator!=(const Problem& a, const Problem& b) { return !(a == b); }
};

// Parse context for expressions that belong to a problem (its initial data,
// oracle fixtures, and so on).
inline ParseContext problem_ctx(const Problem& p) {
    ParseContext ctx;
    ctx.tvar = p.tvar;
    ctx.xvar = p.xvar;
    for (const auto& u : p.unknowns) ctx.unknowns.insert(u);
    if (p.is_pde()) {
        for (const auto& is : p.inits)
            for (const auto& e : is)
                for (const auto& at : atoms(e))
                    if (at.kind == AtomKind::func) ctx.functions.insert(at.name);
    }
    return ctx;
}

namespace detail {

inline std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
    return out;
}

inline bool valid_identifier(const std::string& s) {
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return true;
}

} // namespace detail

inline Problem parse_problem(const std::string& text, const std::string& origin = "<string>") {
    struct Line {
        int no;
        std::string body;
    };
    std::vector<Line> lines;
    {
        std::istringstream in(text);
        std::string raw;
        int no = 0;
        while (std::getline(in, raw)) {
            ++no;
            auto hash = raw.find('#');
            if (hash != std::string::npos) raw = raw.substr(0, hash);
            raw = detail::trim(raw);
            if (!raw.empty()) lines.push_back({no, raw});
        }
    }
    auto fail = [&origin](int no, const std::string& msg) -> void {
        throw ProblemError(origin + ":" + std::to_string(no) + ": " + msg);
    };

    Problem p;
    bool saw_kind = false;
    std::vector<Line> eq_lines, init_lines;

    for (const auto& ln : lines) {
        if (ln.body.rfind("eq:", 0) == 0) {
            eq_lines.push_back({ln.no, detail::trim(ln.body.substr(3))});
            continue;
        }
        if (ln.body.rfind("init:", 0) == 0) {
            init_lines.push_back({ln.no, detail::trim(ln.body.substr(5))});
            continue;
        }
        auto eq = ln.body.find('=');
        if (eq == std::string::npos) fail(ln.no, "expected 'key = value'");
        std::string key = detail::trim(ln.body.substr(0, eq));
        std::string val = detail::trim(ln.body.substr(eq + 1));
        if (key == "kind") {
            if (val == "ode")
                p.kind = ProblemKind::ode_system;
            else if (val == "pde")
                p.kind = ProblemKind::pde_1d;
            else
                fail(ln.no, "kind must be 'ode' or 'pde'");
            saw_kind = true;
        } else if (key == "unknown" || key == "unknowns") {
            for (const auto& u : detail::split_list(val)) {
                if (!detail::valid_identifier(u)) fail(ln.no, "bad unknown name '" + u + "'");
                p.unknowns.push_back(u);
            }
        } else if (key == "tvar") {
            if (!detail::valid_identifier(val)) fail(ln.no, "bad tvar '" + val + "'");
            p.tvar = val;
        } else if (key == "a") {
            try {
                p.a = Rational::parse(val);
            } catch (const std::exception&) {
                fail(ln.no, "expansion point must be rational, got '" + val + "'");
            }
        } else if (key == "param") {
            for (const auto& q : detail::split_list(val)) {
                if (!detail::valid_identifier(q)) fail(ln.no, "bad parameter name '" + q + "'");
                p.params.push_back(q);
            }
        } else {
            fail(ln.no, "unknown key '" + key + "'");
        }
    }

    if (!saw_kind) fail(lines.empty() ? 1 : lines.back().no, "missing 'kind'");
    if (p.unknowns.empty()) fail(1, "missing 'unknown(s)'");
    if (p.is_pde() && p.unknowns.size() != 1)
        fail(1, "pde problems take a single unknown");
    if (p.tvar == p.xvar) fail(1, "tvar collides with the space variable");

    std::set<std::string> reserved{p.tvar, p.xvar, "i", "exp", "ln", "D"};
    for (const auto& u : p.unknowns)
        if (reserved.count(u)) fail(1, "unknown name '" + u + "' is reserved");
    for (const auto& q : p.params)
        if (reserved.count(q) || p.unknown_index(q) >= 0)
            fail(1, "parameter name '" + q + "' collides");

    ParseContext ctx;
    ctx.tvar = p.tvar;
    ctx.xvar = p.xvar;
    for (const auto& u : p.unknowns) ctx.unknowns.insert(u);

    // equations
    p.torder.assign(p.dim(), 0);
    p.rhs.assign(p.dim(), Expr());
    for (const auto& ln : eq_lines) {
        auto eqpos = ln.body.find('=');
        if (eqpos == std::string::npos) fail(ln.no, "expected 'eq: D(u,t,...) = expr'");
        std::string lhs_text = detail::trim(ln.body.substr(0, eqpos));
        std::string rhs_text = detail::trim(ln.body.substr(eqpos + 1));
        Expr lhs;
        try {
            lhs = parse(lhs_text, ctx);
        } catch (const ParseError& pe) {
            fail(ln.no, std::string("left-hand side: ") + pe.what());
        }
        const auto& ts = lhs.rep().terms;
        if (ts.size() != 1 || !ts[0].coeff.is_one() || ts[0].factors.size() != 1 ||
            ts[0].factors[0].second != 1 ||
            ts[0].factors[0].first.kind != FactorKind::atom ||
            ts[0].factors[0].first.atom.kind != AtomKind::unknown)
            fail(ln.no, "equation left-hand side must be D(u,t,...) for an unknown u");
        Atom lead = ts[0].factors[0].first.atom;
        if (lead.xord != 0)
            fail(ln.no, "equation left-hand side may not carry x-derivatives");
        if (lead.tord < 1) fail(ln.no, "equation left-hand side needs at least one t-derivative");
        int idx = p.unknown_index(lead.name);
        if (p.torder[static_cast<size_t>(idx)] != 0)
            fail(ln.no, "duplicate equation for unknown '" + lead.name + "'");
        Expr rhs;
        try {
            rhs = parse(rhs_text, ctx);
        } catch (const ParseError& pe) {
            fail(ln.no, std::string("right-hand side: ") + pe.what());
        }
        p.torder[static_cast<size_t>(idx)] = lead.tord;
        p.rhs[static_cast<size_t>(idx)] = rhs;
    }
    for (size_t i = 0; i < p.dim(); ++i)
        if (p.torder[i] == 0) fail(1, "missing equation for unknown '" + p.unknowns[i] + "'");

    // initial conditions
    p.inits.assign(p.dim(), {});
    for (size_t i = 0; i < p.dim(); ++i)
        p.inits[i].assign(static_cast<size_t>(p.torder[i]), Expr());
    std::vector<std::vector<bool>> have(p.dim());
    for (size_t i = 0; i < p.dim(); ++i) have[i].assign(static_cast<size_t>(p.torder[i]), false);

    std::set<std::string> param_set(p.params.begin(), p.params.end());
    for (const auto& ln : init_lines) {
        auto bar = ln.body.find('|');
        if (bar == std::string::npos) fail(ln.no, "expected 'init: u|a = expr'");
        std::string lhs_text = detail::trim(ln.body.substr(0, bar));
        std::string rest = detail::trim(ln.body.substr(bar + 1));
        auto eqpos = rest.find('=');
        if (eqpos == std::string::npos) fail(ln.no, "expected '= expr' after '|a'");
        std::string at_text = detail::trim(rest.substr(0, eqpos));
        std::string val_text = detail::trim(rest.substr(eqpos + 1));
        if (at_text != "a" && at_text != p.a.str())
            fail(ln.no, "initial conditions are taken at '|a'");
        Expr lhs;
        try {
            lhs = parse(lhs_text, ctx);
        } catch (const ParseError& pe) {
            fail(ln.no, std::string("left-hand side: ") + pe.what());
        }
        const auto& ts = lhs.rep().terms;
        if (ts.size() != 1 || !ts[0].coeff.is_one() || ts[0].factors.size() != 1 ||
            ts[0].factors[0].second != 1 ||
            ts[0].factors[0].first.kind != FactorKind::atom ||
            ts[0].factors[0].first.atom.kind != AtomKind::unknown)
            fail(ln.no, "initial condition left-hand side must be u or D(u,t,...)");
        Atom lead = ts[0].factors[0].first.atom;
        if (lead.xord != 0) fail(ln.no, "initial conditions may not carry x-derivatives");
        int idx = p.unknown_index(lead.name);
        if (lead.tord >= p.torder[static_cast<size_t>(idx)])
            fail(ln.no, "initial condition order exceeds the equation's t-order");

        // In a PDE problem undeclared identifiers in initial data are
        // abstract functions of x.
        Expr val;
        try {
            if (p.is_pde()) {
                ParseContext fctx = ctx;
                for (const auto& tok : detail::lex(val_text))
                    if (tok.kind == detail::Token::Ident && !param_set.count(tok.text) &&
                        tok.text != p.tvar && tok.text != p.xvar && tok.text != "exp" &&
                        tok.text != "ln" && tok.text != "D" && tok.text != "i" &&
                        !ctx.unknowns.count(tok.text))
                        fctx.functions.insert(tok.text);
                val = parse(val_text, fctx);
            } else {
                val = parse(val_text, ctx);
            }
        } catch (const ParseError& pe) {
            fail(ln.no, std::string("initial value: ") + pe.what());
        }
        for (const auto& at : atoms(val)) {
            if (at.kind == AtomKind::unknown)
                fail(ln.no, "initial data may not reference an unknown");
            if (at.kind == AtomKind::symbol && at.name == p.tvar)
                fail(ln.no, "initial data may not depend on the time variable");
            if (!p.is_pde() && at.kind == AtomKind::func)
                fail(ln.no, "abstract functions are not allowed in ODE initial data");
            if (!p.is_pde() && at.kind == AtomKind::symbol && at.name == p.xvar)
                fail(ln.no, "ODE problems have no space variable");
        }
        if (have[static_cast<size_t>(idx)][static_cast<size_t>(lead.tord)])
            fail(ln.no, "duplicate initial condition");
        have[static_cast<size_t>(idx)][static_cast<size_t>(lead.tord)] = true;
        p.inits[static_cast<size_t>(idx)][static_cast<size_t>(lead.tord)] = val;
    }
    for (size_t i = 0; i < p.dim(); ++i)
        for (size_t j = 0; j < have[i].size(); ++j)
            if (!have[i][j])
                throw ProblemError(origin + ": missing initial condition for '" + p.unknowns[i] +
                                   "' at t-order " + std::to_string(j));

    // right-hand side sanity
    for (size_t i = 0; i < p.dim(); ++i) {
        for (const auto& at : atoms(p.rhs[i])) {
            if (at.kind == AtomKind::unknown) {
                int j = p.unknown_index(at.name);
                if (at.tord >= p.torder[static_cast<size_t>(j)])
                    throw ProblemError(
                        origin + ": right-hand side for '" + p.unknowns[i] +
                        "' contains a t-derivative of '" + at.name +
                        "' at or above its equation's order (not explicit-form solvable)");
                if (!p.is_pde() && at.xord > 0)
                    throw ProblemError(origin + ": x-derivatives in an ODE right-hand side");
            } else if (at.kind == AtomKind::func) {
                throw ProblemError(origin + ": unexpected abstract function '" + at.name +
                                   "' in a right-hand side");
            } else if (at.kind == AtomKind::symbol) {
                if (at.name == p.xvar && !p.is_pde())
                    throw ProblemError(origin + ": ODE problems have no space variable");
            }
        }
    }
    return p;
}

inline Problem load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ProblemError("cannot open problem file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_problem(buf.str(), path);
}

// Companion reduction: one first-order unknown per t-derivative, mixed
// derivatives of the original unknown become space derivatives of the
// matching companion.
inline Problem reduce_to_first_order(const Problem& p) {
    if (p.first_order()) return p;

    Problem q;
    q.kind = p.kind;
    q.tvar = p.tvar;
    q.xvar = p.xvar;
    q.a = p.a;
    q.params = p.params;

    std::set<std::string> taken(p.unknowns.begin(), p.unknowns.end());
    for (const auto& s : p.params) taken.insert(s);
    taken.insert(p.tvar);
    taken.insert(p.xvar);

    // companion names: u, u_t, u_tt, ...
    std::vector<std::vector<std::string>> names(p.dim());
    for (size_t i = 0; i < p.dim(); ++i) {
        names[i].push_back(p.unknowns[i]);
        for (int j = 1; j < p.torder[i]; ++j) {
            std::string n = p.unknowns[i] + "_" + std::string(static_cast<size_t>(j), 't');
            while (taken.count(n)) n += "_";
            taken.insert(n);
            names[i].push_back(n);
        }
    }
    for (size_t i = 0; i < p.dim(); ++i)
        for (const auto& n : names[i]) {
            q.unknowns.push_back(n);
            q.torder.push_back(1);
        }

    auto companion = [&](const Atom& at) -> Expr {
        int i = p.unknown_index(at.name);
        if (i < 0 || at.kind != AtomKind::unknown) return make_atom(at);
        return unknown(names[static_cast<size_t>(i)][static_cast<size_t>(at.tord)], 0, at.xord);
    };
    auto remap = [&](const Expr& e) {
        Expr out = e;
        for (const auto& at : atoms(e))
            if (at.kind == AtomKind::unknown) out = substitute(out, at, companion(at));
        return out;
    };

    for (size_t i = 0; i < p.dim(); ++i) {
        for (int j = 0; j + 1 < p.torder[i]; ++j) {
            q.rhs.push_back(unknown(names[i][static_cast<size_t>(j + 1)], 0, 0));
            q.inits.push_back({p.inits[i][static_cast<size_t>(j)]});
        }
        q.rhs.push_back(remap(p.rhs[i]));
        q.inits.push_back({p.inits[i][static_cast<size_t>(p.torder[i] - 1)]});
    }
    return q;
}

} // namespace opexp
