#pragma once

// The linear derivation operators behind the proper-exponent solver.
//
// For a first-order ODE system the derivation is sum_i F_i(s, c) d/dc_i;
// for a first-order 1+1 PDE it acts on jet coordinates c, c', c'', ... of
// the initial-data functions in evolutionary (prolonged) form: the
// coefficient of d/dc^(j) is the j-th total x-derivative of the field's
// right-hand side. The generator augments either derivation with d/ds,
// which realizes the proper operator exponent without time ordering.

#include "opexp/problem.hpp"

#include <mutex>
#include <string>
#include <vector>

namespace opexp {

// Explicit finite form: sum of coeff * d/d(target).
struct Derivation {
    std::vector<std::pair<Expr, Atom>> terms;

    Expr apply(const Expr& e) const {
        return derive(e, [this](const Atom& a) {
            Expr v;
            for (const auto& [coeff, target] : terms)
                if (cmp(a, target) == 0) v = v + coeff;
            return v;
        });
    }
};

class Generator {
public:
    struct Field {
        std::string jet;  // jet family name: a symbol (ODE) or function (PDE)
        Expr rhs;         // F_i written in jets, s and parameters
    };

    Generator(std::vector<Field> fields, bool pde, std::string s_name, std::string xvar,
              std::string time_guard)
        : fields_(std::move(fields)), pde_(pde), s_name_(std::move(s_name)),
          xvar_(std::move(xvar)), time_guard_(std::move(time_guard)),
          cache_(fields_.size()) {
        for (size_t i = 0; i < fields_.size(); ++i) cache_[i].push_back(fields_[i].rhs);
    }
    Generator(const Generator& o)
        : fields_(o.fields_), pde_(o.pde_), s_name_(o.s_name_), xvar_(o.xvar_),
          time_guard_(o.time_guard_) {
        std::lock_guard<std::mutex> lock(o.mu_);
        cache_ = o.cache_;
    }

    const std::vector<Field>& fields() const { return fields_; }
    bool is_pde() const { return pde_; }
    const std::string& s_name() const { return s_name_; }

    // j-th prolongation coefficient of field i: (d/dx)^j F_i, computed on
    // demand and cached.
    Expr coefficient(size_t field, int j) const {
        std::lock_guard<std::mutex> lock(mu_);
        auto& col = cache_[field];
        while (static_cast<int>(col.size()) <= j)
            col.push_back(total_diff_x(col.back(), xvar_, time_guard_));
        return col[static_cast<size_t>(j)];
    }

    int field_of(const Atom& a) const {
        for (size_t i = 0; i < fields_.size(); ++i) {
            if (pde_) {
                if (a.kind == AtomKind::func && a.name == fields_[i].jet)
                    return static_cast<int>(i);
            } else {
                if (a.kind == AtomKind::symbol && a.name == fields_[i].jet)
                    return static_cast<int>(i);
            }
        }
        return -1;
    }

    Expr apply(const Expr& e) const {
        return derive(e, [this](const Atom& a) -> Expr {
            if (a.kind == AtomKind::symbol && a.name == s_name_) return num(1);
            int f = field_of(a);
            if (f < 0) return Expr();
            return coefficient(static_cast<size_t>(f), a.xord);
        });
    }

    // Finite snapshot through jet order max_order (d/ds excluded).
    Derivation materialize(int max_order) const {
        Derivation d;
        for (size_t i = 0; i < fields_.size(); ++i) {
            if (pde_) {
                for (int j = 0; j <= max_order; ++j)
                    d.terms.push_back({coefficient(i, j), func_atom(fields_[i].jet, j)});
            } else {
                d.terms.push_back({fields_[i].rhs, sym_atom(fields_[i].jet)});
            }
        }
        return d;
    }

private:
    std::vector<Field> fields_;
    bool pde_;
    std::string s_name_;
    std::string xvar_;
    std::string time_guard_;
    mutable std::mutex mu_;
    mutable std::vector<std::vector<Expr>> cache_;
};

namespace detail {

// Pick jet coordinate names for a problem: the bare initial-data name when
// the datum is a single atom, unique, and absent from every right-hand
// side (a datum symbol that also parameterizes an equation must stay
// distinct from the jet coordinate), otherwise a fresh name.
inline std::vector<std::string> jet_names(const Problem& p) {
    std::set<std::string> taken;
    taken.insert(p.tvar);
    taken.insert(p.xvar);
    taken.insert("s");
    for (const auto& s : p.params) taken.insert(s);
    for (const auto& u : p.unknowns) taken.insert(u);
    for (const auto& e : p.rhs)
        for (const auto& at : atoms(e)) taken.insert(at.name);

    std::vector<std::string> names(p.dim());
    for (size_t i = 0; i < p.dim(); ++i) {
        const Expr& init = p.inits[i][0];
        const auto& ts = init.rep().terms;
        if (ts.size() == 1 && ts[0].coeff.is_one() && ts[0].factors.size() == 1 &&
            ts[0].factors[0].second == 1 && ts[0].factors[0].first.kind == FactorKind::atom) {
            const Atom& at = ts[0].factors[0].first.atom;
            bool right_kind = p.is_pde() ? (at.kind == AtomKind::func && at.xord == 0)
                                         : (at.kind == AtomKind::symbol);
            if (right_kind && !taken.count(at.name)) {
                names[i] = at.name;
                taken.insert(at.name);
                continue;
            }
        }
        std::string n = p.dim() == 1 ? "c" : "c" + std::to_string(i + 1);
        while (taken.count(n)) n += "0";
        names[i] = n;
        taken.insert(n);
    }
    return names;
}

inline std::string generator_s_name(const Problem& p) {
    std::set<std::string> used{p.tvar, p.xvar};
    for (const auto& u : p.unknowns) used.insert(u);
    for (const auto& q : p.params) used.insert(q);
    for (const auto& is : p.inits)
        for (const auto& e : is)
            for (const auto& a : atoms(e)) used.insert(a.name);
    for (const auto& e : p.rhs)
        for (const auto& a : atoms(e)) used.insert(a.name);
    std::string s = "s";
    while (used.count(s)) s += "_";
    return s;
}

inline Generator make_generator(const Problem& p, const std::vector<std::string>& jets) {
    if (!p.first_order())
        throw std::invalid_argument("generator requires a first-order problem; reduce first");
    std::string s = generator_s_name(p);
    std::vector<Generator::Field> fields(p.dim());
    for (size_t i = 0; i < p.dim(); ++i) {
        Expr f = substitute(p.rhs[i], sym_atom(p.tvar), sym(s));
        for (const auto& at : atoms(f)) {
            if (at.kind != AtomKind::unknown) continue;
            size_t j = static_cast<size_t>(p.unknown_index(at.name));
            Expr jet = p.is_pde() ? func(jets[j], at.xord) : sym(jets[j]);
            f = substitute(f, at, jet);
        }
        fields[i] = {jets[i], f};
    }
    return Generator(std::move(fields), p.is_pde(), s, p.xvar, p.tvar);
}

} // namespace detail

inline Generator ode_generator(const Problem& p) {
    if (p.is_pde())
        throw std::invalid_argument("ode_generator: PDE problems use pde_generator");
    return detail::make_generator(p, detail::jet_names(p));
}
inline Generator ode_generator(const Problem& p, const std::vector<std::string>& jets) {
    if (p.is_pde())
        throw std::invalid_argument("ode_generator: PDE problems use pde_generator");
    return detail::make_generator(p, jets);
}

inline Generator pde_generator(const Problem& p) {
    if (!p.is_pde())
        throw std::invalid_argument("pde_generator: ODE problems use ode_generator");
    return detail::make_generator(p, detail::jet_names(p));
}
inline Generator pde_generator(const Problem& p, const std::vector<std::string>& jets) {
    if (!p.is_pde())
        throw std::invalid_argument("pde_generator: ODE problems use ode_generator");
    return detail::make_generator(p, jets);
}

inline Expr apply(const Generator& g, const Expr& e) { return g.apply(e); }
inline Expr apply(const Derivation& d, const Expr& e) { return d.apply(e); }

} // namespace opexp
