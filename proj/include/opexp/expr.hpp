#pragma once

// Symbolic expression kernel over exact rationals.
//
// The canonical form is a sorted sum of monomials. Each monomial is a
// rational coefficient times a power product of factors, where a factor is
//   - an atom: a plain symbol, an abstract function of x with a derivative
//     order (h, h', h''), or an unknown of a Cauchy problem with mixed
//     t/x derivative orders,
//   - exp(E) of an expression (a single exp factor per monomial; products
//     of exponentials merge by adding arguments),
//   - ln(E) of an expression,
//   - an inverted sum (a polynomial denominator), which only ever carries
//     negative exponents; positive powers of sums are expanded.
// Sums are flattened and merged, numeric factors are folded into the
// coefficient, 0 and 1 are absorbed. Structural equality of the canonical
// form is expression equality.
//
// The reserved atom "i" is the imaginary unit: i^2 collapses to -1.

#include "opexp/rational.hpp"

#include <algorithm>
#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace opexp {

enum class AtomKind { symbol, func, unknown };

struct Atom {
    AtomKind kind = AtomKind::symbol;
    std::string name;
    int tord = 0; // t-derivative order; nonzero only for unknowns
    int xord = 0; // x-derivative order; zero for plain symbols
};

inline int cmp(const Atom& a, const Atom& b) {
    if (int c = a.name.compare(b.name)) return c < 0 ? -1 : 1;
    if (a.tord != b.tord) return a.tord < b.tord ? -1 : 1;
    if (a.xord != b.xord) return a.xord < b.xord ? -1 : 1;
    if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind) ? -1 : 1;
    return 0;
}
inline bool operator==(const Atom& a, const Atom& b) { return cmp(a, b) == 0; }
inline bool operator!=(const Atom& a, const Atom& b) { return cmp(a, b) != 0; }
inline bool operator<(const Atom& a, const Atom& b) { return cmp(a, b) < 0; }

inline Atom sym_atom(std::string name) { return Atom{AtomKind::symbol, std::move(name), 0, 0}; }
inline Atom func_atom(std::string name, int xord = 0) {
    return Atom{AtomKind::func, std::move(name), 0, xord};
}
inline Atom unknown_atom(std::string name, int tord = 0, int xord = 0) {
    return Atom{AtomKind::unknown, std::move(name), tord, xord};
}

inline const std::string kImaginaryName = "i";
inline bool is_imaginary(const Atom& a) {
    return a.kind == AtomKind::symbol && a.name == kImaginaryName;
}

struct ExprRep;

class Expr {
public:
    Expr(); // zero
    explicit Expr(std::shared_ptr<const ExprRep> rep) : rep_(std::move(rep)) {}

    const ExprRep& rep() const { return *rep_; }

    bool is_zero() const;
    bool is_rational() const;
    Rational as_rational() const; // requires is_rational()
    std::optional<long long> as_integer() const;

    std::string str() const;

private:
    std::shared_ptr<const ExprRep> rep_;
};

enum class FactorKind { atom = 0, exp_fn = 1, ln_fn = 2, sum_pow = 3 };

struct Factor {
    FactorKind kind = FactorKind::atom;
    Atom atom;
    Expr arg; // exp/ln argument or the base of an inverted sum
};

struct Monomial {
    Rational coeff;
    std::vector<std::pair<Factor, int>> factors; // sorted, exponents nonzero
};

struct ExprRep {
    std::vector<Monomial> terms; // sorted by factor key, coefficients nonzero
};

int cmp(const Expr& a, const Expr& b);

inline int cmp(const Factor& a, const Factor& b) {
    if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind) ? -1 : 1;
    if (a.kind == FactorKind::atom) return cmp(a.atom, b.atom);
    return cmp(a.arg, b.arg);
}

inline int cmp_key(const Monomial& a, const Monomial& b) {
    size_t n = std::min(a.factors.size(), b.factors.size());
    for (size_t i = 0; i < n; ++i) {
        if (int c = cmp(a.factors[i].first, b.factors[i].first)) return c;
        if (a.factors[i].second != b.factors[i].second)
            return a.factors[i].second < b.factors[i].second ? -1 : 1;
    }
    if (a.factors.size() != b.factors.size())
        return a.factors.size() < b.factors.size() ? -1 : 1;
    return 0;
}

inline int cmp(const Expr& a, const Expr& b) {
    const auto& ta = a.rep().terms;
    const auto& tb = b.rep().terms;
    size_t n = std::min(ta.size(), tb.size());
    for (size_t i = 0; i < n; ++i) {
        if (int c = cmp_key(ta[i], tb[i])) return c;
        if (ta[i].coeff != tb[i].coeff) return ta[i].coeff < tb[i].coeff ? -1 : 1;
    }
    if (ta.size() != tb.size()) return ta.size() < tb.size() ? -1 : 1;
    return 0;
}

inline bool operator==(const Expr& a, const Expr& b) { return cmp(a, b) == 0; }
inline bool operator!=(const Expr& a, const Expr& b) { return cmp(a, b) != 0; }
inline bool operator<(const Expr& a, const Expr& b) { return cmp(a, b) < 0; }

// ---------------------------------------------------------------------------
// construction

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& e, long long k);
Expr operator/(const Expr& a, const Expr& b);
Expr exp_of(const Expr& e);
Expr ln_of(const Expr& e);
Expr ratnormal(const Expr& e);

namespace detail {

inline const std::shared_ptr<const ExprRep>& zero_rep() {
    static const std::shared_ptr<const ExprRep> z = std::make_shared<ExprRep>();
    return z;
}

// Merge a list of already factor-normalized monomials into canonical order.
inline Expr from_normalized(std::vector<Monomial> ms) {
    std::sort(ms.begin(), ms.end(),
              [](const Monomial& a, const Monomial& b) { return cmp_key(a, b) < 0; });
    auto rep = std::make_shared<ExprRep>();
    for (auto& m : ms) {
        if (m.coeff.is_zero()) continue;
        if (!rep->terms.empty() && cmp_key(rep->terms.back(), m) == 0)
            rep->terms.back().coeff += m.coeff;
        else
            rep->terms.push_back(std::move(m));
        if (!rep->terms.empty() && rep->terms.back().coeff.is_zero()) rep->terms.pop_back();
    }
    return Expr(std::move(rep));
}

void normalize_mono_into(const Monomial& m, std::vector<Monomial>& out);

inline Expr from_raw(const std::vector<Monomial>& raw) {
    std::vector<Monomial> out;
    out.reserve(raw.size());
    for (const auto& m : raw) normalize_mono_into(m, out);
    return from_normalized(std::move(out));
}

// expand pow(e, k) for k >= 0 by binary exponentiation
Expr pow_nonneg(const Expr& e, long long k);

} // namespace detail

inline Expr::Expr() : rep_(detail::zero_rep()) {}

inline Expr num(Rational q) {
    if (q.is_zero()) return Expr();
    auto rep = std::make_shared<ExprRep>();
    rep->terms.push_back(Monomial{std::move(q), {}});
    return Expr(std::move(rep));
}
inline Expr num(long long n) { return num(Rational(n)); }

inline Expr make_atom(Atom a) {
    auto rep = std::make_shared<ExprRep>();
    Monomial m{Rational(1), {{Factor{FactorKind::atom, std::move(a), Expr()}, 1}}};
    rep->terms.push_back(std::move(m));
    return Expr(std::move(rep));
}
inline Expr sym(std::string name) { return make_atom(sym_atom(std::move(name))); }
inline Expr func(std::string name, int xord = 0) { return make_atom(func_atom(std::move(name), xord)); }
inline Expr unknown(std::string name, int tord = 0, int xord = 0) {
    return make_atom(unknown_atom(std::move(name), tord, xord));
}
inline Expr imaginary() { return make_atom(sym_atom(kImaginaryName)); }

inline bool Expr::is_zero() const { return rep_->terms.empty(); }
inline bool Expr::is_rational() const {
    return rep_->terms.empty() || (rep_->terms.size() == 1 && rep_->terms[0].factors.empty());
}
inline Rational Expr::as_rational() const {
    if (rep_->terms.empty()) return Rational(0);
    if (rep_->terms.size() == 1 && rep_->terms[0].factors.empty()) return rep_->terms[0].coeff;
    throw std::logic_error("Expr: not a rational constant: " + str());
}
inline std::optional<long long> Expr::as_integer() const {
    if (!is_rational()) return std::nullopt;
    Rational q = as_rational();
    if (!q.is_integer()) return std::nullopt;
    const BigInt& n = q.numerator();
    if (n > BigInt(std::numeric_limits<long long>::max()) ||
        n < BigInt(std::numeric_limits<long long>::min()))
        return std::nullopt;
    return n.convert_to<long long>();
}

namespace detail {

// Content-and-sign normalization for denominators: e = content * unit, where
// unit has coprime integer coefficients and a positive leading coefficient.
inline std::pair<Rational, Expr> extract_content(const Expr& e) {
    const auto& ts = e.rep().terms;
    if (ts.empty()) return {Rational(0), Expr()};
    BigInt num_gcd = 0, den_lcm = 1;
    for (const auto& m : ts) {
        num_gcd = boost::multiprecision::gcd(num_gcd, boost::multiprecision::abs(m.coeff.numerator()));
        den_lcm = boost::multiprecision::lcm(den_lcm, m.coeff.denominator());
    }
    Rational content(num_gcd, den_lcm);
    if (ts.front().coeff < Rational(0)) content = -content;
    auto rep = std::make_shared<ExprRep>();
    rep->terms = ts;
    for (auto& m : rep->terms) m.coeff /= content;
    return {content, Expr(std::move(rep))};
}

// 1 / e for a sum with at least two terms; base must already be free of
// negative powers and inverted sums (callers ensure this via to_fraction).
inline Expr invert_plain_sum(const Expr& e) {
    auto [content, unit] = extract_content(e);
    Monomial m{Rational(1) / content, {{Factor{FactorKind::sum_pow, Atom{}, unit}, -1}}};
    std::vector<Monomial> out;
    normalize_mono_into(m, out);
    return from_normalized(std::move(out));
}

inline void normalize_mono_into(const Monomial& m, std::vector<Monomial>& out) {
    if (m.coeff.is_zero()) return;

    Rational coeff = m.coeff;
    std::vector<std::pair<Factor, int>> fs;
    std::vector<Expr> pending;           // expansion factors to multiply back in
    Expr exp_arg;                        // merged exponential argument
    long long imag_pow = 0;

    for (const auto& [f, k] : m.factors) {
        if (k == 0) continue;
        switch (f.kind) {
        case FactorKind::atom:
            if (is_imaginary(f.atom))
                imag_pow += k;
            else
                fs.push_back({f, k});
            break;
        case FactorKind::exp_fn:
            exp_arg = exp_arg + num(k) * f.arg;
            break;
        case FactorKind::ln_fn:
            if (f.arg.is_rational() && f.arg.as_rational().is_one()) {
                // ln 1 = 0: a positive power kills the monomial, a negative one
                // is a division by zero
                if (k < 0) throw std::domain_error("Expr: division by ln(1) = 0");
                return;
            }
            fs.push_back({f, k});
            break;
        case FactorKind::sum_pow:
            if (k > 0)
                pending.push_back(pow_nonneg(f.arg, k));
            else
                fs.push_back({f, k});
            break;
        }
    }

    // i^k reduction: period 4 with i^2 = -1
    long long r = ((imag_pow % 4) + 4) % 4;
    if (r == 2) coeff = -coeff;
    if (r == 3) coeff = -coeff;
    if (r == 1 || r == 3)
        fs.push_back({Factor{FactorKind::atom, sym_atom(kImaginaryName), Expr()}, 1});

    // Pull integer multiples of logarithms out of the exponential:
    // exp(n*ln(u) + rest) = u^n * exp(rest).
    if (!exp_arg.is_zero()) {
        std::vector<Monomial> kept;
        for (const auto& t : exp_arg.rep().terms) {
            if (t.factors.size() == 1 && t.factors[0].first.kind == FactorKind::ln_fn &&
                t.factors[0].second == 1 && t.coeff.is_integer()) {
                long long n = t.coeff.numerator().convert_to<long long>();
                pending.push_back(pow(t.factors[0].first.arg, n));
            } else {
                kept.push_back(t);
            }
        }
        Expr rest = from_normalized(std::move(kept));
        if (!rest.is_zero())
            fs.push_back({Factor{FactorKind::exp_fn, Atom{}, rest}, 1});
    }

    std::sort(fs.begin(), fs.end(),
              [](const auto& a, const auto& b) { return cmp(a.first, b.first) < 0; });
    std::vector<std::pair<Factor, int>> merged;
    for (auto& fk : fs) {
        if (!merged.empty() && cmp(merged.back().first, fk.first) == 0)
            merged.back().second += fk.second;
        else
            merged.push_back(std::move(fk));
        if (!merged.empty() && merged.back().second == 0) merged.pop_back();
    }

    if (pending.empty()) {
        out.push_back(Monomial{std::move(coeff), std::move(merged)});
        return;
    }
    Expr acc = from_normalized({Monomial{std::move(coeff), std::move(merged)}});
    for (const auto& p : pending) acc = acc * p;
    for (const auto& t : acc.rep().terms) out.push_back(t);
}

inline Expr pow_nonneg(const Expr& e, long long k) {
    Expr out = num(1);
    Expr base = e;
    while (k > 0) {
        if (k & 1) out = out * base;
        base = base * base;
        k >>= 1;
    }
    return out;
}

// 1 / m for a single monomial
inline Expr invert_monomial(const Monomial& m) {
    if (m.coeff.is_zero()) throw std::domain_error("Expr: division by zero");
    Monomial inv{Rational(1) / m.coeff, {}};
    std::vector<Monomial> out;
    for (const auto& [f, k] : m.factors) {
        if (f.kind == FactorKind::exp_fn)
            inv.factors.push_back({Factor{FactorKind::exp_fn, Atom{}, num(-k) * f.arg}, 1});
        else
            inv.factors.push_back({f, -k});
    }
    normalize_mono_into(inv, out);
    return from_normalized(std::move(out));
}

struct Fraction {
    Expr num;                                  // no negative powers, no inverted sums
    Monomial den_mono;                         // positive exponents, coeff 1
    std::vector<std::pair<Expr, int>> den_sums; // normalized bases, powers > 0
};

Fraction to_fraction(const Expr& e);
bool exact_divide(const Expr& num, const Expr& den, Expr& quotient);

inline bool has_sum_pow(const Expr& e) {
    for (const auto& m : e.rep().terms)
        for (const auto& [f, k] : m.factors) {
            (void)k;
            if (f.kind == FactorKind::sum_pow) return true;
        }
    return false;
}

} // namespace detail

inline Expr operator+(const Expr& a, const Expr& b) {
    std::vector<Monomial> ms;
    ms.reserve(a.rep().terms.size() + b.rep().terms.size());
    for (const auto& m : a.rep().terms) ms.push_back(m);
    for (const auto& m : b.rep().terms) ms.push_back(m);
    return detail::from_normalized(std::move(ms));
}

inline Expr operator-(const Expr& a) {
    std::vector<Monomial> ms = a.rep().terms;
    for (auto& m : ms) m.coeff = -m.coeff;
    return detail::from_normalized(std::move(ms));
}

inline Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

inline Expr operator*(const Expr& a, const Expr& b) {
    std::vector<Monomial> out;
    out.reserve(a.rep().terms.size() * b.rep().terms.size());
    for (const auto& ma : a.rep().terms)
        for (const auto& mb : b.rep().terms) {
            Monomial m{ma.coeff * mb.coeff, ma.factors};
            m.factors.insert(m.factors.end(), mb.factors.begin(), mb.factors.end());
            detail::normalize_mono_into(m, out);
        }
    return detail::from_normalized(std::move(out));
}

inline Expr pow(const Expr& e, long long k) {
    if (k == 0) return num(1);
    if (k == 1) return e;
    const auto& ts = e.rep().terms;
    if (ts.empty()) {
        if (k < 0) throw std::domain_error("Expr: division by zero");
        return Expr();
    }
    if (ts.size() == 1) {
        // direct monomial power
        const Monomial& m = ts[0];
        Monomial p{m.coeff.pow(k), {}};
        for (const auto& [f, kk] : m.factors) {
            if (f.kind == FactorKind::exp_fn)
                p.factors.push_back({Factor{FactorKind::exp_fn, Atom{}, num(k * kk) * f.arg}, 1});
            else
                p.factors.push_back({f, static_cast<int>(kk * k)});
        }
        std::vector<Monomial> out;
        detail::normalize_mono_into(p, out);
        return detail::from_normalized(std::move(out));
    }
    if (k > 0) return detail::pow_nonneg(e, k);

    // Negative power of a sum: normalize to num/den and invert.
    detail::Fraction f = detail::to_fraction(ratnormal(e));
    Expr inv;
    if (f.num.rep().terms.size() == 1)
        inv = detail::invert_monomial(f.num.rep().terms[0]);
    else
        inv = detail::invert_plain_sum(f.num);
    Expr den = detail::from_normalized({f.den_mono});
    for (const auto& [base, p] : f.den_sums) den = den * detail::pow_nonneg(base, p);
    return pow(inv * den, -k);
}

inline Expr operator/(const Expr& a, const Expr& b) { return a * pow(b, -1); }

inline Expr exp_of(const Expr& e) {
    if (e.is_zero()) return num(1);
    Monomial m{Rational(1), {{Factor{FactorKind::exp_fn, Atom{}, e}, 1}}};
    std::vector<Monomial> out;
    detail::normalize_mono_into(m, out);
    return detail::from_normalized(std::move(out));
}

inline Expr ln_of(const Expr& e) {
    if (e.is_zero()) throw std::domain_error("ln of zero");
    const auto& ts = e.rep().terms;
    if (ts.size() == 1) {
        const Monomial& m = ts[0];
        // ln(exp(u)) = u
        if (m.coeff.is_one() && m.factors.size() == 1 &&
            m.factors[0].first.kind == FactorKind::exp_fn && m.factors[0].second == 1)
            return m.factors[0].first.arg;
        if (m.factors.empty() && m.coeff.is_one()) return Expr(); // ln 1 = 0
    }
    Monomial m{Rational(1), {{Factor{FactorKind::ln_fn, Atom{}, e}, 1}}};
    return detail::from_normalized({std::move(m)});
}

// ---------------------------------------------------------------------------
// fraction normalization

namespace detail {

inline Fraction to_fraction(const Expr& e) {
    // Collect the common denominator over all monomials.
    std::map<Expr, int> sum_need;   // inverted-sum base -> max power
    std::vector<std::pair<Factor, int>> mono_need; // factor -> max power (sorted later)
    auto bump = [](std::vector<std::pair<Factor, int>>& v, const Factor& f, int k) {
        for (auto& [g, p] : v)
            if (cmp(g, f) == 0) { p = std::max(p, k); return; }
        v.push_back({f, k});
    };
    for (const auto& m : e.rep().terms)
        for (const auto& [f, k] : m.factors) {
            if (k >= 0) continue;
            if (f.kind == FactorKind::sum_pow) {
                auto it = sum_need.find(f.arg);
                if (it == sum_need.end())
                    sum_need.emplace(f.arg, -k);
                else
                    it->second = std::max(it->second, -k);
            } else {
                bump(mono_need, f, -k);
            }
        }

    Fraction fr;
    fr.den_mono.coeff = Rational(1);
    for (auto& [f, k] : mono_need) fr.den_mono.factors.push_back({f, k});
    std::sort(fr.den_mono.factors.begin(), fr.den_mono.factors.end(),
              [](const auto& a, const auto& b) { return cmp(a.first, b.first) < 0; });
    for (const auto& [base, k] : sum_need) fr.den_sums.push_back({base, k});

    std::vector<Monomial> num_terms;
    for (const auto& m : e.rep().terms) {
        Monomial cleared{m.coeff, {}};
        std::map<Expr, int> sum_use;
        std::vector<std::pair<Factor, int>> mono_use;
        for (const auto& [f, k] : m.factors) {
            if (k >= 0) {
                cleared.factors.push_back({f, k});
            } else if (f.kind == FactorKind::sum_pow) {
                sum_use[f.arg] = -k;
            } else {
                mono_use.push_back({f, -k});
            }
        }
        // multiply by den / (own usage)
        for (const auto& [f, need] : fr.den_mono.factors) {
            int used = 0;
            for (const auto& [g, u] : mono_use)
                if (cmp(g, f) == 0) used = u;
            if (need - used > 0) cleared.factors.push_back({f, need - used});
        }
        Expr t = from_raw({cleared});
        for (const auto& [base, need] : fr.den_sums) {
            int used = 0;
            auto it = sum_use.find(base);
            if (it != sum_use.end()) used = it->second;
            if (need - used > 0) t = t * pow_nonneg(base, need - used);
        }
        fr.num = fr.num + t;
    }
    return fr;
}

// Graded-lex order on exponent vectors for exact multivariate division.
struct DivOrder {
    std::vector<Factor> vars;
    int index_of(const Factor& f) const {
        for (size_t i = 0; i < vars.size(); ++i)
            if (cmp(vars[i], f) == 0) return static_cast<int>(i);
        return -1;
    }
    std::vector<int> exps(const Monomial& m) const {
        std::vector<int> v(vars.size(), 0);
        for (const auto& [f, k] : m.factors) v[static_cast<size_t>(index_of(f))] = k;
        return v;
    }
    static bool less(const std::vector<int>& a, const std::vector<int>& b) {
        long da = 0, db = 0;
        for (int x : a) da += x;
        for (int x : b) db += x;
        if (da != db) return da < db;
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    }
};

inline bool exact_divide(const Expr& numer, const Expr& denom, Expr& quotient) {
    if (denom.is_zero()) return false;
    if (numer.is_zero()) { quotient = Expr(); return true; }

    DivOrder ord;
    auto add_vars = [&ord](const Expr& e) {
        for (const auto& m : e.rep().terms)
            for (const auto& [f, k] : m.factors) {
                (void)k;
                if (ord.index_of(f) < 0) ord.vars.push_back(f);
            }
    };
    add_vars(numer);
    add_vars(denom);

    auto leading = [&ord](const Expr& e) -> const Monomial& {
        const auto& ts = e.rep().terms;
        size_t best = 0;
        std::vector<int> bv = ord.exps(ts[0]);
        for (size_t i = 1; i < ts.size(); ++i) {
            std::vector<int> v = ord.exps(ts[i]);
            if (DivOrder::less(bv, v)) { best = i; bv = std::move(v); }
        }
        return ts[best];
    };

    const Monomial& dlead = leading(denom);
    std::vector<int> dv = ord.exps(dlead);

    Expr r = numer;
    Expr q;
    while (!r.is_zero()) {
        const Monomial& rl = leading(r);
        std::vector<int> rv = ord.exps(rl);
        Monomial qm{rl.coeff / dlead.coeff, {}};
        bool ok = true;
        for (size_t i = 0; i < ord.vars.size(); ++i) {
            int d = rv[i] - dv[i];
            if (d < 0) { ok = false; break; }
            if (d != 0) qm.factors.push_back({ord.vars[i], d});
        }
        if (!ok) return false;
        std::sort(qm.factors.begin(), qm.factors.end(),
                  [](const auto& a, const auto& b) { return cmp(a.first, b.first) < 0; });
        Expr qe = from_normalized({qm});
        q = q + qe;
        r = r - qe * denom;
    }
    quotient = q;
    return true;
}

} // namespace detail

// Cancel polynomial denominators where possible: collects everything over a
// common denominator, divides out exact factors, and reassembles. Identity
// on expressions without inverted sums.
inline Expr ratnormal(const Expr& e) {
    if (!detail::has_sum_pow(e)) return e;
    detail::Fraction fr = detail::to_fraction(e);

    // numerator may itself still contain nested inverted sums (from inside
    // exp/ln arguments it does not; from bases it cannot, bases are plain)
    Expr n = fr.num;
    std::vector<std::pair<Expr, int>> sums;
    for (auto [base, k] : fr.den_sums) {
        while (k > 0) {
            Expr q;
            if (detail::exact_divide(n, base, q)) {
                n = q;
                --k;
            } else {
                break;
            }
        }
        if (k > 0) sums.push_back({base, k});
    }
    // cancel single-factor denominators against the numerator's common factors
    Monomial dm{Rational(1), {}};
    for (const auto& [f, k] : fr.den_mono.factors) {
        int common = k;
        for (const auto& m : n.rep().terms) {
            int have = 0;
            for (const auto& [g, kk] : m.factors)
                if (cmp(g, f) == 0) have = kk;
            common = std::min(common, have);
            if (common == 0) break;
        }
        if (common > 0) {
            Monomial div{Rational(1), {{f, -common}}};
            n = n * detail::from_raw({div});
        }
        if (k - common > 0) dm.factors.push_back({f, k - common});
    }

    Expr out = n;
    if (!dm.factors.empty()) out = out * detail::invert_monomial(dm);
    for (const auto& [base, k] : sums) {
        Expr invb = detail::invert_plain_sum(base);
        out = out * pow(invb, k);
    }
    return out;
}

// Idempotent canonicalization; construction already canonicalizes the
// polynomial part, so this only adds fraction cancellation.
inline Expr simplify(const Expr& e) { return ratnormal(e); }

// ---------------------------------------------------------------------------
// calculus

// Generic first-order derivation: extends vel (the derivative of each atom)
// to the whole grammar through linearity, Leibniz and the chain rule.
inline Expr derive(const Expr& e, const std::function<Expr(const Atom&)>& vel) {
    Expr out;
    for (const auto& m : e.rep().terms) {
        for (size_t i = 0; i < m.factors.size(); ++i) {
            const auto& [f, k] = m.factors[i];
            Expr dfactor; // derivative of f^k divided by f^k, times f^k -> assembled below
            Monomial rest{m.coeff, {}};
            for (size_t j = 0; j < m.factors.size(); ++j)
                if (j != i) rest.factors.push_back(m.factors[j]);
            Expr rest_e = detail::from_raw({rest});

            switch (f.kind) {
            case FactorKind::atom: {
                Expr d = vel(f.atom);
                if (d.is_zero()) continue;
                dfactor = num(k) * pow(make_atom(f.atom), k - 1) * d;
                break;
            }
            case FactorKind::exp_fn: {
                Expr d = derive(f.arg, vel);
                if (d.is_zero()) continue;
                dfactor = exp_of(f.arg) * d; // exponent is always 1
                break;
            }
            case FactorKind::ln_fn: {
                Expr d = derive(f.arg, vel);
                if (d.is_zero()) continue;
                Expr lnf = detail::from_raw({Monomial{Rational(1), {{f, k - 1}}}});
                dfactor = num(k) * lnf * d * pow(f.arg, -1);
                break;
            }
            case FactorKind::sum_pow: {
                Expr d = derive(f.arg, vel);
                if (d.is_zero()) continue;
                Expr sp = detail::from_raw({Monomial{Rational(1), {{f, k - 1}}}});
                dfactor = num(k) * sp * d;
                break;
            }
            }
            out = out + rest_e * dfactor;
        }
    }
    return out;
}

// Partial derivative with respect to a single atom.
inline Expr diff(const Expr& e, const Atom& a) {
    return derive(e, [&a](const Atom& b) { return cmp(a, b) == 0 ? num(1) : Expr(); });
}
inline Expr diff(const Expr& e, const std::string& symbol_name) {
    return diff(e, sym_atom(symbol_name));
}

// Total derivative in the space variable: raises the x-derivative order of
// every abstract-function and unknown atom; the space symbol itself has
// derivative 1; all other plain symbols are constants. Expressions holding
// the time symbol are rejected, time is handled by the generators.
inline Expr total_diff_x(const Expr& e, const std::string& space = "x",
                         const std::string& time_guard = "t") {
    return derive(e, [&](const Atom& a) -> Expr {
        if (a.kind == AtomKind::symbol) {
            if (a.name == time_guard)
                throw std::domain_error("total_diff_x: expression depends on the time variable '" +
                                        time_guard + "'");
            if (a.name == space) return num(1);
            return Expr();
        }
        Atom up = a;
        up.xord += 1;
        return make_atom(up);
    });
}

// ---------------------------------------------------------------------------
// substitution

inline Expr substitute(const Expr& e, const Atom& target, const Expr& replacement) {
    Expr out;
    bool saw_fraction = false;
    for (const auto& m : e.rep().terms) {
        Expr term = num(m.coeff);
        for (const auto& [f, k] : m.factors) {
            if (k < 0 && f.kind == FactorKind::sum_pow) saw_fraction = true;
            switch (f.kind) {
            case FactorKind::atom:
                if (cmp(f.atom, target) == 0)
                    term = term * pow(replacement, k);
                else
                    term = term * pow(make_atom(f.atom), k);
                break;
            case FactorKind::exp_fn:
                term = term * exp_of(num(k) * substitute(f.arg, target, replacement));
                break;
            case FactorKind::ln_fn:
                term = term * pow(ln_of(substitute(f.arg, target, replacement)), k);
                break;
            case FactorKind::sum_pow:
                term = term * pow(substitute(f.arg, target, replacement), k);
                break;
            }
        }
        out = out + term;
    }
    if (saw_fraction || detail::has_sum_pow(out)) out = ratnormal(out);
    return out;
}

inline Expr substitute(const Expr& e, const std::string& symbol_name, const Expr& replacement) {
    return substitute(e, sym_atom(symbol_name), replacement);
}

// ---------------------------------------------------------------------------
// structure queries

inline void collect_atoms(const Expr& e, std::set<Atom>& out) {
    for (const auto& m : e.rep().terms)
        for (const auto& [f, k] : m.factors) {
            (void)k;
            if (f.kind == FactorKind::atom)
                out.insert(f.atom);
            else
                collect_atoms(f.arg, out);
        }
}
inline std::set<Atom> atoms(const Expr& e) {
    std::set<Atom> out;
    collect_atoms(e, out);
    return out;
}
inline bool contains_atom(const Expr& e, const Atom& a) {
    auto as = atoms(e);
    return as.count(a) > 0;
}
inline bool contains_name(const Expr& e, const std::string& name) {
    for (const auto& a : atoms(e))
        if (a.name == name) return true;
    return false;
}

// Substitute every member of an atom family (all derivative orders of one
// name) by the matching total-x-derivative of a base expression.
inline Expr substitute_family(const Expr& e, const Atom& base_atom, const Expr& value,
                              const std::string& space = "x", const std::string& time_guard = "t") {
    std::set<int> orders;
    int max_needed = -1;
    for (const auto& a : atoms(e))
        if (a.kind == base_atom.kind && a.name == base_atom.name && a.tord == base_atom.tord)
            max_needed = std::max(max_needed, a.xord);
    if (max_needed < 0) return e;
    std::vector<Expr> dvals(static_cast<size_t>(max_needed) + 1);
    dvals[0] = value;
    for (int j = 1; j <= max_needed; ++j)
        dvals[static_cast<size_t>(j)] = total_diff_x(dvals[static_cast<size_t>(j - 1)], space, time_guard);
    Expr out = e;
    for (int j = max_needed; j >= 0; --j) {
        Atom a = base_atom;
        a.xord = j;
        out = substitute(out, a, dvals[static_cast<size_t>(j)]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// numeric evaluation

using Bindings = std::map<Atom, std::complex<double>>;

inline std::complex<double> eval_complex(const Expr& e, const Bindings& bind) {
    auto ipow = [](std::complex<double> b, long long k) {
        if (k < 0) { b = 1.0 / b; k = -k; }
        std::complex<double> out = 1.0;
        while (k > 0) {
            if (k & 1) out *= b;
            b *= b;
            k >>= 1;
        }
        return out;
    };
    std::complex<double> total = 0.0;
    for (const auto& m : e.rep().terms) {
        std::complex<double> v = m.coeff.to_double();
        for (const auto& [f, k] : m.factors) {
            std::complex<double> base;
            switch (f.kind) {
            case FactorKind::atom: {
                if (is_imaginary(f.atom)) {
                    base = {0.0, 1.0};
                    break;
                }
                auto it = bind.find(f.atom);
                if (it == bind.end())
                    throw std::domain_error("eval: unbound atom '" +
                                            make_atom(f.atom).str() + "'");
                base = it->second;
                break;
            }
            case FactorKind::exp_fn:
                base = std::exp(eval_complex(f.arg, bind));
                break;
            case FactorKind::ln_fn:
                base = std::log(eval_complex(f.arg, bind));
                break;
            case FactorKind::sum_pow:
                base = eval_complex(f.arg, bind);
                break;
            }
            v *= ipow(base, k);
        }
        total += v;
    }
    return total;
}

inline double eval_real(const Expr& e, const Bindings& bind, double imag_tol = 1e-9) {
    std::complex<double> v = eval_complex(e, bind);
    if (std::abs(v.imag()) > imag_tol * (1.0 + std::abs(v.real())))
        throw std::domain_error("eval: expression evaluated to a complex number");
    return v.real();
}

// ---------------------------------------------------------------------------
// printing (plain text; the parser accepts everything printed here)

namespace detail {

inline std::string atom_str(const Atom& a) {
    if (a.kind == AtomKind::unknown) {
        if (a.tord == 0 && a.xord == 0) return a.name;
        std::string s = "D(" + a.name;
        for (int j = 0; j < a.tord; ++j) s += ",t";
        for (int j = 0; j < a.xord; ++j) s += ",x";
        return s + ")";
    }
    if (a.kind == AtomKind::func && a.xord > 0) {
        if (a.xord <= 2) return a.name + std::string(static_cast<size_t>(a.xord), '\'');
        return a.name + "^(" + std::to_string(a.xord) + ")";
    }
    return a.name;
}

inline std::string factor_str(const Factor& f) {
    switch (f.kind) {
    case FactorKind::atom:
        return atom_str(f.atom);
    case FactorKind::exp_fn:
        return "exp(" + f.arg.str() + ")";
    case FactorKind::ln_fn:
        return "ln(" + f.arg.str() + ")";
    case FactorKind::sum_pow:
        return "(" + f.arg.str() + ")";
    }
    return "";
}

inline std::string mono_str(const Monomial& m) {
    std::vector<std::string> numer, denom;
    Rational c = m.coeff.abs();
    if (c.numerator() != 1) numer.push_back(c.numerator().str());
    if (c.denominator() != 1) denom.push_back(c.denominator().str());
    for (const auto& [f, k] : m.factors) {
        std::string base = factor_str(f);
        int e = k > 0 ? k : -k;
        std::string piece = base;
        if (e != 1) piece += "^" + std::to_string(e);
        (k > 0 ? numer : denom).push_back(piece);
    }
    std::string ns;
    if (numer.empty())
        ns = "1";
    else
        for (size_t i = 0; i < numer.size(); ++i) ns += (i ? "*" : "") + numer[i];
    if (denom.empty()) return ns;
    std::string ds;
    for (size_t i = 0; i < denom.size(); ++i) ds += (i ? "*" : "") + denom[i];
    if (denom.size() > 1) ds = "(" + ds + ")";
    return ns + "/" + ds;
}

} // namespace detail

inline std::string Expr::str() const {
    const auto& ts = rep().terms;
    if (ts.empty()) return "0";
    std::string out;
    for (size_t i = 0; i < ts.size(); ++i) {
        bool neg = ts[i].coeff < Rational(0);
        if (i == 0)
            out += neg ? "-" : "";
        else
            out += neg ? " - " : " + ";
        out += detail::mono_str(ts[i]);
    }
    return out;
}

inline std::ostream& operator<<(std::ostream& os, const Expr& e) { return os << e.str(); }

} // namespace opexp
