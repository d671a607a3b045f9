#pragma once

// Square matrices with univariate polynomial entries over exact rationals:
// the desk-scale stand-in for t-dependent linear operators.

#include "opexp/parser.hpp"
#include "opexp/rational.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace opexp {

struct PolyQ {
    std::vector<Rational> c; // c[k] is the coefficient of x^k; trailing zeros trimmed

    PolyQ() = default;
    explicit PolyQ(Rational constant) {
        if (!constant.is_zero()) c.push_back(std::move(constant));
    }

    static PolyQ monomial(const Rational& coeff, int deg) {
        PolyQ p;
        if (coeff.is_zero()) return p;
        p.c.assign(static_cast<size_t>(deg) + 1, Rational(0));
        p.c.back() = coeff;
        return p;
    }

    void trim() {
        while (!c.empty() && c.back().is_zero()) c.pop_back();
    }
    bool is_zero() const { return c.empty(); }
    int degree() const { return static_cast<int>(c.size()) - 1; }
    int lowest_order() const { // -1 for the zero polynomial
        for (size_t k = 0; k < c.size(); ++k)
            if (!c[k].is_zero()) return static_cast<int>(k);
        return -1;
    }
    Rational coeff(int k) const {
        return k >= 0 && k < static_cast<int>(c.size()) ? c[static_cast<size_t>(k)] : Rational(0);
    }

    friend PolyQ operator+(const PolyQ& a, const PolyQ& b) {
        PolyQ out;
        out.c.resize(std::max(a.c.size(), b.c.size()), Rational(0));
        for (size_t k = 0; k < out.c.size(); ++k) out.c[k] = a.coeff(static_cast<int>(k)) + b.coeff(static_cast<int>(k));
        out.trim();
        return out;
    }
    friend PolyQ operator-(const PolyQ& a, const PolyQ& b) {
        PolyQ out;
        out.c.resize(std::max(a.c.size(), b.c.size()), Rational(0));
        for (size_t k = 0; k < out.c.size(); ++k) out.c[k] = a.coeff(static_cast<int>(k)) - b.coeff(static_cast<int>(k));
        out.trim();
        return out;
    }
    friend PolyQ operator*(const PolyQ& a, const PolyQ& b) {
        PolyQ out;
        if (a.is_zero() || b.is_zero()) return out;
        out.c.assign(a.c.size() + b.c.size() - 1, Rational(0));
        for (size_t i = 0; i < a.c.size(); ++i) {
            if (a.c[i].is_zero()) continue;
            for (size_t j = 0; j < b.c.size(); ++j) out.c[i + j] += a.c[i] * b.c[j];
        }
        out.trim();
        return out;
    }
    friend PolyQ operator*(const Rational& q, const PolyQ& a) {
        PolyQ out = a;
        for (auto& x : out.c) x *= q;
        out.trim();
        return out;
    }
    friend bool operator==(const PolyQ& a, const PolyQ& b) {
        if (a.c.size() != b.c.size()) return false;
        for (size_t k = 0; k < a.c.size(); ++k)
            if (a.c[k] != b.c[k]) return false;
        return true;
    }
    friend bool operator!=(const PolyQ& a, const PolyQ& b) { return !(a == b); }

    PolyQ derivative() const {
        PolyQ out;
        for (size_t k = 1; k < c.size(); ++k) out.c.push_back(Rational(static_cast<long long>(k)) * c[k]);
        out.trim();
        return out;
    }
    // definite integral from 0 to x
    PolyQ integral() const {
        PolyQ out;
        if (is_zero()) return out;
        out.c.assign(c.size() + 1, Rational(0));
        for (size_t k = 0; k < c.size(); ++k)
            out.c[k + 1] = c[k] / Rational(static_cast<long long>(k) + 1);
        return out;
    }
    Rational eval(const Rational& x) const {
        Rational out(0);
        for (size_t k = c.size(); k-- > 0;) out = out * x + c[k];
        return out;
    }
    // q(x + alpha)
    PolyQ shifted(const Rational& alpha) const {
        PolyQ out;
        PolyQ binom{Rational(1)};
        PolyQ base;
        base.c = {alpha, Rational(1)};
        for (size_t k = 0; k < c.size(); ++k) {
            out = out + c[k] * binom;
            binom = binom * base;
        }
        return out;
    }
    // keep orders <= deg only
    PolyQ truncated(int deg) const {
        PolyQ out = *this;
        if (static_cast<int>(out.c.size()) > deg + 1) out.c.resize(static_cast<size_t>(deg) + 1);
        out.trim();
        return out;
    }

    std::string str(const std::string& var = "tau") const {
        if (is_zero()) return "0";
        std::string out;
        bool first = true;
        for (size_t k = 0; k < c.size(); ++k) {
            if (c[k].is_zero()) continue;
            Rational q = c[k];
            if (first) {
                if (q < Rational(0)) out += "-";
            } else {
                out += q < Rational(0) ? " - " : " + ";
            }
            first = false;
            Rational aq = q.abs();
            std::string mag = aq.str();
            if (k == 0)
                out += mag;
            else {
                if (!aq.is_one()) out += mag + "*";
                out += var;
                if (k > 1) out += "^" + std::to_string(k);
            }
        }
        return out;
    }
};

// Exact extraction of a univariate polynomial from a parsed expression.
inline PolyQ poly_from_expr(const Expr& e, const std::string& var) {
    PolyQ out;
    for (const auto& m : e.rep().terms) {
        int deg = 0;
        for (const auto& [f, k] : m.factors) {
            if (f.kind == FactorKind::atom && f.atom.kind == AtomKind::symbol &&
                f.atom.name == var && k > 0) {
                deg = k;
            } else {
                throw std::invalid_argument("not a polynomial in '" + var + "': " + e.str());
            }
        }
        out = out + PolyQ::monomial(m.coeff, deg);
    }
    return out;
}

struct MatrixPoly {
    int d = 0;
    std::vector<PolyQ> e; // row major

    MatrixPoly() = default;
    explicit MatrixPoly(int dim) : d(dim), e(static_cast<size_t>(dim) * static_cast<size_t>(dim)) {}

    static MatrixPoly identity(int dim) {
        MatrixPoly m(dim);
        for (int i = 0; i < dim; ++i) m.at(i, i) = PolyQ(Rational(1));
        return m;
    }

    PolyQ& at(int i, int j) { return e[static_cast<size_t>(i) * static_cast<size_t>(d) + static_cast<size_t>(j)]; }
    const PolyQ& at(int i, int j) const {
        return e[static_cast<size_t>(i) * static_cast<size_t>(d) + static_cast<size_t>(j)];
    }

    friend MatrixPoly operator+(const MatrixPoly& a, const MatrixPoly& b) {
        MatrixPoly out(a.d);
        for (size_t k = 0; k < a.e.size(); ++k) out.e[k] = a.e[k] + b.e[k];
        return out;
    }
    friend MatrixPoly operator-(const MatrixPoly& a, const MatrixPoly& b) {
        MatrixPoly out(a.d);
        for (size_t k = 0; k < a.e.size(); ++k) out.e[k] = a.e[k] - b.e[k];
        return out;
    }
    friend MatrixPoly operator*(const MatrixPoly& a, const MatrixPoly& b) {
        MatrixPoly out(a.d);
        for (int i = 0; i < a.d; ++i)
            for (int j = 0; j < a.d; ++j) {
                PolyQ s;
                for (int k = 0; k < a.d; ++k) s = s + a.at(i, k) * b.at(k, j);
                out.at(i, j) = s;
            }
        return out;
    }
    friend MatrixPoly operator*(const Rational& q, const MatrixPoly& a) {
        MatrixPoly out(a.d);
        for (size_t k = 0; k < a.e.size(); ++k) out.e[k] = q * a.e[k];
        return out;
    }
    friend MatrixPoly operator-(const MatrixPoly& a) { return Rational(-1) * a; }
    friend bool operator==(const MatrixPoly& a, const MatrixPoly& b) {
        return a.d == b.d && a.e == b.e;
    }

    bool is_zero() const {
        for (const auto& p : e)
            if (!p.is_zero()) return false;
        return true;
    }
    int lowest_order() const { // over all entries; -1 if zero
        int best = -1;
        for (const auto& p : e) {
            int o = p.lowest_order();
            if (o >= 0 && (best < 0 || o < best)) best = o;
        }
        return best;
    }
    int max_degree() const {
        int best = -1;
        for (const auto& p : e) best = std::max(best, p.degree());
        return best;
    }
    MatrixPoly map(const std::function<PolyQ(const PolyQ&)>& fn) const {
        MatrixPoly out(d);
        for (size_t k = 0; k < e.size(); ++k) out.e[k] = fn(e[k]);
        return out;
    }
    MatrixPoly integral() const {
        return map([](const PolyQ& p) { return p.integral(); });
    }
    MatrixPoly derivative() const {
        return map([](const PolyQ& p) { return p.derivative(); });
    }
    MatrixPoly shifted(const Rational& alpha) const {
        return map([&alpha](const PolyQ& p) { return p.shifted(alpha); });
    }
    MatrixPoly truncated(int deg) const {
        return map([deg](const PolyQ& p) { return p.truncated(deg); });
    }

    std::string str(const std::string& var = "tau") const {
        std::ostringstream os;
        os << d << "\n";
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) os << (j ? ", " : "") << at(i, j).str(var);
            os << "\n";
        }
        return os.str();
    }
};

// Matrix file: a dimension line, then d rows of comma-separated polynomial
// entries in tau (the expression grammar).
inline MatrixPoly parse_matrix(const std::string& text, const std::string& var = "tau",
                               const std::string& origin = "<string>") {
    std::istringstream in(text);
    std::string raw;
    std::vector<std::string> lines;
    while (std::getline(in, raw)) {
        auto hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        // trim
        size_t b = raw.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) continue;
        size_t e2 = raw.find_last_not_of(" \t\r\n");
        lines.push_back(raw.substr(b, e2 - b + 1));
    }
    if (lines.empty()) throw std::invalid_argument(origin + ": empty matrix file");
    int d = 0;
    try {
        d = std::stoi(lines[0]);
    } catch (const std::exception&) {
        throw std::invalid_argument(origin + ": first line must be the dimension");
    }
    if (d < 1 || static_cast<int>(lines.size()) != d + 1)
        throw std::invalid_argument(origin + ": expected " + std::to_string(d) + " matrix rows");
    MatrixPoly m(d);
    for (int i = 0; i < d; ++i) {
        std::vector<std::string> cells;
        std::string cur;
        int depth = 0;
        for (char c : lines[static_cast<size_t>(i) + 1]) {
            if (c == '(') ++depth;
            if (c == ')') --depth;
            if (c == ',' && depth == 0) {
                cells.push_back(cur);
                cur.clear();
            } else
                cur += c;
        }
        cells.push_back(cur);
        if (static_cast<int>(cells.size()) != d)
            throw std::invalid_argument(origin + ": row " + std::to_string(i + 1) + " has " +
                                        std::to_string(cells.size()) + " entries, expected " +
                                        std::to_string(d));
        for (int j = 0; j < d; ++j)
            m.at(i, j) = poly_from_expr(parse(cells[static_cast<size_t>(j)]), var);
    }
    return m;
}

inline MatrixPoly load_matrix(const std::string& path, const std::string& var = "tau") {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open matrix file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_matrix(buf.str(), var, path);
}

inline Rational random_rational(std::mt19937_64& rng, int max_abs_num = 4, int max_den = 3) {
    std::uniform_int_distribution<int> n(-max_abs_num, max_abs_num);
    std::uniform_int_distribution<int> d(1, max_den);
    return Rational(n(rng)) / Rational(d(rng));
}

inline PolyQ random_poly(std::mt19937_64& rng, int max_deg) {
    PolyQ p;
    for (int k = 0; k <= max_deg; ++k) p = p + PolyQ::monomial(random_rational(rng), k);
    return p;
}

inline MatrixPoly random_matrix(std::mt19937_64& rng, int dim, int max_deg) {
    MatrixPoly m(dim);
    for (auto& entry : m.e) entry = random_poly(rng, max_deg);
    return m;
}

} // namespace opexp
