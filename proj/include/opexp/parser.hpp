#pragma once

// Text grammar for expressions.
//
//   symbols    [a-zA-Z][a-zA-Z0-9_]*
//   rationals  integer, or integer/integer via the division operator
//   operators  + - * / ^   (^ requires an integer exponent, right-assoc)
//   calls      exp(e), ln(e), D(f,x), D(f,x,x), D(u,t,...,x,...)
//   primes     h', h''  (x-derivatives of an abstract function)
//   h^(k)      for k >= 3 is the k-th x-derivative of h, matching the
//              printer; parenthesized integer exponents below 3 are powers
//
// Whether a bare identifier is a plain symbol, an abstract function of x,
// or a problem unknown is decided by the ParseContext. "i" is reserved for
// the imaginary unit; "exp", "ln" and "D" are reserved call names.

#include "opexp/expr.hpp"

#include <cctype>
#include <set>
#include <string>
#include <vector>

namespace opexp {

struct ParseError : std::runtime_error {
    size_t column; // 1-based
    ParseError(const std::string& msg, size_t col)
        : std::runtime_error(msg + " (column " + std::to_string(col) + ")"), column(col) {}
};

struct ParseContext {
    std::set<std::string> functions; // abstract functions of x
    std::set<std::string> unknowns;  // problem unknowns, enable D(u,t,...)
    std::string tvar = "t";
    std::string xvar = "x";
};

namespace detail {

struct Token {
    enum Kind { Num, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };
    Kind kind;
    std::string text;
    int primes = 0;
    size_t pos = 0; // 0-based offset into the source
};

inline std::vector<Token> lex(const std::string& src) {
    std::vector<Token> out;
    size_t i = 0;
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        size_t start = i;
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            out.push_back({Token::Num, src.substr(i, j - i), 0, start});
            i = j;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            size_t j = i;
            while (j < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
                ++j;
            int primes = 0;
            while (j < src.size() && src[j] == '\'') {
                ++primes;
                ++j;
            }
            out.push_back({Token::Ident, src.substr(i, j - i - static_cast<size_t>(primes)),
                           primes, start});
            i = j;
            continue;
        }
        Token::Kind k;
        switch (c) {
        case '+': k = Token::Plus; break;
        case '-': k = Token::Minus; break;
        case '*': k = Token::Star; break;
        case '/': k = Token::Slash; break;
        case '^': k = Token::Caret; break;
        case '(': k = Token::LParen; break;
        case ')': k = Token::RParen; break;
        case ',': k = Token::Comma; break;
        default:
            throw ParseError(std::string("unexpected character '") + c + "'", start + 1);
        }
        out.push_back({k, std::string(1, c), 0, start});
        ++i;
    }
    out.push_back({Token::End, "", 0, src.size()});
    return out;
}

class Parser {
public:
    Parser(const std::string& src, const ParseContext& ctx)
        : toks_(lex(src)), ctx_(ctx) {}

    Expr run() {
        Expr e = sum();
        expect(Token::End, "end of expression");
        return simplify(e);
    }

private:
    std::vector<Token> toks_;
    const ParseContext& ctx_;
    size_t at_ = 0;

    const Token& peek(size_t ahead = 0) const {
        size_t i = at_ + ahead;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    const Token& take() { return toks_[at_ < toks_.size() - 1 ? at_++ : at_]; }
    bool accept(Token::Kind k) {
        if (peek().kind != k) return false;
        take();
        return true;
    }
    void expect(Token::Kind k, const std::string& what) {
        if (peek().kind != k)
            throw ParseError("expected " + what + ", found '" +
                                 (peek().kind == Token::End ? "end of input" : peek().text) + "'",
                             peek().pos + 1);
        take();
    }

    Expr sum() {
        // a leading minus negates the first term
        Expr e = peek().kind == Token::Minus ? Expr() : term();
        while (true) {
            if (accept(Token::Plus))
                e = e + term();
            else if (accept(Token::Minus))
                e = e - term();
            else
                return e;
        }
    }

    Expr term() {
        Expr e = unary();
        while (true) {
            if (accept(Token::Star))
                e = e * unary();
            else if (accept(Token::Slash)) {
                const Token& t = peek();
                Expr d = unary();
                if (d.is_zero()) throw ParseError("division by zero", t.pos + 1);
                e = e / d;
            } else
                return e;
        }
    }

    Expr unary() {
        if (accept(Token::Minus)) return -unary();
        return power();
    }

    Expr power() {
        Expr base = primary();
        if (peek().kind != Token::Caret) return base;
        const Token& caret = peek();
        take();
        Expr e = unary(); // right-associative, allows a^-2 and a^b^c
        auto k = e.as_integer();
        if (!k) throw ParseError("exponent must be an integer", caret.pos + 1);
        if (*k < 0 && base.is_zero()) throw ParseError("division by zero", caret.pos + 1);
        return pow(base, *k);
    }

    Expr primary() {
        const Token& t = peek();
        switch (t.kind) {
        case Token::Num: {
            take();
            return num(Rational::parse(t.text));
        }
        case Token::LParen: {
            take();
            Expr e = sum();
            expect(Token::RParen, "')'");
            return e;
        }
        case Token::Ident:
            return identifier();
        default:
            throw ParseError("expected a value, found '" +
                                 (t.kind == Token::End ? "end of input" : t.text) + "'",
                             t.pos + 1);
        }
    }

    Expr identifier() {
        Token t = take();
        const std::string& name = t.text;

        if (name == "exp" || name == "ln") {
            if (t.primes) throw ParseError("'" + name + "' cannot carry primes", t.pos + 1);
            expect(Token::LParen, "'(' after " + name);
            Expr arg = sum();
            expect(Token::RParen, "')'");
            return name == "exp" ? exp_of(arg) : ln_of(arg);
        }
        if (name == "D") {
            if (t.primes) throw ParseError("'D' cannot carry primes", t.pos + 1);
            return derivative_call(t.pos);
        }
        if (peek().kind == Token::LParen)
            throw ParseError("unknown function '" + name + "'", t.pos + 1);

        if (t.primes > 0) {
            if (ctx_.unknowns.count(name))
                throw ParseError("write derivatives of unknown '" + name + "' as D(" + name +
                                     ",...)",
                                 t.pos + 1);
            return func(name, t.primes);
        }

        // h^(k) with a parenthesized literal k >= 3 is the printer's form for
        // high derivatives of an abstract function
        if (!ctx_.unknowns.count(name) && peek().kind == Token::Caret &&
            peek(1).kind == Token::LParen && peek(2).kind == Token::Num &&
            peek(3).kind == Token::RParen) {
            long k = std::stol(peek(2).text);
            if (k >= 3) {
                take();
                take();
                take();
                take();
                return func(name, static_cast<int>(k));
            }
        }

        if (name == kImaginaryName) return imaginary();
        if (ctx_.unknowns.count(name)) return unknown(name, 0, 0);
        if (ctx_.functions.count(name)) return func(name, 0);
        return sym(name);
    }

    Expr derivative_call(size_t dpos) {
        expect(Token::LParen, "'(' after D");
        const Token& f = peek();
        if (f.kind != Token::Ident || f.primes)
            throw ParseError("D(...) expects a plain name as first argument", f.pos + 1);
        std::string name = take().text;
        int nt = 0, nx = 0;
        while (accept(Token::Comma)) {
            const Token& v = peek();
            if (v.kind != Token::Ident)
                throw ParseError("D(...) expects variable names after the function", v.pos + 1);
            // the printer uses the literal markers t and x in D(...) even when
            // the problem's time variable is named differently
            if (v.text == ctx_.tvar || v.text == "t")
                ++nt;
            else if (v.text == ctx_.xvar || v.text == "x")
                ++nx;
            else
                throw ParseError("unknown derivative variable '" + v.text + "'", v.pos + 1);
            take();
        }
        expect(Token::RParen, "')'");
        if (nt + nx == 0) throw ParseError("D(...) needs at least one variable", dpos + 1);
        if (ctx_.unknowns.count(name)) return unknown(name, nt, nx);
        if (nt > 0)
            throw ParseError("time derivative of '" + name + "', which is not an unknown",
                             dpos + 1);
        return func(name, nx);
    }
};

} // namespace detail

inline Expr parse(const std::string& text, const ParseContext& ctx = {}) {
    return detail::Parser(text, ctx).run();
}

} // namespace opexp
