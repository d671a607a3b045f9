#pragma once

// Exact rational arithmetic for the symbolic kernel. Backed by
// boost::multiprecision::cpp_int so coefficient growth never overflows;
// the invariants (reduced, positive denominator) are maintained by the
// underlying cpp_rational.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace opexp {

using BigInt = boost::multiprecision::cpp_int;

class Rational {
public:
    Rational() : v_(0) {}
    Rational(long long n) : v_(n) {}          // NOLINT: implicit by design
    Rational(const BigInt& n) : v_(n) {}      // NOLINT
    Rational(const BigInt& n, const BigInt& d) {
        if (d == 0) throw std::domain_error("Rational: zero denominator");
        v_ = Rep(n, d);
    }

    BigInt numerator() const { return boost::multiprecision::numerator(v_); }
    BigInt denominator() const { return boost::multiprecision::denominator(v_); }

    bool is_zero() const { return v_ == 0; }
    bool is_one() const { return v_ == 1; }
    bool is_integer() const { return denominator() == 1; }
    int sign() const { return v_ < 0 ? -1 : (v_ > 0 ? 1 : 0); }

    Rational operator-() const { return Rational(Rep(-v_)); }
    Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
    Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
    Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
    Rational& operator/=(const Rational& o) {
        if (o.is_zero()) throw std::domain_error("Rational: division by zero");
        v_ /= o.v_;
        return *this;
    }

    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

    friend bool operator==(const Rational& a, const Rational& b) { return a.v_ == b.v_; }
    friend bool operator!=(const Rational& a, const Rational& b) { return a.v_ != b.v_; }
    friend bool operator<(const Rational& a, const Rational& b) { return a.v_ < b.v_; }
    friend bool operator<=(const Rational& a, const Rational& b) { return a.v_ <= b.v_; }
    friend bool operator>(const Rational& a, const Rational& b) { return a.v_ > b.v_; }
    friend bool operator>=(const Rational& a, const Rational& b) { return a.v_ >= b.v_; }

    Rational abs() const { return v_ < 0 ? -*this : *this; }

    // Integer power; negative exponents require a nonzero base.
    Rational pow(long long e) const {
        if (e == 0) return Rational(1);
        Rational base = *this;
        if (e < 0) {
            if (is_zero()) throw std::domain_error("Rational: 0 raised to negative power");
            base = Rational(1) / base;
            e = -e;
        }
        Rational out(1);
        while (e > 0) {
            if (e & 1) out *= base;
            base *= base;
            e >>= 1;
        }
        return out;
    }

    double to_double() const { return v_.convert_to<double>(); }

    std::string str() const {
        std::string s = numerator().str();
        if (!is_integer()) s += "/" + denominator().str();
        return s;
    }

    // Accepts "n" or "n/d", optionally signed.
    static Rational parse(const std::string& text) {
        auto slash = text.find('/');
        try {
            if (slash == std::string::npos) return Rational(BigInt(text));
            BigInt n(text.substr(0, slash));
            BigInt d(text.substr(slash + 1));
            return Rational(n, d);
        } catch (const std::exception&) {
            throw std::invalid_argument("not a rational literal: '" + text + "'");
        }
    }

private:
    using Rep = boost::multiprecision::cpp_rational;
    explicit Rational(Rep v) : v_(std::move(v)) {}
    Rep v_;
};

inline Rational factorial(int n) {
    Rational out(1);
    for (int k = 2; k <= n; ++k) out *= Rational(k);
    return out;
}

inline Rational binomial(int n, int k) {
    if (k < 0 || k > n) return Rational(0);
    Rational out(1);
    for (int j = 1; j <= k; ++j) out *= Rational(n - k + j) / Rational(j);
    return out;
}

} // namespace opexp
