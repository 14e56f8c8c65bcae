#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace conjkit {

/**
 * Exact rational number.
 *
 * Thin value wrapper over GMP's mpq_class with the invariants we rely on
 * everywhere: always in lowest terms, denominator positive, comparisons
 * exact. Parsing accepts "p/q", plain integers and decimal literals
 * ("-1/6", "3", "0.875"), which is what the config files contain.
 */
class Rat {
public:
    Rat() : v_(0) {}
    Rat(long n) : v_(n) {}
    Rat(long n, long d) : v_(n, d) {
        if (d == 0) throw std::domain_error("Rat: zero denominator");
        v_.canonicalize();
    }
    explicit Rat(const mpz_class& n) : v_(n) {}
    Rat(const mpz_class& n, const mpz_class& d) : v_(n, d) {
        if (d == 0) throw std::domain_error("Rat: zero denominator");
        v_.canonicalize();
    }
    explicit Rat(mpq_class q) : v_(std::move(q)) { v_.canonicalize(); }

    static Rat parse(std::string_view s);

    const mpz_class& num() const { return v_.get_num(); }
    const mpz_class& den() const { return v_.get_den(); }

    double to_double() const { return v_.get_d(); }
    bool is_zero() const { return sgn(v_) == 0; }
    bool is_negative() const { return sgn(v_) < 0; }
    bool is_positive() const { return sgn(v_) > 0; }
    bool is_integer() const { return v_.get_den() == 1; }
    int sign() const { return sgn(v_); }

    Rat operator-() const { return Rat(mpq_class(-v_)); }
    Rat operator+(const Rat& o) const { return Rat(mpq_class(v_ + o.v_)); }
    Rat operator-(const Rat& o) const { return Rat(mpq_class(v_ - o.v_)); }
    Rat operator*(const Rat& o) const { return Rat(mpq_class(v_ * o.v_)); }
    Rat operator/(const Rat& o) const {
        if (o.is_zero()) throw std::domain_error("Rat: division by zero");
        return Rat(mpq_class(v_ / o.v_));
    }
    Rat& operator+=(const Rat& o) { v_ += o.v_; return *this; }
    Rat& operator-=(const Rat& o) { v_ -= o.v_; return *this; }
    Rat& operator*=(const Rat& o) { v_ *= o.v_; return *this; }
    Rat& operator/=(const Rat& o) { return *this = *this / o; }

    bool operator==(const Rat& o) const { return v_ == o.v_; }
    bool operator!=(const Rat& o) const { return v_ != o.v_; }
    bool operator<(const Rat& o) const { return v_ < o.v_; }
    bool operator<=(const Rat& o) const { return v_ <= o.v_; }
    bool operator>(const Rat& o) const { return v_ > o.v_; }
    bool operator>=(const Rat& o) const { return v_ >= o.v_; }

    Rat abs() const { return is_negative() ? -*this : *this; }
    Rat reciprocal() const {
        if (is_zero()) throw std::domain_error("Rat: reciprocal of zero");
        return Rat(den(), num());
    }

    // Integer power, n >= 0.
    Rat pow(unsigned long n) const {
        mpz_class pn, pd;
        mpz_pow_ui(pn.get_mpz_t(), num().get_mpz_t(), n);
        mpz_pow_ui(pd.get_mpz_t(), den().get_mpz_t(), n);
        return Rat(pn, pd);
    }

    std::string str() const {
        if (is_integer()) return num().get_str();
        return num().get_str() + "/" + den().get_str();
    }

    friend std::ostream& operator<<(std::ostream& os, const Rat& r) {
        return os << r.str();
    }

private:
    mpq_class v_;
};

inline Rat Rat::parse(std::string_view s) {
    // strip spaces
    std::string t;
    t.reserve(s.size());
    for (char ch : s)
        if (ch != ' ' && ch != '\t') t.push_back(ch);
    if (t.empty()) throw std::invalid_argument("Rat::parse: empty string");

    if (auto slash = t.find('/'); slash != std::string::npos) {
        mpz_class n, d;
        if (n.set_str(t.substr(0, slash), 10) != 0 ||
            d.set_str(t.substr(slash + 1), 10) != 0 || d == 0)
            throw std::invalid_argument("Rat::parse: bad fraction '" + t + "'");
        return Rat(n, d);
    }
    if (auto dot = t.find('.'); dot != std::string::npos) {
        std::string digits = t.substr(0, dot) + t.substr(dot + 1);
        std::size_t frac_len = t.size() - dot - 1;
        if (digits.empty() || digits == "-" || digits == "+")
            throw std::invalid_argument("Rat::parse: bad decimal '" + t + "'");
        mpz_class n;
        if (n.set_str(digits, 10) != 0)
            throw std::invalid_argument("Rat::parse: bad decimal '" + t + "'");
        mpz_class d;
        mpz_ui_pow_ui(d.get_mpz_t(), 10, frac_len);
        return Rat(n, d);
    }
    mpz_class n;
    if (n.set_str(t, 10) != 0)
        throw std::invalid_argument("Rat::parse: bad integer '" + t + "'");
    return Rat(n);
}

/// Exact square root if the operand is the square of a rational.
inline std::optional<Rat> exact_sqrt(const Rat& x) {
    if (x.is_negative()) return std::nullopt;
    if (x.is_zero()) return Rat(0);
    if (mpz_perfect_square_p(x.num().get_mpz_t()) &&
        mpz_perfect_square_p(x.den().get_mpz_t())) {
        mpz_class rn, rd;
        mpz_sqrt(rn.get_mpz_t(), x.num().get_mpz_t());
        mpz_sqrt(rd.get_mpz_t(), x.den().get_mpz_t());
        return Rat(rn, rd);
    }
    return std::nullopt;
}

struct RatInterval {
    Rat lo, hi;
    Rat width() const { return hi - lo; }
    bool contains(const Rat& x) const { return lo <= x && x <= hi; }
};

/**
 * Certified enclosure of sqrt(x), x > 0, with width <= tol.
 *
 * Newton iteration from above converges monotonically for the map
 * h -> (h + x/h)/2, so [x/h, h] always brackets the root.
 */
inline RatInterval sqrt_enclosure(const Rat& x, const Rat& tol) {
    if (x.is_negative()) throw std::domain_error("sqrt_enclosure: negative");
    if (x.is_zero()) return {Rat(0), Rat(0)};
    if (auto e = exact_sqrt(x)) return {*e, *e};

    double guess = std::sqrt(x.to_double()) * (1.0 + 1e-9);
    Rat hi(0);
    if (guess > 0 && std::isfinite(guess)) {
        // dyadic upper start from the double estimate
        int exp2 = 0;
        double mant = std::frexp(guess, &exp2);
        mpz_class m(static_cast<long>(std::ldexp(mant, 53)) + 1);
        int shift = exp2 - 53;
        if (shift >= 0) {
            mpz_class num = m << shift;
            hi = Rat(num);
        } else {
            mpz_class den(1);
            den <<= -shift;
            hi = Rat(m, den);
        }
    }
    if (hi.is_zero() || hi * hi < x) hi = x + Rat(1);  // safe fallback start
    Rat two(2);
    while (true) {
        Rat lo = x / hi;
        if (hi - lo <= tol) return {lo, hi};
        hi = (hi + lo) / two;
    }
}

}  // namespace conjkit
