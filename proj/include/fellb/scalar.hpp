#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <string>
#include <vector>

#include "fellb/error.hpp"

namespace fellb {

// Exact element of Q(i): re + im*i with rational re, im.
struct Scalar {
    mpq_class re, im;

    Scalar() : re(0), im(0) {}
    Scalar(long v) : re(v), im(0) {}  // NOLINT: implicit by design
    explicit Scalar(mpq_class r) : re(std::move(r)), im(0) {}
    Scalar(mpq_class r, mpq_class i) : re(std::move(r)), im(std::move(i)) {}

    static Scalar i() { return Scalar(mpq_class(0), mpq_class(1)); }

    bool is_zero() const { return re == 0 && im == 0; }
    bool is_real() const { return im == 0; }

    Scalar conj() const { return Scalar(re, -im); }
    // |z|^2, a rational.
    mpq_class norm2() const { return re * re + im * im; }

    Scalar operator-() const { return Scalar(-re, -im); }

    Scalar& operator+=(const Scalar& o) {
        re += o.re;
        im += o.im;
        return *this;
    }
    Scalar& operator-=(const Scalar& o) {
        re -= o.re;
        im -= o.im;
        return *this;
    }
    Scalar& operator*=(const Scalar& o) {
        mpq_class r = re * o.re - im * o.im;
        mpq_class i = re * o.im + im * o.re;
        re = std::move(r);
        im = std::move(i);
        return *this;
    }
    Scalar& operator/=(const Scalar& o) {
        mpq_class n = o.norm2();
        if (n == 0) throw Error("scalar division by zero");
        mpq_class r = (re * o.re + im * o.im) / n;
        mpq_class i = (im * o.re - re * o.im) / n;
        re = std::move(r);
        im = std::move(i);
        return *this;
    }

    friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
    friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }
    friend Scalar operator*(Scalar a, const Scalar& b) { return a *= b; }
    friend Scalar operator/(Scalar a, const Scalar& b) { return a /= b; }

    friend bool operator==(const Scalar& a, const Scalar& b) {
        return a.re == b.re && a.im == b.im;
    }
    friend bool operator!=(const Scalar& a, const Scalar& b) { return !(a == b); }

    // Deterministic total order (lexicographic on re, im); used only for
    // canonical sorting, it is not algebraically meaningful.
    friend bool operator<(const Scalar& a, const Scalar& b) {
        int c = cmp(a.re, b.re);
        if (c != 0) return c < 0;
        return cmp(a.im, b.im) < 0;
    }

    std::string str() const;
    static Scalar parse(const std::string& text);
};

using Vec = std::vector<Scalar>;

namespace detail {

inline std::string rational_str(const mpq_class& q) { return q.get_str(); }

inline mpq_class parse_rational(const std::string& s) {
    auto fail = [&]() -> mpq_class {
        throw InvalidInstance("cannot parse rational: '" + s + "'");
    };
    if (s.empty()) return fail();
    std::string num = s, den = "1";
    if (auto slash = s.find('/'); slash != std::string::npos) {
        num = s.substr(0, slash);
        den = s.substr(slash + 1);
    }
    auto digits_ok = [](const std::string& t, bool sign_ok) {
        if (t.empty()) return false;
        std::size_t k = 0;
        if (sign_ok && (t[0] == '+' || t[0] == '-')) k = 1;
        if (k == t.size()) return false;
        for (; k < t.size(); ++k)
            if (t[k] < '0' || t[k] > '9') return false;
        return true;
    };
    if (!digits_ok(num, true) || !digits_ok(den, false)) return fail();
    if (num[0] == '+') num.erase(0, 1);  // mpz rejects a leading '+'
    mpz_class n(num), d(den);
    if (d == 0) return fail();
    mpq_class q(n, d);
    q.canonicalize();
    return q;
}

}  // namespace detail

// Canonical form: "a/b", "c/d*i", "a/b+c/d*i", "a/b-c/d*i" (denominator 1
// printed without "/1"; the imaginary coefficient is always printed, even
// when it is 1).
inline std::string Scalar::str() const {
    if (im == 0) return detail::rational_str(re);
    std::string imag = detail::rational_str(abs(im)) + "*i";
    std::string sign = im < 0 ? "-" : "+";
    if (re == 0) return (im < 0 ? "-" : "") + imag;
    return detail::rational_str(re) + sign + imag;
}

inline Scalar Scalar::parse(const std::string& text) {
    std::string s;
    for (char c : text)
        if (c != ' ') s.push_back(c);
    if (s.empty()) throw InvalidInstance("cannot parse scalar: empty string");
    if (s.back() != 'i') return Scalar(detail::parse_rational(s));
    // Split real and imaginary parts at the last top-level sign.
    std::size_t split = std::string::npos;
    for (std::size_t k = s.size(); k-- > 1;) {
        if ((s[k] == '+' || s[k] == '-') && s[k - 1] != '/' && s[k - 1] != '+' &&
            s[k - 1] != '-') {
            split = k;
            break;
        }
    }
    std::string real_part, imag_part;
    if (split == std::string::npos) {
        imag_part = s;
    } else {
        real_part = s.substr(0, split);
        imag_part = s.substr(split);
    }
    imag_part.pop_back();  // trailing 'i'
    if (!imag_part.empty() && imag_part.back() == '*') imag_part.pop_back();
    mpq_class imq;
    if (imag_part.empty() || imag_part == "+")
        imq = 1;
    else if (imag_part == "-")
        imq = -1;
    else
        imq = detail::parse_rational(imag_part);
    mpq_class req = real_part.empty() ? mpq_class(0) : detail::parse_rational(real_part);
    return Scalar(req, imq);
}

}  // namespace fellb
