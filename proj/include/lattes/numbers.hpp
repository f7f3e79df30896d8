#pragma once

#include <gmpxx.h>

#include <cctype>
#include <cmath>
#include <compare>
#include <complex>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <utility>

#include "lattes/error.hpp"

namespace lattes {

using Integer = mpz_class;
using Rational = mpq_class;

// Perturbation injected into every float mirror of an exact value. Exact
// verdicts never read these mirrors, which the exactness regression checks.
inline double& float_mirror_perturbation() {
    thread_local double eps = 0.0;
    return eps;
}

inline double perturb_mirror(double x) {
    const double eps = float_mirror_perturbation();
    return eps == 0.0 ? x : x + eps * std::max(1.0, std::abs(x));
}

/// Removes square factors: returns (f, d) with n = f^2 * d and d square free.
inline std::pair<Integer, long> split_square_free(const Integer& n) {
    if (n < 0) throw Error(ErrorCode::SyntaxError, "negative radicand");
    if (n == 0) return {Integer(0), 0};
    if (!n.fits_slong_p() || n > Integer("1000000000000"))
        throw Error(ErrorCode::SyntaxError, "radicand too large: " + n.get_str());
    long rest = n.get_si();
    long factor = 1;
    for (long p = 2; p * p <= rest; ++p) {
        while (rest % (p * p) == 0) {
            rest /= p * p;
            factor *= p;
        }
    }
    return {Integer(factor), rest};
}

/// Exact element (u + v*sqrt(D)) / w of a real quadratic field.
///
/// Canonical form: w > 0, gcd(u, v, w) = 1, D square free, and v = 0 forces
/// D = 0. Two values combine only when they share D or one is rational.
class QuadraticNumber {
public:
    QuadraticNumber() = default;
    QuadraticNumber(long n) : u_(n) {}  // NOLINT(google-explicit-constructor)
    explicit QuadraticNumber(const Integer& n) : u_(n) {}
    template <class T>
    explicit QuadraticNumber(const __gmp_expr<mpz_t, T>& n) : u_(n) {}
    explicit QuadraticNumber(const Rational& q) : u_(q.get_num()), w_(q.get_den()) {}

    static QuadraticNumber make(Integer u, Integer v, Integer w, long radicand) {
        if (w == 0) throw Error(ErrorCode::SyntaxError, "zero denominator");
        if (radicand < 0) throw Error(ErrorCode::SyntaxError, "negative radicand");
        auto [f, d] = split_square_free(Integer(radicand));
        v *= f;
        if (d == 1) {
            u += v;
            v = 0;
            d = 0;
        }
        QuadraticNumber x;
        x.u_ = std::move(u);
        x.v_ = std::move(v);
        x.w_ = std::move(w);
        x.d_ = d;
        x.normalize();
        return x;
    }

    static QuadraticNumber ratio(const Integer& num, const Integer& den) {
        return make(num, 0, den, 0);
    }

    static QuadraticNumber sqrt_of(const Integer& n) {
        auto [f, d] = split_square_free(n);
        if (d <= 1) return QuadraticNumber(f * d);
        return make(0, f, 1, d);
    }

    const Integer& u() const { return u_; }
    const Integer& v() const { return v_; }
    const Integer& w() const { return w_; }
    long radicand() const { return d_; }

    bool is_rational() const { return v_ == 0; }
    bool is_zero() const { return u_ == 0 && v_ == 0; }
    bool is_integer() const { return v_ == 0 && w_ == 1; }

    Rational rational_part() const { return canonical(u_, w_); }
    Rational irrational_coefficient() const { return v_ == 0 ? Rational(0) : canonical(v_, w_); }

    /// Rational value; throws if the number is irrational.
    Rational to_rational() const {
        if (!is_rational()) throw Error(ErrorCode::IncompatibleField, "expected a rational value, got " + str());
        return canonical(u_, w_);
    }

    Integer to_integer() const {
        if (!is_integer()) throw Error(ErrorCode::IncompatibleField, "expected an integer, got " + str());
        return u_;
    }

    static bool compatible(const QuadraticNumber& a, const QuadraticNumber& b) {
        return a.d_ == 0 || b.d_ == 0 || a.d_ == b.d_;
    }

    static long common_radicand(const QuadraticNumber& a, const QuadraticNumber& b) {
        if (!compatible(a, b))
            throw Error(ErrorCode::MixedRadicals, "sqrt(" + std::to_string(a.d_) + ") and sqrt(" +
                                                      std::to_string(b.d_) + ") in one scalar");
        return a.d_ != 0 ? a.d_ : b.d_;
    }

    friend QuadraticNumber operator+(const QuadraticNumber& a, const QuadraticNumber& b) {
        const long d = common_radicand(a, b);
        return raw(a.u_ * b.w_ + b.u_ * a.w_, a.v_ * b.w_ + b.v_ * a.w_, a.w_ * b.w_, d);
    }
    friend QuadraticNumber operator-(const QuadraticNumber& a, const QuadraticNumber& b) {
        const long d = common_radicand(a, b);
        return raw(a.u_ * b.w_ - b.u_ * a.w_, a.v_ * b.w_ - b.v_ * a.w_, a.w_ * b.w_, d);
    }
    friend QuadraticNumber operator*(const QuadraticNumber& a, const QuadraticNumber& b) {
        const long d = common_radicand(a, b);
        return raw(a.u_ * b.u_ + a.v_ * b.v_ * d, a.u_ * b.v_ + a.v_ * b.u_, a.w_ * b.w_, d);
    }
    friend QuadraticNumber operator/(const QuadraticNumber& a, const QuadraticNumber& b) {
        return a * b.inverse();
    }
    QuadraticNumber operator-() const { return raw(-u_, -v_, w_, d_); }

    QuadraticNumber& operator+=(const QuadraticNumber& o) { return *this = *this + o; }
    QuadraticNumber& operator-=(const QuadraticNumber& o) { return *this = *this - o; }
    QuadraticNumber& operator*=(const QuadraticNumber& o) { return *this = *this * o; }

    QuadraticNumber inverse() const {
        if (is_zero()) throw Error(ErrorCode::SyntaxError, "division by zero");
        const Integer norm = u_ * u_ - v_ * v_ * d_;
        return raw(w_ * u_, -w_ * v_, norm, d_);
    }

    /// Exact sign by integer comparison of u^2 against v^2 D.
    int sign() const {
        const int su = sgn(u_);
        const int sv = sgn(v_);
        if (sv == 0) return su;
        if (su == 0 || su == sv) return sv;
        const Integer lhs = u_ * u_;
        const Integer rhs = v_ * v_ * d_;
        return lhs > rhs ? su : sv;
    }

    Integer floor() const {
        if (v_ == 0) {
            Integer q;
            mpz_fdiv_q(q.get_mpz_t(), u_.get_mpz_t(), w_.get_mpz_t());
            return q;
        }
        // sqrt(v^2 D) is irrational, so v*sqrt(D) lies strictly between
        // consecutive integers and floor(u + v sqrt D) follows from isqrt.
        Integer t;
        const Integer sq = v_ * v_ * d_;
        mpz_sqrt(t.get_mpz_t(), sq.get_mpz_t());
        const Integer num_floor = v_ > 0 ? Integer(u_ + t) : Integer(u_ - t - 1);
        Integer q;
        mpz_fdiv_q(q.get_mpz_t(), num_floor.get_mpz_t(), w_.get_mpz_t());
        return q;
    }

    Integer ceil() const {
        const Integer f = floor();
        return (*this == QuadraticNumber(f)) ? f : Integer(f + 1);
    }

    QuadraticNumber mod1() const { return *this - QuadraticNumber(floor()); }

    friend bool operator==(const QuadraticNumber& a, const QuadraticNumber& b) {
        return a.u_ == b.u_ && a.v_ == b.v_ && a.w_ == b.w_ && a.d_ == b.d_;
    }
    friend std::strong_ordering operator<=>(const QuadraticNumber& a, const QuadraticNumber& b) {
        const int s = (a - b).sign();
        return s < 0 ? std::strong_ordering::less
                     : (s > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

    /// Float mirror, accurate even when u and v sqrt(D) nearly cancel.
    double to_double() const {
        if (v_ == 0) return perturb_mirror(Rational(u_, w_).get_d());
        mpf_class root(0, 256);
        mpf_class dd(d_, 256);
        mpf_sqrt(root.get_mpf_t(), dd.get_mpf_t());
        mpf_class vr(v_, 256);
        vr *= root;
        mpf_class num(u_, 256);
        if (sgn(u_) * sgn(v_) < 0) {
            // (u + v r) = (u^2 - v^2 D) / (u - v r)
            mpf_class norm(Integer(u_ * u_ - v_ * v_ * d_), 256);
            mpf_class den = num - vr;
            num = norm / den;
        } else {
            num += vr;
        }
        num /= mpf_class(w_, 256);
        return perturb_mirror(num.get_d());
    }

    /// Text in the number-expression grammar; re-parses to an equal value.
    std::string str() const {
        if (v_ == 0) return w_ == 1 ? u_.get_str() : u_.get_str() + "/" + w_.get_str();
        std::string rad = "sqrt(" + std::to_string(d_) + ")";
        std::string irr;
        const Integer av = abs(v_);
        irr = av == 1 ? rad : av.get_str() + "*" + rad;
        std::string num;
        if (u_ == 0) {
            num = (v_ < 0 ? "-" : "") + irr;
        } else {
            num = u_.get_str() + (v_ < 0 ? "-" : "+") + irr;
        }
        if (w_ == 1) return num;
        if (u_ == 0) return num + "/" + w_.get_str();
        return "(" + num + ")/" + w_.get_str();
    }

private:
    static Rational canonical(const Integer& n, const Integer& d) {
        Rational q(n, d);
        q.canonicalize();
        return q;
    }

    static int sgn(const Integer& x) { return ::sgn(x); }

    static QuadraticNumber raw(Integer u, Integer v, Integer w, long d) {
        QuadraticNumber x;
        x.u_ = std::move(u);
        x.v_ = std::move(v);
        x.w_ = std::move(w);
        x.d_ = d;
        x.normalize();
        return x;
    }

    void normalize() {
        if (w_ == 0) throw Error(ErrorCode::SyntaxError, "zero denominator");
        if (w_ < 0) {
            u_ = -u_;
            v_ = -v_;
            w_ = -w_;
        }
        if (v_ == 0) d_ = 0;
        if (d_ == 0) v_ = 0;
        Integer g;
        mpz_gcd(g.get_mpz_t(), u_.get_mpz_t(), v_.get_mpz_t());
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), w_.get_mpz_t());
        if (g != 1 && g != 0) {
            mpz_divexact(u_.get_mpz_t(), u_.get_mpz_t(), g.get_mpz_t());
            mpz_divexact(v_.get_mpz_t(), v_.get_mpz_t(), g.get_mpz_t());
            mpz_divexact(w_.get_mpz_t(), w_.get_mpz_t(), g.get_mpz_t());
        }
    }

    Integer u_{0};
    Integer v_{0};
    Integer w_{1};
    long d_{0};
};

using QN = QuadraticNumber;

inline QN qnum_mod1(const QN& x) { return x.mod1(); }
inline int qnum_sign(const QN& x) { return x.sign(); }

/// Complex scalar as (real, imaginary) over one shared radicand.
struct ComplexQ {
    QN re;
    QN im;

    ComplexQ() = default;
    ComplexQ(QN r, QN i) : re(std::move(r)), im(std::move(i)) {
        QN::common_radicand(re, im);
    }

    bool is_real() const { return im.is_zero(); }
    long radicand() const { return re.radicand() != 0 ? re.radicand() : im.radicand(); }

    friend ComplexQ operator+(const ComplexQ& a, const ComplexQ& b) { return {a.re + b.re, a.im + b.im}; }
    friend ComplexQ operator-(const ComplexQ& a, const ComplexQ& b) { return {a.re - b.re, a.im - b.im}; }
    friend ComplexQ operator*(const ComplexQ& a, const ComplexQ& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend ComplexQ operator/(const ComplexQ& a, const ComplexQ& b) {
        const QN norm = b.re * b.re + b.im * b.im;
        if (norm.is_zero()) throw Error(ErrorCode::SyntaxError, "division by zero");
        const ComplexQ num = a * ComplexQ{b.re, -b.im};
        return {num.re / norm, num.im / norm};
    }
    ComplexQ operator-() const { return {-re, -im}; }
    friend bool operator==(const ComplexQ& a, const ComplexQ& b) { return a.re == b.re && a.im == b.im; }

    QN norm_squared() const { return re * re + im * im; }
    std::complex<double> to_complex() const { return {re.to_double(), im.to_double()}; }

    std::string str() const {
        if (im.is_zero()) return re.str();
        std::string imag = im == QN(1) ? "i" : (im == QN(-1) ? "-i" : "(" + im.str() + ")*i");
        if (re.is_zero()) return imag;
        if (imag[0] == '-') return re.str() + imag;
        return re.str() + "+" + imag;
    }
};

namespace detail {

// Recursive-descent reader for the number-expression grammar. Every value
// is carried as a complex pair so that the imaginary unit may appear as a
// factor or as a suffix on a term ("1+1i", "sqrt(3)/2i", "2*i").
class ExprParser {
public:
    explicit ExprParser(std::string_view text) : s_(text) {}

    ComplexQ parse_complex() {
        ComplexQ v = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw Error(ErrorCode::SyntaxError, why + " at offset " + std::to_string(pos_) + " in \"" +
                                                std::string(s_) + "\"");
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    bool peek(char c) {
        skip();
        return pos_ < s_.size() && s_[pos_] == c;
    }

    ComplexQ expr() {
        ComplexQ acc;
        bool first = true;
        for (;;) {
            int sign = 1;
            if (accept('-')) {
                sign = -1;
            } else if (accept('+')) {
                if (first) fail("leading '+'");
            } else if (!first) {
                break;
            }
            ComplexQ t = term();
            acc = sign > 0 ? acc + t : acc - t;
            first = false;
        }
        return acc;
    }

    ComplexQ term() {
        ComplexQ acc = factor();
        for (;;) {
            if (accept('*')) {
                acc = acc * factor();
            } else if (accept('/')) {
                acc = acc / factor();
            } else {
                break;
            }
        }
        if (accept('i')) acc = acc * ComplexQ{QN(0), QN(1)};
        return acc;
    }

    ComplexQ factor() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            ComplexQ v = expr();
            if (!accept(')')) fail("missing ')'");
            return v;
        }
        if (c == 'i') {
            ++pos_;
            return {QN(0), QN(1)};
        }
        if (s_.substr(pos_, 4) == "sqrt") {
            pos_ += 4;
            if (!accept('(')) fail("expected '(' after sqrt");
            skip();
            Integer n = digits();
            if (!accept(')')) fail("missing ')' after radicand");
            return {QN::sqrt_of(n), QN(0)};
        }
        if (std::isdigit(static_cast<unsigned char>(c))) return {number(), QN(0)};
        fail("unexpected '" + std::string(1, c) + "'");
    }

    Integer digits() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (start == pos_) fail("expected digits");
        return Integer(std::string(s_.substr(start, pos_ - start)));
    }

    QN number() {
        Integer whole = digits();
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            const std::size_t start = pos_;
            Integer frac = 0;
            if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) frac = digits();
            Integer scale;
            mpz_ui_pow_ui(scale.get_mpz_t(), 10, pos_ - start);
            return QN::ratio(whole * scale + frac, scale);
        }
        return QN(whole);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline ComplexQ parse_complex(std::string_view text) {
    try {
        return detail::ExprParser(text).parse_complex();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::MixedRadicals || e.code() == ErrorCode::SyntaxError) throw;
        throw Error(ErrorCode::SyntaxError, e.message());
    }
}

inline QN qnum_parse(std::string_view text) {
    ComplexQ v = parse_complex(text);
    if (!v.im.is_zero())
        throw Error(ErrorCode::SyntaxError, "imaginary unit in real expression \"" + std::string(text) + "\"");
    return v.re;
}

}  // namespace lattes
