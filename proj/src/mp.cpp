#include "bianchi/mp.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace bianchi {

PrecisionScope::PrecisionScope(unsigned digits) : saved_(Real::default_precision()) {
    Real::default_precision(digits);
}

PrecisionScope::~PrecisionScope() { Real::default_precision(saved_); }

Complex& Complex::operator*=(const Complex& o) {
    Real r = re * o.re - im * o.im;
    im = re * o.im + im * o.re;
    re = std::move(r);
    return *this;
}

Complex& Complex::operator/=(const Complex& o) {
    Real d = o.norm();
    Real r = (re * o.re + im * o.im) / d;
    im = (im * o.re - re * o.im) / d;
    re = std::move(r);
    return *this;
}

Complex operator+(Complex a, const Complex& b) { return a += b; }
Complex operator-(Complex a, const Complex& b) { return a -= b; }
Complex operator-(const Complex& a) { return {-a.re, -a.im}; }
Complex operator*(Complex a, const Complex& b) { return a *= b; }
Complex operator*(Complex a, const Real& s) { return a *= s; }
Complex operator*(const Real& s, Complex a) { return a *= s; }
Complex operator/(Complex a, const Complex& b) { return a /= b; }
Complex operator/(Complex a, const Real& s) { return {a.re / s, a.im / s}; }

Complex inverse(const Complex& z) {
    Real d = z.norm();
    return {z.re / d, -z.im / d};
}

Complex pow(const Complex& z, long long e) {
    if (e < 0) return pow(inverse(z), -e);
    Complex result(1), base = z;
    while (e > 0) {
        if (e & 1) result *= base;
        e >>= 1;
        if (e) base *= base;
    }
    return result;
}

Real pi() {
    Real r;
    mpfr_const_pi(r.backend().data(), MPFR_RNDN);
    return r;
}

Complex unit_root(long long num, long long den) {
    long long r = ((num % den) + den) % den;
    // exact values at the quarter turns keep trivial characters exact
    if ((4 * r) % den == 0) {
        switch ((4 * r) / den) {
            case 0: return {1, 0};
            case 1: return {0, 1};
            case 2: return {-1, 0};
            default: return {0, -1};
        }
    }
    Real t = 2 * pi() * Real(r) / Real(den);
    return {cos(t), sin(t)};
}

Complex cexp(const Complex& z) {
    Real m = exp(z.re);
    return {m * cos(z.im), m * sin(z.im)};
}

Complex i_pow(long long e) { return unit_root(e, 4); }

Real binomial(int n, int k) {
    if (k < 0 || k > n) return Real(0);
    Real r = 1;
    for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
    return r;
}

Real factorial(int n) {
    Real r = 1;
    for (int j = 2; j <= n; ++j) r *= j;
    return r;
}

Real relative_difference(const Complex& a, const Complex& b, const Real& floor) {
    Real scale = std::max({a.abs(), b.abs(), floor});
    return (a - b).abs() / scale;
}

std::string to_string(const Real& x, int digits) {
    std::ostringstream os;
    os << std::setprecision(digits) << std::scientific << x;
    return os.str();
}

std::string to_string(const Complex& z, int digits) {
    return to_string(z.re, digits) + (z.im < 0 ? " - " : " + ") + to_string(abs(z.im), digits) + "i";
}

double to_double(const Real& x) { return x.convert_to<double>(); }

double log10_abs(const Real& x) {
    if (x == 0) return -std::numeric_limits<double>::infinity();
    return to_double(log10(abs(x)));
}

}  // namespace bianchi
