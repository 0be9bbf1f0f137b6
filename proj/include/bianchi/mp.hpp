#pragma once

#include <boost/multiprecision/mpfr.hpp>

#include <cstdint>
#include <string>

namespace bianchi {

using Real = boost::multiprecision::mpfr_float;

// Sets the default MPFR precision (decimal digits) for the lifetime of the
// object. The default is process wide, so concurrent jobs must agree on it.
class PrecisionScope {
public:
    explicit PrecisionScope(unsigned digits);
    ~PrecisionScope();
    PrecisionScope(const PrecisionScope&) = delete;
    PrecisionScope& operator=(const PrecisionScope&) = delete;

private:
    unsigned saved_;
};

struct Complex {
    Real re;
    Real im;

    Complex() : re(0), im(0) {}
    Complex(const Real& r) : re(r), im(0) {}
    Complex(const Real& r, const Real& i) : re(r), im(i) {}
    Complex(long long r) : re(r), im(0) {}
    Complex(long long r, long long i) : re(r), im(i) {}

    Complex conj() const { return {re, -im}; }
    Real norm() const { return re * re + im * im; }
    Real abs() const { return sqrt(norm()); }
    bool is_zero() const { return re == 0 && im == 0; }

    Complex& operator+=(const Complex& o) { re += o.re; im += o.im; return *this; }
    Complex& operator-=(const Complex& o) { re -= o.re; im -= o.im; return *this; }
    Complex& operator*=(const Complex& o);
    Complex& operator*=(const Real& s) { re *= s; im *= s; return *this; }
    Complex& operator/=(const Complex& o);
};

Complex operator+(Complex a, const Complex& b);
Complex operator-(Complex a, const Complex& b);
Complex operator-(const Complex& a);
Complex operator*(Complex a, const Complex& b);
Complex operator*(Complex a, const Real& s);
Complex operator*(const Real& s, Complex a);
Complex operator/(Complex a, const Complex& b);
Complex operator/(Complex a, const Real& s);

Complex inverse(const Complex& z);
Complex pow(const Complex& z, long long e);
inline Real abs(const Complex& z) { return z.abs(); }

Real pi();
// e^{2 pi i num/den}
Complex unit_root(long long num, long long den);
Complex cexp(const Complex& z);
Complex i_pow(long long e);

Real binomial(int n, int k);
Real factorial(int n);

// |a - b| / max(|a|, |b|, floor)
Real relative_difference(const Complex& a, const Complex& b, const Real& floor);

std::string to_string(const Real& x, int digits);
std::string to_string(const Complex& z, int digits);
double to_double(const Real& x);
// log10 of |x|, -inf for zero
double log10_abs(const Real& x);

}  // namespace bianchi
