#include "bianchi/bessel.hpp"

#include "bianchi/errors.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <cstdlib>

namespace bianchi {

namespace {

unsigned current_digits() { return Real::default_precision(); }

// K_nu(x) ~ sqrt(pi/(2x)) e^{-x} sum_j prod_{i<=j} (4nu^2 - (2i-1)^2) / (j! (8x)^j)
Real bessel_k_asymptotic(int nu, const Real& x) {
    Real mu = 4 * Real(nu) * nu;
    Real term = 1, sum = 1;
    Real eps = pow(Real(10), -static_cast<int>(current_digits()) - 5);
    Real prev = abs(term);
    for (int j = 1; j < 100000; ++j) {
        term *= (mu - Real(2 * j - 1) * (2 * j - 1)) / (8 * x * j);
        Real a = abs(term);
        if (a > prev) break;
        sum += term;
        if (a < eps) break;
        prev = a;
    }
    return sqrt(pi() / (2 * x)) * exp(-x) * sum;
}

}  // namespace

Real bessel_asymptotic_threshold() {
    // the smallest asymptotic term is about e^{-2x}
    return Real(std::max(70.0, 1.2 * current_digits() * 2.302585092994046 / 2 + 10));
}

Real bessel_k(int nu, const Real& x) {
    if (x <= 0) throw numerical_error("DomainError", "K_nu requires x > 0");
    nu = std::abs(nu);
    if (x > bessel_asymptotic_threshold()) return bessel_k_asymptotic(nu, x);
    return boost::math::cyl_bessel_k(nu, x);
}

std::vector<Real> bessel_k_orders(const Real& x, int nmax) {
    std::vector<Real> k(static_cast<size_t>(std::max(nmax, 1)) + 1);
    k[0] = bessel_k(0, x);
    k[1] = bessel_k(1, x);
    for (int n = 1; n < nmax; ++n) k[n + 1] = k[n - 1] + 2 * Real(n) / x * k[n];
    k.resize(static_cast<size_t>(nmax) + 1);
    return k;
}

Real incomplete_bessel_moment(int a, int nu, const Real& x, const std::vector<Real>& k_orders) {
    nu = std::abs(nu);
    if (a <= nu || (a - nu) % 2 == 0)
        throw unsupported_error("UnsupportedMoment", "closed form needs a - |nu| odd and positive (a=" +
                                                         std::to_string(a) + ", nu=" + std::to_string(nu) + ")");
    if (static_cast<int>(k_orders.size()) <= a) throw numerical_error("Internal", "not enough Bessel orders");
    // I(a, nu) = x^a K_{nu+1}(x) + (a - nu - 1) I(a - 1, nu + 1)
    Real sum = 0, coef = 1;
    Real xp = pow(x, a);
    for (int j = 0;; ++j) {
        sum += coef * xp * k_orders[nu + 1 + j];
        int c = a - nu - 1 - 2 * j;
        if (c == 0) break;
        coef *= c;
        xp /= x;
    }
    return sum;
}

Real incomplete_bessel_moment(int a, int nu, const Real& x) {
    return incomplete_bessel_moment(a, nu, x, bessel_k_orders(x, a));
}

}  // namespace bianchi
