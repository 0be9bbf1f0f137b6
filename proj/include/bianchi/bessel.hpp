#pragma once

#include "bianchi/mp.hpp"

#include <vector>

namespace bianchi {

// K_nu(x) for integer order and x > 0 at the current default precision
Real bessel_k(int nu, const Real& x);

// K_0(x), K_1(x), ..., K_nmax(x) by upward recurrence
std::vector<Real> bessel_k_orders(const Real& x, int nmax);

// int_x^oo u^a K_nu(u) du in closed form; requires a - |nu| odd and a > |nu|
Real incomplete_bessel_moment(int a, int nu, const Real& x);

// same, from precomputed K_0 .. K_a at x
Real incomplete_bessel_moment(int a, int nu, const Real& x, const std::vector<Real>& k_orders);

// x beyond which the asymptotic expansion is used
Real bessel_asymptotic_threshold();

}  // namespace bianchi
