#pragma once

#include "bianchi/errors.hpp"
#include "bianchi/mp.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

namespace bianchi {

// a + b*omega in the ring of integers of Q(sqrt d)
struct FieldElement {
    int64_t a = 0;
    int64_t b = 0;
    bool operator==(const FieldElement&) const = default;
    bool operator<(const FieldElement& o) const { return a < o.a || (a == o.a && b < o.b); }
    bool is_zero() const { return a == 0 && b == 0; }
};

int64_t checked_add(int64_t x, int64_t y);
int64_t checked_mul(int64_t x, int64_t y);

class ImagQuadField {
public:
    explicit ImagQuadField(int d);

    int d() const { return d_; }
    int disc() const { return disc_; }
    int D() const { return -disc_; }
    int w() const { return w_; }
    // omega^2 = t*omega - n
    int omega_trace() const { return t_; }
    int omega_norm() const { return n_; }
    FieldElement omega() const { return {0, 1}; }
    FieldElement delta() const;
    std::vector<FieldElement> units() const;

    FieldElement add(FieldElement x, FieldElement y) const;
    FieldElement sub(FieldElement x, FieldElement y) const;
    FieldElement neg(FieldElement x) const { return {-x.a, -x.b}; }
    FieldElement mul(FieldElement x, FieldElement y) const;
    FieldElement pow(FieldElement x, unsigned e) const;
    FieldElement conj(FieldElement x) const;
    FieldElement from_int(int64_t n) const { return {n, 0}; }
    int64_t norm(FieldElement x) const;
    int64_t trace(FieldElement x) const { return checked_add(checked_add(x.a, x.a), checked_mul(t_, x.b)); }
    // exact quotient x / y if it lies in the ring of integers
    std::optional<FieldElement> divide(FieldElement x, FieldElement y) const;
    bool divides(FieldElement y, FieldElement x) const { return divide(x, y).has_value(); }

    // associate with argument in [0, 2 pi / w)
    FieldElement canonical(FieldElement x) const;
    bool is_canonical(FieldElement x) const;

    Complex embed(FieldElement x) const;
    Complex embed(FieldElement x, unsigned digits) const;
    // Im(omega) under the fixed embedding
    Real omega_imag() const;

    // calls f(x, N(x)) for every nonzero x with N(x) <= bound
    void for_each_element(int64_t bound, const std::function<void(FieldElement, int64_t)>& f) const;

    bool operator==(const ImagQuadField& o) const { return d_ == o.d_; }

private:
    int d_;
    int disc_;
    int w_;
    int t_;
    int n_;
};

bool is_prime(int64_t n);
std::vector<std::pair<int64_t, int>> factor_integer(int64_t n);
int kronecker(int64_t a, int64_t p);

struct PrincipalIdeal {
    FieldElement gen;
    int64_t norm = 0;
    bool operator==(const PrincipalIdeal& o) const { return gen == o.gen; }
    bool operator<(const PrincipalIdeal& o) const {
        return norm < o.norm || (norm == o.norm && gen < o.gen);
    }
};

PrincipalIdeal make_ideal(const ImagQuadField& F, FieldElement gen);
PrincipalIdeal ideal_product(const ImagQuadField& F, const PrincipalIdeal& I, const PrincipalIdeal& J);

enum class SplitKind { Split, Inert, Ramified };

struct PrimeIdeal {
    PrincipalIdeal ideal;
    int64_t ell = 0;
    int residue_degree = 1;
    int ramification = 1;
};

struct Splitting {
    SplitKind kind;
    std::vector<PrimeIdeal> primes;
};

Splitting splitting_type(const ImagQuadField& F, int64_t ell);

// prime ideal factorization of (x), x nonzero
std::vector<std::pair<PrimeIdeal, int>> factor_element(const ImagQuadField& F, FieldElement x);

std::vector<PrincipalIdeal> ideals_up_to_norm(const ImagQuadField& F, int64_t X);

struct UnitGroup {
    std::vector<FieldElement> generators;
    std::vector<int> orders;
    // residue index -> exponent vector with respect to generators
    std::map<int64_t, std::vector<int>> dlog;
    int64_t order() const;
};

// O_K / f with a fixed system of representatives
class ResidueRing {
public:
    ResidueRing(const ImagQuadField& F, FieldElement f);

    const ImagQuadField& field() const { return F_; }
    FieldElement modulus() const { return f_; }
    int64_t size() const { return c0_ * c1_; }
    FieldElement reduce(FieldElement x) const;
    int64_t index(FieldElement x) const;
    FieldElement element(int64_t idx) const;
    bool is_unit(FieldElement x) const;
    std::vector<FieldElement> units() const;
    // y with x*y = 1 mod f
    FieldElement inverse(FieldElement x) const;
    const std::vector<std::pair<PrimeIdeal, int>>& prime_factors() const { return primes_; }
    UnitGroup unit_group() const;

private:
    ImagQuadField F_;
    FieldElement f_;
    int64_t c0_ = 1;
    int64_t c1_ = 1;
    int64_t h_ = 0;
    std::vector<std::pair<PrimeIdeal, int>> primes_;
};

// representatives of (O_K/f)^x together with generators and orders
UnitGroup residue_units(const ImagQuadField& F, const PrincipalIdeal& f);

// Euler phi of the ideal f from its factorization
int64_t ideal_phi(const ImagQuadField& F, const PrincipalIdeal& f);

}  // namespace bianchi
