#pragma once

#include "bianchi/quadfield.hpp"

#include <string>
#include <vector>

namespace bianchi {

// e^{2 pi i k/n}, kept reduced with 0 <= k < n
struct RootOfUnity {
    int64_t k = 0;
    int64_t n = 1;

    static RootOfUnity make(int64_t k, int64_t n);
    RootOfUnity operator*(const RootOfUnity& o) const;
    RootOfUnity inverse() const { return make(-k, n); }
    RootOfUnity pow(int64_t e) const;
    bool is_one() const { return k == 0; }
    bool operator==(const RootOfUnity& o) const { return k == o.k && n == o.n; }
    Complex render() const { return unit_root(k, n); }
};

// x^q * conj(x)^r with integer exponents of either sign
struct Monomial {
    FieldElement x;
    int q = 0;
    int r = 0;
};

// exact value: root of unity times a product of monomials
struct CharacterValue {
    bool zero = false;
    RootOfUnity root;
    std::vector<Monomial> monomials;

    static CharacterValue zero_value();
    CharacterValue operator*(const CharacterValue& o) const;
    CharacterValue inverse() const;
    Complex render(const ImagQuadField& F) const;
    Real abs(const ImagQuadField& F) const;
};

class HeckeCharacter {
public:
    HeckeCharacter(const ImagQuadField& F, const PrincipalIdeal& conductor, int q, int r,
                   std::vector<RootOfUnity> generator_values, std::string id = "");

    const ImagQuadField& field() const { return F_; }
    const PrincipalIdeal& conductor() const { return f_; }
    int q() const { return q_; }
    int r() const { return r_; }
    const UnitGroup& group() const { return group_; }
    const ResidueRing& ring() const { return ring_; }
    const std::vector<RootOfUnity>& generator_values() const { return values_; }
    const std::string& id() const { return id_; }
    void set_id(std::string id) { id_ = std::move(id); }

    bool coprime(FieldElement x) const { return ring_.is_unit(x); }
    // finite part psi_f on a residue coprime to the conductor
    RootOfUnity finite(FieldElement x) const;
    Complex finite_complex(FieldElement x) const { return finite(x).render(); }
    // psi_infinity(x) = x^q conj(x)^r
    CharacterValue infinity(FieldElement x) const;
    bool is_trivial() const;

private:
    ImagQuadField F_;
    PrincipalIdeal f_;
    int q_;
    int r_;
    ResidueRing ring_;
    UnitGroup group_;
    std::vector<RootOfUnity> values_;
    std::string id_;
};

HeckeCharacter make_character(const ImagQuadField& F, const PrincipalIdeal& f, int q, int r,
                              const std::vector<RootOfUnity>& generator_values, const std::string& id = "");
HeckeCharacter trivial_character(const ImagQuadField& F);
HeckeCharacter norm_character(const ImagQuadField& F, int k);

bool is_primitive(const HeckeCharacter& psi);
// all unit-compatible characters of the given conductor and infinity type
std::vector<HeckeCharacter> enumerate_characters(const ImagQuadField& F, const PrincipalIdeal& f, int q, int r,
                                                 bool primitive_only);

// chi(alpha) alpha^q conj(alpha)^r on the canonical generator, zero if not coprime
CharacterValue value_on_ideal(const HeckeCharacter& psi, const PrincipalIdeal& m);

// e^{2 pi i Tr(x / (f delta))}
Complex additive_character(const ImagQuadField& F, FieldElement x, FieldElement f);

// sum over residue units b of psi_f(b) e(Tr(b/(f delta)))
Complex gauss_sum(const HeckeCharacter& psi);
// the Gauss sum entering the L-value formula: psi_infinity(f delta) * gauss_sum(psi)
Complex gauss_factor(const HeckeCharacter& psi);

HeckeCharacter dual_character(const HeckeCharacter& psi, int k);

CharacterValue p_fin_value(const HeckeCharacter& psi, FieldElement alpha, int64_t p);

// components of an idele at the primes above p, given by elements of K placed at each prime
struct IdeleAtP {
    int64_t p = 0;
    std::vector<FieldElement> components;
};

CharacterValue sigma_p(const ImagQuadField& F, int64_t p, int q, int r, FieldElement x);
CharacterValue sigma_p(const ImagQuadField& F, int q, int r, const IdeleAtP& x);

std::vector<HeckeCharacter> parse_character_file(const std::string& path);
std::vector<HeckeCharacter> parse_character_text(const std::string& text);
std::string describe(const HeckeCharacter& psi);

}  // namespace bianchi
