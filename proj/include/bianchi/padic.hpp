#pragma once

#include "bianchi/forms.hpp"
#include "bianchi/hecke.hpp"
#include "bianchi/lfun.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bianchi {

// p^val * unit, known modulo p^prec; zero is stored with val = prec
class PadicNumber {
public:
    PadicNumber() = default;
    PadicNumber(int64_t p, int64_t prec);

    static PadicNumber from_integer(int64_t p, const BigInt& n, int64_t prec);
    static PadicNumber from_rational(int64_t p, const BigInt& num, const BigInt& den, int64_t prec);

    int64_t p() const { return p_; }
    int64_t precision() const { return prec_; }
    int64_t valuation() const { return val_; }
    bool is_zero() const { return unit_ == 0; }
    bool is_unit() const { return !is_zero() && val_ == 0; }
    const BigInt& unit() const { return unit_; }
    // the representative in [0, p^prec); requires val >= 0
    BigInt residue() const;

    PadicNumber operator-() const;
    PadicNumber operator+(const PadicNumber& o) const;
    PadicNumber operator-(const PadicNumber& o) const;
    PadicNumber operator*(const PadicNumber& o) const;
    PadicNumber operator/(const PadicNumber& o) const;
    PadicNumber inverse() const;
    PadicNumber pow(int64_t e) const;
    PadicNumber with_precision(int64_t prec) const;

    // agreement modulo p^min(precisions)
    bool equals(const PadicNumber& o) const;
    std::string str() const;

private:
    static PadicNumber normalised(int64_t p, BigInt value, int64_t shift, int64_t prec);
    int64_t p_ = 2;
    int64_t prec_ = 0;
    int64_t val_ = 0;
    BigInt unit_ = 0;
};

BigInt power_of(int64_t p, int64_t e);

// x + y omega in the completion of K at the chosen prime above p, omega^2 = t omega - n;
// for a split prime y stays zero and omega is represented by its image in Z_p
struct PadicQuad {
    PadicNumber x;
    PadicNumber y;
    int64_t t = 0;
    int64_t n = 0;

    PadicQuad operator+(const PadicQuad& o) const;
    PadicQuad operator-(const PadicQuad& o) const;
    PadicQuad operator*(const PadicQuad& o) const;
    PadicQuad conj() const;
    PadicNumber norm() const;
    PadicQuad inverse() const;
    PadicQuad pow(int64_t e) const;
    int64_t valuation() const;
    bool is_unit() const { return valuation() == 0 && norm().is_unit(); }
    bool equals(const PadicQuad& o) const;
    int64_t precision() const;
    std::string str() const;
};

PadicQuad padic_one(int64_t p, int64_t prec, int64_t t, int64_t n);

// fixed isomorphism C = C_p restricted to K: the embedding attached to the first prime above p
class LocalEmbedding {
public:
    LocalEmbedding(const ImagQuadField& K, int64_t p, int64_t prec);

    int64_t p() const { return p_; }
    int64_t precision() const { return prec_; }
    SplitKind kind() const { return kind_; }
    // number of elements of the residue field at the chosen prime
    int64_t residue_size() const { return kind_ == SplitKind::Split ? p_ : p_ * p_; }

    PadicQuad one() const;
    PadicQuad embed(FieldElement x) const;
    PadicQuad embed_integer(const BigInt& n) const;
    // zeta_n^k via Teichmueller lifts; requires n | residue_size - 1
    PadicQuad root_of_unity(const RootOfUnity& z) const;
    PadicQuad render(const CharacterValue& v) const;

private:
    ImagQuadField K_;
    int64_t p_;
    int64_t prec_;
    SplitKind kind_;
    PadicNumber omega_;
    // Teichmueller generator of the residue units, compatible with the complex embedding on roots of unity of K
    PadicQuad zeta_;
};

// smallest r with exp convergent on p^r Z_p
int64_t exp_radius(int64_t p);

PadicNumber padic_log(const PadicNumber& u);
PadicNumber padic_exp(const PadicNumber& x);
PadicQuad padic_log(const PadicQuad& u);
PadicQuad padic_exp(const PadicQuad& x);

PadicNumber teichmuller(const PadicNumber& z);
PadicNumber bracket(const PadicNumber& z);
PadicQuad teichmuller(const PadicQuad& z);
PadicQuad bracket(const PadicQuad& z);

// <z>^s = exp(s log <z>)
PadicNumber bracket_power(const PadicNumber& z, const PadicNumber& s);
PadicNumber bracket_power(const PadicNumber& z, int64_t s);

enum class RootKind { UnitRoot, Extension };

// roots of X^2 - lambda X + N(p)^{k+1}
struct HeckeRoots {
    int64_t p = 0;
    int64_t trace = 0;
    int64_t norm = 0;
    RootKind kind = RootKind::UnitRoot;
    // for extension roots: whether the valuations force a ramified extension
    bool ramified = false;
    // unit root and its partner N(p)^{k+1} / alpha, when kind == UnitRoot
    std::optional<PadicNumber> unit_root;
    std::optional<PadicNumber> critical_root;
    // exact valuations (v(p) = 1) of branch 0 and branch 1
    std::pair<int64_t, int64_t> valuation_alpha;
    std::pair<int64_t, int64_t> valuation_beta;
};

HeckeRoots hensel_hecke_roots(int64_t lambda, int64_t prime_norm, int64_t p, int k, int64_t prec);

// 1 - lambda^{-1} psi(p)^{-1}, or 1 when p divides the conductor. In the conventions of hecke.hpp
// psi(p)^{-1} is value_on_ideal(psi, p), and lambda^{-1} = conj(lambda) / N(lambda).
struct ZFactor {
    bool one = false;
    CharacterValue chi;
    QuadInt lambda_conj;
    int64_t lambda_norm = 1;

    Complex render(const ImagQuadField& K, const HeckeRootRing& R) const;
};

ZFactor z_factor(const HeckeRootRing& R, QuadInt lambda, const HeckeCharacter& psi, const PrimeIdeal& p);
// one factor per stabilised prime, lambda the chosen root at that prime
std::vector<ZFactor> z_factors(const StabilisedForm& F, const HeckeCharacter& psi);
Complex render_product(const std::vector<ZFactor>& z, const ImagQuadField& K, const HeckeRootRing& R);

// h_p = v_p(alpha_p) per stabilised prime, as reduced fractions
std::vector<std::pair<int64_t, int64_t>> admissibility_data(const StabilisedForm& F);

// the interpolation constant with the period left symbolic
struct InterpolationConstant {
    std::vector<ZFactor> z;
    // D w tau / ((-1)^{k+q+r} 2)
    Complex gauss_prefactor;
    std::vector<std::pair<int64_t, int64_t>> admissibility;
};

InterpolationConstant interpolation_constant(const StabilisedForm& F, const HeckeCharacter& psi);

// psi_{p-fin} at an idele supported at p: psi_f read through the Chinese remainder theorem, times sigma_p^{q,r}
CharacterValue p_fin_value(const HeckeCharacter& psi, const IdeleAtP& x);

struct SigmaCheckReport {
    int samples = 0;
    // sigma^{k,k} = [w_Tm <>]^k at every sample
    bool decomposition = false;
    // both evaluations of the weight-w(y) character agree at every sample
    bool substitution = false;
    // w_Tm(N)^{k/2} <N>^{w/2} against N^{k/2} <N>^{(w-k)/2}
    bool constant = false;
    // k odd and N not a square: the half power of the Teichmueller part is ambiguous
    bool parity_flagged = false;
    bool pass = false;
};

SigmaCheckReport sigma_decomposition_check(const ImagQuadField& K, int k, int64_t weight, int64_t p,
                                           const std::vector<IdeleAtP>& samples, int64_t level_norm, int64_t prec);

// (psi^{-1} |.|^k)_{p-fin} = psi_{p-fin}^{-1} sigma_p^{k,k} at each sample, exactly, in C and in the completion
struct DualCharacterReport {
    int samples = 0;
    bool exact = false;
    Real complex_discrepancy;
    bool padic = false;
    bool pass = false;
};

DualCharacterReport dual_character_check(const HeckeCharacter& psi, int k, const std::vector<IdeleAtP>& samples,
                                         unsigned digits, int64_t prec);

std::vector<IdeleAtP> random_ideles(const ImagQuadField& K, int64_t p, int count, uint64_t seed);

struct PadicFEReport {
    Complex lhs;
    Complex rhs;
    // -eps N(n)^{k/2} psi_{p-fin}^{-1}(x_{-nu,p})
    Complex constant;
    Real constant_abs;
    Complex z_psi;
    Complex z_dual;
    LValueReport lambda_psi;
    LValueReport lambda_dual;
    // Lambda of the stabilised form came from its own coefficients rather than the Z factor
    bool direct = false;
    // psi_f^{-1}(-nu) psi_inf^{-1}(-nu) = psi_{p-fin}^{-1}(x_{-nu,p}), and the same constant read off ideles
    bool identity = false;
    Real residual;
    bool vanishing = false;
    double tolerance = 0;
    bool pass = false;
};

PadicFEReport padic_fe_check(const StabilisedForm& F, const HeckeCharacter& psi, const LValueOptions& opt,
                             double tolerance, bool flip_sign = false);

}  // namespace bianchi
