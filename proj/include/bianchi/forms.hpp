#pragma once

#include "bianchi/newform.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <functional>
#include <memory>
#include <optional>

namespace bianchi {

using BigInt = boost::multiprecision::cpp_int;

// x + y*theta with theta^2 = trace*theta - norm, theta a root of the Hecke polynomial at p
struct HeckeRootRing {
    int64_t trace = 0;
    int64_t norm = 0;
    // the complex image of theta: (trace + sqrt(trace^2 - 4 norm)) / 2
    Complex theta() const;
};

struct QuadInt {
    int64_t x = 0;
    int64_t y = 0;
    bool operator==(const QuadInt&) const = default;
    bool is_zero() const { return x == 0 && y == 0; }
};

QuadInt qi_add(QuadInt a, QuadInt b);
QuadInt qi_mul(const HeckeRootRing& R, QuadInt a, QuadInt b);
QuadInt qi_scale(QuadInt a, int64_t s);
Complex qi_render(const HeckeRootRing& R, QuadInt a);

class BaseChangeForm {
public:
    BaseChangeForm(const ClassicalNewformData& f, const ImagQuadField& K);

    const ImagQuadField& field() const { return K_; }
    const ClassicalNewformData& classical() const { return *f_; }
    const std::string& label() const { return f_->label; }
    int k() const { return f_->k(); }
    const PrincipalIdeal& level() const { return level_; }
    std::optional<int> fricke_sign() const { return fricke_; }
    void set_fricke_sign(int s);

    bool divides_level(const PrimeIdeal& q) const;
    int64_t prime_coefficient(const PrimeIdeal& q) const;
    // c(m) for an integral ideal; memoised and safe for concurrent readers
    int64_t coefficient(const PrincipalIdeal& m) const;
    int64_t coefficient(FieldElement x) const;
    // largest ideal norm for which all coefficients are available
    int64_t max_norm() const;

    // memo persistence hooks
    std::vector<std::pair<FieldElement, int64_t>> memo_entries() const;
    void preload(FieldElement gen, int64_t value) const;

private:
    struct Memo;
    ImagQuadField K_;
    std::shared_ptr<const ClassicalNewformData> f_;
    PrincipalIdeal level_;
    std::optional<int> fricke_;
    std::shared_ptr<Memo> memo_;
};

// Euler factors at ell as integer polynomials in X: the classical side
// L_ell(f) L_ell(f x chi_disc) and the product of local factors over the primes above ell
std::vector<BigInt> classical_euler_product(const ClassicalNewformData& f, const ImagQuadField& K, int64_t ell);
std::vector<BigInt> bianchi_euler_product(const BaseChangeForm& F, int64_t ell);

// root choice at one prime above p
struct RootChoice {
    PrimeIdeal prime;
    // 0 selects theta, 1 selects trace - theta
    int branch = 0;
};

// one summand w * (N_num / N_den)^{(k+2)/2} * c(m / shift) of a linear combination of shifted base-change coefficients
struct FormTerm {
    QuadInt weight;
    FieldElement shift{1, 0};
    int64_t scale_num = 1;
    int64_t scale_den = 1;
};

class StabilisedForm {
public:
    StabilisedForm(const BaseChangeForm& base, int64_t p, const std::vector<RootChoice>& choices);

    const BaseChangeForm& base() const { return base_; }
    int64_t p() const { return p_; }
    const HeckeRootRing& ring() const { return ring_; }
    const std::vector<RootChoice>& choices() const { return choices_; }
    const PrincipalIdeal& level() const { return level_; }
    QuadInt alpha(size_t i) const;
    QuadInt beta(size_t i) const;

    // c'(m) = sum over subsets T of the stabilised primes of prod_{T}(-beta) c(m / pi_T)
    QuadInt coefficient(const PrincipalIdeal& m) const;
    std::vector<FormTerm> forward_terms() const;
    // coefficients of the image under the Fricke involution at the new level, divided by the base sign
    std::vector<FormTerm> reflected_terms() const;

private:
    BaseChangeForm base_;
    int64_t p_;
    HeckeRootRing ring_;
    std::vector<RootChoice> choices_;
    PrincipalIdeal level_;
};

// one-term linear combination for an unstabilised form
std::vector<FormTerm> identity_terms();

// sum_T w_T (scale_T) c(m / shift_T) rendered as a complex number
Complex evaluate_terms(const BaseChangeForm& F, const HeckeRootRing& R, const std::vector<FormTerm>& terms,
                       FieldElement m);

enum class SlopeClass { Small, Critical };

struct SlopeInfo {
    SlopeClass cls;
    // slope numerators over denominators, one per stabilised prime
    std::vector<std::pair<int64_t, int64_t>> slopes;
};

// p-adic valuation (v(p) = 1) of a root of X^2 - trace X + norm from the Newton polygon, as a reduced
// fraction; branch 0 is the root of smaller valuation, which the p-adic embedding sends theta to
std::pair<int64_t, int64_t> root_valuation(int64_t trace, int64_t norm, int64_t p, int branch);
SlopeInfo slope_class(const StabilisedForm& F);

// norm bound on beta = alpha delta making the omitted terms of F_n(a, t) smaller than 10^-digits
int64_t fourier_norm_bound(const ImagQuadField& K, int k, const Real& t, unsigned digits);

// F_n(a, t) = t binom(2k+2, n) sum_alpha c(alpha delta) (alpha/(i|alpha|))^{k+1-n} K_{n-k-1}(4 pi |alpha| t)
// e(Tr(alpha a)) at the cusp a = a_num / a_den, with beta = alpha delta running over N(beta) <= norm_bound
Complex fourier_term(const ImagQuadField& K, int k, const std::function<Complex(FieldElement)>& c, int n,
                     FieldElement a_num, FieldElement a_den, const Real& t, int64_t norm_bound);
Complex fourier_term(const BaseChangeForm& F, int n, FieldElement a_num, FieldElement a_den, const Real& t);

}  // namespace bianchi
