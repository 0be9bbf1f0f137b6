#pragma once

#include "bianchi/forms.hpp"
#include "bianchi/hecke.hpp"

#include <optional>

namespace bianchi {

// a Bianchi form presented through its coefficients and those of its image under the Fricke involution
struct LForm {
    const BaseChangeForm* base = nullptr;
    HeckeRootRing ring;
    std::vector<FormTerm> forward;
    std::vector<FormTerm> reflected;
    // generator of the level
    FieldElement level{1, 0};
    std::string label;
};

LForm make_lform(const BaseChangeForm& F);
LForm make_lform(const StabilisedForm& F);

struct LValueOptions {
    unsigned digits = 50;
    // guard digits added to the working precision
    unsigned guard = 10;
    std::optional<Real> split_point;
    // sign of the base form under the Fricke involution; falls back to the form's own sign
    std::optional<int> fricke_sign;
};

struct LValueReport {
    Complex lambda;
    std::string character_id;
    Real split_point;
    int fricke_sign_used = 0;
    Real certified_abs_error;
    int64_t terms_used = 0;
    double runtime_ms = 0;
};

struct FEReport {
    LValueReport lhs;
    LValueReport rhs;
    Complex epsilon;
    Real residual;
    // both sides vanish within their certificates; the verdict is then |lhs - epsilon rhs| <= certificate
    bool vanishing = false;
    Real certificate;
    double tolerance = 0;
    bool pass = false;
};

// N(level * f^2)^{-1/4}, the fixed point of t -> 1/(|m| t)
Real default_split_point(const LForm& F, const HeckeCharacter& psi);

// sum over b of weights[b] c_{q,r}(b/f), b running over residue units mod f
Complex cusp_sum(const LForm& F, const PrincipalIdeal& f, const std::vector<std::pair<FieldElement, Complex>>& weights,
                 int q, int r, const LValueOptions& opt, Real* certified = nullptr, int64_t* terms = nullptr);

Complex c_qr(const LForm& F, FieldElement b, const PrincipalIdeal& f, int q, int r, const LValueOptions& opt);

LValueReport lambda_value(const LForm& F, const HeckeCharacter& psi, const LValueOptions& opt);

// prod over the stabilised primes p of 1 - N(p)^k / (psi(p) alpha_p), the factor relating the
// stabilised and unstabilised values; primes dividing the conductor contribute 1
Complex z_factor_dual(const StabilisedForm& F, const HeckeCharacter& psi);

// -eps |nu|^k tau(dual) / (psi_f(-nu) psi_inf(-nu) tau(psi)), with tau the Gauss factor of hecke.hpp
Complex epsilon_factor(const LForm& F, const HeckeCharacter& psi, int fricke_sign);

// Lambda(F, psi) against epsilon * Lambda(F, dual) computed at a different split point;
// flip_constant negates the sign inside the constant only, as a negative control
FEReport fe_residual(const LForm& F, const HeckeCharacter& psi, const LValueOptions& opt, double tolerance,
                     bool flip_constant = false);

struct FrickeEstimate {
    int sign = 0;
    bool ambiguous = false;
    double confidence = 0;
    double score_plus = 0;
    double score_minus = 0;
};

// runs the functional equation under both signs over the given characters at two split points
FrickeEstimate fricke_sign_estimate(const BaseChangeForm& F, const std::vector<HeckeCharacter>& chars,
                                    const LValueOptions& opt);

// L(f x chi_disc, s) at an integer s with 0 < s < weight from the rapidly convergent two-sided series;
// disc = 1 gives L(f, s). A is the free balancing parameter of the series.
struct ClassicalLValue {
    Real value;
    Real certified_abs_error;
    int64_t terms = 0;
};
ClassicalLValue classical_lvalue_oracle(const ClassicalNewformData& f, int disc, int s, unsigned digits,
                                        const Real& A = Real(1), std::optional<int64_t> level_override = {});

// Lambda(F, norm^j) predicted by the factorisation L(F/K, s) = L(f, s) L(f x chi_disc, s) at s = j + 1
Complex lambda_from_classical(const ClassicalNewformData& f, const ImagQuadField& K, int j, unsigned digits);

// the (k+1)^2 values c_{q,r}(b/f), indexed [q][r]
std::vector<std::vector<Complex>> modular_symbol_value(const LForm& F, FieldElement b, const PrincipalIdeal& f,
                                                       const LValueOptions& opt);

}  // namespace bianchi
