#pragma once

#include "bianchi/quadfield.hpp"

#include <map>
#include <string>
#include <vector>

namespace bianchi {

// a classical newform of weight k+2 on Gamma_0(N) with trivial character, given by prime eigenvalues
struct ClassicalNewformData {
    std::string label;
    int64_t level = 0;
    int weight = 0;
    std::map<int64_t, int64_t> a;
    std::map<int64_t, int> atkin_lehner;
    // every prime up to this bound has a coefficient
    int64_t bound = 0;

    int k() const { return weight - 2; }
    // throws InsufficientCoefficients if ell is beyond the data
    int64_t a_ell(int64_t ell) const;
    void require_bound(int64_t B) const;
};

ClassicalNewformData parse_newform_text(const std::string& text);
ClassicalNewformData parse_newform_file(const std::string& path);

// |a_ell| <= 2 ell^{(k+1)/2} for ell not dividing N, checked exactly as a_ell^2 <= 4 ell^{k+1}
void check_ramanujan(const ClassicalNewformData& f);
// the primes at which that bound fails
std::vector<int64_t> ramanujan_violations(const ClassicalNewformData& f);
// text accepted by parse_newform_text, canonical up to comments and line order
std::string format_newform_text(const ClassicalNewformData& f);

// sign of the classical functional equation, (-1)^{(k+2)/2} times the product of Atkin-Lehner signs
int classical_root_number(const ClassicalNewformData& f);
// root number of the twist by the quadratic character of discriminant disc, for N coprime to disc
int twisted_root_number(const ClassicalNewformData& f, int disc);
// Fricke eigenvalue of the base change to K predicted from the classical data
int predicted_fricke_sign(const ClassicalNewformData& f, const ImagQuadField& K);

}  // namespace bianchi
