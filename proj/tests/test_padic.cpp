#include "doctest.h"

#include "bianchi/padic.hpp"

#include <map>
#include <random>

using namespace bianchi;

namespace {

const ClassicalNewformData& form(const std::string& label) {
    static std::map<std::string, ClassicalNewformData> cache;
    auto it = cache.find(label);
    if (it == cache.end())
        it = cache.emplace(label, parse_newform_file(std::string(BIANCHI_DATA_DIR) + "/newforms/" + label + ".txt")).first;
    return it->second;
}

std::string code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return "none";
}

const ImagQuadField Qi(-1);

BaseChangeForm base_change(const std::string& label, int sign) {
    BaseChangeForm F(form(label), Qi);
    F.set_fricke_sign(sign);
    return F;
}

PadicNumber Z(int64_t p, int64_t n, int64_t prec = 30) { return PadicNumber::from_integer(p, n, prec); }

// Newton iteration on X^(p-1) - 1 over the integers modulo p^m, independent of the library
BigInt teichmuller_oracle(int64_t p, int64_t a, int64_t m) {
    BigInt mod = power_of(p, m), x = a;
    auto pw = [&](BigInt b, int64_t e) {
        BigInt r = 1;
        for (int64_t i = 0; i < e; ++i) r = (r * b) % mod;
        return r;
    };
    for (int it = 0; it < 2 * m; ++it) {
        BigInt f = (pw(x, p - 1) - 1) % mod, df = ((p - 1) * pw(x, p - 2)) % mod;
        if (f < 0) f += mod;
        if (df < 0) df += mod;
        // df is a unit: invert by Fermat-Euler
        BigInt inv = 1, base = df;
        BigInt e = power_of(p, m - 1) * (p - 1) - 1;
        while (e > 0) {
            if (e % 2 == 1) inv = (inv * base) % mod;
            base = (base * base) % mod;
            e /= 2;
        }
        x = ((x - f * inv) % mod + mod) % mod;
    }
    return x;
}

std::vector<RootChoice> choices(int64_t p, int mask) {
    std::vector<RootChoice> out;
    auto primes = splitting_type(Qi, p).primes;
    for (size_t i = 0; i < primes.size(); ++i) out.push_back({primes[i], (mask >> i) & 1});
    return out;
}

LValueOptions at(unsigned digits) {
    LValueOptions o;
    o.digits = digits;
    return o;
}

}  // namespace

TEST_CASE("p-adic arithmetic and precision") {
    auto third = PadicNumber::from_rational(5, 1, 3, 30);
    CHECK((third * Z(5, 3)).equals(Z(5, 1)));
    CHECK(third.valuation() == 0);
    auto x = PadicNumber::from_rational(5, 7, 50, 30);
    CHECK(x.valuation() == -2);
    CHECK((x * Z(5, 50)).equals(Z(5, 7)));
    CHECK(Z(5, 250).valuation() == 3);
    CHECK(Z(5, 0).is_zero());
    // 25 carries 28 relative digits, so the quotient of valuation -2 is known modulo 5^26
    auto y = Z(5, 1 + 25 * 3) / Z(5, 25);
    CHECK(y.valuation() == -2);
    CHECK(y.precision() == 26);
    // cancellation keeps the absolute precision
    auto d = Z(5, 1 + 5 * 7) - Z(5, 1);
    CHECK(d.valuation() == 1);
    CHECK(d.precision() == 30);
    CHECK(Z(3, 2).pow(10).equals(Z(3, 1024)));
    CHECK(Z(3, 2).pow(-1).equals(PadicNumber::from_rational(3, 1, 2, 30)));
    CHECK(code_of([] { Z(5, 0).inverse(); }) == "DivisionByZero");
    CHECK(code_of([] { PadicNumber(6, 10); }) == "NotPrime");
    CHECK(code_of([] { Z(5, 1) + Z(3, 1); }) == "PrimeMismatch");
}

TEST_CASE("Hensel roots of Hecke polynomials") {
    auto r = hensel_hecke_roots(1, 5, 5, 0, 30);
    REQUIRE(r.kind == RootKind::UnitRoot);
    auto a = *r.unit_root, b = *r.critical_root;
    CHECK(a.residue() % 5 == 1);
    CHECK((a * a - a + Z(5, 5)).is_zero());
    CHECK((a + b).equals(Z(5, 1)));
    CHECK((a * b).equals(Z(5, 5)));
    CHECK(r.valuation_alpha == std::pair<int64_t, int64_t>{0, 1});
    CHECK(r.valuation_beta == std::pair<int64_t, int64_t>{1, 1});

    // 5.4.a.a at the inert prime 3: c(3) = 2^2 - 2 3^3 = -50, N(3)^3 = 729
    auto s = hensel_hecke_roots(-50, 9, 3, 2, 30);
    REQUIRE(s.kind == RootKind::UnitRoot);
    CHECK((*s.unit_root + *s.critical_root).equals(Z(3, -50)));
    CHECK((*s.unit_root * *s.critical_root).equals(Z(3, 729)));
    CHECK(s.valuation_beta == std::pair<int64_t, int64_t>{6, 1});

    for (int k : {0, 1, 2, 3}) {
        auto e = hensel_hecke_roots(0, 29, 29, k, 30);
        CHECK(e.kind == RootKind::Extension);
        CHECK(e.valuation_alpha == root_valuation(0, e.norm, 29, 0));
        CHECK(static_cast<double>(e.valuation_alpha.first) / e.valuation_alpha.second == doctest::Approx((k + 1) / 2.0));
        CHECK(e.valuation_beta == e.valuation_alpha);
        CHECK(e.ramified == (k % 2 == 0));
    }
    CHECK(code_of([] { hensel_hecke_roots(10, 5, 5, 1, 30); }) == "IrregularForm");
}

TEST_CASE("Teichmueller lifts and brackets") {
    auto w = teichmuller(Z(5, 2));
    CHECK(w.residue() == teichmuller_oracle(5, 2, 30));
    CHECK(w.pow(4).equals(Z(5, 1)));
    CHECK(w.residue() % 5 == 2);
    CHECK(teichmuller(w).equals(w));
    CHECK(teichmuller(Z(5, 1)).equals(Z(5, 1)));
    CHECK(bracket(Z(5, 1)).equals(Z(5, 1)));
    CHECK(code_of([] { teichmuller(Z(5, 10)); }) == "NonUnit");

    std::mt19937_64 rng(7);
    for (int64_t p : {3, 5, 7, 13}) {
        std::uniform_int_distribution<int64_t> dist(1, 1000000);
        for (int i = 0; i < 25; ++i) {
            int64_t n;
            do n = dist(rng);
            while (n % p == 0);
            auto z = Z(p, n);
            auto t = teichmuller(z), b = bracket(z);
            CHECK((t * b).equals(z));
            CHECK((b - Z(p, 1)).valuation() >= 1);
            CHECK(t.pow(p - 1).equals(Z(p, 1)));
            CHECK(t.residue() == teichmuller_oracle(p, static_cast<int64_t>(z.residue() % p), 30));
        }
    }
    // the unramified quadratic extension at 3: Teichmueller lifts have order dividing 8
    LocalEmbedding E(Qi, 3, 20);
    for (FieldElement x : std::vector<FieldElement>{{1, 1}, {2, 1}, {4, 7}, {1, 3}}) {
        auto z = E.embed(x);
        auto t = teichmuller(z);
        CHECK(t.pow(8).equals(E.one()));
        CHECK((t * bracket(z)).equals(z));
        CHECK((bracket(z) - E.one()).valuation() >= 1);
        CHECK(teichmuller(t).equals(t));
    }
}

TEST_CASE("log, exp and bracket powers") {
    std::mt19937_64 rng(11);
    for (int64_t p : {3, 5, 7}) {
        std::uniform_int_distribution<int64_t> dist(0, 100000);
        for (int i = 0; i < 20; ++i) {
            auto u = Z(p, 1 + p * dist(rng)), v = Z(p, 1 + p * dist(rng));
            CHECK(padic_exp(padic_log(u)).equals(u));
            CHECK(padic_log(u * v).equals(padic_log(u) + padic_log(v)));
            CHECK(padic_log(u).valuation() >= 1);
        }
    }
    CHECK(padic_log(Z(5, 6).pow(25)).equals(Z(5, 25) * padic_log(Z(5, 6))));
    CHECK(code_of([] { padic_log(Z(5, 2)); }) == "ConvergenceDomain");
    CHECK(code_of([] { padic_exp(Z(5, 1)); }) == "ConvergenceDomain");
    CHECK(code_of([] { padic_exp(Z(2, 2)); }) == "ConvergenceDomain");
    CHECK(padic_exp(Z(2, 8)).equals(padic_exp(Z(2, 4)).pow(2)));

    CHECK(bracket_power(Z(5, 6), 0).equals(Z(5, 1)));
    CHECK(bracket_power(Z(5, 6), 3).equals(Z(5, 216)));
    CHECK(bracket_power(Z(7, 3), 12).equals(bracket(Z(7, 3)).pow(12)));
    CHECK(bracket_power(Z(7, 3), -5).equals(bracket(Z(7, 3)).pow(-5)));

    // group law over random p-adic exponents
    int cases = 0;
    for (int64_t p : {3, 5, 7, 11}) {
        std::uniform_int_distribution<int64_t> dist(1, 1000000000);
        for (int i = 0; i < 30; ++i) {
            int64_t n;
            do n = dist(rng);
            while (n % p == 0);
            auto z = Z(p, n);
            auto s = PadicNumber::from_rational(p, dist(rng), 1 + p * (dist(rng) % 1000), 40);
            auto t = Z(p, dist(rng), 40);
            CHECK(bracket_power(z, s + t).equals(bracket_power(z, s) * bracket_power(z, t)));
            ++cases;
        }
    }
    CHECK(cases >= 100);

    // exponents congruent mod p^t give values congruent mod p^{t + v(log <z>)}
    for (int64_t t : {1, 3, 6}) {
        auto z = Z(5, 7);
        int64_t vl = padic_log(bracket(z)).valuation();
        auto s = Z(5, 123), s2 = Z(5, 123) + Z(5, 5).pow(t) * Z(5, 4);
        auto diff = bracket_power(z, s) - bracket_power(z, s2);
        CHECK(diff.valuation() == t + vl);
    }
}

TEST_CASE("local embedding respects the field") {
    for (int64_t p : {3, 5, 13}) {
        LocalEmbedding E(Qi, p, 25);
        auto i = E.embed({0, 1});
        CHECK((i * i).equals(E.embed({-1, 0})));
        // e^{2 pi i / 4} maps to the image of i
        CHECK(E.root_of_unity(RootOfUnity::make(1, 4)).equals(i));
        FieldElement x{3, 7}, y{-2, 5};
        CHECK((E.embed(x) * E.embed(y)).equals(E.embed(Qi.mul(x, y))));
    }
    LocalEmbedding E5(Qi, 5, 25);
    CHECK(E5.embed(splitting_type(Qi, 5).primes[0].ideal.gen).valuation() >= 1);
    CHECK(E5.embed(splitting_type(Qi, 5).primes[1].ideal.gen).valuation() == 0);
    CHECK(code_of([] { LocalEmbedding(Qi, 2, 10); }) == "RamifiedPrimeUnsupported");
    CHECK(code_of([&] { E5.root_of_unity(RootOfUnity::make(1, 3)); }) == "RootOfUnityNotInField");
}

TEST_CASE("Z factors") {
    auto F = base_change("11a", -1);
    StabilisedForm S(F, 5, choices(5, 0));
    auto triv = trivial_character(Qi);
    auto z = z_factors(S, triv);
    REQUIRE(z.size() == 2);
    for (size_t i = 0; i < 2; ++i) {
        CHECK_FALSE(z[i].one);
        CHECK(z[i].lambda_norm == S.ring().norm);
        Complex expect = Complex(1) - inverse(qi_render(S.ring(), S.alpha(i)));
        CHECK(relative_difference(z[i].render(Qi, S.ring()), expect, Real("1e-40")) < Real("1e-40"));
    }
    // the product over both primes is the factor of the stabilisation identity
    for (int mask = 0; mask < 4; ++mask) {
        StabilisedForm T(F, 5, choices(5, mask));
        for (const auto& psi : enumerate_characters(Qi, make_ideal(Qi, {3, 0}), 0, 0, true)) {
            Complex a = render_product(z_factors(T, dual_character(psi, 0)), Qi, T.ring());
            CHECK(relative_difference(a, z_factor_dual(T, psi), Real("1e-40")) < Real("1e-40"));
        }
    }
    // primes dividing the conductor contribute 1
    auto mod5 = enumerate_characters(Qi, make_ideal(Qi, {5, 0}), 0, 0, true);
    REQUIRE_FALSE(mod5.empty());
    for (const auto& f : z_factors(S, mod5[0])) CHECK(f.one);
    auto mod2i = enumerate_characters(Qi, splitting_type(Qi, 5).primes[0].ideal, 0, 0, false);
    for (const auto& psi : mod2i) {
        auto zz = z_factors(S, psi);
        CHECK(zz[0].one);
        CHECK_FALSE(zz[1].one);
    }
}

TEST_CASE("admissibility data and slopes") {
    auto F = base_change("11a", -1);
    StabilisedForm S(F, 5, choices(5, 2));
    auto h = admissibility_data(S);
    CHECK(h[0] == std::pair<int64_t, int64_t>{0, 1});
    CHECK(h[1] == std::pair<int64_t, int64_t>{1, 1});
    // a_29 = 0: both roots have valuation (k+1)/2 and the stabilisation has small slope
    REQUIRE(form("11a").a_ell(29) == 0);
    StabilisedForm Z29(F, 29, choices(29, 0));
    for (auto v : admissibility_data(Z29)) CHECK(v == std::pair<int64_t, int64_t>{1, 2});
    CHECK(slope_class(Z29).cls == SlopeClass::Small);
    auto ic = interpolation_constant(Z29, trivial_character(Qi));
    CHECK(ic.admissibility.size() == 2);
    CHECK(to_double(ic.gauss_prefactor.re) == doctest::Approx(8.0));
}

TEST_CASE("p-finite values on ideles") {
    auto chars = enumerate_characters(Qi, make_ideal(Qi, {5, 0}), 0, 0, true);
    auto more = enumerate_characters(Qi, make_ideal(Qi, {3, 0}), 1, 0, true);
    REQUIRE_FALSE(chars.empty());
    auto ideles = random_ideles(Qi, 5, 50, 3);
    for (const auto& psi : chars) {
        for (FieldElement a : std::vector<FieldElement>{{2, 0}, {1, 1}, {3, -7}}) {
            IdeleAtP diag{5, {a, a}};
            auto u = p_fin_value(psi, diag), v = p_fin_value(psi, a, 5);
            CHECK(relative_difference(u.render(Qi), v.render(Qi), Real("1e-40")) < Real("1e-40"));
        }
        for (size_t i = 0; i + 1 < ideles.size(); i += 2) {
            IdeleAtP prod{5, {Qi.mul(ideles[i].components[0], ideles[i + 1].components[0]),
                              Qi.mul(ideles[i].components[1], ideles[i + 1].components[1])}};
            Complex lhs = p_fin_value(psi, prod).render(Qi);
            Complex rhs = p_fin_value(psi, ideles[i]).render(Qi) * p_fin_value(psi, ideles[i + 1]).render(Qi);
            CHECK(relative_difference(lhs, rhs, Real("1e-40")) < Real("1e-35"));
        }
    }
    CHECK(code_of([&] { p_fin_value(more[0], ideles[0]); }) == "ConductorNotPPower");
    CHECK(code_of([&] { p_fin_value(chars[0], IdeleAtP{5, {{5, 0}, {1, 0}}}); }) == "AlphaNotCoprime");
}

TEST_CASE("dual character algebra") {
    for (int64_t p : {3, 5}) {
        auto ideles = random_ideles(Qi, p, 100, 17 + p);
        std::vector<HeckeCharacter> chars{trivial_character(Qi)};
        for (int q = 0; q <= 2; ++q)
            for (int r = 0; r <= 2; ++r)
                for (const auto& psi : enumerate_characters(Qi, make_ideal(Qi, {p, 0}), q, r, true))
                    chars.push_back(psi);
        for (const auto& psi : chars) {
            auto rep = dual_character_check(psi, 2, ideles, 40, 30);
            CHECK(rep.samples == 100);
            CHECK(rep.exact);
            CHECK(rep.padic);
            CHECK(rep.pass);
        }
    }
}

TEST_CASE("sigma decomposition") {
    auto ideles = random_ideles(Qi, 5, 40, 5);
    for (int64_t w : {2, 6, 10, -2}) {
        auto rep = sigma_decomposition_check(Qi, 2, w, 5, ideles, 121, 30);
        CHECK(rep.decomposition);
        CHECK(rep.substitution);
        CHECK(rep.constant);
        CHECK(rep.pass);
    }
    auto inert = random_ideles(Qi, 3, 40, 6);
    auto rep3 = sigma_decomposition_check(Qi, 2, 4, 3, inert, 25, 30);
    CHECK(rep3.pass);
    auto odd = sigma_decomposition_check(Qi, 1, 5, 5, ideles, 13, 30);
    CHECK(odd.parity_flagged);
    CHECK(odd.decomposition);
    auto even = sigma_decomposition_check(Qi, 2, 6, 5, ideles, 13, 30);
    CHECK_FALSE(even.parity_flagged);
    CHECK(even.constant);
    CHECK(code_of([&] { sigma_decomposition_check(Qi, 2, 3, 5, ideles, 121, 30); }) == "WeightIncongruent");
}

TEST_CASE("p-adic functional equation through the factor decomposition") {
    auto F = base_change("11a", -1);
    for (int mask : {0, 1}) {
        StabilisedForm S(F, 5, choices(5, mask));
        auto rep = padic_fe_check(S, trivial_character(Qi), at(30), 1e-25);
        CHECK(rep.direct);
        CHECK(rep.identity);
        CHECK(rep.pass);
        CHECK(rep.residual < Real("1e-28"));
        auto neg = padic_fe_check(S, trivial_character(Qi), at(30), 1e-25, true);
        CHECK_FALSE(neg.pass);
        CHECK(neg.residual > Real("0.1"));
        // |constant| = N(n)^{k/2} for the trivial character
        CHECK(to_double(rep.constant_abs) == doctest::Approx(11.0 / 11.0));
    }
    StabilisedForm S3(F, 3, choices(3, 0));
    auto quad = enumerate_characters(Qi, make_ideal(Qi, {3, 0}), 0, 0, true);
    REQUIRE(quad.size() == 1);
    auto rep = padic_fe_check(S3, quad[0], at(30), 1e-25);
    CHECK_FALSE(rep.direct);
    CHECK(rep.identity);
    CHECK(rep.pass);
    CHECK(relative_difference(rep.z_psi, Complex(1), Real("1e-40")) < Real("1e-40"));
    CHECK_FALSE(padic_fe_check(S3, quad[0], at(30), 1e-25, true).pass);

    auto G = base_change("5.4.a.a", 1);
    StabilisedForm T(G, 3, choices(3, 0));
    auto tw = enumerate_characters(Qi, make_ideal(Qi, {3, 0}), 1, 0, true);
    REQUIRE_FALSE(tw.empty());
    auto r2 = padic_fe_check(T, tw[0], at(30), 1e-25);
    CHECK(r2.pass);
    CHECK(r2.residual < Real("1e-28"));
    // |constant| = |nu|^{k - q - r}
    CHECK(to_double(r2.constant_abs) == doctest::Approx(5.0));

    auto mod13 = enumerate_characters(Qi, make_ideal(Qi, {3, 2}), 0, 0, true);
    CHECK(code_of([&] { padic_fe_check(S3, mod13[0], at(20), 1e-10); }) == "ConductorNotPPower");
    auto mod9 = enumerate_characters(Qi, make_ideal(Qi, {9, 0}), 0, 0, true);
    REQUIRE_FALSE(mod9.empty());
    CHECK(code_of([&] { padic_fe_check(S3, mod9[0], at(20), 1e-10); }) == "WildConductorUnsupported");
    BaseChangeForm U(form("11a"), Qi);
    StabilisedForm SU(U, 5, choices(5, 0));
    CHECK(code_of([&] { padic_fe_check(SU, trivial_character(Qi), at(20), 1e-10); }) == "FrickeSignUnknown");
}
