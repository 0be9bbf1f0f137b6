#include "doctest.h"

#include "bianchi/bessel.hpp"
#include "bianchi/forms.hpp"
#include "bianchi/hecke.hpp"

#include <map>
#include <numeric>

using namespace bianchi;

namespace {

std::string data_path(const std::string& label) { return std::string(BIANCHI_DATA_DIR) + "/newforms/" + label + ".txt"; }

const ClassicalNewformData& form(const std::string& label) {
    static std::map<std::string, ClassicalNewformData> cache;
    auto it = cache.find(label);
    if (it == cache.end()) it = cache.emplace(label, parse_newform_file(data_path(label))).first;
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

// classical a_n for n <= X from the prime eigenvalues
std::vector<int64_t> classical_coefficients(const ClassicalNewformData& f, int64_t X) {
    std::vector<int64_t> a(static_cast<size_t>(X + 1), 0);
    a[1] = 1;
    for (int64_t n = 2; n <= X; ++n) {
        auto fac = factor_integer(n);
        int64_t v = 1;
        for (auto [ell, e] : fac) {
            int64_t al = f.a_ell(ell), prev = 1, cur = al;
            int64_t P = 1;
            for (int i = 0; i <= f.k(); ++i) P *= ell;
            for (int r = 1; r < e; ++r) {
                int64_t next = f.level % ell == 0 ? al * cur : al * cur - P * prev;
                prev = cur;
                cur = next;
            }
            v *= cur;
        }
        a[n] = v;
    }
    return a;
}

int chi_disc(int disc, int64_t n) {
    int v = 1;
    for (auto [ell, e] : factor_integer(n))
        for (int i = 0; i < e; ++i) v *= kronecker(disc, ell);
    return v;
}

}  // namespace

TEST_CASE("newform files") {
    const auto& f = form("11a");
    CHECK(f.label == "11a");
    CHECK(f.level == 11);
    CHECK(f.weight == 2);
    CHECK(f.a_ell(2) == -2);
    CHECK(f.a_ell(3) == -1);
    CHECK(f.bound >= 299993);
    CHECK(f.atkin_lehner.at(11) == -1);
    const auto& g = form("5.4.a.a");
    CHECK(g.k() == 2);
    CHECK(g.a_ell(2) == -4);
    CHECK(g.a_ell(5) == -5);
    for (auto l : {"11a", "37a", "5.4.a.a"}) CHECK_NOTHROW(check_ramanujan(form(l)));
}

TEST_CASE("newform validation") {
    std::string head = "label t\nlevel 11\nweight 2\ncoefficients\n";
    auto f = parse_newform_text(head + "2 -2\n3 -1\n5 1\n11 1\n13 4\n");
    CHECK(f.bound == 5);
    try {
        f.require_bound(100);
        FAIL("expected InsufficientCoefficients");
    } catch (const Error& e) {
        CHECK(e.code() == "InsufficientCoefficients");
        CHECK(std::string(e.what()).find("a_7") != std::string::npos);
    }
    CHECK(code_of([&] { f.a_ell(7); }) == "InsufficientCoefficients");
    CHECK(code_of([&] { check_ramanujan(parse_newform_text(head + "2 3\n")); }) == "RamanujanViolation");
    CHECK(code_of([&] { check_ramanujan(parse_newform_text(head + "2 2\n11 5\n")); }) == "none");
    CHECK(code_of([&] { parse_newform_text(head + "4 1\n"); }) == "MalformedNewform");
    CHECK(code_of([&] { parse_newform_text(head + "2 1\n2 1\n"); }) == "MalformedNewform");
    CHECK(code_of([&] { parse_newform_text("level 11\nweight 3\n"); }) == "MalformedNewform");
    CHECK(code_of([&] { parse_newform_text("level 11\nweight 2\natkin_lehner 5 1\n"); }) == "MalformedNewform");
    CHECK(code_of([&] { parse_newform_text("level 11\nbogus\n"); }) == "MalformedNewform");
    CHECK(code_of([&] { parse_newform_file("/nonexistent.txt"); }) == "FileNotFound");
    try {
        parse_newform_text("level 11\nweight 2\ncoefficients\n2 x\n");
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
}

TEST_CASE("root numbers and predicted Fricke signs") {
    ImagQuadField Qi(-1);
    CHECK(classical_root_number(form("11a")) == 1);
    CHECK(classical_root_number(form("37a")) == -1);
    CHECK(classical_root_number(form("5.4.a.a")) == 1);
    CHECK(predicted_fricke_sign(form("11a"), Qi) == -1);
    CHECK(predicted_fricke_sign(form("37a"), Qi) == 1);
    CHECK(predicted_fricke_sign(form("5.4.a.a"), Qi) == 1);
    auto ram = parse_newform_text("level 10\nweight 2\natkin_lehner 2 1\natkin_lehner 5 1\ncoefficients\n2 1\n");
    CHECK(code_of([&] { predicted_fricke_sign(ram, Qi); }) == "UnsupportedRamification");
}

TEST_CASE("base change coefficients") {
    ImagQuadField Qi(-1);
    BaseChangeForm F(form("11a"), Qi);
    CHECK(F.level().gen == FieldElement{11, 0});
    CHECK(F.coefficient(FieldElement{1, 0}) == 1);
    CHECK(F.coefficient(FieldElement{3, 0}) == -5);
    CHECK(F.coefficient(FieldElement{9, 0}) == 16);
    CHECK(F.coefficient(FieldElement{2, 1}) == 1);
    CHECK(F.coefficient(FieldElement{2, -1}) == 1);
    CHECK(F.coefficient(FieldElement{1, 1}) == -2);
    CHECK(F.coefficient(FieldElement{11, 0}) == 1);
    CHECK(F.coefficient(FieldElement{0, 3}) == -5);
    CHECK(code_of([&] { BaseChangeForm(parse_newform_text("level 10\nweight 2\n"), Qi); }) == "UnsupportedRamification");
    CHECK(F.fricke_sign() == std::nullopt);
    F.set_fricke_sign(-1);
    CHECK(F.fricke_sign() == -1);
    CHECK(code_of([&] { F.set_fricke_sign(0); }) == "MalformedSpec");
}

TEST_CASE("Euler factor identity") {
    for (int d : {-1, -2, -3, -7}) {
        ImagQuadField K(d);
        for (auto l : {"11a", "37a", "5.4.a.a"}) {
            const auto& f = form(l);
            BaseChangeForm F(f, K);
            for (int64_t ell = 2; ell <= 100; ++ell) {
                if (!is_prime(ell) || f.level % ell == 0 || kronecker(K.disc(), ell) == 0) continue;
                INFO(l << " d=" << d << " ell=" << ell);
                CHECK(classical_euler_product(f, K, ell) == bianchi_euler_product(F, ell));
            }
            // also at the level and at the ramified primes, where the local factors degenerate
            for (auto [ell, e] : factor_integer(f.level * K.D())) {
                (void)e;
                CHECK(classical_euler_product(f, K, ell) == bianchi_euler_product(F, ell));
            }
        }
    }
}

TEST_CASE("coefficient sums over ideals of each norm match L(f) L(f x chi)") {
    const int64_t X = 10000;
    for (int d : {-1, -3}) {
        ImagQuadField K(d);
        for (auto l : {"11a", "5.4.a.a"}) {
            const auto& f = form(l);
            BaseChangeForm F(f, K);
            auto a = classical_coefficients(f, X);
            std::vector<int64_t> by_norm(X + 1, 0);
            for (const auto& I : ideals_up_to_norm(K, X)) by_norm[I.norm] += F.coefficient(I);
            int bad = 0;
            for (int64_t n = 1; n <= X; ++n) {
                int64_t s = 0;
                for (int64_t dd = 1; dd <= n; ++dd)
                    if (n % dd == 0) s += a[dd] * chi_disc(K.disc(), n / dd) * a[n / dd];
                if (s != by_norm[n]) ++bad;
            }
            INFO(l << " d=" << d);
            CHECK(bad == 0);
        }
    }
}

TEST_CASE("multiplicativity on coprime ideals") {
    ImagQuadField Qi(-1);
    BaseChangeForm F(form("5.4.a.a"), Qi);
    auto ideals = ideals_up_to_norm(Qi, 100);
    for (const auto& I : ideals) {
        for (const auto& J : ideals) {
            if (std::gcd(I.norm, J.norm) != 1) continue;
            CHECK(F.coefficient(ideal_product(Qi, I, J)) == F.coefficient(I) * F.coefficient(J));
        }
    }
}

TEST_CASE("stabilised forms") {
    ImagQuadField Qi(-1);
    BaseChangeForm F(form("11a"), Qi);
    auto five = splitting_type(Qi, 5).primes;
    StabilisedForm S(F, 5, {{five[0], 0}, {five[1], 1}});
    CHECK(S.level().norm == 121 * 25);
    CHECK(S.ring().trace == 1);
    CHECK(S.ring().norm == 5);
    for (size_t i = 0; i < 2; ++i) {
        CHECK(qi_add(S.alpha(i), S.beta(i)) == QuadInt{S.ring().trace, 0});
        CHECK(qi_mul(S.ring(), S.alpha(i), S.beta(i)) == QuadInt{S.ring().norm, 0});
        CHECK(S.coefficient(five[i].ideal) == S.alpha(i));
    }
    CHECK(S.coefficient(make_ideal(Qi, {1, 0})) == QuadInt{1, 0});

    struct Case {
        std::string label;
        int64_t p;
    };
    for (const auto& c : {Case{"11a", 5}, Case{"11a", 3}, Case{"11a", 2}, Case{"5.4.a.a", 3}, Case{"37a", 13}}) {
        BaseChangeForm G(form(c.label), Qi);
        auto primes = splitting_type(Qi, c.p).primes;
        size_t combos = size_t{1} << primes.size();
        for (size_t mask = 0; mask < combos; ++mask) {
            std::vector<RootChoice> ch;
            for (size_t i = 0; i < primes.size(); ++i) ch.push_back({primes[i], static_cast<int>(mask >> i & 1)});
            StabilisedForm T(G, c.p, ch);
            // U_p eigenvector property
            int bad = 0;
            for (const auto& m : ideals_up_to_norm(Qi, 1000)) {
                for (size_t i = 0; i < primes.size(); ++i) {
                    auto pm = ideal_product(Qi, m, primes[i].ideal);
                    if (!(T.coefficient(pm) == qi_mul(T.ring(), T.alpha(i), T.coefficient(m)))) ++bad;
                }
            }
            INFO(c.label << " p=" << c.p << " mask=" << mask);
            CHECK(bad == 0);
            // the rendered forward terms agree with the exact coefficients
            auto terms = T.forward_terms();
            for (const auto& m : ideals_up_to_norm(Qi, 60)) {
                Complex a = qi_render(T.ring(), T.coefficient(m));
                Complex b = evaluate_terms(G, T.ring(), terms, m.gen);
                CHECK(to_double((a - b).abs()) < 1e-40);
            }
        }
    }
    CHECK(code_of([&] { StabilisedForm(F, 11, {{splitting_type(Qi, 11).primes[0], 0}}); }) == "LevelNotCoprime");
    CHECK(code_of([&] { StabilisedForm(F, 5, {{five[0], 0}}); }) == "MissingRootChoice");
    auto zero3 = parse_newform_text("level 11\nweight 2\ncoefficients\n2 -2\n3 0\n");
    CHECK(code_of([&] { StabilisedForm(BaseChangeForm(zero3, Qi), 3, {{splitting_type(Qi, 3).primes[0], 0}}); }) ==
          "RootsNotDistinguishable");
}

TEST_CASE("reflected terms pair complementary subsets") {
    ImagQuadField Qi(-1);
    BaseChangeForm F(form("11a"), Qi);
    auto five = splitting_type(Qi, 5).primes;
    StabilisedForm S(F, 5, {{five[0], 0}, {five[1], 0}});
    auto fwd = S.forward_terms();
    auto ref = S.reflected_terms();
    REQUIRE(fwd.size() == 4);
    REQUIRE(ref.size() == 4);
    for (size_t i = 0; i < 4; ++i) {
        CHECK(fwd[i].weight == ref[i].weight);
        CHECK(Qi.canonical(Qi.mul(fwd[i].shift, ref[i].shift)) == FieldElement{5, 0});
        CHECK(ref[i].scale_num * ref[i].scale_den == 25);
    }
}

TEST_CASE("slopes") {
    ImagQuadField Qi(-1);
    BaseChangeForm F(form("11a"), Qi);
    auto five = splitting_type(Qi, 5).primes;
    auto unit = slope_class(StabilisedForm(F, 5, {{five[0], 0}, {five[1], 0}}));
    CHECK(unit.cls == SlopeClass::Small);
    CHECK(unit.slopes[0] == std::pair<int64_t, int64_t>{0, 1});
    auto crit = slope_class(StabilisedForm(F, 5, {{five[0], 0}, {five[1], 1}}));
    CHECK(crit.cls == SlopeClass::Critical);
    CHECK(crit.slopes[1] == std::pair<int64_t, int64_t>{1, 1});
    auto three = splitting_type(Qi, 3).primes;
    CHECK(slope_class(StabilisedForm(F, 3, {{three[0], 0}})).cls == SlopeClass::Small);
    auto inert_crit = slope_class(StabilisedForm(F, 3, {{three[0], 1}}));
    CHECK(inert_crit.cls == SlopeClass::Critical);
    CHECK(inert_crit.slopes[0] == std::pair<int64_t, int64_t>{2, 1});
    // a_29 = 0: both roots have valuation 1/2 at the split prime 29
    REQUIRE(form("11a").a_ell(29) == 0);
    auto p29 = splitting_type(Qi, 29).primes;
    auto half = slope_class(StabilisedForm(F, 29, {{p29[0], 0}, {p29[1], 1}}));
    CHECK(half.cls == SlopeClass::Small);
    CHECK(half.slopes[0] == std::pair<int64_t, int64_t>{1, 2});
    CHECK(half.slopes[1] == std::pair<int64_t, int64_t>{1, 2});
    CHECK(root_valuation(0, 9, 3, 0) == std::pair<int64_t, int64_t>{1, 1});
}

TEST_CASE("Fourier terms") {
    PrecisionScope prec(30);
    ImagQuadField Qi(-1);
    const int k = 0;
    // single-term probe
    FieldElement b0{2, 1};
    auto probe = [&](FieldElement b) { return Qi.canonical(b) == Qi.canonical(b0) && b == b0 ? Complex(1) : Complex(0); };
    Real t("0.7");
    for (int n = 0; n <= 2; ++n) {
        Complex got = fourier_term(Qi, k, probe, n, {0, 0}, {1, 0}, t, 10);
        Complex b = Qi.embed(b0);
        Real mod = b.abs();
        Complex expect = pow(-(b / mod), k + 1 - n) * (t * binomial(2, n) * bessel_k(n - 1, 4 * pi() * mod * t / 2));
        CHECK(to_double((got - expect).abs()) < 1e-25);
    }

    BaseChangeForm F(form("11a"), Qi);
    for (int n = 0; n <= 2; ++n) {
        Complex near = fourier_term(F, n, {0, 0}, {1, 0}, Real(1));
        Complex far = fourier_term(F, n, {0, 0}, {1, 0}, Real(10));
        CHECK(far.abs() < near.abs());
        CHECK(to_double(far.abs()) < 1e-20);
    }
    // pairing beta with its conjugate gives F_{2k+2-n}(0, t) = F_n(0, t)
    Real t1("0.4");
    Complex f0 = fourier_term(F, 0, {0, 0}, {1, 0}, t1);
    Complex f2 = fourier_term(F, 2, {0, 0}, {1, 0}, t1);
    CHECK(to_double((f0 - f2).abs()) < 1e-25);
    // doubling the truncation changes nothing at the working precision
    int64_t X = fourier_norm_bound(Qi, k, t1, 30);
    auto c = [&](FieldElement b) { return Complex(Real(F.coefficient(b))); };
    Complex a1 = fourier_term(Qi, k, c, 1, {1, 0}, {3, 0}, t1, X);
    Complex a2 = fourier_term(Qi, k, c, 1, {1, 0}, {3, 0}, t1, 2 * X);
    CHECK(to_double((a1 - a2).abs()) < 1e-30);
    CHECK(code_of([&] { fourier_norm_bound(Qi, k, Real("0.0001"), 50); }) == "TFloorViolated");
}
