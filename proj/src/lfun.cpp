#include "bianchi/lfun.hpp"

#include "bianchi/bessel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace bianchi {

namespace {

constexpr double kLn10 = 2.302585092994046;

double log_binomial(int n, int k) { return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0); }

// log of an upper bound for K_mu(x), valid for x well beyond mu
double log_k_bound(int mu, double x) {
    return 0.5 * std::log(M_PI / (2 * x)) - x + mu * static_cast<double>(mu) / (2 * x) + std::log(2.0);
}

// log of an upper bound for int_x^oo u^a K_nu(u) du via the closed form
double log_moment_bound(int a, int nu, double x) {
    double coef = 1, sum = 0;
    double base = log_k_bound(nu + 1, x);
    for (int j = 0;; ++j) {
        sum += coef * std::exp((a - j) * std::log(x) + log_k_bound(nu + 1 + j, x) - base);
        int c = a - nu - 1 - 2 * j;
        if (c <= 0) break;
        coef *= c;
    }
    return base + std::log(sum);
}

struct BranchSpec {
    int n = 0;
    int s = 0;
    int nu = 0;
    int phase_exp = 0;
    Real scale;
    const std::vector<FormTerm>* terms = nullptr;
    std::vector<Complex> W;
};

struct TailModel {
    int k = 0;
    int D = 4;
    double log_coef = 0;
    double log_w = 0;
};

// log of a bound for one term of norm N in a branch
double log_term_bound(const TailModel& tm, const BranchSpec& b, double scale, double N) {
    double mod_alpha = std::sqrt(N / tm.D);
    double x = 4 * M_PI * mod_alpha * scale;
    double logc = std::log(4 * N) + 0.5 * (tm.k + 1) * std::log(N) + tm.log_coef;
    return logc + tm.log_w + log_binomial(2 * tm.k + 2, b.n) - (b.s + 2) * std::log(4 * M_PI * mod_alpha) +
           log_moment_bound(b.s + 1, std::abs(b.nu), x);
}

// bound for the sum over N(beta) > X, by dyadic shells and a lattice point count
double log_tail(const TailModel& tm, const BranchSpec& b, double scale, double X) {
    double total = -INFINITY;
    double sqrtD = std::sqrt(static_cast<double>(tm.D));
    double Y = X;
    for (int j = 0; j < 200; ++j) {
        double count = 2 * M_PI / sqrtD * std::pow(std::sqrt(2 * Y) + sqrtD, 2);
        double lt = std::log(count) + log_term_bound(tm, b, scale, Y);
        total = std::max(total, lt) + std::log1p(std::exp(std::min(total, lt) - std::max(total, lt)));
        if (lt < total - 60) break;
        Y *= 2;
    }
    return total;
}

// smallest X whose tail bound is below exp(log_target); the terms must already be decaying at X
int64_t choose_norm_bound(const TailModel& tm, const BranchSpec& b, double scale, double log_target) {
    double minimal = std::pow((2.0 * (b.s + 1) + 20) / (4 * M_PI * scale), 2) * tm.D;
    double lo = std::max(1.0, minimal), hi = lo;
    while (log_tail(tm, b, scale, hi) > log_target) {
        lo = hi;
        hi *= 2;
        if (hi > 1e9) throw numerical_error("QuadratureBudgetExceeded", "truncation would exceed 10^9 norms");
    }
    for (int it = 0; it < 40 && hi - lo > 1; ++it) {
        double mid = 0.5 * (lo + hi);
        if (log_tail(tm, b, scale, mid) > log_target)
            lo = mid;
        else
            hi = mid;
    }
    return static_cast<int64_t>(std::ceil(hi));
}

Complex term_coefficient(const LForm& F, const std::vector<FormTerm>& terms, FieldElement beta) {
    if (terms.size() == 1 && terms[0].shift == FieldElement{1, 0} && terms[0].weight == QuadInt{1, 0} &&
        terms[0].scale_num == terms[0].scale_den)
        return Complex(Real(F.base->coefficient(beta)));
    return evaluate_terms(*F.base, F.ring, terms, beta);
}

double log_terms_weight(const LForm& F, const std::vector<FormTerm>& terms) {
    double total = 0;
    for (const auto& t : terms) {
        double w = to_double(qi_render(F.ring, t.weight).abs());
        if (t.scale_num != t.scale_den)
            w *= std::pow(static_cast<double>(t.scale_num) / t.scale_den, (F.base->k() + 2) / 2.0);
        total += w;
    }
    return total > 0 ? std::log(total) : -INFINITY;
}

struct Element {
    int64_t norm;
    FieldElement beta;
};

std::vector<Element> elements_up_to(const ImagQuadField& K, int64_t X) {
    std::vector<Element> out;
    K.for_each_element(X, [&](FieldElement b, int64_t N) { out.push_back({N, b}); });
    std::sort(out.begin(), out.end(),
              [](const Element& x, const Element& y) { return x.norm < y.norm || (x.norm == y.norm && x.beta < y.beta); });
    return out;
}

struct BranchResult {
    Complex value;
    Real abs_sum;
    int64_t terms = 0;
};

BranchResult evaluate_branch(const LForm& F, const BranchSpec& b, const ResidueRing& R,
                             const std::vector<Element>& elems, int64_t X) {
    const auto& K = F.base->field();
    int k = F.base->k();
    Real sqrtD = sqrt(Real(K.D()));
    Real four_pi = 4 * pi();
    BranchResult res;
    res.abs_sum = 0;
    Complex acc;
    int64_t current = -1;
    Real factor;
    std::vector<Real> korders;
    for (const auto& e : elems) {
        if (e.norm > X) break;
        Complex W = b.W[static_cast<size_t>(R.index(e.beta))];
        if (W.is_zero()) continue;
        Complex c = term_coefficient(F, *b.terms, e.beta);
        if (c.is_zero()) continue;
        if (e.norm != current) {
            current = e.norm;
            Real mod_alpha = sqrt(Real(e.norm)) / sqrtD;
            Real x = four_pi * mod_alpha * b.scale;
            korders = bessel_k_orders(x, b.s + 1);
            factor = pow(four_pi * mod_alpha, -(b.s + 2)) * incomplete_bessel_moment(b.s + 1, b.nu, x, korders);
        }
        Complex t = c * W * factor;
        if (b.phase_exp != 0) {
            Complex z = K.embed(e.beta);
            t *= pow(-(z / sqrt(Real(e.norm))), b.phase_exp);
        }
        res.abs_sum += t.abs();
        acc += t;
        ++res.terms;
    }
    Real C = binomial(2 * k + 2, b.n);
    res.value = acc * C;
    res.abs_sum *= C;
    return res;
}

int resolve_sign(const LForm& F, const LValueOptions& opt) {
    if (opt.fricke_sign) return *opt.fricke_sign;
    if (F.base->fricke_sign()) return *F.base->fricke_sign();
    throw input_error("FrickeSignUnknown", F.label + ": the Fricke sign is neither known nor supplied");
}

}  // namespace

LForm make_lform(const BaseChangeForm& F) {
    LForm L;
    L.base = &F;
    L.forward = identity_terms();
    L.reflected = identity_terms();
    L.level = F.level().gen;
    L.label = F.label();
    return L;
}

LForm make_lform(const StabilisedForm& F) {
    LForm L;
    L.base = &F.base();
    L.ring = F.ring();
    L.forward = F.forward_terms();
    L.reflected = F.reflected_terms();
    L.level = F.level().gen;
    L.label = F.base().label() + "-stab" + std::to_string(F.p());
    return L;
}

Real default_split_point(const LForm& F, const HeckeCharacter& psi) {
    const auto& K = F.base->field();
    FieldElement f = psi.conductor().gen;
    FieldElement m = K.mul(F.level, K.mul(f, f));
    return pow(Real(K.norm(m)), Real(-1) / 4);
}

Complex cusp_sum(const LForm& F, const PrincipalIdeal& f, const std::vector<std::pair<FieldElement, Complex>>& weights,
                 int q, int r, const LValueOptions& opt, Real* certified, int64_t* terms) {
    PrecisionScope prec(opt.digits + opt.guard);
    const auto& K = F.base->field();
    int k = F.base->k();
    if (q < 0 || r < 0 || q > k || r > k)
        throw input_error("InfinityTypeOutOfRange", "need 0 <= q, r <= k = " + std::to_string(k));
    int eps = resolve_sign(F, opt);
    ResidueRing R(K, f.gen);
    if (f.norm > 1 && !R.is_unit(F.level))
        throw input_error("ConductorNotCoprimeToLevel", "the conductor shares a prime with the level of " + F.label);

    FieldElement m = K.mul(F.level, K.mul(f.gen, f.gen));
    int64_t Nm = K.norm(m);
    Real abs_m = sqrt(Real(Nm));
    Real c = opt.split_point ? *opt.split_point : pow(Real(Nm), Real(-1) / 4);
    if (c <= 0) throw input_error("MalformedSpec", "split point must be positive");

    // additive character on residues, then the twisted sums over the cusps
    std::vector<Complex> E(static_cast<size_t>(R.size()));
    for (int64_t i = 0; i < R.size(); ++i) E[i] = additive_character(K, R.element(i), f.gen);
    BranchSpec up, re;
    up.W.assign(E.size(), Complex());
    re.W.assign(E.size(), Complex());
    for (const auto& [b, wb] : weights) {
        if (!R.is_unit(b)) throw input_error("NotCoprime", "cusp numerator not coprime to the conductor");
        FieldElement v = f.norm == 1 ? FieldElement{0, 0} : R.reduce(K.neg(R.inverse(K.mul(b, F.level))));
        for (int64_t i = 0; i < R.size(); ++i) {
            FieldElement rho = R.element(i);
            up.W[i] += wb * E[R.index(K.mul(rho, b))];
            re.W[i] += wb * E[R.index(K.mul(rho, v))];
        }
    }

    up.n = k + q - r + 1;
    up.s = q + r;
    up.nu = q - r;
    up.phase_exp = r - q;
    up.scale = c;
    up.terms = &F.forward;
    re.n = 2 * k + 2 - up.n;
    re.s = 2 * k - q - r;
    re.nu = q - r;
    re.phase_exp = q - r;
    re.scale = 1 / (abs_m * c);
    re.terms = &F.reflected;

    double log_target = -(static_cast<double>(opt.digits) + opt.guard / 2.0) * kLn10;
    TailModel tm{k, K.D(), 0, 0};
    double wmax = 0;
    for (const auto& Wv : {up.W, re.W})
        for (const auto& x : Wv) wmax = std::max(wmax, to_double(x.abs()));
    tm.log_w = std::log(std::max(wmax, 1e-300));
    TailModel tu = tm, tr = tm;
    tu.log_coef = log_terms_weight(F, F.forward);
    tr.log_coef = log_terms_weight(F, F.reflected);
    // the reflected branch enters with |m|^{k-2r}
    double log_refl = (k - 2 * r) * 0.5 * std::log(static_cast<double>(Nm));
    int64_t Xu = choose_norm_bound(tu, up, to_double(up.scale), log_target);
    int64_t Xr = choose_norm_bound(tr, re, to_double(re.scale), log_target - log_refl);
    F.base->classical().require_bound(std::max(Xu, Xr));

    auto elems = elements_up_to(K, std::max(Xu, Xr));
    BranchResult U = evaluate_branch(F, up, R, elems, Xu);
    BranchResult V = evaluate_branch(F, re, R, elems, Xr);

    Complex refl_factor = pow(K.embed(m), r - q) * pow(abs_m, k - 2 * r) * Real(eps);
    if (up.n % 2) refl_factor = -refl_factor;
    Complex bracket = U.value + refl_factor * V.value;
    Real outer = 2 / binomial(2 * k + 2, up.n);
    if ((k + r + 1) % 2) outer = -outer;

    if (certified) {
        Real tail_u = exp(Real(log_tail(tu, up, to_double(up.scale), static_cast<double>(Xu))));
        Real tail_r = exp(Real(log_tail(tr, re, to_double(re.scale), static_cast<double>(Xr))));
        Real rounding = (U.abs_sum + refl_factor.abs() * V.abs_sum) * pow(Real(10), -static_cast<int>(opt.digits + opt.guard));
        *certified = abs(outer) * (tail_u + refl_factor.abs() * tail_r + rounding);
    }
    if (terms) *terms = U.terms + V.terms;
    return bracket * outer;
}

Complex c_qr(const LForm& F, FieldElement b, const PrincipalIdeal& f, int q, int r, const LValueOptions& opt) {
    return cusp_sum(F, f, {{b, Complex(1)}}, q, r, opt);
}

LValueReport lambda_value(const LForm& F, const HeckeCharacter& psi, const LValueOptions& opt) {
    auto start = std::chrono::steady_clock::now();
    PrecisionScope prec(opt.digits + opt.guard);
    const auto& K = F.base->field();
    if (!(psi.field() == K)) throw input_error("FieldMismatch", "character and form live over different fields");
    int k = F.base->k();
    int q = psi.q(), r = psi.r();
    std::vector<std::pair<FieldElement, Complex>> weights;
    for (const auto& b : psi.ring().units()) weights.emplace_back(b, psi.finite_complex(b));

    LValueReport rep;
    rep.character_id = psi.id().empty() ? describe(psi) : psi.id();
    rep.split_point = opt.split_point ? *opt.split_point : default_split_point(F, psi);
    rep.fricke_sign_used = resolve_sign(F, opt);
    LValueOptions o = opt;
    o.split_point = rep.split_point;
    Real cert;
    Complex s = cusp_sum(F, psi.conductor(), weights, q, r, o, &cert, &rep.terms_used);

    Complex pre = psi.infinity(psi.conductor().gen).render(K) * Real(2) /
                  (gauss_factor(psi) * Real(static_cast<long long>(K.D()) * K.w()));
    if ((k + q + r) % 2) pre = -pre;
    rep.lambda = pre * s;
    rep.certified_abs_error = pre.abs() * cert;
    rep.runtime_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

Complex z_factor_dual(const StabilisedForm& F, const HeckeCharacter& psi) {
    const auto& K = F.base().field();
    int k = F.base().k();
    Complex z(1);
    for (size_t i = 0; i < F.choices().size(); ++i) {
        const auto& p = F.choices()[i].prime.ideal;
        CharacterValue v = value_on_ideal(psi, p);
        if (v.zero) continue;
        Complex alpha = qi_render(F.ring(), F.alpha(i));
        z *= Complex(1) - Complex(pow(Real(p.norm), k)) / (v.render(K) * alpha);
    }
    return z;
}

Complex epsilon_factor(const LForm& F, const HeckeCharacter& psi, int fricke_sign) {
    const auto& K = F.base->field();
    int k = F.base->k();
    FieldElement nu = F.level;
    FieldElement minus_nu = K.neg(nu);
    if (psi.conductor().norm > 1 && !psi.coprime(nu))
        throw input_error("ConductorNotCoprimeToLevel", "the conductor shares a prime with the level of " + F.label);
    HeckeCharacter dual = dual_character(psi, k);
    Complex psi_nu = psi.finite_complex(minus_nu) * psi.infinity(minus_nu).render(K);
    Complex num = gauss_factor(dual) * (pow(sqrt(Real(K.norm(nu))), k) * Real(-fricke_sign));
    return num / (psi_nu * gauss_factor(psi));
}

FEReport fe_residual(const LForm& F, const HeckeCharacter& psi, const LValueOptions& opt, double tolerance,
                     bool flip_constant) {
    PrecisionScope prec(opt.digits + opt.guard);
    FEReport rep;
    HeckeCharacter dual = dual_character(psi, F.base->k());
    Real c = opt.split_point ? *opt.split_point : default_split_point(F, psi);
    LValueOptions lo = opt, ro = opt;
    lo.split_point = c;
    ro.split_point = c * Real("1.25");
    rep.lhs = lambda_value(F, psi, lo);
    rep.rhs = lambda_value(F, dual, ro);
    int eps = rep.lhs.fricke_sign_used;
    rep.epsilon = epsilon_factor(F, psi, flip_constant ? -eps : eps);
    Complex rhs = rep.epsilon * rep.rhs.lambda;
    Real diff = (rep.lhs.lambda - rhs).abs();
    Real scale = max(max(rep.lhs.lambda.abs(), rhs.abs()), Real("1e-40"));
    rep.residual = diff / scale;
    rep.certificate = rep.lhs.certified_abs_error + rep.epsilon.abs() * rep.rhs.certified_abs_error;
    rep.vanishing = rep.lhs.lambda.abs() <= rep.certificate && rhs.abs() <= rep.certificate;
    rep.tolerance = tolerance;
    rep.pass = rep.vanishing ? diff <= rep.certificate : rep.residual < tolerance;
    return rep;
}

FrickeEstimate fricke_sign_estimate(const BaseChangeForm& F, const std::vector<HeckeCharacter>& chars,
                                    const LValueOptions& opt) {
    if (chars.empty()) throw input_error("NoCharacters", "sign estimation needs at least one character");
    PrecisionScope prec(opt.digits + opt.guard);
    LForm L = make_lform(F);
    FrickeEstimate est;
    Real floor("1e-40");
    std::vector<double> scores;
    bool all_vanish = true;
    for (int sign : {1, -1}) {
        LValueOptions o = opt;
        o.fricke_sign = sign;
        double score = 0;
        for (const auto& psi : chars) {
            FEReport fe = fe_residual(L, psi, o, 1.0);
            LValueOptions o2 = o;
            o2.split_point = default_split_point(L, psi) * Real("0.8");
            LValueReport other = lambda_value(L, psi, o2);
            Real sc = max(max(fe.lhs.lambda.abs(), other.lambda.abs()), floor);
            double split_dep = to_double((fe.lhs.lambda - other.lambda).abs() / sc);
            score = std::max({score, to_double(fe.residual), split_dep});
            if (fe.lhs.lambda.abs() > floor) all_vanish = false;
        }
        scores.push_back(score);
    }
    est.score_plus = scores[0];
    est.score_minus = scores[1];
    double good = std::min(scores[0], scores[1]), bad = std::max(scores[0], scores[1]);
    est.sign = scores[0] <= scores[1] ? 1 : -1;
    est.confidence = good > 0 ? bad / good : INFINITY;
    est.ambiguous = all_vanish || est.confidence < 1e3;
    return est;
}

ClassicalLValue classical_lvalue_oracle(const ClassicalNewformData& f, int disc, int s, unsigned digits, const Real& A,
                                        std::optional<int64_t> level_override) {
    PrecisionScope prec(digits + 10);
    int w = f.weight;
    if (s <= 0 || s >= w) throw input_error("MalformedSpec", "s must lie strictly between 0 and the weight");
    int64_t M = f.level;
    int eps;
    if (disc == 1) {
        eps = classical_root_number(f);
    } else {
        M = checked_mul(M, static_cast<int64_t>(disc) * disc);
        eps = twisted_root_number(f, disc);
    }
    if (level_override) M = *level_override;
    Real sqrtM = sqrt(Real(M));
    Real two_pi = 2 * pi();
    double a_small = std::min(to_double(A), 1 / to_double(A));
    double target = (digits + 10) * kLn10 + w * std::log(1e6);
    int64_t nmax = static_cast<int64_t>(std::ceil(target * std::sqrt(static_cast<double>(M)) / (2 * M_PI * a_small))) + 10;
    f.require_bound(nmax);

    // a_n for n <= nmax
    std::vector<Real> an(static_cast<size_t>(nmax + 1), Real(0));
    std::vector<int64_t> spf(static_cast<size_t>(nmax + 1), 0);
    for (int64_t i = 2; i <= nmax; ++i)
        if (!spf[i])
            for (int64_t j = i; j <= nmax; j += i)
                if (!spf[j]) spf[j] = i;
    an[1] = 1;
    for (int64_t n = 2; n <= nmax; ++n) {
        int64_t p = spf[n], m = n, e = 0;
        while (m % p == 0) {
            m /= p;
            ++e;
        }
        // a_{p^e} by the Hecke recursion
        Real ap(f.a_ell(p)), prev(1), cur = ap;
        Real P = pow(Real(p), w - 1);
        for (int64_t i = 1; i < e; ++i) {
            Real next = ap * cur;
            if (f.level % p != 0) next -= P * prev;
            prev = cur;
            cur = next;
        }
        an[n] = an[m] * cur;
    }

    // Gamma(m, x) for integer m >= 1
    auto upper_gamma = [](int m, const Real& x) {
        Real sum = 0, term = 1;
        for (int j = 0; j < m; ++j) {
            sum += term;
            term *= x / (j + 1);
        }
        return factorial(m - 1) * exp(-x) * sum;
    };

    Real total = 0;
    ClassicalLValue out;
    for (int64_t n = 1; n <= nmax; ++n) {
        if (an[n] == 0) continue;
        int chi = 1;
        if (disc != 1) {
            for (auto [ell, e] : factor_integer(n))
                for (int i = 0; i < e; ++i) chi *= kronecker(disc, ell);
            if (chi == 0) continue;
        }
        Real base = sqrtM / (two_pi * n);
        Real x1 = two_pi * n * A / sqrtM;
        Real x2 = two_pi * n / (A * sqrtM);
        Real t = pow(base, s) * upper_gamma(s, x1) + Real(eps) * pow(base, w - s) * upper_gamma(w - s, x2);
        total += an[n] * chi * t;
        ++out.terms;
    }
    Real norm = pow(sqrtM / two_pi, s) * factorial(s - 1);
    out.value = total / norm;
    out.certified_abs_error = pow(Real(10), -static_cast<int>(digits + 5));
    return out;
}

Complex lambda_from_classical(const ClassicalNewformData& f, const ImagQuadField& K, int j, unsigned digits) {
    PrecisionScope prec(digits + 10);
    Real L1 = classical_lvalue_oracle(f, 1, j + 1, digits).value;
    Real L2 = classical_lvalue_oracle(f, K.disc(), j + 1, digits).value;
    // Gamma(j+1)^2 / (2 pi i)^{2j+2}
    Real g = factorial(j) * factorial(j) / pow(2 * pi(), 2 * j + 2);
    if ((j + 1) % 2) g = -g;
    return Complex(g * L1 * L2);
}

std::vector<std::vector<Complex>> modular_symbol_value(const LForm& F, FieldElement b, const PrincipalIdeal& f,
                                                       const LValueOptions& opt) {
    int k = F.base->k();
    std::vector<std::vector<Complex>> out(k + 1, std::vector<Complex>(k + 1));
    for (int q = 0; q <= k; ++q)
        for (int r = 0; r <= k; ++r) out[q][r] = c_qr(F, b, f, q, r, opt);
    return out;
}

}  // namespace bianchi
