#include "bianchi/forms.hpp"

#include "bianchi/bessel.hpp"
#include "bianchi/hecke.hpp"

#include <cmath>
#include <mutex>
#include <numeric>
#include <shared_mutex>
#include <unordered_map>

namespace bianchi {

namespace {

int64_t checked_pow(int64_t b, int e) {
    int64_t r = 1;
    for (int i = 0; i < e; ++i) r = checked_mul(r, b);
    return r;
}

int64_t checked_sub(int64_t x, int64_t y) {
    int64_t r;
    if (__builtin_sub_overflow(x, y, &r)) throw numerical_error("Overflow", "integer subtraction overflow");
    return r;
}

struct ElementHash {
    size_t operator()(const FieldElement& x) const {
        return std::hash<int64_t>()(x.a) * 1000003u ^ std::hash<int64_t>()(x.b);
    }
};

std::vector<BigInt> poly_mul(const std::vector<BigInt>& a, const std::vector<BigInt>& b) {
    std::vector<BigInt> r(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    while (r.size() > 1 && r.back() == 0) r.pop_back();
    return r;
}

// 1 - c X^f + [unramified] P X^{2f}
std::vector<BigInt> local_factor(int64_t c, int f, bool with_quadratic, const BigInt& P) {
    std::vector<BigInt> r(static_cast<size_t>(2 * f + 1), 0);
    r[0] = 1;
    r[f] = -BigInt(c);
    if (with_quadratic) r[2 * f] = P;
    while (r.size() > 1 && r.back() == 0) r.pop_back();
    return r;
}

}  // namespace

Complex HeckeRootRing::theta() const {
    Real disc = Real(trace) * trace - 4 * Real(norm);
    if (disc >= 0) return {(Real(trace) + sqrt(disc)) / 2, Real(0)};
    return {Real(trace) / 2, sqrt(-disc) / 2};
}

QuadInt qi_add(QuadInt a, QuadInt b) { return {checked_add(a.x, b.x), checked_add(a.y, b.y)}; }

QuadInt qi_mul(const HeckeRootRing& R, QuadInt a, QuadInt b) {
    // (x1 + y1 t)(x2 + y2 t) with t^2 = T t - N
    int64_t yy = checked_mul(a.y, b.y);
    int64_t x = checked_sub(checked_mul(a.x, b.x), checked_mul(yy, R.norm));
    int64_t y = checked_add(checked_add(checked_mul(a.x, b.y), checked_mul(a.y, b.x)), checked_mul(yy, R.trace));
    return {x, y};
}

QuadInt qi_scale(QuadInt a, int64_t s) { return {checked_mul(a.x, s), checked_mul(a.y, s)}; }

Complex qi_render(const HeckeRootRing& R, QuadInt a) { return Complex(Real(a.x)) + R.theta() * Real(a.y); }

struct BaseChangeForm::Memo {
    std::shared_mutex mutex;
    std::unordered_map<FieldElement, int64_t, ElementHash> values;
};

BaseChangeForm::BaseChangeForm(const ClassicalNewformData& f, const ImagQuadField& K)
    : K_(K), f_(std::make_shared<ClassicalNewformData>(f)), memo_(std::make_shared<Memo>()) {
    for (const auto& [ell, e] : factor_integer(f.level)) {
        (void)e;
        if (kronecker(K.disc(), ell) == 0)
            throw unsupported_error("UnsupportedRamification", f.label + ": the level and the discriminant share " +
                                                                   std::to_string(ell));
    }
    level_ = make_ideal(K, K.from_int(f.level));
}

void BaseChangeForm::set_fricke_sign(int s) {
    if (s != 1 && s != -1) throw input_error("MalformedSpec", "Fricke sign must be +1 or -1");
    fricke_ = s;
}

bool BaseChangeForm::divides_level(const PrimeIdeal& q) const { return f_->level % q.ell == 0; }

int64_t BaseChangeForm::prime_coefficient(const PrimeIdeal& q) const {
    int64_t a = f_->a_ell(q.ell);
    if (q.residue_degree == 1) return a;
    int64_t a2 = checked_mul(a, a);
    if (divides_level(q)) return a2;
    return checked_sub(a2, checked_mul(2, checked_pow(q.ell, k() + 1)));
}

int64_t BaseChangeForm::max_norm() const { return f_->bound; }

int64_t BaseChangeForm::coefficient(FieldElement x) const {
    if (x.is_zero()) throw input_error("ZeroIdeal", "coefficient of the zero ideal");
    return coefficient(make_ideal(K_, x));
}

int64_t BaseChangeForm::coefficient(const PrincipalIdeal& m) const {
    {
        std::shared_lock lock(memo_->mutex);
        auto it = memo_->values.find(m.gen);
        if (it != memo_->values.end()) return it->second;
    }
    int64_t value = 1;
    for (const auto& [q, e] : factor_element(K_, m.gen)) {
        int64_t c1 = prime_coefficient(q);
        int64_t ce;
        if (divides_level(q)) {
            ce = checked_pow(c1, e);
        } else {
            // c(q^{r+1}) = c(q) c(q^r) - N(q)^{k+1} c(q^{r-1})
            int64_t P = checked_pow(q.ideal.norm, k() + 1);
            int64_t prev = 1, cur = c1;
            for (int r = 1; r < e; ++r) {
                int64_t next = checked_sub(checked_mul(c1, cur), checked_mul(P, prev));
                prev = cur;
                cur = next;
            }
            ce = cur;
        }
        value = checked_mul(value, ce);
    }
    std::unique_lock lock(memo_->mutex);
    memo_->values.emplace(m.gen, value);
    return value;
}

std::vector<std::pair<FieldElement, int64_t>> BaseChangeForm::memo_entries() const {
    std::shared_lock lock(memo_->mutex);
    std::vector<std::pair<FieldElement, int64_t>> out(memo_->values.begin(), memo_->values.end());
    std::sort(out.begin(), out.end(), [&](const auto& x, const auto& y) {
        int64_t nx = K_.norm(x.first), ny = K_.norm(y.first);
        return nx < ny || (nx == ny && x.first < y.first);
    });
    return out;
}

void BaseChangeForm::preload(FieldElement gen, int64_t value) const {
    std::unique_lock lock(memo_->mutex);
    memo_->values.emplace(K_.canonical(gen), value);
}

std::vector<BigInt> classical_euler_product(const ClassicalNewformData& f, const ImagQuadField& K, int64_t ell) {
    int64_t a = f.a_ell(ell);
    bool bad = f.level % ell == 0;
    BigInt P = pow(BigInt(ell), f.k() + 1);
    auto Lf = local_factor(a, 1, !bad, P);
    int chi = kronecker(K.disc(), ell);
    std::vector<BigInt> Ltw{1};
    if (chi != 0) Ltw = local_factor(chi * a, 1, !bad, P);
    return poly_mul(Lf, Ltw);
}

std::vector<BigInt> bianchi_euler_product(const BaseChangeForm& F, int64_t ell) {
    std::vector<BigInt> r{1};
    for (const auto& q : splitting_type(F.field(), ell).primes) {
        BigInt P = pow(BigInt(q.ideal.norm), F.k() + 1);
        r = poly_mul(r, local_factor(F.prime_coefficient(q), q.residue_degree, !F.divides_level(q), P));
    }
    return r;
}

StabilisedForm::StabilisedForm(const BaseChangeForm& base, int64_t p, const std::vector<RootChoice>& choices)
    : base_(base), p_(p) {
    const auto& K = base.field();
    if (base.classical().level % p == 0)
        throw input_error("LevelNotCoprime", "level " + std::to_string(base.classical().level) + " is divisible by " +
                                                 std::to_string(p));
    auto primes = splitting_type(K, p).primes;
    for (const auto& q : primes) {
        const RootChoice* found = nullptr;
        for (const auto& c : choices)
            if (c.prime.ideal == q.ideal) found = &c;
        if (!found) throw input_error("MissingRootChoice", "no root choice for a prime above " + std::to_string(p));
        if (found->branch != 0 && found->branch != 1) throw input_error("MalformedSpec", "branch must be 0 or 1");
        choices_.push_back({q, found->branch});
    }
    if (choices.size() != primes.size())
        throw input_error("MalformedSpec", "root choices given for primes not above " + std::to_string(p));
    const auto& q0 = primes.front();
    ring_.trace = base.prime_coefficient(q0);
    ring_.norm = checked_pow(q0.ideal.norm, base.k() + 1);
    if (static_cast<__int128>(ring_.trace) * ring_.trace == static_cast<__int128>(4) * ring_.norm)
        throw numerical_error("RootsNotDistinguishable", "the Hecke polynomial at " + std::to_string(p) +
                                                             " has a double root");
    level_ = base.level();
    for (const auto& c : choices_) level_ = ideal_product(K, level_, c.prime.ideal);
}

QuadInt StabilisedForm::alpha(size_t i) const {
    return choices_.at(i).branch == 0 ? QuadInt{0, 1} : QuadInt{ring_.trace, -1};
}

QuadInt StabilisedForm::beta(size_t i) const {
    return choices_.at(i).branch == 0 ? QuadInt{ring_.trace, -1} : QuadInt{0, 1};
}

std::vector<FormTerm> StabilisedForm::forward_terms() const {
    const auto& K = base_.field();
    size_t s = choices_.size();
    std::vector<FormTerm> out;
    for (size_t mask = 0; mask < (size_t{1} << s); ++mask) {
        FormTerm t;
        t.weight = {1, 0};
        for (size_t i = 0; i < s; ++i) {
            if (!(mask >> i & 1)) continue;
            t.weight = qi_mul(ring_, t.weight, qi_scale(beta(i), -1));
            t.shift = K.mul(t.shift, choices_[i].prime.ideal.gen);
        }
        out.push_back(t);
    }
    return out;
}

std::vector<FormTerm> StabilisedForm::reflected_terms() const {
    // G_T | W = eps prod_{T} |pi|^{-k-2} prod_{S \ T} |pi|^{k+2} G_{S \ T}
    const auto& K = base_.field();
    size_t s = choices_.size();
    std::vector<FormTerm> out;
    for (size_t mask = 0; mask < (size_t{1} << s); ++mask) {
        FormTerm t;
        t.weight = {1, 0};
        for (size_t i = 0; i < s; ++i) {
            int64_t n = choices_[i].prime.ideal.norm;
            if (mask >> i & 1) {
                t.weight = qi_mul(ring_, t.weight, qi_scale(beta(i), -1));
                t.scale_den = checked_mul(t.scale_den, n);
            } else {
                t.shift = K.mul(t.shift, choices_[i].prime.ideal.gen);
                t.scale_num = checked_mul(t.scale_num, n);
            }
        }
        out.push_back(t);
    }
    return out;
}

QuadInt StabilisedForm::coefficient(const PrincipalIdeal& m) const {
    const auto& K = base_.field();
    QuadInt sum;
    for (const auto& t : forward_terms()) {
        auto q = K.divide(m.gen, t.shift);
        if (!q) continue;
        sum = qi_add(sum, qi_scale(t.weight, base_.coefficient(*q)));
    }
    return sum;
}

std::vector<FormTerm> identity_terms() { return {FormTerm{{1, 0}, {1, 0}, 1, 1}}; }

Complex evaluate_terms(const BaseChangeForm& F, const HeckeRootRing& R, const std::vector<FormTerm>& terms,
                       FieldElement m) {
    const auto& K = F.field();
    Complex sum;
    for (const auto& t : terms) {
        auto q = K.divide(m, t.shift);
        if (!q) continue;
        Complex w = qi_render(R, qi_scale(t.weight, F.coefficient(*q)));
        if (t.scale_num != t.scale_den) w *= pow(Real(t.scale_num) / t.scale_den, Real(F.k() + 2) / 2);
        sum += w;
    }
    return sum;
}

namespace {

int64_t padic_valuation(int64_t x, int64_t p) {
    int64_t v = 0;
    while (x % p == 0) {
        x /= p;
        ++v;
    }
    return v;
}

std::pair<int64_t, int64_t> reduced(int64_t n, int64_t d) {
    int64_t g = std::gcd(n, d);
    return {n / g, d / g};
}

}  // namespace

std::pair<int64_t, int64_t> root_valuation(int64_t trace, int64_t norm, int64_t p, int branch) {
    int64_t vn = padic_valuation(norm, p);
    // v(trace) >= v(norm)/2 means a single segment of slope v(norm)/2
    if (trace == 0 || 2 * padic_valuation(trace, p) >= vn) return reduced(vn, 2);
    int64_t vt = padic_valuation(trace, p);
    return branch == 0 ? reduced(vt, 1) : reduced(vn - vt, 1);
}

SlopeInfo slope_class(const StabilisedForm& F) {
    SlopeInfo info{SlopeClass::Small, {}};
    int k = F.base().k();
    for (const auto& c : F.choices()) {
        auto v = root_valuation(F.ring().trace, F.ring().norm, F.p(), c.branch);
        info.slopes.push_back(v);
        // v < (k+1)/e
        int64_t e = c.prime.ramification;
        if (v.first * e >= static_cast<int64_t>(k + 1) * v.second) info.cls = SlopeClass::Critical;
    }
    return info;
}

int64_t fourier_norm_bound(const ImagQuadField& K, int k, const Real& t, unsigned digits) {
    if (t <= 0) throw input_error("TFloorViolated", "t must be positive");
    double tt = to_double(t);
    double target = digits * std::log(10.0) + 20;
    double x = target, X = 0;
    for (int it = 0; it < 6; ++it) {
        double r = x / (4 * M_PI * tt);
        X = K.D() * r * r;
        x = target + (k / 2.0 + 3) * std::log(X + 2);
    }
    if (X > 1e8)
        throw input_error("TFloorViolated", "t = " + to_string(t, 6) + " needs norms beyond 10^8 for " +
                                                std::to_string(digits) + " digits");
    return static_cast<int64_t>(std::ceil(X));
}

Complex fourier_term(const ImagQuadField& K, int k, const std::function<Complex(FieldElement)>& c, int n,
                     FieldElement a_num, FieldElement a_den, const Real& t, int64_t norm_bound) {
    if (n < 0 || n > 2 * k + 2) throw input_error("MalformedSpec", "component index out of range");
    Real sqrtD = sqrt(Real(K.D()));
    Real scale = 4 * pi() * t / sqrtD;
    Complex sum;
    K.for_each_element(norm_bound, [&](FieldElement beta, int64_t N) {
        Complex cb = c(beta);
        if (cb.is_zero()) return;
        Real modulus = sqrt(Real(N));
        Complex b = K.embed(beta);
        Complex phase = pow(-(b / modulus), k + 1 - n);
        Complex e = additive_character(K, K.mul(beta, a_num), a_den);
        sum += cb * phase * e * bessel_k(n - k - 1, scale * modulus);
    });
    return sum * (t * binomial(2 * k + 2, n));
}

Complex fourier_term(const BaseChangeForm& F, int n, FieldElement a_num, FieldElement a_den, const Real& t) {
    int64_t X = fourier_norm_bound(F.field(), F.k(), t, Real::default_precision());
    F.classical().require_bound(X);
    return fourier_term(
        F.field(), F.k(), [&](FieldElement b) { return Complex(Real(F.coefficient(b))); }, n, a_num, a_den, t, X);
}

}  // namespace bianchi
