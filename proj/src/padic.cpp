#include "bianchi/padic.hpp"

#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace bianchi {

namespace {

BigInt mod_pos(const BigInt& a, const BigInt& m) {
    BigInt r = a % m;
    if (r < 0) r += m;
    return r;
}

BigInt mod_inverse(const BigInt& a, const BigInt& m) {
    BigInt r0 = m, r1 = mod_pos(a, m), s0 = 0, s1 = 1;
    while (r1 != 0) {
        BigInt q = r0 / r1;
        BigInt t = r0 - q * r1;
        r0 = r1;
        r1 = t;
        t = s0 - q * s1;
        s0 = s1;
        s1 = t;
    }
    if (r0 != 1) throw numerical_error("NonUnit", "element is not invertible modulo p^m");
    return mod_pos(s0, m);
}

int64_t val_int(BigInt& n, int64_t p) {
    int64_t v = 0;
    if (n == 0) return 0;
    while (n % p == 0) {
        n /= p;
        ++v;
    }
    return v;
}

int64_t val_int64(int64_t n, int64_t p) {
    int64_t v = 0;
    while (n != 0 && n % p == 0) {
        n /= p;
        ++v;
    }
    return v;
}

void require_same_prime(const PadicNumber& a, const PadicNumber& b) {
    if (a.p() != b.p()) throw input_error("PrimeMismatch", "p-adic numbers at different primes");
}

// x + y omega with integer coordinates reduced modulo p^M
struct Raw {
    BigInt x;
    BigInt y;
};

struct RawRing {
    BigInt mod;
    int64_t t;
    int64_t n;
    Raw mul(const Raw& a, const Raw& b) const {
        BigInt yy = a.y * b.y;
        return {mod_pos(a.x * b.x - n * yy, mod), mod_pos(a.x * b.y + a.y * b.x + t * yy, mod)};
    }
};

BigInt lift(const PadicNumber& a) {
    if (a.valuation() < 0) throw input_error("NotIntegral", "series argument must be integral");
    return a.residue();
}

PadicQuad make_quad(const PadicNumber& x, const PadicNumber& y, int64_t t, int64_t n) { return {x, y, t, n}; }

// the series log(1 + u) or exp(u) on raw coordinates, u of valuation a, correct modulo p^prec
Raw log_series(const Raw& u, int64_t a, int64_t p, int64_t prec, int64_t t, int64_t n) {
    int64_t nmax = 1;
    auto bound = [&](int64_t m) {
        int64_t e = 0, q = 1;
        while (q <= m / p) {
            q *= p;
            ++e;
        }
        return m * a - e;
    };
    while (bound(nmax) < prec) ++nmax;
    int64_t guard = 1;
    for (int64_t q = p; q <= nmax; q *= p) ++guard;
    BigInt modM = power_of(p, prec + guard);
    BigInt modP = power_of(p, prec);
    RawRing R{modM, t, n};
    Raw power = {mod_pos(u.x, modM), mod_pos(u.y, modM)};
    Raw sum{0, 0};
    for (int64_t m = 1; m <= nmax; ++m) {
        if (m > 1) power = R.mul(power, u);
        int64_t e = val_int64(m, p);
        BigInt pe = power_of(p, e);
        BigInt unit = mod_inverse(BigInt(m) / pe, modP);
        BigInt tx = mod_pos((power.x / pe) * unit, modP), ty = mod_pos((power.y / pe) * unit, modP);
        if (m % 2 == 0) {
            tx = -tx;
            ty = -ty;
        }
        sum.x = mod_pos(sum.x + tx, modP);
        sum.y = mod_pos(sum.y + ty, modP);
    }
    return sum;
}

Raw exp_series(const Raw& x, int64_t a, int64_t p, int64_t prec, int64_t t, int64_t n) {
    // v(m!) <= (m - 1) / (p - 1)
    int64_t nmax = 0;
    while ((nmax + 1) * a * (p - 1) - nmax < prec * (p - 1)) ++nmax;
    int64_t vmax = 0;
    for (int64_t q = p; q <= nmax; q *= p) vmax += nmax / q;
    BigInt modM = power_of(p, prec + vmax);
    BigInt modP = power_of(p, prec);
    RawRing R{modM, t, n};
    Raw base = {mod_pos(x.x, modM), mod_pos(x.y, modM)};
    Raw power{1, 0};
    Raw sum{1, 0};
    BigInt fact_unit = 1;
    int64_t fact_val = 0;
    for (int64_t m = 1; m <= nmax; ++m) {
        power = R.mul(power, base);
        int64_t mm = m;
        while (mm % p == 0) {
            mm /= p;
            ++fact_val;
        }
        fact_unit = (fact_unit * mm) % modP;
        BigInt pe = power_of(p, fact_val);
        BigInt inv = mod_inverse(fact_unit, modP);
        sum.x = mod_pos(sum.x + (power.x / pe) * inv, modP);
        sum.y = mod_pos(sum.y + (power.y / pe) * inv, modP);
    }
    return sum;
}

struct Canonical {
    RootOfUnity root;
    std::map<FieldElement, std::pair<int, int>> exps;
    bool zero = false;
    bool operator==(const Canonical& o) const {
        return zero == o.zero && (zero || (root == o.root && exps == o.exps));
    }
};

// root of unity with the monomials merged by base element; x and its conjugate stay distinct bases
Canonical canonical_form(const CharacterValue& v) {
    Canonical c;
    c.zero = v.zero;
    if (v.zero) return c;
    c.root = v.root;
    for (const auto& m : v.monomials) {
        auto& e = c.exps[m.x];
        e.first += m.q;
        e.second += m.r;
    }
    for (auto it = c.exps.begin(); it != c.exps.end();)
        it = (it->second.first == 0 && it->second.second == 0) ? c.exps.erase(it) : std::next(it);
    return c;
}

bool conductor_supported_at(const HeckeCharacter& psi, int64_t p, bool* wild) {
    bool ok = true;
    *wild = false;
    for (const auto& [q, e] : psi.ring().prime_factors()) {
        if (q.ell != p) ok = false;
        if (e >= 2) *wild = true;
    }
    return ok;
}

}  // namespace

BigInt power_of(int64_t p, int64_t e) {
    if (e < 0) throw input_error("NegativeExponent", "negative power of p");
    return boost::multiprecision::pow(BigInt(p), static_cast<unsigned>(e));
}

PadicNumber::PadicNumber(int64_t p, int64_t prec) : p_(p), prec_(prec), val_(prec), unit_(0) {
    if (p < 2 || !is_prime(p)) throw input_error("NotPrime", std::to_string(p) + " is not prime");
}

PadicNumber PadicNumber::normalised(int64_t p, BigInt value, int64_t shift, int64_t prec) {
    PadicNumber out(p, prec);
    if (value == 0) return out;
    int64_t v = shift + val_int(value, p);
    if (v >= prec) return out;
    out.val_ = v;
    out.unit_ = mod_pos(value, power_of(p, prec - v));
    return out;
}

PadicNumber PadicNumber::from_integer(int64_t p, const BigInt& n, int64_t prec) { return normalised(p, n, 0, prec); }

PadicNumber PadicNumber::from_rational(int64_t p, const BigInt& num, const BigInt& den, int64_t prec) {
    if (den == 0) throw input_error("DivisionByZero", "zero denominator");
    BigInt d = den;
    int64_t a = val_int(d, p);
    BigInt m = power_of(p, std::max<int64_t>(prec + a, 1));
    return normalised(p, mod_pos(num * mod_inverse(d, m), m), -a, prec);
}

BigInt PadicNumber::residue() const {
    if (val_ < 0) throw input_error("NotIntegral", "negative valuation has no residue");
    if (is_zero()) return 0;
    return mod_pos(unit_ * power_of(p_, val_), power_of(p_, prec_));
}

PadicNumber PadicNumber::operator-() const { return normalised(p_, -unit_, val_, prec_); }

PadicNumber PadicNumber::operator+(const PadicNumber& o) const {
    require_same_prime(*this, o);
    int64_t prec = std::min(prec_, o.prec_);
    int64_t m = std::min(val_, o.val_);
    BigInt v = unit_ * power_of(p_, val_ - m) + o.unit_ * power_of(p_, o.val_ - m);
    return normalised(p_, v, m, prec);
}

PadicNumber PadicNumber::operator-(const PadicNumber& o) const { return *this + (-o); }

PadicNumber PadicNumber::operator*(const PadicNumber& o) const {
    require_same_prime(*this, o);
    int64_t prec = std::min(val_ + o.prec_, o.val_ + prec_);
    return normalised(p_, unit_ * o.unit_, val_ + o.val_, prec);
}

PadicNumber PadicNumber::inverse() const {
    if (is_zero()) throw numerical_error("DivisionByZero", "inverse of a p-adic zero");
    int64_t rel = prec_ - val_;
    return normalised(p_, mod_inverse(unit_, power_of(p_, rel)), -val_, rel - val_);
}

PadicNumber PadicNumber::operator/(const PadicNumber& o) const {
    require_same_prime(*this, o);
    if (o.is_zero()) throw numerical_error("DivisionByZero", "division by a p-adic zero");
    if (is_zero()) return PadicNumber(p_, prec_ - o.val_);
    int64_t rel = std::min(prec_ - val_, o.prec_ - o.val_);
    BigInt m = power_of(p_, rel);
    int64_t v = val_ - o.val_;
    return normalised(p_, mod_pos(unit_ * mod_inverse(o.unit_, m), m), v, v + rel);
}

PadicNumber PadicNumber::pow(int64_t e) const {
    if (e < 0) return inverse().pow(-e);
    PadicNumber result = normalised(p_, 1, 0, prec_ - std::min<int64_t>(val_, 0));
    PadicNumber base = *this;
    while (e > 0) {
        if (e & 1) result = result * base;
        e >>= 1;
        if (e) base = base * base;
    }
    return result;
}

PadicNumber PadicNumber::with_precision(int64_t prec) const {
    return normalised(p_, unit_, val_, std::min(prec, prec_));
}

bool PadicNumber::equals(const PadicNumber& o) const {
    if (p_ != o.p_) return false;
    return (*this - o).is_zero();
}

std::string PadicNumber::str() const {
    std::ostringstream os;
    if (is_zero())
        os << "0";
    else
        os << unit_ << "*" << p_ << "^" << val_;
    os << " + O(" << p_ << "^" << prec_ << ")";
    return os.str();
}

PadicQuad PadicQuad::operator+(const PadicQuad& o) const { return {x + o.x, y + o.y, t, n}; }
PadicQuad PadicQuad::operator-(const PadicQuad& o) const { return {x - o.x, y - o.y, t, n}; }

PadicQuad PadicQuad::operator*(const PadicQuad& o) const {
    int64_t p = x.p();
    int64_t prec = std::max(precision(), o.precision()) + 4;
    PadicNumber T = PadicNumber::from_integer(p, t, prec), N = PadicNumber::from_integer(p, n, prec);
    PadicNumber yy = y * o.y;
    return {x * o.x - N * yy, x * o.y + y * o.x + T * yy, t, n};
}

PadicQuad PadicQuad::conj() const {
    PadicNumber T = PadicNumber::from_integer(x.p(), t, precision() + 4);
    return {x + y * T, -y, t, n};
}

PadicNumber PadicQuad::norm() const {
    int64_t prec = precision() + 4;
    PadicNumber T = PadicNumber::from_integer(x.p(), t, prec), N = PadicNumber::from_integer(x.p(), n, prec);
    return x * x + T * x * y + N * y * y;
}

PadicQuad PadicQuad::inverse() const {
    PadicNumber nm = norm();
    PadicQuad c = conj();
    return {c.x / nm, c.y / nm, t, n};
}

PadicQuad PadicQuad::pow(int64_t e) const {
    if (e < 0) return inverse().pow(-e);
    PadicQuad result = padic_one(x.p(), precision(), t, n);
    PadicQuad base = *this;
    while (e > 0) {
        if (e & 1) result = result * base;
        e >>= 1;
        if (e) base = base * base;
    }
    return result;
}

int64_t PadicQuad::valuation() const { return std::min(x.valuation(), y.valuation()); }

int64_t PadicQuad::precision() const { return std::min(x.precision(), y.precision()); }

bool PadicQuad::equals(const PadicQuad& o) const { return x.equals(o.x) && y.equals(o.y); }

std::string PadicQuad::str() const { return "(" + x.str() + ") + (" + y.str() + ")*w"; }

PadicQuad padic_one(int64_t p, int64_t prec, int64_t t, int64_t n) {
    return {PadicNumber::from_integer(p, 1, prec), PadicNumber(p, prec), t, n};
}

LocalEmbedding::LocalEmbedding(const ImagQuadField& K, int64_t p, int64_t prec) : K_(K), p_(p), prec_(prec) {
    Splitting s = splitting_type(K, p);
    kind_ = s.kind;
    if (kind_ == SplitKind::Ramified)
        throw unsupported_error("RamifiedPrimeUnsupported", "p-adic arithmetic is implemented for unramified p only");
    int64_t t = K.omega_trace(), n = K.omega_norm();
    if (kind_ == SplitKind::Split) {
        FieldElement pi = s.primes[0].ideal.gen;
        int64_t r0 = -1;
        for (int64_t r = 0; r < p && r0 < 0; ++r) {
            bool root = ((r * r - t * r + n) % p + p) % p == 0;
            if (root && ((pi.a + pi.b * r) % p + p) % p == 0) r0 = r;
        }
        if (r0 < 0) throw numerical_error("HenselFailure", "no residue root of the omega polynomial");
        PadicNumber X = PadicNumber::from_integer(p, r0, prec);
        PadicNumber T = PadicNumber::from_integer(p, t, prec), N = PadicNumber::from_integer(p, n, prec);
        PadicNumber two = PadicNumber::from_integer(p, 2, prec);
        for (int64_t got = 1; got < prec; got *= 2) X = X - (X * X - T * X + N) / (two * X - T);
        X = X - (X * X - T * X + N) / (two * X - T);
        omega_ = X.with_precision(prec);
    }
    // a generator of the residue field units whose power of exponent (q-1)/w is the image of e^{2 pi i/w}
    int64_t q = residue_size(), w = K.w();
    auto factors = factor_integer(q - 1);
    FieldElement zeta_w;
    for (auto u : K.units())
        if (relative_difference(K.embed(u), unit_root(1, w), Real("1e-30")) < Real("1e-10")) zeta_w = u;
    PadicQuad target = teichmuller(embed(zeta_w));
    std::optional<PadicQuad> G0;
    for (int64_t a = 0; a < p && !G0; ++a)
        for (int64_t b = 0; b < (kind_ == SplitKind::Split ? 1 : p) && !G0; ++b) {
            PadicQuad G = embed({a, b});
            if (!G.is_unit()) continue;
            bool primitive = true;
            for (auto [ell, e] : factors)
                if ((G.pow((q - 1) / ell) - one()).valuation() >= 1) primitive = false;
            if (primitive) G0 = teichmuller(G);
        }
    if (!G0) throw numerical_error("NoGenerator", "no generator of the residue field found");
    for (int64_t j = 1; j < q; ++j) {
        if (std::gcd(j, q - 1) != 1) continue;
        PadicQuad G = G0->pow(j);
        if (G.pow((q - 1) / w).equals(target)) {
            zeta_ = G;
            return;
        }
    }
    throw numerical_error("NoGenerator", "roots of unity of K do not match the residue field");
}

PadicQuad LocalEmbedding::one() const { return padic_one(p_, prec_, K_.omega_trace(), K_.omega_norm()); }

PadicQuad LocalEmbedding::embed_integer(const BigInt& n) const {
    return {PadicNumber::from_integer(p_, n, prec_), PadicNumber(p_, prec_), K_.omega_trace(), K_.omega_norm()};
}

PadicQuad LocalEmbedding::embed(FieldElement x) const {
    int64_t t = K_.omega_trace(), n = K_.omega_norm();
    if (kind_ == SplitKind::Split) {
        PadicNumber v = PadicNumber::from_integer(p_, x.a, prec_) + PadicNumber::from_integer(p_, x.b, prec_) * omega_;
        return {v, PadicNumber(p_, prec_), t, n};
    }
    return {PadicNumber::from_integer(p_, x.a, prec_), PadicNumber::from_integer(p_, x.b, prec_), t, n};
}

PadicQuad LocalEmbedding::root_of_unity(const RootOfUnity& z) const {
    int64_t q = residue_size();
    if ((q - 1) % z.n != 0)
        throw unsupported_error("RootOfUnityNotInField",
                                "order " + std::to_string(z.n) + " does not divide " + std::to_string(q - 1));
    return zeta_.pow(z.k * ((q - 1) / z.n));
}

PadicQuad LocalEmbedding::render(const CharacterValue& v) const {
    if (v.zero) return {PadicNumber(p_, prec_), PadicNumber(p_, prec_), K_.omega_trace(), K_.omega_norm()};
    PadicQuad out = root_of_unity(v.root);
    for (const auto& m : v.monomials) {
        if (m.q) out = out * embed(m.x).pow(m.q);
        if (m.r) out = out * embed(K_.conj(m.x)).pow(m.r);
    }
    return out;
}

int64_t exp_radius(int64_t p) { return p == 2 ? 2 : 1; }

PadicQuad padic_log(const PadicQuad& u) {
    int64_t p = u.x.p();
    PadicQuad d = u - padic_one(p, u.precision(), u.t, u.n);
    int64_t a = d.valuation();
    if (a < 1) throw input_error("ConvergenceDomain", "log needs an argument congruent to 1 mod p");
    int64_t prec = u.precision() - (p == 2 ? 1 : 0);
    if (d.x.is_zero() && d.y.is_zero()) return {PadicNumber(p, prec), PadicNumber(p, prec), u.t, u.n};
    Raw s = log_series({lift(d.x), lift(d.y)}, a, p, prec, u.t, u.n);
    return {PadicNumber::from_integer(p, s.x, prec), PadicNumber::from_integer(p, s.y, prec), u.t, u.n};
}

PadicQuad padic_exp(const PadicQuad& x) {
    int64_t p = x.x.p();
    int64_t a = x.valuation();
    int64_t prec = x.precision();
    if (a < exp_radius(p)) throw input_error("ConvergenceDomain", "exp needs valuation at least " + std::to_string(exp_radius(p)));
    if (a >= prec) return padic_one(p, prec, x.t, x.n);
    Raw s = exp_series({lift(x.x), lift(x.y)}, a, p, prec, x.t, x.n);
    return {PadicNumber::from_integer(p, s.x, prec), PadicNumber::from_integer(p, s.y, prec), x.t, x.n};
}

PadicNumber padic_log(const PadicNumber& u) {
    return padic_log(make_quad(u, PadicNumber(u.p(), u.precision()), 0, 0)).x;
}

PadicNumber padic_exp(const PadicNumber& x) {
    return padic_exp(make_quad(x, PadicNumber(x.p(), x.precision()), 0, 0)).x;
}

PadicNumber teichmuller(const PadicNumber& z) {
    if (!z.is_unit()) throw input_error("NonUnit", "the Teichmueller lift needs a unit");
    int64_t p = z.p(), prec = z.precision();
    if (p == 2) return PadicNumber::from_integer(2, z.residue() % 4 == 1 ? 1 : -1, prec);
    PadicNumber w = z;
    for (int64_t i = 0; i < prec; ++i) w = w.pow(p);
    return w;
}

PadicNumber bracket(const PadicNumber& z) { return z / teichmuller(z); }

PadicQuad teichmuller(const PadicQuad& z) {
    if (!z.is_unit()) throw input_error("NonUnit", "the Teichmueller lift needs a unit");
    int64_t p = z.x.p();
    if (p == 2 && z.y.is_zero()) return {teichmuller(z.x), z.y, z.t, z.n};
    PadicQuad w = z;
    for (int64_t i = 0; i < z.precision(); ++i) w = w.pow(p * p);
    return w;
}

PadicQuad bracket(const PadicQuad& z) { return z * teichmuller(z).inverse(); }

PadicNumber bracket_power(const PadicNumber& z, const PadicNumber& s) {
    int64_t p = z.p();
    PadicNumber b = bracket(z);
    PadicNumber one = PadicNumber::from_integer(p, 1, b.precision());
    if ((b - one).valuation() < exp_radius(p))
        throw input_error("ConvergenceDomain", "<z> is not congruent to 1 mod p^" + std::to_string(exp_radius(p)));
    PadicNumber arg = s.with_precision(b.precision() + 8) * padic_log(b);
    return padic_exp(arg.with_precision(b.precision()));
}

PadicNumber bracket_power(const PadicNumber& z, int64_t s) {
    return bracket_power(z, PadicNumber::from_integer(z.p(), s, z.precision() + 8));
}

HeckeRoots hensel_hecke_roots(int64_t lambda, int64_t prime_norm, int64_t p, int k, int64_t prec) {
    HeckeRoots out;
    out.p = p;
    out.trace = lambda;
    int64_t N = 1;
    for (int i = 0; i <= k; ++i) N = checked_mul(N, prime_norm);
    out.norm = N;
    BigInt disc = BigInt(lambda) * lambda - 4 * BigInt(N);
    if (disc == 0) throw unsupported_error("IrregularForm", "the Hecke polynomial has a double root");
    out.valuation_alpha = root_valuation(lambda, N, p, 0);
    out.valuation_beta = root_valuation(lambda, N, p, 1);
    if (lambda % p != 0) {
        out.kind = RootKind::UnitRoot;
        PadicNumber L = PadicNumber::from_integer(p, lambda, prec), Nn = PadicNumber::from_integer(p, N, prec);
        PadicNumber two = PadicNumber::from_integer(p, 2, prec);
        PadicNumber X = PadicNumber::from_integer(p, ((lambda % p) + p) % p, prec);
        for (int64_t got = 1; got <= 2 * prec; got *= 2) X = X - (X * X - L * X + Nn) / (two * X - L);
        out.unit_root = X.with_precision(prec);
        out.critical_root = (Nn / X).with_precision(prec);
    } else {
        out.kind = RootKind::Extension;
        out.ramified = out.valuation_alpha.second != 1 || out.valuation_beta.second != 1;
    }
    return out;
}

Complex ZFactor::render(const ImagQuadField& K, const HeckeRootRing& R) const {
    if (one) return Complex(1);
    return Complex(1) - chi.render(K) * qi_render(R, lambda_conj) / Real(static_cast<long long>(lambda_norm));
}

ZFactor z_factor(const HeckeRootRing& R, QuadInt lambda, const HeckeCharacter& psi, const PrimeIdeal& p) {
    ZFactor z;
    CharacterValue v = value_on_ideal(psi, p.ideal);
    if (v.zero) {
        z.one = true;
        return z;
    }
    z.chi = v;
    z.lambda_conj = {checked_add(lambda.x, checked_mul(lambda.y, R.trace)), -lambda.y};
    z.lambda_norm = checked_add(checked_add(checked_mul(lambda.x, lambda.x), checked_mul(R.trace, checked_mul(lambda.x, lambda.y))),
                                checked_mul(R.norm, checked_mul(lambda.y, lambda.y)));
    return z;
}

std::vector<ZFactor> z_factors(const StabilisedForm& F, const HeckeCharacter& psi) {
    std::vector<ZFactor> out;
    for (size_t i = 0; i < F.choices().size(); ++i)
        out.push_back(z_factor(F.ring(), F.alpha(i), psi, F.choices()[i].prime));
    return out;
}

Complex render_product(const std::vector<ZFactor>& z, const ImagQuadField& K, const HeckeRootRing& R) {
    Complex out(1);
    for (const auto& f : z) out *= f.render(K, R);
    return out;
}

std::vector<std::pair<int64_t, int64_t>> admissibility_data(const StabilisedForm& F) {
    std::vector<std::pair<int64_t, int64_t>> h;
    for (const auto& c : F.choices()) h.push_back(root_valuation(F.ring().trace, F.ring().norm, F.p(), c.branch));
    return h;
}

InterpolationConstant interpolation_constant(const StabilisedForm& F, const HeckeCharacter& psi) {
    const auto& K = F.base().field();
    InterpolationConstant c;
    c.z = z_factors(F, psi);
    Complex g = gauss_factor(psi) * Real(static_cast<long long>(K.D()) * K.w()) / Real(2);
    if ((F.base().k() + psi.q() + psi.r()) % 2) g = -g;
    c.gauss_prefactor = g;
    c.admissibility = admissibility_data(F);
    return c;
}

CharacterValue p_fin_value(const HeckeCharacter& psi, const IdeleAtP& x) {
    const auto& K = psi.field();
    bool wild = false;
    if (!conductor_supported_at(psi, x.p, &wild))
        throw input_error("ConductorNotPPower", "conductor does not divide a power of " + std::to_string(x.p));
    Splitting s = splitting_type(K, x.p);
    if (x.components.size() != s.primes.size()) throw input_error("MalformedIdele", "one component per prime above p");
    for (size_t i = 0; i < s.primes.size(); ++i)
        if (K.divides(s.primes[i].ideal.gen, x.components[i]))
            throw input_error("AlphaNotCoprime", "idele component is not a unit at its prime");
    // y congruent to each component modulo the matching prime power of the conductor
    FieldElement y{1, 0}, modulus{1, 0};
    for (const auto& [q, e] : psi.ring().prime_factors()) {
        size_t i = 0;
        while (i < s.primes.size() && !(s.primes[i].ideal == q.ideal)) ++i;
        if (i == s.primes.size()) throw input_error("ConductorNotPPower", "conductor prime not above p");
        FieldElement qe = K.pow(q.ideal.gen, static_cast<unsigned>(e));
        if (modulus == FieldElement{1, 0}) {
            y = x.components[i];
        } else {
            FieldElement e1 = K.mul(qe, ResidueRing(K, modulus).inverse(qe));
            FieldElement e2 = K.mul(modulus, ResidueRing(K, qe).inverse(modulus));
            y = K.add(K.mul(y, e1), K.mul(x.components[i], e2));
        }
        modulus = K.mul(modulus, qe);
        y = ResidueRing(K, modulus).reduce(y);
    }
    CharacterValue v = sigma_p(K, psi.q(), psi.r(), x);
    v.root = psi.finite(y);
    return v;
}

std::vector<IdeleAtP> random_ideles(const ImagQuadField& K, int64_t p, int count, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int64_t> coord(-60, 60);
    Splitting s = splitting_type(K, p);
    std::vector<IdeleAtP> out;
    while (static_cast<int>(out.size()) < count) {
        IdeleAtP x{p, {}};
        for (const auto& pr : s.primes) {
            FieldElement c;
            do c = {coord(rng), coord(rng)};
            while (c.is_zero() || K.divides(pr.ideal.gen, c));
            x.components.push_back(c);
        }
        out.push_back(x);
    }
    return out;
}

DualCharacterReport dual_character_check(const HeckeCharacter& psi, int k, const std::vector<IdeleAtP>& samples,
                                         unsigned digits, int64_t prec) {
    PrecisionScope ps(digits + 10);
    const auto& K = psi.field();
    HeckeCharacter dual = dual_character(psi, k);
    DualCharacterReport rep;
    rep.exact = true;
    rep.padic = true;
    rep.complex_discrepancy = 0;
    std::optional<LocalEmbedding> emb;
    for (const auto& x : samples) {
        if (!emb) emb.emplace(K, x.p, prec);
        CharacterValue a = p_fin_value(dual, x);
        CharacterValue b = p_fin_value(psi, x).inverse() * sigma_p(K, k, k, x);
        if (!(canonical_form(a) == canonical_form(b))) rep.exact = false;
        rep.complex_discrepancy =
            max(rep.complex_discrepancy, relative_difference(a.render(K), b.render(K), Real("1e-60")));
        if (!emb->render(a).equals(emb->render(b))) rep.padic = false;
        ++rep.samples;
    }
    rep.pass = rep.exact && rep.padic && rep.complex_discrepancy < pow(Real(10), -static_cast<int>(digits));
    return rep;
}

SigmaCheckReport sigma_decomposition_check(const ImagQuadField& K, int k, int64_t weight, int64_t p,
                                           const std::vector<IdeleAtP>& samples, int64_t level_norm, int64_t prec) {
    if (((weight - k) % (p - 1) + (p - 1)) % (p - 1) != 0)
        throw input_error("WeightIncongruent", "w(y) must be congruent to k modulo p - 1");
    LocalEmbedding emb(K, p, prec);
    SigmaCheckReport rep;
    rep.decomposition = true;
    rep.substitution = true;
    for (const auto& x : samples) {
        PadicQuad skk = emb.render(sigma_p(K, k, k, x));
        PadicQuad s11 = emb.render(sigma_p(K, 1, 1, x));
        if (!skk.y.is_zero() || !s11.y.is_zero()) rep.decomposition = false;
        PadicNumber u = s11.x;
        PadicNumber w = teichmuller(u).pow(k);
        if (!skk.x.equals(w * bracket_power(u, k))) rep.decomposition = false;
        PadicNumber family = w * bracket_power(u, weight);
        PadicNumber shifted = skk.x * bracket_power(u, weight - k);
        if (!family.equals(shifted)) rep.substitution = false;
        ++rep.samples;
    }
    int64_t root = 0;
    while ((root + 1) * (root + 1) <= level_norm) ++root;
    bool square = root * root == level_norm;
    rep.parity_flagged = k % 2 == 1 && !square;
    if (!rep.parity_flagged) {
        PadicNumber Nn = PadicNumber::from_integer(p, level_norm, prec);
        PadicNumber lhs, rhs;
        if (square) {
            PadicNumber m = PadicNumber::from_integer(p, root, prec);
            lhs = teichmuller(m).pow(k) * bracket_power(m, weight);
            rhs = m.pow(k) * bracket_power(m, weight - k);
        } else {
            auto half = [&](int64_t e) { return PadicNumber::from_rational(p, e, 2, prec + 8); };
            lhs = teichmuller(Nn).pow(k / 2) * bracket_power(Nn, half(weight));
            rhs = Nn.pow(k / 2) * bracket_power(Nn, half(weight - k));
        }
        rep.constant = lhs.equals(rhs);
    }
    rep.pass = rep.decomposition && rep.substitution && (rep.parity_flagged || rep.constant);
    return rep;
}

PadicFEReport padic_fe_check(const StabilisedForm& F, const HeckeCharacter& psi, const LValueOptions& opt,
                             double tolerance, bool flip_sign) {
    PrecisionScope prec(opt.digits + opt.guard);
    const auto& K = F.base().field();
    int k = F.base().k();
    int64_t p = F.p();
    bool wild = false;
    if (!conductor_supported_at(psi, p, &wild))
        throw input_error("ConductorNotPPower", "conductor does not divide a power of " + std::to_string(p));
    if (wild) throw unsupported_error("WildConductorUnsupported", "conductor divisible by the square of a prime above p");

    PadicFEReport rep;
    HeckeCharacter dual = dual_character(psi, k);
    LForm base = make_lform(F.base());
    LForm stab = make_lform(F);
    int eps = opt.fricke_sign ? *opt.fricke_sign : F.base().fricke_sign().value_or(0);
    if (eps == 0) throw input_error("FrickeSignUnknown", F.base().label() + ": the Fricke sign is neither known nor supplied");
    LValueOptions o = opt;
    o.fricke_sign = eps;

    rep.z_psi = render_product(z_factors(F, psi), K, F.ring());
    rep.z_dual = render_product(z_factors(F, dual), K, F.ring());

    rep.direct = psi.coprime(F.level().gen);
    LValueOptions lo = o, ro = o;
    Complex lam_psi, lam_dual;
    if (rep.direct) {
        lo.split_point = default_split_point(stab, psi);
        ro.split_point = default_split_point(stab, dual) * Real("1.25");
        rep.lambda_psi = lambda_value(stab, psi, lo);
        rep.lambda_dual = lambda_value(stab, dual, ro);
        lam_psi = rep.lambda_psi.lambda;
        lam_dual = rep.lambda_dual.lambda;
    } else {
        lo.split_point = default_split_point(base, psi);
        ro.split_point = default_split_point(base, dual) * Real("1.25");
        rep.lambda_psi = lambda_value(base, psi, lo);
        rep.lambda_dual = lambda_value(base, dual, ro);
        lam_psi = rep.z_dual * rep.lambda_psi.lambda;
        lam_dual = rep.z_psi * rep.lambda_dual.lambda;
    }

    Complex b_psi = interpolation_constant(F, psi).gauss_prefactor;
    Complex b_dual = interpolation_constant(F, dual).gauss_prefactor;

    FieldElement nu = F.base().level().gen;
    FieldElement minus_nu = K.neg(nu);
    CharacterValue via_element = p_fin_value(psi, minus_nu, p).inverse();
    CharacterValue direct = psi.infinity(minus_nu);
    direct.root = psi.finite(minus_nu);
    direct = direct.inverse();
    IdeleAtP x{p, std::vector<FieldElement>(splitting_type(K, p).primes.size(), minus_nu)};
    CharacterValue via_idele = p_fin_value(psi, x).inverse();
    rep.identity = canonical_form(via_element) == canonical_form(direct) &&
                   relative_difference(via_idele.render(K), via_element.render(K), Real("1e-60")) <
                       pow(Real(10), -static_cast<int>(opt.digits));

    int s = flip_sign ? eps : -eps;
    rep.constant = via_element.render(K) * (pow(sqrt(Real(K.norm(nu))), k) * Real(s));
    rep.constant_abs = rep.constant.abs();

    rep.lhs = rep.z_psi * b_psi * lam_psi;
    rep.rhs = rep.constant * rep.z_dual * b_dual * lam_dual;
    Real diff = (rep.lhs - rep.rhs).abs();
    Real scale = max(max(rep.lhs.abs(), rep.rhs.abs()), Real("1e-40"));
    rep.residual = diff / scale;
    Real lz = (rep.z_psi * b_psi).abs() * (rep.direct ? Real(1) : rep.z_dual.abs());
    Real rz = (rep.constant * rep.z_dual * b_dual).abs() * (rep.direct ? Real(1) : rep.z_psi.abs());
    Real cert = lz * rep.lambda_psi.certified_abs_error + rz * rep.lambda_dual.certified_abs_error;
    rep.vanishing = rep.lhs.abs() <= cert && rep.rhs.abs() <= cert;
    rep.tolerance = tolerance;
    rep.pass = rep.identity && (rep.vanishing ? diff <= cert : rep.residual < tolerance);
    return rep;
}

}  // namespace bianchi
