#include "bianchi/quadfield.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>
#include <unordered_set>

namespace bianchi {

int64_t checked_add(int64_t x, int64_t y) {
    int64_t r;
    if (__builtin_add_overflow(x, y, &r)) throw numerical_error("Overflow", "integer addition overflow");
    return r;
}

int64_t checked_mul(int64_t x, int64_t y) {
    int64_t r;
    if (__builtin_mul_overflow(x, y, &r)) throw numerical_error("Overflow", "integer multiplication overflow");
    return r;
}

namespace {

int mod4(int d) { return ((d % 4) + 4) % 4; }

int64_t isqrt(int64_t n) {
    if (n < 0) return -1;
    int64_t r = static_cast<int64_t>(std::sqrt(static_cast<double>(n)));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

int64_t floor_div(int64_t a, int64_t b) {
    int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

int64_t pos_mod(int64_t a, int64_t m) { return ((a % m) + m) % m; }

// x*u + y*v = g
int64_t ext_gcd(int64_t x, int64_t y, int64_t& u, int64_t& v) {
    int64_t r0 = x, r1 = y, s0 = 1, s1 = 0, t0 = 0, t1 = 1;
    while (r1 != 0) {
        int64_t q = r0 / r1;
        std::tie(r0, r1) = std::make_pair(r1, r0 - q * r1);
        std::tie(s0, s1) = std::make_pair(s1, s0 - q * s1);
        std::tie(t0, t1) = std::make_pair(t1, t0 - q * t1);
    }
    if (r0 < 0) {
        r0 = -r0;
        s0 = -s0;
        t0 = -t0;
    }
    u = s0;
    v = t0;
    return r0;
}

}  // namespace

ImagQuadField::ImagQuadField(int d) : d_(d) {
    static const int supported[] = {-1, -2, -3, -7, -11, -19, -43, -67, -163};
    if (std::find(std::begin(supported), std::end(supported), d) == std::end(supported))
        throw input_error("UnsupportedField",
                          "Q(sqrt " + std::to_string(d) + ") is not a class-number-one imaginary quadratic field");
    if (mod4(d) == 1) {
        disc_ = d;
        t_ = 1;
        n_ = (1 - d) / 4;
    } else {
        disc_ = 4 * d;
        t_ = 0;
        n_ = -d;
    }
    w_ = d == -1 ? 4 : (d == -3 ? 6 : 2);
}

FieldElement ImagQuadField::delta() const {
    // sqrt(disc): 2*omega - 1 when omega = (1+sqrt d)/2, else 2*sqrt d
    return t_ == 1 ? FieldElement{-1, 2} : FieldElement{0, 2};
}

std::vector<FieldElement> ImagQuadField::units() const {
    if (w_ == 2) return {{1, 0}, {-1, 0}};
    if (w_ == 4) return {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    std::vector<FieldElement> u;
    FieldElement x{1, 0};
    for (int j = 0; j < 6; ++j) {
        u.push_back(x);
        x = mul(x, omega());
    }
    return u;
}

FieldElement ImagQuadField::add(FieldElement x, FieldElement y) const {
    return {checked_add(x.a, y.a), checked_add(x.b, y.b)};
}

FieldElement ImagQuadField::sub(FieldElement x, FieldElement y) const {
    return {checked_add(x.a, -y.a), checked_add(x.b, -y.b)};
}

FieldElement ImagQuadField::mul(FieldElement x, FieldElement y) const {
    int64_t bb = checked_mul(x.b, y.b);
    int64_t a = checked_add(checked_mul(x.a, y.a), -checked_mul(n_, bb));
    int64_t b = checked_add(checked_add(checked_mul(x.a, y.b), checked_mul(x.b, y.a)), checked_mul(t_, bb));
    return {a, b};
}

FieldElement ImagQuadField::pow(FieldElement x, unsigned e) const {
    FieldElement r{1, 0};
    while (e) {
        if (e & 1) r = mul(r, x);
        e >>= 1;
        if (e) x = mul(x, x);
    }
    return r;
}

FieldElement ImagQuadField::conj(FieldElement x) const { return {checked_add(x.a, checked_mul(t_, x.b)), -x.b}; }

int64_t ImagQuadField::norm(FieldElement x) const {
    return checked_add(checked_add(checked_mul(x.a, x.a), checked_mul(t_, checked_mul(x.a, x.b))),
                       checked_mul(n_, checked_mul(x.b, x.b)));
}

std::optional<FieldElement> ImagQuadField::divide(FieldElement x, FieldElement y) const {
    int64_t ny = norm(y);
    if (ny == 0) throw input_error("DivisionByZero", "division by zero element");
    FieldElement p = mul(x, conj(y));
    if (p.a % ny != 0 || p.b % ny != 0) return std::nullopt;
    return FieldElement{p.a / ny, p.b / ny};
}

bool ImagQuadField::is_canonical(FieldElement x) const {
    if (w_ == 2) return x.b > 0 || (x.b == 0 && x.a > 0);
    // for w = 4 and w = 6 the sector [0, 2pi/w) is a > 0, b >= 0 in the omega basis
    return x.a > 0 && x.b >= 0;
}

FieldElement ImagQuadField::canonical(FieldElement x) const {
    if (x.is_zero()) throw input_error("ZeroIdeal", "zero has no canonical generator");
    for (const auto& u : units()) {
        FieldElement y = mul(u, x);
        if (is_canonical(y)) return y;
    }
    throw numerical_error("Internal", "no canonical associate found");
}

Real ImagQuadField::omega_imag() const {
    Real s = sqrt(Real(-d_));
    return t_ == 1 ? s / 2 : s;
}

Complex ImagQuadField::embed(FieldElement x) const {
    Real re = Real(x.a) + (t_ == 1 ? Real(x.b) / 2 : Real(0));
    Real im = Real(x.b) * omega_imag();
    return {re, im};
}

Complex ImagQuadField::embed(FieldElement x, unsigned digits) const {
    PrecisionScope scope(digits);
    return embed(x);
}

void ImagQuadField::for_each_element(int64_t bound, const std::function<void(FieldElement, int64_t)>& f) const {
    // N(a + b omega) = (a + t b/2)^2 + (n - t/4) b^2 >= (-d/4) b^2
    int64_t bmax = isqrt(4 * bound / (-d_)) + 1;
    for (int64_t b = -bmax; b <= bmax; ++b) {
        // a^2 + t a b + n b^2 <= bound
        int64_t disc = t_ * t_ * b * b - 4 * (n_ * b * b - bound);
        if (disc < 0) continue;
        int64_t s = isqrt(disc);
        int64_t lo = floor_div(-t_ * b - s, 2) - 1;
        int64_t hi = floor_div(-t_ * b + s, 2) + 1;
        for (int64_t a = lo; a <= hi; ++a) {
            FieldElement x{a, b};
            int64_t nx = norm(x);
            if (nx == 0 || nx > bound) continue;
            f(x, nx);
        }
    }
}

bool is_prime(int64_t n) {
    if (n < 2) return false;
    for (int64_t p = 2; p * p <= n; ++p)
        if (n % p == 0) return false;
    return true;
}

std::vector<std::pair<int64_t, int>> factor_integer(int64_t n) {
    std::vector<std::pair<int64_t, int>> out;
    if (n < 0) n = -n;
    for (int64_t p = 2; p * p <= n; ++p) {
        if (n % p) continue;
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        out.emplace_back(p, e);
    }
    if (n > 1) out.emplace_back(n, 1);
    return out;
}

int kronecker(int64_t a, int64_t p) {
    if (p == 2) {
        int64_t r = pos_mod(a, 8);
        if (r % 2 == 0) return 0;
        return (r == 1 || r == 7) ? 1 : -1;
    }
    int64_t r = pos_mod(a, p);
    if (r == 0) return 0;
    // Euler's criterion
    int64_t e = (p - 1) / 2, base = r, acc = 1;
    while (e) {
        if (e & 1) acc = static_cast<int64_t>((__int128)acc * base % p);
        base = static_cast<int64_t>((__int128)base * base % p);
        e >>= 1;
    }
    return acc == 1 ? 1 : -1;
}

PrincipalIdeal make_ideal(const ImagQuadField& F, FieldElement gen) {
    FieldElement c = F.canonical(gen);
    return {c, F.norm(c)};
}

PrincipalIdeal ideal_product(const ImagQuadField& F, const PrincipalIdeal& I, const PrincipalIdeal& J) {
    return make_ideal(F, F.mul(I.gen, J.gen));
}

Splitting splitting_type(const ImagQuadField& F, int64_t ell) {
    if (!is_prime(ell)) throw input_error("NotPrime", std::to_string(ell) + " is not prime");
    int kr = kronecker(F.disc(), ell);
    if (kr == -1) {
        PrimeIdeal q{make_ideal(F, F.from_int(ell)), ell, 2, 1};
        return {SplitKind::Inert, {q}};
    }
    // element of norm ell
    int64_t t = F.omega_trace(), n = F.omega_norm();
    int64_t bmax = isqrt(4 * ell / (-F.d())) + 1;
    for (int64_t b = 1; b <= bmax; ++b) {
        int64_t disc = t * t * b * b - 4 * (n * b * b - ell);
        if (disc < 0) continue;
        int64_t s = isqrt(disc);
        if (s * s != disc || (s - t * b) % 2 != 0) continue;
        FieldElement x{(s - t * b) / 2, b};
        if (F.norm(x) != ell) continue;
        PrincipalIdeal p = make_ideal(F, x);
        if (kr == 0) return {SplitKind::Ramified, {PrimeIdeal{p, ell, 1, 2}}};
        PrincipalIdeal pbar = make_ideal(F, F.conj(x));
        return {SplitKind::Split, {PrimeIdeal{p, ell, 1, 1}, PrimeIdeal{pbar, ell, 1, 1}}};
    }
    throw numerical_error("Internal", "no element of norm " + std::to_string(ell));
}

std::vector<std::pair<PrimeIdeal, int>> factor_element(const ImagQuadField& F, FieldElement x) {
    std::vector<std::pair<PrimeIdeal, int>> out;
    int64_t nx = F.norm(x);
    if (nx == 0) throw input_error("ZeroIdeal", "cannot factor zero");
    for (auto [ell, e] : factor_integer(nx)) {
        (void)e;
        for (const auto& q : splitting_type(F, ell).primes) {
            int cnt = 0;
            while (auto y = F.divide(x, q.ideal.gen)) {
                x = *y;
                ++cnt;
            }
            if (cnt) out.emplace_back(q, cnt);
        }
    }
    return out;
}

std::vector<PrincipalIdeal> ideals_up_to_norm(const ImagQuadField& F, int64_t X) {
    std::vector<PrincipalIdeal> out;
    if (X <= 0) return out;
    F.for_each_element(X, [&](FieldElement x, int64_t nx) {
        if (F.is_canonical(x)) out.push_back({x, nx});
    });
    std::sort(out.begin(), out.end());
    return out;
}

int64_t UnitGroup::order() const {
    int64_t n = 1;
    for (int o : orders) n *= o;
    return n;
}

ResidueRing::ResidueRing(const ImagQuadField& F, FieldElement f) : F_(F), f_(F.canonical(f)) {
    // lattice f*O spanned by f and f*omega in the (1, omega) basis
    FieldElement v1 = f_, v2 = F.mul(f_, F.omega());
    int64_t u, v;
    int64_t g = ext_gcd(v1.b, v2.b, u, v);
    if (g == 0) {
        // f rational with no omega part cannot happen for nonzero f since f*omega has b = f.a + t f.b
        throw numerical_error("Internal", "degenerate lattice");
    }
    c1_ = g;
    int64_t first = checked_add(checked_mul(u, v1.a), checked_mul(v, v2.a));
    int64_t zero_row = checked_add(checked_mul(v2.b / g, v1.a), -checked_mul(v1.b / g, v2.a));
    c0_ = std::abs(zero_row);
    h_ = pos_mod(first, c0_);
    if (c0_ * c1_ != F.norm(f_)) throw numerical_error("Internal", "residue lattice index mismatch");
    if (F.norm(f_) > 1) primes_ = factor_element(F, f_);
}

FieldElement ResidueRing::reduce(FieldElement x) const {
    int64_t k = floor_div(x.b, c1_);
    int64_t a = checked_add(x.a, -checked_mul(k, h_));
    int64_t b = x.b - k * c1_;
    return {pos_mod(a, c0_), b};
}

int64_t ResidueRing::index(FieldElement x) const {
    FieldElement r = reduce(x);
    return r.a + c0_ * r.b;
}

FieldElement ResidueRing::element(int64_t idx) const { return {idx % c0_, idx / c0_}; }

bool ResidueRing::is_unit(FieldElement x) const {
    if (size() == 1) return true;
    for (const auto& [q, e] : primes_) {
        (void)e;
        if (F_.divides(q.ideal.gen, x)) return false;
    }
    return true;
}

std::vector<FieldElement> ResidueRing::units() const {
    std::vector<FieldElement> out;
    for (int64_t i = 0; i < size(); ++i) {
        FieldElement x = element(i);
        if (size() == 1 || is_unit(x)) out.push_back(x);
    }
    return out;
}

FieldElement ResidueRing::inverse(FieldElement x) const {
    if (!is_unit(x)) throw input_error("NotInvertible", "element not coprime to the modulus");
    int64_t one = index({1, 0});
    for (int64_t i = 0; i < size(); ++i) {
        FieldElement y = element(i);
        if (index(F_.mul(x, y)) == one) return y;
    }
    throw numerical_error("Internal", "inverse not found");
}

UnitGroup ResidueRing::unit_group() const {
    UnitGroup G;
    std::vector<FieldElement> els = units();
    int64_t n = static_cast<int64_t>(els.size());
    int64_t one = index({1, 0});
    auto mulidx = [&](int64_t x, int64_t y) { return index(F_.mul(element(x), element(y))); };
    auto powidx = [&](int64_t x, int64_t e) {
        int64_t r = one;
        for (int64_t j = 0; j < e; ++j) r = mulidx(r, x);
        return r;
    };

    std::vector<std::pair<int64_t, int>> gens;
    for (auto [ell, e] : factor_integer(n)) {
        int64_t pe = 1;
        for (int j = 0; j < e; ++j) pe *= ell;
        std::unordered_set<int64_t> sylow;
        std::vector<int64_t> sylow_list;
        for (const auto& x : els) {
            int64_t y = powidx(index(x), n / pe);
            if (sylow.insert(y).second) sylow_list.push_back(y);
        }
        std::sort(sylow_list.begin(), sylow_list.end());
        std::unordered_set<int64_t> H{one};
        while (static_cast<int64_t>(H.size()) < pe) {
            int64_t best = -1, best_m = 0;
            for (int64_t x : sylow_list) {
                int64_t m = 1, y = x;
                while (!H.count(y)) {
                    y = powidx(y, ell);
                    m *= ell;
                }
                if (m > best_m) {
                    best_m = m;
                    best = x;
                }
            }
            int64_t h = powidx(best, best_m);
            // adjust by an element of H so that the lift has exact order best_m
            int64_t g = -1;
            for (int64_t hp : H) {
                if (mulidx(powidx(hp, best_m), h) == one) {
                    g = mulidx(best, hp);
                    break;
                }
            }
            if (g < 0) throw numerical_error("Internal", "unit group decomposition failed");
            std::unordered_set<int64_t> next;
            int64_t gp = one;
            for (int64_t j = 0; j < best_m; ++j) {
                for (int64_t x : H) next.insert(mulidx(x, gp));
                gp = mulidx(gp, g);
            }
            H = std::move(next);
            gens.emplace_back(g, static_cast<int>(best_m));
        }
    }
    for (auto [g, m] : gens) {
        G.generators.push_back(element(g));
        G.orders.push_back(m);
    }
    // discrete logarithm table
    std::vector<int> exps(gens.size(), 0);
    std::vector<int64_t> gp(gens.size(), 0);
    for (size_t j = 0; j < gens.size(); ++j) gp[j] = gens[j].first;
    int64_t total = G.order();
    for (int64_t count = 0; count < total; ++count) {
        int64_t x = one;
        for (size_t j = 0; j < gens.size(); ++j) x = mulidx(x, powidx(gp[j], exps[j]));
        G.dlog[x] = exps;
        for (size_t j = 0; j < gens.size(); ++j) {
            if (++exps[j] < G.orders[j]) break;
            exps[j] = 0;
        }
    }
    if (static_cast<int64_t>(G.dlog.size()) != n) throw numerical_error("Internal", "unit group size mismatch");
    return G;
}

UnitGroup residue_units(const ImagQuadField& F, const PrincipalIdeal& f) {
    if (f.gen.is_zero()) throw input_error("ZeroIdeal", "residue units of the zero ideal");
    return ResidueRing(F, f.gen).unit_group();
}

int64_t ideal_phi(const ImagQuadField& F, const PrincipalIdeal& f) {
    if (f.norm == 1) return 1;
    int64_t phi = 1;
    for (const auto& [q, e] : factor_element(F, f.gen)) {
        int64_t nq = q.ideal.norm;
        int64_t t = nq - 1;
        for (int j = 1; j < e; ++j) t *= nq;
        phi *= t;
    }
    return phi;
}

}  // namespace bianchi
