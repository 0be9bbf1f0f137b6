#include "bianchi/hecke.hpp"

#include <fstream>
#include <numeric>
#include <sstream>

namespace bianchi {

RootOfUnity RootOfUnity::make(int64_t k, int64_t n) {
    if (n <= 0) throw input_error("MalformedSpec", "root of unity order must be positive");
    k = ((k % n) + n) % n;
    int64_t g = std::gcd(k, n);
    if (k == 0) return {0, 1};
    return {k / g, n / g};
}

RootOfUnity RootOfUnity::operator*(const RootOfUnity& o) const {
    int64_t l = std::lcm(n, o.n);
    return make(k * (l / n) + o.k * (l / o.n), l);
}

RootOfUnity RootOfUnity::pow(int64_t e) const {
    return make(static_cast<int64_t>((static_cast<__int128>(k) * e) % n), n);
}

CharacterValue CharacterValue::zero_value() {
    CharacterValue v;
    v.zero = true;
    return v;
}

CharacterValue CharacterValue::operator*(const CharacterValue& o) const {
    if (zero || o.zero) return zero_value();
    CharacterValue v;
    v.root = root * o.root;
    v.monomials = monomials;
    v.monomials.insert(v.monomials.end(), o.monomials.begin(), o.monomials.end());
    return v;
}

CharacterValue CharacterValue::inverse() const {
    if (zero) throw input_error("DivisionByZero", "inverse of a zero character value");
    CharacterValue v;
    v.root = root.inverse();
    for (const auto& m : monomials) v.monomials.push_back({m.x, -m.q, -m.r});
    return v;
}

Complex CharacterValue::render(const ImagQuadField& F) const {
    if (zero) return Complex(0);
    Complex z = root.render();
    for (const auto& m : monomials) {
        Complex x = F.embed(m.x);
        z *= pow(x, m.q) * pow(x.conj(), m.r);
    }
    return z;
}

Real CharacterValue::abs(const ImagQuadField& F) const { return render(F).abs(); }

namespace {

// index j with u = e(j/w), using that units()[j] = zeta_w^j
int unit_index(const ImagQuadField& F, FieldElement u) {
    auto us = F.units();
    for (size_t j = 0; j < us.size(); ++j)
        if (us[j] == u) return static_cast<int>(j);
    throw numerical_error("Internal", "not a unit");
}

}  // namespace

HeckeCharacter::HeckeCharacter(const ImagQuadField& F, const PrincipalIdeal& conductor, int q, int r,
                               std::vector<RootOfUnity> generator_values, std::string id)
    : F_(F),
      f_(conductor),
      q_(q),
      r_(r),
      ring_(F, conductor.gen),
      group_(ring_.unit_group()),
      values_(std::move(generator_values)),
      id_(std::move(id)) {
    if (values_.size() != group_.generators.size())
        throw input_error("MalformedSpec", "expected " + std::to_string(group_.generators.size()) +
                                               " generator values, got " + std::to_string(values_.size()));
    for (size_t j = 0; j < values_.size(); ++j) {
        if (group_.orders[j] % values_[j].n != 0)
            throw input_error("MalformedSpec", "value order " + std::to_string(values_[j].n) +
                                                   " does not divide generator order " +
                                                   std::to_string(group_.orders[j]));
    }
    for (const auto& u : F.units()) {
        int j = unit_index(F, u);
        RootOfUnity infinity_part = RootOfUnity::make(static_cast<int64_t>(j) * (q - r), F.w());
        if (!(finite(u) * infinity_part).is_one())
            throw input_error("UnitIncompatible", "no Hecke character of conductor norm " + std::to_string(f_.norm) +
                                                      " and infinity type (" + std::to_string(q) + "," +
                                                      std::to_string(r) + ") with this finite part");
    }
}

RootOfUnity HeckeCharacter::finite(FieldElement x) const {
    if (!ring_.is_unit(x)) throw input_error("NotCoprime", "element not coprime to the conductor");
    const auto& e = group_.dlog.at(ring_.index(x));
    RootOfUnity v;
    for (size_t j = 0; j < e.size(); ++j) v = v * values_[j].pow(e[j]);
    return v;
}

CharacterValue HeckeCharacter::infinity(FieldElement x) const {
    CharacterValue v;
    if (q_ != 0 || r_ != 0) v.monomials.push_back({x, q_, r_});
    return v;
}

bool HeckeCharacter::is_trivial() const {
    if (q_ != 0 || r_ != 0) return false;
    for (const auto& v : values_)
        if (!v.is_one()) return false;
    return true;
}

HeckeCharacter make_character(const ImagQuadField& F, const PrincipalIdeal& f, int q, int r,
                              const std::vector<RootOfUnity>& generator_values, const std::string& id) {
    return HeckeCharacter(F, f, q, r, generator_values, id);
}

HeckeCharacter trivial_character(const ImagQuadField& F) {
    return HeckeCharacter(F, make_ideal(F, {1, 0}), 0, 0, {}, "trivial");
}

HeckeCharacter norm_character(const ImagQuadField& F, int k) {
    return HeckeCharacter(F, make_ideal(F, {1, 0}), k, k, {}, "norm^" + std::to_string(k));
}

bool is_primitive(const HeckeCharacter& psi) {
    const auto& F = psi.field();
    const auto& R = psi.ring();
    if (psi.conductor().norm == 1) return true;
    auto units = R.units();
    for (const auto& [q, e] : R.prime_factors()) {
        (void)e;
        FieldElement smaller = *F.divide(psi.conductor().gen, q.ideal.gen);
        ResidueRing Rs(F, smaller);
        int64_t one = Rs.index({1, 0});
        bool nontrivial = false;
        for (const auto& x : units) {
            if (Rs.index(x) != one) continue;
            if (!psi.finite(x).is_one()) {
                nontrivial = true;
                break;
            }
        }
        if (!nontrivial) return false;
    }
    return true;
}

std::vector<HeckeCharacter> enumerate_characters(const ImagQuadField& F, const PrincipalIdeal& f, int q, int r,
                                                 bool primitive_only) {
    UnitGroup G = ResidueRing(F, f.gen).unit_group();
    std::vector<HeckeCharacter> out;
    std::vector<int> j(G.orders.size(), 0);
    int64_t total = G.order();
    for (int64_t count = 0; count < total; ++count) {
        std::vector<RootOfUnity> vals;
        for (size_t i = 0; i < j.size(); ++i) vals.push_back(RootOfUnity::make(j[i], G.orders[i]));
        try {
            HeckeCharacter psi(F, f, q, r, vals);
            if (!primitive_only || is_primitive(psi)) {
                psi.set_id(describe(psi));
                out.push_back(std::move(psi));
            }
        } catch (const Error& e) {
            if (e.code() != "UnitIncompatible") throw;
        }
        for (size_t i = 0; i < j.size(); ++i) {
            if (++j[i] < G.orders[i]) break;
            j[i] = 0;
        }
    }
    return out;
}

CharacterValue value_on_ideal(const HeckeCharacter& psi, const PrincipalIdeal& m) {
    if (!psi.coprime(m.gen)) return CharacterValue::zero_value();
    CharacterValue v = psi.infinity(m.gen);
    v.root = psi.finite(m.gen);
    return v;
}

Complex additive_character(const ImagQuadField& F, FieldElement x, FieldElement f) {
    // Tr(x/(f delta)) = Tr(x conj(f) conj(delta)) / (N(f) D)
    FieldElement y = F.mul(F.mul(x, F.conj(f)), F.conj(F.delta()));
    return unit_root(F.trace(y), checked_mul(F.norm(f), F.D()));
}

Complex gauss_sum(const HeckeCharacter& psi) {
    const auto& F = psi.field();
    Complex s(0);
    for (const auto& b : psi.ring().units()) s += psi.finite_complex(b) * additive_character(F, b, psi.conductor().gen);
    return s;
}

Complex gauss_factor(const HeckeCharacter& psi) {
    const auto& F = psi.field();
    FieldElement fd = F.mul(psi.conductor().gen, F.delta());
    return psi.infinity(fd).render(F) * gauss_sum(psi);
}

HeckeCharacter dual_character(const HeckeCharacter& psi, int k) {
    std::vector<RootOfUnity> inv;
    for (const auto& v : psi.generator_values()) inv.push_back(v.inverse());
    HeckeCharacter d(psi.field(), psi.conductor(), k - psi.q(), k - psi.r(), inv);
    d.set_id(psi.id().empty() ? describe(d) : "dual(" + psi.id() + ")");
    return d;
}

namespace {

bool divides_p_power(const HeckeCharacter& psi, int64_t p) {
    for (const auto& [q, e] : psi.ring().prime_factors()) {
        (void)e;
        if (q.ell != p) return false;
    }
    return true;
}

}  // namespace

CharacterValue p_fin_value(const HeckeCharacter& psi, FieldElement alpha, int64_t p) {
    if (!divides_p_power(psi, p))
        throw input_error("ConductorNotPPower", "conductor does not divide a power of " + std::to_string(p));
    const auto& F = psi.field();
    for (const auto& q : splitting_type(F, p).primes)
        if (F.divides(q.ideal.gen, alpha)) throw input_error("AlphaNotCoprime", "alpha is not a unit at p");
    CharacterValue v = psi.infinity(alpha);
    v.root = psi.finite(alpha);
    return v;
}

CharacterValue sigma_p(const ImagQuadField& F, int64_t p, int q, int r, FieldElement x) {
    for (const auto& pr : splitting_type(F, p).primes)
        if (F.divides(pr.ideal.gen, x)) throw input_error("NotCoprime", "x is not coprime to p");
    CharacterValue v;
    if (q != 0 || r != 0) v.monomials.push_back({x, q, r});
    return v;
}

CharacterValue sigma_p(const ImagQuadField& F, int q, int r, const IdeleAtP& x) {
    Splitting s = splitting_type(F, x.p);
    CharacterValue v;
    if (s.kind == SplitKind::Split) {
        if (x.components.size() != 2) throw input_error("MalformedIdele", "split prime needs two components");
        // x_p^q x_pbar^r; the component at pbar is read through complex conjugation
        v.monomials.push_back({x.components[0], q, 0});
        v.monomials.push_back({x.components[1], 0, r});
    } else {
        if (x.components.size() != 1) throw input_error("MalformedIdele", "non-split prime needs one component");
        v.monomials.push_back({x.components[0], q, r});
    }
    return v;
}

std::string describe(const HeckeCharacter& psi) {
    std::ostringstream os;
    os << "f=(" << psi.conductor().gen.a << "," << psi.conductor().gen.b << ");qr=(" << psi.q() << "," << psi.r()
       << ");chi=[";
    for (size_t j = 0; j < psi.generator_values().size(); ++j) {
        const auto& v = psi.generator_values()[j];
        if (j) os << ",";
        os << v.k << "/" << v.n;
    }
    os << "]";
    return os.str();
}

namespace {

struct PendingCharacter {
    std::string id;
    int d = 0;
    bool have_d = false;
    FieldElement conductor{1, 0};
    int q = 0, r = 0;
    std::vector<std::pair<FieldElement, RootOfUnity>> gens;
    int line = 0;
};

HeckeCharacter build(const PendingCharacter& pc) {
    if (!pc.have_d) throw input_error("MalformedSpec", "character '" + pc.id + "' lacks field_d");
    ImagQuadField F(pc.d);
    PrincipalIdeal f = make_ideal(F, pc.conductor);
    ResidueRing R(F, f.gen);
    UnitGroup G = R.unit_group();
    std::vector<RootOfUnity> vals(G.generators.size());
    std::vector<bool> seen(G.generators.size(), false);
    for (const auto& [g, v] : pc.gens) {
        bool matched = false;
        for (size_t j = 0; j < G.generators.size(); ++j) {
            if (R.index(g) == R.index(G.generators[j])) {
                vals[j] = v;
                seen[j] = true;
                matched = true;
            }
        }
        if (!matched)
            throw input_error("MalformedSpec", "character '" + pc.id + "': " + std::to_string(g.a) + "+" +
                                                   std::to_string(g.b) + "w is not one of the computed generators");
    }
    for (size_t j = 0; j < seen.size(); ++j)
        if (!seen[j])
            throw input_error("MalformedSpec", "character '" + pc.id + "': missing value for generator " +
                                                   std::to_string(G.generators[j].a) + "+" +
                                                   std::to_string(G.generators[j].b) + "w");
    return HeckeCharacter(F, f, pc.q, pc.r, vals, pc.id);
}

}  // namespace

std::vector<HeckeCharacter> parse_character_text(const std::string& text) {
    std::vector<HeckeCharacter> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::optional<PendingCharacter> cur;
    auto fail = [&](const std::string& msg) {
        return input_error("MalformedSpec", "line " + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        if (key == "character") {
            if (cur) throw fail("nested character block");
            cur.emplace();
            cur->line = lineno;
            if (!(ls >> cur->id)) throw fail("character needs an id");
        } else if (!cur) {
            throw fail("'" + key + "' outside a character block");
        } else if (key == "field_d") {
            if (!(ls >> cur->d)) throw fail("field_d needs an integer");
            cur->have_d = true;
        } else if (key == "conductor_gen") {
            if (!(ls >> cur->conductor.a >> cur->conductor.b)) throw fail("conductor_gen needs two integers");
        } else if (key == "inf_type") {
            if (!(ls >> cur->q >> cur->r)) throw fail("inf_type needs two integers");
        } else if (key == "gen") {
            FieldElement g;
            std::string word;
            int64_t k, n;
            if (!(ls >> g.a >> g.b >> word >> k >> n) || word != "root") throw fail("expected 'gen a b root k n'");
            cur->gens.emplace_back(g, RootOfUnity::make(k, n));
        } else if (key == "end") {
            out.push_back(build(*cur));
            cur.reset();
        } else {
            throw fail("unknown key '" + key + "'");
        }
        std::string extra;
        if (ls >> extra) throw fail("trailing token '" + extra + "'");
    }
    if (cur) throw input_error("MalformedSpec", "character '" + cur->id + "' is not terminated by 'end'");
    return out;
}

std::vector<HeckeCharacter> parse_character_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("FileNotFound", "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_character_text(ss.str());
}

}  // namespace bianchi
