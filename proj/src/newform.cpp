#include "bianchi/newform.hpp"

#include <fstream>
#include <sstream>

namespace bianchi {

namespace {

std::vector<int64_t> primes_up_to(int64_t n) {
    std::vector<bool> composite(static_cast<size_t>(n + 1), false);
    std::vector<int64_t> out;
    for (int64_t p = 2; p <= n; ++p) {
        if (composite[p]) continue;
        out.push_back(p);
        for (int64_t m = p * p; m <= n; m += p) composite[m] = true;
    }
    return out;
}

__int128 ipow128(int64_t b, int e) {
    __int128 r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

int64_t first_missing_prime(const ClassicalNewformData& f, int64_t B) {
    for (int64_t p : primes_up_to(B))
        if (!f.a.count(p)) return p;
    return 0;
}

}  // namespace

int64_t ClassicalNewformData::a_ell(int64_t ell) const {
    auto it = a.find(ell);
    if (it == a.end())
        throw input_error("InsufficientCoefficients", label + ": no coefficient a_" + std::to_string(ell) +
                                                          " (data complete up to " + std::to_string(bound) + ")");
    return it->second;
}

void ClassicalNewformData::require_bound(int64_t B) const {
    if (B <= bound) return;
    int64_t p = first_missing_prime(*this, B);
    throw input_error("InsufficientCoefficients",
                      label + ": missing a_" + std::to_string(p) + " below the requested bound " + std::to_string(B));
}

ClassicalNewformData parse_newform_text(const std::string& text) {
    ClassicalNewformData f;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool in_coeffs = false;
    auto fail = [&](const std::string& msg) {
        return input_error("MalformedNewform", "line " + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        if (in_coeffs) {
            int64_t ell, val;
            std::istringstream ks(key);
            if (!(ks >> ell) || !ks.eof() || !(ls >> val)) throw fail("expected 'ell a_ell'");
            if (!is_prime(ell)) throw fail(std::to_string(ell) + " is not prime");
            if (!f.a.emplace(ell, val).second) throw fail("duplicate coefficient for " + std::to_string(ell));
        } else if (key == "label") {
            if (!(ls >> f.label)) throw fail("label needs a value");
        } else if (key == "level") {
            if (!(ls >> f.level) || f.level <= 0) throw fail("level must be a positive integer");
        } else if (key == "weight") {
            if (!(ls >> f.weight) || f.weight < 2 || f.weight % 2) throw fail("weight must be an even integer >= 2");
        } else if (key == "atkin_lehner") {
            int64_t ell;
            int s;
            if (!(ls >> ell >> s) || (s != 1 && s != -1)) throw fail("expected 'atkin_lehner ell +-1'");
            f.atkin_lehner[ell] = s;
        } else if (key == "coefficients") {
            in_coeffs = true;
            continue;
        } else {
            throw fail("unknown key '" + key + "'");
        }
        std::string extra;
        if (ls >> extra) throw fail("trailing token '" + extra + "'");
    }
    if (f.level == 0 || f.weight == 0) throw input_error("MalformedNewform", "level and weight are required");
    if (f.label.empty()) f.label = "N" + std::to_string(f.level) + "k" + std::to_string(f.weight);
    for (const auto& [ell, s] : f.atkin_lehner) {
        (void)s;
        if (f.level % ell != 0)
            throw input_error("MalformedNewform", "Atkin-Lehner sign at " + std::to_string(ell) + " which does not divide the level");
    }
    int64_t top = f.a.empty() ? 1 : f.a.rbegin()->first;
    f.bound = 1;
    for (int64_t p : primes_up_to(top)) {
        if (!f.a.count(p)) break;
        f.bound = p;
    }
    return f;
}

ClassicalNewformData parse_newform_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("FileNotFound", "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_newform_text(ss.str());
}

std::string format_newform_text(const ClassicalNewformData& f) {
    std::ostringstream out;
    out << "label " << f.label << "\nlevel " << f.level << "\nweight " << f.weight << "\n";
    for (const auto& [ell, s] : f.atkin_lehner) out << "atkin_lehner " << ell << " " << s << "\n";
    out << "coefficients\n";
    for (const auto& [ell, a] : f.a) out << ell << " " << a << "\n";
    return out.str();
}

std::vector<int64_t> ramanujan_violations(const ClassicalNewformData& f) {
    std::vector<int64_t> bad;
    for (const auto& [ell, a] : f.a) {
        if (f.level % ell == 0) continue;
        if (static_cast<__int128>(a) * a > 4 * ipow128(ell, f.k() + 1)) bad.push_back(ell);
    }
    return bad;
}

void check_ramanujan(const ClassicalNewformData& f) {
    auto bad = ramanujan_violations(f);
    if (bad.empty()) return;
    std::string msg = f.label + ": |a_ell| exceeds 2 ell^((k+1)/2) at ell =";
    for (auto ell : bad) msg += " " + std::to_string(ell);
    throw input_error("RamanujanViolation", msg);
}

int classical_root_number(const ClassicalNewformData& f) {
    int eps = (f.weight / 2) % 2 ? -1 : 1;
    for (const auto& [ell, e] : factor_integer(f.level)) {
        (void)e;
        auto it = f.atkin_lehner.find(ell);
        if (it == f.atkin_lehner.end())
            throw input_error("MissingAtkinLehner", f.label + ": no Atkin-Lehner sign at " + std::to_string(ell));
        eps *= it->second;
    }
    return eps;
}

int twisted_root_number(const ClassicalNewformData& f, int disc) {
    // chi(-N) with chi(-1) = -1 for an imaginary quadratic discriminant
    int chi = -1;
    for (const auto& [ell, e] : factor_integer(f.level)) {
        int c = kronecker(disc, ell);
        if (c == 0)
            throw unsupported_error("UnsupportedRamification",
                                    f.label + ": level shares the prime " + std::to_string(ell) + " with the discriminant");
        if (e % 2) chi *= c;
    }
    return classical_root_number(f) * chi;
}

int predicted_fricke_sign(const ClassicalNewformData& f, const ImagQuadField& K) {
    return -classical_root_number(f) * twisted_root_number(f, K.disc());
}

}  // namespace bianchi
