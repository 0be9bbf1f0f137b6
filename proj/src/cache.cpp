#include "bianchi/cache.hpp"

#include "bianchi/errors.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace bianchi {

namespace fs = std::filesystem;

namespace {

const char* coefficient_magic = "bianchi-coefficients";
const char* newform_magic = "# bianchi-newform";

class FileLock {
public:
    explicit FileLock(const fs::path& path) {
        fd_ = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
        if (fd_ < 0) throw input_error("CacheUnavailable", "cannot open lock " + path.string());
        if (::flock(fd_, LOCK_EX) != 0) {
            ::close(fd_);
            throw input_error("CacheUnavailable", "cannot lock " + path.string());
        }
    }
    ~FileLock() {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;

private:
    int fd_ = -1;
};

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw input_error("CacheUnavailable", "cannot create " + dir.string() + ": " + ec.message());
}

void write_atomically(const fs::path& path, const std::string& body) {
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw input_error("CacheUnavailable", "cannot write " + tmp.string());
        out << body;
        out.flush();
        if (!out) throw input_error("CacheUnavailable", "short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw input_error("CacheUnavailable", "cannot replace " + path.string() + ": " + ec.message());
}

std::optional<std::string> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CoefficientFile {
    std::string label;
    int d = 0;
    std::string fingerprint;
    std::map<FieldElement, int64_t> entries;
};

// a file with a foreign header or version is treated as absent
std::optional<CoefficientFile> parse_coefficients(const std::string& text) {
    std::istringstream in(text);
    std::string magic, key;
    int version = 0;
    CoefficientFile out;
    if (!(in >> magic >> version) || magic != coefficient_magic || version != CoefficientCache::format_version)
        return std::nullopt;
    if (!(in >> key >> out.label) || key != "label") return std::nullopt;
    if (!(in >> key >> out.d) || key != "field_d") return std::nullopt;
    if (!(in >> key >> out.fingerprint) || key != "fingerprint") return std::nullopt;
    if (!(in >> key) || key != "entries") return std::nullopt;
    FieldElement g;
    int64_t v;
    while (in >> g.a >> g.b >> v) out.entries[g] = v;
    if (!in.eof()) return std::nullopt;
    return out;
}

std::string format_coefficients(const CoefficientFile& f, const ImagQuadField& K) {
    std::vector<std::pair<FieldElement, int64_t>> rows(f.entries.begin(), f.entries.end());
    std::stable_sort(rows.begin(), rows.end(), [&](const auto& x, const auto& y) {
        return K.norm(x.first) < K.norm(y.first);
    });
    std::ostringstream out;
    out << coefficient_magic << " " << CoefficientCache::format_version << "\nlabel " << f.label << "\nfield_d " << f.d
        << "\nfingerprint " << f.fingerprint << "\nentries\n";
    for (const auto& [g, v] : rows) out << g.a << " " << g.b << " " << v << "\n";
    return out.str();
}

void check_label(const std::string& label) {
    if (label.empty() || label.find_first_of("/\\ \t") != std::string::npos || label[0] == '.')
        throw input_error("MalformedNewform", "label '" + label + "' cannot name a cache file");
}

}  // namespace

std::string newform_fingerprint(const ClassicalNewformData& f) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : format_newform_text(f)) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

CoefficientCache::CoefficientCache(fs::path dir) : dir_(std::move(dir)) {}

fs::path CoefficientCache::resolve_dir(const std::optional<std::string>& flag) {
    if (flag && !flag->empty()) return *flag;
    if (const char* env = std::getenv(env_var); env && *env) return env;
    if (const char* home = std::getenv("HOME"); home && *home) return fs::path(home) / ".cache" / "bianchi";
    return ".bianchi-cache";
}

CoefficientCache::IngestResult CoefficientCache::store_newform(const ClassicalNewformData& f) const {
    check_label(f.label);
    fs::path dir = dir_ / "newforms";
    ensure_dir(dir);
    IngestResult res;
    res.path = dir / (f.label + ".txt");
    FileLock lock(dir / (f.label + ".lock"));
    std::string fp = newform_fingerprint(f);
    if (auto old = load_newform(f.label)) {
        if (newform_fingerprint(*old) == fp) return res;
        res.replaced = true;
    }
    write_atomically(res.path, std::string(newform_magic) + " " + std::to_string(format_version) + " " + fp + "\n" +
                                   format_newform_text(f));
    res.stored = true;
    if (res.replaced) {
        std::error_code ec;
        for (const auto& e : fs::directory_iterator(dir_ / "coefficients", ec)) {
            auto name = e.path().filename().string();
            if (name.rfind(f.label + "_d", 0) == 0) fs::remove(e.path(), ec);
        }
    }
    return res;
}

std::optional<ClassicalNewformData> CoefficientCache::load_newform(const std::string& label) const {
    check_label(label);
    auto text = read_file(dir_ / "newforms" / (label + ".txt"));
    if (!text) return std::nullopt;
    return parse_newform_text(*text);
}

fs::path CoefficientCache::coefficient_path(const BaseChangeForm& F) const {
    check_label(F.label());
    return dir_ / "coefficients" / (F.label() + "_d" + std::to_string(F.field().d()) + ".txt");
}

size_t CoefficientCache::load_coefficients(const BaseChangeForm& F) const {
    auto text = read_file(coefficient_path(F));
    if (!text) return 0;
    auto file = parse_coefficients(*text);
    if (!file || file->label != F.label() || file->d != F.field().d() ||
        file->fingerprint != newform_fingerprint(F.classical()))
        return 0;
    for (const auto& [g, v] : file->entries) F.preload(g, v);
    return file->entries.size();
}

size_t CoefficientCache::store_coefficients(const BaseChangeForm& F) const {
    fs::path path = coefficient_path(F);
    ensure_dir(path.parent_path());
    fs::path lock_path = path;
    lock_path += ".lock";
    FileLock lock(lock_path);
    std::string fp = newform_fingerprint(F.classical());
    CoefficientFile file;
    if (auto text = read_file(path)) {
        auto old = parse_coefficients(*text);
        if (old && old->label == F.label() && old->d == F.field().d() && old->fingerprint == fp) file = std::move(*old);
    }
    file.label = F.label();
    file.d = F.field().d();
    file.fingerprint = fp;
    size_t added = 0;
    for (const auto& [g, v] : F.memo_entries()) {
        auto [it, fresh] = file.entries.emplace(g, v);
        if (fresh) {
            ++added;
        } else if (it->second != v) {
            throw numerical_error("CacheConflict", F.label() + ": stored coefficient at (" + std::to_string(g.a) + ", " +
                                                       std::to_string(g.b) + ") disagrees with the computed one");
        }
    }
    if (added > 0) write_atomically(path, format_coefficients(file, F.field()));
    return added;
}

}  // namespace bianchi
