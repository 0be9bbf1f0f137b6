#pragma once

#include "bianchi/forms.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace bianchi {

// On-disk store of ingested newforms and base-change coefficients, keyed by
// (form label, field d, canonical generator). Files are plain text with a
// versioned header. Writers merge under an advisory lock and replace files by
// rename, so concurrent processes never observe a partial file and repeated
// inserts leave the store unchanged.
class CoefficientCache {
public:
    static constexpr int format_version = 1;
    static constexpr const char* env_var = "BIANCHI_CACHE_DIR";

    explicit CoefficientCache(std::filesystem::path dir);

    // flag, then the environment variable, then ~/.cache/bianchi
    static std::filesystem::path resolve_dir(const std::optional<std::string>& flag);

    const std::filesystem::path& dir() const { return dir_; }

    struct IngestResult {
        std::filesystem::path path;
        // false when an identical copy was already stored
        bool stored = false;
        // a different form was stored under the same label; its coefficients were dropped
        bool replaced = false;
    };
    IngestResult store_newform(const ClassicalNewformData& f) const;
    std::optional<ClassicalNewformData> load_newform(const std::string& label) const;

    // preloads F's memo from the store; returns the number of entries read
    size_t load_coefficients(const BaseChangeForm& F) const;
    // merges F's memo into the store; returns the number of new entries
    size_t store_coefficients(const BaseChangeForm& F) const;
    std::filesystem::path coefficient_path(const BaseChangeForm& F) const;

private:
    std::filesystem::path dir_;
};

// FNV-1a over the canonical text of the form, as 16 hex digits
std::string newform_fingerprint(const ClassicalNewformData& f);

}  // namespace bianchi
