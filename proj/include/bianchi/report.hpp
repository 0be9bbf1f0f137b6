#pragma once

#include "bianchi/errors.hpp"
#include "bianchi/lfun.hpp"
#include "bianchi/padic.hpp"

#include "json.hpp"

#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

namespace bianchi {

using Json = nlohmann::json;

const char* library_version();

struct JobConfig {
    std::string command;
    int field_d = -1;
    std::string newform;
    std::vector<std::string> chars;
    unsigned digits = 50;
    std::optional<std::string> split_point;
    std::optional<int> fricke_sign;
    std::optional<int64_t> prime;
    std::vector<int> stabilise;
    std::optional<std::string> out;
    std::optional<std::string> cache_dir;
    std::optional<double> tolerance;
    bool flip_sign = false;
    int jobs = 1;
    std::optional<int64_t> bound;
};

Json to_json(const JobConfig& c);

// decimal strings: values keep the working digits, error bounds keep 6
Json real_json(const Real& x, unsigned digits);
Json complex_json(const Complex& z, unsigned digits);
Json error_bound_json(const Real& x);

Json to_json(const LValueReport& r, unsigned digits);
Json to_json(const FEReport& r, unsigned digits);
Json to_json(const PadicFEReport& r, unsigned digits);
Json to_json(const FrickeEstimate& e);
Json to_json(const HeckeCharacter& psi);

// 2 input or configuration, 3 numerical certificate, 4 outside the supported scope
int exit_code(ErrorCategory c);
// the code of the most severe failure: configuration errors first, then scope, then numerics
int combine_exit_codes(int a, int b);

// one JSON object per line; everything but the runtime field is a function of the config and the cache
class ReportWriter {
public:
    explicit ReportWriter(const std::optional<std::string>& path);
    ~ReportWriter();
    ReportWriter(const ReportWriter&) = delete;
    ReportWriter& operator=(const ReportWriter&) = delete;

    // adds version, precision and the config echo
    Json envelope(const std::string& kind, const JobConfig& c) const;
    void write(const Json& record);

private:
    std::FILE* file_ = nullptr;
    bool owned_ = false;
};

Json error_json(const Error& e);

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace bianchi
