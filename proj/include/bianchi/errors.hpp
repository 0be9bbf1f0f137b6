#pragma once

#include <stdexcept>
#include <string>

namespace bianchi {

enum class ErrorCategory { Input, Numerical, Unsupported };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory cat, std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), cat_(cat), code_(std::move(code)) {}
    ErrorCategory category() const { return cat_; }
    const std::string& code() const { return code_; }

private:
    ErrorCategory cat_;
    std::string code_;
};

inline Error input_error(const std::string& code, const std::string& what) {
    return Error(ErrorCategory::Input, code, what);
}
inline Error numerical_error(const std::string& code, const std::string& what) {
    return Error(ErrorCategory::Numerical, code, what);
}
inline Error unsupported_error(const std::string& code, const std::string& what) {
    return Error(ErrorCategory::Unsupported, code, what);
}

}  // namespace bianchi
