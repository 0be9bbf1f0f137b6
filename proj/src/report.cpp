#include "bianchi/report.hpp"

#include <algorithm>

namespace bianchi {

const char* library_version() { return "0.3.0"; }

Json to_json(const JobConfig& c) {
    Json j;
    j["command"] = c.command;
    j["field_d"] = c.field_d;
    j["newform"] = c.newform;
    j["chars"] = c.chars;
    j["prec"] = c.digits;
    j["split_point"] = c.split_point ? Json(*c.split_point) : Json(nullptr);
    j["fricke_sign"] = c.fricke_sign ? Json(*c.fricke_sign) : Json(nullptr);
    j["prime"] = c.prime ? Json(*c.prime) : Json(nullptr);
    j["stabilise"] = c.stabilise;
    j["tolerance"] = c.tolerance ? Json(*c.tolerance) : Json(nullptr);
    j["flip_sign"] = c.flip_sign;
    j["bound"] = c.bound ? Json(*c.bound) : Json(nullptr);
    return j;
}

Json real_json(const Real& x, unsigned digits) { return to_string(x, static_cast<int>(digits)); }

Json complex_json(const Complex& z, unsigned digits) {
    return Json{{"re", real_json(z.re, digits)}, {"im", real_json(z.im, digits)}};
}

Json error_bound_json(const Real& x) { return to_string(x, 6); }

Json to_json(const LValueReport& r, unsigned digits) {
    return Json{{"character", r.character_id},
                {"lambda", complex_json(r.lambda, digits)},
                {"split_point", real_json(r.split_point, 12)},
                {"fricke_sign", r.fricke_sign_used},
                {"certified_abs_error", error_bound_json(r.certified_abs_error)},
                {"terms", r.terms_used}};
}

Json to_json(const FEReport& r, unsigned digits) {
    return Json{{"lhs", to_json(r.lhs, digits)},
                {"rhs", to_json(r.rhs, digits)},
                {"epsilon", complex_json(r.epsilon, digits)},
                {"residual", error_bound_json(r.residual)},
                {"vanishing", r.vanishing},
                {"certificate", error_bound_json(r.certificate)},
                {"tolerance", r.tolerance},
                {"pass", r.pass}};
}

Json to_json(const PadicFEReport& r, unsigned digits) {
    return Json{{"lhs", complex_json(r.lhs, digits)},
                {"rhs", complex_json(r.rhs, digits)},
                {"constant", complex_json(r.constant, digits)},
                {"constant_abs", real_json(r.constant_abs, 12)},
                {"z_psi", complex_json(r.z_psi, digits)},
                {"z_dual", complex_json(r.z_dual, digits)},
                {"lambda_psi", to_json(r.lambda_psi, digits)},
                {"lambda_dual", to_json(r.lambda_dual, digits)},
                {"direct", r.direct},
                {"identity", r.identity},
                {"residual", error_bound_json(r.residual)},
                {"vanishing", r.vanishing},
                {"tolerance", r.tolerance},
                {"pass", r.pass}};
}

Json to_json(const FrickeEstimate& e) {
    return Json{{"sign", e.sign},
                {"ambiguous", e.ambiguous},
                {"confidence", e.confidence},
                {"score_plus", e.score_plus},
                {"score_minus", e.score_minus}};
}

Json to_json(const HeckeCharacter& psi) {
    return Json{{"id", psi.id()}, {"description", describe(psi)}};
}

int exit_code(ErrorCategory c) {
    switch (c) {
    case ErrorCategory::Input: return 2;
    case ErrorCategory::Numerical: return 3;
    case ErrorCategory::Unsupported: return 4;
    }
    return 3;
}

int combine_exit_codes(int a, int b) {
    auto rank = [](int c) {
        switch (c) {
        case 2: return 3;
        case 4: return 2;
        case 3: return 1;
        default: return 0;
        }
    };
    return rank(a) >= rank(b) ? a : b;
}

Json error_json(const Error& e) {
    const char* cat = e.category() == ErrorCategory::Input       ? "input"
                      : e.category() == ErrorCategory::Numerical ? "numerical"
                                                                 : "unsupported";
    return Json{{"code", e.code()}, {"category", cat}, {"message", e.what()}};
}

ReportWriter::ReportWriter(const std::optional<std::string>& path) {
    if (!path || *path == "-") {
        file_ = stdout;
        return;
    }
    file_ = std::fopen(path->c_str(), "w");
    if (!file_) throw input_error("OutputUnavailable", "cannot write " + *path);
    owned_ = true;
}

ReportWriter::~ReportWriter() {
    if (owned_) std::fclose(file_);
}

Json ReportWriter::envelope(const std::string& kind, const JobConfig& c) const {
    return Json{{"kind", kind}, {"version", library_version()}, {"precision", c.digits}, {"config", to_json(c)}};
}

void ReportWriter::write(const Json& record) {
    std::string line = record.dump() + "\n";
    std::fwrite(line.data(), 1, line.size(), file_);
    std::fflush(file_);
}

}  // namespace bianchi
