#include "bianchi/cache.hpp"
#include "bianchi/report.hpp"

#include "CLI11.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

using namespace bianchi;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    Json payload;
    int code = 0;
};

// the parsed inputs shared by every job of a run
struct Inputs {
    std::unique_ptr<ImagQuadField> K;
    ClassicalNewformData form;
    std::unique_ptr<BaseChangeForm> base;
    std::unique_ptr<StabilisedForm> stabilised;
    std::vector<HeckeCharacter> chars;
    std::string fricke_source = "none";
};

Outcome failure(const Error& e) { return {Json{{"error", error_json(e)}}, exit_code(e.category())}; }

template <class F>
Outcome guarded(F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        return failure(e);
    } catch (const std::exception& e) {
        return failure(numerical_error("InternalError", e.what()));
    }
}

// runs fn(0..count-1) in up to `jobs` forked workers; each worker inherits the parsed inputs and the
// precision, writes its result to a private file and merges its coefficients into the cache
std::vector<Outcome> run_jobs(int jobs, int count, const std::function<Outcome(int)>& fn,
                              const std::function<void()>& after_worker) {
    std::vector<Outcome> out(count);
    if (jobs <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) out[i] = fn(i);
        return out;
    }
    std::string tmpl = (fs::temp_directory_path() / "bianchi-jobs-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) throw input_error("OutputUnavailable", "cannot create a work directory");
    fs::path work = tmpl;
    auto result_path = [&](int i) { return work / (std::to_string(i) + ".json"); };
    std::fflush(nullptr);
    std::map<pid_t, int> running;
    int next = 0;
    auto reap = [&] {
        int status = 0;
        pid_t pid = ::wait(&status);
        if (pid <= 0) return;
        int i = running.at(pid);
        running.erase(pid);
        std::ifstream in(result_path(i));
        Json j = in ? Json::parse(in, nullptr, false) : Json();
        if (!WIFEXITED(status) || j.is_discarded() || !j.is_object()) {
            out[i] = failure(numerical_error("WorkerFailed", "job " + std::to_string(i) + " did not complete"));
        } else {
            out[i] = {j["payload"], j["code"].get<int>()};
        }
    };
    while (next < count || !running.empty()) {
        if (next < count && static_cast<int>(running.size()) < jobs) {
            pid_t pid = ::fork();
            if (pid < 0) throw input_error("OutputUnavailable", "fork failed");
            if (pid == 0) {
                Outcome o = fn(next);
                try {
                    after_worker();
                } catch (const Error&) {
                }
                std::ofstream f(result_path(next));
                f << Json{{"payload", o.payload}, {"code", o.code}}.dump();
                f.close();
                ::_exit(f ? 0 : 1);
            }
            running[pid] = next++;
        } else {
            reap();
        }
    }
    std::error_code ec;
    fs::remove_all(work, ec);
    return out;
}

std::vector<HeckeCharacter> load_characters(const JobConfig& c) {
    std::vector<HeckeCharacter> out;
    for (const auto& path : c.chars) {
        for (auto& psi : parse_character_file(path)) {
            if (psi.field().d() != c.field_d)
                throw input_error("FieldMismatch", "character '" + psi.id() + "' in " + path + " is defined over d = " +
                                                       std::to_string(psi.field().d()));
            out.push_back(std::move(psi));
        }
    }
    return out;
}

// a path is read directly; anything else is looked up as a label in the cache
ClassicalNewformData load_form(const JobConfig& c, const CoefficientCache& cache) {
    if (c.newform.empty()) throw input_error("MissingNewform", "--newform is required");
    if (fs::exists(c.newform)) return parse_newform_file(c.newform);
    if (c.newform.find('/') == std::string::npos)
        if (auto f = cache.load_newform(c.newform)) return *f;
    throw input_error("FileNotFound", "no newform file or cached label '" + c.newform + "'");
}

std::vector<RootChoice> root_choices(const ImagQuadField& K, int64_t p, const std::vector<int>& branches) {
    auto primes = splitting_type(K, p).primes;
    std::vector<int> b = branches;
    if (b.empty()) b.assign(primes.size(), 0);
    if (b.size() != primes.size())
        throw input_error("MalformedSpec", std::to_string(p) + " has " + std::to_string(primes.size()) +
                                               " prime(s) above it but " + std::to_string(b.size()) +
                                               " root choice(s) were given");
    std::vector<RootChoice> out;
    for (size_t i = 0; i < primes.size(); ++i) out.push_back({primes[i], b[i]});
    return out;
}

Inputs prepare(const JobConfig& c, const CoefficientCache& cache, bool need_chars, bool need_prime) {
    Inputs in;
    in.K = std::make_unique<ImagQuadField>(c.field_d);
    in.form = load_form(c, cache);
    in.chars = load_characters(c);
    if (need_chars && in.chars.empty()) throw input_error("NoCharacters", "--chars names no characters");
    if (need_prime && !c.prime) throw input_error("MissingPrime", "--prime is required");
    if (c.fricke_sign && *c.fricke_sign != 1 && *c.fricke_sign != -1)
        throw input_error("MalformedSpec", "--fricke-sign must be 1 or -1");
    in.base = std::make_unique<BaseChangeForm>(in.form, *in.K);
    if (c.fricke_sign) {
        in.base->set_fricke_sign(*c.fricke_sign);
        in.fricke_source = "flag";
    } else {
        try {
            in.base->set_fricke_sign(predicted_fricke_sign(in.form, *in.K));
            in.fricke_source = "atkin_lehner";
        } catch (const Error&) {
        }
    }
    if (c.prime) {
        in.stabilised = std::make_unique<StabilisedForm>(*in.base, *c.prime, root_choices(*in.K, *c.prime, c.stabilise));
    } else if (!c.stabilise.empty()) {
        throw input_error("MalformedSpec", "--stabilise needs --prime");
    }
    if (c.split_point) {
        bool positive = false;
        try {
            positive = Real(*c.split_point) > 0;
        } catch (const std::exception&) {
        }
        if (!positive) throw input_error("MalformedSpec", "--split-point must be a positive number");
    }
    cache.load_coefficients(*in.base);
    return in;
}

LValueOptions options(const JobConfig& c) {
    LValueOptions o;
    o.digits = c.digits;
    if (c.split_point) o.split_point = Real(*c.split_point);
    return o;
}

std::string render_quad(QuadInt a) {
    std::ostringstream os;
    os << a.x << (a.y < 0 ? " - " : " + ") << (a.y < 0 ? -a.y : a.y) << "*theta";
    return os.str();
}

Json fraction_json(std::pair<int64_t, int64_t> f) { return std::to_string(f.first) + "/" + std::to_string(f.second); }

double tolerance_or(const JobConfig& c, int margin) {
    return c.tolerance ? *c.tolerance : std::pow(10.0, -static_cast<double>(c.digits) + margin);
}

class Run {
public:
    explicit Run(JobConfig c) : c_(std::move(c)), cache_(CoefficientCache::resolve_dir(c_.cache_dir)) {}

    int execute(const std::string& kind, bool need_chars, bool need_prime,
                const std::function<Outcome(const Inputs&, const HeckeCharacter&)>& job,
                const std::function<Json(const Inputs&)>& header = nullptr) {
        std::unique_ptr<ReportWriter> out;
        try {
            out = std::make_unique<ReportWriter>(c_.out);
        } catch (const Error& e) {
            std::cerr << e.what() << "\n";
            return exit_code(e.category());
        }
        Stopwatch total;
        Inputs in;
        try {
            in = prepare(c_, cache_, need_chars, need_prime);
        } catch (const Error& e) {
            Json rec = out->envelope(kind, c_);
            rec["error"] = error_json(e);
            rec["runtime_ms"] = total.ms();
            out->write(rec);
            std::cerr << e.what() << "\n";
            return exit_code(e.category());
        }
        int code = 0;
        if (header) {
            Outcome h = guarded([&] { return Outcome{header(in), 0}; });
            Json rec = out->envelope(kind + "-form", c_);
            rec.update(h.payload);
            rec["fricke_sign_source"] = in.fricke_source;
            rec["runtime_ms"] = total.ms();
            out->write(rec);
            code = combine_exit_codes(code, h.code);
        }
        auto results = run_jobs(
            c_.jobs, static_cast<int>(in.chars.size()),
            [&](int i) {
                Stopwatch sw;
                Outcome o = guarded([&] { return job(in, in.chars[i]); });
                o.payload["runtime_ms"] = sw.ms();
                return o;
            },
            [&] { cache_.store_coefficients(*in.base); });
        for (size_t i = 0; i < results.size(); ++i) {
            Json rec = out->envelope(kind, c_);
            rec["character"] = to_json(in.chars[i]);
            rec["fricke_sign_source"] = in.fricke_source;
            rec.update(results[i].payload);
            out->write(rec);
            code = combine_exit_codes(code, results[i].code);
            if (results[i].payload.contains("residual") && results[i].payload["residual"].is_string()) {
                double r = std::stod(results[i].payload["residual"].get<std::string>());
                max_residual_ = std::max(max_residual_, r);
            }
            if (results[i].payload.value("pass", false)) ++passed_;
        }
        try {
            cache_.store_coefficients(*in.base);
        } catch (const Error& e) {
            std::cerr << "warning: " << e.what() << "\n";
        }
        if (summarise_) {
            Json rec = out->envelope(kind + "-summary", c_);
            rec["characters"] = results.size();
            rec["passed"] = passed_;
            rec["max_residual"] = max_residual_;
            rec["verdict"] = code == 0 ? "pass" : "fail";
            rec["runtime_ms"] = total.ms();
            out->write(rec);
            std::ostream& os = c_.out && *c_.out != "-" ? std::cout : std::cerr;
            os << kind << ": " << passed_ << "/" << results.size() << " pass, max residual " << max_residual_
               << ", verdict " << (code == 0 ? "pass" : "fail") << "\n";
        }
        return code;
    }

    void summarise() { summarise_ = true; }
    const JobConfig& config() const { return c_; }
    const CoefficientCache& cache() const { return cache_; }

private:
    JobConfig c_;
    CoefficientCache cache_;
    bool summarise_ = false;
    double max_residual_ = 0;
    int passed_ = 0;
};

LForm lform_of(const Inputs& in) { return in.stabilised ? make_lform(*in.stabilised) : make_lform(*in.base); }

int cmd_lvalue(const JobConfig& c) {
    Run run(c);
    return run.execute("lvalue", true, false, [&](const Inputs& in, const HeckeCharacter& psi) {
        auto L = lform_of(in);
        return Outcome{Json{{"result", to_json(lambda_value(L, psi, options(c)), c.digits)}}, 0};
    });
}

int cmd_check_fe(const JobConfig& c) {
    Run run(c);
    run.summarise();
    double tol = tolerance_or(c, 10);
    return run.execute("check-fe", true, false, [&](const Inputs& in, const HeckeCharacter& psi) {
        auto L = lform_of(in);
        auto fe = fe_residual(L, psi, options(c), tol, c.flip_sign);
        Json j = to_json(fe, c.digits);
        return Outcome{j, fe.pass ? 0 : 3};
    });
}

int cmd_check_padic_fe(const JobConfig& c) {
    Run run(c);
    run.summarise();
    double tol = tolerance_or(c, 15);
    return run.execute("check-padic-fe", true, true, [&](const Inputs& in, const HeckeCharacter& psi) {
        auto fe = padic_fe_check(*in.stabilised, psi, options(c), tol, c.flip_sign);
        return Outcome{to_json(fe, c.digits), fe.pass ? 0 : 3};
    });
}

int cmd_stabilise(const JobConfig& c) {
    Run run(c);
    run.summarise();
    double tol = tolerance_or(c, 15);
    auto header = [&](const Inputs& in) {
        const auto& S = *in.stabilised;
        Json primes = Json::array();
        auto slopes = slope_class(S);
        auto adm = admissibility_data(S);
        for (size_t i = 0; i < S.choices().size(); ++i) {
            const auto& g = S.choices()[i].prime.ideal.gen;
            primes.push_back(Json{{"prime", {g.a, g.b}},
                                  {"branch", S.choices()[i].branch},
                                  {"alpha", render_quad(S.alpha(i))},
                                  {"beta", render_quad(S.beta(i))},
                                  {"slope", fraction_json(slopes.slopes[i])},
                                  {"h", fraction_json(adm[i])}});
        }
        return Json{{"trace", S.ring().trace},
                    {"norm", S.ring().norm},
                    {"level", {S.level().gen.a, S.level().gen.b}},
                    {"slope_class", slopes.cls == SlopeClass::Small ? "small" : "critical"},
                    {"primes", primes}};
    };
    return run.execute(
        "stabilise", false, true,
        [&](const Inputs& in, const HeckeCharacter& psi) {
            const auto& S = *in.stabilised;
            if (!psi.coprime(S.level().gen))
                throw unsupported_error("ConductorNotCoprimeToLevel",
                                        "the two-path check needs a character coprime to the stabilised level");
            auto direct = lambda_value(make_lform(S), psi, options(c));
            auto base = lambda_value(make_lform(*in.base), psi, options(c));
            Complex z = z_factor_dual(S, psi);
            PrecisionScope ps(c.digits + 10);
            Real res = relative_difference(direct.lambda, z * base.lambda, Real("1e-60"));
            bool pass = res < Real(tol);
            return Outcome{Json{{"direct", to_json(direct, c.digits)},
                                {"unstabilised", to_json(base, c.digits)},
                                {"z_factor", complex_json(z, c.digits)},
                                {"residual", error_bound_json(res)},
                                {"tolerance", tol},
                                {"pass", pass}},
                           pass ? 0 : 3};
        },
        header);
}

int cmd_fricke_sign(const JobConfig& c) {
    Run run(c);
    std::unique_ptr<ReportWriter> out;
    try {
        out = std::make_unique<ReportWriter>(c.out);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return exit_code(e.category());
    }
    Stopwatch sw;
    Json rec = out->envelope("fricke-sign", c);
    int code = 0;
    try {
        JobConfig unsigned_config = c;
        unsigned_config.fricke_sign.reset();
        Inputs in = prepare(unsigned_config, run.cache(), true, false);
        BaseChangeForm F(in.form, *in.K);
        run.cache().load_coefficients(F);
        auto est = fricke_sign_estimate(F, in.chars, options(c));
        rec["estimate"] = to_json(est);
        Json chars = Json::array();
        for (const auto& psi : in.chars) chars.push_back(to_json(psi));
        rec["characters"] = chars;
        std::optional<int> predicted;
        try {
            predicted = predicted_fricke_sign(in.form, *in.K);
        } catch (const Error&) {
        }
        rec["atkin_lehner_prediction"] = predicted ? Json(*predicted) : Json(nullptr);
        bool agrees = !predicted || *predicted == est.sign;
        rec["agrees"] = predicted ? Json(agrees) : Json(nullptr);
        if (est.ambiguous || !agrees) code = 3;
        run.cache().store_coefficients(F);
    } catch (const Error& e) {
        rec["error"] = error_json(e);
        code = exit_code(e.category());
        std::cerr << e.what() << "\n";
    }
    rec["runtime_ms"] = sw.ms();
    out->write(rec);
    return code;
}

int cmd_ingest(const JobConfig& c) {
    std::unique_ptr<ReportWriter> out;
    try {
        out = std::make_unique<ReportWriter>(c.out);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return exit_code(e.category());
    }
    Stopwatch sw;
    Json rec = out->envelope("ingest", c);
    int code = 0;
    try {
        if (c.newform.empty() || !fs::exists(c.newform))
            throw input_error("FileNotFound", "no newform file '" + c.newform + "'");
        auto f = parse_newform_file(c.newform);
        rec["label"] = f.label;
        rec["level"] = f.level;
        rec["weight"] = f.weight;
        rec["bound"] = f.bound;
        rec["primes"] = f.a.size();
        if (c.bound) f.require_bound(*c.bound);
        auto bad = ramanujan_violations(f);
        if (!bad.empty()) {
            Json v = Json::array();
            for (auto ell : bad) v.push_back(Json{{"ell", ell}, {"a_ell", f.a.at(ell)}});
            rec["violations"] = v;
            check_ramanujan(f);
        }
        for (const auto& [ell, e] : factor_integer(f.level)) {
            (void)e;
            if (!f.atkin_lehner.count(ell)) rec["warnings"].push_back("no Atkin-Lehner sign at " + std::to_string(ell));
        }
        if (!rec.contains("warnings")) rec["warnings"] = Json::array();
        CoefficientCache cache(CoefficientCache::resolve_dir(c.cache_dir));
        auto res = cache.store_newform(f);
        rec["fingerprint"] = newform_fingerprint(f);
        rec["stored"] = res.stored;
        rec["replaced"] = res.replaced;
        if (c.field_d != 0) {
            ImagQuadField K(c.field_d);
            BaseChangeForm F(f, K);
            cache.load_coefficients(F);
            int64_t X = std::min<int64_t>(F.max_norm(), 5000);
            for (const auto& m : ideals_up_to_norm(K, X)) F.coefficient(m);
            rec["coefficients_added"] = cache.store_coefficients(F);
            rec["coefficient_norm_bound"] = X;
        }
    } catch (const Error& e) {
        rec["error"] = error_json(e);
        code = exit_code(e.category());
        std::cerr << e.what() << "\n";
    }
    rec["runtime_ms"] = sw.ms();
    out->write(rec);
    return code;
}

void add_common(CLI::App* sub, JobConfig& c, bool chars) {
    sub->add_option("--field", c.field_d, "d with K = Q(sqrt d), class number one")->capture_default_str();
    sub->add_option("--newform", c.newform, "newform data file, or the label of an ingested form");
    if (chars) sub->add_option("--chars", c.chars, "character spec file(s)")->check(CLI::ExistingFile);
    sub->add_option("--prec", c.digits, "working precision in decimal digits")
        ->check(CLI::Range(10u, 2000u))
        ->capture_default_str();
    sub->add_option("--out", c.out, "report file (JSON lines); standard output by default");
    sub->add_option("--cache-dir", c.cache_dir,
                    std::string("coefficient cache directory; overrides ") + CoefficientCache::env_var);
}

void add_numeric(CLI::App* sub, JobConfig& c, bool prime) {
    sub->add_option("--split-point", c.split_point, "split point of the integral");
    sub->add_option("--fricke-sign", c.fricke_sign, "Fricke sign of the base change, overriding Atkin-Lehner data");
    sub->add_option("--tolerance", c.tolerance, "pass threshold for residuals");
    sub->add_option("--jobs", c.jobs, "parallel workers across characters")->check(CLI::Range(1, 256));
    sub->add_flag("--flip-sign", c.flip_sign, "negate the sign in the functional equation (negative control)");
    auto* p = sub->add_option("--prime", c.prime, "rational prime p for p-stabilisation");
    auto* s = sub->add_option("--stabilise", c.stabilise, "root choice (0 or 1) at each prime above p")
                  ->delimiter(',');
    if (prime) p->required();
    s->needs(p);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Twisted L-values of base-change Bianchi forms and their functional equations"};
    app.set_config("--config", "", "read options from a TOML or INI file");
    app.set_version_flag("--version", library_version());
    app.require_subcommand(1);
    JobConfig c;

    auto* ingest = app.add_subcommand("ingest", "validate a newform file and store it in the cache");
    add_common(ingest, c, false);
    ingest->add_option("--bound", c.bound, "require coefficients at every prime up to this bound");
    auto* lvalue = app.add_subcommand("lvalue", "Lambda(F, psi) for each character");
    add_common(lvalue, c, true);
    add_numeric(lvalue, c, false);
    auto* fe = app.add_subcommand("check-fe", "the complex functional equation for each character");
    add_common(fe, c, true);
    add_numeric(fe, c, false);
    auto* stab = app.add_subcommand("stabilise", "p-stabilise and compare the two evaluations of Lambda");
    add_common(stab, c, true);
    add_numeric(stab, c, true);
    auto* padic = app.add_subcommand("check-padic-fe", "the p-adic functional equation for each character");
    add_common(padic, c, true);
    add_numeric(padic, c, true);
    auto* fricke = app.add_subcommand("fricke-sign", "estimate the Fricke sign from the functional equation");
    add_common(fricke, c, true);
    add_numeric(fricke, c, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    c.command = app.get_subcommands().front()->get_name();
    if (c.command == "ingest" && !ingest->count("--field")) c.field_d = 0;
    PrecisionScope prec(c.digits + 10);
    if (c.command == "ingest") return cmd_ingest(c);
    if (c.command == "lvalue") return cmd_lvalue(c);
    if (c.command == "check-fe") return cmd_check_fe(c);
    if (c.command == "stabilise") return cmd_stabilise(c);
    if (c.command == "check-padic-fe") return cmd_check_padic_fe(c);
    return cmd_fricke_sign(c);
}
