#include "rieszpot.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "common.hpp"
#include "glue.hpp"
#include "json.hpp"
#include "lebesgue.hpp"
#include "measure.hpp"
#include "operators.hpp"
#include "space.hpp"
#include "specs.hpp"
#include "verify.hpp"

struct rzp_space {
    std::shared_ptr<const rzp::QuasiMetricSpace> s;
};

struct rzp_measure {
    std::shared_ptr<const rzp::QuasiMetricSpace> sp;
    std::shared_ptr<const rzp::DiscreteMeasure> mu;
    std::shared_ptr<const rzp::BallOracle> oracle;
};

struct rzp_glued {
    std::shared_ptr<rzp::TwoComponentSpace> tc;
    std::shared_ptr<const rzp::DiscreteMeasure> mu;
    rzp_space space_shell;
    rzp_measure measure_shell;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename Fn>
rzp_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return RZP_OK;
    } catch (const rzp::parse_error& e) {
        set_error(e.what());
        return RZP_ERR_PARSE;
    } catch (const rzp::precondition_error& e) {
        set_error(e.what());
        return RZP_ERR_PRECONDITION;
    } catch (const rzp::hypothesis_error& e) {
        set_error(e.what());
        return RZP_ERR_HYPOTHESIS;
    } catch (const nlohmann::json::exception& e) {
        set_error(e.what());  // nlohmann messages carry byte positions
        return RZP_ERR_PARSE;
    } catch (const std::exception& e) {
        set_error(e.what());
        return RZP_ERR_INTERNAL;
    } catch (...) {
        set_error("unknown internal error");
        return RZP_ERR_INTERNAL;
    }
}

bool bad(const void* p) { return p == nullptr; }

rzp_status invalid(const char* what) {
    set_error(std::string("invalid argument: ") + what);
    return RZP_ERR_INVALID_ARGUMENT;
}

rzp::GridFunction parse_grid_function(const char* f_json, std::size_t n) {
    nlohmann::json j = nlohmann::json::parse(f_json);
    if (j.is_object() && j.contains("values")) j = j.at("values");
    if (!j.is_array()) throw rzp::parse_error("grid function must be a JSON value array");
    if (j.size() != n) throw rzp::parse_error("grid function length does not match the node count");
    return j.get<std::vector<double>>();
}

rzp_measure make_measure(std::shared_ptr<const rzp::QuasiMetricSpace> sp, rzp::DiscreteMeasure mu) {
    rzp_measure m;
    m.sp = sp;
    m.mu = std::make_shared<rzp::DiscreteMeasure>(std::move(mu));
    m.oracle = std::make_shared<rzp::BallOracle>(*m.sp, *m.mu);
    return m;
}

}  // namespace

extern "C" {

const char* rzp_last_error(void) { return g_last_error.c_str(); }

void rzp_string_free(char* s) { std::free(s); }

void rzp_set_threads(int n) { rzp::set_thread_count(n); }

int rzp_threads(void) { return rzp::thread_count(); }

rzp_status rzp_space_build(const char* spec_json, rzp_space** out) {
    if (bad(spec_json) || bad(out)) return invalid("rzp_space_build");
    return guarded([&] {
        auto sp = std::make_shared<rzp::QuasiMetricSpace>(rzp::QuasiMetricSpace::build(nlohmann::json::parse(spec_json)));
        *out = new rzp_space{std::move(sp)};
    });
}

rzp_status rzp_space_load(const char* space_json, rzp_space** out) {
    if (bad(space_json) || bad(out)) return invalid("rzp_space_load");
    return guarded([&] {
        auto sp = std::make_shared<rzp::QuasiMetricSpace>(rzp::QuasiMetricSpace::load(nlohmann::json::parse(space_json)));
        *out = new rzp_space{std::move(sp)};
    });
}

rzp_status rzp_space_save(const rzp_space* s, char** json_out) {
    if (bad(s) || bad(json_out)) return invalid("rzp_space_save");
    return guarded([&] { *json_out = dup_string(s->s->to_json().dump()); });
}

rzp_status rzp_space_info(const rzp_space* s, int with_doubling_number, char** json_out) {
    if (bad(s) || bad(json_out)) return invalid("rzp_space_info");
    return guarded([&] {
        nlohmann::ordered_json j;
        j["n"] = s->s->size();
        j["k1"] = s->s->k1();
        j["k1_estimated"] = s->s->k1_estimated();
        j["r0"] = s->s->r0();
        if (with_doubling_number) j["doubling_number"] = s->s->geometric_doubling_number();
        *json_out = dup_string(j.dump());
    });
}

size_t rzp_space_size(const rzp_space* s) { return s ? static_cast<size_t>(s->s->size()) : 0; }

void rzp_space_free(rzp_space* s) { delete s; }

rzp_status rzp_measure_load(const rzp_space* s, const char* measure_json, rzp_measure** out) {
    if (bad(s) || bad(measure_json) || bad(out)) return invalid("rzp_measure_load");
    return guarded([&] {
        rzp::DiscreteMeasure mu = rzp::DiscreteMeasure::from_spec(nlohmann::json::parse(measure_json), *s->s);
        *out = new rzp_measure(make_measure(s->s, std::move(mu)));
    });
}

void rzp_measure_free(rzp_measure* m) { delete m; }

rzp_status rzp_measure_check(const rzp_space* s, const rzp_measure* m, const char* lambda_spec, char** report_json) {
    if (bad(s) || bad(m) || bad(lambda_spec) || bad(report_json)) return invalid("rzp_measure_check");
    return guarded([&] {
        rzp::DominatingFunction lam =
            rzp::lambda_from_spec(rzp::spec_string_to_json(lambda_spec), *s->s, m->oracle.get(), nullptr);
        rzp::RegularityReport rep = rzp::check_upper_doubling(*m->oracle, lam);
        *report_json = dup_string(rep.to_json().dump());
    });
}

rzp_status rzp_glued_build(const char* glue_spec_json, rzp_glued** out) {
    if (bad(glue_spec_json) || bad(out)) return invalid("rzp_glued_build");
    return guarded([&] {
        auto g = std::make_unique<rzp_glued>();
        g->tc = std::make_shared<rzp::TwoComponentSpace>(rzp::build_glued(nlohmann::json::parse(glue_spec_json)));
        g->mu = std::make_shared<rzp::DiscreteMeasure>(rzp::glued_measure(*g->tc));
        g->space_shell.s = std::shared_ptr<const rzp::QuasiMetricSpace>(g->tc, &g->tc->space);
        g->measure_shell.sp = g->space_shell.s;
        g->measure_shell.mu = g->mu;
        g->measure_shell.oracle = std::make_shared<rzp::BallOracle>(*g->space_shell.s, *g->mu);
        *out = g.release();
    });
}

rzp_status rzp_glued_load(const char* bundle_json, rzp_glued** out) {
    if (bad(bundle_json) || bad(out)) return invalid("rzp_glued_load");
    return guarded([&] {
        nlohmann::json j = nlohmann::json::parse(bundle_json);
        nlohmann::json spec = (j.is_object() && j.contains("glue_spec")) ? j.at("glue_spec") : j;
        rzp_glued* g = nullptr;
        std::string text = spec.dump();
        rzp_status st = rzp_glued_build(text.c_str(), &g);
        if (st != RZP_OK) throw rzp::parse_error(g_last_error);
        *out = g;
    });
}

rzp_status rzp_glued_save(const rzp_glued* g, char** json_out) {
    if (bad(g) || bad(json_out)) return invalid("rzp_glued_save");
    return guarded([&] { *json_out = dup_string(g->tc->to_json().dump()); });
}

rzp_status rzp_glued_verify_balls(const rzp_glued* g, char** report_json) {
    if (bad(g) || bad(report_json)) return invalid("rzp_glued_verify_balls");
    return guarded([&] {
        rzp::BallEstimateReport rep = rzp::verify_ball_estimates(*g->tc, *g->measure_shell.oracle);
        *report_json = dup_string(rep.to_json().dump());
    });
}

const rzp_space* rzp_glued_space(const rzp_glued* g) { return g ? &g->space_shell : nullptr; }

const rzp_measure* rzp_glued_measure(const rzp_glued* g) { return g ? &g->measure_shell : nullptr; }

void rzp_glued_free(rzp_glued* g) { delete g; }

rzp_status rzp_op_apply(const rzp_space* s, const rzp_measure* m, const rzp_glued* glue_or_null,
                        const char* kernel_spec, const char* f_json, char** out_json) {
    const rzp_space* sp = glue_or_null ? rzp_glued_space(glue_or_null) : s;
    const rzp_measure* mp = glue_or_null ? rzp_glued_measure(glue_or_null) : m;
    if (bad(sp) || bad(mp) || bad(kernel_spec) || bad(f_json) || bad(out_json)) return invalid("rzp_op_apply");
    return guarded([&] {
        rzp::ParsedKernel pk = rzp::kernel_from_spec(rzp::spec_string_to_json(kernel_spec), *sp->s, mp->oracle.get(),
                                                     glue_or_null ? glue_or_null->tc.get() : nullptr);
        rzp::GridFunction f = parse_grid_function(f_json, static_cast<std::size_t>(sp->s->size()));
        rzp::GridFunction img = rzp::potential(*mp->oracle, pk.spec, f);
        *out_json = dup_string(nlohmann::json(img).dump());
    });
}

rzp_status rzp_norm_eval(const rzp_space* s, const rzp_measure* m, const rzp_glued* glue_or_null,
                         const char* exponent_spec, const char* f_json, char** out_json) {
    const rzp_space* sp = glue_or_null ? rzp_glued_space(glue_or_null) : s;
    const rzp_measure* mp = glue_or_null ? rzp_glued_measure(glue_or_null) : m;
    if (bad(sp) || bad(mp) || bad(exponent_spec) || bad(f_json) || bad(out_json)) return invalid("rzp_norm_eval");
    return guarded([&] {
        rzp::ExponentFunction p = rzp::exponent_from_spec(rzp::spec_string_to_json(exponent_spec), *sp->s,
                                                          glue_or_null ? glue_or_null->tc.get() : nullptr);
        rzp::GridFunction f = parse_grid_function(f_json, static_cast<std::size_t>(sp->s->size()));
        nlohmann::ordered_json j;
        j["modular"] = rzp::modular(*mp->mu, p, f);
        j["norm"] = rzp::luxemburg_norm(*mp->mu, p, f);
        *out_json = dup_string(j.dump());
    });
}

rzp_status rzp_verify_run(const char* kind, const char* config_json, char** report_json, char** csv_out) {
    if (bad(kind) || bad(config_json) || bad(report_json)) return invalid("rzp_verify_run");
    return guarded([&] {
        rzp::ExperimentReport rep = rzp::run_verify(kind, nlohmann::json::parse(config_json));
        *report_json = dup_string(rep.to_json().dump(2) + "\n");
        if (csv_out) *csv_out = dup_string(rep.to_csv());
    });
}

rzp_status rzp_plan(const char* subcommand, const char* request_json, char** plan_json) {
    if (bad(subcommand) || bad(request_json) || bad(plan_json)) return invalid("rzp_plan");
    return guarded([&] {
        nlohmann::json req = nlohmann::json::parse(request_json);
        nlohmann::ordered_json plan;
        plan["subcommand"] = subcommand;
        plan["request"] = req;
        std::string sub(subcommand);
        if (sub.rfind("verify", 0) == 0 && req.contains("config")) {
            std::string kind = sub.size() > 7 ? sub.substr(7) : "";
            rzp::VerifyConfig cfg = rzp::VerifyConfig::parse(kind, req.at("config"));
            nlohmann::ordered_json resolved;
            resolved["kind"] = cfg.kind;
            resolved["levels"] = cfg.levels;
            resolved["seed"] = cfg.seed;
            resolved["tau"] = cfg.tau;
            resolved["alpha"] = cfg.alpha;
            resolved["p"] = cfg.p;
            resolved["family"] = {{"balls", cfg.family_balls}, {"spikes", cfg.family_spikes}, {"random", cfg.family_random}};
            plan["resolved"] = resolved;
        }
        plan["threads"] = rzp::thread_count();
        plan["ok"] = true;
        *plan_json = dup_string(plan.dump(2) + "\n");
    });
}

}  // extern "C"
