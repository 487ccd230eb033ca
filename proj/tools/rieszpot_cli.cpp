// Command-line front door. All computation goes through the shared
// library's C interface (rieszpot.h); this file only handles argument
// parsing, file IO, and the exit-code contract:
//   0 success, 2 hypothesis/precondition/parse failure, 1 internal error.
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "rieszpot.h"

namespace {

struct Global {
    int threads = 0;
    std::int64_t seed = -1;  // -1: keep the config's seed
    bool dry_run = false;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << text;
}

std::string resolve(const std::string& path) {
    if (path.empty()) return path;
    return std::filesystem::absolute(path).string();
}

int status_to_exit(rzp_status st) {
    if (st == RZP_OK) return 0;
    if (st == RZP_ERR_PARSE || st == RZP_ERR_PRECONDITION || st == RZP_ERR_HYPOTHESIS) return 2;
    return 1;
}

int fail(rzp_status st) {
    const char* code = "internal";
    if (st == RZP_ERR_PARSE) code = "parse";
    if (st == RZP_ERR_PRECONDITION) code = "precondition";
    if (st == RZP_ERR_HYPOTHESIS) code = "hypothesis";
    nlohmann::ordered_json err;
    err["error"] = {{"code", code}, {"reason", rzp_last_error()}};
    std::cerr << err.dump() << "\n";
    return status_to_exit(st);
}

struct OwnedString {
    char* p = nullptr;
    ~OwnedString() { rzp_string_free(p); }
    std::string str() const { return p ? std::string(p) : std::string(); }
};

int print_plan(const std::string& subcommand, const nlohmann::ordered_json& request) {
    OwnedString plan;
    rzp_status st = rzp_plan(subcommand.c_str(), request.dump().c_str(), &plan.p);
    if (st != RZP_OK) return fail(st);
    std::cout << plan.str();
    return 0;
}

using SpaceHandle = std::unique_ptr<rzp_space, decltype(&rzp_space_free)>;
using MeasureHandle = std::unique_ptr<rzp_measure, decltype(&rzp_measure_free)>;
using GluedHandle = std::unique_ptr<rzp_glued, decltype(&rzp_glued_free)>;

int do_space_build(const Global& g, const std::string& spec_path, const std::string& out_path) {
    if (g.dry_run)
        return print_plan("space-build", {{"spec", resolve(spec_path)}, {"out", resolve(out_path)}});
    rzp_space* s = nullptr;
    rzp_status st = rzp_space_build(read_file(spec_path).c_str(), &s);
    if (st != RZP_OK) return fail(st);
    SpaceHandle holder(s, &rzp_space_free);
    OwnedString text;
    st = rzp_space_save(s, &text.p);
    if (st != RZP_OK) return fail(st);
    write_file(out_path, text.str() + "\n");
    return 0;
}

int do_space_info(const Global& g, const std::string& in_path) {
    if (g.dry_run) return print_plan("space-info", {{"in", resolve(in_path)}});
    rzp_space* s = nullptr;
    rzp_status st = rzp_space_load(read_file(in_path).c_str(), &s);
    if (st != RZP_OK) return fail(st);
    SpaceHandle holder(s, &rzp_space_free);
    OwnedString info;
    st = rzp_space_info(s, 1, &info.p);
    if (st != RZP_OK) return fail(st);
    std::cout << info.str() << "\n";
    return 0;
}

int do_measure_check(const Global& g, const std::string& space_path, const std::string& measure_path,
                     const std::string& lambda_spec, const std::string& report_path) {
    if (g.dry_run)
        return print_plan("measure-check", {{"space", resolve(space_path)},
                                            {"measure", resolve(measure_path)},
                                            {"lambda", lambda_spec},
                                            {"report", resolve(report_path)}});
    rzp_space* s = nullptr;
    rzp_status st = rzp_space_load(read_file(space_path).c_str(), &s);
    if (st != RZP_OK) return fail(st);
    SpaceHandle sh(s, &rzp_space_free);
    rzp_measure* m = nullptr;
    st = rzp_measure_load(s, read_file(measure_path).c_str(), &m);
    if (st != RZP_OK) return fail(st);
    MeasureHandle mh(m, &rzp_measure_free);
    OwnedString report;
    st = rzp_measure_check(s, m, lambda_spec.c_str(), &report.p);
    if (st != RZP_OK) return fail(st);
    if (!report_path.empty()) write_file(report_path, report.str() + "\n");
    std::cout << report.str() << "\n";
    return 0;
}

int do_glue_build(const Global& g, const std::string& spec_path, const std::string& out_path) {
    if (g.dry_run) return print_plan("glue-build", {{"spec", resolve(spec_path)}, {"out", resolve(out_path)}});
    rzp_glued* glue = nullptr;
    rzp_status st = rzp_glued_build(read_file(spec_path).c_str(), &glue);
    if (st != RZP_OK) return fail(st);
    GluedHandle holder(glue, &rzp_glued_free);
    OwnedString text;
    st = rzp_glued_save(glue, &text.p);
    if (st != RZP_OK) return fail(st);
    write_file(out_path, text.str() + "\n");
    std::cout << text.str() << "\n";
    return 0;
}

int do_glue_verify_balls(const Global& g, const std::string& in_path, const std::string& report_path) {
    if (g.dry_run)
        return print_plan("glue-verify-balls", {{"in", resolve(in_path)}, {"report", resolve(report_path)}});
    rzp_glued* glue = nullptr;
    rzp_status st = rzp_glued_load(read_file(in_path).c_str(), &glue);
    if (st != RZP_OK) return fail(st);
    GluedHandle holder(glue, &rzp_glued_free);
    OwnedString report;
    st = rzp_glued_verify_balls(glue, &report.p);
    if (st != RZP_OK) return fail(st);
    if (!report_path.empty()) write_file(report_path, report.str() + "\n");
    std::cout << report.str() << "\n";
    return 0;
}

int do_op_apply(const Global& g, const std::string& space_path, const std::string& glue_path,
                const std::string& measure_path, const std::string& kernel_spec, const std::string& f_path,
                const std::string& out_path) {
    if (g.dry_run)
        return print_plan("op-apply", {{"space", resolve(space_path)},
                                       {"glue", resolve(glue_path)},
                                       {"measure", resolve(measure_path)},
                                       {"kernel", kernel_spec},
                                       {"f", resolve(f_path)},
                                       {"out", resolve(out_path)}});
    GluedHandle gh(nullptr, &rzp_glued_free);
    SpaceHandle sh(nullptr, &rzp_space_free);
    MeasureHandle mh(nullptr, &rzp_measure_free);
    rzp_status st;
    if (!glue_path.empty()) {
        rzp_glued* glue = nullptr;
        st = rzp_glued_load(read_file(glue_path).c_str(), &glue);
        if (st != RZP_OK) return fail(st);
        gh.reset(glue);
    } else {
        rzp_space* s = nullptr;
        st = rzp_space_load(read_file(space_path).c_str(), &s);
        if (st != RZP_OK) return fail(st);
        sh.reset(s);
        rzp_measure* m = nullptr;
        st = rzp_measure_load(s, read_file(measure_path).c_str(), &m);
        if (st != RZP_OK) return fail(st);
        mh.reset(m);
    }
    OwnedString out;
    st = rzp_op_apply(sh.get(), mh.get(), gh.get(), kernel_spec.c_str(), read_file(f_path).c_str(), &out.p);
    if (st != RZP_OK) return fail(st);
    write_file(out_path, out.str() + "\n");
    return 0;
}

int do_norm(const Global& g, const std::string& space_path, const std::string& glue_path,
            const std::string& measure_path, const std::string& p_spec, const std::string& f_path) {
    if (g.dry_run)
        return print_plan("norm", {{"space", resolve(space_path)},
                                   {"glue", resolve(glue_path)},
                                   {"measure", resolve(measure_path)},
                                   {"p", p_spec},
                                   {"f", resolve(f_path)}});
    GluedHandle gh(nullptr, &rzp_glued_free);
    SpaceHandle sh(nullptr, &rzp_space_free);
    MeasureHandle mh(nullptr, &rzp_measure_free);
    rzp_status st;
    if (!glue_path.empty()) {
        rzp_glued* glue = nullptr;
        st = rzp_glued_load(read_file(glue_path).c_str(), &glue);
        if (st != RZP_OK) return fail(st);
        gh.reset(glue);
    } else {
        rzp_space* s = nullptr;
        st = rzp_space_load(read_file(space_path).c_str(), &s);
        if (st != RZP_OK) return fail(st);
        sh.reset(s);
        rzp_measure* m = nullptr;
        st = rzp_measure_load(s, read_file(measure_path).c_str(), &m);
        if (st != RZP_OK) return fail(st);
        mh.reset(m);
    }
    OwnedString out;
    st = rzp_norm_eval(sh.get(), mh.get(), gh.get(), p_spec.c_str(), read_file(f_path).c_str(), &out.p);
    if (st != RZP_OK) return fail(st);
    std::cout << out.str() << "\n";
    return 0;
}

int do_verify(const Global& g, const std::string& kind, const std::string& config_path,
              const std::string& report_path, const std::string& csv_path) {
    std::string config_text = read_file(config_path);
    if (g.seed >= 0) {
        nlohmann::json cfg = nlohmann::json::parse(config_text);
        cfg["seed"] = static_cast<std::uint64_t>(g.seed);
        config_text = cfg.dump();
    }
    if (g.dry_run) {
        nlohmann::ordered_json req;
        req["config"] = nlohmann::json::parse(config_text);
        req["report"] = resolve(report_path);
        req["csv"] = resolve(csv_path);
        return print_plan("verify-" + kind, req);
    }
    OwnedString report, csv;
    rzp_status st = rzp_verify_run(kind.c_str(), config_text.c_str(), &report.p, &csv.p);
    if (st != RZP_OK) return fail(st);
    if (!report_path.empty()) write_file(report_path, report.str());
    if (!csv_path.empty()) write_file(csv_path, csv.str());
    std::cout << report.str();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"potential-type operators on discretized quasi-metric measure spaces"};
    app.require_subcommand(1);
    app.fallthrough();
    Global g;
    app.add_option("--threads", g.threads, "worker threads (0 = hardware default)");
    app.add_option("--seed", g.seed, "override the config seed");
    app.add_flag("--dry-run", g.dry_run, "print the resolved plan without computing");

    std::string spec_path, out_path, in_path, space_path, measure_path, glue_path, f_path;
    std::string lambda_spec, kernel_spec, p_spec, config_path, report_path, csv_path;

    CLI::App* space = app.add_subcommand("space", "build and inspect spaces");
    CLI::App* space_build = space->add_subcommand("build", "construct a space from a spec");
    space_build->add_option("--spec", spec_path, "space spec JSON file")->required();
    space_build->add_option("--out", out_path, "output space file")->required();
    CLI::App* space_info = space->add_subcommand("info", "print n, k1, r0, doubling number");
    space_info->add_option("--in", in_path, "space file")->required();

    CLI::App* measure = app.add_subcommand("measure", "measure checks");
    CLI::App* measure_check = measure->add_subcommand("check", "upper-doubling check against a lambda spec");
    measure_check->add_option("--space", space_path)->required();
    measure_check->add_option("--measure", measure_path)->required();
    measure_check->add_option("--lambda", lambda_spec)->required();
    measure_check->add_option("--report", report_path);

    CLI::App* glue = app.add_subcommand("glue", "two-component glued spaces");
    CLI::App* glue_build = glue->add_subcommand("build", "construct a glued space");
    glue_build->add_option("--spec", spec_path)->required();
    glue_build->add_option("--out", out_path)->required();
    CLI::App* glue_vb = glue->add_subcommand("verify-balls", "two-sided ball-mass estimates");
    glue_vb->add_option("--in", in_path)->required();
    glue_vb->add_option("--report", report_path);

    CLI::App* op = app.add_subcommand("op", "apply operators");
    CLI::App* op_apply = op->add_subcommand("apply", "apply a potential kernel to a grid function");
    op_apply->add_option("--space", space_path);
    op_apply->add_option("--glue", glue_path);
    op_apply->add_option("--measure", measure_path);
    op_apply->add_option("--kernel", kernel_spec)->required();
    op_apply->add_option("--f", f_path)->required();
    op_apply->add_option("--out", out_path)->required();

    CLI::App* norm = app.add_subcommand("norm", "modular and Luxemburg norm of a grid function");
    norm->add_option("--space", space_path);
    norm->add_option("--glue", glue_path);
    norm->add_option("--measure", measure_path);
    norm->add_option("--p", p_spec)->required();
    norm->add_option("--f", f_path)->required();

    CLI::App* verify = app.add_subcommand("verify", "theorem-level refinement studies");
    std::string verify_kind;
    for (const char* kind : {"hls", "hedberg", "necessity", "maximal"}) {
        CLI::App* sub = verify->add_subcommand(kind);
        sub->add_option("--config", config_path)->required();
        sub->add_option("--report", report_path);
        sub->add_option("--csv", csv_path);
        sub->callback([&verify_kind, kind] { verify_kind = kind; });
    }
    verify->require_subcommand(1);

    CLI11_PARSE(app, argc, argv);
    rzp_set_threads(g.threads);

    try {
        if (space_build->parsed()) return do_space_build(g, spec_path, out_path);
        if (space_info->parsed()) return do_space_info(g, in_path);
        if (measure_check->parsed()) return do_measure_check(g, space_path, measure_path, lambda_spec, report_path);
        if (glue_build->parsed()) return do_glue_build(g, spec_path, out_path);
        if (glue_vb->parsed()) return do_glue_verify_balls(g, in_path, report_path);
        if (op_apply->parsed()) return do_op_apply(g, space_path, glue_path, measure_path, kernel_spec, f_path, out_path);
        if (norm->parsed()) return do_norm(g, space_path, glue_path, measure_path, p_spec, f_path);
        if (verify->parsed()) return do_verify(g, verify_kind, config_path, report_path, csv_path);
    } catch (const nlohmann::json::exception& e) {
        nlohmann::ordered_json err;
        err["error"] = {{"code", "parse"}, {"reason", e.what()}};
        std::cerr << err.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        nlohmann::ordered_json err;
        err["error"] = {{"code", "io"}, {"reason", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}
