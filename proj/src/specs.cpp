#include "specs.hpp"

#include <cmath>

#include "common.hpp"

namespace rzp {

namespace {

// "name:key=val,key=val" -> {"form"/"kind": name, key: val, ...}; values
// that parse as numbers become numbers, the rest stay strings. A value may
// itself be a nested spec ("lambda=power:K=1,n=1" swallows the tail).
nlohmann::json parse_compact(const std::string& s) {
    nlohmann::json out;
    auto colon = s.find(':');
    out["form"] = s.substr(0, colon);
    if (colon == std::string::npos) return out;
    std::string rest = s.substr(colon + 1);
    std::size_t pos = 0;
    while (pos < rest.size()) {
        auto eq = rest.find('=', pos);
        if (eq == std::string::npos) throw parse_error("malformed spec near '" + rest.substr(pos) + "'");
        std::string key = rest.substr(pos, eq - pos);
        std::string val;
        if (key == "lambda") {
            val = rest.substr(eq + 1);  // nested spec: consume the tail
            pos = rest.size();
        } else {
            auto comma = rest.find(',', eq + 1);
            val = rest.substr(eq + 1, comma == std::string::npos ? std::string::npos : comma - eq - 1);
            pos = comma == std::string::npos ? rest.size() : comma + 1;
        }
        try {
            std::size_t used = 0;
            double num = std::stod(val, &used);
            if (used == val.size()) {
                out[key] = num;
                continue;
            }
        } catch (...) {
        }
        out[key] = val;
    }
    return out;
}

double require_num(const nlohmann::json& j, const char* key, const char* what) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw parse_error(std::string(what) + ": missing numeric field '" + key + "'");
    return j.at(key).get<double>();
}

std::string form_of(const nlohmann::json& j) {
    if (j.contains("form")) return j.at("form").get<std::string>();
    if (j.contains("kind")) return j.at("kind").get<std::string>();
    throw parse_error("spec object needs a 'form' or 'kind' field");
}

}  // namespace

nlohmann::json spec_string_to_json(const std::string& s) {
    std::string t = s;
    // allow JSON text and bare numbers to pass through
    auto first = t.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && (t[first] == '{' || t[first] == '[')) return nlohmann::json::parse(t);
    try {
        std::size_t used = 0;
        double num = std::stod(t, &used);
        if (used == t.size()) return nlohmann::json(num);
    } catch (...) {
    }
    return parse_compact(t);
}

DominatingFunction lambda_from_spec(const nlohmann::json& raw, const QuasiMetricSpace& s, const BallOracle* oracle,
                                    const TwoComponentSpace* tc) {
    nlohmann::json spec = raw.is_string() ? spec_string_to_json(raw.get<std::string>()) : raw;
    const std::string form = form_of(spec);
    std::optional<double> declared;
    if (spec.contains("c_lambda")) declared = spec.at("c_lambda").get<double>();

    if (form == "power") {
        double K = spec.value("K", 1.0);
        double n = require_num(spec, "n", "power lambda");
        return DominatingFunction::power(s, K, n, declared);
    }
    if (form == "power-field") {
        if (!tc) throw precondition_error("power-field lambda needs a two-component space for its n(x) field");
        double K = spec.value("K", 0.0);
        if (K > 0.0) return DominatingFunction::power_field(tc->space, K, *tc->nfield);
        if (!oracle) throw precondition_error("fitted power-field lambda needs a measure");
        return lambda_simplified(*tc, *oracle);
    }
    if (form == "k4") {
        if (!tc || !oracle) throw precondition_error("k4 lambda needs a two-component space and measure");
        return lambda_simplified(*tc, *oracle);
    }
    if (form == "ball-measure") {
        if (!oracle) throw precondition_error("ball-measure lambda needs a measure");
        return DominatingFunction::ball_measure(*oracle);
    }
    if (form == "piecewise") {
        if (!tc) throw precondition_error("piecewise lambda needs a two-component space");
        double k3 = spec.value("k3", 0.0);
        double c = spec.value("c", 0.0);
        if (!(k3 > 0.0) || !(c > 0.0)) {
            if (!oracle) throw precondition_error("fitted piecewise lambda needs a measure");
            BallEstimateReport ber = verify_ball_estimates(*tc, *oracle);
            if (!(k3 > 0.0)) k3 = ber.k3;
            if (!(c > 0.0)) c = ber.c_small;
        }
        return lambda_piecewise(*tc, k3, c);
    }
    if (form == "tabulated") {
        if (!spec.contains("radii") || !spec.contains("values"))
            throw parse_error("tabulated lambda needs 'radii' and 'values' arrays");
        return DominatingFunction::tabulated(s, spec.at("radii").get<std::vector<double>>(),
                                             spec.at("values").get<std::vector<double>>());
    }
    throw parse_error("unknown lambda form '" + form + "'");
}

ParsedKernel kernel_from_spec(const nlohmann::json& raw, const QuasiMetricSpace& s, const BallOracle* oracle,
                              const TwoComponentSpace* tc) {
    nlohmann::json spec = raw.is_string() ? spec_string_to_json(raw.get<std::string>()) : raw;
    const std::string kind = form_of(spec);
    ParsedKernel out;
    if (kind == "general") {
        double alpha = require_num(spec, "alpha", "general kernel");
        if (!spec.contains("lambda")) throw parse_error("general kernel needs a 'lambda' spec");
        out.lambda = std::make_shared<DominatingFunction>(lambda_from_spec(spec.at("lambda"), s, oracle, tc));
        out.spec = KernelSpec::general(alpha, *out.lambda, s);
        return out;
    }
    if (kind == "dimpower") {
        out.spec = KernelSpec::dim_power(require_num(spec, "alpha", "dimpower kernel"),
                                         require_num(spec, "Q", "dimpower kernel"));
        return out;
    }
    if (kind == "oneminus") {
        out.spec = KernelSpec::one_minus(require_num(spec, "gamma", "oneminus kernel"));
        return out;
    }
    if (kind == "measurepower") {
        out.spec = KernelSpec::measure_power(require_num(spec, "gamma", "measurepower kernel"));
        return out;
    }
    if (kind == "jalpha") {
        out.spec = KernelSpec::measure_ratio(require_num(spec, "alpha", "jalpha kernel"));
        return out;
    }
    if (kind == "vardim") {
        if (!tc) throw precondition_error("vardim kernel needs a two-component space for its n(x) field");
        out.spec = KernelSpec::variable_dim(require_num(spec, "alpha", "vardim kernel"), tc->nfield);
        return out;
    }
    throw parse_error("unknown kernel kind '" + kind + "'");
}

ExponentFunction exponent_from_spec(const nlohmann::json& raw, const QuasiMetricSpace& s,
                                    const TwoComponentSpace* tc) {
    if (raw.is_number()) return ExponentFunction::constant(raw.get<double>(), s.size());
    if (raw.is_array()) return ExponentFunction::per_node(raw.get<std::vector<double>>());
    nlohmann::json spec = raw.is_string() ? spec_string_to_json(raw.get<std::string>()) : raw;
    if (spec.is_number()) return ExponentFunction::constant(spec.get<double>(), s.size());
    const std::string form = form_of(spec);
    if (form == "constant") return ExponentFunction::constant(require_num(spec, "p", "constant exponent"), s.size());
    if (form == "hls") {
        double p = require_num(spec, "p", "hls exponent");
        double alpha = require_num(spec, "alpha", "hls exponent");
        if (spec.contains("n"))
            return hls_exponent(p, alpha,
                                std::vector<double>(static_cast<std::size_t>(s.size()), spec.at("n").get<double>()));
        if (!tc) throw precondition_error("hls exponent needs an n(x) field: give 'n' or a two-component space");
        return hls_exponent(p, alpha, *tc->nfield);
    }
    throw parse_error("unknown exponent form '" + form + "'");
}

}  // namespace rzp
