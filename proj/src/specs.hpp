#pragma once

#include <memory>
#include <string>

#include "glue.hpp"
#include "json.hpp"
#include "lebesgue.hpp"
#include "measure.hpp"
#include "operators.hpp"
#include "space.hpp"

namespace rzp {

/// Mini-language for dominating functions, kernels, and exponents. Specs
/// are either JSON objects or compact strings:
///   lambda: "power:K=1,n=1" | "power-field:K=2" | "k4" | "ball-measure"
///           | "piecewise" | "piecewise:k3=2,c=0.5"
///   kernel: "general:alpha=0.5,lambda=power:K=1,n=1" | "dimpower:alpha=0.5,Q=1"
///           | "oneminus:gamma=0.5" | "measurepower:gamma=0.5"
///           | "jalpha:alpha=0.5" | "vardim:alpha=0.5"
///   exponent: "2.0" | "hls:p=1.5,alpha=0.5[,n=1]" | per-node JSON array
/// Forms that need the n(x) field or fitted glue constants require a
/// two-component context.
nlohmann::json spec_string_to_json(const std::string& s);

DominatingFunction lambda_from_spec(const nlohmann::json& spec, const QuasiMetricSpace& s, const BallOracle* oracle,
                                    const TwoComponentSpace* tc);

struct ParsedKernel {
    KernelSpec spec;
    std::shared_ptr<DominatingFunction> lambda;  // owns the general kernel's lambda
};

ParsedKernel kernel_from_spec(const nlohmann::json& spec, const QuasiMetricSpace& s, const BallOracle* oracle,
                              const TwoComponentSpace* tc);

ExponentFunction exponent_from_spec(const nlohmann::json& spec, const QuasiMetricSpace& s,
                                    const TwoComponentSpace* tc);

}  // namespace rzp
