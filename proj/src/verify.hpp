#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "glue.hpp"
#include "json.hpp"
#include "lebesgue.hpp"
#include "measure.hpp"
#include "operators.hpp"
#include "space.hpp"
#include "specs.hpp"

namespace rzp {

struct LevelRecord {
    int level = 0;
    int n_nodes = 0;
    double ratio = 0.0;  // headline statistic (sup ratio or leading constant)
    nlohmann::ordered_json constants = nlohmann::ordered_json::object();
    nlohmann::ordered_json witness = nlohmann::ordered_json::object();
};

/// Refinement study result. verdict: "stable" when no tracked quantity
/// grows by more than tau between consecutive levels, "growing" otherwise,
/// "violated" when a pointwise contract broke outright.
struct ExperimentReport {
    std::string kind;
    std::uint64_t seed = 0;
    double tau = 1.1;
    nlohmann::json config;
    std::vector<LevelRecord> levels;
    std::string verdict;
    nlohmann::ordered_json extra = nlohmann::ordered_json::object();

    nlohmann::ordered_json to_json() const;
    std::string to_csv() const;
};

struct VerifyConfig {
    nlohmann::json raw;
    std::string kind;  // hls | hedberg | necessity | maximal
    std::optional<nlohmann::json> space_spec;
    std::optional<nlohmann::json> glue_spec;
    nlohmann::json measure_spec;
    nlohmann::json lambda_spec;  // empty = none given
    double alpha = 0.5;
    double p = 4.0 / 3.0;
    std::optional<double> q_const;
    std::vector<int> levels;
    std::uint64_t seed = 1;
    int family_balls = 20;
    int family_spikes = 10;
    int family_random = 20;
    double tau = 1.1;
    std::vector<double> cluster_weights{1.0, 10.0, 100.0};
    int necessity_samples = 16;

    static VerifyConfig parse(const std::string& kind, const nlohmann::json& j);
};

/// One refinement level, fully materialized. Heap members keep the
/// reference-holding oracle and dominating function stable.
struct LevelContext {
    int level = 0;
    std::unique_ptr<TwoComponentSpace> tc;  // null for plain spaces
    std::unique_ptr<QuasiMetricSpace> plain_space;
    std::unique_ptr<DiscreteMeasure> mu;
    std::unique_ptr<BallOracle> oracle;
    std::unique_ptr<DominatingFunction> lambda;  // null when the run has no lambda

    const QuasiMetricSpace& space() const { return tc ? tc->space : *plain_space; }
};

LevelContext make_level(const VerifyConfig& cfg, int level, bool with_lambda);

/// Seeded test-function family: characteristic functions of sampled balls,
/// truncated distance-power spikes, and uniform random values in [-1, 1].
std::vector<GridFunction> make_family(const LevelContext& ctx, const VerifyConfig& cfg, int level);

// Theorem-level studies. Hypothesis-gate failures throw hypothesis_error
// (never reported as a violated conclusion).
ExperimentReport verify_sufficiency(const VerifyConfig& cfg);
ExperimentReport verify_hedberg(const VerifyConfig& cfg);
ExperimentReport verify_necessity(const VerifyConfig& cfg);
ExperimentReport verify_maximal_bounds(const VerifyConfig& cfg);

ExperimentReport run_verify(const std::string& kind, const nlohmann::json& config);

}  // namespace rzp
