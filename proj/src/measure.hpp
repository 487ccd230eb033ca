#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "space.hpp"

namespace rzp {

/// Nonnegative weight per node; the quadrature stand-in for a Borel measure.
struct DiscreteMeasure {
    std::vector<double> weights;
    double total = 0.0;

    static DiscreteMeasure from_weights(std::vector<double> w);
    // {"kind":"uniform-mass","total":T} | {"kind":"quadrature","scale":s}
    // | {"weights":[...]} | bare array
    static DiscreteMeasure from_spec(const nlohmann::json& spec, const QuasiMetricSpace& s);
};

/// Fast mu(B(x, r)) lookups for a fixed (space, measure) pair via
/// per-node distance-sorted prefix sums. Holds references; both inputs
/// must outlive the oracle.
class BallOracle {
  public:
    BallOracle(const QuasiMetricSpace& s, const DiscreteMeasure& mu);

    const QuasiMetricSpace& space() const { return *space_; }
    const DiscreteMeasure& measure() const { return *mu_; }
    double total() const { return mu_->total; }

    /// Mass of the open ball: sum of weights at distance < r from x.
    /// r > r0 short-circuits to the measure total (same summation order),
    /// so whole-space balls compare bit-exactly against mu.total.
    double ball_mass(int x, double r) const;

    /// out[y] = mu(B(x, dist(x,y))) for every y, tie classes excluded.
    void pair_ball_masses(int x, std::vector<double>& out) const;

  private:
    const QuasiMetricSpace* space_;
    const DiscreteMeasure* mu_;
    std::vector<std::vector<double>> prefix_;  // prefix_[x][k] = mass of k nearest
};

struct LowerType {
    double exponent = 0.0;
    double constant = 1.0;
};

/// Evaluable lambda(x, r): the majorant in the upper-doubling inequality
/// mu(B(x,r)) <= lambda(x,r). Construction verifies, on the canonical
/// radii, that r -> lambda(x,r) is positive and non-decreasing and that a
/// declared doubling constant is not exceeded; declared values are never
/// trusted unverified.
class DominatingFunction {
  public:
    enum class Form { Power, PowerField, BallMeasure, Piecewise, Tabulated };

    Form form() const { return form_; }
    double operator()(int x, double r) const { return eval_(x, r); }
    double doubling_constant() const { return c_lambda_; }
    LowerType lower_type() const { return lower_type_; }
    const std::vector<double>* nfield() const { return nfield_.get(); }
    // (K, n(x)) when the r-section is exactly K * r^n(x)
    std::optional<std::pair<double, double>> power_view(int x) const;
    std::string describe() const { return describe_; }

    static DominatingFunction power(const QuasiMetricSpace& s, double K, double n,
                                    std::optional<double> declared_c_lambda = {});
    static DominatingFunction power_field(const QuasiMetricSpace& s, double K, std::vector<double> nfield);
    static DominatingFunction ball_measure(const BallOracle& oracle);
    /// Arbitrary evaluator with declared constants; used by the glued-space
    /// piecewise form and by tabulated data.
    static DominatingFunction custom(const QuasiMetricSpace& s, Form form, std::function<double(int, double)> eval,
                                     LowerType lt, std::optional<double> declared_c_lambda, std::string describe);
    /// Single r-profile applied at every node, step-interpolated.
    static DominatingFunction tabulated(const QuasiMetricSpace& s, std::vector<double> radii,
                                        std::vector<double> values);

  private:
    DominatingFunction() = default;
    void validate(const QuasiMetricSpace& s, std::optional<double> declared_c_lambda);

    Form form_ = Form::Power;
    std::function<double(int, double)> eval_;
    double c_lambda_ = 1.0;
    LowerType lower_type_;
    double power_K_ = 0.0;  // valid for Power/PowerField
    std::shared_ptr<std::vector<double>> nfield_;
    std::string describe_;
};

struct RegularityReport {
    bool holds = false;
    double best_constant = 0.0;
    int witness_node = -1;
    double witness_radius = 0.0;
    std::size_t samples = 0;
    std::string note;
    std::vector<std::pair<int, double>> flagged;  // secondary witnesses

    nlohmann::ordered_json to_json() const;
};

double ball_measure(const BallOracle& oracle, int x, double r);

/// Natural quadrature cell mass for an embedded space spec: grid spacing
/// (1-D), cell area (2-D), or per-cell mass of the generation-g dust.
double quadrature_cell_size(const nlohmann::json& space_spec);

/// holds iff mu(B(x,r)) <= lambda(x,r) at every (node, canonical radius);
/// best_constant is the sup of the ratio, witness attains it.
RegularityReport check_upper_doubling(const BallOracle& oracle, const DominatingFunction& lam);

/// best_constant = max mu(B(x,2r)) / mu(B(x,r)) over positive-mass balls.
/// Balls of zero mass whose doubled ball has mass are listed in `flagged`
/// (sub-resolution gaps); they poison `holds` only at nodes the measure
/// actually charges.
RegularityReport estimate_doubling_constant(const BallOracle& oracle);

struct AhlforsFit {
    double Q = 0.0;
    double A1 = 1.0;
    double max_abs_residual = 0.0;
    std::size_t samples = 0;
};

/// Least-squares slope of log mu(B(x,r)) against log r, equal weight per
/// (x, r) sample, radii restricted to [lo_factor * dmin, hi_frac * r0] to
/// stay inside the scaling window.
AhlforsFit ahlfors_fit(const BallOracle& oracle, double lo_factor = 2.0, double hi_frac = 0.125);

/// Quasi-decrease of r^alpha / lambda(x, r) over canonical radius pairs;
/// best_constant is the minimal c1, holds iff c1 <= threshold (default:
/// the function's declared lower-type constant).
RegularityReport lower_type_check(const DominatingFunction& lam, const QuasiMetricSpace& s, int x, double alpha,
                                  std::optional<double> threshold = {});

/// Same property probed through lambda(s*t) <= c1 * s^alpha * lambda(t)
/// with s on a fixed grid in (0, 1]; the two scans must agree.
RegularityReport lower_type_direct_scan(const DominatingFunction& lam, const QuasiMetricSpace& s, int x, double alpha,
                                        std::optional<double> threshold = {});

/// Nodes whose own weight exceeds lambda(x, r_min): atoms at the current
/// resolution; must empty out under refinement.
std::vector<std::pair<int, double>> atom_scan(const QuasiMetricSpace& s, const DiscreteMeasure& mu,
                                              const DominatingFunction& lam);

/// Two-sided comparability lambda(x,r) vs lambda(y,r) over sampled pairs
/// with dist(x,y) < r; best_constant is the worst ratio either way.
RegularityReport comparable_center_check(const QuasiMetricSpace& s, const DominatingFunction& lam,
                                         std::size_t max_pairs = 4096);

}  // namespace rzp
