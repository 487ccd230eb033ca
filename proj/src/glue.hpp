#pragma once

#include <memory>
#include <vector>

#include "json.hpp"
#include "measure.hpp"
#include "space.hpp"

namespace rzp {

/// Two embedded components joined at a single contact node x0, with a
/// distance-to-contact weight exponent per component. Node order: all of
/// component 1, all of component 2, then x0 last.
struct TwoComponentSpace {
    QuasiMetricSpace space;
    int x0 = -1;
    std::vector<int> part;  // 1, 2, or 0 at the contact node
    double n1 = 0.0, n2 = 0.0;
    double gamma1 = 0.0, gamma2 = 0.0;
    double xi = 0.0;            // gamma1 + n1
    double contact_c = 1.0;     // smallest c with d(x,x0) <= c [d(x,X1)+d(x,X2)], clamped to >= 1
    double contact_c_raw = 0.0; // unclamped node-level scan value
    double s_const = 0.0;       // diam(X1) + diam(X2)
    std::shared_ptr<std::vector<double>> nfield;      // n(x), n1 at x0
    std::shared_ptr<std::vector<double>> gammafield;  // gamma(x), gamma1 at x0
    std::vector<double> dist_x0;
    std::vector<double> quad;  // component quadrature weight, 0 at x0
    AhlforsFit fit1, fit2;
    nlohmann::json spec;

    nlohmann::ordered_json to_json() const;
    static TwoComponentSpace load(const nlohmann::json& serialized);
};

/// Builds the glued space from
///   {"component1": spec, "component2": spec, "offset2": [..],
///    "x0": [..], "gamma1": g1, "gamma2": g2}
/// Components must be embeddable kinds (grid1d/grid2d/cantor); nodes
/// coinciding with x0 are dropped. Rejections: component not Ahlfors
/// n_i-regular within tolerance, components touching away from x0, or a
/// component whose closure misses x0.
TwoComponentSpace build_glued(const nlohmann::json& glue_spec);

/// Weights d(x,x0)^gamma(x) * quadrature(x); zero mass at the contact node.
DiscreteMeasure glued_measure(const TwoComponentSpace& tc);

/// gamma1 + n1 == gamma2 + n2 within 1e-12.
bool admissible(const TwoComponentSpace& tc);

struct BallEstimateReport {
    double k3 = 0.0;
    double c_small = 0.0;
    bool ok = false;
    bool regime3_exact = false;
    std::size_t samples = 0;
    std::size_t violations = 0;  // recheck at the fitted pair
    int worst_node_i = -1;
    double worst_radius_i = 0.0;
    double worst_ratio_i = 0.0;
    int worst_node_ii = -1;
    double worst_radius_ii = 0.0;
    double worst_ratio_ii = 0.0;
    std::vector<std::pair<double, double>> k3_by_c;  // (c, fitted K3)

    nlohmann::ordered_json to_json() const;
};

/// Fits the smallest common two-sided constant K3 and the radius-regime
/// threshold c in {0.1..0.9}:
///   (i)  K3^-1 d^gamma r^n <= mu(B) <= K3 d^gamma r^n   for r < c d(x,x0)
///   (ii) K3^-1 r^xi        <= mu(B) <= K3 r^xi          for c d(x,x0) <= r <= S
///   (iii) mu(B) equals the total mass exactly           for r > S
/// Samples are restricted to r >= 2 * (nearest-node distance) so the lower
/// bounds are probed above the local resolution.
BallEstimateReport verify_ball_estimates(const TwoComponentSpace& tc, const BallOracle& oracle);

/// Smallest K4 with mu(B(x,r)) <= K4 r^n(x) over all canonical samples.
/// With a negative gamma the fit degrades near x0; the report's flagged
/// list carries the witness in that case.
double fit_k4(const TwoComponentSpace& tc, const BallOracle& oracle, RegularityReport* details = nullptr);

/// lambda(x,r) = K4 r^n(x) with K4 fitted on the given glued measure.
DominatingFunction lambda_simplified(const TwoComponentSpace& tc, const BallOracle& oracle);

/// Piecewise bound: K3 r^n(x) d^gamma(x) below the regime switch, K3 r^xi
/// above it; the raw formula can dip at the switch when gamma(x) > 0, so
/// the second branch carries the running maximum of the first.
DominatingFunction lambda_piecewise(const TwoComponentSpace& tc, double k3, double c_small);

nlohmann::json glue_spec_at_level(const nlohmann::json& glue_spec, int target_nodes);

}  // namespace rzp
