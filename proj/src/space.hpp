#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace rzp {

/// Open ball B(center, radius) = { y : dist(center, y) < radius }.
struct Ball {
    int center = -1;
    double radius = 0.0;
    std::vector<int> members;  // ascending node indices
};

/// Finite quadrature discretization of a bounded quasi-metric space.
///
/// Immutable after construction. Distances are stored as a full symmetric
/// matrix; k1 is the smallest constant with
///     dist(x,y) <= k1 * (dist(x,z) + dist(z,y))
/// over all triples (exhaustive up to 2000 nodes, deterministic triple
/// sample above that, flagged as estimated), and r0 is the diameter.
class QuasiMetricSpace {
  public:
    QuasiMetricSpace() = default;  // empty; assign from a factory before use

    // spec kinds: grid1d | grid2d | cantor | explicit | snowflake
    static QuasiMetricSpace build(const nlohmann::json& spec);
    static QuasiMetricSpace from_distance_matrix(std::vector<double> matrix, int n,
                                                 std::vector<std::string> labels = {});
    /// Euclidean space over explicit ambient points (row-major coords).
    static QuasiMetricSpace from_points(std::vector<double> coords, int dim);

    int size() const { return n_; }
    double dist(int i, int j) const { return dist_[static_cast<std::size_t>(i) * n_ + j]; }
    double k1() const { return k1_; }
    bool k1_estimated() const { return k1_estimated_; }
    double r0() const { return r0_; }
    double min_positive_distance() const { return dmin_; }

    const std::vector<std::string>& labels() const { return labels_; }
    // Ambient coordinates when the space was built from an embedded kind
    // (grid1d/grid2d/cantor); empty for explicit matrices and snowflakes.
    int ambient_dim() const { return coord_dim_; }
    bool has_coords() const { return coord_dim_ > 0; }
    double coord(int i, int d) const { return coords_[static_cast<std::size_t>(i) * coord_dim_ + d]; }

    Ball ball(int center, double radius) const;

    /// Sorted deduplicated pairwise distances merged with the dyadic ladder
    /// {r0 * 2^-j}, capped by quantile subsampling when the distance set is
    /// large. Every sup/inf over r > 0 in this library ranges over this set.
    const std::vector<double>& canonical_radii() const { return radii_; }

    /// Smallest cover count found by a deterministic greedy half-radius
    /// cover over sampled balls; an upper-bound certificate.
    int geometric_doubling_number() const;

    /// Node indices sorted by distance from x, ties broken by index.
    const std::vector<int>& sorted_by_distance(int x) const { return order_[x]; }

    nlohmann::ordered_json to_json() const;   // spec + computed constants
    static QuasiMetricSpace load(const nlohmann::json& serialized);

    const nlohmann::json& spec() const { return spec_; }

  private:
    void finalize();  // validates, computes k1, r0, radii, sort orders

    int n_ = 0;
    std::vector<double> dist_;        // row-major n x n
    std::vector<double> coords_;      // row-major n x coord_dim (may be empty)
    int coord_dim_ = 0;
    std::vector<std::string> labels_;
    double k1_ = 1.0;
    bool k1_estimated_ = false;
    double r0_ = 0.0;
    double dmin_ = 0.0;
    std::vector<double> radii_;
    std::vector<std::vector<int>> order_;
    nlohmann::json spec_;
    mutable int doubling_number_ = -1;  // computed on demand
};

/// Exact maximum of dist(x,y) / (dist(x,z)+dist(z,y)); the minimal valid
/// quasi-triangle constant for the given space (>= 1 by the degenerate
/// z in {x,y} triples). Standalone so tests can cross-check the cached k1.
double quasi_triangle_constant(const QuasiMetricSpace& s);

/// Rescale an embedded spec to a target node count; used by the refinement
/// harness. grid1d: n = target; grid2d: side = round(sqrt(target));
/// cantor: generation = round(log2(target)).
nlohmann::json spec_at_level(const nlohmann::json& spec, int target_nodes);

}  // namespace rzp
