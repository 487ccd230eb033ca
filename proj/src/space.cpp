#include "space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "common.hpp"

namespace rzp {

namespace {

constexpr int kExactK1Limit = 2000;      // above this, sample triples
constexpr std::size_t kRadiiCap = 4096;  // quantile-subsample beyond this

double json_num(const nlohmann::json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw parse_error(std::string("field '") + key + "' must be a number");
    return j.at(key).get<double>();
}

int json_int(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number_integer())
        throw parse_error(std::string("missing integer field '") + key + "'");
    return j.at(key).get<int>();
}

std::vector<double> json_offset(const nlohmann::json& j, int dim) {
    std::vector<double> off(static_cast<std::size_t>(dim), 0.0);
    if (j.contains("origin")) {
        auto& o = j.at("origin");
        if (!o.is_array()) throw parse_error("'origin' must be an array of coordinates");
        for (std::size_t d = 0; d < o.size() && d < off.size(); ++d) off[d] = o[d].get<double>();
    }
    return off;
}

struct PointCloud {
    std::vector<double> coords;  // row-major n x dim
    int dim = 0;
    int n = 0;
};

PointCloud grid1d_points(const nlohmann::json& spec) {
    int n = json_int(spec, "n");
    if (n < 1) throw parse_error("grid1d: n must be >= 1");
    double length = json_num(spec, "length", 1.0);
    auto off = json_offset(spec, 2);
    PointCloud pc;
    pc.dim = 2;
    pc.n = n;
    pc.coords.resize(static_cast<std::size_t>(n) * 2);
    for (int i = 0; i < n; ++i) {
        double t = (n == 1) ? 0.0 : length * static_cast<double>(i) / static_cast<double>(n - 1);
        pc.coords[2 * static_cast<std::size_t>(i)] = off[0] + t;
        pc.coords[2 * static_cast<std::size_t>(i) + 1] = off[1];
    }
    return pc;
}

PointCloud grid2d_points(const nlohmann::json& spec) {
    int side;
    if (spec.contains("side"))
        side = json_int(spec, "side");
    else
        side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(json_int(spec, "n")))));
    if (side < 1) throw parse_error("grid2d: side must be >= 1");
    double length = json_num(spec, "length", 1.0);
    auto off = json_offset(spec, 2);
    PointCloud pc;
    pc.dim = 2;
    pc.n = side * side;
    pc.coords.resize(static_cast<std::size_t>(pc.n) * 2);
    std::size_t k = 0;
    for (int i = 0; i < side; ++i)
        for (int j = 0; j < side; ++j) {
            double x = (side == 1) ? 0.0 : length * static_cast<double>(i) / static_cast<double>(side - 1);
            double y = (side == 1) ? 0.0 : length * static_cast<double>(j) / static_cast<double>(side - 1);
            pc.coords[k++] = off[0] + x;
            pc.coords[k++] = off[1] + y;
        }
    return pc;
}

// Left endpoints of the generation-g middle-thirds construction: base-3
// expansions with digits in {0, 2}.
PointCloud cantor_points(const nlohmann::json& spec) {
    int g = json_int(spec, "generation");
    if (g < 0 || g > 20) throw parse_error("cantor: generation must be in [0, 20]");
    double length = json_num(spec, "length", 1.0);
    auto off = json_offset(spec, 2);
    PointCloud pc;
    pc.dim = 2;
    pc.n = 1 << g;
    pc.coords.resize(static_cast<std::size_t>(pc.n) * 2);
    for (int m = 0; m < pc.n; ++m) {
        double t = 0.0;
        double p3 = 1.0;
        for (int b = g - 1; b >= 0; --b) {
            p3 /= 3.0;
            if ((m >> b) & 1) t += 2.0 * p3;
        }
        pc.coords[2 * static_cast<std::size_t>(m)] = off[0] + length * t;
        pc.coords[2 * static_cast<std::size_t>(m) + 1] = off[1];
    }
    return pc;
}

PointCloud embedded_points(const nlohmann::json& spec) {
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "grid1d") return grid1d_points(spec);
    if (kind == "grid2d") return grid2d_points(spec);
    if (kind == "cantor") return cantor_points(spec);
    throw parse_error("spec kind '" + kind + "' has no ambient embedding");
}

std::vector<double> pairwise_distances(const PointCloud& pc) {
    std::vector<double> d(static_cast<std::size_t>(pc.n) * pc.n, 0.0);
    for (int i = 0; i < pc.n; ++i)
        for (int j = i + 1; j < pc.n; ++j) {
            double s = 0.0;
            for (int k = 0; k < pc.dim; ++k) {
                double t = pc.coords[static_cast<std::size_t>(i) * pc.dim + k] -
                           pc.coords[static_cast<std::size_t>(j) * pc.dim + k];
                s += t * t;
            }
            double v = std::sqrt(s);
            d[static_cast<std::size_t>(i) * pc.n + j] = v;
            d[static_cast<std::size_t>(j) * pc.n + i] = v;
        }
    return d;
}

}  // namespace

QuasiMetricSpace QuasiMetricSpace::from_distance_matrix(std::vector<double> matrix, int n,
                                                        std::vector<std::string> labels) {
    if (n < 1) throw parse_error("space must have at least one node");
    if (matrix.size() != static_cast<std::size_t>(n) * n) throw parse_error("distance matrix size mismatch");
    QuasiMetricSpace s;
    s.n_ = n;
    s.dist_ = std::move(matrix);
    s.labels_ = std::move(labels);
    s.spec_ = nlohmann::json{{"kind", "explicit"}, {"n", n}};
    s.finalize();
    return s;
}

QuasiMetricSpace QuasiMetricSpace::from_points(std::vector<double> coords, int dim) {
    if (dim < 1 || coords.empty() || coords.size() % static_cast<std::size_t>(dim) != 0)
        throw parse_error("from_points: coords must hold n*dim values");
    PointCloud pc;
    pc.dim = dim;
    pc.n = static_cast<int>(coords.size() / static_cast<std::size_t>(dim));
    pc.coords = std::move(coords);
    QuasiMetricSpace s;
    s.n_ = pc.n;
    s.dist_ = pairwise_distances(pc);
    s.coords_ = std::move(pc.coords);
    s.coord_dim_ = dim;
    s.spec_ = nlohmann::json{{"kind", "points"}, {"n", s.n_}};
    s.finalize();
    return s;
}

QuasiMetricSpace QuasiMetricSpace::build(const nlohmann::json& spec) {
    if (!spec.is_object() || !spec.contains("kind"))
        throw parse_error("space spec must be an object with a 'kind' field");
    const std::string kind = spec.at("kind").get<std::string>();
    QuasiMetricSpace s;
    s.spec_ = spec;
    if (kind == "grid1d" || kind == "grid2d" || kind == "cantor") {
        PointCloud pc = embedded_points(spec);
        s.n_ = pc.n;
        s.dist_ = pairwise_distances(pc);
        s.coords_ = std::move(pc.coords);
        s.coord_dim_ = pc.dim;
    } else if (kind == "explicit") {
        int n = json_int(spec, "n");
        if (!spec.contains("matrix") || !spec.at("matrix").is_array())
            throw parse_error("explicit spec: missing row-major 'matrix' array");
        auto& m = spec.at("matrix");
        if (m.size() != static_cast<std::size_t>(n) * n)
            throw parse_error("explicit spec: matrix must hold n*n entries row-major");
        s.n_ = n;
        s.dist_.resize(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) s.dist_[i] = m[i].get<double>();
        if (spec.contains("ids")) {
            for (auto& id : spec.at("ids")) s.labels_.push_back(id.get<std::string>());
            if (s.labels_.size() != static_cast<std::size_t>(n))
                throw parse_error("explicit spec: ids length must match n");
        }
    } else if (kind == "snowflake") {
        double theta = json_num(spec, "theta", 0.0);
        if (!(theta > 0.0 && theta <= 1.0)) throw parse_error("snowflake: theta must be in (0, 1]");
        if (!spec.contains("base")) throw parse_error("snowflake: missing 'base' spec");
        QuasiMetricSpace base = build(spec.at("base"));
        s.n_ = base.n_;
        s.dist_.resize(base.dist_.size());
        for (std::size_t i = 0; i < base.dist_.size(); ++i) s.dist_[i] = std::pow(base.dist_[i], theta);
        s.labels_ = base.labels_;
    } else {
        throw parse_error("unknown space kind '" + kind + "'");
    }
    s.finalize();
    return s;
}

void QuasiMetricSpace::finalize() {
    const int n = n_;
    // symmetry / identity validation
    dmin_ = std::numeric_limits<double>::infinity();
    r0_ = 0.0;
    for (int i = 0; i < n; ++i) {
        if (dist(i, i) != 0.0) throw precondition_error("dist(x,x) must be 0");
        for (int j = i + 1; j < n; ++j) {
            double dij = dist(i, j);
            if (!std::isfinite(dij) || dij < 0.0) throw precondition_error("distances must be finite and nonnegative");
            if (dij != dist(j, i)) throw precondition_error("distance matrix must be symmetric");
            if (dij == 0.0) throw precondition_error("duplicate points: zero distance between distinct nodes");
            dmin_ = std::min(dmin_, dij);
            r0_ = std::max(r0_, dij);
        }
    }
    if (n == 1) dmin_ = 0.0;

    // quasi-triangle constant
    if (n <= 2) {
        k1_ = 1.0;
        k1_estimated_ = false;
    } else if (n <= kExactK1Limit) {
        k1_ = quasi_triangle_constant(*this);
        k1_estimated_ = false;
    } else {
        // deterministic pair sample: strided node subset for (x, y), all z
        int stride = (n + 255) / 256;
        std::vector<int> sample;
        for (int i = 0; i < n; i += stride) sample.push_back(i);
        std::vector<double> partial(sample.size(), 1.0);
        parallel_for(sample.size(), [&](std::size_t lo, std::size_t hi) {
            for (std::size_t a = lo; a < hi; ++a) {
                int x = sample[a];
                double best = 1.0;
                for (int y : sample) {
                    if (y == x) continue;
                    double dxy = dist(x, y);
                    double minsum = dxy;  // z = x degenerate triple
                    for (int z = 0; z < n; ++z) {
                        double s = dist(x, z) + dist(z, y);
                        if (s < minsum) minsum = s;
                    }
                    best = std::max(best, dxy / minsum);
                }
                partial[a] = best;
            }
        });
        k1_ = 1.0;
        for (double v : partial) k1_ = std::max(k1_, v);
        k1_estimated_ = true;
    }

    // canonical radii: pairwise distances (quantile-capped) + dyadic ladder
    {
        std::vector<double> ds;
        ds.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) ds.push_back(dist(i, j));
        std::sort(ds.begin(), ds.end());
        ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
        if (ds.size() > kRadiiCap) {
            std::vector<double> sub;
            sub.reserve(kRadiiCap);
            for (std::size_t k = 0; k < kRadiiCap; ++k) {
                std::size_t idx = k * (ds.size() - 1) / (kRadiiCap - 1);
                sub.push_back(ds[idx]);
            }
            sub.erase(std::unique(sub.begin(), sub.end()), sub.end());
            ds = std::move(sub);
        }
        if (ds.empty()) {
            radii_ = {1.0};  // single node: sentinel radius
        } else {
            radii_ = ds;
            double r = r0_;
            while (true) {
                radii_.push_back(r);
                if (r < dmin_) break;
                r *= 0.5;
            }
            std::sort(radii_.begin(), radii_.end());
            radii_.erase(std::unique(radii_.begin(), radii_.end()), radii_.end());
        }
    }

    // per-node distance orderings (index tiebreak keeps this deterministic)
    order_.assign(static_cast<std::size_t>(n), {});
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t x = lo; x < hi; ++x) {
            auto& ord = order_[x];
            ord.resize(static_cast<std::size_t>(n));
            std::iota(ord.begin(), ord.end(), 0);
            const double* row = dist_.data() + x * static_cast<std::size_t>(n);
            std::sort(ord.begin(), ord.end(), [row](int a, int b) {
                if (row[a] != row[b]) return row[a] < row[b];
                return a < b;
            });
        }
    });
}

double quasi_triangle_constant(const QuasiMetricSpace& s) {
    const int n = s.size();
    if (n <= 2) return 1.0;
    std::vector<double> partial(static_cast<std::size_t>(n), 1.0);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t x = lo; x < hi; ++x) {
            double best = 1.0;
            for (int y = 0; y < n; ++y) {
                if (static_cast<int>(x) == y) continue;
                double dxy = s.dist(static_cast<int>(x), y);
                double minsum = dxy;  // z = x
                for (int z = 0; z < n; ++z) {
                    double t = s.dist(static_cast<int>(x), z) + s.dist(z, y);
                    if (t < minsum) minsum = t;
                }
                best = std::max(best, dxy / minsum);
            }
            partial[x] = best;
        }
    });
    double k1 = 1.0;
    for (double v : partial) k1 = std::max(k1, v);
    return k1;
}

Ball QuasiMetricSpace::ball(int center, double radius) const {
    if (center < 0 || center >= n_) throw precondition_error("ball: unknown node id");
    if (!(radius > 0.0)) throw precondition_error("ball: radius must be positive");
    Ball b;
    b.center = center;
    b.radius = radius;
    for (int j = 0; j < n_; ++j)
        if (dist(center, j) < radius) b.members.push_back(j);
    return b;
}

int QuasiMetricSpace::geometric_doubling_number() const {
    if (doubling_number_ >= 0) return doubling_number_;
    const int n = n_;
    // Radius sample: the canonical set, thinned so the scan stays O(64 N^2).
    std::vector<double> rs = radii_;
    if (rs.size() > 64) {
        std::vector<double> sub;
        for (std::size_t k = 0; k < 64; ++k) sub.push_back(rs[k * (rs.size() - 1) / 63]);
        sub.erase(std::unique(sub.begin(), sub.end()), sub.end());
        rs = std::move(sub);
    }
    int worst = 1;
    std::vector<char> covered(static_cast<std::size_t>(n));
    for (double r : rs) {
        double half = r / 2.0;
        for (int x = 0; x < n; ++x) {
            Ball b = ball(x, r);
            std::fill(covered.begin(), covered.end(), 0);
            int used = 0;
            for (int m : b.members) {
                if (covered[static_cast<std::size_t>(m)]) continue;
                ++used;  // greedy: lowest uncovered member becomes a center
                for (int y : b.members)
                    if (!covered[static_cast<std::size_t>(y)] && dist(m, y) < half)
                        covered[static_cast<std::size_t>(y)] = 1;
                // the center itself is at distance 0 < half
            }
            worst = std::max(worst, used);
        }
    }
    doubling_number_ = worst;
    return worst;
}

nlohmann::ordered_json QuasiMetricSpace::to_json() const {
    nlohmann::ordered_json out;
    out["spec"] = spec_;
    out["n"] = n_;
    out["k1"] = k1_;
    out["k1_estimated"] = k1_estimated_;
    out["r0"] = r0_;
    return out;
}

QuasiMetricSpace QuasiMetricSpace::load(const nlohmann::json& serialized) {
    if (!serialized.is_object() || !serialized.contains("spec"))
        throw parse_error("serialized space must carry a 'spec' object");
    return build(serialized.at("spec"));
}

nlohmann::json spec_at_level(const nlohmann::json& spec, int target_nodes) {
    if (target_nodes < 2) throw precondition_error("refinement level must be >= 2 nodes");
    nlohmann::json out = spec;
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "grid1d") {
        out["n"] = target_nodes;
    } else if (kind == "grid2d") {
        out.erase("n");
        out["side"] = std::max(2, static_cast<int>(std::lround(std::sqrt(static_cast<double>(target_nodes)))));
    } else if (kind == "cantor") {
        out["generation"] = std::max(1, static_cast<int>(std::lround(std::log2(static_cast<double>(target_nodes)))));
    } else if (kind == "snowflake") {
        out["base"] = spec_at_level(spec.at("base"), target_nodes);
    } else {
        throw precondition_error("space kind '" + kind + "' cannot be refined by level");
    }
    return out;
}

}  // namespace rzp
