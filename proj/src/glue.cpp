#include "glue.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "common.hpp"

namespace rzp {

namespace {

constexpr double kAhlforsDimTol = 0.25;    // |fitted Q - n_i| rejection bound
constexpr double kAhlforsResidTol = 2.5;   // log-scale residual rejection bound
constexpr double kContactOrderMin = 0.1;   // min of d(a,b)/max(d(a,x0),d(b,x0)) across components

double intrinsic_dimension(const nlohmann::json& spec) {
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "grid1d") return 1.0;
    if (kind == "grid2d") return 2.0;
    if (kind == "cantor") return std::log(2.0) / std::log(3.0);
    throw precondition_error("glue components must be grid1d/grid2d/cantor specs");
}

std::vector<double> parse_coords2(const nlohmann::json& j, const char* what) {
    if (!j.is_array() || j.empty() || j.size() > 2) throw parse_error(std::string(what) + " must be [x] or [x, y]");
    std::vector<double> c{0.0, 0.0};
    for (std::size_t d = 0; d < j.size(); ++d) c[d] = j[d].get<double>();
    return c;
}

}  // namespace

TwoComponentSpace build_glued(const nlohmann::json& g) {
    if (!g.is_object() || !g.contains("component1") || !g.contains("component2"))
        throw parse_error("glue spec needs 'component1' and 'component2'");
    nlohmann::json spec1 = g.at("component1");
    nlohmann::json spec2 = g.at("component2");
    std::vector<double> x0c{0.0, 0.0};
    if (g.contains("x0")) x0c = parse_coords2(g.at("x0"), "x0");
    if (g.contains("offset2")) {
        auto off = parse_coords2(g.at("offset2"), "offset2");
        std::vector<double> base{0.0, 0.0};
        if (spec2.contains("origin")) base = parse_coords2(spec2.at("origin"), "origin");
        spec2["origin"] = {base[0] + off[0], base[1] + off[1]};
    }
    double gamma1 = g.value("gamma1", 0.0);
    double gamma2 = g.value("gamma2", 0.0);

    double n1 = intrinsic_dimension(spec1);
    double n2 = intrinsic_dimension(spec2);
    if (n1 > n2) throw precondition_error("glue spec: component1 must carry the smaller dimension (n1 <= n2)");
    if (!(gamma1 > -n1) || !(gamma2 > -n2)) throw precondition_error("glue spec: requires gamma_i > -n_i");

    QuasiMetricSpace c1 = QuasiMetricSpace::build(spec1);
    QuasiMetricSpace c2 = QuasiMetricSpace::build(spec2);
    double cell1 = quadrature_cell_size(spec1);
    double cell2 = quadrature_cell_size(spec2);

    // each component alone must scale like an n_i-regular quadrature
    AhlforsFit fits[2];
    const QuasiMetricSpace* comps[2] = {&c1, &c2};
    double dims[2] = {n1, n2};
    double cells[2] = {cell1, cell2};
    for (int i = 0; i < 2; ++i) {
        DiscreteMeasure m = DiscreteMeasure::from_weights(
            std::vector<double>(static_cast<std::size_t>(comps[i]->size()), cells[i]));
        BallOracle o(*comps[i], m);
        fits[i] = ahlfors_fit(o);
        if (std::abs(fits[i].Q - dims[i]) > kAhlforsDimTol)
            throw precondition_error("component " + std::to_string(i + 1) + " is not Ahlfors " +
                                     std::to_string(dims[i]) + "-regular: fitted Q=" + std::to_string(fits[i].Q));
        if (fits[i].max_abs_residual > kAhlforsResidTol)
            throw precondition_error("component " + std::to_string(i + 1) +
                                     " regularity residual too large: " + std::to_string(fits[i].max_abs_residual));
    }

    // assemble: component nodes (minus any node sitting on x0), then x0
    std::vector<double> coords;
    std::vector<int> part;
    std::vector<double> quad;
    double coincide_tol = 1e-12 * std::max(1.0, std::max(c1.r0(), c2.r0()));
    for (int i = 0; i < 2; ++i) {
        for (int k = 0; k < comps[i]->size(); ++k) {
            double dx = comps[i]->coord(k, 0) - x0c[0];
            double dy = comps[i]->coord(k, 1) - x0c[1];
            if (std::sqrt(dx * dx + dy * dy) <= coincide_tol) continue;  // the contact node is added once below
            coords.push_back(comps[i]->coord(k, 0));
            coords.push_back(comps[i]->coord(k, 1));
            part.push_back(i + 1);
            quad.push_back(cells[i]);
        }
    }
    coords.push_back(x0c[0]);
    coords.push_back(x0c[1]);
    part.push_back(0);
    quad.push_back(0.0);

    TwoComponentSpace tc;
    tc.space = QuasiMetricSpace::from_points(std::move(coords), 2);
    const int n = tc.space.size();
    tc.x0 = n - 1;
    tc.part = std::move(part);
    tc.quad = std::move(quad);
    tc.n1 = n1;
    tc.n2 = n2;
    tc.gamma1 = gamma1;
    tc.gamma2 = gamma2;
    tc.xi = gamma1 + n1;
    tc.fit1 = fits[0];
    tc.fit2 = fits[1];
    tc.spec = g;

    tc.dist_x0.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) tc.dist_x0[static_cast<std::size_t>(i)] = tc.space.dist(i, tc.x0);

    tc.nfield = std::make_shared<std::vector<double>>(static_cast<std::size_t>(n));
    tc.gammafield = std::make_shared<std::vector<double>>(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        int p = tc.part[static_cast<std::size_t>(i)];
        (*tc.nfield)[static_cast<std::size_t>(i)] = (p == 2) ? n2 : n1;
        (*tc.gammafield)[static_cast<std::size_t>(i)] = (p == 2) ? gamma2 : gamma1;
    }

    // contact diagnostics
    double cross_order = std::numeric_limits<double>::infinity();
    double touch[2] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    double nn[2] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    double diam[2] = {0.0, 0.0};
    for (int a = 0; a < n; ++a) {
        int pa = tc.part[static_cast<std::size_t>(a)];
        if (pa == 0) continue;
        touch[pa - 1] = std::min(touch[pa - 1], tc.dist_x0[static_cast<std::size_t>(a)]);
        for (int b = a + 1; b < n; ++b) {
            int pb = tc.part[static_cast<std::size_t>(b)];
            if (pb == 0) continue;
            double d = tc.space.dist(a, b);
            if (pa == pb) {
                nn[pa - 1] = std::min(nn[pa - 1], d);
                diam[pa - 1] = std::max(diam[pa - 1], d);
            } else {
                double ref = std::max(tc.dist_x0[static_cast<std::size_t>(a)], tc.dist_x0[static_cast<std::size_t>(b)]);
                cross_order = std::min(cross_order, d / ref);
            }
        }
    }
    tc.s_const = diam[0] + diam[1];
    if (cross_order < kContactOrderMin)
        throw precondition_error("components touch away from the contact node (order-zero contact violated, ratio " +
                                 std::to_string(cross_order) + ")");
    for (int i = 0; i < 2; ++i)
        if (touch[i] > 4.0 * nn[i])
            throw precondition_error("component " + std::to_string(i + 1) +
                                     " does not reach the contact node at this resolution");

    // smallest c with d(x,x0) <= c [d(x,X1) + d(x,X2)]; the node-level scan
    // can undershoot 1 because node sets sit strictly inside the closures
    double raw = 0.0;
    for (int x = 0; x < n; ++x) {
        if (x == tc.x0) continue;
        double dmin[2] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
        int px = tc.part[static_cast<std::size_t>(x)];
        dmin[px - 1] = 0.0;
        for (int y = 0; y < n; ++y) {
            int py = tc.part[static_cast<std::size_t>(y)];
            if (py == 0 || py == px) continue;
            dmin[py - 1] = std::min(dmin[py - 1], tc.space.dist(x, y));
        }
        raw = std::max(raw, tc.dist_x0[static_cast<std::size_t>(x)] / (dmin[0] + dmin[1]));
    }
    tc.contact_c_raw = raw;
    tc.contact_c = std::max(1.0, raw);
    return tc;
}

DiscreteMeasure glued_measure(const TwoComponentSpace& tc) {
    const int n = tc.space.size();
    std::vector<double> w(static_cast<std::size_t>(n), 0.0);
    for (int x = 0; x < n; ++x) {
        if (x == tc.x0) continue;
        double d = tc.dist_x0[static_cast<std::size_t>(x)];
        w[static_cast<std::size_t>(x)] =
            std::pow(d, (*tc.gammafield)[static_cast<std::size_t>(x)]) * tc.quad[static_cast<std::size_t>(x)];
    }
    return DiscreteMeasure::from_weights(std::move(w));
}

bool admissible(const TwoComponentSpace& tc) {
    return std::abs((tc.gamma1 + tc.n1) - (tc.gamma2 + tc.n2)) <= 1e-12;
}

nlohmann::ordered_json BallEstimateReport::to_json() const {
    nlohmann::ordered_json j;
    j["k3"] = k3;
    j["c"] = c_small;
    j["ok"] = ok;
    j["regime3_exact"] = regime3_exact;
    j["samples"] = samples;
    j["violations"] = violations;
    j["worst_regime_i"] = {{"node", worst_node_i}, {"radius", worst_radius_i}, {"ratio", worst_ratio_i}};
    j["worst_regime_ii"] = {{"node", worst_node_ii}, {"radius", worst_radius_ii}, {"ratio", worst_ratio_ii}};
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (auto& [cc, kk] : k3_by_c) arr.push_back({{"c", cc}, {"k3", kk}});
    j["k3_by_c"] = arr;
    return j;
}

BallEstimateReport verify_ball_estimates(const TwoComponentSpace& tc, const BallOracle& oracle) {
    if (!admissible(tc)) throw hypothesis_error("ball estimates require gamma1+n1 == gamma2+n2");
    const QuasiMetricSpace& s = tc.space;
    const auto& radii = s.canonical_radii();
    const int n = s.size();
    const double S = tc.s_const;
    const double xi = tc.xi;

    std::vector<double> c_grid;
    for (int k = 1; k <= 9; ++k) c_grid.push_back(0.1 * k);

    struct Acc {
        std::vector<double> k3;
        std::size_t samples = 0;
    };
    std::vector<Acc> accs(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t xs = lo; xs < hi; ++xs) {
            const int x = static_cast<int>(xs);
            Acc acc;
            acc.k3.assign(c_grid.size(), 1.0);
            double hloc = s.dist(x, s.sorted_by_distance(x)[1]);
            double d = tc.dist_x0[xs];
            double nx = (*tc.nfield)[xs];
            double gx = (*tc.gammafield)[xs];
            for (double r : radii) {
                if (r < 2.0 * hloc || r > S) continue;
                double mass = oracle.ball_mass(x, r);
                if (!(mass > 0.0)) continue;
                ++acc.samples;
                double bound_i = (d > 0.0) ? std::pow(d, gx) * std::pow(r, nx) : 0.0;
                double bound_ii = std::pow(r, xi);
                for (std::size_t ci = 0; ci < c_grid.size(); ++ci) {
                    double bound = (d > 0.0 && r < c_grid[ci] * d) ? bound_i : bound_ii;
                    double ratio = mass / bound;
                    acc.k3[ci] = std::max({acc.k3[ci], ratio, 1.0 / ratio});
                }
            }
            accs[xs] = std::move(acc);
        }
    });

    BallEstimateReport rep;
    std::vector<double> k3_all(c_grid.size(), 1.0);
    for (const Acc& a : accs) {
        rep.samples += a.samples;
        for (std::size_t ci = 0; ci < c_grid.size(); ++ci) k3_all[ci] = std::max(k3_all[ci], a.k3[ci]);
    }
    std::size_t best_ci = 0;
    for (std::size_t ci = 0; ci < c_grid.size(); ++ci) {
        rep.k3_by_c.emplace_back(c_grid[ci], k3_all[ci]);
        if (k3_all[ci] < k3_all[best_ci]) best_ci = ci;  // strict: ties keep the smaller c
    }
    rep.c_small = c_grid[best_ci];
    rep.k3 = k3_all[best_ci];

    // recheck at the fitted pair and collect the regime-wise worst samples
    const double k3 = rep.k3, cfit = rep.c_small;
    for (int x = 0; x < n; ++x) {
        double hloc = s.dist(x, s.sorted_by_distance(x)[1]);
        double d = tc.dist_x0[static_cast<std::size_t>(x)];
        double nx = (*tc.nfield)[static_cast<std::size_t>(x)];
        double gx = (*tc.gammafield)[static_cast<std::size_t>(x)];
        for (double r : radii) {
            if (r < 2.0 * hloc || r > S) continue;
            double mass = oracle.ball_mass(x, r);
            if (!(mass > 0.0)) continue;
            bool regime_i = (d > 0.0 && r < cfit * d);
            double bound = regime_i ? std::pow(d, gx) * std::pow(r, nx) : std::pow(r, xi);
            double ratio = mass / bound;
            double two_sided = std::max(ratio, 1.0 / ratio);
            if (two_sided > k3 * (1.0 + 1e-12)) ++rep.violations;
            if (regime_i && two_sided > rep.worst_ratio_i) {
                rep.worst_ratio_i = two_sided;
                rep.worst_node_i = x;
                rep.worst_radius_i = r;
            } else if (!regime_i && two_sided > rep.worst_ratio_ii) {
                rep.worst_ratio_ii = two_sided;
                rep.worst_node_ii = x;
                rep.worst_radius_ii = r;
            }
        }
    }

    // regime (iii): balls beyond S hold the whole mass exactly
    double m12;
    {
        KahanSum acc;
        for (int i = 0; i < n; ++i)
            if (i != tc.x0) acc.add(oracle.measure().weights[static_cast<std::size_t>(i)]);
        m12 = acc.value();
    }
    rep.regime3_exact = true;
    for (double r : {S * 1.0625, 2.0 * S, 4.0 * S}) {
        for (int x : {0, n / 2, tc.x0})
            if (oracle.ball_mass(x, r) != m12) rep.regime3_exact = false;
    }
    rep.ok = std::isfinite(rep.k3) && rep.violations == 0 && rep.regime3_exact;
    return rep;
}

double fit_k4(const TwoComponentSpace& tc, const BallOracle& oracle, RegularityReport* details) {
    const QuasiMetricSpace& s = tc.space;
    const auto& radii = s.canonical_radii();
    const int n = s.size();
    std::vector<double> best(static_cast<std::size_t>(n), 0.0);
    std::vector<double> best_r(static_cast<std::size_t>(n), 0.0);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t xs = lo; xs < hi; ++xs) {
            double nx = (*tc.nfield)[xs];
            double b = 0.0, br = 0.0;
            for (double r : radii) {
                double ratio = oracle.ball_mass(static_cast<int>(xs), r) / std::pow(r, nx);
                if (ratio > b) {
                    b = ratio;
                    br = r;
                }
            }
            best[xs] = b;
            best_r[xs] = br;
        }
    });
    double k4 = 0.0;
    int wn = -1;
    double wr = 0.0;
    for (int x = 0; x < n; ++x) {
        if (best[static_cast<std::size_t>(x)] > k4) {
            k4 = best[static_cast<std::size_t>(x)];
            wn = x;
            wr = best_r[static_cast<std::size_t>(x)];
        }
    }
    if (details) {
        details->holds = std::isfinite(k4);
        details->best_constant = k4;
        details->witness_node = wn;
        details->witness_radius = wr;
        details->samples = static_cast<std::size_t>(n) * radii.size();
        if (tc.gamma1 < 0.0 || tc.gamma2 < 0.0)
            details->note = "negative gamma: the K4 fit degrades near the contact node under refinement";
    }
    return k4;
}

DominatingFunction lambda_simplified(const TwoComponentSpace& tc, const BallOracle& oracle) {
    if (!admissible(tc)) throw hypothesis_error("simplified dominating function requires an admissible glue");
    double k4 = fit_k4(tc, oracle);
    return DominatingFunction::power_field(tc.space, k4, *tc.nfield);
}

DominatingFunction lambda_piecewise(const TwoComponentSpace& tc, double k3, double c_small) {
    if (!admissible(tc)) throw hypothesis_error("piecewise dominating function requires an admissible glue");
    if (!(k3 > 0.0) || !(c_small > 0.0 && c_small < 1.0))
        throw precondition_error("lambda_piecewise: needs k3 > 0 and c in (0,1)");
    auto nf = tc.nfield;
    auto gf = tc.gammafield;
    auto dx0 = std::make_shared<std::vector<double>>(tc.dist_x0);
    const double xi = tc.xi;
    auto eval = [k3, c_small, xi, nf, gf, dx0](int x, double r) {
        double d = (*dx0)[static_cast<std::size_t>(x)];
        if (d > 0.0 && r < c_small * d)
            return k3 * std::pow(r, (*nf)[static_cast<std::size_t>(x)]) *
                   std::pow(d, (*gf)[static_cast<std::size_t>(x)]);
        double plateau = (d > 0.0) ? k3 * std::pow(c_small * d, (*nf)[static_cast<std::size_t>(x)]) *
                                         std::pow(d, (*gf)[static_cast<std::size_t>(x)])
                                   : 0.0;
        return std::max(k3 * std::pow(r, xi), plateau);
    };
    double a = std::min({tc.n1, tc.n2, xi});
    // fit the lower-type constant on a node sample before declaring it
    double c1 = 1.0;
    {
        const auto& radii = tc.space.canonical_radii();
        int stride = std::max(1, tc.space.size() / 24);
        for (int x = 0; x < tc.space.size(); x += stride) {
            double min_g = std::numeric_limits<double>::infinity();
            for (double r : radii) {
                double gv = std::pow(r, a) / eval(x, r);
                if (min_g < std::numeric_limits<double>::infinity()) c1 = std::max(c1, gv / min_g);
                min_g = std::min(min_g, gv);
            }
        }
        c1 *= 1.0 + 1e-9;
    }
    return DominatingFunction::custom(tc.space, DominatingFunction::Form::Piecewise, eval, LowerType{a, c1},
                                      std::nullopt,
                                      "piecewise(k3=" + std::to_string(k3) + ",c=" + std::to_string(c_small) + ")");
}

nlohmann::ordered_json TwoComponentSpace::to_json() const {
    nlohmann::ordered_json j;
    j["glue_spec"] = spec;
    j["n"] = space.size();
    j["n1"] = n1;
    j["n2"] = n2;
    j["gamma1"] = gamma1;
    j["gamma2"] = gamma2;
    j["xi"] = xi;
    j["admissible"] = admissible(*this);
    j["contact_c"] = contact_c;
    j["contact_c_raw"] = contact_c_raw;
    j["S"] = s_const;
    j["component_fits"] = {{"Q1", fit1.Q}, {"Q2", fit2.Q}, {"A1_1", fit1.A1}, {"A1_2", fit2.A1}};
    return j;
}

TwoComponentSpace TwoComponentSpace::load(const nlohmann::json& serialized) {
    if (serialized.is_object() && serialized.contains("glue_spec")) return build_glued(serialized.at("glue_spec"));
    return build_glued(serialized);
}

nlohmann::json glue_spec_at_level(const nlohmann::json& glue_spec, int target_nodes) {
    nlohmann::json out = glue_spec;
    int per_component = std::max(8, target_nodes / 2);
    out["component1"] = spec_at_level(glue_spec.at("component1"), per_component);
    out["component2"] = spec_at_level(glue_spec.at("component2"), per_component);
    return out;
}

}  // namespace rzp
