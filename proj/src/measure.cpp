#include "measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "common.hpp"

namespace rzp {

DiscreteMeasure DiscreteMeasure::from_weights(std::vector<double> w) {
    for (double v : w)
        if (!std::isfinite(v) || v < 0.0) throw precondition_error("measure weights must be finite and >= 0");
    DiscreteMeasure m;
    m.weights = std::move(w);
    m.total = kahan_total(m.weights);
    return m;
}

double quadrature_cell_size(const nlohmann::json& spec) {
    const std::string kind = spec.at("kind").get<std::string>();
    double length = spec.contains("length") ? spec.at("length").get<double>() : 1.0;
    if (kind == "grid1d") {
        int n = spec.at("n").get<int>();
        return n > 1 ? length / (n - 1) : length;
    }
    if (kind == "grid2d") {
        int side = spec.contains("side") ? spec.at("side").get<int>()
                                         : static_cast<int>(std::lround(std::sqrt(spec.at("n").get<double>())));
        double h = side > 1 ? length / (side - 1) : length;
        return h * h;
    }
    if (kind == "cantor") {
        int g = spec.at("generation").get<int>();
        return std::pow(0.5, g);  // natural mass per generation-g cell
    }
    throw precondition_error("quadrature measure is only defined for grid1d/grid2d/cantor specs");
}

DiscreteMeasure DiscreteMeasure::from_spec(const nlohmann::json& spec, const QuasiMetricSpace& s) {
    const std::size_t n = static_cast<std::size_t>(s.size());
    if (spec.is_array()) {
        if (spec.size() != n) throw parse_error("weight array length must match node count");
        std::vector<double> w(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = spec[i].get<double>();
        return from_weights(std::move(w));
    }
    if (!spec.is_object()) throw parse_error("measure spec must be an object or a weight array");
    if (spec.contains("weights")) return from_spec(spec.at("weights"), s);
    const std::string kind = spec.value("kind", "");
    if (kind == "uniform-mass") {
        double total = spec.value("total", 1.0);
        if (!(total >= 0.0)) throw parse_error("uniform-mass: total must be >= 0");
        return from_weights(std::vector<double>(n, total / static_cast<double>(n)));
    }
    if (kind == "quadrature") {
        double scale = spec.value("scale", 1.0);
        double cell = quadrature_cell_size(s.spec());
        return from_weights(std::vector<double>(n, scale * cell));
    }
    throw parse_error("unknown measure spec kind '" + kind + "'");
}

BallOracle::BallOracle(const QuasiMetricSpace& s, const DiscreteMeasure& mu) : space_(&s), mu_(&mu) {
    if (mu.weights.size() != static_cast<std::size_t>(s.size()))
        throw precondition_error("measure is not aligned with the space's node order");
    const std::size_t n = static_cast<std::size_t>(s.size());
    prefix_.assign(n, {});
    parallel_for(n, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t x = lo; x < hi; ++x) {
            const auto& ord = s.sorted_by_distance(static_cast<int>(x));
            auto& pw = prefix_[x];
            pw.resize(n + 1);
            KahanSum acc;
            pw[0] = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                acc.add(mu.weights[static_cast<std::size_t>(ord[k])]);
                pw[k + 1] = acc.value();
            }
        }
    });
}

double BallOracle::ball_mass(int x, double r) const {
    if (!(r > 0.0)) throw precondition_error("ball_mass: radius must be positive");
    if (r > space_->r0()) return mu_->total;
    const auto& ord = space_->sorted_by_distance(x);
    const std::size_t n = ord.size();
    // count nodes with dist < r (strict)
    std::size_t lo = 0, hi = n;
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (space_->dist(x, ord[mid]) < r)
            lo = mid + 1;
        else
            hi = mid;
    }
    return prefix_[static_cast<std::size_t>(x)][lo];
}

void BallOracle::pair_ball_masses(int x, std::vector<double>& out) const {
    const auto& ord = space_->sorted_by_distance(x);
    const std::size_t n = ord.size();
    out.resize(n);
    const auto& pw = prefix_[static_cast<std::size_t>(x)];
    std::size_t k = 0;
    while (k < n) {
        double d = space_->dist(x, ord[k]);
        std::size_t k2 = k;
        while (k2 < n && space_->dist(x, ord[k2]) == d) ++k2;
        for (std::size_t j = k; j < k2; ++j) out[static_cast<std::size_t>(ord[j])] = pw[k];
        k = k2;
    }
}

std::optional<std::pair<double, double>> DominatingFunction::power_view(int x) const {
    if (form_ == Form::Power || form_ == Form::PowerField) {
        double n = (form_ == Form::Power) ? (*nfield_)[0] : (*nfield_)[static_cast<std::size_t>(x)];
        return std::make_pair(power_K_, n);
    }
    return std::nullopt;
}

void DominatingFunction::validate(const QuasiMetricSpace& s, std::optional<double> declared_c_lambda) {
    const auto& radii = s.canonical_radii();
    const int n = s.size();
    std::vector<double> worst_ratio(static_cast<std::size_t>(n), 0.0);
    std::vector<int> bad_node(static_cast<std::size_t>(n), -1);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t x = lo; x < hi; ++x) {
            double prev = -1.0;
            double ratio = 0.0;
            for (double r : radii) {
                double v = eval_(static_cast<int>(x), r);
                if (!(v > 0.0) || !std::isfinite(v)) {
                    bad_node[x] = 0;  // positivity violation
                    return;
                }
                if (v < prev * (1.0 - 1e-12)) {
                    bad_node[x] = 1;  // monotonicity violation
                    return;
                }
                prev = std::max(prev, v);
                double v2 = eval_(static_cast<int>(x), 2.0 * r);
                ratio = std::max(ratio, v2 / v);
            }
            worst_ratio[x] = ratio;
        }
    });
    double measured = 0.0;
    for (int x = 0; x < n; ++x) {
        if (bad_node[static_cast<std::size_t>(x)] == 0)
            throw precondition_error("dominating function must be positive and finite for r > 0 (node " +
                                     std::to_string(x) + ")");
        if (bad_node[static_cast<std::size_t>(x)] == 1)
            throw precondition_error("dominating function must be non-decreasing in r (node " + std::to_string(x) +
                                     ")");
        measured = std::max(measured, worst_ratio[static_cast<std::size_t>(x)]);
    }
    if (declared_c_lambda) {
        if (measured > *declared_c_lambda * (1.0 + 1e-9))
            throw precondition_error("declared doubling constant " + std::to_string(*declared_c_lambda) +
                                     " exceeded; measured " + std::to_string(measured));
        c_lambda_ = *declared_c_lambda;
    } else {
        c_lambda_ = measured;
    }
}

DominatingFunction DominatingFunction::power(const QuasiMetricSpace& s, double K, double n,
                                             std::optional<double> declared_c_lambda) {
    if (!(K > 0.0)) throw precondition_error("power dominating function needs K > 0");
    if (!(n > 0.0)) throw precondition_error("power dominating function needs exponent n > 0");
    DominatingFunction f;
    f.form_ = Form::Power;
    f.power_K_ = K;
    f.nfield_ = std::make_shared<std::vector<double>>(1, n);
    f.eval_ = [K, n](int, double r) { return K * std::pow(r, n); };
    f.lower_type_ = {n, 1.0};
    f.describe_ = "power(K=" + std::to_string(K) + ",n=" + std::to_string(n) + ")";
    f.validate(s, declared_c_lambda);
    return f;
}

DominatingFunction DominatingFunction::power_field(const QuasiMetricSpace& s, double K, std::vector<double> nfield) {
    if (!(K > 0.0)) throw precondition_error("power-field dominating function needs K > 0");
    if (nfield.size() != static_cast<std::size_t>(s.size()))
        throw precondition_error("power-field exponent array must match node count");
    double nmin = std::numeric_limits<double>::infinity();
    for (double v : nfield) {
        if (!(v > 0.0)) throw precondition_error("power-field exponents must be > 0");
        nmin = std::min(nmin, v);
    }
    DominatingFunction f;
    f.form_ = Form::PowerField;
    f.power_K_ = K;
    f.nfield_ = std::make_shared<std::vector<double>>(std::move(nfield));
    auto nf = f.nfield_;
    f.eval_ = [K, nf](int x, double r) { return K * std::pow(r, (*nf)[static_cast<std::size_t>(x)]); };
    f.lower_type_ = {nmin, 1.0};
    f.describe_ = "power-field(K=" + std::to_string(K) + ")";
    f.validate(s, std::nullopt);
    return f;
}

DominatingFunction DominatingFunction::ball_measure(const BallOracle& oracle) {
    DominatingFunction f;
    f.form_ = Form::BallMeasure;
    const BallOracle* o = &oracle;
    f.eval_ = [o](int x, double r) { return o->ball_mass(x, r); };
    f.lower_type_ = {0.0, 1.0};
    f.describe_ = "ball-measure";
    f.validate(oracle.space(), std::nullopt);
    return f;
}

DominatingFunction DominatingFunction::custom(const QuasiMetricSpace& s, Form form,
                                              std::function<double(int, double)> eval, LowerType lt,
                                              std::optional<double> declared_c_lambda, std::string describe) {
    DominatingFunction f;
    f.form_ = form;
    f.eval_ = std::move(eval);
    f.lower_type_ = lt;
    f.describe_ = std::move(describe);
    f.validate(s, declared_c_lambda);
    return f;
}

DominatingFunction DominatingFunction::tabulated(const QuasiMetricSpace& s, std::vector<double> radii,
                                                 std::vector<double> values) {
    if (radii.size() != values.size() || radii.empty()) throw precondition_error("tabulated: radii/values mismatch");
    for (std::size_t i = 1; i < radii.size(); ++i)
        if (radii[i] <= radii[i - 1]) throw precondition_error("tabulated: radii must be strictly increasing");
    auto rs = std::make_shared<std::vector<double>>(std::move(radii));
    auto vs = std::make_shared<std::vector<double>>(std::move(values));
    DominatingFunction f;
    f.form_ = Form::Tabulated;
    f.eval_ = [rs, vs](int, double r) {
        auto it = std::upper_bound(rs->begin(), rs->end(), r);
        std::size_t k = static_cast<std::size_t>(it - rs->begin());
        return (*vs)[k == 0 ? 0 : k - 1];
    };
    f.lower_type_ = {0.0, 1.0};
    f.describe_ = "tabulated";
    f.validate(s, std::nullopt);
    return f;
}

nlohmann::ordered_json RegularityReport::to_json() const {
    nlohmann::ordered_json j;
    j["holds"] = holds;
    j["best_constant"] = best_constant;
    j["witness"] = {{"node", witness_node}, {"radius", witness_radius}};
    j["samples"] = samples;
    if (!note.empty()) j["note"] = note;
    if (!flagged.empty()) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (auto& [node, value] : flagged) arr.push_back({{"node", node}, {"value", value}});
        j["flagged"] = arr;
    }
    return j;
}

double ball_measure(const BallOracle& oracle, int x, double r) { return oracle.ball_mass(x, r); }

RegularityReport check_upper_doubling(const BallOracle& oracle, const DominatingFunction& lam) {
    const auto& radii = oracle.space().canonical_radii();
    const int n = oracle.space().size();
    std::vector<double> best(static_cast<std::size_t>(n), 0.0);
    std::vector<double> best_r(static_cast<std::size_t>(n), 0.0);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t x = lo; x < hi; ++x) {
            double b = 0.0, br = 0.0;
            for (double r : radii) {
                double ratio = oracle.ball_mass(static_cast<int>(x), r) / lam(static_cast<int>(x), r);
                if (ratio > b) {
                    b = ratio;
                    br = r;
                }
            }
            best[x] = b;
            best_r[x] = br;
        }
    });
    RegularityReport rep;
    rep.samples = static_cast<std::size_t>(n) * radii.size();
    for (int x = 0; x < n; ++x) {
        if (best[static_cast<std::size_t>(x)] > rep.best_constant) {
            rep.best_constant = best[static_cast<std::size_t>(x)];
            rep.witness_node = x;
            rep.witness_radius = best_r[static_cast<std::size_t>(x)];
        }
    }
    rep.holds = rep.best_constant <= 1.0 + 1e-12;
    return rep;
}

RegularityReport estimate_doubling_constant(const BallOracle& oracle) {
    const auto& radii = oracle.space().canonical_radii();
    const int n = oracle.space().size();
    struct Row {
        double best = 0.0;
        double best_r = 0.0;
        int zero_node = -1;
        double zero_r = 0.0;
    };
    std::vector<Row> rows(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t x = lo; x < hi; ++x) {
            Row row;
            for (double r : radii) {
                double m1 = oracle.ball_mass(static_cast<int>(x), r);
                double m2 = oracle.ball_mass(static_cast<int>(x), 2.0 * r);
                if (m1 > 0.0) {
                    double ratio = m2 / m1;
                    if (ratio > row.best) {
                        row.best = ratio;
                        row.best_r = r;
                    }
                } else if (m2 > 0.0 && row.zero_node < 0) {
                    row.zero_node = static_cast<int>(x);
                    row.zero_r = r;
                }
            }
            rows[x] = row;
        }
    });
    RegularityReport rep;
    rep.samples = static_cast<std::size_t>(n) * radii.size();
    rep.holds = true;
    for (int x = 0; x < n; ++x) {
        const Row& row = rows[static_cast<std::size_t>(x)];
        if (row.best > rep.best_constant) {
            rep.best_constant = row.best;
            rep.witness_node = x;
            rep.witness_radius = row.best_r;
        }
        if (row.zero_node >= 0) {
            rep.flagged.emplace_back(row.zero_node, row.zero_r);
            // a gap at a node the measure charges is a genuine doubling failure
            if (oracle.measure().weights[static_cast<std::size_t>(row.zero_node)] > 0.0) rep.holds = false;
        }
    }
    if (!rep.flagged.empty() && rep.note.empty())
        rep.note = "zero-mass balls with massive double found (sub-resolution gaps)";
    return rep;
}

AhlforsFit ahlfors_fit(const BallOracle& oracle, double lo_factor, double hi_frac) {
    const auto& radii = oracle.space().canonical_radii();
    const double dmin = oracle.space().min_positive_distance();
    const double r0 = oracle.space().r0();
    double lo = lo_factor * dmin;
    double hi = hi_frac * r0;
    std::vector<double> rs;
    for (double r : radii)
        if (r >= lo && r <= hi) rs.push_back(r);
    std::vector<double> distinct = rs;
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 2) throw precondition_error("ahlfors_fit: need at least two radii in the scaling window");

    const int n = oracle.space().size();
    // accumulate normal equations for log(mass) ~ Q log r + b
    double sxx = 0.0, sx = 0.0, sy = 0.0, sxy = 0.0;
    std::size_t m = 0;
    std::vector<std::array<double, 5>> partial(static_cast<std::size_t>(n), {0, 0, 0, 0, 0});
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t plo, std::size_t phi) {
        for (std::size_t x = plo; x < phi; ++x) {
            auto& acc = partial[x];
            for (double r : rs) {
                double mass = oracle.ball_mass(static_cast<int>(x), r);
                if (!(mass > 0.0)) continue;
                double lx = std::log(r), ly = std::log(mass);
                acc[0] += lx * lx;
                acc[1] += lx;
                acc[2] += ly;
                acc[3] += lx * ly;
                acc[4] += 1.0;
            }
        }
    });
    for (auto& acc : partial) {
        sxx += acc[0];
        sx += acc[1];
        sy += acc[2];
        sxy += acc[3];
        m += static_cast<std::size_t>(acc[4]);
    }
    if (m < 2) throw precondition_error("ahlfors_fit: not enough positive-mass samples");
    double denom = static_cast<double>(m) * sxx - sx * sx;
    if (denom == 0.0) throw precondition_error("ahlfors_fit: degenerate radius sample");
    double Q = (static_cast<double>(m) * sxy - sx * sy) / denom;
    double b = (sy - Q * sx) / static_cast<double>(m);

    std::vector<double> worst(static_cast<std::size_t>(n), 0.0);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t plo, std::size_t phi) {
        for (std::size_t x = plo; x < phi; ++x) {
            double w = 0.0;
            for (double r : rs) {
                double mass = oracle.ball_mass(static_cast<int>(x), r);
                if (!(mass > 0.0)) continue;
                w = std::max(w, std::abs(std::log(mass) - (Q * std::log(r) + b)));
            }
            worst[x] = w;
        }
    });
    AhlforsFit fit;
    fit.Q = Q;
    fit.samples = m;
    for (double w : worst) fit.max_abs_residual = std::max(fit.max_abs_residual, w);
    fit.A1 = std::exp(fit.max_abs_residual);
    return fit;
}

RegularityReport lower_type_check(const DominatingFunction& lam, const QuasiMetricSpace& s, int x, double alpha,
                                  std::optional<double> threshold) {
    if (alpha < 0.0) throw precondition_error("lower_type_check: alpha must be >= 0");
    const auto& radii = s.canonical_radii();
    // minimal c1 with g(r2) <= c1 g(r1) for r1 <= r2, g(r) = r^alpha / lambda(x,r)
    double min_g = std::numeric_limits<double>::infinity();
    double best = 0.0, wr = 0.0;
    for (double r : radii) {
        double g = std::pow(r, alpha) / lam(x, r);
        if (min_g < std::numeric_limits<double>::infinity()) {
            double c = g / min_g;
            if (c > best) {
                best = c;
                wr = r;
            }
        }
        min_g = std::min(min_g, g);
    }
    RegularityReport rep;
    rep.samples = radii.size();
    rep.best_constant = std::max(best, 1.0);  // r1 = r2 pairs give 1
    rep.witness_node = x;
    rep.witness_radius = wr;
    double thr = threshold ? *threshold : lam.lower_type().constant;
    rep.holds = rep.best_constant <= thr * (1.0 + 1e-9);
    return rep;
}

RegularityReport lower_type_direct_scan(const DominatingFunction& lam, const QuasiMetricSpace& s, int x, double alpha,
                                        std::optional<double> threshold) {
    if (alpha < 0.0) throw precondition_error("lower_type_direct_scan: alpha must be >= 0");
    const auto& radii = s.canonical_radii();
    double best = 0.0, wr = 0.0;
    std::size_t samples = 0;
    for (double t : radii) {
        double lt = lam(x, t);
        for (int k = 1; k <= 32; ++k) {
            double sf = static_cast<double>(k) / 32.0;
            double c = lam(x, sf * t) / (std::pow(sf, alpha) * lt);
            ++samples;
            if (c > best) {
                best = c;
                wr = t;
            }
        }
    }
    RegularityReport rep;
    rep.samples = samples;
    rep.best_constant = std::max(best, 1.0);
    rep.witness_node = x;
    rep.witness_radius = wr;
    double thr = threshold ? *threshold : lam.lower_type().constant;
    rep.holds = rep.best_constant <= thr * (1.0 + 1e-9);
    return rep;
}

std::vector<std::pair<int, double>> atom_scan(const QuasiMetricSpace& s, const DiscreteMeasure& mu,
                                              const DominatingFunction& lam) {
    double r_min = s.canonical_radii().front();
    std::vector<std::pair<int, double>> flagged;
    for (int x = 0; x < s.size(); ++x) {
        double w = mu.weights[static_cast<std::size_t>(x)];
        if (w > lam(x, r_min)) flagged.emplace_back(x, w);
    }
    return flagged;
}

RegularityReport comparable_center_check(const QuasiMetricSpace& s, const DominatingFunction& lam,
                                         std::size_t max_pairs) {
    const int n = s.size();
    const auto& radii = s.canonical_radii();
    Rng rng(0x5eedc0de, static_cast<std::uint64_t>(n));
    RegularityReport rep;
    rep.best_constant = 1.0;
    for (std::size_t trial = 0; trial < max_pairs; ++trial) {
        int x = static_cast<int>(rng.index(static_cast<std::size_t>(n)));
        int y = static_cast<int>(rng.index(static_cast<std::size_t>(n)));
        if (x == y) continue;
        double d = s.dist(x, y);
        double r = radii[rng.index(radii.size())];
        if (!(d < r)) continue;
        ++rep.samples;
        double a = lam(x, r), b = lam(y, r);
        double c = std::max(a / b, b / a);
        if (c > rep.best_constant) {
            rep.best_constant = c;
            rep.witness_node = x;
            rep.witness_radius = r;
        }
    }
    rep.holds = std::isfinite(rep.best_constant);
    return rep;
}

}  // namespace rzp
