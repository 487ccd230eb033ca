#include "operators.hpp"

#include <cmath>

#include "common.hpp"

namespace rzp {

KernelSpec KernelSpec::general(double alpha, const DominatingFunction& lam, const QuasiMetricSpace& s) {
    if (!(alpha > 0.0)) throw precondition_error("general kernel: alpha must be > 0");
    double a0 = lam.lower_type().exponent;
    if (!(a0 > alpha))
        throw precondition_error("general kernel: lambda must be of lower type greater than alpha (declared " +
                                 std::to_string(a0) + " vs alpha " + std::to_string(alpha) + ")");
    int stride = std::max(1, s.size() / 16);
    for (int x = 0; x < s.size(); x += stride) {
        RegularityReport rep = lower_type_check(lam, s, x, a0);
        if (!rep.holds)
            throw precondition_error("general kernel: lower_type_check failed at node " + std::to_string(x) +
                                     " (fitted c1 " + std::to_string(rep.best_constant) + ")");
    }
    KernelSpec ks;
    ks.kind = Kind::General;
    ks.order = alpha;
    ks.lambda = &lam;
    return ks;
}

KernelSpec KernelSpec::dim_power(double alpha, double Q) {
    if (!(alpha > 0.0 && alpha < Q)) throw precondition_error("dim-power kernel: requires 0 < alpha < Q");
    KernelSpec ks;
    ks.kind = Kind::DimPower;
    ks.order = alpha;
    ks.dim_q = Q;
    return ks;
}

KernelSpec KernelSpec::one_minus(double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw precondition_error("one-minus kernel: requires 0 < gamma < 1");
    KernelSpec ks;
    ks.kind = Kind::OneMinus;
    ks.order = gamma;
    return ks;
}

KernelSpec KernelSpec::measure_power(double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw precondition_error("measure-power kernel: requires 0 < gamma < 1");
    KernelSpec ks;
    ks.kind = Kind::MeasurePower;
    ks.order = gamma;
    return ks;
}

KernelSpec KernelSpec::measure_ratio(double alpha) {
    if (!(alpha > 0.0)) throw precondition_error("measure-ratio kernel: alpha must be > 0");
    KernelSpec ks;
    ks.kind = Kind::MeasureRatio;
    ks.order = alpha;
    return ks;
}

KernelSpec KernelSpec::variable_dim(double alpha, std::shared_ptr<const std::vector<double>> nfield) {
    if (!nfield || nfield->empty()) throw precondition_error("variable-dim kernel: missing n(x) field");
    double nmin = (*nfield)[0];
    for (double v : *nfield) nmin = std::min(nmin, v);
    if (!(alpha > 0.0 && alpha < nmin)) throw precondition_error("variable-dim kernel: requires 0 < alpha < min n(x)");
    KernelSpec ks;
    ks.kind = Kind::VariableDim;
    ks.order = alpha;
    ks.nfield = std::move(nfield);
    return ks;
}

GridFunction potential(const BallOracle& oracle, const KernelSpec& ks, const GridFunction& f) {
    const QuasiMetricSpace& s = oracle.space();
    const DiscreteMeasure& mu = oracle.measure();
    const int n = s.size();
    if (f.size() != static_cast<std::size_t>(n)) throw precondition_error("potential: f size mismatch");

    const bool needs_mass = (ks.kind == KernelSpec::Kind::MeasurePower || ks.kind == KernelSpec::Kind::MeasureRatio);
    GridFunction out(static_cast<std::size_t>(n), 0.0);
    std::vector<int> bad_pair(static_cast<std::size_t>(n), -1);

    parallel_for(static_cast<std::size_t>(n), [&](std::size_t lo, std::size_t hi) {
        std::vector<double> mass;
        for (std::size_t xs = lo; xs < hi; ++xs) {
            const int x = static_cast<int>(xs);
            if (needs_mass) oracle.pair_ball_masses(x, mass);

            // per-row closed forms where the kernel is a single power of d
            bool pure_power = false;
            double expo = 0.0, scl = 1.0;
            switch (ks.kind) {
                case KernelSpec::Kind::DimPower:
                    pure_power = true;
                    expo = ks.order - ks.dim_q;
                    break;
                case KernelSpec::Kind::OneMinus:
                    pure_power = true;
                    expo = ks.order - 1.0;
                    break;
                case KernelSpec::Kind::VariableDim:
                    pure_power = true;
                    expo = ks.order - (*ks.nfield)[xs];
                    break;
                case KernelSpec::Kind::General:
                    if (auto pv = ks.lambda->power_view(x)) {
                        pure_power = true;
                        expo = ks.order - pv->second;
                        scl = 1.0 / pv->first;
                    }
                    break;
                default:
                    break;
            }

            KahanSum acc;
            for (int y = 0; y < n; ++y) {
                if (y == x) continue;
                double w = mu.weights[static_cast<std::size_t>(y)];
                double fy = f[static_cast<std::size_t>(y)];
                if (w == 0.0 || fy == 0.0) continue;
                double d = s.dist(x, y);
                double k;
                if (pure_power) {
                    k = scl * std::pow(d, expo);
                } else if (ks.kind == KernelSpec::Kind::General) {
                    double lv = (*ks.lambda)(x, d);
                    if (!(lv > 0.0)) {
                        bad_pair[xs] = y;
                        break;
                    }
                    k = std::pow(d, ks.order) / lv;
                } else if (ks.kind == KernelSpec::Kind::MeasurePower) {
                    double mb = mass[static_cast<std::size_t>(y)];
                    if (!(mb > 0.0)) {
                        bad_pair[xs] = y;
                        break;
                    }
                    k = std::pow(mb, ks.order - 1.0);
                } else {  // MeasureRatio
                    double mb = mass[static_cast<std::size_t>(y)];
                    if (!(mb > 0.0)) {
                        bad_pair[xs] = y;
                        break;
                    }
                    k = std::pow(d, ks.order) / mb;
                }
                acc.add(k * fy * w);
            }
            out[xs] = acc.value();
        }
    });

    for (int x = 0; x < n; ++x)
        if (bad_pair[static_cast<std::size_t>(x)] >= 0)
            throw precondition_error("potential: zero kernel denominator at pair (" + std::to_string(x) + ", " +
                                     std::to_string(bad_pair[static_cast<std::size_t>(x)]) + ")");
    return out;
}

namespace {

// Shared maximal-scan core. For each node, walk the canonical radii with
// two merge pointers into the distance-sorted order: one for the averaging
// ball B(x,r), one for the denominator ball B(x, den_scale * r).
GridFunction maximal_scan(const BallOracle& oracle, const GridFunction& f, double den_scale) {
    const QuasiMetricSpace& s = oracle.space();
    const DiscreteMeasure& mu = oracle.measure();
    const auto& radii = s.canonical_radii();
    const int n = s.size();
    if (f.size() != static_cast<std::size_t>(n)) throw precondition_error("maximal: f size mismatch");

    GridFunction out(static_cast<std::size_t>(n), 0.0);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t lo, std::size_t hi) {
        std::vector<double> prefnum(static_cast<std::size_t>(n) + 1, 0.0);
        std::vector<double> prefden(static_cast<std::size_t>(n) + 1, 0.0);
        for (std::size_t xs = lo; xs < hi; ++xs) {
            const int x = static_cast<int>(xs);
            const auto& ord = s.sorted_by_distance(x);
            KahanSum num, den;
            for (int k = 0; k < n; ++k) {
                double w = mu.weights[static_cast<std::size_t>(ord[static_cast<std::size_t>(k)])];
                num.add(std::abs(f[static_cast<std::size_t>(ord[static_cast<std::size_t>(k)])]) * w);
                den.add(w);
                prefnum[static_cast<std::size_t>(k) + 1] = num.value();
                prefden[static_cast<std::size_t>(k) + 1] = den.value();
            }
            double best = 0.0;
            int kn = 0, kd = 0;
            for (double r : radii) {
                while (kn < n && s.dist(x, ord[static_cast<std::size_t>(kn)]) < r) ++kn;
                double rd = den_scale * r;
                while (kd < n && s.dist(x, ord[static_cast<std::size_t>(kd)]) < rd) ++kd;
                double mass = prefden[static_cast<std::size_t>(kd)];
                if (!(mass > 0.0)) continue;  // radius skipped: ball misses supp mu
                double avg = prefnum[static_cast<std::size_t>(kn)] / mass;
                if (avg > best) best = avg;
            }
            out[xs] = best;
        }
    });
    return out;
}

}  // namespace

GridFunction maximal_standard(const BallOracle& oracle, const GridFunction& f) { return maximal_scan(oracle, f, 1.0); }

GridFunction maximal_modified(const BallOracle& oracle, const GridFunction& f) {
    return maximal_scan(oracle, f, 3.0 * oracle.space().k1());
}

GridFunction omega(const BallOracle& oracle, const DominatingFunction& lam) {
    const QuasiMetricSpace& s = oracle.space();
    const auto& radii = s.canonical_radii();
    const int n = s.size();
    GridFunction out(static_cast<std::size_t>(n), 0.0);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t xs = lo; xs < hi; ++xs) {
            double best = 0.0;
            for (double r : radii) {
                double ratio = oracle.ball_mass(static_cast<int>(xs), r) / lam(static_cast<int>(xs), r);
                if (ratio > best) best = ratio;
            }
            out[xs] = best;
        }
    });
    return out;
}

}  // namespace rzp
