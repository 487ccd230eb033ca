#include "lebesgue.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "common.hpp"

namespace rzp {

ExponentFunction ExponentFunction::constant(double p, int n) {
    return per_node(std::vector<double>(static_cast<std::size_t>(n), p));
}

ExponentFunction ExponentFunction::per_node(std::vector<double> values) {
    if (values.empty()) throw precondition_error("exponent function needs at least one node");
    ExponentFunction e;
    e.pmin_ = std::numeric_limits<double>::infinity();
    e.pmax_ = 0.0;
    for (double v : values) {
        if (!std::isfinite(v)) throw precondition_error("exponent values must be finite");
        e.pmin_ = std::min(e.pmin_, v);
        e.pmax_ = std::max(e.pmax_, v);
    }
    if (!(e.pmin_ > 1.0)) throw precondition_error("exponent must satisfy p(x) > 1 everywhere");
    e.values_ = std::move(values);
    return e;
}

double modular(const DiscreteMeasure& mu, const ExponentFunction& p, const GridFunction& f) {
    if (f.size() != mu.weights.size() || p.size() != static_cast<int>(f.size()))
        throw precondition_error("modular: size mismatch between f, measure, and exponent");
    KahanSum acc;
    for (std::size_t x = 0; x < f.size(); ++x) {
        double w = mu.weights[x];
        if (w == 0.0) continue;
        acc.add(std::pow(std::abs(f[x]), p(static_cast<int>(x))) * w);
    }
    return acc.value();
}

double luxemburg_norm(const DiscreteMeasure& mu, const ExponentFunction& p, const GridFunction& f) {
    if (f.size() != mu.weights.size() || p.size() != static_cast<int>(f.size()))
        throw precondition_error("luxemburg_norm: size mismatch");
    double fmax = 0.0;
    bool zero_on_support = true;
    for (std::size_t x = 0; x < f.size(); ++x) {
        if (!std::isfinite(f[x])) throw precondition_error("luxemburg_norm: f must be finite");
        if (mu.weights[x] > 0.0 && f[x] != 0.0) {
            zero_on_support = false;
            fmax = std::max(fmax, std::abs(f[x]));
        }
    }
    if (zero_on_support) return 0.0;

    double hi = fmax * std::pow(std::max(1.0, mu.total), 1.0 / p.p_minus()) + 1.0;
    double lo = 1e-300;
    for (int it = 0; it < 200 && (hi - lo) > 1e-10 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        GridFunction g(f.size());
        for (std::size_t x = 0; x < f.size(); ++x) g[x] = f[x] / mid;
        if (modular(mu, p, g) <= 1.0)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

double lp_norm(const DiscreteMeasure& mu, double p, const GridFunction& f) {
    if (f.size() != mu.weights.size()) throw precondition_error("lp_norm: size mismatch");
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t x = 0; x < f.size(); ++x)
            if (mu.weights[x] > 0.0) m = std::max(m, std::abs(f[x]));
        return m;
    }
    if (!(p >= 1.0)) throw precondition_error("lp_norm: p must be >= 1");
    KahanSum acc;
    for (std::size_t x = 0; x < f.size(); ++x)
        if (mu.weights[x] > 0.0) acc.add(std::pow(std::abs(f[x]), p) * mu.weights[x]);
    return std::pow(acc.value(), 1.0 / p);
}

CharBallBound char_ball_lower_bound(const DiscreteMeasure& mu, const ExponentFunction& p, const Ball& ball) {
    KahanSum mass;
    for (int m : ball.members) mass.add(mu.weights[static_cast<std::size_t>(m)]);
    double mb = mass.value();
    if (mb > 1.0) throw precondition_error("char_ball_lower_bound: requires mu(B) <= 1");
    GridFunction chi(mu.weights.size(), 0.0);
    for (int m : ball.members) chi[static_cast<std::size_t>(m)] = 1.0;
    CharBallBound out;
    out.lhs = luxemburg_norm(mu, p, chi);
    out.rhs = 0.0;
    for (int m : ball.members) {
        double cand = (mb > 0.0) ? std::pow(mb, 1.0 / p(m)) : 0.0;
        if (cand > out.rhs) {
            out.rhs = cand;
            out.worst_node = m;
        }
    }
    out.margin = out.lhs - out.rhs;
    out.holds = out.margin >= -1e-12;
    return out;
}

ExponentFunction hls_exponent(double p, double alpha, const std::vector<double>& nfield) {
    if (!(alpha > 0.0)) throw precondition_error("hls_exponent: alpha must be > 0");
    if (!(p > 1.0)) throw precondition_error("hls_exponent: p must be > 1");
    std::vector<double> q(nfield.size());
    for (std::size_t x = 0; x < nfield.size(); ++x) {
        double n = nfield[x];
        if (!(alpha < n))
            throw precondition_error("hls_exponent: alpha must be < n(x); violated at node " + std::to_string(x));
        double inv = 1.0 / p - alpha / n;
        if (!(inv > 0.0))
            throw precondition_error("hls_exponent: requires p < n(x)/alpha; violated at node " + std::to_string(x));
        q[x] = 1.0 / inv;
    }
    ExponentFunction e = ExponentFunction::per_node(std::move(q));
    if (!(p < e.p_minus())) throw precondition_error("hls_exponent: derived q_minus does not exceed p");
    return e;
}

EmbeddingCheck embedding_check(const DiscreteMeasure& mu, const ExponentFunction& p, const ExponentFunction& q,
                               const std::vector<GridFunction>& family) {
    for (int x = 0; x < p.size(); ++x)
        if (p(x) > q(x) + 1e-12) throw precondition_error("embedding_check: requires p(x) <= q(x) everywhere");
    EmbeddingCheck out;
    out.ok = true;
    for (std::size_t i = 0; i < family.size(); ++i) {
        double np = luxemburg_norm(mu, p, family[i]);
        double nq = luxemburg_norm(mu, q, family[i]);
        if (nq == 0.0) continue;
        double c = np / nq;
        if (c > out.constant) {
            out.constant = c;
            out.worst_index = static_cast<int>(i);
        }
    }
    return out;
}

}  // namespace rzp
