#pragma once

#include <vector>

#include "json.hpp"
#include "measure.hpp"
#include "space.hpp"

namespace rzp {

using GridFunction = std::vector<double>;

/// Measurable exponent p(.) with 1 < p_minus <= p(x) <= p_plus < infinity.
class ExponentFunction {
  public:
    static ExponentFunction constant(double p, int n);
    static ExponentFunction per_node(std::vector<double> values);

    double operator()(int x) const { return values_[static_cast<std::size_t>(x)]; }
    double p_minus() const { return pmin_; }
    double p_plus() const { return pmax_; }
    bool is_constant() const { return pmin_ == pmax_; }
    int size() const { return static_cast<int>(values_.size()); }
    const std::vector<double>& values() const { return values_; }

  private:
    std::vector<double> values_;
    double pmin_ = 0.0, pmax_ = 0.0;
};

/// sum_x |f(x)|^p(x) w(x)
double modular(const DiscreteMeasure& mu, const ExponentFunction& p, const GridFunction& f);

/// inf{ t > 0 : modular(f / t) <= 1 }, by bisection on the strictly
/// decreasing map t -> modular(f/t); 0 exactly when f vanishes on supp mu.
double luxemburg_norm(const DiscreteMeasure& mu, const ExponentFunction& p, const GridFunction& f);

/// Closed-form constant-exponent norm; p = infinity gives the sup norm
/// over supp mu.
double lp_norm(const DiscreteMeasure& mu, double p, const GridFunction& f);

struct CharBallBound {
    double lhs = 0.0;       // ||chi_B||_{p(.)}
    double rhs = 0.0;       // worst mu(B)^{1/p(x)} over x in B
    double margin = 0.0;    // lhs - rhs
    bool holds = false;     // lhs >= rhs (candidate constant 1)
    int worst_node = -1;
};

/// Probes ||chi_B|| >= mu(B)^{1/p(x)} for every member of a ball with
/// mu(B) <= 1 and reports the worst margin; the observed margin, not an
/// asserted inequality, is the deliverable.
CharBallBound char_ball_lower_bound(const DiscreteMeasure& mu, const ExponentFunction& p, const Ball& ball);

/// q(x) from 1/q(x) = 1/p - alpha/n(x); rejects nodes with p >= n(x)/alpha.
ExponentFunction hls_exponent(double p, double alpha, const std::vector<double>& nfield);

struct EmbeddingCheck {
    bool ok = false;
    double constant = 0.0;  // fitted C with ||f||_p <= C ||f||_q over the family
    int worst_index = -1;
};

EmbeddingCheck embedding_check(const DiscreteMeasure& mu, const ExponentFunction& p, const ExponentFunction& q,
                               const std::vector<GridFunction>& family);

}  // namespace rzp
