#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "lebesgue.hpp"
#include "measure.hpp"
#include "space.hpp"

namespace rzp {

/// Kernel family for the potential operators. All kernels are functions of
/// d = dist(x, y) and, where noted, of mu(B(x, d)):
///   general:       d^alpha / lambda(x, d)
///   dim-power:     d^(alpha - Q)
///   one-minus:     d^(gamma - 1)
///   measure-power: mu(B(x,d))^(gamma - 1)
///   measure-ratio: d^alpha / mu(B(x,d))
///   variable-dim:  d^(alpha - n(x))
struct KernelSpec {
    enum class Kind { General, DimPower, OneMinus, MeasurePower, MeasureRatio, VariableDim };

    Kind kind = Kind::DimPower;
    double order = 0.0;  // alpha or gamma
    double dim_q = 0.0;  // Q for dim-power
    const DominatingFunction* lambda = nullptr;
    std::shared_ptr<const std::vector<double>> nfield;

    // factories validate order constraints; general certifies that lambda
    // is of lower type strictly greater than alpha on sampled nodes
    static KernelSpec general(double alpha, const DominatingFunction& lam, const QuasiMetricSpace& s);
    static KernelSpec dim_power(double alpha, double Q);
    static KernelSpec one_minus(double gamma);
    static KernelSpec measure_power(double gamma);
    static KernelSpec measure_ratio(double alpha);
    static KernelSpec variable_dim(double alpha, std::shared_ptr<const std::vector<double>> nfield);
};

/// (If)(x) = sum_{y != x} kernel(x,y) f(y) w(y); the singular diagonal is
/// excluded and each row is accumulated in node order with compensation,
/// so outputs are identical for any worker count.
GridFunction potential(const BallOracle& oracle, const KernelSpec& ks, const GridFunction& f);

/// Hardy-Littlewood maximal average over the canonical radii.
GridFunction maximal_standard(const BallOracle& oracle, const GridFunction& f);

/// Same numerator with the measure of the 3*k1-times larger ball in the
/// denominator; pointwise below maximal_standard.
GridFunction maximal_modified(const BallOracle& oracle, const GridFunction& f);

/// Omega(x) = max_r mu(B(x,r)) / lambda(x,r) over canonical radii; <= 1
/// exactly when the upper-doubling check passes on the same samples.
GridFunction omega(const BallOracle& oracle, const DominatingFunction& lam);

}  // namespace rzp
