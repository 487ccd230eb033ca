#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "common.hpp"
#include "doctest.h"
#include "measure.hpp"
#include "space.hpp"

using nlohmann::json;
using namespace rzp;

namespace {

DiscreteMeasure uniform_mass(const QuasiMetricSpace& s, double total = 1.0) {
    return DiscreteMeasure::from_weights(
        std::vector<double>(static_cast<std::size_t>(s.size()), total / static_cast<double>(s.size())));
}

// brute-force oracle for mu(B(x,r)) with open balls
double oracle_ball_mass(const QuasiMetricSpace& s, const DiscreteMeasure& mu, int x, double r) {
    double m = 0.0;
    for (int y = 0; y < s.size(); ++y)
        if (s.dist(x, y) < r) m += mu.weights[static_cast<std::size_t>(y)];
    return m;
}

// independent log-log regression for the scaling exponent
double oracle_ahlfors_slope(const QuasiMetricSpace& s, const DiscreteMeasure& mu, double lo, double hi) {
    double sxx = 0, sx = 0, sy = 0, sxy = 0, m = 0;
    for (int x = 0; x < s.size(); ++x)
        for (double r : s.canonical_radii()) {
            if (r < lo || r > hi) continue;
            double mass = oracle_ball_mass(s, mu, x, r);
            if (!(mass > 0)) continue;
            double lx = std::log(r), ly = std::log(mass);
            sxx += lx * lx;
            sx += lx;
            sy += ly;
            sxy += lx * ly;
            m += 1;
        }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace

TEST_CASE("measure construction") {
    CHECK_THROWS_AS(DiscreteMeasure::from_weights({1.0, -0.5}), precondition_error);
    auto m = DiscreteMeasure::from_weights({0.25, 0.5, 0.25});
    CHECK(m.total == doctest::Approx(1.0));
}

TEST_CASE("ball masses") {
    auto s = QuasiMetricSpace::build(json{{"kind", "grid1d"}, {"n", 11}});
    auto mu = uniform_mass(s);
    BallOracle oracle(s, mu);
    SUBCASE("whole space bitwise equals the total") {
        CHECK(oracle.ball_mass(4, s.r0() * 2.0) == mu.total);
    }
    SUBCASE("open window") {
        CHECK(oracle.ball_mass(5, 0.25) == doctest::Approx(5.0 / 11.0));
        CHECK(oracle.ball_mass(5, 0.25) == doctest::Approx(oracle_ball_mass(s, mu, 5, 0.25)));
    }
    SUBCASE("zero measure") {
        auto zero = DiscreteMeasure::from_weights(std::vector<double>(11, 0.0));
        BallOracle oz(s, zero);
        CHECK(oz.ball_mass(5, 0.3) == 0.0);
    }
    SUBCASE("pairwise masses match pointwise lookups") {
        std::vector<double> masses;
        oracle.pair_ball_masses(5, masses);
        for (int y = 0; y < s.size(); ++y) {
            if (y == 5) continue;
            CHECK(masses[static_cast<std::size_t>(y)] == oracle.ball_mass(5, s.dist(5, y)));
        }
    }
}

TEST_CASE("upper doubling checks") {
    auto s = QuasiMetricSpace::build(json{{"kind", "grid1d"}, {"n", 101}});
    // density-1 quadrature weights
    auto mu = DiscreteMeasure::from_weights(std::vector<double>(101, 0.01));
    BallOracle oracle(s, mu);
    SUBCASE("ball-measure form holds with constant one") {
        auto mu_pos = uniform_mass(s);
        BallOracle o2(s, mu_pos);
        auto lam = DominatingFunction::ball_measure(o2);
        auto rep = check_upper_doubling(o2, lam);
        CHECK(rep.holds);
        CHECK(rep.best_constant == doctest::Approx(1.0));
    }
    SUBCASE("twice the radius dominates a unit-density segment") {
        auto lam = DominatingFunction::power(s, 2.0, 1.0);
        auto rep = check_upper_doubling(oracle, lam);
        CHECK(rep.holds);
        // oracle: exhaustive scan of the same ratio
        double best = 0.0;
        for (int x = 0; x < s.size(); ++x)
            for (double r : s.canonical_radii()) best = std::max(best, oracle_ball_mass(s, mu, x, r) / (2.0 * r));
        CHECK(rep.best_constant == doctest::Approx(best));
    }
    SUBCASE("too small a majorant fails with a witness") {
        auto lam = DominatingFunction::power(s, 0.5, 1.0);
        auto rep = check_upper_doubling(oracle, lam);
        CHECK(!rep.holds);
        CHECK(rep.witness_node >= 0);
        CHECK(rep.best_constant > 1.0);
    }
}

TEST_CASE("doubling constant estimation") {
    SUBCASE("single node") {
        auto s = QuasiMetricSpace::build(json{{"kind", "grid1d"}, {"n", 1}});
        auto mu = DiscreteMeasure::from_weights({1.0});
        BallOracle oracle(s, mu);
        auto rep = estimate_doubling_constant(oracle);
        CHECK(rep.holds);
        CHECK(rep.best_constant == doctest::Approx(1.0));
    }
    SUBCASE("uniform grid stays near two") {
        auto s = QuasiMetricSpace::build(json{{"kind", "grid1d"}, {"n", 65}});
        auto mu = uniform_mass(s);
        BallOracle oracle(s, mu);
        auto rep = estimate_doubling_constant(oracle);
        CHECK(rep.holds);
        double best = 0.0;
        for (int x = 0; x < s.size(); ++x)
            for (double r : s.canonical_radii()) {
                double m1 = oracle_ball_mass(s, mu, x, r);
                if (m1 > 0) best = std::max(best, oracle_ball_mass(s, mu, x, 2 * r) / m1);
            }
        CHECK(rep.best_constant == doctest::Approx(best));
        CHECK(rep.best_constant <= 3.2);
    }
    SUBCASE("mass concentrated on one of two nodes") {
        auto s = QuasiMetricSpace::build(json{{"kind", "grid1d"}, {"n", 2}});
        auto mu = DiscreteMeasure::from_weights({1.0, 0.0});
        BallOracle oracle(s, mu);
        auto rep = estimate_doubling_constant(oracle);
        // the gap straddle shows up as a flagged zero-mass ball at the
        // uncharged node, not as a ratio
        CHECK(!rep.flagged.empty());
        CHECK(rep.flagged.front().first == 1);
    }
}

TEST_CASE("ahlfors fits") {
    SUBCASE("unit segment") {
        auto s = QuasiMetricSpace::build(json{{"kind", "grid1d"}, {"n", 1024}});
        auto mu = DiscreteMeasure::from_spec(json{{"kind", "quadrature"}}, s);
        BallOracle oracle(s, mu);
        auto fit = ahlfors_fit(oracle);
        CHECK(std::abs(fit.Q - 1.0) <= 0.1);
        double slope = oracle_ahlfors_slope(s, mu, 2.0 * s.min_positive_distance(), 0.125 * s.r0());
        CHECK(fit.Q == doctest::Approx(slope));
    }
    SUBCASE("cantor dust with its natural mass") {
        auto s = QuasiMetricSpace::build(json{{"kind", "cantor"}, {"generation", 7}});
        auto mu = DiscreteMeasure::from_spec(json{{"kind", "quadrature"}}, s);
        BallOracle oracle(s, mu);
        auto fit = ahlfors_fit(oracle);
        CHECK(std::abs(fit.Q - std::log(2.0) / std::log(3.0)) <= 0.05);
    }
    SUBCASE("unit square") {
        auto s = QuasiMetricSpace::build(json{{"kind", "grid2d"}, {"side", 33}});
        auto mu = DiscreteMeasure::from_spec(json{{"kind", "quadrature"}}, s);
        BallOracle oracle(s, mu);
        auto fit = ahlfors_fit(oracle);
        CHECK(std::abs(fit.Q - 2.0) <= 0.1);
    }
    SUBCASE("slope is scale invariant") {
        auto s = QuasiMetricSpace::build(json{{"kind", "grid1d"}, {"n", 64}});
        auto mu = uniform_mass(s);
        std::vector<double> scaled = mu.weights;
        for (auto& w : scaled) w *= 3.7;
        auto mu2 = DiscreteMeasure::from_weights(scaled);
        BallOracle o1(s, mu), o2(s, mu2);
        CHECK(ahlfors_fit(o1).Q == doctest::Approx(ahlfors_fit(o2).Q).epsilon(1e-9));
    }
}

TEST_CASE("lower type checks") {
    auto s = QuasiMetricSpace::build(json{{"kind", "grid1d"}, {"n", 33}});
    SUBCASE("r^2 is of lower type 1 with constant 1") {
        auto lam = DominatingFunction::power(s, 1.0, 2.0);
        auto rep = lower_type_check(lam, s, 0, 1.0);
        CHECK(rep.holds);
        CHECK(rep.best_constant == doctest::Approx(1.0));
    }
    SUBCASE("r is not of lower type 2") {
        auto lam = DominatingFunction::power(s, 1.0, 1.0);
        auto rep = lower_type_check(lam, s, 0, 2.0);
        CHECK(!rep.holds);
        CHECK(rep.best_constant > 10.0);
    }
    SUBCASE("variable exponent field") {
        std::vector<double> nf(33, 1.0);
        for (int i = 16; i < 33; ++i) nf[static_cast<std::size_t>(i)] = 2.0;
        auto lam = DominatingFunction::power_field(s, 1.0, nf);
        CHECK(lower_type_check(lam, s, 0, 0.5).holds);
        CHECK(lower_type_check(lam, s, 20, 0.5).holds);
        CHECK(!lower_type_check(lam, s, 0, 1.5).holds);   // n(x) = 1 here
        CHECK(lower_type_check(lam, s, 20, 1.5).holds);   // n(x) = 2 here
    }
    SUBCASE("pair scan and direct scan agree") {
        auto lam = DominatingFunction::power(s, 2.0, 1.5);
        for (double alpha : {0.5, 1.0, 1.5, 2.0}) {
            auto a = lower_type_check(lam, s, 3, alpha, 1.25);
            auto b = lower_type_direct_scan(lam, s, 3, alpha, 1.25);
            CHECK(a.holds == b.holds);
        }
    }
}

TEST_CASE("power form constants") {
    auto s = QuasiMetricSpace::build(json{{"kind", "grid1d"}, {"n", 17}});
    for (double n : {0.5, 1.0, 2.0}) {
        auto lam = DominatingFunction::power(s, 3.0, n);
        CHECK(lam.doubling_constant() == doctest::Approx(std::pow(2.0, n)).epsilon(1e-9));
        for (double a : {0.25 * n, 0.5 * n, n}) {
            auto rep = lower_type_check(lam, s, 0, a);
            CHECK(rep.holds);
            CHECK(rep.best_constant == doctest::Approx(1.0));
        }
    }
    SUBCASE("declared doubling constant is verified") {
        CHECK_THROWS_AS(DominatingFunction::power(s, 1.0, 1.0, 1.9), precondition_error);
        CHECK_NOTHROW(DominatingFunction::power(s, 1.0, 1.0, 2.0));
    }
}

TEST_CASE("atom scan") {
    auto s = QuasiMetricSpace::build(json{{"kind", "grid1d"}, {"n", 16}});
    SUBCASE("a unit atom is flagged") {
        std::vector<double> w(16, 0.0);
        w[7] = 1.0;
        auto mu = DiscreteMeasure::from_weights(w);
        auto lam = DominatingFunction::power(s, 1.0, 1.0);
        auto flags = atom_scan(s, mu, lam);
        REQUIRE(flags.size() == 1);
        CHECK(flags[0].first == 7);
    }
    SUBCASE("uniform quadrature weights pass") {
        auto mu = uniform_mass(s);
        auto lam = DominatingFunction::power(s, 2.0, 1.0);
        CHECK(atom_scan(s, mu, lam).empty());
    }
    SUBCASE("the ball-measure form never flags") {
        auto mu = uniform_mass(s);
        BallOracle oracle(s, mu);
        auto lam = DominatingFunction::ball_measure(oracle);
        CHECK(atom_scan(s, mu, lam).empty());
    }
}

TEST_CASE("comparable centers") {
    auto s = QuasiMetricSpace::build(json{{"kind", "grid1d"}, {"n", 33}});
    auto lam = DominatingFunction::power(s, 2.0, 1.0);
    auto rep = comparable_center_check(s, lam);
    CHECK(rep.holds);
    CHECK(rep.best_constant == doctest::Approx(1.0));
}

TEST_CASE("tabulated form") {
    auto s = QuasiMetricSpace::build(json{{"kind", "grid1d"}, {"n", 5}});
    CHECK_NOTHROW(DominatingFunction::tabulated(s, {0.1, 0.5, 1.0}, {0.2, 0.5, 1.5}));
    CHECK_THROWS_AS(DominatingFunction::tabulated(s, {0.1, 0.5, 1.0}, {0.5, 0.2, 1.5}), precondition_error);
}

TEST_CASE("measure specs") {
    auto s = QuasiMetricSpace::build(json{{"kind", "grid1d"}, {"n", 5}});
    auto um = DiscreteMeasure::from_spec(json{{"kind", "uniform-mass"}, {"total", 2.0}}, s);
    CHECK(um.weights[0] == doctest::Approx(0.4));
    auto qm = DiscreteMeasure::from_spec(json{{"kind", "quadrature"}, {"scale", 0.5}}, s);
    CHECK(qm.weights[0] == doctest::Approx(0.125));
    auto ex = DiscreteMeasure::from_spec(json::parse("[1,2,3,4,5]"), s);
    CHECK(ex.total == doctest::Approx(15.0));
    CHECK_THROWS_AS(DiscreteMeasure::from_spec(json::parse("[1,2]"), s), parse_error);
}
