#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "ptx/functionals.hpp"

using namespace ptx;

namespace {

/// Deterministic admissible path for frozen-value checks.
SamplePath ramp_path(const TimeGrid& grid, int dim, double slope) {
    std::vector<double> values(static_cast<std::size_t>(dim) * (grid.step_count() + 1));
    for (int i = 0; i < dim; ++i)
        for (int k = 0; k <= grid.step_count(); ++k)
            values[static_cast<std::size_t>(i) * (grid.step_count() + 1) + k] =
                slope * (i + 1) * grid.node(k);
    return SamplePath(grid, dim, 0, std::move(values));
}

}  // namespace

TEST_CASE("markovian:sin derivative table") {
    const TimeGrid grid(1.0, 64);
    const SamplePath path = ramp_path(grid, 1, 0.5);
    const auto u = make_path_functional("markovian:sin");
    const double t = 0.5;
    const double arg = 0.7 * t + 1.3 * path.value_at(0, t) + 0.4;
    CHECK(u->evaluate(t, path) == doctest::Approx(std::sin(arg)));
    CHECK(u->derivative(TemporalIndex({1}, 1), t, path) ==
          doctest::Approx(1.3 * std::cos(arg)));
    CHECK(u->derivative(TemporalIndex({0}, 1), t, path) ==
          doctest::Approx(0.7 * std::cos(arg)));
    CHECK(u->derivative(TemporalIndex({0, 1}, 1), t, path) ==
          doctest::Approx(-0.7 * 1.3 * std::sin(arg)));
    CHECK(u->derivative(TemporalIndex({1, 1, 1}, 1), t, path) ==
          doctest::Approx(-std::pow(1.3, 3) * std::cos(arg)));
}

TEST_CASE("drift functional: table, prefix binding, noncommutativity") {
    const TimeGrid grid(1.0, 128);
    const SamplePath path = simulate_path(grid, 1, 17);
    const auto u = make_path_functional("drift");
    CHECK(u->derivative(TemporalIndex({0}, 1), 0.5, path) ==
          doctest::Approx(path.value_at(0, 0.5)));
    CHECK(u->derivative(TemporalIndex({1, 0}, 1), 0.5, path) == 1.0);
    CHECK(u->derivative(TemporalIndex({0, 1}, 1), 0.5, path) == 0.0);  // order matters
    CHECK(u->derivative(TemporalIndex({1}, 1), 0.5, path) == 0.0);
    const auto bound = u->bind(path);
    for (double t : {0.25, 0.5, 0.875})
        CHECK(bound->evaluate(t) == doctest::Approx(u->evaluate(t, path)).epsilon(1e-14));
}

TEST_CASE("area functionals carry an asymmetric second derivative") {
    const TimeGrid grid(1.0, 128);
    const SamplePath path = simulate_path(grid, 2, 23);
    const auto area = make_path_functional("area");
    CHECK(area->derivative(TemporalIndex({2, 1}, 2), 0.5, path) == 1.0);
    CHECK(area->derivative(TemporalIndex({1, 2}, 2), 0.5, path) == 0.0);
    CHECK(area->derivative(TemporalIndex({1}, 2), 0.5, path) ==
          doctest::Approx(path.value_at(1, 0.5)));

    const auto asin_u = make_path_functional("area:sin");
    const double b2 = path.value_at(1, 0.5);
    CHECK(asin_u->derivative(TemporalIndex({1}, 2), 0.5, path) ==
          doctest::Approx(std::sin(b2)));
    CHECK(asin_u->derivative(TemporalIndex({2, 1}, 2), 0.5, path) ==
          doctest::Approx(std::cos(b2)));
    CHECK(asin_u->derivative(TemporalIndex({2, 2, 1}, 2), 0.5, path) ==
          doctest::Approx(-std::sin(b2)));
    CHECK(asin_u->derivative(TemporalIndex({1, 2}, 2), 0.5, path) == 0.0);
    CHECK(asin_u->derivative(TemporalIndex({0}, 2), 0.5, path) == 0.0);
}

TEST_CASE("cylindrical couples to the gap past the pin") {
    const TimeGrid grid(1.0, 64);  // pin 0.125 is node 8
    const SamplePath path = simulate_path(grid, 1, 29);
    const auto u = make_path_functional("cylindrical");
    const double before = 0.0625, after = 0.5;
    const double a1 = 0.8, a2 = 1.1;
    const double zeta_b = a2 * path.value_at(0, before);
    CHECK(u->evaluate(before, path) == doctest::Approx(std::sin(zeta_b)));
    CHECK(u->derivative(TemporalIndex({1}, 1), before, path) ==
          doctest::Approx(a2 * std::cos(zeta_b)));
    CHECK(u->derivative(TemporalIndex({1, 1}, 1), before, path) ==
          doctest::Approx(-a2 * a2 * std::sin(zeta_b)));

    const double gap = path.value_at(0, after) - path.value_at(0, 0.125);
    const double zeta_a = a2 * path.value_at(0, after) + a1 * gap * gap;
    const double psi = a2 + 2.0 * a1 * gap;
    CHECK(u->evaluate(after, path) == doctest::Approx(std::sin(zeta_a)));
    CHECK(u->derivative(TemporalIndex({1}, 1), after, path) ==
          doctest::Approx(psi * std::cos(zeta_a)));
    CHECK(u->derivative(TemporalIndex({1, 1}, 1), after, path) ==
          doctest::Approx(-psi * psi * std::sin(zeta_a) + 2.0 * a1 * std::cos(zeta_a)));
    CHECK(u->derivative(TemporalIndex({1, 1, 1}, 1), after, path) ==
          doctest::Approx(-psi * psi * psi * std::cos(zeta_a) -
                          6.0 * a1 * psi * std::sin(zeta_a)));
    CHECK(u->derivative(TemporalIndex({0}, 1), after, path) == 0.0);

    // The first path derivative is continuous across the pin: just past it the gap is
    // tiny and psi is close to a2.
    const double eps = grid.dt();
    const double d_before = u->derivative(TemporalIndex({1}, 1), 0.125, path);
    const double d_after = u->derivative(TemporalIndex({1}, 1), 0.125 + eps, path);
    CHECK(std::abs(d_before - d_after) < 1.0 * std::sqrt(eps));
}

TEST_CASE("field catalog closed forms") {
    const TimeGrid grid(1.0, 64);
    const SamplePath path = ramp_path(grid, 1, 0.25);
    const std::vector<double> x{0.3};
    const double b = path.value_at(0, 0.5);

    const auto gauss = make_random_field("transport:gauss");
    const double y = 0.3 + b;
    CHECK(gauss->evaluate(0.5, x, path) == doctest::Approx(std::exp(-0.5 * y * y)));
    CHECK(gauss->derivative(TemporalIndex::empty(1), SpatialIndex({2}), 0.5, x, path) ==
          doctest::Approx((y * y - 1.0) * std::exp(-0.5 * y * y)));
    CHECK(gauss->derivative(TemporalIndex({1}, 1), SpatialIndex({1}), 0.5, x, path) ==
          doctest::Approx((y * y - 1.0) * std::exp(-0.5 * y * y)));
    CHECK(gauss->derivative(TemporalIndex({0}, 1), SpatialIndex({0}), 0.5, x, path) == 0.0);

    const auto mult = make_random_field("multiplicative");
    CHECK(mult->evaluate(0.5, x, path) == doctest::Approx(std::sin(0.6) * std::exp(b)));
    CHECK(mult->derivative(TemporalIndex({1, 1}, 1), SpatialIndex({1}), 0.5, x, path) ==
          doctest::Approx(std::cos(0.6) * std::exp(b)));

    const auto heat = make_random_field("heat-deterministic");
    CHECK(heat->evaluate(0.5, x, path) ==
          doctest::Approx(std::exp(-0.25) * std::sin(0.3)));
    CHECK(heat->derivative(TemporalIndex({0}, 1), SpatialIndex({0}), 0.5, x, path) ==
          doctest::Approx(-0.5 * std::exp(-0.25) * std::sin(0.3)));
    CHECK(heat->derivative(TemporalIndex({1}, 1), SpatialIndex({0}), 0.5, x, path) == 0.0);
}

TEST_CASE("derived functionals compose indices innermost-last") {
    const TimeGrid grid(1.0, 64);
    const SamplePath path = simulate_path(grid, 1, 41);
    const auto drift = make_path_functional("drift");
    const DerivedFunctional d1(drift, TemporalIndex({0}, 1));
    // D^{(1)} of (time derivative of drift) = D^{(1,0)} drift = 1.
    CHECK(d1.derivative(TemporalIndex({1}, 1), 0.5, path) == 1.0);
    CHECK(d1.derivative(TemporalIndex::empty(1), 0.5, path) ==
          doctest::Approx(path.value_at(0, 0.5)));
    CHECK(d1.max_order() == drift->max_order() - 2);
}

TEST_CASE("functional reconstruction residual shrinks under refinement") {
    const TimeGrid grid(1.0, 128);
    const auto u = make_path_functional("markovian:sin");
    double coarse2 = 0.0, fine2 = 0.0;
    for (int j = 0; j < 6; ++j) {
        const SamplePath path = simulate_path(grid, 1, mix_seed(61, j));
        const SamplePath refined = refine_path(path, 4);
        const double rc = functional_ito_residual(*u, path, 0.75);
        const double rf = functional_ito_residual(*u, refined, 0.75);
        coarse2 += rc * rc;
        fine2 += rf * rf;
    }
    CHECK(std::sqrt(coarse2) > 2.0 * std::sqrt(fine2));
}

TEST_CASE("chain rule residual validates the probe location") {
    const TimeGrid grid(1.0, 64);
    const SamplePath path = simulate_path(grid, 1, 71);
    const auto field = make_random_field("transport:sin");
    std::vector<std::shared_ptr<const PathFunctional>> inner{
        std::make_shared<CoordinateFunctional>()};
    CHECK_THROWS_AS(chain_rule_residual(*field, inner, path, 0.0), QueryError);
    CHECK_THROWS_AS(chain_rule_residual(*field, inner, path, 1.0), QueryError);
    const auto r = chain_rule_residual(*field, inner, path, 0.5);
    CHECK(std::isfinite(r.first));
    CHECK(std::isfinite(r.second));
}

TEST_CASE("catalog guards") {
    const TimeGrid grid(1.0, 64);
    const SamplePath path = simulate_path(grid, 1, 3);
    CHECK_THROWS_AS(make_path_functional("nope"), ConfigError);
    CHECK_THROWS_AS(make_random_field("nope"), ConfigError);
    const auto u = make_path_functional("markovian:sin");
    CHECK_THROWS_AS(u->derivative(TemporalIndex(std::vector<int>(9, 1), 1), 0.5, path),
                    CapabilityError);
    CHECK_THROWS_AS(u->evaluate(0.512345, path), QueryError);  // off-grid time
    const SamplePath wide = simulate_path(grid, 2, 3);
    CHECK_THROWS_AS(u->evaluate(0.5, wide), QueryError);
}
