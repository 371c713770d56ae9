#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "ptx/spde.hpp"
#include "ptx/taylor.hpp"

using namespace ptx;

namespace {

/// u(t, omega) = omega_t^2; the order-2 expansion reproduces it exactly on the grid.
class SquareFunctional : public PathFunctional {
  public:
    std::string name() const override { return "square"; }
    int driver_dim() const override { return 1; }
    int max_order() const override { return 8; }
    double derivative(const TemporalIndex& theta, double t,
                      const SamplePath& path) const override {
        check_query(theta, t, path);
        const double b = path.value_at(0, t);
        if (theta.order() == 0) return b * b;
        if (theta.entries() == std::vector<int>{1}) return 2.0 * b;
        if (theta.entries() == std::vector<int>{1, 1}) return 2.0;
        return 0.0;
    }
};

}  // namespace

TEST_CASE("linear and quadratic path monomials expand exactly") {
    const TimeGrid grid(1.0, 256);
    const SamplePath path = simulate_path(grid, 1, 13);
    const CoordinateFunctional coord;
    const SquareFunctional square;
    for (double delta : {0.25, -0.25}) {
        ExpansionQuery q;
        q.t = 0.5;
        q.delta = delta;
        q.m = 1;
        CHECK(std::abs(expand(coord, path, q).remainder) <= 1e-13);
        q.m = 2;
        CHECK(std::abs(expand(coord, path, q).remainder) <= 1e-13);
        CHECK(std::abs(expand(square, path, q).remainder) <= 1e-12);
    }
}

TEST_CASE("expansion query validation") {
    const TimeGrid grid(1.0, 256);
    const SamplePath path = simulate_path(grid, 1, 13);
    const CoordinateFunctional coord;
    ExpansionQuery q;
    q.t = 0.5;
    q.delta = 0.25;
    q.m = 5;  // above the default order cap
    CHECK_THROWS_AS(expand(coord, path, q), QueryError);
    q.m = 1;
    q.delta = 0.0;
    CHECK_THROWS_AS(expand(coord, path, q), QueryError);
    q.delta = 2.0 * grid.dt();  // below the 10-step floor
    CHECK_THROWS_AS(expand(coord, path, q), QueryError);
    q.delta = 0.2502;  // off-grid offset
    CHECK_THROWS_AS(expand(coord, path, q), QueryError);
}

TEST_CASE("term table follows the canonical index order") {
    const TimeGrid grid(1.0, 256);
    const SamplePath path = simulate_path(grid, 1, 19);
    const auto u = make_path_functional("markovian:sin");
    ExpansionQuery q;
    q.t = 0.5;
    q.delta = 0.125;
    q.m = 2;
    const ExpansionResult res = expand(*u, path, q);
    REQUIRE(res.terms.size() == 4);
    CHECK(res.terms[0].index.theta.order() == 0);
    CHECK(res.terms[0].integral == 1.0);
    CHECK(res.terms[1].index.theta.entries() == std::vector<int>{1});
    CHECK(res.terms[1].integral ==
          doctest::Approx(path.value_at(0, 0.625) - path.value_at(0, 0.5)));
    CHECK(res.terms[2].index.theta.entries() == std::vector<int>{0});
    CHECK(res.terms[2].integral == doctest::Approx(0.125));
    CHECK(res.terms[3].index.theta.entries() == std::vector<int>{1, 1});
    CHECK(res.remainder == doctest::Approx(res.actual - res.predicted));
}

TEST_CASE("second-order variants: split equals full, symmetrizing drops the area") {
    const TimeGrid grid(1.0, 256);
    const SamplePath path = simulate_path(grid, 2, 43);
    const auto area = make_path_functional("area");
    ExpansionQuery q;
    q.t = 0.5;
    q.delta = 0.25;
    q.m = 2;
    const auto full = expand_second_order(*area, path, q, SecondOrderVariant::full);
    const auto split = expand_second_order(*area, path, q, SecondOrderVariant::levy_split);
    const auto sym = expand_second_order(*area, path, q, SecondOrderVariant::symmetrized);
    CHECK(full.predicted == doctest::Approx(split.predicted).epsilon(1e-13));
    CHECK(full.predicted == doctest::Approx(expand(*area, path, q).predicted));
    const Step2Signature sig = step2_signature(path, 0.5, 0.75);
    // The only asymmetric Hessian entry is D^{(2,1)} = 1, so the symmetrized route
    // loses exactly half the Lévy area of that pair.
    CHECK(full.predicted - sym.predicted == doctest::Approx(0.5 * sig.area(1, 0)));
    q.m = 1;
    CHECK_THROWS_AS(expand_second_order(*area, path, q, SecondOrderVariant::full),
                    QueryError);
}

TEST_CASE("remainder representations vanish identically for the coordinate path") {
    const TimeGrid grid(1.0, 256);
    const SamplePath path = simulate_path(grid, 1, 47);
    const CoordinateFunctional coord;
    for (double delta : {0.25, -0.25}) {
        for (int m : {1, 2}) {
            ExpansionQuery q;
            q.t = 0.5;
            q.delta = delta;
            q.m = m;
            CHECK(std::abs(remainder_via_representation(
                      coord, path, q, RemainderRepresentation::full)) <= 1e-12);
            CHECK(std::abs(remainder_via_representation(
                      coord, path, q, RemainderRepresentation::hoelder)) <= 1e-12);
        }
    }
}

TEST_CASE("representation oracle converges for a smooth functional") {
    const TimeGrid grid(1.0, 128);
    const auto u = make_path_functional("markovian:sin");
    for (const auto variant :
         {RemainderRepresentation::full, RemainderRepresentation::hoelder}) {
        double coarse2 = 0.0, fine2 = 0.0;
        for (int j = 0; j < 6; ++j) {
            const SamplePath path = simulate_path(grid, 1, mix_seed(53, j));
            const SamplePath refined = refine_path(path, 4);
            auto gap = [&](const SamplePath& p) {
                ExpansionQuery q;
                q.t = 0.4375;
                q.delta = 0.125;
                q.m = 1;
                return expand(*u, p, q).remainder -
                       remainder_via_representation(*u, p, q, variant);
            };
            const double rc = gap(path);
            const double rf = gap(refined);
            coarse2 += rc * rc;
            fine2 += rf * rf;
        }
        CHECK(std::sqrt(coarse2) > 2.0 * std::sqrt(fine2));
    }
}

TEST_CASE("gauss-legendre nodes integrate high-degree monomials") {
    std::vector<double> nodes, weights;
    gauss_legendre_unit(4, nodes, weights);
    REQUIRE(nodes.size() == 4);
    double wsum = 0.0, x7 = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        wsum += weights[i];
        x7 += weights[i] * std::pow(nodes[i], 7);
    }
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(x7 == doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("field expansion and recursion") {
    const TimeGrid grid(1.0, 256);
    const SamplePath path = simulate_path(grid, 1, 59);
    const auto poly = make_random_field("transport:poly2");
    ExpansionQuery q;
    q.t = 0.5;
    q.delta = 0.125;
    q.m = 2;
    q.x = {0.2};
    q.h = {0.3};
    const ExpansionResult res = expand_field(*poly, path, q);
    REQUIRE(res.terms.size() == 7);
    // Quadratic profile, second order: spatial remainder at h is entirely temporal.
    CHECK(res.actual == doctest::Approx(poly->evaluate(0.625, std::vector<double>{0.5}, path)));
    CHECK(std::abs(field_remainder_recursion_residual(*poly, path, q)) <= 1e-10);
    q.m = 1;
    CHECK(std::abs(field_remainder_recursion_residual(*poly, path, q)) <= 1e-10);

    const auto trig = make_random_field("transport:sin");
    q.m = 2;
    q.quadrature_order = 2;
    const double lo = std::abs(field_remainder_recursion_residual(*trig, path, q));
    q.quadrature_order = 8;
    const double hi = std::abs(field_remainder_recursion_residual(*trig, path, q));
    CHECK(hi <= lo + 1e-15);
}

TEST_CASE("spde coefficient algebra on the multiplicative case") {
    const TimeGrid grid(1.0, 256);
    const SamplePath path = simulate_path(grid, 1, 67);
    const auto [coeffs, field] = make_spde_case("multiplicative");
    const std::vector<double> x{0.2};
    const auto dc = derive_coefficients(*coeffs, *field, 0.5, x, path);
    const double u = field->evaluate(0.5, x, path);
    CHECK(dc.t_u == 0.0);
    CHECK(dc.omega_u[0] == doctest::Approx(u));
    // g = y: second path derivative is u again, mixed derivative is u_x.
    CHECK(dc.omega_omega_u(0, 0) == doctest::Approx(u));
    CHECK(dc.x_omega_u(0, 0) ==
          doctest::Approx(field->derivative(TemporalIndex::empty(1), SpatialIndex({1}),
                                            0.5, x, path)));
    CHECK(dc.ito_drift == doctest::Approx(0.5 * u));
}

TEST_CASE("six-tuple routes agree on the catalog and reject mismatched pairs") {
    const TimeGrid grid(1.0, 256);
    const SamplePath path = simulate_path(grid, 1, 71);
    for (const auto& name : spde_case_names()) {
        const auto [coeffs, field] = make_spde_case(name);
        CHECK_NOTHROW(six_tuple(*coeffs, *field, 0.5, 0.2, path));
    }
    const auto heat = make_spde_case("heat-deterministic").first;
    const auto transport_field = make_spde_case("transport:sin").second;
    CHECK_THROWS_AS(six_tuple(*heat, *transport_field, 0.5, 0.2, path), ConsistencyError);
}

TEST_CASE("parabolicity read-off") {
    CoefficientProbe probe;
    probe.t = 0.5;
    probe.x = {0.2};
    probe.y = 0.1;
    probe.z = {0.3};
    probe.gamma = Mat(1, 1);
    probe.gamma(0, 0) = -0.4;
    const auto heat = make_spde_case("heat-deterministic").first;
    const auto [m, psd] = parabolicity(*heat, probe);
    CHECK(m(0, 0) == doctest::Approx(0.5));
    CHECK(psd);
}

TEST_CASE("spde expansion equals the field expansion term by term") {
    const TimeGrid grid(1.0, 256);
    const SamplePath path = simulate_path(grid, 1, 73);
    const auto [coeffs, field] = make_spde_case("transport:gauss");
    ExpansionQuery q;
    q.t = 0.5;
    q.delta = -0.125;
    q.m = 2;
    q.x = {-0.1};
    q.h = {0.2};
    const auto a = spde_expand(*coeffs, *field, path, q);
    const auto b = expand_field(*field, path, q);
    REQUIRE(a.terms.size() == b.terms.size());
    for (std::size_t i = 0; i < a.terms.size(); ++i) {
        CHECK(a.terms[i].index == b.terms[i].index);
        CHECK(a.terms[i].contribution() ==
              doctest::Approx(b.terms[i].contribution()).epsilon(1e-10));
    }
    CHECK(a.predicted == doctest::Approx(b.predicted).epsilon(1e-12));
}
