#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ptx/brownian.hpp"
#include "ptx/indices.hpp"
#include "ptx/integrals.hpp"

using namespace ptx;

TEST_CASE("time grid basics") {
    const TimeGrid grid(1.0, 8);
    CHECK(grid.dt() == doctest::Approx(0.125));
    CHECK(grid.node_index(0.375) == 3);
    CHECK(grid.is_node(0.5));
    CHECK(!grid.is_node(0.3));
    CHECK_THROWS_AS(grid.node_index(0.3), QueryError);
    CHECK_THROWS_AS(TimeGrid(1.0, 1), ConfigError);
}

TEST_CASE("path simulation is deterministic in the seed") {
    const TimeGrid grid(1.0, 64);
    const SamplePath a = simulate_path(grid, 2, 42);
    const SamplePath b = simulate_path(grid, 2, 42);
    const SamplePath c = simulate_path(grid, 2, 43);
    CHECK(a.raw_values() == b.raw_values());
    CHECK(a.raw_values() != c.raw_values());
    CHECK(a.value(0, 0) == 0.0);
    CHECK(a.value(1, 0) == 0.0);
    const auto inc = increment(a, 0.25, 0.75);
    CHECK(inc[0] == doctest::Approx(a.value_at(0, 0.75) - a.value_at(0, 0.25)));
}

TEST_CASE("bridge refinement preserves coarse nodes and midpoint law") {
    const TimeGrid grid(1.0, 32);
    double sum = 0.0, sq = 0.0;
    const int reps = 4000;
    for (int j = 0; j < reps; ++j) {
        const SamplePath coarse = simulate_path(grid, 1, mix_seed(7, j));
        const SamplePath fine = refine_path(coarse, 2);
        for (int k = 0; k <= 32; ++k)
            CHECK(fine.value(0, 2 * k) == doctest::Approx(coarse.value(0, k)).epsilon(1e-12));
        // Conditional midpoint deviation of the first step: variance dt/4.
        const double dev = fine.value(0, 1) - 0.5 * coarse.value(0, 1);
        sum += dev;
        sq += dev * dev;
    }
    const double dt = grid.dt();
    const double var = sq / reps - (sum / reps) * (sum / reps);
    CHECK(var == doctest::Approx(dt / 4.0).epsilon(0.15));
}

TEST_CASE("index enumeration counts and canonical order") {
    CHECK(enumerate_indices(0, 1, 0).size() == 1);
    CHECK(enumerate_indices(1, 1, 0).size() == 2);
    CHECK(enumerate_indices(2, 1, 0).size() == 4);
    CHECK(enumerate_indices(3, 1, 0).size() == 7);

    const auto d2 = enumerate_indices(2, 2, 0);
    const std::vector<std::vector<int>> expected = {
        {}, {1}, {2}, {0}, {1, 1}, {1, 2}, {2, 1}, {2, 2}};
    REQUIRE(d2.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i)
        CHECK(d2[i].theta.entries() == expected[i]);

    const auto mixed = enumerate_indices(1, 1, 1);
    REQUIRE(mixed.size() == 3);
    CHECK(mixed[0].theta.order() == 0);
    CHECK(mixed[0].ell.weight() == 0);
    CHECK(mixed[1].ell.weight() == 1);
    CHECK(mixed[2].theta.entries() == std::vector<int>{1});
}

TEST_CASE("index weights, monomials, and factorials") {
    const TemporalIndex theta({0, 2, 1}, 2);
    CHECK(theta.weight() == 4);
    CHECK(theta.zero_count() == 1);
    CHECK(theta.reversed().entries() == std::vector<int>{1, 2, 0});
    CHECK(theta.head() == 0);
    CHECK(theta.tail().entries() == std::vector<int>{2, 1});
    CHECK(theta.to_string() == "(0,2,1)");
    CHECK_THROWS_AS(TemporalIndex({3}, 2), ConfigError);

    const SpatialIndex ell({2, 1});
    CHECK(ell.weight() == 3);
    CHECK(ell.factorial() == doctest::Approx(2.0));
    const std::vector<double> h{0.5, 3.0};
    CHECK(monomial(h, ell) == doctest::Approx(0.75));
}

TEST_CASE("d = 1 square identity is exact on the grid") {
    const TimeGrid grid(1.0, 256);
    for (int j = 0; j < 8; ++j) {
        const SamplePath path = simulate_path(grid, 1, mix_seed(11, j));
        const GridProcess one = GridProcess::constant(grid, 1.0);
        const double lhs = iterated_integral(TemporalIndex({1, 1}, 1), one, path, 0.0, 1.0);
        const double b = path.value(0, 256);
        CHECK(lhs == doctest::Approx(0.5 * b * b).epsilon(1e-12));
    }
}

TEST_CASE("second-level signature matches the layered recursion") {
    const TimeGrid grid(1.0, 128);
    const SamplePath path = simulate_path(grid, 2, 99);
    const GridProcess one = GridProcess::constant(grid, 1.0);
    const Step2Signature sig = step2_signature(path, 0.25, 0.75);
    for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j) {
            const double lhs =
                iterated_integral(TemporalIndex({i, j}, 2), one, path, 0.25, 0.75);
            CHECK(lhs == doctest::Approx(sig.second(i - 1, j - 1)).epsilon(1e-12));
        }
    // Shuffle: symmetric part is exactly the product of increments.
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(sig.second(i, j) + sig.second(j, i) ==
                  doctest::Approx(sig.increment[i] * sig.increment[j]).epsilon(1e-12));
    CHECK(sig.area(0, 1) == doctest::Approx(-sig.area(1, 0)));
}

TEST_CASE("signed integrals follow the reversal convention") {
    const TimeGrid grid(1.0, 64);
    const SamplePath path = simulate_path(grid, 1, 5);
    const GridProcess one = GridProcess::constant(grid, 1.0);
    const double fwd = signed_integral(TemporalIndex({1}, 1), one, path, 0.25, 0.5);
    const double bwd = signed_integral(TemporalIndex({1}, 1), one, path, 0.5, 0.25);
    CHECK(fwd == doctest::Approx(path.value_at(0, 0.5) - path.value_at(0, 0.25)));
    CHECK(bwd == doctest::Approx(-fwd));
    // Even order keeps the sign and reverses the word.
    const double pair_b =
        signed_integral(TemporalIndex({1, 0}, 1), one, path, 0.5, 0.25);
    const double pair_rev =
        iterated_integral(TemporalIndex({0, 1}, 1), one, path, 0.25, 0.5);
    CHECK(pair_b == doctest::Approx(pair_rev));
    // Empty index evaluates the integrand at the first argument's node.
    GridProcess phi = one;
    phi.values[grid.node_index(0.5)] = 3.0;
    CHECK(signed_integral(TemporalIndex::empty(1), phi, path, 0.5, 0.25) == 3.0);
}

TEST_CASE("integrals over [s, t] ignore the path after t") {
    const TimeGrid grid(1.0, 64);
    const SamplePath path = simulate_path(grid, 1, 21);
    std::vector<double> tampered = path.raw_values();
    for (int k = grid.node_index(0.75) + 1; k <= 64; ++k) tampered[k] += 5.0;
    const SamplePath other(grid, 1, 21, std::move(tampered));
    const GridProcess one = GridProcess::constant(grid, 1.0);
    const TemporalIndex theta({1, 0, 1}, 1);
    CHECK(iterated_integral(theta, one, path, 0.25, 0.75) ==
          doctest::Approx(iterated_integral(theta, one, other, 0.25, 0.75)).epsilon(1e-14));
}

TEST_CASE("levy area ensemble law is resolution-stable") {
    const int reps = 4000;
    double mean1 = 0.0, sq1 = 0.0, mean2 = 0.0, sq2 = 0.0;
    const TimeGrid coarse(1.0, 128), fine(1.0, 256);
    for (int j = 0; j < reps; ++j) {
        const double a1 =
            step2_signature(simulate_path(coarse, 2, mix_seed(31, j)), 0.0, 1.0).area(0, 1);
        const double a2 =
            step2_signature(simulate_path(fine, 2, mix_seed(37, j)), 0.0, 1.0).area(0, 1);
        mean1 += a1;
        sq1 += a1 * a1;
        mean2 += a2;
        sq2 += a2 * a2;
    }
    mean1 /= reps;
    mean2 /= reps;
    const double var1 = sq1 / reps - mean1 * mean1;
    const double var2 = sq2 / reps - mean2 * mean2;
    CHECK(std::abs(mean1) <= 4.0 * std::sqrt(var1 / reps));
    CHECK(std::abs(var1 - var2) <= 0.15 * std::max(var1, var2));
}

TEST_CASE("integration by parts residual shrinks under refinement") {
    const TimeGrid grid(1.0, 128);
    const TemporalIndex theta({0, 1}, 1);
    double coarse2 = 0.0, fine2 = 0.0;
    for (int j = 0; j < 6; ++j) {
        const SamplePath path = simulate_path(grid, 1, mix_seed(51, j));
        const SamplePath refined = refine_path(path, 4);
        auto phi_of = [](const SamplePath& p) {
            const double* b = p.coordinate(0);
            return GridProcess(p.grid(),
                               std::vector<double>(b, b + p.grid().step_count() + 1));
        };
        const double rc = ibp_identity_residual(theta, phi_of(path), path, 0.25, 0.75);
        const double rf =
            ibp_identity_residual(theta, phi_of(refined), refined, 0.25, 0.75);
        coarse2 += rc * rc;
        fine2 += rf * rf;
    }
    CHECK(std::sqrt(coarse2) > 2.0 * std::sqrt(fine2));
}

TEST_CASE("error taxonomy") {
    const TimeGrid grid(1.0, 16);
    CHECK_THROWS_AS(GridProcess(grid, std::vector<double>(3, 0.0)), ConfigError);
    const SamplePath path = simulate_path(grid, 1, 1);
    const GridProcess one = GridProcess::constant(grid, 1.0);
    CHECK_THROWS_AS(stratonovich_integral(one, 2, path, 0.0, 1.0), QueryError);
    CHECK_THROWS_AS(stratonovich_integral(one, 1, path, 0.5, 0.25), QueryError);
    std::vector<double> bad(17, 0.0);
    bad[0] = 1.0;  // paths must start at the origin
    CHECK_THROWS_AS(SamplePath(grid, 1, 0, std::move(bad)), ConfigError);
}
