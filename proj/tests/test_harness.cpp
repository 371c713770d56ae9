#include <doctest.h>

#include <cmath>
#include <vector>

#include "ptx/experiments.hpp"

using namespace ptx;

namespace {

ExperimentConfig small_scaling_config() {
    ExperimentConfig cfg;
    cfg.experiment = "scaling";
    cfg.functional = "markovian:sin";
    cfg.m = 1;
    cfg.grid_n = 256;
    cfg.ensemble = 150;
    cfg.seed = 9001;
    const double dt = 1.0 / 256;
    cfg.deltas = {80 * dt, 40 * dt, 20 * dt, 10 * dt};
    cfg.stride = 64;
    return cfg;
}

}  // namespace

TEST_CASE("config json round trip and validation") {
    ExperimentConfig cfg;
    cfg.functional = "area";
    cfg.m = 2;
    cfg.seed = 77;
    cfg.deltas = {0.25, 0.125};
    const nlohmann::json j = cfg.to_json();
    const ExperimentConfig back = ExperimentConfig::from_json(j);
    CHECK(back.functional == "area");
    CHECK(back.seed == 77);
    CHECK(back.deltas == cfg.deltas);
    CHECK(j.at("code_version").get<std::string>() == code_version());

    ExperimentConfig bad;
    bad.window_lo = 0.9;
    bad.window_hi = 0.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ExperimentConfig{};
    bad.variant = "mystery";
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ExperimentConfig{};
    bad.p = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("default delta grid is geometric with 8 points") {
    const ExperimentConfig cfg;
    const auto deltas = cfg.delta_grid();
    REQUIRE(deltas.size() == 8);
    for (std::size_t i = 1; i < deltas.size(); ++i)
        CHECK(deltas[i] == doctest::Approx(0.5 * deltas[i - 1]));
    CHECK(deltas.front() == doctest::Approx(0.3125));
}

TEST_CASE("ols fit recovers an exact line") {
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    const std::vector<double> y{2.5, 4.5, 6.5, 8.5};
    double slope = 0, intercept = 0, r2 = 0;
    ols_fit(x, y, slope, intercept, r2);
    CHECK(slope == doctest::Approx(2.0));
    CHECK(intercept == doctest::Approx(0.5));
    CHECK(r2 == doctest::Approx(1.0));
    CHECK_THROWS_AS(ols_fit({1.0}, {1.0}, slope, intercept, r2), ConfigError);
}

TEST_CASE("scaling runs are deterministic and near the target slope") {
    const ExperimentConfig cfg = small_scaling_config();
    const ScalingReport a = run_scaling(cfg);
    const ScalingReport b = run_scaling(cfg);
    CHECK(a.to_csv() == b.to_csv());
    CHECK(a.to_json().dump() == b.to_json().dump());
    CHECK(a.slope_target == doctest::Approx(1.0));
    CHECK(std::abs(a.slope - 1.0) < 0.35);  // loose: tiny ensemble, short delta range
    CHECK(a.r_squared > 0.9);
    CHECK(!a.exact_floor);
    CHECK(a.points.size() == 8);  // 4 deltas, both signs
    const std::string csv = a.to_csv();
    CHECK(csv.rfind("experiment,functional,m,alpha,p,delta,sign,statistic,value,seed\n",
                    0) == 0);
}

TEST_CASE("threaded scaling matches the sequential run") {
    ExperimentConfig cfg = small_scaling_config();
    const ScalingReport seq = run_scaling(cfg);
    cfg.threads = 4;
    const ScalingReport par = run_scaling(cfg);
    ExperimentConfig ref = cfg;
    ref.threads = 1;
    CHECK(par.to_csv() == seq.to_csv());
    CHECK(ref.to_json().dump() != par.to_json().dump());  // thread count is echoed
}

TEST_CASE("scaling rejects inconsistent requests") {
    ExperimentConfig cfg = small_scaling_config();
    cfg.ensemble = 10;
    CHECK_THROWS_AS(run_scaling(cfg), ConfigError);
    cfg = small_scaling_config();
    cfg.deltas = {0.25, 0.125};  // too few points for a fit
    CHECK_THROWS_AS(run_scaling(cfg), ConfigError);
    cfg = small_scaling_config();
    cfg.deltas = {0.25, 0.125, 0.0626, 0.04};  // off-grid delta
    CHECK_THROWS_AS(run_scaling(cfg), ConfigError);
    cfg = small_scaling_config();
    cfg.variant = "symmetrized";  // m = 1 has no second-order variant
    CHECK_THROWS_AS(run_scaling(cfg), ConfigError);
}

TEST_CASE("exact floor is reported for polynomial remainders") {
    ExperimentConfig cfg = small_scaling_config();
    cfg.functional = "area";
    cfg.m = 2;
    const ScalingReport rep = run_scaling(cfg);
    CHECK(rep.exact_floor);
}

TEST_CASE("identity suite passes on a small ensemble") {
    ExperimentConfig cfg;
    cfg.experiment = "identities";
    cfg.grid_n = 256;
    cfg.ensemble = 6;  // statistical entries are skipped below 100 paths
    cfg.seed = 424242;
    const IdentityReport rep = run_identity_suite(cfg);
    CHECK(rep.all_pass);
    bool saw_skip = false;
    for (const auto& e : rep.entries)

        saw_skip = saw_skip || e.skipped;
    CHECK(saw_skip);
    const IdentityReport again = run_identity_suite(cfg);
    CHECK(rep.to_json().dump() == again.to_json().dump());
}

TEST_CASE("norm estimates are finite and stable") {
    ExperimentConfig cfg;
    cfg.experiment = "norms";
    cfg.functional = "markovian:sin";
    cfg.grid_n = 256;
    cfg.ensemble = 64;
    cfg.norm_order = 1;
    cfg.stride = 16;
    const NormReport rep = estimate_norms(cfg);
    REQUIRE(rep.components.size() == 2);  // value and first path derivative
    CHECK(rep.norm > 0.0);
    CHECK(rep.norm <= 1.0 + 1.3 + 1e-9);  // both components are bounded by 1 and 1.3
    CHECK(rep.holder_seminorm > 0.0);
    CHECK(rep.holder_half_ratio > 0.5);
    CHECK(rep.holder_half_ratio < 2.0);
    const NormReport again = estimate_norms(cfg);
    CHECK(rep.to_csv() == again.to_csv());
}
