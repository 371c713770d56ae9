#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ptx/spde.hpp"
#include "ptx/taylor.hpp"

namespace ptx {

/// Everything a run needs, echoed verbatim into every report.
struct ExperimentConfig {
    std::string experiment = "scaling";      // identities | scaling | norms
    std::string functional = "markovian:sin";
    int m = 2;
    double horizon = 1.0;
    int grid_n = 4096;
    int ensemble = 10000;
    std::uint64_t seed = 20250824;
    std::vector<double> deltas;              // magnitudes; empty -> default geometric grid
    double p = 2.0;
    double alpha = 0.5;
    double window_lo = 0.35;
    double window_hi = 0.6;
    int stride = 0;                          // 0 -> max(1, grid_n / 256)
    double spatial_radius = 0.5;             // x-scan ball for fields
    int x_points = 3;
    double h_ratio = 0.5;                    // |h|^2 = h_ratio * delta in field scans
    std::string variant = "full";            // full | levy_split | symmetrized
    int norm_order = 1;
    int quadrature_order = 8;
    int threads = 1;

    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    /// Throws ConfigError on inconsistent settings.
    void validate() const;
    /// Explicit deltas if given, otherwise 8 points from 0.32 halving down.
    std::vector<double> delta_grid() const;
    int effective_stride() const;
};

struct ScalingPoint {
    double delta = 0.0;     // scale variable: |delta| (+ |h|^2 for fields)
    int sign = +1;          // direction of the temporal offset
    double statistic = 0.0; // (mean over paths of sup |R_m|^p)^(1/p)
};

struct ScalingReport {
    ExperimentConfig config;
    std::vector<ScalingPoint> points;
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double slope_target = 0.0;    // (m+1)/2
    double pathwise_max = 0.0;    // max over paths of sup |R_m| / scale^((m+alpha)/2)
    bool exact_floor = false;     // all statistics at rounding level; slope meaningless

    nlohmann::json to_json() const;
    std::string to_csv() const;
};

struct IdentityResult {
    std::string name;
    bool pass = false;
    bool skipped = false;
    double worst_error = 0.0;
    double tolerance = 0.0;
    std::string note;
};

struct IdentityReport {
    ExperimentConfig config;
    std::vector<IdentityResult> entries;
    bool all_pass = true;

    nlohmann::json to_json() const;
    std::string to_csv() const;
};

struct NormComponent {
    std::string index;  // rendered derivative index
    double value = 0.0;
};

struct NormReport {
    ExperimentConfig config;
    std::vector<NormComponent> components;
    double norm = 0.0;            // recursive level-n norm
    double norm_std_error = 0.0;
    double holder_seminorm = 0.0; // discrete-scan Hölder statistic at the configured alpha
    double holder_std_error = 0.0;
    double holder_half_ratio = 0.0;  // stability across the two ensemble halves

    nlohmann::json to_json() const;
    std::string to_csv() const;
};

/// Machine-precision and refinement-order identity checks over a small ensemble.
IdentityReport run_identity_suite(const ExperimentConfig& cfg);

/// Monte Carlo remainder-scaling regression; requires >= 4 delta points and
/// ensemble >= 100.
ScalingReport run_scaling(const ExperimentConfig& cfg);

/// Empirical level-n norm and Hölder-seminorm diagnostics.
NormReport estimate_norms(const ExperimentConfig& cfg);

/// Ordinary least squares fit of y against x; returns slope, intercept, r^2.
void ols_fit(const std::vector<double>& x, const std::vector<double>& y, double& slope,
             double& intercept, double& r_squared);

/// Version string embedded in reports.
std::string code_version();

}  // namespace ptx
