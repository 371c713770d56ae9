#pragma once

#include <cstdint>
#include <vector>

#include "ptx/errors.hpp"

namespace ptx {

/// Uniform grid t_k = k * (T / N) on [0, T].
class TimeGrid {
  public:
    TimeGrid(double horizon, int step_count);

    double horizon() const { return horizon_; }
    int step_count() const { return step_count_; }
    double dt() const { return horizon_ / step_count_; }
    double node(int k) const { return k * dt(); }

    /// Index of the node equal to t; throws QueryError for off-grid times.
    int node_index(double t) const;
    bool is_node(double t) const;

    bool operator==(const TimeGrid& o) const {
        return horizon_ == o.horizon_ && step_count_ == o.step_count_;
    }

  private:
    double horizon_;
    int step_count_;
};

/// Discretized d-dimensional Brownian path on a uniform grid, starting at the origin.
/// Immutable after construction; regenerating from the same (grid, d, seed) is bit-identical.
class SamplePath {
  public:
    SamplePath(TimeGrid grid, int dimension, std::uint64_t seed,
               std::vector<double> values);

    const TimeGrid& grid() const { return grid_; }
    int dimension() const { return dim_; }
    std::uint64_t seed() const { return seed_; }

    /// Value of coordinate i at node k.
    double value(int i, int k) const { return values_[static_cast<std::size_t>(i) * (grid_.step_count() + 1) + k]; }
    double value_at(int i, double t) const { return value(i, grid_.node_index(t)); }

    /// Contiguous node-indexed storage of coordinate i (length N+1).
    const double* coordinate(int i) const { return values_.data() + static_cast<std::size_t>(i) * (grid_.step_count() + 1); }

    const std::vector<double>& raw_values() const { return values_; }

  private:
    TimeGrid grid_;
    int dim_;
    std::uint64_t seed_;
    std::vector<double> values_;  // coordinate-major, d rows of N+1 nodes
};

/// SplitMix64 mix step; used to derive independent per-path and per-purpose streams.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// I.i.d. N(0, dt) increments per coordinate, deterministic in (grid, d, seed).
SamplePath simulate_path(const TimeGrid& grid, int dimension, std::uint64_t seed);

/// Brownian-bridge refinement by an integer factor >= 2. Coarse-node values are preserved
/// exactly; interior values are conditionally Gaussian, deterministic in (path.seed, factor).
SamplePath refine_path(const SamplePath& path, int factor);

/// omega_t - omega_s componentwise; s and t must be grid nodes, either order.
std::vector<double> increment(const SamplePath& path, double s, double t);

/// Copy with coordinate i shifted by eps from node k onward (vertical bump at t_k).
SamplePath bump_path(const SamplePath& path, int coordinate, int from_node, double eps);

/// Copy with all coordinates held constant at their node-k values from node k onward.
SamplePath freeze_path(const SamplePath& path, int from_node);

}  // namespace ptx
