#include "ptx/brownian.hpp"

#include <cmath>
#include <random>

namespace ptx {

TimeGrid::TimeGrid(double horizon, int step_count)
    : horizon_(horizon), step_count_(step_count) {
    if (!(horizon > 0.0)) throw ConfigError("TimeGrid: horizon must be positive");
    if (step_count < 2) throw ConfigError("TimeGrid: step_count must be >= 2");
}

int TimeGrid::node_index(double t) const {
    const double k = t / dt();
    const long long rounded = std::llround(k);
    if (rounded < 0 || rounded > step_count_ || std::abs(k - rounded) > 1e-9 * (1.0 + std::abs(k)))
        throw QueryError("TimeGrid: time is not a grid node");
    return static_cast<int>(rounded);
}

bool TimeGrid::is_node(double t) const {
    const double k = t / dt();
    const long long rounded = std::llround(k);
    return rounded >= 0 && rounded <= step_count_ &&
           std::abs(k - rounded) <= 1e-9 * (1.0 + std::abs(k));
}

SamplePath::SamplePath(TimeGrid grid, int dimension, std::uint64_t seed,
                       std::vector<double> values)
    : grid_(grid), dim_(dimension), seed_(seed), values_(std::move(values)) {
    if (dim_ < 1) throw ConfigError("SamplePath: dimension must be >= 1");
    const std::size_t expected =
        static_cast<std::size_t>(dim_) * (grid_.step_count() + 1);
    if (values_.size() != expected) throw ConfigError("SamplePath: value size mismatch");
    for (int i = 0; i < dim_; ++i) {
        if (value(i, 0) != 0.0) throw ConfigError("SamplePath: paths must start at the origin");
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw ConfigError("SamplePath: values must be finite");
    }
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

SamplePath simulate_path(const TimeGrid& grid, int dimension, std::uint64_t seed) {
    if (dimension < 1) throw ConfigError("simulate_path: dimension must be >= 1");
    const int n = grid.step_count();
    const double sd = std::sqrt(grid.dt());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> values(static_cast<std::size_t>(dimension) * (n + 1), 0.0);
    for (int k = 1; k <= n; ++k) {
        for (int i = 0; i < dimension; ++i) {
            const std::size_t base = static_cast<std::size_t>(i) * (n + 1);
            values[base + k] = values[base + k - 1] + sd * gauss(rng);
        }
    }
    return SamplePath(grid, dimension, seed, std::move(values));
}

SamplePath refine_path(const SamplePath& path, int factor) {
    if (factor < 2) throw ConfigError("refine_path: factor must be >= 2");
    const TimeGrid& coarse = path.grid();
    const int n = coarse.step_count();
    const int d = path.dimension();
    TimeGrid fine(coarse.horizon(), n * factor);
    const double dt = fine.dt();

    std::mt19937_64 rng(mix_seed(path.seed(), 0x5bd1e995u + static_cast<std::uint64_t>(factor)));
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<double> values(static_cast<std::size_t>(d) * (fine.step_count() + 1), 0.0);
    auto at = [&](int i, int k) -> double& {
        return values[static_cast<std::size_t>(i) * (fine.step_count() + 1) + k];
    };
    for (int i = 0; i < d; ++i)
        for (int k = 0; k <= n; ++k) at(i, k * factor) = path.value(i, k);

    // Sequential bridge fill: condition each insert on the previous insert and the
    // right endpoint of the coarse interval.
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < d; ++i) {
            const double right = path.value(i, k + 1);
            double cur = path.value(i, k);
            for (int j = 1; j < factor; ++j) {
                const double remaining = (factor - j + 1) * dt;
                const double mean = cur + (right - cur) * dt / remaining;
                const double var = dt * (remaining - dt) / remaining;
                cur = mean + std::sqrt(var) * gauss(rng);
                at(i, k * factor + j) = cur;
            }
        }
    }
    return SamplePath(fine, d, path.seed(), std::move(values));
}

std::vector<double> increment(const SamplePath& path, double s, double t) {
    const int ks = path.grid().node_index(s);
    const int kt = path.grid().node_index(t);
    std::vector<double> out(path.dimension());
    for (int i = 0; i < path.dimension(); ++i) out[i] = path.value(i, kt) - path.value(i, ks);
    return out;
}

SamplePath bump_path(const SamplePath& path, int coordinate, int from_node, double eps) {
    if (coordinate < 0 || coordinate >= path.dimension())
        throw QueryError("bump_path: coordinate out of range");
    if (from_node <= 0 || from_node > path.grid().step_count())
        throw QueryError("bump_path: bump node must be an interior or terminal node");
    std::vector<double> values = path.raw_values();
    const std::size_t base =
        static_cast<std::size_t>(coordinate) * (path.grid().step_count() + 1);
    for (int k = from_node; k <= path.grid().step_count(); ++k) values[base + k] += eps;
    return SamplePath(path.grid(), path.dimension(), path.seed(), std::move(values));
}

SamplePath freeze_path(const SamplePath& path, int from_node) {
    if (from_node < 0 || from_node > path.grid().step_count())
        throw QueryError("freeze_path: node out of range");
    std::vector<double> values = path.raw_values();
    for (int i = 0; i < path.dimension(); ++i) {
        const std::size_t base =
            static_cast<std::size_t>(i) * (path.grid().step_count() + 1);
        for (int k = from_node + 1; k <= path.grid().step_count(); ++k)
            values[base + k] = values[base + from_node];
    }
    return SamplePath(path.grid(), path.dimension(), path.seed(), std::move(values));
}

}  // namespace ptx
