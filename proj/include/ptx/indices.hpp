#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ptx/errors.hpp"

namespace ptx {

/// Temporal multi-index theta over {0, ..., d}: entry 0 stands for the time derivative
/// (and dt-integration), entry i >= 1 for the i-th path derivative (and ∘dB^i).
/// Weight counts zero entries twice. Immutable value type.
class TemporalIndex {
  public:
    TemporalIndex() : dim_(1) {}
    TemporalIndex(std::vector<int> entries, int driver_dim);

    static TemporalIndex empty(int driver_dim) { return TemporalIndex({}, driver_dim); }

    const std::vector<int>& entries() const { return entries_; }
    int driver_dim() const { return dim_; }
    /// |theta|_0, the number of entries.
    int order() const { return static_cast<int>(entries_.size()); }
    /// |theta| = |theta|_0 + #{zero entries}.
    int weight() const;
    int zero_count() const;
    bool has_zero() const { return weight() != order(); }

    /// (theta_n, ..., theta_1), written -theta in the backward convention.
    TemporalIndex reversed() const;
    /// First entry and remaining tail (theta_1, tilde-theta split).
    int head() const;
    TemporalIndex tail() const;
    /// theta with one entry prepended (new outermost derivative).
    TemporalIndex prepend(int entry) const;
    /// Concatenation (this followed by other).
    TemporalIndex concat(const TemporalIndex& other) const;
    /// Prefix (theta_1..theta_k) and suffix (theta_{k+1}..theta_n).
    TemporalIndex prefix(int k) const;
    TemporalIndex suffix(int k) const;

    bool operator==(const TemporalIndex& o) const { return entries_ == o.entries_; }
    std::string to_string() const;  // "(0,2,1)"

  private:
    std::vector<int> entries_;
    int dim_;
};

/// Spatial multi-index ell in N^{d'}.
class SpatialIndex {
  public:
    SpatialIndex() = default;
    explicit SpatialIndex(std::vector<int> entries);

    static SpatialIndex zero(int d_prime) { return SpatialIndex(std::vector<int>(d_prime, 0)); }

    const std::vector<int>& entries() const { return entries_; }
    int spatial_dim() const { return static_cast<int>(entries_.size()); }
    int weight() const;           // |ell|
    double factorial() const;     // ell!
    SpatialIndex bump(int i) const;  // ell + e_i

    bool operator==(const SpatialIndex& o) const { return entries_ == o.entries_; }
    std::string to_string() const;  // "(1,0)"

  private:
    std::vector<int> entries_;
};

struct CombinedIndex {
    TemporalIndex theta;
    SpatialIndex ell;

    int weight() const { return theta.weight() + ell.weight(); }
    bool operator==(const CombinedIndex& o) const { return theta == o.theta && ell == o.ell; }
    std::string to_string() const;  // "theta=(0,2,1) ell=(1,0)"
};

struct TemporalIndexHash {
    std::size_t operator()(const TemporalIndex& t) const;
};
struct CombinedIndexHash {
    std::size_t operator()(const CombinedIndex& c) const;
};

/// All (theta, ell) with combined weight <= m, each once, in the canonical order:
/// graded by weight, then |theta|_0, then lexicographic on theta, then on ell.
std::vector<CombinedIndex> enumerate_indices(int m, int driver_dim, int spatial_dim);

/// Canonical comparison used by enumerate_indices.
bool index_order_less(const CombinedIndex& a, const CombinedIndex& b);

/// h^ell, with the empty-product convention for |ell| = 0.
double monomial(std::span<const double> h, const SpatialIndex& ell);

}  // namespace ptx
