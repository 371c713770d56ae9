#include "ptx/indices.hpp"

#include <algorithm>
#include <functional>

namespace ptx {

TemporalIndex::TemporalIndex(std::vector<int> entries, int driver_dim)
    : entries_(std::move(entries)), dim_(driver_dim) {
    if (dim_ < 1) throw ConfigError("TemporalIndex: driver dimension must be >= 1");
    for (int e : entries_) {
        if (e < 0 || e > dim_)
            throw ConfigError("TemporalIndex: entries must lie in {0, ..., d}");
    }
}

int TemporalIndex::zero_count() const {
    return static_cast<int>(std::count(entries_.begin(), entries_.end(), 0));
}

int TemporalIndex::weight() const { return order() + zero_count(); }

TemporalIndex TemporalIndex::reversed() const {
    std::vector<int> rev(entries_.rbegin(), entries_.rend());
    return TemporalIndex(std::move(rev), dim_);
}

int TemporalIndex::head() const {
    if (entries_.empty()) throw QueryError("TemporalIndex: head of empty index");
    return entries_.front();
}

TemporalIndex TemporalIndex::tail() const {
    if (entries_.empty()) throw QueryError("TemporalIndex: tail of empty index");
    return TemporalIndex(std::vector<int>(entries_.begin() + 1, entries_.end()), dim_);
}

TemporalIndex TemporalIndex::prepend(int entry) const {
    std::vector<int> out;
    out.reserve(entries_.size() + 1);
    out.push_back(entry);
    out.insert(out.end(), entries_.begin(), entries_.end());
    return TemporalIndex(std::move(out), dim_);
}

TemporalIndex TemporalIndex::concat(const TemporalIndex& other) const {
    std::vector<int> out = entries_;
    out.insert(out.end(), other.entries_.begin(), other.entries_.end());
    return TemporalIndex(std::move(out), std::max(dim_, other.dim_));
}

TemporalIndex TemporalIndex::prefix(int k) const {
    if (k < 0 || k > order()) throw QueryError("TemporalIndex: prefix length out of range");
    return TemporalIndex(std::vector<int>(entries_.begin(), entries_.begin() + k), dim_);
}

TemporalIndex TemporalIndex::suffix(int k) const {
    if (k < 0 || k > order()) throw QueryError("TemporalIndex: suffix split out of range");
    return TemporalIndex(std::vector<int>(entries_.begin() + k, entries_.end()), dim_);
}

std::string TemporalIndex::to_string() const {
    std::string out = "(";
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(entries_[i]);
    }
    out += ')';
    return out;
}

SpatialIndex::SpatialIndex(std::vector<int> entries) : entries_(std::move(entries)) {
    for (int e : entries_) {
        if (e < 0) throw ConfigError("SpatialIndex: entries must be nonnegative");
    }
}

int SpatialIndex::weight() const {
    int w = 0;
    for (int e : entries_) w += e;
    return w;
}

double SpatialIndex::factorial() const {
    double f = 1.0;
    for (int e : entries_)
        for (int j = 2; j <= e; ++j) f *= j;
    return f;
}

SpatialIndex SpatialIndex::bump(int i) const {
    if (i < 0 || i >= spatial_dim()) throw QueryError("SpatialIndex: coordinate out of range");
    std::vector<int> out = entries_;
    ++out[i];
    return SpatialIndex(std::move(out));
}

std::string SpatialIndex::to_string() const {
    std::string out = "(";
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(entries_[i]);
    }
    out += ')';
    return out;
}

std::string CombinedIndex::to_string() const {
    std::string out = "theta=" + theta.to_string();
    if (ell.spatial_dim() > 0) out += " ell=" + ell.to_string();
    return out;
}

namespace {

std::size_t hash_ints(const std::vector<int>& v) {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (int e : v) {
        h ^= static_cast<std::size_t>(e) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
}

}  // namespace

std::size_t TemporalIndexHash::operator()(const TemporalIndex& t) const {
    return hash_ints(t.entries());
}

std::size_t CombinedIndexHash::operator()(const CombinedIndex& c) const {
    return hash_ints(c.theta.entries()) * 1315423911ULL + hash_ints(c.ell.entries());
}

bool index_order_less(const CombinedIndex& a, const CombinedIndex& b) {
    if (a.weight() != b.weight()) return a.weight() < b.weight();
    if (a.theta.order() != b.theta.order()) return a.theta.order() < b.theta.order();
    if (a.theta.entries() != b.theta.entries())
        return a.theta.entries() < b.theta.entries();
    return a.ell.entries() < b.ell.entries();
}

std::vector<CombinedIndex> enumerate_indices(int m, int driver_dim, int spatial_dim) {
    if (m < 0) throw ConfigError("enumerate_indices: order must be >= 0");
    if (driver_dim < 1) throw ConfigError("enumerate_indices: driver dimension must be >= 1");
    if (spatial_dim < 0) throw ConfigError("enumerate_indices: spatial dimension must be >= 0");

    std::vector<TemporalIndex> thetas;
    std::vector<int> current;
    std::function<void(int)> grow = [&](int budget) {
        thetas.emplace_back(current, driver_dim);
        for (int e = 0; e <= driver_dim; ++e) {
            const int cost = (e == 0) ? 2 : 1;
            if (cost > budget) continue;
            current.push_back(e);
            grow(budget - cost);
            current.pop_back();
        }
    };
    grow(m);

    std::vector<SpatialIndex> ells;
    if (spatial_dim == 0) {
        ells.push_back(SpatialIndex{});
    } else {
        std::vector<int> ell(spatial_dim, 0);
        std::function<void(int, int)> grow_ell = [&](int pos, int budget) {
            if (pos == spatial_dim) {
                ells.emplace_back(ell);
                return;
            }
            for (int e = 0; e <= budget; ++e) {
                ell[pos] = e;
                grow_ell(pos + 1, budget - e);
            }
            ell[pos] = 0;
        };
        grow_ell(0, m);
    }

    std::vector<CombinedIndex> out;
    for (const auto& theta : thetas)
        for (const auto& ell : ells)
            if (theta.weight() + ell.weight() <= m) out.push_back({theta, ell});
    std::sort(out.begin(), out.end(), index_order_less);
    return out;
}

double monomial(std::span<const double> h, const SpatialIndex& ell) {
    if (static_cast<int>(h.size()) != ell.spatial_dim())
        throw QueryError("monomial: dimension mismatch");
    double out = 1.0;
    for (int i = 0; i < ell.spatial_dim(); ++i)
        for (int j = 0; j < ell.entries()[i]; ++j) out *= h[i];
    return out;
}

}  // namespace ptx
