#include "ptx/integrals.hpp"

#include <cmath>

namespace ptx {

GridProcess::GridProcess(TimeGrid g, std::vector<double> v)
    : grid(g), values(std::move(v)) {
    if (values.size() != static_cast<std::size_t>(grid.step_count()) + 1)
        throw ConfigError("GridProcess: one value per grid node required");
    for (double x : values) {
        if (!std::isfinite(x)) throw ConfigError("GridProcess: values must be finite");
    }
}

GridProcess GridProcess::constant(const TimeGrid& g, double c) {
    return GridProcess(g, std::vector<double>(g.step_count() + 1, c));
}

namespace {

void check_compatible(const GridProcess& phi, const SamplePath& path, int driver_index) {
    if (!(phi.grid == path.grid()))
        throw QueryError("integrals: integrand and path grids differ");
    if (driver_index < 0 || driver_index > path.dimension())
        throw QueryError("integrals: driver index out of range");
}

}  // namespace

double stratonovich_integral(const GridProcess& phi, int driver_index,
                             const SamplePath& path, double s, double t) {
    check_compatible(phi, path, driver_index);
    const int ks = phi.grid.node_index(s);
    const int kt = phi.grid.node_index(t);
    if (ks > kt) throw QueryError("stratonovich_integral: requires s <= t");
    double acc = 0.0;
    if (driver_index == 0) {
        const double dt = phi.grid.dt();
        for (int k = ks; k < kt; ++k)
            acc += 0.5 * (phi.at_node(k) + phi.at_node(k + 1)) * dt;
    } else {
        const double* b = path.coordinate(driver_index - 1);
        for (int k = ks; k < kt; ++k)
            acc += 0.5 * (phi.at_node(k) + phi.at_node(k + 1)) * (b[k + 1] - b[k]);
    }
    return acc;
}

GridProcess stratonovich_prefix(const GridProcess& phi, int driver_index,
                                const SamplePath& path, double s) {
    check_compatible(phi, path, driver_index);
    const int ks = phi.grid.node_index(s);
    const int n = phi.grid.step_count();
    std::vector<double> out(static_cast<std::size_t>(n) + 1, 0.0);
    if (driver_index == 0) {
        const double dt = phi.grid.dt();
        for (int k = ks; k < n; ++k)
            out[k + 1] = out[k] + 0.5 * (phi.at_node(k) + phi.at_node(k + 1)) * dt;
    } else {
        const double* b = path.coordinate(driver_index - 1);
        for (int k = ks; k < n; ++k)
            out[k + 1] = out[k] + 0.5 * (phi.at_node(k) + phi.at_node(k + 1)) * (b[k + 1] - b[k]);
    }
    return GridProcess(phi.grid, std::move(out));
}

GridProcess iterated_prefix(const TemporalIndex& theta, const GridProcess& phi,
                            const SamplePath& path, double s) {
    GridProcess cur = phi;
    for (int e : theta.entries()) cur = stratonovich_prefix(cur, e, path, s);
    return cur;
}

double iterated_integral(const TemporalIndex& theta, const GridProcess& phi,
                         const SamplePath& path, double s, double t) {
    const int ks = phi.grid.node_index(s);
    const int kt = phi.grid.node_index(t);
    if (ks > kt) throw QueryError("iterated_integral: requires s <= t");
    if (theta.order() == 0) return phi.at_node(kt);
    return iterated_prefix(theta, phi, path, s).at_node(kt);
}

double signed_integral(const TemporalIndex& theta, const GridProcess& phi,
                       const SamplePath& path, double a, double b) {
    if (phi.grid.node_index(a) <= phi.grid.node_index(b))
        return iterated_integral(theta, phi, path, a, b);
    const double sign = (theta.order() % 2 == 0) ? 1.0 : -1.0;
    return sign * iterated_integral(theta.reversed(), phi, path, b, a);
}

Step2Signature step2_signature(const SamplePath& path, double s, double t) {
    const int ks = path.grid().node_index(s);
    const int kt = path.grid().node_index(t);
    if (ks >= kt) throw QueryError("step2_signature: requires s < t");
    const int d = path.dimension();
    Step2Signature sig;
    sig.dim = d;
    sig.increment.resize(d);
    sig.second_level.assign(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i)
        sig.increment[i] = path.value(i, kt) - path.value(i, ks);
    for (int i = 0; i < d; ++i) {
        const double* bi = path.coordinate(i);
        for (int j = 0; j < d; ++j) {
            const double* bj = path.coordinate(j);
            double acc = 0.0;
            for (int k = ks; k < kt; ++k) {
                const double mid = 0.5 * (bi[k] + bi[k + 1]) - bi[ks];
                acc += mid * (bj[k + 1] - bj[k]);
            }
            sig.second_level[static_cast<std::size_t>(i) * d + j] = acc;
        }
    }
    sig.levy_area.resize(static_cast<std::size_t>(d) * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            sig.levy_area[static_cast<std::size_t>(i) * d + j] =
                sig.second(i, j) - sig.second(j, i);
    return sig;
}

double ibp_identity_residual(const TemporalIndex& theta, const GridProcess& phi,
                             const SamplePath& path, double s, double t) {
    const int n = theta.order();
    if (n < 1) throw QueryError("ibp_identity_residual: theta must be nonempty");
    if (phi.grid.node_index(s) >= phi.grid.node_index(t))
        throw QueryError("ibp_identity_residual: requires s < t");

    const GridProcess one = GridProcess::constant(phi.grid, 1.0);

    // Left side: ∫_s^t (φ_r · I^{-θ̃}_{s,r}(1)) d_{θ₁} r with θ = (θ₁, θ̃).
    const GridProcess inner = iterated_prefix(theta.tail().reversed(), one, path, s);
    std::vector<double> prod(phi.values.size());
    for (std::size_t k = 0; k < prod.size(); ++k) prod[k] = phi.values[k] * inner.values[k];
    const double lhs =
        stratonovich_integral(GridProcess(phi.grid, std::move(prod)), theta.head(), path, s, t);

    double rhs = 0.0;
    for (int i = 1; i <= n; ++i) {
        const double sign = (i % 2 == 1) ? 1.0 : -1.0;
        rhs += sign * iterated_integral(theta.prefix(i), phi, path, s, t) *
               iterated_integral(theta.suffix(i), one, path, s, t);
    }
    return lhs - rhs;
}

}  // namespace ptx
