#include "ptx/taylor.hpp"

#include <cmath>
#include <memory>

namespace ptx {

namespace {

void validate_query(const TimeGrid& grid, const ExpansionQuery& q, int max_order) {
    if (q.m < 0) throw QueryError("expansion: order must be >= 0");
    if (q.order_cap < 0 || q.m > q.order_cap)
        throw QueryError("expansion: order exceeds the configured cap");
    if (q.m > max_order) throw CapabilityError("expansion: functional order too low");
    if (q.delta == 0.0) throw QueryError("expansion: delta must be nonzero");
    if (std::abs(q.delta) < 10.0 * grid.dt() * (1.0 - 1e-9))
        throw QueryError("expansion: |delta| must be >= 10 grid steps");
    grid.node_index(q.t);
    grid.node_index(q.t + q.delta);
}

std::vector<TemporalIndex> thetas_up_to(int m, int d) {
    std::vector<TemporalIndex> out;
    for (const auto& ci : enumerate_indices(m, d, 0)) out.push_back(ci.theta);
    return out;
}

std::vector<TemporalIndex> thetas_of_weight(int w, int d) {
    std::vector<TemporalIndex> out;
    for (const auto& ci : enumerate_indices(w, d, 0))
        if (ci.theta.weight() == w) out.push_back(ci.theta);
    return out;
}

GridProcess pointwise_product(const GridProcess& a, const GridProcess& b) {
    std::vector<double> v(a.values.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = a.values[k] * b.values[k];
    return GridProcess(a.grid, std::move(v));
}

}  // namespace

ExpansionResult expand(const PathFunctional& u, const SamplePath& path,
                       const ExpansionQuery& q) {
    validate_query(path.grid(), q, u.max_order());
    const int d = u.driver_dim();
    auto bound = u.bind(path);
    const GridProcess one = GridProcess::constant(path.grid(), 1.0);

    ExpansionResult res;
    for (const auto& ci : enumerate_indices(q.m, d, 0)) {
        ExpansionTerm term;
        term.index = ci;
        term.coefficient = bound->derivative(ci.theta, q.t);
        term.integral = signed_integral(ci.theta, one, path, q.t, q.t + q.delta);
        term.monomial = 1.0;
        res.predicted += term.contribution();
        res.terms.push_back(std::move(term));
    }
    res.actual = bound->evaluate(q.t + q.delta);
    res.remainder = res.actual - res.predicted;
    return res;
}

ExpansionResult expand_field(const RandomField& u, const SamplePath& path,
                             const ExpansionQuery& q) {
    validate_query(path.grid(), q, u.max_order());
    const int d = u.driver_dim();
    const int dp = u.spatial_dim();
    if (static_cast<int>(q.x.size()) != dp || static_cast<int>(q.h.size()) != dp)
        throw QueryError("expand_field: spatial dimensions of x/h mismatch");
    const GridProcess one = GridProcess::constant(path.grid(), 1.0);

    ExpansionResult res;
    for (const auto& ci : enumerate_indices(q.m, d, dp)) {
        ExpansionTerm term;
        term.index = ci;
        term.coefficient = u.derivative(ci.theta, ci.ell, q.t, q.x, path);
        term.integral = signed_integral(ci.theta, one, path, q.t, q.t + q.delta);
        term.monomial = monomial(q.h, ci.ell) / ci.ell.factorial();
        res.predicted += term.contribution();
        res.terms.push_back(std::move(term));
    }
    std::vector<double> xh(q.x);
    for (int i = 0; i < dp; ++i) xh[i] += q.h[i];
    res.actual = u.evaluate(q.t + q.delta, xh, path);
    res.remainder = res.actual - res.predicted;
    return res;
}

ExpansionResult expand_second_order(const PathFunctional& u, const SamplePath& path,
                                    const ExpansionQuery& q, SecondOrderVariant variant) {
    if (q.m != 2) throw QueryError("expand_second_order: order must be 2");
    ExpansionResult res = expand(u, path, q);
    if (variant == SecondOrderVariant::full) return res;

    const int d = u.driver_dim();
    // Locate the pair terms and rebuild their integrals from the symmetric part and
    // (for levy_split) half the antisymmetric part of the second-level matrix.
    auto pair_integral = [&](int a, int b) -> double {
        for (const auto& term : res.terms) {
            if (term.index.theta.entries() == std::vector<int>{a, b}) return term.integral;
        }
        throw ConsistencyError("expand_second_order: missing pair term");
    };
    std::vector<std::vector<double>> raw(d + 1, std::vector<double>(d + 1, 0.0));
    for (int a = 1; a <= d; ++a)
        for (int b = 1; b <= d; ++b) raw[a][b] = pair_integral(a, b);

    res.predicted = 0.0;
    for (auto& term : res.terms) {
        const auto& e = term.index.theta.entries();
        if (e.size() == 2 && e[0] >= 1 && e[1] >= 1) {
            const double sym = 0.5 * (raw[e[0]][e[1]] + raw[e[1]][e[0]]);
            const double asym = 0.5 * (raw[e[0]][e[1]] - raw[e[1]][e[0]]);
            term.integral = (variant == SecondOrderVariant::symmetrized) ? sym : sym + asym;
        }
        res.predicted += term.contribution();
    }
    res.remainder = res.actual - res.predicted;
    return res;
}

namespace {

double representation_full(const BoundPathFunctional& bound, const ExpansionQuery& q) {
    const SamplePath& path = bound.path();
    const int d = bound.unbound().driver_dim();
    const GridProcess one = GridProcess::constant(path.grid(), 1.0);
    const double t = q.t;
    const double b = q.t + q.delta;

    if (q.delta > 0.0) {
        double acc = 0.0;
        for (const auto& theta : thetas_of_weight(q.m + 1, d))
            acc += iterated_integral(theta, bound.derivative_process(theta), path, t, b);
        for (const auto& theta : thetas_of_weight(q.m, d)) {
            const GridProcess dt_layer = bound.derivative_process(theta.prepend(0));
            const GridProcess inner = stratonovich_prefix(dt_layer, 0, path, t);
            acc += iterated_integral(theta, inner, path, t, b);
        }
        return acc;
    }

    // Backward: base point is s0 = t + delta < t; theta's first entry drives the
    // outer integral and the reversed tail sits inside as an integral of 1.
    const double s0 = b;
    double acc = 0.0;
    for (const auto& theta : thetas_of_weight(q.m + 1, d)) {
        const double sign = (theta.order() % 2 == 0) ? 1.0 : -1.0;
        const GridProcess inner = iterated_prefix(theta.tail().reversed(), one, path, s0);
        const GridProcess prod = pointwise_product(bound.derivative_process(theta), inner);
        acc += sign * stratonovich_integral(prod, theta.head(), path, s0, t);
    }
    for (const auto& theta : thetas_of_weight(q.m, d)) {
        const double sign = (theta.order() % 2 == 0) ? 1.0 : -1.0;
        const GridProcess inner = iterated_prefix(theta.reversed(), one, path, s0);
        const GridProcess prod =
            pointwise_product(bound.derivative_process(theta.prepend(0)), inner);
        acc -= sign * stratonovich_integral(prod, 0, path, s0, t);
    }
    return acc;
}

double representation_hoelder(const BoundPathFunctional& bound, const ExpansionQuery& q) {
    const SamplePath& path = bound.path();
    const TimeGrid& grid = path.grid();
    const int d = bound.unbound().driver_dim();
    const GridProcess one = GridProcess::constant(grid, 1.0);
    const double t = q.t;

    if (q.delta > 0.0) {
        const double b = t + q.delta;
        const int kt = grid.node_index(t);
        const int kb = grid.node_index(b);
        const double dt = grid.dt();
        double acc = 0.0;

        // Trapezoid over the window of a node-indexed integrand.
        auto window_time_integral = [&](const std::vector<double>& f) {
            double s = 0.0;
            for (int k = kt; k < kb; ++k) s += 0.5 * (f[k] + f[k + 1]) * dt;
            return s;
        };
        // J(s) = I^theta_{s,b}(1) per window node.
        auto suffix_integrals = [&](const TemporalIndex& theta) {
            std::vector<double> J(grid.step_count() + 1, 0.0);
            for (int k = kt; k <= kb; ++k)
                J[k] = iterated_integral(theta, one, path, grid.node(k), b);
            return J;
        };

        for (int w = 0; w <= q.m; ++w) {
            for (const auto& theta : thetas_of_weight(w, d)) {
                if (theta.has_zero()) continue;  // the representation runs over pure
                                                 // path-direction indices only
                if (w == q.m) {
                    GridProcess inc = bound.derivative_process(theta);
                    const double base = inc.at_node(kt);
                    for (double& v : inc.values) v -= base;
                    acc += iterated_integral(theta, inc, path, t, b);
                } else if (w == q.m - 1) {
                    const GridProcess dt_layer = bound.derivative_process(theta.prepend(0));
                    const std::vector<double> J = suffix_integrals(theta);
                    std::vector<double> f(grid.step_count() + 1, 0.0);
                    for (int k = kt; k <= kb; ++k) f[k] = dt_layer.values[k] * J[k];
                    acc += window_time_integral(f);
                } else {
                    // Inner remainder of w_theta = d/dt D^theta u at order m - 2 - w.
                    const int inner_order = q.m - 2 - w;
                    const TemporalIndex base_idx = theta.prepend(0);
                    const GridProcess w_proc = bound.derivative_process(base_idx);
                    std::vector<double> coef;
                    std::vector<GridProcess> pref;
                    for (const auto& eta : thetas_up_to(inner_order, d)) {
                        coef.push_back(bound.derivative(eta.concat(base_idx), t));
                        pref.push_back(iterated_prefix(eta, one, path, t));
                    }
                    const std::vector<double> J = suffix_integrals(theta);
                    std::vector<double> f(grid.step_count() + 1, 0.0);
                    for (int k = kt; k <= kb; ++k) {
                        double rem = w_proc.values[k];
                        for (std::size_t j = 0; j < coef.size(); ++j)
                            rem -= coef[j] * pref[j].values[k];
                        f[k] = rem * J[k];
                    }
                    acc += window_time_integral(f);
                }
            }
        }
        return acc;
    }

    // Backward: each term couples a forward remainder from the base s0 = t + delta
    // with a reversed-index integral of 1 over [s0, t].
    const double s0 = t + q.delta;
    double acc = 0.0;
    for (const auto& theta : thetas_up_to(q.m, d)) {
        const double sign = (theta.order() % 2 == 0) ? 1.0 : -1.0;
        const double weight_int =
            iterated_integral(theta.reversed(), one, path, s0, t);
        // Forward remainder of D^theta u at order m - |theta| from base s0.
        double rem = bound.derivative(theta, t);
        for (const auto& eta : thetas_up_to(q.m - theta.weight(), d))
            rem -= bound.derivative(eta.concat(theta), s0) *
                   iterated_integral(eta, one, path, s0, t);
        acc -= sign * rem * weight_int;
    }
    return acc;
}

}  // namespace

double remainder_via_representation(const PathFunctional& u, const SamplePath& path,
                                    const ExpansionQuery& q,
                                    RemainderRepresentation variant) {
    validate_query(path.grid(), q, u.max_order());
    auto bound = u.bind(path);
    if (variant == RemainderRepresentation::full) return representation_full(*bound, q);
    return representation_hoelder(*bound, q);
}

void gauss_legendre_unit(int order, std::vector<double>& nodes,
                         std::vector<double>& weights) {
    if (order < 1) throw ConfigError("gauss_legendre_unit: order must be >= 1");
    nodes.assign(order, 0.0);
    weights.assign(order, 0.0);
    const int n = order;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double step = p1 / dp;
            x -= step;
            if (std::abs(step) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);  // roots come out descending; mirror to ascending
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
}

double field_remainder_recursion_residual(const RandomField& u, const SamplePath& path,
                                          const ExpansionQuery& q) {
    if (q.m < 1) throw QueryError("field_remainder_recursion_residual: order must be >= 1");
    const int dp = u.spatial_dim();
    const double rm_h = expand_field(u, path, q).remainder;
    ExpansionQuery q0 = q;
    q0.h.assign(dp, 0.0);
    const double rm_0 = expand_field(u, path, q0).remainder;

    std::vector<double> nodes, weights;
    gauss_legendre_unit(q.quadrature_order, nodes, weights);

    // Non-owning view for the derived-field adapters.
    const std::shared_ptr<const RandomField> view(std::shared_ptr<void>(), &u);
    double integral_term = 0.0;
    for (int i = 0; i < dp; ++i) {
        if (q.h[i] == 0.0) continue;
        const DerivedField dxi(view, TemporalIndex::empty(u.driver_dim()),
                               SpatialIndex::zero(dp).bump(i));
        double acc = 0.0;
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            ExpansionQuery qi = q;
            qi.m = q.m - 1;
            qi.h.assign(dp, 0.0);
            for (int a = 0; a < i; ++a) qi.h[a] = q.h[a];
            qi.h[i] = nodes[j] * q.h[i];
            acc += weights[j] * expand_field(dxi, path, qi).remainder;
        }
        integral_term += q.h[i] * acc;
    }
    return rm_h - rm_0 - integral_term;
}

}  // namespace ptx
