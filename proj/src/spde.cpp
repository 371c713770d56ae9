#include "ptx/spde.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace ptx {

ScalarSpde::ScalarSpde(std::string name, Fn f, Fn f_gamma, Fn g, Fn g_x, Fn g_y, Fn g_z)
    : name_(std::move(name)),
      f_(std::move(f)),
      f_gamma_(std::move(f_gamma)),
      g_(std::move(g)),
      g_x_(std::move(g_x)),
      g_y_(std::move(g_y)),
      g_z_(std::move(g_z)) {
    if (!f_ || !f_gamma_ || !g_ || !g_x_ || !g_y_ || !g_z_)
        throw ConfigError("ScalarSpde: all coefficient callables are required");
}

namespace {

double call(const ScalarSpde::Fn& fn, const CoefficientProbe& p) {
    return fn(p.t, p.x[0], p.y, p.z[0], p.gamma(0, 0));
}

void check_scalar_probe(const CoefficientProbe& p) {
    if (p.x.size() != 1 || p.z.size() != 1 || p.gamma.rows != 1 || p.gamma.cols != 1)
        throw QueryError("ScalarSpde: probe must be one-dimensional");
}

Mat scalar_mat(double v) {
    Mat m(1, 1);
    m(0, 0) = v;
    return m;
}

}  // namespace

double ScalarSpde::f(const CoefficientProbe& p) const {
    check_scalar_probe(p);
    return call(f_, p);
}
Mat ScalarSpde::f_gamma(const CoefficientProbe& p) const {
    check_scalar_probe(p);
    return scalar_mat(call(f_gamma_, p));
}
std::vector<double> ScalarSpde::g(const CoefficientProbe& p) const {
    check_scalar_probe(p);
    return {call(g_, p)};
}
Mat ScalarSpde::g_x(const CoefficientProbe& p) const {
    check_scalar_probe(p);
    return scalar_mat(call(g_x_, p));
}
std::vector<double> ScalarSpde::g_y(const CoefficientProbe& p) const {
    check_scalar_probe(p);
    return {call(g_y_, p)};
}
Mat ScalarSpde::g_z(const CoefficientProbe& p) const {
    check_scalar_probe(p);
    return scalar_mat(call(g_z_, p));
}

namespace {

/// Probe (t, x, u, du/dx, d2u/dx2) read off the solution field.
CoefficientProbe field_probe(const RandomField& u, double t, std::span<const double> x,
                             const SamplePath& path) {
    const int dp = u.spatial_dim();
    CoefficientProbe p;
    p.t = t;
    p.x.assign(x.begin(), x.end());
    const TemporalIndex none = TemporalIndex::empty(u.driver_dim());
    const SpatialIndex zero = SpatialIndex::zero(dp);
    p.y = u.derivative(none, zero, t, x, path);
    p.z.resize(dp);
    for (int i = 0; i < dp; ++i) p.z[i] = u.derivative(none, zero.bump(i), t, x, path);
    p.gamma = Mat(dp, dp);
    for (int i = 0; i < dp; ++i)
        for (int j = 0; j < dp; ++j)
            p.gamma(i, j) = u.derivative(none, zero.bump(i).bump(j), t, x, path);
    return p;
}

void check_dims(const SpdeCoefficients& c, const RandomField& u) {
    if (c.driver_dim() != u.driver_dim() || c.spatial_dim() != u.spatial_dim())
        throw QueryError("spde: coefficient/field dimension mismatch");
}

}  // namespace

DerivedExpansionCoefficients derive_coefficients(const SpdeCoefficients& c,
                                                 const RandomField& u, double t,
                                                 std::span<const double> x,
                                                 const SamplePath& path) {
    check_dims(c, u);
    const int d = c.driver_dim();
    const int dp = c.spatial_dim();
    const CoefficientProbe p = field_probe(u, t, x, path);

    DerivedExpansionCoefficients out;
    out.t_u = c.f(p);
    out.omega_u = c.g(p);
    const Mat gx = c.g_x(p);
    const std::vector<double> gy = c.g_y(p);
    const Mat gz = c.g_z(p);
    const Mat gw = c.g_omega(p);

    out.x_omega_u = Mat(dp, d);
    for (int i = 0; i < dp; ++i)
        for (int j = 0; j < d; ++j) {
            double v = gx(i, j) + p.z[i] * gy[j];
            for (int k = 0; k < dp; ++k) v += p.gamma(i, k) * gz(k, j);
            out.x_omega_u(i, j) = v;
        }

    out.omega_omega_u = Mat(d, d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            double v = gw(a, b) + out.omega_u[a] * gy[b];
            for (int k = 0; k < dp; ++k) v += out.x_omega_u(k, a) * gz(k, b);
            out.omega_omega_u(a, b) = v;
        }

    out.ito_drift = out.t_u;
    for (int a = 0; a < d; ++a) out.ito_drift += 0.5 * out.omega_omega_u(a, a);
    return out;
}

std::pair<Mat, bool> parabolicity(const SpdeCoefficients& c, const CoefficientProbe& probe) {
    const Mat m = c.f_gamma(probe);
    const int n = m.rows;
    Eigen::MatrixXd sym(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) sym(i, j) = 0.5 * (m(i, j) + m(j, i));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    const bool psd = solver.eigenvalues().minCoeff() >= -1e-10;
    return {m, psd};
}

std::pair<SixTuple, SixTuple> six_tuple_routes(const SpdeCoefficients& c,
                                               const RandomField& u, double t, double x,
                                               const SamplePath& path) {
    check_dims(c, u);
    if (c.driver_dim() != 1 || c.spatial_dim() != 1)
        throw CapabilityError("six_tuple: only d = d' = 1 is supported");
    const std::vector<double> xv{x};
    const SpatialIndex s0 = SpatialIndex::zero(1);
    auto dv = [&](std::vector<int> theta, int ell) {
        SpatialIndex si = s0;
        for (int j = 0; j < ell; ++j) si = si.bump(0);
        return u.derivative(TemporalIndex(std::move(theta), 1), si, t, xv, path);
    };
    SixTuple table;
    table.a = dv({0}, 0);
    table.b = dv({1}, 0);
    table.c = dv({1, 1}, 0);
    table.p = dv({}, 1);
    table.q = dv({1}, 1);
    table.X = dv({}, 2);

    const CoefficientProbe p = field_probe(u, t, xv, path);
    const double f = c.f(p);
    const double g = c.g(p)[0];
    const double gx = c.g_x(p)(0, 0);
    const double gy = c.g_y(p)[0];
    const double gz = c.g_z(p)(0, 0);
    const double g2 = gx + gy * p.z[0] + gz * p.gamma(0, 0);
    const double bracket = gy * g + gz * g2;
    SixTuple coef;
    coef.a = f;  // = F - bracket/2 with F = f + bracket/2
    coef.b = g;
    coef.c = bracket;
    coef.p = p.z[0];
    coef.q = g2;
    coef.X = p.gamma(0, 0);
    return {table, coef};
}

SixTuple six_tuple(const SpdeCoefficients& c, const RandomField& u, double t, double x,
                   const SamplePath& path) {
    const auto [table, coef] = six_tuple_routes(c, u, t, x, path);
    const double pairs[6][2] = {{table.a, coef.a}, {table.b, coef.b}, {table.c, coef.c},
                                {table.p, coef.p}, {table.q, coef.q}, {table.X, coef.X}};
    for (const auto& pr : pairs) {
        const double scale = std::max({1.0, std::abs(pr[0]), std::abs(pr[1])});
        if (std::abs(pr[0] - pr[1]) > 1e-10 * scale)
            throw ConsistencyError("six_tuple: derivative-table and coefficient routes "
                                   "disagree for " + c.name());
    }
    return table;
}

ExpansionResult spde_expand(const SpdeCoefficients& c, const RandomField& u,
                            const SamplePath& path, const ExpansionQuery& q) {
    check_dims(c, u);
    if (q.m != 2) throw CapabilityError("spde_expand: only order 2 is supported");
    if (q.delta == 0.0) throw QueryError("spde_expand: delta must be nonzero");
    if (std::abs(q.delta) < 10.0 * path.grid().dt() * (1.0 - 1e-9))
        throw QueryError("spde_expand: |delta| must be >= 10 grid steps");
    const int d = c.driver_dim();
    const int dp = c.spatial_dim();
    if (static_cast<int>(q.x.size()) != dp || static_cast<int>(q.h.size()) != dp)
        throw QueryError("spde_expand: spatial dimensions of x/h mismatch");

    const DerivedExpansionCoefficients dc = derive_coefficients(c, u, q.t, q.x, path);
    const CoefficientProbe p = field_probe(u, q.t, q.x, path);
    const GridProcess one = GridProcess::constant(path.grid(), 1.0);

    ExpansionResult res;
    for (const auto& ci : enumerate_indices(2, d, dp)) {
        const auto& e = ci.theta.entries();
        const int lw = ci.ell.weight();
        double coef = 0.0;
        if (e.empty()) {
            if (lw == 0) {
                coef = p.y;
            } else if (lw == 1) {
                for (int i = 0; i < dp; ++i)
                    if (ci.ell.entries()[i] == 1) coef = p.z[i];
            } else {
                int i1 = -1, i2 = -1;
                for (int i = 0; i < dp; ++i) {
                    for (int r = 0; r < ci.ell.entries()[i]; ++r) {
                        if (i1 < 0)
                            i1 = i;
                        else
                            i2 = i;
                    }
                }
                coef = p.gamma(i1, i2);
            }
        } else if (e == std::vector<int>{0}) {
            coef = dc.t_u;
        } else if (e.size() == 1) {
            if (lw == 0) {
                coef = dc.omega_u[e[0] - 1];
            } else {
                for (int i = 0; i < dp; ++i)
                    if (ci.ell.entries()[i] == 1) coef = dc.x_omega_u(i, e[0] - 1);
            }
        } else {
            coef = dc.omega_omega_u(e[0] - 1, e[1] - 1);
        }
        ExpansionTerm term;
        term.index = ci;
        term.coefficient = coef;
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

std::pair<std::shared_ptr<const SpdeCoefficients>, std::shared_ptr<const RandomField>>
make_spde_case(const std::string& name) {
    auto zero = [](double, double, double, double, double) { return 0.0; };
    auto one_fn = [](double, double, double, double, double) { return 1.0; };
    std::shared_ptr<const SpdeCoefficients> coeffs;
    if (name.rfind("transport:", 0) == 0) {
        coeffs = std::make_shared<ScalarSpde>(
            name, zero, zero, [](double, double, double, double z, double) { return z; },
            zero, zero, one_fn);
    } else if (name == "multiplicative") {
        coeffs = std::make_shared<ScalarSpde>(
            name, zero, zero, [](double, double, double y, double, double) { return y; },
            zero, one_fn, zero);
    } else if (name == "heat-deterministic") {
        coeffs = std::make_shared<ScalarSpde>(
            name, [](double, double, double, double, double gamma) { return 0.5 * gamma; },
            [](double, double, double, double, double) { return 0.5; }, zero, zero, zero,
            zero);
    } else {
        throw ConfigError("unknown SPDE case: " + name);
    }
    return {coeffs, make_random_field(name)};
}

std::vector<std::string> spde_case_names() {
    return {"transport:sin", "transport:gauss", "transport:poly2", "multiplicative",
            "heat-deterministic"};
}

}  // namespace ptx
