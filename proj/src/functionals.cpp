#include "ptx/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

namespace ptx {

namespace {

/// k-th derivative of sin evaluated at y.
double sin_deriv(int k, double y) {
    switch (k & 3) {
        case 0: return std::sin(y);
        case 1: return std::cos(y);
        case 2: return -std::sin(y);
        default: return -std::cos(y);
    }
}

double ipow(double base, int k) {
    double out = 1.0;
    for (int j = 0; j < k; ++j) out *= base;
    return out;
}

/// Path value at an arbitrary time in [0, T], linear between nodes. Only used by the
/// cylindrical entry when its pin falls off-grid.
double value_interp(const SamplePath& path, int i, double t) {
    const double k = t / path.grid().dt();
    int lo = static_cast<int>(std::floor(k));
    lo = std::clamp(lo, 0, path.grid().step_count() - 1);
    const double w = k - lo;
    return (1.0 - w) * path.value(i, lo) + w * path.value(i, lo + 1);
}

GridProcess coordinate_process(const SamplePath& path, int i) {
    const int n = path.grid().step_count();
    const double* b = path.coordinate(i);
    return GridProcess(path.grid(), std::vector<double>(b, b + n + 1));
}

class SimpleBound : public BoundPathFunctional {
  public:
    SimpleBound(const PathFunctional& u, const SamplePath& p) : u_(u), path_(p) {}
    const PathFunctional& unbound() const override { return u_; }
    const SamplePath& path() const override { return path_; }
    double derivative(const TemporalIndex& theta, double t) const override {
        return u_.derivative(theta, t, path_);
    }

  private:
    const PathFunctional& u_;
    const SamplePath& path_;
};

/// Bound form for functionals whose value is a running integral: the prefix is
/// computed once and value queries become O(1); all other derivatives delegate.
class PrefixBound : public BoundPathFunctional {
  public:
    PrefixBound(const PathFunctional& u, const SamplePath& p, GridProcess prefix)
        : u_(u), path_(p), prefix_(std::move(prefix)) {}
    const PathFunctional& unbound() const override { return u_; }
    const SamplePath& path() const override { return path_; }
    double derivative(const TemporalIndex& theta, double t) const override {
        if (theta.order() == 0) return prefix_.at_node(path_.grid().node_index(t));
        return u_.derivative(theta, t, path_);
    }

  private:
    const PathFunctional& u_;
    const SamplePath& path_;
    GridProcess prefix_;
};

}  // namespace

double PathFunctional::evaluate(double t, const SamplePath& path) const {
    return derivative(TemporalIndex::empty(driver_dim()), t, path);
}

std::unique_ptr<BoundPathFunctional> PathFunctional::bind(const SamplePath& path) const {
    return std::make_unique<SimpleBound>(*this, path);
}

void PathFunctional::check_query(const TemporalIndex& theta, double t,
                                 const SamplePath& path) const {
    if (path.dimension() != driver_dim())
        throw QueryError(name() + ": path dimension mismatch");
    for (int e : theta.entries()) {
        if (e > driver_dim()) throw QueryError(name() + ": derivative entry out of range");
    }
    if (theta.weight() > max_order())
        throw CapabilityError(name() + ": derivative order not supported");
    path.grid().node_index(t);  // throws QueryError off-grid
}

double BoundPathFunctional::evaluate(double t) const {
    return derivative(TemporalIndex::empty(unbound().driver_dim()), t);
}

GridProcess BoundPathFunctional::derivative_process(const TemporalIndex& theta) const {
    const TimeGrid& grid = path().grid();
    std::vector<double> values(grid.step_count() + 1);
    for (int k = 0; k <= grid.step_count(); ++k) values[k] = derivative(theta, grid.node(k));
    return GridProcess(grid, std::move(values));
}

double RandomField::evaluate(double t, std::span<const double> x,
                             const SamplePath& path) const {
    return derivative(TemporalIndex::empty(driver_dim()), SpatialIndex::zero(spatial_dim()),
                      t, x, path);
}

void RandomField::check_query(const TemporalIndex& theta, const SpatialIndex& ell, double t,
                              std::span<const double> x, const SamplePath& path) const {
    if (path.dimension() != driver_dim())
        throw QueryError(name() + ": path dimension mismatch");
    if (static_cast<int>(x.size()) != spatial_dim() || ell.spatial_dim() != spatial_dim())
        throw QueryError(name() + ": spatial dimension mismatch");
    for (int e : theta.entries()) {
        if (e > driver_dim()) throw QueryError(name() + ": derivative entry out of range");
    }
    if (theta.weight() + ell.weight() > max_order())
        throw CapabilityError(name() + ": derivative order not supported");
    path.grid().node_index(t);
}

// --- catalog: path functionals -------------------------------------------------------

namespace {

/// u(t, omega) = sin(a0 t + a1 omega_t + phase); every derivative is a phase shift.
class MarkovianSin : public PathFunctional {
  public:
    std::string name() const override { return "markovian:sin"; }
    int driver_dim() const override { return 1; }
    int max_order() const override { return 8; }
    double derivative(const TemporalIndex& theta, double t,
                      const SamplePath& path) const override {
        check_query(theta, t, path);
        const int n = theta.order();
        const int z = theta.zero_count();
        const double arg = a0_ * t + a1_ * path.value_at(0, t) + phase_;
        return ipow(a0_, z) * ipow(a1_, n - z) * sin_deriv(n, arg);
    }

  private:
    double a0_ = 0.7, a1_ = 1.3, phase_ = 0.4;
};

/// du = B_t dt: the running time integral of the path (trapezoid rule).
class DriftFunctional : public PathFunctional {
  public:
    std::string name() const override { return "drift"; }
    int driver_dim() const override { return 1; }
    int max_order() const override { return 8; }
    double derivative(const TemporalIndex& theta, double t,
                      const SamplePath& path) const override {
        check_query(theta, t, path);
        const auto& e = theta.entries();
        if (e.empty())
            return stratonovich_integral(coordinate_process(path, 0), 0, path, 0.0, t);
        if (e == std::vector<int>{0}) return path.value_at(0, t);
        if (e == std::vector<int>{1, 0}) return 1.0;
        return 0.0;
    }
    std::unique_ptr<BoundPathFunctional> bind(const SamplePath& path) const override {
        return std::make_unique<PrefixBound>(
            *this, path, stratonovich_prefix(coordinate_process(path, 0), 0, path, 0.0));
    }
};

/// du = B^2 o dB^1 in d = 2: the running midpoint integral. The second derivative is
/// asymmetric: differentiating along coordinate 1 first gives B^2, then along
/// coordinate 2 gives 1, while the opposite order gives 0.
class AreaFunctional : public PathFunctional {
  public:
    std::string name() const override { return "area"; }
    int driver_dim() const override { return 2; }
    int max_order() const override { return 8; }
    double derivative(const TemporalIndex& theta, double t,
                      const SamplePath& path) const override {
        check_query(theta, t, path);
        const auto& e = theta.entries();
        if (e.empty())
            return stratonovich_integral(coordinate_process(path, 1), 1, path, 0.0, t);
        if (e == std::vector<int>{1}) return path.value_at(1, t);
        if (e == std::vector<int>{2, 1}) return 1.0;
        return 0.0;
    }
    std::unique_ptr<BoundPathFunctional> bind(const SamplePath& path) const override {
        return std::make_unique<PrefixBound>(
            *this, path, stratonovich_prefix(coordinate_process(path, 1), 1, path, 0.0));
    }
};

/// du = sin(B^2) o dB^1 in d = 2: same asymmetric second-derivative structure as the
/// plain area functional, but with nonvanishing higher derivatives.
class AreaSinFunctional : public PathFunctional {
  public:
    std::string name() const override { return "area:sin"; }
    int driver_dim() const override { return 2; }
    int max_order() const override { return 8; }
    double derivative(const TemporalIndex& theta, double t,
                      const SamplePath& path) const override {
        check_query(theta, t, path);
        const auto& e = theta.entries();
        if (e.empty()) return stratonovich_integral(integrand(path), 1, path, 0.0, t);
        // Nonzero only when the innermost derivative is along coordinate 1 and every
        // later one is along coordinate 2.
        if (e.back() != 1) return 0.0;
        for (std::size_t j = 0; j + 1 < e.size(); ++j)
            if (e[j] != 2) return 0.0;
        return sin_deriv(theta.order() - 1, path.value_at(1, t));
    }
    std::unique_ptr<BoundPathFunctional> bind(const SamplePath& path) const override {
        return std::make_unique<PrefixBound>(
            *this, path, stratonovich_prefix(integrand(path), 1, path, 0.0));
    }

  private:
    static GridProcess integrand(const SamplePath& path) {
        GridProcess phi = coordinate_process(path, 1);
        for (double& v : phi.values) v = std::sin(v);
        return phi;
    }
};

/// u(t, omega) = f(omega_{p ^ t}, omega_t) with f(x, y) = sin(a2 y + a1 (y - x)^2): a
/// two-coordinate functional with a single pin p. Before the pin both coordinates move
/// together and the quadratic coupling is dormant; after it, the frozen coordinate makes
/// the sensitivity path-dependent. The coupling is quadratic in the gap so the first
/// path derivative stays continuous across the pin (higher ones jump there).
class CylindricalFunctional : public PathFunctional {
  public:
    std::string name() const override { return "cylindrical"; }
    int driver_dim() const override { return 1; }
    int max_order() const override { return 8; }
    double derivative(const TemporalIndex& theta, double t,
                      const SamplePath& path) const override {
        check_query(theta, t, path);
        const double gap =
            (t <= pin_) ? 0.0 : path.value_at(0, t) - pin_value(path);
        const double zeta = a2_ * path.value_at(0, t) + a1_ * gap * gap;
        const int n = theta.order();
        if (n == 0) return std::sin(zeta);
        if (theta.zero_count() > 0) return 0.0;  // drift-free in the pinned coordinates
        if (t <= pin_) return ipow(a2_, n) * sin_deriv(n, zeta);
        // A vertical bump moves only the unfrozen coordinate: the argument responds
        // quadratically, zeta(eps) = zeta + psi eps + a1 eps^2 with psi = a2 + 2 a1 gap.
        const double psi = a2_ + 2.0 * a1_ * gap;
        double acc = 0.0;
        for (int j = 0; 2 * j <= n; ++j) {
            double coef = 1.0;  // n! / (j! (n - 2j)!)
            for (int r = n; r > n - 2 * j; --r) coef *= r;
            for (int r = 2; r <= j; ++r) coef /= r;
            acc += coef * ipow(a1_, j) * ipow(psi, n - 2 * j) * sin_deriv(n - j, zeta);
        }
        return acc;
    }

  private:
    double pin_value(const SamplePath& path) const {
        if (path.grid().is_node(pin_)) return path.value_at(0, pin_);
        return value_interp(path, 0, pin_);
    }
    double pin_ = 0.125, a1_ = 0.8, a2_ = 1.1;
};

// --- catalog: random fields ----------------------------------------------------------

/// A smooth profile with all derivatives available in closed form.
struct Profile {
    virtual ~Profile() = default;
    virtual double deriv(int k, double y) const = 0;
};

struct GaussProfile : Profile {
    // v = exp(-y^2/2); v^{(k+1)} = -(y v^{(k)} + k v^{(k-1)}).
    double deriv(int k, double y) const override {
        double prev = 0.0, cur = std::exp(-0.5 * y * y);
        for (int j = 0; j < k; ++j) {
            const double next = -(y * cur + j * prev);
            prev = cur;
            cur = next;
        }
        return cur;
    }
};

struct SinProfile : Profile {
    double a, phase;
    SinProfile(double a_, double p_) : a(a_), phase(p_) {}
    double deriv(int k, double y) const override {
        return ipow(a, k) * sin_deriv(k, a * y + phase);
    }
};

struct Poly2Profile : Profile {
    double c0, c1, c2;
    Poly2Profile(double c0_, double c1_, double c2_) : c0(c0_), c1(c1_), c2(c2_) {}
    double deriv(int k, double y) const override {
        if (k == 0) return c0 + c1 * y + c2 * y * y;
        if (k == 1) return c1 + 2.0 * c2 * y;
        if (k == 2) return 2.0 * c2;
        return 0.0;
    }
};

/// u(t, x) = v(x + B_t): a classical solution of du = du/dx o dB. Time derivatives
/// vanish (the quadratic-variation drift cancels against half the second derivative),
/// and every mixed derivative is a higher derivative of the profile.
class TransportField : public RandomField {
  public:
    TransportField(std::string name, std::shared_ptr<const Profile> v)
        : name_(std::move(name)), v_(std::move(v)) {}
    std::string name() const override { return name_; }
    int driver_dim() const override { return 1; }
    int spatial_dim() const override { return 1; }
    int max_order() const override { return 8; }
    double derivative(const TemporalIndex& theta, const SpatialIndex& ell, double t,
                      std::span<const double> x, const SamplePath& path) const override {
        check_query(theta, ell, t, x, path);
        if (theta.zero_count() > 0) return 0.0;
        return v_->deriv(theta.order() + ell.weight(), x[0] + path.value_at(0, t));
    }

  private:
    std::string name_;
    std::shared_ptr<const Profile> v_;
};

/// u(t, x) = v(x) exp(B_t): a classical solution of du = u o dB.
class MultiplicativeField : public RandomField {
  public:
    std::string name() const override { return "multiplicative"; }
    int driver_dim() const override { return 1; }
    int spatial_dim() const override { return 1; }
    int max_order() const override { return 8; }
    double derivative(const TemporalIndex& theta, const SpatialIndex& ell, double t,
                      std::span<const double> x, const SamplePath& path) const override {
        check_query(theta, ell, t, x, path);
        if (theta.zero_count() > 0) return 0.0;
        return sin_deriv(ell.weight(), x[0] + shift_) * std::exp(path.value_at(0, t));
    }

  private:
    double shift_ = 0.3;
};

/// u(t, x) = exp(-t/2) sin(x): deterministic heat-type solution, du = (u_xx / 2) dt.
class HeatField : public RandomField {
  public:
    std::string name() const override { return "heat-deterministic"; }
    int driver_dim() const override { return 1; }
    int spatial_dim() const override { return 1; }
    int max_order() const override { return 8; }
    double derivative(const TemporalIndex& theta, const SpatialIndex& ell, double t,
                      std::span<const double> x, const SamplePath& path) const override {
        check_query(theta, ell, t, x, path);
        const int n = theta.order();
        if (theta.zero_count() != n) return 0.0;  // any omega-derivative kills it
        return ipow(-0.5, n) * std::exp(-0.5 * t) * sin_deriv(ell.weight(), x[0]);
    }
};

}  // namespace

// --- adapters ------------------------------------------------------------------------

FieldSection::FieldSection(std::shared_ptr<const RandomField> field, std::vector<double> x)
    : field_(std::move(field)), x_(std::move(x)) {
    if (!field_) throw ConfigError("FieldSection: null field");
    if (static_cast<int>(x_.size()) != field_->spatial_dim())
        throw ConfigError("FieldSection: spatial dimension mismatch");
}

std::string FieldSection::name() const { return field_->name() + "@x"; }
int FieldSection::driver_dim() const { return field_->driver_dim(); }
int FieldSection::max_order() const { return field_->max_order(); }

double FieldSection::derivative(const TemporalIndex& theta, double t,
                                const SamplePath& path) const {
    return field_->derivative(theta, SpatialIndex::zero(field_->spatial_dim()), t, x_, path);
}

DerivedFunctional::DerivedFunctional(std::shared_ptr<const PathFunctional> base,
                                     TemporalIndex theta)
    : base_(std::move(base)), theta_(std::move(theta)) {
    if (!base_) throw ConfigError("DerivedFunctional: null base");
    if (theta_.weight() > base_->max_order())
        throw CapabilityError("DerivedFunctional: base order too low");
}

std::string DerivedFunctional::name() const {
    return "D" + theta_.to_string() + "[" + base_->name() + "]";
}
int DerivedFunctional::driver_dim() const { return base_->driver_dim(); }
int DerivedFunctional::max_order() const { return base_->max_order() - theta_.weight(); }

double DerivedFunctional::derivative(const TemporalIndex& eta, double t,
                                     const SamplePath& path) const {
    return base_->derivative(eta.concat(theta_), t, path);
}

DerivedField::DerivedField(std::shared_ptr<const RandomField> base, TemporalIndex theta,
                           SpatialIndex ell)
    : base_(std::move(base)), theta_(std::move(theta)), ell_(std::move(ell)) {
    if (!base_) throw ConfigError("DerivedField: null base");
    if (ell_.spatial_dim() != base_->spatial_dim())
        throw ConfigError("DerivedField: spatial dimension mismatch");
    if (theta_.weight() + ell_.weight() > base_->max_order())
        throw CapabilityError("DerivedField: base order too low");
}

std::string DerivedField::name() const {
    return "D" + theta_.to_string() + "Dx" + ell_.to_string() + "[" + base_->name() + "]";
}
int DerivedField::driver_dim() const { return base_->driver_dim(); }
int DerivedField::spatial_dim() const { return base_->spatial_dim(); }
int DerivedField::max_order() const {
    return base_->max_order() - theta_.weight() - ell_.weight();
}

double DerivedField::derivative(const TemporalIndex& eta, const SpatialIndex& k, double t,
                                std::span<const double> x, const SamplePath& path) const {
    std::vector<int> sum = k.entries();
    for (int i = 0; i < ell_.spatial_dim(); ++i) sum[i] += ell_.entries()[i];
    return base_->derivative(eta.concat(theta_), SpatialIndex(std::move(sum)), t, x, path);
}

CoordinateFunctional::CoordinateFunctional(int dimension, int coordinate)
    : dim_(dimension), coord_(coordinate) {
    if (dim_ < 1 || coord_ < 0 || coord_ >= dim_)
        throw ConfigError("CoordinateFunctional: bad coordinate");
}

double CoordinateFunctional::derivative(const TemporalIndex& theta, double t,
                                        const SamplePath& path) const {
    check_query(theta, t, path);
    if (theta.order() == 0) return path.value_at(coord_, t);
    if (theta.entries() == std::vector<int>{coord_ + 1}) return 1.0;
    return 0.0;
}

ConstantFunctional::ConstantFunctional(double value, int dimension)
    : value_(value), dim_(dimension) {
    if (dim_ < 1) throw ConfigError("ConstantFunctional: bad dimension");
}

double ConstantFunctional::derivative(const TemporalIndex& theta, double t,
                                      const SamplePath& path) const {
    check_query(theta, t, path);
    return theta.order() == 0 ? value_ : 0.0;
}

// --- factories -----------------------------------------------------------------------

std::shared_ptr<const PathFunctional> make_path_functional(const std::string& name) {
    if (name == "markovian:sin") return std::make_shared<MarkovianSin>();
    if (name == "drift") return std::make_shared<DriftFunctional>();
    if (name == "area") return std::make_shared<AreaFunctional>();
    if (name == "area:sin") return std::make_shared<AreaSinFunctional>();
    if (name == "cylindrical") return std::make_shared<CylindricalFunctional>();
    if (name == "coordinate") return std::make_shared<CoordinateFunctional>();
    if (name == "constant") return std::make_shared<ConstantFunctional>(1.0);
    throw ConfigError("unknown path functional: " + name);
}

std::shared_ptr<const RandomField> make_random_field(const std::string& name) {
    if (name == "transport:gauss")
        return std::make_shared<TransportField>(name, std::make_shared<GaussProfile>());
    if (name == "transport:sin")
        return std::make_shared<TransportField>(name, std::make_shared<SinProfile>(1.2, 0.5));
    if (name == "transport:poly2")
        return std::make_shared<TransportField>(name,
                                                std::make_shared<Poly2Profile>(0.4, -0.9, 0.35));
    if (name == "multiplicative") return std::make_shared<MultiplicativeField>();
    if (name == "heat-deterministic") return std::make_shared<HeatField>();
    throw ConfigError("unknown random field: " + name);
}

std::vector<std::string> path_functional_names() {
    return {"markovian:sin", "drift", "area", "area:sin", "cylindrical"};
}

std::vector<std::string> random_field_names() {
    return {"transport:gauss", "transport:sin", "transport:poly2", "multiplicative",
            "heat-deterministic"};
}

// --- operations ----------------------------------------------------------------------

double functional_ito_residual(const PathFunctional& u, const SamplePath& path, double T) {
    const int d = u.driver_dim();
    auto bound = u.bind(path);
    double recon = stratonovich_integral(
        bound->derivative_process(TemporalIndex({0}, d)), 0, path, 0.0, T);
    for (int i = 1; i <= d; ++i)
        recon += stratonovich_integral(bound->derivative_process(TemporalIndex({i}, d)), i,
                                       path, 0.0, T);
    return bound->evaluate(T) - bound->evaluate(0.0) - recon;
}

std::pair<double, double> chain_rule_residual(
    const RandomField& u, std::span<const std::shared_ptr<const PathFunctional>> X,
    const SamplePath& path, double t) {
    const int d = u.driver_dim();
    const int dp = u.spatial_dim();
    if (static_cast<int>(X.size()) != dp)
        throw QueryError("chain_rule_residual: need one inner functional per coordinate");
    for (const auto& xj : X) {
        if (!xj || xj->driver_dim() != d)
            throw QueryError("chain_rule_residual: inner functional dimension mismatch");
    }
    const TimeGrid& grid = path.grid();
    const int k = grid.node_index(t);
    if (k < 1 || k + 2 > grid.step_count())
        throw QueryError("chain_rule_residual: t too close to the grid boundary");

    auto composite = [&](double s, const SamplePath& p) {
        std::vector<double> xv(dp);
        for (int j = 0; j < dp; ++j) xv[j] = X[j]->evaluate(s, p);
        return u.evaluate(s, xv, p);
    };

    std::vector<double> xv(dp);
    for (int j = 0; j < dp; ++j) xv[j] = X[j]->evaluate(t, path);
    const SpatialIndex zero = SpatialIndex::zero(dp);

    // Time side along the path frozen at t: one-sided second-order stencil.
    const double dt = grid.dt();
    const SamplePath frozen = freeze_path(path, k);
    const double c0 = composite(t, frozen);
    const double c1 = composite(grid.node(k + 1), frozen);
    const double c2 = composite(grid.node(k + 2), frozen);
    const double lhs_time = (-3.0 * c0 + 4.0 * c1 - c2) / (2.0 * dt);
    double rhs_time = u.derivative(TemporalIndex({0}, d), zero, t, xv, path);
    for (int j = 0; j < dp; ++j)
        rhs_time += u.derivative(TemporalIndex::empty(d), zero.bump(j), t, xv, path) *
                    X[j]->derivative(TemporalIndex({0}, d), t, path);
    const double time_residual = lhs_time - rhs_time;

    // Omega side: central vertical bump at t, step tied to the grid.
    const double eps = std::sqrt(dt);
    double omega_residual = 0.0;
    for (int i = 1; i <= d; ++i) {
        const SamplePath up = bump_path(path, i - 1, k, eps);
        const SamplePath down = bump_path(path, i - 1, k, -eps);
        const double lhs = (composite(t, up) - composite(t, down)) / (2.0 * eps);
        double rhs = u.derivative(TemporalIndex({i}, d), zero, t, xv, path);
        for (int j = 0; j < dp; ++j)
            rhs += X[j]->derivative(TemporalIndex({i}, d), t, path) *
                   u.derivative(TemporalIndex::empty(d), zero.bump(j), t, xv, path);
        omega_residual = std::max(omega_residual, std::abs(lhs - rhs));
    }
    return {time_residual, omega_residual};
}

}  // namespace ptx
