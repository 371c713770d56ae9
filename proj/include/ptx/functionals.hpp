#pragma once

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ptx/brownian.hpp"
#include "ptx/indices.hpp"
#include "ptx/integrals.hpp"

namespace ptx {

class BoundPathFunctional;

/// A path functional u(t, omega) that exposes its value and its path-calculus
/// derivatives D^theta u analytically. theta's zero entries denote the time derivative
/// and entry i >= 1 the derivative along coordinate i; the leftmost entry of theta is
/// applied last (outermost). Derivative values are adapted: they depend on the path
/// only through its restriction to [0, t].
///
/// Catalog entries assert by construction that the time derivative exists (the drift
/// part of each derivative is absolutely continuous); there is no runtime decision
/// procedure for that structural property.
class PathFunctional {
  public:
    virtual ~PathFunctional() = default;

    virtual std::string name() const = 0;
    virtual int driver_dim() const = 0;
    /// Maximum supported combined weight |theta|.
    virtual int max_order() const = 0;

    /// D^theta u(t, omega); empty theta is the value itself.
    virtual double derivative(const TemporalIndex& theta, double t,
                              const SamplePath& path) const = 0;
    double evaluate(double t, const SamplePath& path) const;

    /// Attach to one path, caching any running integrals the functional carries.
    virtual std::unique_ptr<BoundPathFunctional> bind(const SamplePath& path) const;

  protected:
    /// Throws CapabilityError / QueryError for out-of-contract queries.
    void check_query(const TemporalIndex& theta, double t, const SamplePath& path) const;
};

/// A path functional attached to one path; repeated derivative queries are O(1)
/// after construction (running integrals are precomputed).
class BoundPathFunctional {
  public:
    virtual ~BoundPathFunctional() = default;
    virtual const PathFunctional& unbound() const = 0;
    virtual const SamplePath& path() const = 0;
    virtual double derivative(const TemporalIndex& theta, double t) const = 0;
    double evaluate(double t) const;

    /// D^theta u as a process over all grid nodes.
    GridProcess derivative_process(const TemporalIndex& theta) const;
};

/// A random field u(t, x, omega) with both spatial and path derivatives; spatial
/// derivatives D_x^ell commute with D^theta.
class RandomField {
  public:
    virtual ~RandomField() = default;

    virtual std::string name() const = 0;
    virtual int driver_dim() const = 0;
    virtual int spatial_dim() const = 0;
    virtual int max_order() const = 0;

    virtual double derivative(const TemporalIndex& theta, const SpatialIndex& ell,
                              double t, std::span<const double> x,
                              const SamplePath& path) const = 0;
    double evaluate(double t, std::span<const double> x, const SamplePath& path) const;

  protected:
    void check_query(const TemporalIndex& theta, const SpatialIndex& ell, double t,
                     std::span<const double> x, const SamplePath& path) const;
};

/// The field frozen at one spatial point, viewed as a path functional.
class FieldSection : public PathFunctional {
  public:
    FieldSection(std::shared_ptr<const RandomField> field, std::vector<double> x);
    std::string name() const override;
    int driver_dim() const override;
    int max_order() const override;
    double derivative(const TemporalIndex& theta, double t,
                      const SamplePath& path) const override;

  private:
    std::shared_ptr<const RandomField> field_;
    std::vector<double> x_;
};

/// w = D_x^ell D^theta u as a functional in its own right: D^eta w = D^{eta, theta} u.
class DerivedFunctional : public PathFunctional {
  public:
    DerivedFunctional(std::shared_ptr<const PathFunctional> base, TemporalIndex theta);
    std::string name() const override;
    int driver_dim() const override;
    int max_order() const override;
    double derivative(const TemporalIndex& eta, double t,
                      const SamplePath& path) const override;

  private:
    std::shared_ptr<const PathFunctional> base_;
    TemporalIndex theta_;
};

/// Same for fields, additionally accumulating spatial orders.
class DerivedField : public RandomField {
  public:
    DerivedField(std::shared_ptr<const RandomField> base, TemporalIndex theta,
                 SpatialIndex ell);
    std::string name() const override;
    int driver_dim() const override;
    int spatial_dim() const override;
    int max_order() const override;
    double derivative(const TemporalIndex& eta, const SpatialIndex& k, double t,
                      std::span<const double> x, const SamplePath& path) const override;

  private:
    std::shared_ptr<const RandomField> base_;
    TemporalIndex theta_;
    SpatialIndex ell_;
};

/// u(t, omega) = omega^i_t. Used as the composition argument in chain-rule checks.
class CoordinateFunctional : public PathFunctional {
  public:
    explicit CoordinateFunctional(int dimension = 1, int coordinate = 0);
    std::string name() const override { return "coordinate"; }
    int driver_dim() const override { return dim_; }
    int max_order() const override { return 8; }
    double derivative(const TemporalIndex& theta, double t,
                      const SamplePath& path) const override;

  private:
    int dim_;
    int coord_;
};

class ConstantFunctional : public PathFunctional {
  public:
    explicit ConstantFunctional(double value, int dimension = 1);
    std::string name() const override { return "constant"; }
    int driver_dim() const override { return dim_; }
    int max_order() const override { return 8; }
    double derivative(const TemporalIndex& theta, double t,
                      const SamplePath& path) const override;

  private:
    double value_;
    int dim_;
};

/// Catalog lookup by CLI name. Path functionals: "markovian:sin", "drift", "area",
/// "area:sin", "cylindrical", "coordinate", "constant". Random fields:
/// "transport:gauss", "transport:sin", "transport:poly2", "multiplicative",
/// "heat-deterministic". Unknown names raise ConfigError.
std::shared_ptr<const PathFunctional> make_path_functional(const std::string& name);
std::shared_ptr<const RandomField> make_random_field(const std::string& name);
std::vector<std::string> path_functional_names();
std::vector<std::string> random_field_names();

/// u_T - u_0 - int_0^T (time derivative) ds - sum_i int_0^T (omega^i derivative) o dB^i;
/// the reconstruction residual of the functional against its own derivatives.
double functional_ito_residual(const PathFunctional& u, const SamplePath& path, double T);

/// Residuals of the two composition identities at time t for the composite
/// w(t) = u(t, X_t): first the time side, then the omega side (max over coordinates).
/// Left sides are finite differences of the composite: the omega side bumps the path
/// vertically at t by +/- eps with eps = sqrt(dt); the time side advances the composite
/// along the path frozen at t with a one-sided second-order stencil. Right sides come
/// from the supplied derivative tables.
std::pair<double, double> chain_rule_residual(
    const RandomField& u, std::span<const std::shared_ptr<const PathFunctional>> X,
    const SamplePath& path, double t);

}  // namespace ptx
