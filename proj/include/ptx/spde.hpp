#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ptx/taylor.hpp"

namespace ptx {

/// Small dense row-major matrix, just enough for the coefficient algebra.
struct Mat {
    int rows = 0, cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}
    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
};

/// Evaluation point for the coefficient functions: y = u, z = du/dx (length d'),
/// gamma = d2u/dx2 (d' x d').
struct CoefficientProbe {
    double t = 0.0;
    std::vector<double> x;
    double y = 0.0;
    std::vector<double> z;
    Mat gamma;
};

/// The pair (f, g) of an equation du = f(t,x,u,u_x,u_xx) dt + g(t,x,u,u_x) o dB, with
/// the partial derivatives the coefficient algebra needs. All derivatives are supplied
/// in closed form; gamma enters f only.
class SpdeCoefficients {
  public:
    virtual ~SpdeCoefficients() = default;

    virtual std::string name() const = 0;
    virtual int driver_dim() const = 0;   // d, length of g
    virtual int spatial_dim() const = 0;  // d'

    virtual double f(const CoefficientProbe& p) const = 0;
    virtual Mat f_gamma(const CoefficientProbe& p) const = 0;  // d' x d'

    virtual std::vector<double> g(const CoefficientProbe& p) const = 0;  // length d
    virtual Mat g_x(const CoefficientProbe& p) const = 0;  // (i,j) = d g_j / d x_i, d' x d
    virtual std::vector<double> g_y(const CoefficientProbe& p) const = 0;  // length d
    virtual Mat g_z(const CoefficientProbe& p) const = 0;  // (k,j) = d g_j / d z_k, d' x d
    /// Path derivative of a random coefficient; identically zero for the deterministic
    /// coefficients covered here.
    virtual Mat g_omega(const CoefficientProbe&) const {
        return Mat(driver_dim(), driver_dim());
    }
};

/// d = d' = 1 coefficients built from plain callables on (t, x, y, z, gamma).
class ScalarSpde : public SpdeCoefficients {
  public:
    using Fn = std::function<double(double t, double x, double y, double z, double gamma)>;

    ScalarSpde(std::string name, Fn f, Fn f_gamma, Fn g, Fn g_x, Fn g_y, Fn g_z);

    std::string name() const override { return name_; }
    int driver_dim() const override { return 1; }
    int spatial_dim() const override { return 1; }
    double f(const CoefficientProbe& p) const override;
    Mat f_gamma(const CoefficientProbe& p) const override;
    std::vector<double> g(const CoefficientProbe& p) const override;
    Mat g_x(const CoefficientProbe& p) const override;
    std::vector<double> g_y(const CoefficientProbe& p) const override;
    Mat g_z(const CoefficientProbe& p) const override;

  private:
    std::string name_;
    Fn f_, f_gamma_, g_, g_x_, g_y_, g_z_;
};

/// Second-order expansion data derived from (f, g) and the solution's spatial
/// derivatives alone, without touching the field's own path-derivative table.
struct DerivedExpansionCoefficients {
    double t_u = 0.0;                // time derivative, = f
    std::vector<double> omega_u;     // first path derivative, = g
    Mat x_omega_u;                   // d' x d, (i,j) = d/dx_i d/domega^j u
    Mat omega_omega_u;               // d x d, (a,b) = d/domega^a d/domega^b u
    double ito_drift = 0.0;          // F = f + (1/2) tr(omega_omega_u)
};

DerivedExpansionCoefficients derive_coefficients(const SpdeCoefficients& c,
                                                 const RandomField& u, double t,
                                                 std::span<const double> x,
                                                 const SamplePath& path);

/// The coercivity matrix d f / d gamma = d F / d gamma - (1/2)(dg/dz)(dg/dz)^T at the
/// probe, plus a positive-semidefiniteness flag (eigenvalues >= -1e-10).
std::pair<Mat, bool> parabolicity(const SpdeCoefficients& c, const CoefficientProbe& probe);

struct SixTuple {
    double a = 0.0;  // time derivative
    double b = 0.0;  // first path derivative
    double c = 0.0;  // second path derivative
    double p = 0.0;  // first spatial derivative
    double q = 0.0;  // mixed path/spatial derivative
    double X = 0.0;  // second spatial derivative
};

/// Both routes to the six expansion coefficients in d = d' = 1: from the field's own
/// derivative table, and from (f, g) via the coefficient algebra.
std::pair<SixTuple, SixTuple> six_tuple_routes(const SpdeCoefficients& c,
                                               const RandomField& u, double t, double x,
                                               const SamplePath& path);

/// The derivative-table route, after asserting the two routes agree within 1e-10
/// relative (ConsistencyError otherwise).
SixTuple six_tuple(const SpdeCoefficients& c, const RandomField& u, double t, double x,
                   const SamplePath& path);

/// Second-order expansion built purely from derive_coefficients; must coincide
/// term-by-term with expand_field on the same query. Requires q.m == 2.
ExpansionResult spde_expand(const SpdeCoefficients& c, const RandomField& u,
                            const SamplePath& path, const ExpansionQuery& q);

/// Catalog equations paired with their known solution fields:
/// "transport:sin" / "transport:gauss" / "transport:poly2" (f = 0, g = z),
/// "multiplicative" (f = 0, g = y), "heat-deterministic" (f = gamma/2, g = 0).
std::pair<std::shared_ptr<const SpdeCoefficients>, std::shared_ptr<const RandomField>>
make_spde_case(const std::string& name);
std::vector<std::string> spde_case_names();

}  // namespace ptx
