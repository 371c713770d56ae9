#pragma once

#include <vector>

#include "ptx/brownian.hpp"
#include "ptx/indices.hpp"

namespace ptx {

/// An adapted integrand evaluated along a fixed path: one value per grid node.
struct GridProcess {
    TimeGrid grid;
    std::vector<double> values;

    GridProcess(TimeGrid g, std::vector<double> v);
    static GridProcess constant(const TimeGrid& g, double c);

    double at_node(int k) const { return values[static_cast<std::size_t>(k)]; }
};

/// Step-2 signature of the path over [s, t]: the increment, the second-level matrix
/// with entries second_level(i,j) = ∫_s^t B^i_{s,r} ∘ dB^j_r (row = inner integrand,
/// column = outer driver), and the Lévy area A = second_level − second_levelᵀ.
struct Step2Signature {
    std::vector<double> increment;          // length d
    std::vector<double> second_level;       // d x d, row-major
    std::vector<double> levy_area;          // d x d, row-major
    int dim = 0;

    double second(int i, int j) const { return second_level[static_cast<std::size_t>(i) * dim + j]; }
    double area(int i, int j) const { return levy_area[static_cast<std::size_t>(i) * dim + j]; }
};

/// Single Stratonovich layer over grid nodes [s, t]. driver_index 0 integrates against dt
/// by the trapezoid rule; driver_index i >= 1 against ∘dB^i by the midpoint rule
/// Σ ½(φ_k + φ_{k+1})·ΔB^i_k. Both share the same weights, which is what makes the
/// shuffle and d=1 square identities exact at the discrete level.
double stratonovich_integral(const GridProcess& phi, int driver_index,
                             const SamplePath& path, double s, double t);

/// Running prefix r ↦ ∫_s^r φ d_i (same rule as stratonovich_integral); nodes before s are 0.
GridProcess stratonovich_prefix(const GridProcess& phi, int driver_index,
                                const SamplePath& path, double s);

/// Iterated integral I^θ_{s,t}(φ), innermost layer driven by θ_1 and outermost by θ_n.
/// Empty θ returns φ_t. Each layer is materialized as a GridProcess, O(|θ|₀·N) total.
double iterated_integral(const TemporalIndex& theta, const GridProcess& phi,
                         const SamplePath& path, double s, double t);

/// Running prefix r ↦ I^θ_{s,r}(φ).
GridProcess iterated_prefix(const TemporalIndex& theta, const GridProcess& phi,
                            const SamplePath& path, double s);

/// I^θ_{a,b}(φ) for endpoints in either order: a > b evaluates
/// (−1)^{|θ|₀} I^{reverse(θ)}_{b,a}(φ), the backward convention.
double signed_integral(const TemporalIndex& theta, const GridProcess& phi,
                       const SamplePath& path, double a, double b);

Step2Signature step2_signature(const SamplePath& path, double s, double t);

/// Residual of the integration-by-parts identity
///   ∫_s^t (φ_r · I^{-θ̃}_{s,r}(1)) d_{θ₁} r
///     = Σ_{i=1}^n (−1)^{i−1} I^{(θ₁..θ_i)}_{s,t}(φ) · I^{(θ_{i+1}..θ_n)}_{s,t}(1),
/// where θ = (θ₁, θ̃) and −θ̃ reverses the tail. Used as a test oracle; should vanish
/// under grid refinement.
double ibp_identity_residual(const TemporalIndex& theta, const GridProcess& phi,
                             const SamplePath& path, double s, double t);

}  // namespace ptx
