#pragma once

#include <vector>

#include "ptx/functionals.hpp"
#include "ptx/integrals.hpp"

namespace ptx {

/// One expansion query: base node t, signed grid-aligned offset delta with
/// |delta| >= 10*dt, expansion order m (capped at order_cap unless the functional and
/// the caller both allow more). Fields additionally take a base point x and offset h.
struct ExpansionQuery {
    double t = 0.0;
    double delta = 0.0;
    int m = 0;
    std::vector<double> x;  // base point (fields only)
    std::vector<double> h;  // spatial offset (fields only)
    int order_cap = 4;
    int quadrature_order = 8;  // kappa-integral nodes in the field recursion
};

struct ExpansionTerm {
    CombinedIndex index;
    double coefficient = 0.0;  // D_x^ell D^theta u at (t, x)
    double integral = 0.0;     // I^theta over [t, t+delta], signed convention
    double monomial = 0.0;     // h^ell / ell!
    double contribution() const { return coefficient * integral * monomial; }
};

struct ExpansionResult {
    std::vector<ExpansionTerm> terms;  // canonical enumerate_indices order
    double predicted = 0.0;            // sum of contributions
    double actual = 0.0;               // u(t+delta, x+h)
    double remainder = 0.0;            // actual - predicted, definitional
};

/// Order-m pathwise expansion of a path functional; negative delta uses the
/// sign-and-reversal convention through signed_integral.
ExpansionResult expand(const PathFunctional& u, const SamplePath& path,
                       const ExpansionQuery& q);

/// Order-m expansion of a random field in (delta, h) jointly.
ExpansionResult expand_field(const RandomField& u, const SamplePath& path,
                             const ExpansionQuery& q);

/// Closed-form second-order variants. `full` contracts the Hessian against the raw
/// second-level integrals (equals the generic m=2 expansion); `levy_split` splits them
/// into symmetric part plus half the Lévy area before contracting (same value, distinct
/// route); `symmetrized` keeps only the symmetric part, dropping the area correction —
/// for asymmetric Hessians this degrades the remainder by half an order.
enum class SecondOrderVariant { full, levy_split, symmetrized };

ExpansionResult expand_second_order(const PathFunctional& u, const SamplePath& path,
                                    const ExpansionQuery& q, SecondOrderVariant variant);

/// Independent remainder routes used as oracles against the definitional remainder.
/// `full` integrates the order-(m+1) derivative layer (plus the time-derivative layer
/// of the order-m one); it needs derivatives one weight level beyond m+1 in the time
/// direction. `hoelder` uses only order m+1 data, trading it for inner remainders.
enum class RemainderRepresentation { full, hoelder };

double remainder_via_representation(const PathFunctional& u, const SamplePath& path,
                                    const ExpansionQuery& q,
                                    RemainderRepresentation variant);

/// Residual of the spatial-offset recursion
///   R_m(h) = R_m(0) + sum_i h_i * int_0^1 R_{m-1}(du/dx_i at offset h^i(kappa)) dkappa,
/// with h^i(kappa) = (h_1, ..., h_{i-1}, kappa*h_i, 0, ..., 0) and the kappa-integral
/// by Gauss-Legendre of order q.quadrature_order.
double field_remainder_recursion_residual(const RandomField& u, const SamplePath& path,
                                          const ExpansionQuery& q);

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre_unit(int order, std::vector<double>& nodes,
                         std::vector<double>& weights);

}  // namespace ptx
