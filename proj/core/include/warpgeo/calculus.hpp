#pragma once

#include <vector>

#include "warpgeo/chart.hpp"
#include "warpgeo/fd.hpp"

namespace warpgeo {

/// Rank-3 tensors are stored as a vector of matrices indexed by the first
/// (upper) slot: christoffel(...)[k](i,j) = Gamma^k_ij.
using Tensor3 = std::vector<Mat>;

/// Jacobian of a chart map: the analytic one when supplied, otherwise
/// central differences of eval with first-order steps.
[[nodiscard]] Mat map_jacobian(const GraphMap& f, const Vec& p, const FdConfig& fd = {});

/// Christoffel symbols Gamma^k_ij of the metric at p, from central
/// differences of the metric components. Symmetric in (i,j).
[[nodiscard]] Tensor3 christoffel(const MetricField& metric, const Vec& p,
                                  const FdConfig& fd = {});

/// Gradient g^{ij} d_j s. Uses the analytic gradient of s when present for
/// the coordinate differential; otherwise central differences.
[[nodiscard]] Vec gradient(const MetricField& metric, const ScalarField& s, const Vec& p,
                           const FdConfig& fd = {});

/// Divergence (1/sqrt(det g)) d_i (sqrt(det g) V^i).
/// derived_field selects the coarser differencing step for vector fields
/// that are themselves finite-difference results.
[[nodiscard]] double divergence(const MetricField& metric, const VectorField& V, const Vec& p,
                                const FdConfig& fd = {}, bool derived_field = false);

/// Weighted divergence div_g(V) + d(psi)(V), the divergence of the measure
/// e^psi dM. Cross-checkable against e^{-psi} div_g(e^psi V).
[[nodiscard]] double weighted_divergence(const MetricField& metric, const ScalarField& psi,
                                         const VectorField& V, const Vec& p,
                                         const FdConfig& fd = {}, bool derived_field = false);

/// Covariant Hessian of a scalar: d_i d_j s - Gamma^k_ij d_k s. Symmetric.
[[nodiscard]] Mat hessian_scalar(const MetricField& metric, const ScalarField& s, const Vec& p,
                                 const FdConfig& fd = {});

/// Ricci tensor at p. Christoffel symbols and their derivatives are
/// assembled from first and second differences of the metric directly, so
/// no nested differencing of already-differenced data occurs.
[[nodiscard]] Mat ricci(const MetricField& metric, const Vec& p, const FdConfig& fd = {});

/// Ricci - Hess(psi), the curvature proxy of the weighted manifold (g, e^psi).
[[nodiscard]] Mat bakry_emery_ricci(const MetricField& metric, const ScalarField& psi,
                                    const Vec& p, const FdConfig& fd = {});

/// Hessian of a map f:(M,gM) -> (N,hN) with respect to both Levi-Civita
/// connections: out[a](i,j) = d_i d_j f^a + Gamma^a_bc(f(p)) J^b_i J^c_j
///                            - Gamma^k_ij(p) d_k f^a.
/// Symmetric in (i,j). Second derivatives difference the analytic Jacobian
/// when f carries one, which keeps the noise floor near machine epsilon.
[[nodiscard]] Tensor3 map_hessian(const MetricField& gM, const MetricField& hN,
                                  const GraphMap& f, const Vec& p, const FdConfig& fd = {});

} // namespace warpgeo
