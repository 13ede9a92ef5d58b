#pragma once

#include <vector>

#include "warpgeo/calculus.hpp"
#include "warpgeo/chart.hpp"
#include "warpgeo/fd.hpp"

namespace warpgeo {

/// A warped product: base (M^m, g), fiber (N^n, h), and a weight psi on the
/// base chart scaling the fiber by e^{2 psi}. Product points concatenate
/// base coordinates before fiber coordinates.
struct WarpedSpace {
    MetricField base_metric;
    MetricField fiber_metric;
    ScalarField weight;

    [[nodiscard]] int base_dim() const { return base_metric.chart.dim(); }
    [[nodiscard]] int fiber_dim() const { return fiber_metric.chart.dim(); }
    [[nodiscard]] Chart product_chart() const {
        return Chart::product(base_metric.chart, fiber_metric.chart);
    }

    [[nodiscard]] Vec base_part(const Vec& p) const { return p.head(base_dim()); }
    [[nodiscard]] Vec fiber_part(const Vec& p) const { return p.tail(fiber_dim()); }
};

/// The warped metric g + e^{2 psi} h as a field on the product chart;
/// block diagonal with exactly zero off-diagonal blocks.
[[nodiscard]] MetricField warped_metric(const WarpedSpace& ws);

/// Christoffel symbols of the warped metric at a product point, assembled
/// blockwise from the product connection rules (base and fiber symbols plus
/// the d(psi) coupling terms) instead of differencing the product metric.
[[nodiscard]] Tensor3 warped_christoffel(const WarpedSpace& ws, const Vec& p,
                                         const FdConfig& fd = {});

/// Max absolute deviation between finite-difference Christoffel symbols of
/// the assembled product metric and the blockwise product rules, over all
/// index combinations. Near zero for any valid warped space.
[[nodiscard]] double warped_connection_residual(const WarpedSpace& ws, const Vec& p,
                                                const FdConfig& fd = {});

/// The base-volume m-form on the product: Omega(v_1, ..., v_m) is the
/// g-volume of the base components of the v_j, with the coordinate
/// orientation of the base chart. Expects exactly m ambient vectors.
[[nodiscard]] double omega_eval(const WarpedSpace& ws, const Vec& p,
                                const std::vector<Vec>& vectors);

/// Component of the form on coordinate directions (indices strictly
/// increasing into the product chart).
[[nodiscard]] double omega_component(const WarpedSpace& ws, const Vec& p,
                                     const std::vector<int>& indices);

/// Max |dOmega| component over all strictly increasing (m+1)-tuples of
/// coordinate directions, each computed by central differences of the form
/// components. The form is closed, so this is a pure consistency residual.
[[nodiscard]] double omega_closedness_residual(const WarpedSpace& ws, const Vec& p,
                                               const FdConfig& fd = {});

/// Max component of the full covariant derivative of the form (coordinate
/// derivative minus connection contractions, using the blockwise product
/// symbols). Vanishes iff the weight is constant, unlike the exterior
/// derivative; the two routes serve as independent cross-checks.
[[nodiscard]] double omega_parallel_residual(const WarpedSpace& ws, const Vec& p,
                                             const FdConfig& fd = {});

/// Coefficients of the normal-bundle morphism induced by the form: for a
/// tangent vector X of a graph with ambient-orthonormal tangent frame
/// columns T and normal frame columns N,
///   c_a = sum_i <X, T_i> (-1)^{i-1} Omega(N_a, T_1, .., skip i, .., T_m).
/// The assembled normal vector sum_a c_a N_a pairs against normals exactly
/// as the form contracts against the frame's volume element.
/// Throws when either frame fails orthonormality by more than 1e-8.
[[nodiscard]] Vec phi_morphism(const WarpedSpace& ws, const Vec& p, const Mat& tangent_frame,
                               const Vec& x_tangent, const Mat& normal_frame);

} // namespace warpgeo
