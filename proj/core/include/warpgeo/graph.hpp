#pragma once

#include <cstdint>

#include "warpgeo/calculus.hpp"
#include "warpgeo/warped.hpp"

namespace warpgeo {

/// Pointwise eigen-structure of a graph x -> (x, f(x)) in a warped product.
/// The columns of base_frame simultaneously g-orthonormalize the base metric
/// and diagonalize the pulled-back (warped) fiber metric, with squared
/// singular values in descending order. graph_frame rescales those columns
/// to an orthonormal frame of the induced metric, and fiber_frame holds the
/// image directions (normalized for the warped fiber metric) completed to a
/// full fiber basis beyond the rank.
struct GraphPointFrame {
    Vec point;              // base point x
    Vec singular_values_sq; // descending, size m; zero beyond the rank
    int rank = 0;
    Mat base_frame;         // m x m, columns X_i with X^T g X = I
    Mat graph_frame;        // m x m, columns X_i / sqrt(1 + lambda_i^2)
    Mat fiber_frame;        // n x n, columns U_i with U^T htilde U = I
    Mat jacobian;           // df at x, n x m
    Mat g;                  // base metric at x
    Mat htilde;             // e^{2 psi(x)} h(f(x)), the warped fiber metric

    [[nodiscard]] int base_dims() const { return static_cast<int>(base_frame.rows()); }
    [[nodiscard]] int fiber_dims() const { return static_cast<int>(fiber_frame.rows()); }

    /// Ambient tangent frame of the graph: column i is (graph_frame_i,
    /// df(graph_frame_i)), orthonormal for the warped metric.
    [[nodiscard]] Mat ambient_tangent_frame() const;

    /// Ambient normal frame (n columns), orthonormal for the warped metric
    /// and orthogonal to the tangent frame.
    [[nodiscard]] Mat ambient_normal_frame() const;

    /// Warped metric at the graph point (block diagonal g, htilde).
    [[nodiscard]] Mat ambient_metric() const;
};

/// Pointwise curvature data of a graph. The tension field is the induced
/// trace of the map Hessian; the warp correction accounts for the weight's
/// gradient. Their sum decomposes against the differential into a base
/// vector and a fiber remainder, which assemble the mean curvature:
///   m * H = (-pulled_tension, residual_tension).
struct CurvatureBundle {
    Vec tension;             // fiber vector, trace of the map Hessian in the induced metric
    Vec warp_correction;     // fiber vector, df(|df|^2 grad psi + 2 grad psi w.r.t. induced metric)
    Vec total_tension;       // tension + warp_correction
    Vec pulled_tension;      // base vector, adjoint of df applied to total_tension
    Vec residual_tension;    // fiber vector, total_tension - df(pulled_tension)
    Vec mean_curvature_base; // -pulled_tension / m
    Vec mean_curvature_fiber;// residual_tension / m
    double cos_angle = 1.0;  // alignment of the tangent plane with the base slice
    double mean_curvature_norm = 0.0;
};

/// Induced metric of the graph at x: g + e^{2 psi} J^T h(f(x)) J.
[[nodiscard]] Mat graph_metric(const WarpedSpace& ws, const GraphMap& f, const Vec& x,
                               const FdConfig& fd = {});

/// Solves the generalized symmetric eigenproblem of the pulled-back fiber
/// metric against g and assembles all frames. completion_seed != 0 draws a
/// random rotation within degenerate eigenvalue clusters and a random
/// completion of the fiber frame; every public quantity downstream must be
/// invariant under that choice.
[[nodiscard]] GraphPointFrame eigenframe(const WarpedSpace& ws, const GraphMap& f, const Vec& x,
                                         const FdConfig& fd = {},
                                         std::uint32_t completion_seed = 0);

/// Adjoint of df against the induced metric on the base and the warped
/// fiber metric: df_adjoint(U_i) = lambda_i / (1 + lambda_i^2) X_i up to the
/// rank, zero beyond it.
[[nodiscard]] Vec df_adjoint(const GraphPointFrame& frame, const Vec& u);

/// All pointwise curvature fields of the graph at x.
[[nodiscard]] CurvatureBundle curvature_bundle(const WarpedSpace& ws, const GraphMap& f,
                                               const Vec& x, const FdConfig& fd = {});

/// Second fundamental form evaluated on two base vectors: the normal part
/// of (0, map Hessian + df of the weight coupling). Symmetric; its induced
/// trace is m times the mean curvature.
[[nodiscard]] Vec second_fundamental_form(const WarpedSpace& ws, const GraphMap& f, const Vec& x,
                                          const Vec& xvec, const Vec& yvec,
                                          const FdConfig& fd = {});

/// Orthogonal projection of an ambient vector at the graph point onto the
/// normal bundle. Idempotent; annihilates tangent lifts (Y, df(Y)).
[[nodiscard]] Vec normal_projection(const GraphPointFrame& frame, const Vec& ambient);

/// Identity residuals for the weight pairing q(U) = htilde(U, df of the
/// induced-metric gradient of psi):
///   pulled:     |q(total_tension) - g(pulled_tension, grad psi)|
///   fiber:      |q(total_tension) - htilde(residual_tension, df(grad psi))|
/// q_of_warp_correction is the (nonnegative) pairing of the warp correction,
/// also reproducible from the eigen-decomposition in closed form.
struct WeightPairingCheck {
    double pulled_residual = 0.0;
    double fiber_residual = 0.0;
    double q_of_warp_correction = 0.0;
};
[[nodiscard]] WeightPairingCheck q_psi_residuals(const WarpedSpace& ws, const GraphMap& f,
                                                 const Vec& x, const FdConfig& fd = {});

/// Sign of g(mean_curvature_base, grad psi) with a dead band for zero;
/// internally cross-checked against the opposite fiber pairing.
[[nodiscard]] int m_minus_indicator(const WarpedSpace& ws, const GraphMap& f, const Vec& x,
                                    const FdConfig& fd = {}, double dead_band = 1e-10);

/// Residual of the divergence identity
///   div_g(pulled_tension) + g(pulled_tension, grad psi) = m^2 |H|^2,
/// with the pulled tension evaluated as a field (the full pointwise
/// pipeline re-runs on the differencing stencil). Caller asserts parallel
/// mean curvature.
[[nodiscard]] double heinz_divergence_residual(const WarpedSpace& ws, const GraphMap& f,
                                               const Vec& x, const FdConfig& fd = {});

/// Residuals of the calibrated divergence identity
///   div_{g*}(cos_angle H_base) + g*(cos_angle H_base, grad* psi)
///     = -m cos_angle |H|^2,
/// plus the cross-check that the vector field built from the normal-bundle
/// morphism pairing equals cos_angle H_base.
struct CalibrationCheck {
    double divergence_residual = 0.0;
    double morphism_crosscheck = 0.0;
};
[[nodiscard]] CalibrationCheck calibration_divergence_residual(const WarpedSpace& ws,
                                                               const GraphMap& f, const Vec& x,
                                                               const FdConfig& fd = {});

/// Residual of the pairing of the ambient covariant derivative of the mean
/// curvature field against the tangent frame, which must equal
/// -m |H|^2 for parallel mean curvature. Differences the full curvature
/// pipeline along the graph, so the tolerance is the coarsest of the suite.
[[nodiscard]] double mean_curvature_pairing_residual(const WarpedSpace& ws, const GraphMap& f,
                                                     const Vec& x, const FdConfig& fd = {});

} // namespace warpgeo
