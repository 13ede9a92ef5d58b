#pragma once

#include <string>
#include <vector>

#include "warpgeo/radial.hpp"

namespace warpgeo {

/// Area constant of the unit (m-1)-sphere, 2 pi^{m/2} / Gamma(m/2).
[[nodiscard]] double sphere_area_constant(int m);

/// Weighted volume and boundary area of the centered ball of radius r.
struct WeightedBallMeasures {
    double volume = 0.0;
    double boundary_area = 0.0;
};
[[nodiscard]] WeightedBallMeasures weighted_ball_measures(const RadialSpace& rs, double r);

/// Boundary-area over volume quotients of centered balls, an upper bound
/// family for the weighted isoperimetric constant. Radii must be strictly
/// increasing in (0, t_max].
struct CheegerScan {
    std::vector<double> radii;
    std::vector<double> quotients;
    double best_radius = 0.0;
    double best_quotient = 0.0;
};
[[nodiscard]] CheegerScan cheeger_scan(const RadialSpace& rs, const std::vector<double>& radii);

/// First Dirichlet eigenvalue of the weighted radial operator
/// -(X u')' = lambda X u on (0, r) with u'(0) = 0 and u(r) = 0, from a
/// uniform second order scheme with grid_size cells. eigenfunction holds
/// grid_size + 1 node values including the boundary zero, normalized to
/// maximum 1 and positive inside. rayleigh_quotient is recomputed from the
/// discrete eigenvector; discretization_estimate is the Richardson gap
/// against the half-resolution solve.
struct SpectralResult {
    double lambda1 = 0.0;
    double radius = 0.0;
    int grid_size = 0;
    std::vector<double> eigenfunction;
    double discretization_estimate = 0.0;
    double rayleigh_quotient = 0.0;
};
[[nodiscard]] SpectralResult drift_eigenvalue(const RadialSpace& rs, double r, int grid_size);

/// lambda1(B_r) minus one quarter of the squared admissibility ceiling.
/// Nonnegative (up to discretization) whenever the ceiling lower-bounds
/// the weighted isoperimetric constant.
[[nodiscard]] double cheeger_inequality_margin(const RadialSpace& rs, double r,
                                               int grid_size = 4096);

/// Comparison of the weighted eigenvalue against the unweighted ball of the
/// same radius in the (m+1)-dimensional space form of curvature
/// (alpha - delta) / m. alpha is the certified lower bound on the weighted
/// curvature tensor, delta the certified upper bound on the squared weight
/// gradient; both are re-checked by sampling and a failure is reported in
/// hypothesis_ok rather than thrown.
struct SettiResult {
    double lambda_weighted = 0.0;
    double lambda_comparison = 0.0;
    double kappa = 0.0;
    double margin = 0.0;
    bool hypothesis_ok = false;
    std::string hypothesis_note;
};
[[nodiscard]] SettiResult setti_margin(const RadialSpace& rs, double r, double alpha,
                                       double delta, int grid_size = 4096);

/// Per-radius slack quotient(r) - |c| of the mean curvature bound for the
/// admissible parameter c.
[[nodiscard]] std::vector<double> heinz_margin(const RadialSpace& rs, double c,
                                               const std::vector<double>& radii);

} // namespace warpgeo
