#pragma once

#include <functional>
#include <vector>

#include "warpgeo/graph.hpp"
#include "warpgeo/warped.hpp"

namespace warpgeo {

/// Spherically symmetric base of dimension m with radial metric warping tau
/// and radial weight Psi, truncated at radius t_max. tau must vanish to
/// first order at 0 with unit slope, Psi must be critical at 0; these keep
/// the metric and weight smooth across the origin.
struct RadialSpace {
    int m = 2;
    std::function<double(double)> tau;
    std::function<double(double)> tau_prime;
    std::function<double(double)> Psi;
    std::function<double(double)> Psi_prime;
    double t_max = 10.0;
};

/// Checks the origin conditions and that the supplied derivatives match
/// central differences of tau and Psi at sampled radii. Throws
/// AdmissibilityError describing the first violated condition.
void validate_radial_space(const RadialSpace& rs);

/// Weighted area density e^{Psi(t)} tau(t)^{m-1}; vanishes to order m-1 at 0.
[[nodiscard]] double area_density(const RadialSpace& rs, double t);

/// The isoperimetric profile function phi(t) = (integral of the density up
/// to t) / density(t), evaluated on an increasing grid by cumulative
/// adaptive quadrature. Below the series threshold the leading-order value
/// t/m replaces the 0/0 ratio.
[[nodiscard]] std::vector<double> phi_profile(const RadialSpace& rs,
                                              const std::vector<double>& grid);

/// phi at a single radius (one quadrature).
[[nodiscard]] double phi_at(const RadialSpace& rs, double t);

/// Infimum of 1/phi over (0, t_max]: coarse log-uniform scan, then
/// golden-section refinement around the discrete minimizer. boundary is
/// set when the minimizer sits at t_max, i.e. the reported value is an
/// upper bound for a truncated infimum.
struct CZeroResult {
    double value = 0.0;
    double argmin = 0.0;
    bool boundary = false;
};
[[nodiscard]] CZeroResult c_zero(const RadialSpace& rs);

/// A constant-mean-curvature radial profile: slope function phi_c = c phi
/// and height function F with F(0) = d, tabulated on a grid.
struct CmcProfile {
    double c = 0.0;
    double d = 0.0;
    double c_zero = 0.0; // admissibility ceiling at construction time
    std::vector<double> grid;
    std::vector<double> phi_values;
    std::vector<double> phi_c_values;
    std::vector<double> F_values;
};

/// Builds the profile. Throws AdmissibilityError naming the ceiling when
/// |c| >= c_zero, and when any tabulated |phi_c| reaches 1.
[[nodiscard]] CmcProfile cmc_profile(const RadialSpace& rs, double c, double d,
                                     const std::vector<double>& grid);

/// Height function at a single radius (nested quadrature; smooth in t).
[[nodiscard]] double height_at(const RadialSpace& rs, double c, double t);

/// Pointwise slope data recovered from finite differences of the tabulated
/// height: xi = F' / sqrt(e^{-2 Psi} + F'^2) and the residual of the slope
/// equation xi' = c - (log density)' xi. Endpoints carry one-sided xi and
/// zero residual.
struct SlopeTable {
    std::vector<double> xi;
    std::vector<double> residual;
};
[[nodiscard]] SlopeTable slope_table(const RadialSpace& rs, const CmcProfile& profile);

/// Max interior residual of the slope equation.
[[nodiscard]] double xi_ode_residual(const RadialSpace& rs, const CmcProfile& profile);

/// Radial base as chart data: polar coordinates for m = 2, spherical for
/// m = 3 with the configured polar-angle margin. Probes must stay inside
/// the chart box; the origin is excluded.
struct RadialChartSpace {
    MetricField metric;
    ScalarField weight;
};
[[nodiscard]] RadialChartSpace radial_chart_space(const RadialSpace& rs);

/// The profile as a full graph over the radial chart with a flat line
/// fiber: feeding the result through the curvature pipeline must produce
/// mean curvature norm |c| / m at every probe point.
struct LiftedGraph {
    WarpedSpace space;
    GraphMap map;
};
[[nodiscard]] LiftedGraph lift_to_graph(const RadialSpace& rs, const CmcProfile& profile);

} // namespace warpgeo
