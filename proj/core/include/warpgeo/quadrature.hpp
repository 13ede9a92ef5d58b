#pragma once

#include <functional>

namespace warpgeo {

/// Adaptive Gauss-Kronrod integration of f over [a, b]. The tolerance is
/// relative to the L1 norm of the integrand, which keeps profiles with
/// exponentially large densities integrable; the evaluation budget is
/// bounded by the bisection depth. Smooth integrands converge to machine
/// precision; ConvergenceError signals an integrand the rule cannot
/// resolve at full depth, such as an (integrable) endpoint singularity.
[[nodiscard]] double integrate(const std::function<double(double)>& f, double a, double b,
                               double rel_tol = 1e-12);

} // namespace warpgeo
