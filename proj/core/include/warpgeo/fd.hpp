#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace warpgeo {

/// Step-size policy for central finite differences.
///
/// Steps scale with the coordinate magnitude so that differencing stays
/// well conditioned far from the origin. The defaults balance truncation
/// against round-off for fields evaluated to machine precision:
///   first derivatives  ~ eps^(1/3),
///   second derivatives ~ eps^(1/4).
/// Derived fields (quantities that are themselves finite-difference
/// results, with noise well above machine epsilon) get a coarser step.
struct FdConfig {
    double first_order_scale = std::cbrt(std::numeric_limits<double>::epsilon());
    double second_order_scale = std::pow(std::numeric_limits<double>::epsilon(), 0.25);
    double derived_field_scale = 1e-3;

    [[nodiscard]] double step1(double coord) const {
        return first_order_scale * std::max(1.0, std::abs(coord));
    }
    [[nodiscard]] double step2(double coord) const {
        return second_order_scale * std::max(1.0, std::abs(coord));
    }
    [[nodiscard]] double field_step(double coord) const {
        return derived_field_scale * std::max(1.0, std::abs(coord));
    }

    /// Margin a probe point must keep from the chart boundary so that a
    /// stencil of the given depth stays interior.
    [[nodiscard]] double margin(int derivative_order, double coord) const {
        return derivative_order >= 2 ? 3.0 * step2(coord) : 2.0 * step1(coord);
    }
};

} // namespace warpgeo
