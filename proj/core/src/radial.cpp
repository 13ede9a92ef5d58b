#include "warpgeo/radial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "warpgeo/errors.hpp"
#include "warpgeo/fd.hpp"
#include "warpgeo/quadrature.hpp"

namespace warpgeo {

namespace {

// Below this radius the mass/density ratio is evaluated by its leading
// series term t/m instead of the 0/0 quadrature ratio.
constexpr double kSeriesThreshold = 1e-3;
constexpr int kScanPoints = 2048;

double density_checked(const RadialSpace& rs, double t) {
    const double value = area_density(rs, t);
    if (t > 0.0 && !(value > 0.0)) {
        std::ostringstream msg;
        msg << "area density is not positive at t = " << t;
        throw SingularError(msg.str());
    }
    return value;
}

double mass_integral(const RadialSpace& rs, double a, double b) {
    return integrate([&rs](double s) { return area_density(rs, s); }, a, b);
}

// Second order first derivative on a possibly nonuniform three point stencil.
double stencil_derivative(double fm, double f0, double fp, double h1, double h2) {
    return (fp * h1 * h1 - fm * h2 * h2 + f0 * (h2 * h2 - h1 * h1)) /
           (h1 * h2 * (h1 + h2));
}

void check_grid(const RadialSpace& rs, const std::vector<double>& grid, const char* op) {
    if (grid.empty()) throw Error(std::string(op) + ": empty grid");
    double prev = -1.0;
    for (double t : grid) {
        if (!(t >= 0.0) || t > rs.t_max * (1.0 + 1e-12)) {
            std::ostringstream msg;
            msg << op << ": grid point " << t << " outside [0, " << rs.t_max << "]";
            throw BoundaryError(msg.str());
        }
        if (t <= prev) throw Error(std::string(op) + ": grid must be strictly increasing");
        prev = t;
    }
}

double height_integrand(const RadialSpace& rs, double c, double s) {
    const double pc = c * phi_at(rs, s);
    if (std::abs(pc) >= 1.0) {
        std::ostringstream msg;
        msg << "profile slope reached magnitude 1 at t = " << s;
        throw AdmissibilityError(msg.str());
    }
    return std::exp(-rs.Psi(s)) * pc / std::sqrt(1.0 - pc * pc);
}

} // namespace

// === Validation ===

void validate_radial_space(const RadialSpace& rs) {
    if (rs.m < 2) throw AdmissibilityError("radial space needs dimension m >= 2");
    if (!(rs.t_max > 0.0)) throw AdmissibilityError("radial space needs t_max > 0");
    if (!rs.tau || !rs.tau_prime || !rs.Psi || !rs.Psi_prime)
        throw AdmissibilityError("radial space needs tau, tau_prime, Psi, Psi_prime");
    if (std::abs(rs.tau(0.0)) > 1e-12)
        throw AdmissibilityError("tau must vanish at the origin");
    if (std::abs(rs.tau_prime(0.0) - 1.0) > 1e-8)
        throw AdmissibilityError("tau must have unit slope at the origin");
    if (std::abs(rs.Psi_prime(0.0)) > 1e-8)
        throw AdmissibilityError("weight must be critical at the origin");

    const FdConfig fd;
    for (double frac : {0.15, 0.4, 0.65, 0.9}) {
        const double t = frac * rs.t_max;
        const double h = fd.step1(t);
        const double fd_tau = (rs.tau(t + h) - rs.tau(t - h)) / (2.0 * h);
        if (std::abs(fd_tau - rs.tau_prime(t)) >
            1e-4 * std::max(1.0, std::abs(rs.tau_prime(t)))) {
            std::ostringstream msg;
            msg << "tau_prime disagrees with differences of tau at t = " << t;
            throw AdmissibilityError(msg.str());
        }
        const double fd_psi = (rs.Psi(t + h) - rs.Psi(t - h)) / (2.0 * h);
        if (std::abs(fd_psi - rs.Psi_prime(t)) >
            1e-4 * std::max(1.0, std::abs(rs.Psi_prime(t)))) {
            std::ostringstream msg;
            msg << "Psi_prime disagrees with differences of Psi at t = " << t;
            throw AdmissibilityError(msg.str());
        }
    }
}

// === Density and isoperimetric profile ===

double area_density(const RadialSpace& rs, double t) {
    const double tau = rs.tau(t);
    return std::exp(rs.Psi(t)) * std::pow(tau, rs.m - 1);
}

double phi_at(const RadialSpace& rs, double t) {
    if (!(t >= 0.0) || t > rs.t_max * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "phi_at: t = " << t << " outside [0, " << rs.t_max << "]";
        throw BoundaryError(msg.str());
    }
    if (t < kSeriesThreshold) return t / rs.m;
    return mass_integral(rs, 0.0, t) / density_checked(rs, t);
}

std::vector<double> phi_profile(const RadialSpace& rs, const std::vector<double>& grid) {
    check_grid(rs, grid, "phi_profile");
    std::vector<double> out(grid.size());
    double mass = 0.0;
    double prev = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        mass += mass_integral(rs, prev, grid[i]);
        prev = grid[i];
        out[i] = grid[i] < kSeriesThreshold ? grid[i] / rs.m
                                            : mass / density_checked(rs, grid[i]);
    }
    return out;
}

// === Admissibility ceiling ===

CZeroResult c_zero(const RadialSpace& rs) {
    const double t_lo = rs.t_max * 1e-6;
    const double log_span = std::log(rs.t_max / t_lo);
    std::vector<double> ts(kScanPoints);
    for (int i = 0; i < kScanPoints; ++i)
        ts[i] = t_lo * std::exp(log_span * i / (kScanPoints - 1));
    ts.back() = rs.t_max;

    std::vector<double> quotient(kScanPoints);
    double mass = 0.0;
    double prev = 0.0;
    std::size_t best = 0;
    for (int i = 0; i < kScanPoints; ++i) {
        mass += mass_integral(rs, prev, ts[i]);
        prev = ts[i];
        const double phi = ts[i] < kSeriesThreshold
                               ? ts[i] / rs.m
                               : mass / density_checked(rs, ts[i]);
        quotient[i] = 1.0 / phi;
        if (quotient[i] < quotient[best]) best = i;
    }

    CZeroResult result;
    // A quotient that keeps decreasing toward t_max can flatten below double
    // resolution well before the last scan point; when the boundary value is
    // within roundoff of the scan minimum the infimum is still truncated.
    const bool tail_flat = quotient.back() - quotient[best] <=
                           1e-12 * std::max(1.0, std::abs(quotient[best]));
    if (best + 1 == static_cast<std::size_t>(kScanPoints) || tail_flat) {
        result.value = std::min(quotient.back(), quotient[best]);
        result.argmin = rs.t_max;
        result.boundary = true;
        return result;
    }

    const auto objective = [&rs](double t) { return 1.0 / phi_at(rs, t); };
    double a = ts[best == 0 ? 0 : best - 1];
    double b = ts[best + 1];
    constexpr double kGolden = 0.6180339887498949;
    double c1 = b - kGolden * (b - a);
    double c2 = a + kGolden * (b - a);
    double f1 = objective(c1);
    double f2 = objective(c2);
    for (int it = 0; it < 90 && (b - a) > 1e-12 * std::max(1.0, b); ++it) {
        if (f1 < f2) {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - kGolden * (b - a);
            f1 = objective(c1);
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + kGolden * (b - a);
            f2 = objective(c2);
        }
    }
    result.argmin = 0.5 * (a + b);
    result.value = std::min(objective(result.argmin), quotient[best]);
    result.boundary = false;
    return result;
}

// === Constant mean curvature profiles ===

double height_at(const RadialSpace& rs, double c, double t) {
    return integrate([&rs, c](double s) { return height_integrand(rs, c, s); }, 0.0, t);
}

CmcProfile cmc_profile(const RadialSpace& rs, double c, double d,
                       const std::vector<double>& grid) {
    validate_radial_space(rs);
    check_grid(rs, grid, "cmc_profile");
    const CZeroResult ceiling = c_zero(rs);
    if (std::abs(c) >= ceiling.value) {
        std::ostringstream msg;
        msg << "mean curvature parameter |c| = " << std::abs(c)
            << " is not admissible: the ceiling for this space is " << ceiling.value
            << (ceiling.boundary ? " (infimum truncated at t_max)" : "");
        throw AdmissibilityError(msg.str());
    }

    CmcProfile profile;
    profile.c = c;
    profile.d = d;
    profile.c_zero = ceiling.value;
    profile.grid = grid;
    profile.phi_values = phi_profile(rs, grid);
    profile.phi_c_values.resize(grid.size());
    profile.F_values.resize(grid.size());

    for (std::size_t i = 0; i < grid.size(); ++i) {
        profile.phi_c_values[i] = c * profile.phi_values[i];
        if (std::abs(profile.phi_c_values[i]) >= 1.0) {
            std::ostringstream msg;
            msg << "profile slope reached magnitude 1 at t = " << grid[i];
            throw AdmissibilityError(msg.str());
        }
    }

    double acc = d;
    double prev = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        acc += integrate([&rs, c](double s) { return height_integrand(rs, c, s); },
                         prev, grid[i]);
        prev = grid[i];
        profile.F_values[i] = acc;
    }
    return profile;
}

// === Slope recovery and the first order equation ===

SlopeTable slope_table(const RadialSpace& rs, const CmcProfile& profile) {
    const auto& t = profile.grid;
    const auto& f = profile.F_values;
    const std::size_t n = t.size();
    if (n < 3) throw Error("slope_table: need at least three grid points");

    SlopeTable table;
    table.xi.resize(n);
    table.residual.assign(n, 0.0);

    // The slope map amplifies flux derivative errors by the inverse density,
    // so where the weight decays fast a second order F derivative leaves xi
    // errors that the residual stencil divides by the spacing once more.
    // Differentiating the interpolant through the five nearest nodes keeps
    // the recovered slope two orders ahead of the residual check.
    const std::size_t width = std::min<std::size_t>(n, 5);
    const auto window_derivative = [&](std::size_t i) {
        const std::size_t half = width / 2;
        std::size_t first = i > half ? i - half : 0;
        first = std::min(first, n - width);
        double total = 0.0;
        for (std::size_t k = first; k < first + width; ++k) {
            double num = 0.0;
            for (std::size_t drop = first; drop < first + width; ++drop) {
                if (drop == k) continue;
                double prod = 1.0;
                for (std::size_t j = first; j < first + width; ++j) {
                    if (j != k && j != drop) prod *= t[i] - t[j];
                }
                num += prod;
            }
            double den = 1.0;
            for (std::size_t j = first; j < first + width; ++j) {
                if (j != k) den *= t[k] - t[j];
            }
            total += f[k] * num / den;
        }
        return total;
    };
    for (std::size_t i = 0; i < n; ++i) {
        const double fp = window_derivative(i);
        const double em = std::exp(-rs.Psi(t[i]));
        table.xi[i] = fp / std::sqrt(em * em + fp * fp);
    }

    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double xi_prime = stencil_derivative(
            table.xi[i - 1], table.xi[i], table.xi[i + 1], t[i] - t[i - 1],
            t[i + 1] - t[i]);
        const double log_density_prime =
            rs.Psi_prime(t[i]) + (rs.m - 1) * rs.tau_prime(t[i]) / rs.tau(t[i]);
        table.residual[i] =
            std::abs(xi_prime - (profile.c - log_density_prime * table.xi[i]));
    }
    return table;
}

double xi_ode_residual(const RadialSpace& rs, const CmcProfile& profile) {
    const SlopeTable table = slope_table(rs, profile);
    return *std::max_element(table.residual.begin(), table.residual.end());
}

// === Chart realizations ===

RadialChartSpace radial_chart_space(const RadialSpace& rs) {
    constexpr double kPi = std::numbers::pi;
    const double t_lo = std::min(1e-2, rs.t_max * 1e-2);
    if (rs.m == 2) {
        Vec lower(2);
        Vec upper(2);
        lower << t_lo, -kPi;
        upper << rs.t_max, kPi;
        Chart chart = Chart::box("polar", lower, upper);
        MetricField metric{chart, [rs](const Vec& p) {
                               Mat g = Mat::Identity(2, 2);
                               const double tau = rs.tau(p[0]);
                               g(1, 1) = tau * tau;
                               return g;
                           }};
        ScalarField weight{chart, [rs](const Vec& p) { return rs.Psi(p[0]); },
                           [rs](const Vec& p) {
                               Vec grad = Vec::Zero(2);
                               grad[0] = rs.Psi_prime(p[0]);
                               return grad;
                           }};
        return {metric, weight};
    }
    if (rs.m == 3) {
        Vec lower(3);
        Vec upper(3);
        lower << t_lo, 0.1, -kPi;
        upper << rs.t_max, kPi - 0.1, kPi;
        Chart chart = Chart::box("spherical", lower, upper);
        MetricField metric{chart, [rs](const Vec& p) {
                               Mat g = Mat::Identity(3, 3);
                               const double tau = rs.tau(p[0]);
                               const double sin_theta = std::sin(p[1]);
                               g(1, 1) = tau * tau;
                               g(2, 2) = tau * tau * sin_theta * sin_theta;
                               return g;
                           }};
        ScalarField weight{chart, [rs](const Vec& p) { return rs.Psi(p[0]); },
                           [rs](const Vec& p) {
                               Vec grad = Vec::Zero(3);
                               grad[0] = rs.Psi_prime(p[0]);
                               return grad;
                           }};
        return {metric, weight};
    }
    throw Error("radial_chart_space: only m = 2 or 3 is supported");
}

LiftedGraph lift_to_graph(const RadialSpace& rs, const CmcProfile& profile) {
    RadialChartSpace base = radial_chart_space(rs);
    Chart fiber_chart = Chart::unbounded("height line", 1);
    MetricField fiber_metric{fiber_chart,
                             [](const Vec&) { return Mat::Identity(1, 1); }};

    LiftedGraph lifted;
    lifted.space = WarpedSpace{base.metric, fiber_metric, base.weight};

    const double c = profile.c;
    const double d = profile.d;
    const int m = rs.m;
    lifted.map.source_chart = base.metric.chart;
    lifted.map.target_chart = fiber_chart;
    lifted.map.eval = [rs, c, d](const Vec& p) {
        Vec value(1);
        value[0] = height_at(rs, c, p[0]) + d;
        return value;
    };
    lifted.map.jacobian = [rs, c, m](const Vec& p) {
        Mat j = Mat::Zero(1, m);
        const double pc = c * phi_at(rs, p[0]);
        j(0, 0) = std::exp(-rs.Psi(p[0])) * pc / std::sqrt(1.0 - pc * pc);
        return j;
    };
    return lifted;
}

} // namespace warpgeo
