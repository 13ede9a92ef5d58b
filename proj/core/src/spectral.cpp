#include "warpgeo/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "warpgeo/calculus.hpp"
#include "warpgeo/errors.hpp"
#include "warpgeo/quadrature.hpp"

namespace warpgeo {

namespace {

void check_radius(const RadialSpace& rs, double r, const char* op) {
    if (!(r > 0.0) || r > rs.t_max * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << op << ": radius " << r << " outside (0, " << rs.t_max << "]";
        throw BoundaryError(msg.str());
    }
}

// Symmetric tridiagonal reduction of the discrete pencil T u = lambda M u.
struct DiscretePencil {
    std::vector<double> diag;       // of M^{-1/2} T M^{-1/2}
    std::vector<double> off;        // size n-1
    std::vector<double> stiff_diag; // T
    std::vector<double> stiff_off;
    std::vector<double> mass;       // diagonal M
};

DiscretePencil assemble_pencil(const RadialSpace& rs, double r, int n) {
    const double dt = r / n;
    std::vector<double> half(n);
    for (int i = 0; i < n; ++i) {
        half[i] = area_density(rs, (i + 0.5) * dt);
        if (!(half[i] > 0.0)) {
            std::ostringstream msg;
            msg << "area density not positive at t = " << (i + 0.5) * dt;
            throw SingularError(msg.str());
        }
    }

    DiscretePencil p;
    p.stiff_diag.resize(n);
    p.stiff_off.resize(n - 1);
    p.mass.resize(n);

    p.stiff_diag[0] = half[0] / dt;
    for (int i = 1; i < n; ++i) p.stiff_diag[i] = (half[i - 1] + half[i]) / dt;
    for (int i = 0; i + 1 < n; ++i) p.stiff_off[i] = -half[i] / dt;

    // Simpson mass per dual cell; the origin cell is one-sided.
    const auto density = [&rs](double t) { return area_density(rs, t); };
    p.mass[0] = (dt / 2.0) / 6.0 *
                (density(0.0) + 4.0 * density(dt / 4.0) + density(dt / 2.0));
    for (int i = 1; i < n; ++i) {
        const double t = i * dt;
        p.mass[i] = dt / 6.0 *
                    (density(t - dt / 2.0) + 4.0 * density(t) + density(t + dt / 2.0));
    }
    for (int i = 0; i < n; ++i) {
        if (!(p.mass[i] > 0.0)) throw SingularError("mass matrix not positive definite");
    }

    p.diag.resize(n);
    p.off.resize(n - 1);
    for (int i = 0; i < n; ++i) p.diag[i] = p.stiff_diag[i] / p.mass[i];
    for (int i = 0; i + 1 < n; ++i)
        p.off[i] = p.stiff_off[i] / std::sqrt(p.mass[i] * p.mass[i + 1]);
    return p;
}

int count_below(const DiscretePencil& p, double x) {
    int count = 0;
    double d = p.diag[0] - x;
    if (d == 0.0) d = -1e-300;
    if (d < 0.0) ++count;
    for (std::size_t i = 1; i < p.diag.size(); ++i) {
        d = p.diag[i] - x - p.off[i - 1] * p.off[i - 1] / d;
        if (d == 0.0) d = -1e-300;
        if (d < 0.0) ++count;
    }
    return count;
}

double smallest_eigenvalue(const DiscretePencil& p) {
    double hi = 0.0;
    for (std::size_t i = 0; i < p.diag.size(); ++i) {
        double row = p.diag[i];
        if (i > 0) row += std::abs(p.off[i - 1]);
        if (i + 1 < p.diag.size()) row += std::abs(p.off[i]);
        hi = std::max(hi, row);
    }
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (count_below(p, mid) >= 1) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if (count_below(p, hi) < 1) throw ConvergenceError("eigenvalue bisection failed");
    return 0.5 * (lo + hi);
}

// One shifted tridiagonal solve, Thomas elimination.
std::vector<double> shifted_solve(const DiscretePencil& p, double shift,
                                  const std::vector<double>& rhs) {
    const std::size_t n = p.diag.size();
    std::vector<double> c(n - 1), x(n);
    double piv = p.diag[0] - shift;
    if (piv == 0.0) piv = 1e-300;
    c[0] = p.off[0] / piv;
    x[0] = rhs[0] / piv;
    for (std::size_t i = 1; i < n; ++i) {
        piv = p.diag[i] - shift - p.off[i - 1] * c[i - 1];
        if (piv == 0.0) piv = 1e-300;
        if (i + 1 < n) c[i] = p.off[i] / piv;
        x[i] = (rhs[i] - p.off[i - 1] * x[i - 1]) / piv;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i] * x[i + 1];
    return x;
}

} // namespace

// === Measures and quotients ===

double sphere_area_constant(int m) {
    if (m < 1) throw Error("sphere_area_constant: dimension must be positive");
    return 2.0 * std::pow(std::numbers::pi, m / 2.0) / std::tgamma(m / 2.0);
}

WeightedBallMeasures weighted_ball_measures(const RadialSpace& rs, double r) {
    check_radius(rs, r, "weighted_ball_measures");
    const double omega = sphere_area_constant(rs.m);
    WeightedBallMeasures out;
    out.volume = omega * integrate([&rs](double t) { return area_density(rs, t); }, 0.0, r);
    out.boundary_area = omega * area_density(rs, r);
    if (!(out.volume > 0.0)) throw SingularError("weighted ball has nonpositive volume");
    return out;
}

CheegerScan cheeger_scan(const RadialSpace& rs, const std::vector<double>& radii) {
    if (radii.empty()) throw Error("cheeger_scan: empty radius list");
    double prev = 0.0;
    for (double r : radii) {
        check_radius(rs, r, "cheeger_scan");
        if (r <= prev) throw Error("cheeger_scan: radii must be strictly increasing");
        prev = r;
    }

    CheegerScan scan;
    scan.radii = radii;
    scan.quotients.resize(radii.size());
    const double omega = sphere_area_constant(rs.m);
    double mass = 0.0;
    double from = 0.0;
    std::size_t best = 0;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        mass += integrate([&rs](double t) { return area_density(rs, t); }, from, radii[i]);
        from = radii[i];
        const double volume = omega * mass;
        const double area = omega * area_density(rs, radii[i]);
        if (!(volume > 0.0) || !(area > 0.0))
            throw SingularError("cheeger_scan: degenerate measures");
        scan.quotients[i] = area / volume;
        if (scan.quotients[i] < scan.quotients[best]) best = i;
    }
    scan.best_radius = radii[best];
    scan.best_quotient = scan.quotients[best];
    return scan;
}

// === Radial eigensolver ===

SpectralResult drift_eigenvalue(const RadialSpace& rs, double r, int grid_size) {
    check_radius(rs, r, "drift_eigenvalue");
    if (grid_size < 64) throw Error("drift_eigenvalue: grid_size must be at least 64");

    const DiscretePencil pencil = assemble_pencil(rs, r, grid_size);
    const double lambda = smallest_eigenvalue(pencil);
    const double lambda_coarse =
        smallest_eigenvalue(assemble_pencil(rs, r, grid_size / 2));

    // Inverse iteration in the reduced variable, then map back through the
    // mass scaling.
    const int n = grid_size;
    std::vector<double> y(n, 1.0);
    const double shift = lambda + 1e-10 * std::max(1.0, lambda);
    for (int pass = 0; pass < 3; ++pass) {
        y = shifted_solve(pencil, shift, y);
        double top = 0.0;
        for (double v : y) top = std::max(top, std::abs(v));
        if (!(top > 0.0) || !std::isfinite(top))
            throw ConvergenceError("inverse iteration collapsed");
        for (double& v : y) v /= top;
    }

    SpectralResult result;
    result.lambda1 = lambda;
    result.radius = r;
    result.grid_size = grid_size;
    result.discretization_estimate = std::abs(lambda - lambda_coarse) / 3.0;

    result.eigenfunction.assign(n + 1, 0.0);
    for (int i = 0; i < n; ++i)
        result.eigenfunction[i] = y[i] / std::sqrt(pencil.mass[i]);
    double top = 0.0;
    int top_index = 0;
    for (int i = 0; i < n; ++i) {
        if (std::abs(result.eigenfunction[i]) > top) {
            top = std::abs(result.eigenfunction[i]);
            top_index = i;
        }
    }
    const double sign = result.eigenfunction[top_index] < 0.0 ? -1.0 : 1.0;
    for (int i = 0; i < n; ++i) result.eigenfunction[i] *= sign / top;

    double num = 0.0;
    double den = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = result.eigenfunction[i];
        num += pencil.stiff_diag[i] * u * u;
        if (i + 1 < n) num += 2.0 * pencil.stiff_off[i] * u * result.eigenfunction[i + 1];
        den += pencil.mass[i] * u * u;
    }
    result.rayleigh_quotient = num / den;
    return result;
}

double cheeger_inequality_margin(const RadialSpace& rs, double r, int grid_size) {
    const double lambda = drift_eigenvalue(rs, r, grid_size).lambda1;
    const double ceiling = c_zero(rs).value;
    return lambda - 0.25 * ceiling * ceiling;
}

// === Comparison against the unweighted space form ball ===

namespace {

RadialSpace space_form(int dim, double kappa, double t_max) {
    RadialSpace comparison;
    comparison.m = dim;
    comparison.t_max = t_max;
    comparison.Psi = [](double) { return 0.0; };
    comparison.Psi_prime = [](double) { return 0.0; };
    if (kappa > 0.0) {
        const double root = std::sqrt(kappa);
        comparison.tau = [root](double t) { return std::sin(root * t) / root; };
        comparison.tau_prime = [root](double t) { return std::cos(root * t); };
    } else if (kappa < 0.0) {
        const double root = std::sqrt(-kappa);
        comparison.tau = [root](double t) { return std::sinh(root * t) / root; };
        comparison.tau_prime = [root](double t) { return std::cosh(root * t); };
    } else {
        comparison.tau = [](double t) { return t; };
        comparison.tau_prime = [](double) { return 1.0; };
    }
    return comparison;
}

bool certify_hypotheses(const RadialSpace& rs, double alpha, double delta,
                        std::string* note) {
    const RadialChartSpace space = radial_chart_space(rs);
    const auto& chart = space.metric.chart;
    const double lo = chart.lower[0];
    const double hi = chart.upper[0];
    const double pad = 0.02 * (hi - lo);

    std::vector<Vec> samples;
    std::vector<double> angles = rs.m == 3
                                     ? std::vector<double>{0.7, 1.5707963, 2.4}
                                     : std::vector<double>{0.0};
    for (int i = 0; i < 9; ++i) {
        const double t = lo + pad + (hi - lo - 2.0 * pad) * i / 8.0;
        for (double angle : angles) {
            Vec p = Vec::Zero(rs.m);
            p[0] = t;
            p[1] = angle;
            samples.push_back(p);
        }
    }

    for (const Vec& p : samples) {
        const Mat ric = bakry_emery_ricci(space.metric, space.weight, p);
        const Mat g = space.metric.matrix(p);
        Eigen::GeneralizedSelfAdjointEigenSolver<Mat> solver(ric, g,
                                                             Eigen::EigenvaluesOnly);
        const double low = solver.eigenvalues().minCoeff();
        if (low < alpha - 1e-6) {
            std::ostringstream msg;
            msg << "curvature hypothesis fails at t = " << p[0]
                << ": sampled weighted curvature eigenvalue " << low << " < " << alpha;
            *note = msg.str();
            return false;
        }
        const double grad_sq = rs.Psi_prime(p[0]) * rs.Psi_prime(p[0]);
        if (grad_sq > delta + 1e-6) {
            std::ostringstream msg;
            msg << "gradient hypothesis fails at t = " << p[0]
                << ": squared weight gradient " << grad_sq << " > " << delta;
            *note = msg.str();
            return false;
        }
    }
    *note = "sampled curvature and gradient bounds hold";
    return true;
}

} // namespace

SettiResult setti_margin(const RadialSpace& rs, double r, double alpha, double delta,
                         int grid_size) {
    if (!(alpha >= delta) || !(delta >= 0.0))
        throw AdmissibilityError("setti_margin: needs alpha >= delta >= 0");
    check_radius(rs, r, "setti_margin");

    SettiResult result;
    result.kappa = (alpha - delta) / rs.m;
    if (result.kappa > 0.0) {
        const double diameter = std::numbers::pi / std::sqrt(result.kappa);
        if (r >= diameter) {
            std::ostringstream msg;
            msg << "setti_margin: radius " << r
                << " reaches the diameter of the comparison space form (" << diameter
                << ")";
            throw AdmissibilityError(msg.str());
        }
    }

    result.hypothesis_ok = certify_hypotheses(rs, alpha, delta, &result.hypothesis_note);
    result.lambda_weighted = drift_eigenvalue(rs, r, grid_size).lambda1;
    const RadialSpace comparison = space_form(rs.m + 1, result.kappa, r);
    result.lambda_comparison = drift_eigenvalue(comparison, r, grid_size).lambda1;
    result.margin = result.lambda_comparison - result.lambda_weighted;
    return result;
}

std::vector<double> heinz_margin(const RadialSpace& rs, double c,
                                 const std::vector<double>& radii) {
    const CZeroResult ceiling = c_zero(rs);
    if (std::abs(c) >= ceiling.value) {
        std::ostringstream msg;
        msg << "heinz_margin: |c| = " << std::abs(c)
            << " is not admissible: the ceiling for this space is " << ceiling.value;
        throw AdmissibilityError(msg.str());
    }
    const CheegerScan scan = cheeger_scan(rs, radii);
    std::vector<double> margins(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i)
        margins[i] = scan.quotients[i] - std::abs(c);
    return margins;
}

} // namespace warpgeo
