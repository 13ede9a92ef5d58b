#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <string>
#include <utility>

#include "warpgeo/errors.hpp"

namespace warpgeo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// An axis-aligned coordinate box hosting local coordinates. Charts do not
/// switch automatically near coordinate singularities; callers keep probe
/// points inside the box with an explicit margin.
struct Chart {
    std::string label;
    Vec lower;
    Vec upper;

    [[nodiscard]] int dim() const { return static_cast<int>(lower.size()); }

    [[nodiscard]] bool contains(const Vec& p, double margin = 0.0) const {
        if (p.size() != lower.size()) return false;
        for (int i = 0; i < p.size(); ++i) {
            if (p[i] < lower[i] + margin || p[i] > upper[i] - margin) return false;
        }
        return true;
    }

    /// Throws BoundaryError naming the offending operation when p is not
    /// interior with the requested margin.
    void require_interior(const Vec& p, double margin, const std::string& op) const {
        if (!contains(p, margin)) {
            throw BoundaryError(op + ": point violates interior margin " +
                                std::to_string(margin) + " of chart '" + label + "'");
        }
    }

    [[nodiscard]] static Chart box(std::string label, Vec lower, Vec upper) {
        if (lower.size() != upper.size() || lower.size() == 0) {
            throw Error("Chart::box: bounds must be nonempty and of equal dimension");
        }
        for (int i = 0; i < lower.size(); ++i) {
            if (!(lower[i] < upper[i])) {
                throw Error("Chart::box: empty extent in axis " + std::to_string(i));
            }
        }
        return Chart{std::move(label), std::move(lower), std::move(upper)};
    }

    [[nodiscard]] static Chart unbounded(std::string label, int dim) {
        const double inf = std::numeric_limits<double>::infinity();
        return Chart{std::move(label), Vec::Constant(dim, -inf), Vec::Constant(dim, inf)};
    }

    /// Concatenates two charts into a product chart (base coordinates first).
    [[nodiscard]] static Chart product(const Chart& base, const Chart& fiber) {
        Chart out;
        out.label = base.label + "x" + fiber.label;
        out.lower.resize(base.dim() + fiber.dim());
        out.upper.resize(base.dim() + fiber.dim());
        out.lower << base.lower, fiber.lower;
        out.upper << base.upper, fiber.upper;
        return out;
    }
};

/// Smooth real-valued field on a chart. The analytic gradient is optional;
/// when present it must agree with central differences of eval.
struct ScalarField {
    Chart chart;
    std::function<double(const Vec&)> eval;
    std::function<Vec(const Vec&)> analytic_gradient; // may be empty

    double operator()(const Vec& p) const { return eval(p); }
};

/// Smooth vector field on a chart, components in chart coordinates.
struct VectorField {
    Chart chart;
    std::function<Vec(const Vec&)> components;

    Vec operator()(const Vec& p) const { return components(p); }
};

/// Smooth field of symmetric positive-definite matrices on a chart.
struct MetricField {
    Chart chart;
    std::function<Mat(const Vec&)> matrix;

    Mat operator()(const Vec& p) const { return matrix(p); }
};

/// Smooth map between charts with an optional analytic Jacobian (rows index
/// target coordinates). Without one, Jacobians fall back to central
/// differences of eval.
struct GraphMap {
    Chart source_chart;
    Chart target_chart;
    std::function<Vec(const Vec&)> eval;
    std::function<Mat(const Vec&)> jacobian; // may be empty

    Vec operator()(const Vec& p) const { return eval(p); }
};

/// Inverse of a symmetric positive-definite matrix via Cholesky.
/// Throws SingularError when the matrix is not SPD.
[[nodiscard]] Mat spd_inverse(const Mat& a, const std::string& what);

/// Determinant of a symmetric positive-definite matrix via Cholesky.
[[nodiscard]] double spd_determinant(const Mat& a, const std::string& what);

} // namespace warpgeo
