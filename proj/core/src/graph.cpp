#include "warpgeo/graph.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

namespace warpgeo {

namespace {

constexpr double kRankThresholdRel = 1e-10;
constexpr double kDegenerateClusterRel = 1e-8;

Mat sym(const Mat& a) { return 0.5 * (a + a.transpose()); }

Mat warped_fiber_metric(const WarpedSpace& ws, const GraphMap& f, const Vec& x) {
    const Vec fx = f.eval(x);
    f.target_chart.require_interior(fx, 0.0, "graph fiber metric");
    return std::exp(2.0 * ws.weight.eval(x)) * sym(ws.fiber_metric.matrix(fx));
}

// Gram-Schmidt completion of the column set `have` to a full basis that is
// orthonormal for the inner-product matrix `ip`, drawing candidates either
// from the standard basis (deterministic) or from the supplied generator.
Mat complete_orthonormal(const Mat& have, const Mat& ip, std::mt19937* rng) {
    const int dim = static_cast<int>(ip.rows());
    const double scale_floor = 1e-12 * ip.trace() / dim;
    Mat basis(dim, dim);
    int count = static_cast<int>(have.cols());
    basis.leftCols(count) = have;
    std::normal_distribution<double> gauss(0.0, 1.0);
    int candidate = 0;
    while (count < dim) {
        Vec v(dim);
        if (rng != nullptr) {
            for (int i = 0; i < dim; ++i) v[i] = gauss(*rng);
        } else {
            if (candidate >= dim) {
                throw SingularError("frame completion exhausted the coordinate directions");
            }
            v = Vec::Unit(dim, candidate++);
        }
        for (int j = 0; j < count; ++j) {
            v -= (basis.col(j).transpose() * ip * v)(0) * basis.col(j);
        }
        const double norm_sq = (v.transpose() * ip * v)(0);
        if (norm_sq > scale_floor) {
            basis.col(count++) = v / std::sqrt(norm_sq);
        }
    }
    return basis;
}

Vec grad_star_psi(const GraphPointFrame& frame, const Vec& grad_psi) {
    const int m = frame.base_dims();
    Vec out = Vec::Zero(m);
    for (int i = 0; i < m; ++i) {
        const Vec xi = frame.base_frame.col(i);
        const double coefficient = (grad_psi.transpose() * frame.g * xi)(0);
        out += coefficient / (1.0 + frame.singular_values_sq[i]) * xi;
    }
    return out;
}

struct BundleContext {
    GraphPointFrame frame;
    CurvatureBundle bundle;
    Vec grad_psi;
};

BundleContext curvature_context(const WarpedSpace& ws, const GraphMap& f, const Vec& x,
                                const FdConfig& fd) {
    BundleContext ctx;
    ctx.frame = eigenframe(ws, f, x, fd);
    const GraphPointFrame& frame = ctx.frame;
    const int m = frame.base_dims();
    const int n = frame.fiber_dims();
    const Mat& j = frame.jacobian;

    const Tensor3 hess = map_hessian(ws.base_metric, ws.fiber_metric, f, x, fd);
    CurvatureBundle& cb = ctx.bundle;
    cb.tension = Vec::Zero(n);
    for (int i = 0; i < m; ++i) {
        const Vec xs = frame.graph_frame.col(i);
        for (int a = 0; a < n; ++a) {
            cb.tension[a] += (xs.transpose() * hess[a] * xs)(0);
        }
    }

    ctx.grad_psi = gradient(ws.base_metric, ws.weight, x, fd);
    double df_norm_sq_induced = 0.0;
    for (int i = 0; i < m; ++i) {
        const double l2 = frame.singular_values_sq[i];
        df_norm_sq_induced += l2 / (1.0 + l2);
    }
    const Vec gs_psi = grad_star_psi(frame, ctx.grad_psi);
    cb.warp_correction = j * (df_norm_sq_induced * ctx.grad_psi + 2.0 * gs_psi);
    cb.total_tension = cb.tension + cb.warp_correction;
    cb.pulled_tension = df_adjoint(frame, cb.total_tension);
    cb.residual_tension = cb.total_tension - j * cb.pulled_tension;
    cb.mean_curvature_base = -cb.pulled_tension / m;
    cb.mean_curvature_fiber = cb.residual_tension / m;

    double cos_angle = 1.0;
    for (int i = 0; i < m; ++i) cos_angle /= std::sqrt(1.0 + frame.singular_values_sq[i]);
    cb.cos_angle = cos_angle;

    const double norm_sq = (cb.pulled_tension.transpose() * frame.g * cb.pulled_tension)(0) +
                           (cb.residual_tension.transpose() * frame.htilde *
                            cb.residual_tension)(0);
    cb.mean_curvature_norm = std::sqrt(std::max(0.0, norm_sq)) / m;
    return ctx;
}

Vec ambient_mean_curvature(const WarpedSpace& ws, const GraphMap& f, const Vec& x,
                           const FdConfig& fd) {
    const CurvatureBundle cb = curvature_bundle(ws, f, x, fd);
    Vec h(cb.mean_curvature_base.size() + cb.mean_curvature_fiber.size());
    h << cb.mean_curvature_base, cb.mean_curvature_fiber;
    return h;
}

} // namespace

Mat GraphPointFrame::ambient_tangent_frame() const {
    const int m = base_dims();
    const int n = fiber_dims();
    Mat t(m + n, m);
    t.topRows(m) = graph_frame;
    t.bottomRows(n) = jacobian * graph_frame;
    return t;
}

Mat GraphPointFrame::ambient_metric() const {
    const int m = base_dims();
    const int n = fiber_dims();
    Mat gt = Mat::Zero(m + n, m + n);
    gt.topLeftCorner(m, m) = g;
    gt.bottomRightCorner(n, n) = htilde;
    return gt;
}

Mat GraphPointFrame::ambient_normal_frame() const {
    const int m = base_dims();
    const int n = fiber_dims();
    const Mat gt = ambient_metric();
    const Mat tangent = ambient_tangent_frame();
    Mat normals(m + n, n);
    int count = 0;
    for (int candidate = 0; candidate < m + n && count < n; ++candidate) {
        Vec v = Vec::Unit(m + n, candidate);
        v -= tangent * (tangent.transpose() * gt * v);
        for (int j = 0; j < count; ++j) {
            v -= (normals.col(j).transpose() * gt * v)(0) * normals.col(j);
        }
        const double norm_sq = (v.transpose() * gt * v)(0);
        if (norm_sq > 1e-10) normals.col(count++) = v / std::sqrt(norm_sq);
    }
    if (count != n) throw SingularError("ambient_normal_frame: completion failed");
    return normals;
}

Mat graph_metric(const WarpedSpace& ws, const GraphMap& f, const Vec& x, const FdConfig& fd) {
    const Mat g = sym(ws.base_metric.matrix(x));
    const Mat j = map_jacobian(f, x, fd);
    const Mat htilde = warped_fiber_metric(ws, f, x);
    return sym(g + j.transpose() * htilde * j);
}

GraphPointFrame eigenframe(const WarpedSpace& ws, const GraphMap& f, const Vec& x,
                           const FdConfig& fd, std::uint32_t completion_seed) {
    double margin = 0.0;
    for (int i = 0; i < x.size(); ++i) margin = std::max(margin, fd.margin(1, x[i]));
    ws.base_metric.chart.require_interior(x, margin, "eigenframe");
    GraphPointFrame frame;
    frame.point = x;
    frame.g = sym(ws.base_metric.matrix(x));
    frame.jacobian = map_jacobian(f, x, fd);
    frame.htilde = warped_fiber_metric(ws, f, x);
    const int m = static_cast<int>(frame.g.rows());
    const int n = static_cast<int>(frame.htilde.rows());

    const Mat pulled = sym(frame.jacobian.transpose() * frame.htilde * frame.jacobian);
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> solver(pulled, frame.g);
    if (solver.info() != Eigen::Success) {
        throw SingularError("eigenframe: generalized eigensolver failed (base metric not SPD?)");
    }

    // Solver order is ascending; store descending and clamp the noise floor.
    frame.singular_values_sq.resize(m);
    frame.base_frame.resize(m, m);
    for (int i = 0; i < m; ++i) {
        frame.singular_values_sq[i] = std::max(0.0, solver.eigenvalues()[m - 1 - i]);
        frame.base_frame.col(i) = solver.eigenvectors().col(m - 1 - i);
    }
    const double top = frame.singular_values_sq[0];
    const double floor = kRankThresholdRel * top;
    frame.rank = 0;
    for (int i = 0; i < m; ++i) {
        if (top > 0.0 && frame.singular_values_sq[i] >= floor) {
            ++frame.rank;
        } else {
            frame.singular_values_sq[i] = 0.0;
        }
    }

    std::mt19937 rng(completion_seed);
    std::mt19937* rng_ptr = completion_seed != 0 ? &rng : nullptr;
    if (rng_ptr != nullptr) {
        // Randomize the frame inside degenerate eigenvalue clusters; all
        // public outputs must not notice.
        std::normal_distribution<double> gauss(0.0, 1.0);
        int start = 0;
        while (start < m) {
            int stop = start + 1;
            while (stop < m && std::abs(frame.singular_values_sq[stop] -
                                        frame.singular_values_sq[start]) <=
                                   kDegenerateClusterRel * (1.0 + top)) {
                ++stop;
            }
            const int size = stop - start;
            if (size > 1) {
                Mat random(size, size);
                for (int r = 0; r < size; ++r) {
                    for (int c = 0; c < size; ++c) random(r, c) = gauss(*rng_ptr);
                }
                const Mat q = Eigen::HouseholderQR<Mat>(random).householderQ();
                frame.base_frame.middleCols(start, size) =
                    frame.base_frame.middleCols(start, size) * q;
            }
            start = stop;
        }
    }

    frame.graph_frame.resize(m, m);
    for (int i = 0; i < m; ++i) {
        frame.graph_frame.col(i) =
            frame.base_frame.col(i) / std::sqrt(1.0 + frame.singular_values_sq[i]);
    }

    Mat image(n, frame.rank);
    for (int i = 0; i < frame.rank; ++i) {
        image.col(i) =
            frame.jacobian * frame.base_frame.col(i) / std::sqrt(frame.singular_values_sq[i]);
    }
    frame.fiber_frame = complete_orthonormal(image, frame.htilde, rng_ptr);
    return frame;
}

Vec df_adjoint(const GraphPointFrame& frame, const Vec& u) {
    Vec out = Vec::Zero(frame.base_dims());
    for (int i = 0; i < frame.rank; ++i) {
        const double coefficient =
            (u.transpose() * frame.htilde * frame.fiber_frame.col(i))(0);
        const double lambda = std::sqrt(frame.singular_values_sq[i]);
        out += coefficient * lambda / (1.0 + frame.singular_values_sq[i]) *
               frame.base_frame.col(i);
    }
    return out;
}

CurvatureBundle curvature_bundle(const WarpedSpace& ws, const GraphMap& f, const Vec& x,
                                 const FdConfig& fd) {
    return curvature_context(ws, f, x, fd).bundle;
}

Vec second_fundamental_form(const WarpedSpace& ws, const GraphMap& f, const Vec& x,
                            const Vec& xvec, const Vec& yvec, const FdConfig& fd) {
    const GraphPointFrame frame = eigenframe(ws, f, x, fd);
    const int m = frame.base_dims();
    const int n = frame.fiber_dims();
    const Tensor3 hess = map_hessian(ws.base_metric, ws.fiber_metric, f, x, fd);
    const Vec grad_psi = gradient(ws.base_metric, ws.weight, x, fd);

    Vec fiber_part(n);
    for (int a = 0; a < n; ++a) fiber_part[a] = (xvec.transpose() * hess[a] * yvec)(0);

    const Vec jx = frame.jacobian * xvec;
    const Vec jy = frame.jacobian * yvec;
    const double pulled_pairing = (jx.transpose() * frame.htilde * jy)(0);
    const double dpsi_x = (grad_psi.transpose() * frame.g * xvec)(0);
    const double dpsi_y = (grad_psi.transpose() * frame.g * yvec)(0);
    const Vec coupling = pulled_pairing * grad_psi + dpsi_x * yvec + dpsi_y * xvec;

    Vec ambient = Vec::Zero(m + n);
    ambient.tail(n) = fiber_part + frame.jacobian * coupling;
    return normal_projection(frame, ambient);
}

Vec normal_projection(const GraphPointFrame& frame, const Vec& ambient) {
    const Mat tangent = frame.ambient_tangent_frame();
    const Mat gt = frame.ambient_metric();
    return ambient - tangent * (tangent.transpose() * gt * ambient);
}

WeightPairingCheck q_psi_residuals(const WarpedSpace& ws, const GraphMap& f, const Vec& x,
                                   const FdConfig& fd) {
    const BundleContext ctx = curvature_context(ws, f, x, fd);
    const GraphPointFrame& frame = ctx.frame;
    const CurvatureBundle& cb = ctx.bundle;
    const Vec gs_psi = grad_star_psi(frame, ctx.grad_psi);
    const Vec df_gs_psi = frame.jacobian * gs_psi;
    const Vec df_g_psi = frame.jacobian * ctx.grad_psi;

    const auto pairing = [&frame](const Vec& u, const Vec& v) {
        return (u.transpose() * frame.htilde * v)(0);
    };
    const double q_total = pairing(cb.total_tension, df_gs_psi);
    WeightPairingCheck check;
    check.pulled_residual =
        std::abs(q_total - (cb.pulled_tension.transpose() * frame.g * ctx.grad_psi)(0));
    check.fiber_residual = std::abs(q_total - pairing(cb.residual_tension, df_g_psi));
    check.q_of_warp_correction = pairing(cb.warp_correction, df_gs_psi);
    return check;
}

int m_minus_indicator(const WarpedSpace& ws, const GraphMap& f, const Vec& x,
                      const FdConfig& fd, double dead_band) {
    const BundleContext ctx = curvature_context(ws, f, x, fd);
    const double base_pairing =
        (ctx.bundle.mean_curvature_base.transpose() * ctx.frame.g * ctx.grad_psi)(0);
    const double fiber_pairing = (ctx.bundle.mean_curvature_fiber.transpose() *
                                  ctx.frame.htilde * (ctx.frame.jacobian * ctx.grad_psi))(0);
    if (std::abs(base_pairing + fiber_pairing) > 1e-8 * std::max(1.0, std::abs(base_pairing))) {
        throw Error("m_minus_indicator: base and fiber pairings fail the opposite-sign identity");
    }
    if (std::abs(base_pairing) <= dead_band) return 0;
    return base_pairing < 0.0 ? -1 : 1;
}

double heinz_divergence_residual(const WarpedSpace& ws, const GraphMap& f, const Vec& x,
                                 const FdConfig& fd) {
    const BundleContext ctx = curvature_context(ws, f, x, fd);
    const int m = ctx.frame.base_dims();
    const VectorField pulled_field{
        ws.base_metric.chart,
        [&](const Vec& y) { return curvature_bundle(ws, f, y, fd).pulled_tension; }};
    const double div = divergence(ws.base_metric, pulled_field, x, fd, true);
    const double pairing =
        (ctx.bundle.pulled_tension.transpose() * ctx.frame.g * ctx.grad_psi)(0);
    const double target = m * m * ctx.bundle.mean_curvature_norm * ctx.bundle.mean_curvature_norm;
    return std::abs(div + pairing - target);
}

CalibrationCheck calibration_divergence_residual(const WarpedSpace& ws, const GraphMap& f,
                                                 const Vec& x, const FdConfig& fd) {
    const BundleContext ctx = curvature_context(ws, f, x, fd);
    const GraphPointFrame& frame = ctx.frame;
    const CurvatureBundle& cb = ctx.bundle;
    const int m = frame.base_dims();

    const MetricField induced{ws.base_metric.chart,
                              [&](const Vec& y) { return graph_metric(ws, f, y, fd); }};
    const VectorField calibrated_field{
        ws.base_metric.chart, [&](const Vec& y) {
            const CurvatureBundle b = curvature_bundle(ws, f, y, fd);
            return Vec(b.cos_angle * b.mean_curvature_base);
        }};
    const double div = divergence(induced, calibrated_field, x, fd, true);

    // The induced-metric pairing with the induced gradient of psi is just
    // the differential of psi applied to the field.
    Vec dpsi(m);
    if (ws.weight.analytic_gradient) {
        dpsi = ws.weight.analytic_gradient(x);
    } else {
        dpsi = frame.g * ctx.grad_psi;
    }
    const double weight_term = cb.cos_angle * dpsi.dot(cb.mean_curvature_base);
    const double target = m * cb.cos_angle * cb.mean_curvature_norm * cb.mean_curvature_norm;

    CalibrationCheck check;
    check.divergence_residual = std::abs(div + weight_term + target);

    // Rebuild the same field from the normal-bundle morphism pairing.
    Vec product_point(m + frame.fiber_dims());
    product_point << x, f.eval(x);
    const Mat tangent = frame.ambient_tangent_frame();
    const Mat normals = frame.ambient_normal_frame();
    const Mat gt = frame.ambient_metric();
    Vec h_ambient(m + frame.fiber_dims());
    h_ambient << cb.mean_curvature_base, cb.mean_curvature_fiber;
    const Vec normal_pairings = normals.transpose() * gt * h_ambient;

    Vec rebuilt = Vec::Zero(m);
    for (int i = 0; i < m; ++i) {
        const Vec coefficients =
            phi_morphism(ws, product_point, tangent, tangent.col(i), normals);
        rebuilt += coefficients.dot(normal_pairings) * frame.graph_frame.col(i);
    }
    // The reconstruction carries the orientation of the eigenvector frame,
    // which the solver does not normalize; compare against the signed angle
    // cosine so the identity is orientation covariant.
    std::vector<Vec> tangent_columns;
    tangent_columns.reserve(m);
    for (int i = 0; i < m; ++i) tangent_columns.push_back(tangent.col(i));
    const double signed_cos = omega_eval(ws, product_point, tangent_columns);
    const Vec deviation = rebuilt - signed_cos * cb.mean_curvature_base;
    check.morphism_crosscheck = std::sqrt((deviation.transpose() * frame.g * deviation)(0));
    return check;
}

double mean_curvature_pairing_residual(const WarpedSpace& ws, const GraphMap& f, const Vec& x,
                                       const FdConfig& fd) {
    const BundleContext ctx = curvature_context(ws, f, x, fd);
    const GraphPointFrame& frame = ctx.frame;
    const int m = frame.base_dims();
    const int n = frame.fiber_dims();

    Vec product_point(m + n);
    product_point << x, f.eval(x);
    const Tensor3 gamma = warped_christoffel(ws, product_point, fd);
    const Mat gt = frame.ambient_metric();
    const Mat tangent = frame.ambient_tangent_frame();
    const Vec h0 = ambient_mean_curvature(ws, f, x, fd);

    const double step = fd.derived_field_scale;
    double pairing = 0.0;
    for (int i = 0; i < m; ++i) {
        const Vec direction = frame.graph_frame.col(i);
        const Vec hp = ambient_mean_curvature(ws, f, x + step * direction, fd);
        const Vec hm = ambient_mean_curvature(ws, f, x - step * direction, fd);
        Vec covariant = (hp - hm) / (2.0 * step);
        const Vec velocity = tangent.col(i);
        for (int b = 0; b < m + n; ++b) {
            covariant[b] += (velocity.transpose() * gamma[b] * h0)(0);
        }
        pairing += (velocity.transpose() * gt * covariant)(0);
    }
    const double target = m * ctx.bundle.mean_curvature_norm * ctx.bundle.mean_curvature_norm;
    return std::abs(pairing + target);
}

} // namespace warpgeo
