#include "warpgeo/warped.hpp"

#include <cmath>

namespace warpgeo {

namespace {

// Strictly increasing index tuples of the given size drawn from {0, .., n-1}.
void increasing_tuples(int n, int size, std::vector<std::vector<int>>& out) {
    std::vector<int> tuple(size);
    const std::function<void(int, int)> recurse = [&](int slot, int start) {
        if (slot == size) {
            out.push_back(tuple);
            return;
        }
        for (int v = start; v <= n - (size - slot); ++v) {
            tuple[slot] = v;
            recurse(slot + 1, v + 1);
        }
    };
    recurse(0, 0);
}

Mat warped_matrix(const WarpedSpace& ws, const Vec& p) {
    const int m = ws.base_dim();
    const int n = ws.fiber_dim();
    const Vec x = ws.base_part(p);
    const Vec y = ws.fiber_part(p);
    Mat g = Mat::Zero(m + n, m + n);
    g.topLeftCorner(m, m) = ws.base_metric.matrix(x);
    g.bottomRightCorner(n, n) =
        std::exp(2.0 * ws.weight.eval(x)) * ws.fiber_metric.matrix(y);
    return g;
}

} // namespace

MetricField warped_metric(const WarpedSpace& ws) {
    return MetricField{ws.product_chart(), [ws](const Vec& p) { return warped_matrix(ws, p); }};
}

Tensor3 warped_christoffel(const WarpedSpace& ws, const Vec& p, const FdConfig& fd) {
    const int m = ws.base_dim();
    const int n = ws.fiber_dim();
    const Vec x = ws.base_part(p);
    const Vec y = ws.fiber_part(p);

    const Tensor3 gamma_base = christoffel(ws.base_metric, x, fd);
    const Tensor3 gamma_fiber = christoffel(ws.fiber_metric, y, fd);
    const Vec grad_psi = gradient(ws.base_metric, ws.weight, x, fd);
    Vec dpsi(m);
    if (ws.weight.analytic_gradient) {
        dpsi = ws.weight.analytic_gradient(x);
    } else {
        dpsi = ws.base_metric.matrix(x) * grad_psi;
    }
    const Mat h = ws.fiber_metric.matrix(y);
    const double rho_sq = std::exp(2.0 * ws.weight.eval(x));

    Tensor3 gamma(m + n, Mat::Zero(m + n, m + n));
    for (int k = 0; k < m; ++k) {
        gamma[k].topLeftCorner(m, m) = gamma_base[k];
        // Mixed fiber-fiber lower indices reach into the base:
        // Gamma^k_{ab} = -e^{2 psi} h_ab (grad psi)^k.
        gamma[k].bottomRightCorner(n, n) = -rho_sq * grad_psi[k] * h;
    }
    for (int a = 0; a < n; ++a) {
        Mat& block = gamma[m + a];
        block.bottomRightCorner(n, n) = gamma_fiber[a];
        // One base and one fiber lower index: Gamma^a_{i b} = d_i psi delta_ab.
        for (int i = 0; i < m; ++i) {
            block(i, m + a) = dpsi[i];
            block(m + a, i) = dpsi[i];
        }
    }
    return gamma;
}

double warped_connection_residual(const WarpedSpace& ws, const Vec& p, const FdConfig& fd) {
    const Tensor3 fd_gamma = christoffel(warped_metric(ws), p, fd);
    const Tensor3 rule_gamma = warped_christoffel(ws, p, fd);
    double residual = 0.0;
    for (size_t k = 0; k < fd_gamma.size(); ++k) {
        residual = std::max(residual, (fd_gamma[k] - rule_gamma[k]).cwiseAbs().maxCoeff());
    }
    return residual;
}

double omega_eval(const WarpedSpace& ws, const Vec& p, const std::vector<Vec>& vectors) {
    const int m = ws.base_dim();
    if (static_cast<int>(vectors.size()) != m) {
        throw Error("omega_eval: expected exactly " + std::to_string(m) + " vectors");
    }
    Mat base_components(m, m);
    for (int j = 0; j < m; ++j) {
        if (vectors[j].size() != m + ws.fiber_dim()) {
            throw Error("omega_eval: vector dimension does not match the product chart");
        }
        base_components.col(j) = vectors[j].head(m);
    }
    const double det_g =
        spd_determinant(ws.base_metric.matrix(ws.base_part(p)), "omega_eval");
    return std::sqrt(det_g) * base_components.determinant();
}

double omega_component(const WarpedSpace& ws, const Vec& p, const std::vector<int>& indices) {
    const int dim = ws.base_dim() + ws.fiber_dim();
    std::vector<Vec> vectors;
    vectors.reserve(indices.size());
    for (int i : indices) {
        Vec e = Vec::Zero(dim);
        e[i] = 1.0;
        vectors.push_back(std::move(e));
    }
    return omega_eval(ws, p, vectors);
}

double omega_closedness_residual(const WarpedSpace& ws, const Vec& p, const FdConfig& fd) {
    const int m = ws.base_dim();
    const int dim = m + ws.fiber_dim();
    ws.product_chart().require_interior(
        p, 2.0 * fd.step1(p.cwiseAbs().maxCoeff()), "omega_closedness_residual");

    std::vector<std::vector<int>> tuples;
    increasing_tuples(dim, m + 1, tuples);
    double residual = 0.0;
    for (const auto& tuple : tuples) {
        double component = 0.0;
        for (int drop = 0; drop <= m; ++drop) {
            std::vector<int> rest;
            rest.reserve(m);
            for (int s = 0; s <= m; ++s) {
                if (s != drop) rest.push_back(tuple[s]);
            }
            const int axis = tuple[drop];
            const double h = fd.step1(p[axis]);
            Vec q = p;
            q[axis] = p[axis] + h;
            const double fp = omega_component(ws, q, rest);
            q[axis] = p[axis] - h;
            const double fm = omega_component(ws, q, rest);
            const double partial = (fp - fm) / (2.0 * h);
            component += (drop % 2 == 0 ? 1.0 : -1.0) * partial;
        }
        residual = std::max(residual, std::abs(component));
    }
    return residual;
}

double omega_parallel_residual(const WarpedSpace& ws, const Vec& p, const FdConfig& fd) {
    const int m = ws.base_dim();
    const int dim = m + ws.fiber_dim();
    ws.product_chart().require_interior(
        p, 2.0 * fd.step1(p.cwiseAbs().maxCoeff()), "omega_parallel_residual");
    const Tensor3 gamma = warped_christoffel(ws, p, fd);

    std::vector<std::vector<int>> tuples;
    increasing_tuples(dim, m, tuples);
    double residual = 0.0;
    for (int c = 0; c < dim; ++c) {
        const double h = fd.step1(p[c]);
        for (const auto& tuple : tuples) {
            Vec q = p;
            q[c] = p[c] + h;
            const double fp = omega_component(ws, q, tuple);
            q[c] = p[c] - h;
            const double fm = omega_component(ws, q, tuple);
            double value = (fp - fm) / (2.0 * h);
            for (int slot = 0; slot < m; ++slot) {
                std::vector<int> contracted = tuple;
                for (int b = 0; b < dim; ++b) {
                    const double coef = gamma[b](c, tuple[slot]);
                    if (coef == 0.0) continue;
                    contracted[slot] = b;
                    value -= coef * omega_component(ws, p, contracted);
                }
            }
            residual = std::max(residual, std::abs(value));
        }
    }
    return residual;
}

Vec phi_morphism(const WarpedSpace& ws, const Vec& p, const Mat& tangent_frame,
                 const Vec& x_tangent, const Mat& normal_frame) {
    const int m = ws.base_dim();
    const Mat gtilde = warped_matrix(ws, p);
    const Mat frame_gram = tangent_frame.transpose() * gtilde * tangent_frame;
    if ((frame_gram - Mat::Identity(m, m)).cwiseAbs().maxCoeff() > 1e-8) {
        throw Error("phi_morphism: tangent frame is not orthonormal for the induced metric");
    }
    const int r = static_cast<int>(normal_frame.cols());
    const Mat normal_gram = normal_frame.transpose() * gtilde * normal_frame;
    const Mat cross_gram = normal_frame.transpose() * gtilde * tangent_frame;
    if ((normal_gram - Mat::Identity(r, r)).cwiseAbs().maxCoeff() > 1e-8 ||
        cross_gram.cwiseAbs().maxCoeff() > 1e-8) {
        throw Error("phi_morphism: normal frame is not orthonormal or not normal");
    }

    const Vec frame_coords = tangent_frame.transpose() * gtilde * x_tangent;
    Vec coefficients = Vec::Zero(r);
    std::vector<Vec> slots(m);
    for (int a = 0; a < r; ++a) {
        double c = 0.0;
        for (int i = 0; i < m; ++i) {
            slots[0] = normal_frame.col(a);
            int fill = 1;
            for (int s = 0; s < m; ++s) {
                if (s != i) slots[fill++] = tangent_frame.col(s);
            }
            const double sign = (i % 2 == 0) ? 1.0 : -1.0;
            c += frame_coords[i] * sign * omega_eval(ws, p, slots);
        }
        coefficients[a] = c;
    }
    return coefficients;
}

} // namespace warpgeo
