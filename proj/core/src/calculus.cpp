#include "warpgeo/calculus.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace warpgeo {

namespace {

// User-supplied metric evaluators are only required to be symmetric to
// rounding; differencing them benefits from exact symmetry.
Mat sym(const Mat& a) { return 0.5 * (a + a.transpose()); }

Mat metric_at(const MetricField& metric, const Vec& p) { return sym(metric.matrix(p)); }

double max_margin(const FdConfig& fd, const Vec& p, int order) {
    double m = 0.0;
    for (int i = 0; i < p.size(); ++i) m = std::max(m, fd.margin(order, p[i]));
    return m;
}

Vec scalar_differential(const ScalarField& s, const Vec& p, const FdConfig& fd) {
    if (s.analytic_gradient) return s.analytic_gradient(p);
    Vec ds(p.size());
    Vec q = p;
    for (int i = 0; i < p.size(); ++i) {
        const double h = fd.step1(p[i]);
        q[i] = p[i] + h;
        const double fp = s.eval(q);
        q[i] = p[i] - h;
        const double fm = s.eval(q);
        q[i] = p[i];
        ds[i] = (fp - fm) / (2.0 * h);
    }
    return ds;
}

// First derivatives of the metric components, d_a g, one matrix per axis.
std::vector<Mat> metric_first_derivatives(const MetricField& metric, const Vec& p,
                                          const FdConfig& fd) {
    const int d = static_cast<int>(p.size());
    std::vector<Mat> dg(d);
    Vec q = p;
    for (int a = 0; a < d; ++a) {
        const double h = fd.step1(p[a]);
        q[a] = p[a] + h;
        const Mat gp = metric_at(metric, q);
        q[a] = p[a] - h;
        const Mat gm = metric_at(metric, q);
        q[a] = p[a];
        dg[a] = (gp - gm) / (2.0 * h);
    }
    return dg;
}

Tensor3 christoffel_from_derivatives(const Mat& ginv, const std::vector<Mat>& dg) {
    const int d = static_cast<int>(dg.size());
    Tensor3 gamma(d, Mat::Zero(d, d));
    for (int k = 0; k < d; ++k) {
        for (int i = 0; i < d; ++i) {
            for (int j = i; j < d; ++j) {
                double sum = 0.0;
                for (int l = 0; l < d; ++l) {
                    sum += ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
                }
                gamma[k](i, j) = 0.5 * sum;
                gamma[k](j, i) = gamma[k](i, j);
            }
        }
    }
    return gamma;
}

} // namespace

Mat spd_inverse(const Mat& a, const std::string& what) {
    Eigen::LLT<Mat> llt(a);
    if (llt.info() != Eigen::Success) {
        throw SingularError(what + ": matrix is not symmetric positive definite");
    }
    return llt.solve(Mat::Identity(a.rows(), a.cols()));
}

double spd_determinant(const Mat& a, const std::string& what) {
    Eigen::LLT<Mat> llt(a);
    if (llt.info() != Eigen::Success) {
        throw SingularError(what + ": matrix is not symmetric positive definite");
    }
    const Mat l = llt.matrixL();
    double det_sqrt = 1.0;
    for (int i = 0; i < a.rows(); ++i) det_sqrt *= l(i, i);
    return det_sqrt * det_sqrt;
}

Mat map_jacobian(const GraphMap& f, const Vec& p, const FdConfig& fd) {
    if (f.jacobian) return f.jacobian(p);
    const int m = static_cast<int>(p.size());
    const int n = f.target_chart.dim();
    Mat j(n, m);
    Vec q = p;
    for (int i = 0; i < m; ++i) {
        const double h = fd.step1(p[i]);
        q[i] = p[i] + h;
        const Vec fp = f.eval(q);
        q[i] = p[i] - h;
        const Vec fm = f.eval(q);
        q[i] = p[i];
        j.col(i) = (fp - fm) / (2.0 * h);
    }
    return j;
}

Tensor3 christoffel(const MetricField& metric, const Vec& p, const FdConfig& fd) {
    metric.chart.require_interior(p, max_margin(fd, p, 1), "christoffel");
    const Mat ginv = spd_inverse(metric_at(metric, p), "christoffel");
    return christoffel_from_derivatives(ginv, metric_first_derivatives(metric, p, fd));
}

Vec gradient(const MetricField& metric, const ScalarField& s, const Vec& p,
             const FdConfig& fd) {
    metric.chart.require_interior(p, max_margin(fd, p, 1), "gradient");
    const Mat ginv = spd_inverse(metric_at(metric, p), "gradient");
    return ginv * scalar_differential(s, p, fd);
}

double divergence(const MetricField& metric, const VectorField& V, const Vec& p,
                  const FdConfig& fd, bool derived_field) {
    double margin = max_margin(fd, p, 1);
    if (derived_field) {
        for (int i = 0; i < p.size(); ++i) margin = std::max(margin, 2.0 * fd.field_step(p[i]));
    }
    metric.chart.require_interior(p, margin, "divergence");
    const auto density_flux = [&](const Vec& q, int i) {
        const Mat g = metric_at(metric, q);
        return std::sqrt(spd_determinant(g, "divergence")) * V.components(q)[i];
    };
    const double density = std::sqrt(spd_determinant(metric_at(metric, p), "divergence"));
    double sum = 0.0;
    Vec q = p;
    for (int i = 0; i < p.size(); ++i) {
        const double h = derived_field ? fd.field_step(p[i]) : fd.step1(p[i]);
        q[i] = p[i] + h;
        const double fp = density_flux(q, i);
        q[i] = p[i] - h;
        const double fm = density_flux(q, i);
        q[i] = p[i];
        sum += (fp - fm) / (2.0 * h);
    }
    return sum / density;
}

double weighted_divergence(const MetricField& metric, const ScalarField& psi,
                           const VectorField& V, const Vec& p, const FdConfig& fd,
                           bool derived_field) {
    const Vec dpsi = scalar_differential(psi, p, fd);
    return divergence(metric, V, p, fd, derived_field) + dpsi.dot(V.components(p));
}

Mat hessian_scalar(const MetricField& metric, const ScalarField& s, const Vec& p,
                   const FdConfig& fd) {
    metric.chart.require_interior(p, max_margin(fd, p, 2), "hessian_scalar");
    const int d = static_cast<int>(p.size());
    const double f0 = s.eval(p);
    Mat hess(d, d);
    Vec q = p;
    for (int i = 0; i < d; ++i) {
        const double hi = fd.step2(p[i]);
        q[i] = p[i] + hi;
        const double fp = s.eval(q);
        q[i] = p[i] - hi;
        const double fm = s.eval(q);
        q[i] = p[i];
        hess(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
        for (int j = i + 1; j < d; ++j) {
            const double hj = fd.step2(p[j]);
            q[i] = p[i] + hi;
            q[j] = p[j] + hj;
            const double fpp = s.eval(q);
            q[j] = p[j] - hj;
            const double fpm = s.eval(q);
            q[i] = p[i] - hi;
            const double fmm = s.eval(q);
            q[j] = p[j] + hj;
            const double fmp = s.eval(q);
            q[i] = p[i];
            q[j] = p[j];
            hess(i, j) = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
            hess(j, i) = hess(i, j);
        }
    }
    const Tensor3 gamma = christoffel(metric, p, fd);
    const Vec ds = scalar_differential(s, p, fd);
    for (int k = 0; k < d; ++k) hess -= ds[k] * gamma[k];
    return hess;
}

Mat ricci(const MetricField& metric, const Vec& p, const FdConfig& fd) {
    metric.chart.require_interior(p, max_margin(fd, p, 2), "ricci");
    const int d = static_cast<int>(p.size());
    const Mat g0 = metric_at(metric, p);
    const Mat ginv = spd_inverse(g0, "ricci");
    const std::vector<Mat> dg = metric_first_derivatives(metric, p, fd);

    // Second derivatives of the metric, d_a d_b g, shared stencil for a = b
    // and the mixed four-point stencil otherwise.
    std::vector<std::vector<Mat>> d2g(d, std::vector<Mat>(d));
    Vec q = p;
    for (int a = 0; a < d; ++a) {
        const double ha = fd.step2(p[a]);
        q[a] = p[a] + ha;
        const Mat gp = metric_at(metric, q);
        q[a] = p[a] - ha;
        const Mat gm = metric_at(metric, q);
        q[a] = p[a];
        d2g[a][a] = (gp - 2.0 * g0 + gm) / (ha * ha);
        for (int b = a + 1; b < d; ++b) {
            const double hb = fd.step2(p[b]);
            q[a] = p[a] + ha;
            q[b] = p[b] + hb;
            const Mat gpp = metric_at(metric, q);
            q[b] = p[b] - hb;
            const Mat gpm = metric_at(metric, q);
            q[a] = p[a] - ha;
            const Mat gmm = metric_at(metric, q);
            q[b] = p[b] + hb;
            const Mat gmp = metric_at(metric, q);
            q[a] = p[a];
            q[b] = p[b];
            d2g[a][b] = (gpp - gpm - gmp + gmm) / (4.0 * ha * hb);
            d2g[b][a] = d2g[a][b];
        }
    }

    const Tensor3 gamma = christoffel_from_derivatives(ginv, dg);

    // d_a g^{-1} = -g^{-1} (d_a g) g^{-1}; then d_a Gamma termwise.
    std::vector<Mat> dginv(d);
    for (int a = 0; a < d; ++a) dginv[a] = -ginv * dg[a] * ginv;
    const auto dgamma = [&](int a, int k, int i, int j) {
        double sum = 0.0;
        for (int l = 0; l < d; ++l) {
            sum += dginv[a](k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j)) +
                   ginv(k, l) * (d2g[a][i](j, l) + d2g[a][j](i, l) - d2g[a][l](i, j));
        }
        return 0.5 * sum;
    };

    Mat ric(d, d);
    for (int j = 0; j < d; ++j) {
        for (int k = 0; k < d; ++k) {
            double sum = 0.0;
            for (int i = 0; i < d; ++i) {
                sum += dgamma(i, i, j, k) - dgamma(j, i, i, k);
                for (int s = 0; s < d; ++s) {
                    sum += gamma[i](i, s) * gamma[s](j, k) - gamma[i](j, s) * gamma[s](i, k);
                }
            }
            ric(j, k) = sum;
        }
    }
    // The contracted-derivative term admits two differencing routes for the
    // mixed entries; averaging them restores exact symmetry.
    return sym(ric);
}

Mat bakry_emery_ricci(const MetricField& metric, const ScalarField& psi, const Vec& p,
                      const FdConfig& fd) {
    return ricci(metric, p, fd) - hessian_scalar(metric, psi, p, fd);
}

Tensor3 map_hessian(const MetricField& gM, const MetricField& hN, const GraphMap& f,
                    const Vec& p, const FdConfig& fd) {
    f.source_chart.require_interior(p, max_margin(fd, p, 2), "map_hessian");
    const int m = static_cast<int>(p.size());
    const int n = f.target_chart.dim();
    const Vec fp0 = f.eval(p);
    const double target_margin = max_margin(fd, fp0, 1);
    if (!f.target_chart.contains(fp0, target_margin)) {
        throw BoundaryError("map_hessian: image point violates target chart margin");
    }

    const Mat j = map_jacobian(f, p, fd);
    Tensor3 d2f(n, Mat::Zero(m, m));
    Vec q = p;
    if (f.jacobian) {
        // One central difference of the analytic Jacobian, symmetrized over
        // the two equivalent routes to each mixed entry.
        std::vector<Mat> dj(m);
        for (int i = 0; i < m; ++i) {
            const double h = fd.step1(p[i]);
            q[i] = p[i] + h;
            const Mat jp = f.jacobian(q);
            q[i] = p[i] - h;
            const Mat jm = f.jacobian(q);
            q[i] = p[i];
            dj[i] = (jp - jm) / (2.0 * h);
        }
        for (int a = 0; a < n; ++a) {
            for (int i = 0; i < m; ++i) {
                for (int jx = 0; jx < m; ++jx) {
                    d2f[a](i, jx) = 0.5 * (dj[i](a, jx) + dj[jx](a, i));
                }
            }
        }
    } else {
        for (int i = 0; i < m; ++i) {
            const double hi = fd.step2(p[i]);
            q[i] = p[i] + hi;
            const Vec vp = f.eval(q);
            q[i] = p[i] - hi;
            const Vec vm = f.eval(q);
            q[i] = p[i];
            const Vec dii = (vp - 2.0 * fp0 + vm) / (hi * hi);
            for (int a = 0; a < n; ++a) d2f[a](i, i) = dii[a];
            for (int jx = i + 1; jx < m; ++jx) {
                const double hj = fd.step2(p[jx]);
                q[i] = p[i] + hi;
                q[jx] = p[jx] + hj;
                const Vec vpp = f.eval(q);
                q[jx] = p[jx] - hj;
                const Vec vpm = f.eval(q);
                q[i] = p[i] - hi;
                const Vec vmm = f.eval(q);
                q[jx] = p[jx] + hj;
                const Vec vmp = f.eval(q);
                q[i] = p[i];
                q[jx] = p[jx];
                const Vec dij = (vpp - vpm - vmp + vmm) / (4.0 * hi * hj);
                for (int a = 0; a < n; ++a) {
                    d2f[a](i, jx) = dij[a];
                    d2f[a](jx, i) = dij[a];
                }
            }
        }
    }

    const Tensor3 gamma_source = christoffel(gM, p, fd);
    const Tensor3 gamma_target = christoffel(hN, fp0, fd);
    Tensor3 out(n, Mat::Zero(m, m));
    for (int a = 0; a < n; ++a) {
        out[a] = d2f[a];
        for (int b = 0; b < n; ++b) {
            for (int c = 0; c < n; ++c) {
                out[a].noalias() += gamma_target[a](b, c) * (j.row(b).transpose() * j.row(c));
            }
        }
        for (int k = 0; k < m; ++k) out[a] -= j(a, k) * gamma_source[k];
    }
    return out;
}

} // namespace warpgeo
