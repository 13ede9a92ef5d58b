#include <benchmark/benchmark.h>

#include <cmath>

#include "warpgeo/calculus.hpp"
#include "warpgeo/graph.hpp"
#include "warpgeo/radial.hpp"
#include "warpgeo/spectral.hpp"
#include "warpgeo/warped.hpp"

namespace {

using warpgeo::Chart;
using warpgeo::Mat;
using warpgeo::Vec;

constexpr double kPi = 3.14159265358979323846;

Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

warpgeo::MetricField hyperbolic_polar() {
    warpgeo::MetricField metric;
    metric.chart = Chart::box("polar", vec2(0.05, -kPi), vec2(10.0, kPi));
    metric.matrix = [](const Vec& p) {
        Mat g = Mat::Identity(2, 2);
        const double s = std::sinh(p[0]);
        g(1, 1) = s * s;
        return g;
    };
    return metric;
}

warpgeo::RadialSpace hyperbolic_space(int m, double t_max) {
    warpgeo::RadialSpace rs;
    rs.m = m;
    rs.t_max = t_max;
    rs.tau = [](double t) { return std::sinh(t); };
    rs.tau_prime = [](double t) { return std::cosh(t); };
    rs.Psi = [](double) { return 0.0; };
    rs.Psi_prime = [](double) { return 0.0; };
    return rs;
}

warpgeo::WarpedSpace weighted_plane_product() {
    warpgeo::WarpedSpace ws;
    ws.base_metric.chart = Chart::box("plane", vec2(-5.0, -5.0), vec2(5.0, 5.0));
    ws.base_metric.matrix = [](const Vec&) { return Mat::Identity(2, 2); };
    ws.fiber_metric.chart = Chart::box("fiber plane", vec2(-10.0, -10.0), vec2(10.0, 10.0));
    ws.fiber_metric.matrix = [](const Vec&) { return Mat::Identity(2, 2); };
    ws.weight.chart = ws.base_metric.chart;
    ws.weight.eval = [](const Vec& p) { return 0.25 * p.squaredNorm(); };
    return ws;
}

warpgeo::GraphMap affine_map(const warpgeo::WarpedSpace& ws) {
    Mat a(2, 2);
    a << 0.3, -0.2, 0.1, 0.4;
    warpgeo::GraphMap map;
    map.source_chart = ws.base_metric.chart;
    map.target_chart = ws.fiber_metric.chart;
    map.eval = [a](const Vec& x) { return Vec(a * x); };
    map.jacobian = [a](const Vec&) { return a; };
    return map;
}

void bm_christoffel(benchmark::State& state) {
    const auto metric = hyperbolic_polar();
    const Vec p = vec2(1.3, 0.4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(warpgeo::christoffel(metric, p));
    }
}
BENCHMARK(bm_christoffel);

void bm_ricci(benchmark::State& state) {
    const auto metric = hyperbolic_polar();
    const Vec p = vec2(1.3, 0.4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(warpgeo::ricci(metric, p));
    }
}
BENCHMARK(bm_ricci);

void bm_eigenframe(benchmark::State& state) {
    const auto ws = weighted_plane_product();
    const auto map = affine_map(ws);
    const Vec x = vec2(0.7, -0.3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(warpgeo::eigenframe(ws, map, x));
    }
}
BENCHMARK(bm_eigenframe);

void bm_curvature_bundle(benchmark::State& state) {
    const auto ws = weighted_plane_product();
    const auto map = affine_map(ws);
    const Vec x = vec2(0.7, -0.3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(warpgeo::curvature_bundle(ws, map, x));
    }
}
BENCHMARK(bm_curvature_bundle);

void bm_heinz_divergence_residual(benchmark::State& state) {
    const auto rs = hyperbolic_space(2, 5.0);
    const auto profile = warpgeo::cmc_profile(rs, 0.5, 0.0, {1.0, 2.0, 3.0, 4.0, 5.0});
    const auto lifted = warpgeo::lift_to_graph(rs, profile);
    const Vec x = vec2(2.0, 0.3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(warpgeo::heinz_divergence_residual(lifted.space, lifted.map, x));
    }
}
BENCHMARK(bm_heinz_divergence_residual);

void bm_c_zero(benchmark::State& state) {
    const auto rs = hyperbolic_space(2, 20.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(warpgeo::c_zero(rs));
    }
}
BENCHMARK(bm_c_zero);

void bm_drift_eigenvalue(benchmark::State& state) {
    const auto rs = hyperbolic_space(2, 20.0);
    const int grid = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(warpgeo::drift_eigenvalue(rs, 10.0, grid));
    }
}
BENCHMARK(bm_drift_eigenvalue)->Arg(512)->Arg(2048);

}  // namespace

BENCHMARK_MAIN();
