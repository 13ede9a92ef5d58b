#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "support/spaces.hpp"
#include "warpgeo/calculus.hpp"
#include "warpgeo/errors.hpp"
#include "warpgeo/radial.hpp"

using namespace testsupport;
using warpgeo::Mat;
using warpgeo::Vec;

namespace {

std::vector<double> linspace(double a, double b, int count) {
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i) out[i] = a + (b - a) * i / (count - 1);
    return out;
}

std::string message_of(const std::function<void()>& thrower) {
    try {
        thrower();
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

} // namespace

// === Validation ===

TEST_CASE("validate_radial_space accepts the model spaces") {
    CHECK_NOTHROW(warpgeo::validate_radial_space(euclidean_space(2, 5.0)));
    CHECK_NOTHROW(warpgeo::validate_radial_space(hyperbolic_space(3, 20.0)));
    CHECK_NOTHROW(warpgeo::validate_radial_space(gaussian_space(6.0)));
    CHECK_NOTHROW(warpgeo::validate_radial_space(sphere_weighted_space(0.5, 3.0)));
}

TEST_CASE("validate_radial_space rejects broken inputs") {
    auto rs = hyperbolic_space(2, 5.0);
    rs.m = 1;
    CHECK_THROWS_AS(warpgeo::validate_radial_space(rs), warpgeo::AdmissibilityError);

    rs = hyperbolic_space(2, 5.0);
    rs.tau = [](double t) { return std::cosh(t); }; // does not vanish at 0
    CHECK_THROWS_AS(warpgeo::validate_radial_space(rs), warpgeo::AdmissibilityError);

    rs = hyperbolic_space(2, 5.0);
    rs.tau_prime = [](double t) { return std::sinh(t); }; // zero slope at 0
    CHECK_THROWS_AS(warpgeo::validate_radial_space(rs), warpgeo::AdmissibilityError);

    rs = hyperbolic_space(2, 5.0);
    rs.Psi = [](double t) { return t * t; };
    rs.Psi_prime = [](double t) { return t; }; // off by a factor of two
    CHECK_THROWS_AS(warpgeo::validate_radial_space(rs), warpgeo::AdmissibilityError);

    rs = hyperbolic_space(2, 5.0);
    rs.Psi_prime = nullptr;
    CHECK_THROWS_AS(warpgeo::validate_radial_space(rs), warpgeo::AdmissibilityError);
}

// === Density and profile ===

TEST_CASE("area_density matches closed forms") {
    const auto hyper = hyperbolic_space(3, 20.0);
    const double s = std::sinh(1.5);
    CHECK(warpgeo::area_density(hyper, 1.5) == doctest::Approx(s * s).epsilon(1e-14));

    const auto gauss = gaussian_space(6.0);
    CHECK(warpgeo::area_density(gauss, 2.0) ==
          doctest::Approx(2.0 * std::exp(1.0)).epsilon(1e-14));
}

TEST_CASE("phi_at matches closed forms") {
    // Euclidean: phi = t / m.
    CHECK(warpgeo::phi_at(euclidean_space(2, 5.0), 1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(warpgeo::phi_at(euclidean_space(3, 5.0), 1.0) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    // Hyperbolic plane: phi = tanh(t / 2).
    const auto h2 = hyperbolic_space(2, 20.0);
    CHECK(warpgeo::phi_at(h2, 0.5) == doctest::Approx(0.24491866240370913).epsilon(1e-10));
    CHECK(warpgeo::phi_at(h2, 1.0) == doctest::Approx(0.46211715726000974).epsilon(1e-10));
    CHECK(warpgeo::phi_at(h2, 2.0) == doctest::Approx(0.7615941559557649).epsilon(1e-10));

    // Higher dimensional hyperbolic values, frozen from direct quadrature.
    CHECK(warpgeo::phi_at(hyperbolic_space(3, 20.0), 1.0) ==
          doctest::Approx(0.2944868122665104).epsilon(1e-10));
    CHECK(warpgeo::phi_at(hyperbolic_space(4, 20.0), 1.0) ==
          doctest::Approx(0.21461088420196892).epsilon(1e-10));

    // Gaussian-like weight on the flat plane: phi = 2 (1 - e^{-t^2/4}) / t.
    const auto gauss = gaussian_space(6.0);
    CHECK(warpgeo::phi_at(gauss, 0.5) == doctest::Approx(0.24234774874609694).epsilon(1e-10));
    CHECK(warpgeo::phi_at(gauss, 1.0) == doctest::Approx(0.44239843385719035).epsilon(1e-10));
    CHECK(warpgeo::phi_at(gauss, 2.0) == doctest::Approx(0.6321205588285578).epsilon(1e-10));
}

TEST_CASE("phi_at switches to the series value below the threshold") {
    const auto h2 = hyperbolic_space(2, 20.0);
    CHECK(warpgeo::phi_at(h2, 5e-4) == 5e-4 / 2.0);
    // Continuity across the threshold.
    CHECK(std::abs(warpgeo::phi_at(h2, 1.1e-3) - 1.1e-3 / 2.0) < 1e-7);
}

TEST_CASE("phi_profile agrees with pointwise evaluation and validates its grid") {
    const auto h2 = hyperbolic_space(2, 20.0);
    const std::vector<double> grid = {0.5, 1.0, 2.0, 5.0};
    const auto profile = warpgeo::phi_profile(h2, grid);
    REQUIRE(profile.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(profile[i] == doctest::Approx(warpgeo::phi_at(h2, grid[i])).epsilon(1e-11));
    }

    CHECK_THROWS_AS((void)warpgeo::phi_profile(h2, {}), warpgeo::Error);
    CHECK_THROWS_AS((void)warpgeo::phi_profile(h2, {1.0, 1.0}), warpgeo::Error);
    CHECK_THROWS_AS((void)warpgeo::phi_profile(h2, {1.0, 30.0}), warpgeo::BoundaryError);
    CHECK_THROWS_AS((void)warpgeo::phi_at(h2, -1.0), warpgeo::BoundaryError);
    CHECK_THROWS_AS((void)warpgeo::phi_at(h2, 25.0), warpgeo::BoundaryError);
}

// === The admissibility ceiling ===

TEST_CASE("c_zero recovers m - 1 on truncated hyperbolic space") {
    for (int m : {2, 3, 4}) {
        const auto result = warpgeo::c_zero(hyperbolic_space(m, 20.0));
        CHECK(result.value == doctest::Approx(m - 1.0).epsilon(1e-5));
        CHECK(result.boundary);
        CHECK(result.argmin == 20.0);
    }
}

TEST_CASE("c_zero finds the interior minimizer of the gaussian-like space") {
    // Closed form: the quotient is t e^{t^2/4} / (2(e^{t^2/4} - 1)), minimized
    // at the root of its derivative; both constants below are from a 40-digit
    // evaluation of that expression.
    const auto result = warpgeo::c_zero(gaussian_space(6.0));
    CHECK(result.value == doctest::Approx(1.5669739890260234).epsilon(1e-9));
    CHECK(result.argmin == doctest::Approx(2.2418128455570681).epsilon(1e-6));
    CHECK_FALSE(result.boundary);
}

TEST_CASE("c_zero reports boundary truncation on monotone quotients") {
    const auto flat = warpgeo::c_zero(euclidean_space(2, 5.0));
    CHECK(flat.value == doctest::Approx(0.4).epsilon(1e-9)); // m / t_max
    CHECK(flat.boundary);

    const auto log_cosh = warpgeo::c_zero(log_cosh_hyperbolic_space(5.0));
    CHECK(log_cosh.value == doctest::Approx(2.0001816).epsilon(1e-4));
    CHECK(log_cosh.boundary);
}

// === Constant mean curvature profiles ===

TEST_CASE("height_at matches frozen quadrature oracles") {
    CHECK(warpgeo::height_at(hyperbolic_space(2, 5.0), 0.5, 2.0) ==
          doctest::Approx(0.4532982543634912).epsilon(1e-10));
    CHECK(warpgeo::height_at(hyperbolic_space(3, 5.0), 1.0, 2.0) ==
          doctest::Approx(0.573643237359764).epsilon(1e-10));
}

TEST_CASE("cmc_profile tabulates phi_c and F consistently") {
    const auto rs = hyperbolic_space(2, 5.0);
    const std::vector<double> grid = {0.5, 1.0, 2.0, 3.0};
    const auto profile = warpgeo::cmc_profile(rs, 0.5, 0.25, grid);

    CHECK(profile.c == 0.5);
    CHECK(profile.d == 0.25);
    CHECK(profile.c_zero == doctest::Approx(1.0 / std::tanh(2.5)).epsilon(1e-6));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(profile.phi_c_values[i] ==
              doctest::Approx(0.5 * warpgeo::phi_at(rs, grid[i])).epsilon(1e-11));
        CHECK(profile.F_values[i] ==
              doctest::Approx(warpgeo::height_at(rs, 0.5, grid[i]) + 0.25).epsilon(1e-10));
    }
}

TEST_CASE("cmc_profile names the ceiling when c is inadmissible") {
    const auto msg = message_of([] {
        (void)warpgeo::cmc_profile(hyperbolic_space(2, 5.0), 1.5, 0.0, {1.0, 2.0});
    });
    CHECK(msg.find("ceiling") != std::string::npos);
    CHECK(msg.find("1.5") != std::string::npos);
    CHECK(msg.find("infimum truncated at t_max") != std::string::npos);

    const auto interior_msg = message_of([] {
        (void)warpgeo::cmc_profile(gaussian_space(6.0), 1.6, 0.0, {1.0, 2.0});
    });
    CHECK(interior_msg.find("ceiling") != std::string::npos);
    CHECK(interior_msg.find("truncated") == std::string::npos);

    CHECK_THROWS_AS(
        (void)warpgeo::cmc_profile(hyperbolic_space(2, 5.0), 1.5, 0.0, {1.0, 2.0}),
        warpgeo::AdmissibilityError);
}

// === Slope recovery ===

TEST_CASE("slope_table recovers xi = phi_c and satisfies the slope equation") {
    const auto rs = hyperbolic_space(2, 5.0);
    const auto grid = linspace(0.05, 5.0, 496);
    const auto profile = warpgeo::cmc_profile(rs, 0.5, 0.0, grid);
    const auto table = warpgeo::slope_table(rs, profile);

    double max_xi_error = 0.0;
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        max_xi_error =
            std::max(max_xi_error, std::abs(table.xi[i] - profile.phi_c_values[i]));
    }
    CHECK(max_xi_error < 1e-4);

    CHECK(warpgeo::xi_ode_residual(rs, profile) < 1e-3);
    CHECK(table.residual.front() == 0.0);
    CHECK(table.residual.back() == 0.0);
}

TEST_CASE("slope_table needs at least three grid points") {
    const auto rs = hyperbolic_space(2, 5.0);
    const auto profile = warpgeo::cmc_profile(rs, 0.5, 0.0, {1.0, 2.0});
    CHECK_THROWS_AS((void)warpgeo::slope_table(rs, profile), warpgeo::Error);
}

// === Chart realizations ===

TEST_CASE("radial_chart_space produces the polar and spherical metrics") {
    const auto polar = warpgeo::radial_chart_space(hyperbolic_space(2, 5.0));
    CHECK(polar.metric.chart.dim() == 2);
    const Mat g2 = polar.metric.matrix(vec2(1.5, 0.3));
    CHECK(g2(0, 0) == 1.0);
    CHECK(g2(1, 1) == doctest::Approx(std::sinh(1.5) * std::sinh(1.5)).epsilon(1e-14));

    const auto spherical = warpgeo::radial_chart_space(hyperbolic_space(3, 5.0));
    CHECK(spherical.metric.chart.dim() == 3);
    const Vec p = vec3(1.5, 1.2, 0.3);
    const Mat g3 = spherical.metric.matrix(p);
    const double tau_sq = std::sinh(1.5) * std::sinh(1.5);
    CHECK(g3(1, 1) == doctest::Approx(tau_sq).epsilon(1e-14));
    CHECK(g3(2, 2) ==
          doctest::Approx(tau_sq * std::sin(1.2) * std::sin(1.2)).epsilon(1e-14));

    const auto weighted = warpgeo::radial_chart_space(gaussian_space(6.0));
    CHECK(weighted.weight.eval(vec2(2.0, 0.1)) == doctest::Approx(1.0).epsilon(1e-14));
    const Vec grad = weighted.weight.analytic_gradient(vec2(2.0, 0.1));
    CHECK(grad[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(grad[1] == 0.0);

    auto bad = hyperbolic_space(2, 5.0);
    bad.m = 5;
    CHECK_THROWS_AS((void)warpgeo::radial_chart_space(bad), warpgeo::Error);
}

TEST_CASE("lift_to_graph carries the analytic height and slope") {
    const auto rs = hyperbolic_space(2, 5.0);
    const auto profile = warpgeo::cmc_profile(rs, 0.5, 0.25, {1.0, 2.0, 3.0});
    const auto lifted = warpgeo::lift_to_graph(rs, profile);

    CHECK(lifted.space.base_dim() == 2);
    CHECK(lifted.space.fiber_dim() == 1);

    const Vec x = vec2(2.0, 0.3);
    CHECK(lifted.map.eval(x)[0] ==
          doctest::Approx(warpgeo::height_at(rs, 0.5, 2.0) + 0.25).epsilon(1e-12));

    // The analytic jacobian agrees with differences of the height.
    const double h = 1e-4;
    const double fd = (lifted.map.eval(vec2(2.0 + h, 0.3))[0] -
                       lifted.map.eval(vec2(2.0 - h, 0.3))[0]) /
                      (2.0 * h);
    const Mat j = lifted.map.jacobian(x);
    CHECK(j.rows() == 1);
    CHECK(j.cols() == 2);
    CHECK(j(0, 0) == doctest::Approx(fd).epsilon(1e-7));
    CHECK(j(0, 1) == 0.0);
}
