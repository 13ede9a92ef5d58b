#include "warpgeo/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <numbers>
#include <sstream>
#include <type_traits>

#include "json.hpp"

#include "warpgeo/errors.hpp"
#include "warpgeo/spectral.hpp"

namespace warpgeo {

namespace {

using ordered_json = nlohmann::ordered_json;
using nlohmann::json;

// === Small utilities ===

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char b : bytes) {
        hash ^= b;
        hash *= 1099511628211ull;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[40];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string fmt_csv(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

template <typename Fn>
auto ordered_map(bool serial, std::size_t count, Fn&& fn) {
    using result_t = std::invoke_result_t<Fn&, std::size_t>;
    std::vector<result_t> out;
    out.reserve(count);
    if (serial) {
        for (std::size_t i = 0; i < count; ++i) out.push_back(fn(i));
        return out;
    }
    std::vector<std::future<result_t>> futures;
    futures.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        futures.push_back(std::async(std::launch::async, fn, i));
    for (auto& f : futures) out.push_back(f.get());
    return out;
}

// === Record constructors ===

CheckRecord residual_check(std::string name, std::string property, double value,
                           double bound) {
    CheckRecord rec;
    rec.name = std::move(name);
    rec.property = std::move(property);
    rec.value = value;
    rec.bound = bound;
    rec.margin = bound - value;
    rec.status = value <= bound ? CheckStatus::Pass : CheckStatus::Fail;
    return rec;
}

CheckRecord target_check(std::string name, std::string property, double value,
                         double target, double tol) {
    CheckRecord rec;
    rec.name = std::move(name);
    rec.property = std::move(property);
    rec.value = value;
    rec.bound = target;
    rec.margin = tol - std::abs(value - target);
    rec.status = std::abs(value - target) <= tol ? CheckStatus::Pass : CheckStatus::Fail;
    return rec;
}

CheckRecord floor_check(std::string name, std::string property, double value,
                        double bound) {
    CheckRecord rec;
    rec.name = std::move(name);
    rec.property = std::move(property);
    rec.value = value;
    rec.bound = bound;
    rec.margin = value - bound;
    rec.status = value >= bound ? CheckStatus::Pass : CheckStatus::Fail;
    return rec;
}

constexpr const char* kPropFrame =
    "simultaneous diagonalization frames satisfy orthogonality and transport relations";
constexpr const char* kPropPairing =
    "weight pairings of the corrected tension agree through the graph adjoint";
constexpr const char* kPropAngle =
    "alignment angle is the reciprocal square root of the induced determinant ratio";
constexpr const char* kPropMinimal =
    "vanishing mean curvature coincides with vanishing corrected tension";
constexpr const char* kPropDivergence =
    "weighted divergence of the pulled tension balances the squared mean curvature";
constexpr const char* kPropCalibration =
    "weighted divergence of the calibrated base curvature balances the angle weighted "
    "squared mean curvature";
constexpr const char* kPropCrosscheck =
    "normal bundle morphism transport reproduces the angle scaled base curvature";
constexpr const char* kPropCurvature =
    "lifted profile has constant mean curvature of the prescribed size";
constexpr const char* kPropAdmissible =
    "mean curvature parameter stays below the isoperimetric ceiling";
constexpr const char* kPropSlope =
    "tabulated height solves the first order slope equation";
constexpr const char* kPropQuotient =
    "ball quotient agrees with the reciprocal profile value";
constexpr const char* kPropSolver =
    "eigenvalue matches the Rayleigh quotient of its eigenvector";
constexpr const char* kPropCheeger =
    "first weighted eigenvalue dominates a quarter of the squared ceiling";
constexpr const char* kPropHeinz =
    "ball quotient dominates the mean curvature parameter with the ceiling slack";
constexpr const char* kPropComparison =
    "weighted ball eigenvalue is bounded by the unweighted space form ball";

// === Config parsing ===

[[noreturn]] void config_fail(const std::string& origin, const std::string& path,
                              const std::string& what) {
    throw ConfigError(origin + ": field '" + path + "' " + what);
}

double as_number(const json& j, const std::string& origin, const std::string& path) {
    if (!j.is_number()) config_fail(origin, path, "must be a number");
    return j.get<double>();
}

int as_integer(const json& j, const std::string& origin, const std::string& path) {
    if (!j.is_number_integer()) config_fail(origin, path, "must be an integer");
    return j.get<int>();
}

std::string as_string(const json& j, const std::string& origin, const std::string& path) {
    if (!j.is_string()) config_fail(origin, path, "must be a string");
    return j.get<std::string>();
}

std::vector<double> as_numbers(const json& j, const std::string& origin,
                               const std::string& path) {
    if (!j.is_array()) config_fail(origin, path, "must be an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& item : j) {
        if (!item.is_number()) config_fail(origin, path, "must be an array of numbers");
        out.push_back(item.get<double>());
    }
    return out;
}

const json& require_field(const json& j, const char* key, const std::string& origin,
                          const std::string& path) {
    const auto it = j.find(key);
    if (it == j.end()) config_fail(origin, path, "is required");
    return *it;
}

void parse_space(const json& space, const std::string& origin, ScenarioConfig& cfg) {
    cfg.m = as_integer(require_field(space, "m", origin, "space.m"), origin, "space.m");
    if (cfg.m != 2 && cfg.m != 3)
        config_fail(origin, "space.m", "must be 2 or 3 (the chart-backed dimensions)");
    cfg.t_max = as_number(require_field(space, "t_max", origin, "space.t_max"), origin,
                          "space.t_max");
    if (!(cfg.t_max > 0.0)) config_fail(origin, "space.t_max", "must be positive");

    const json& tau = require_field(space, "tau", origin, "space.tau");
    cfg.tau_name =
        as_string(require_field(tau, "name", origin, "space.tau.name"), origin,
                  "space.tau.name");
    if (cfg.tau_name != "euclidean" && cfg.tau_name != "hyperbolic" &&
        cfg.tau_name != "sphere" && cfg.tau_name != "custom-series") {
        config_fail(origin, "space.tau.name",
                    "must be one of euclidean, hyperbolic, sphere, custom-series");
    }
    if (const auto it = tau.find("coefficients"); it != tau.end())
        cfg.tau_coefficients = as_numbers(*it, origin, "space.tau.coefficients");
    if (cfg.tau_name == "custom-series" && cfg.tau_coefficients.empty())
        config_fail(origin, "space.tau.coefficients", "is required for custom-series");

    if (const auto it = space.find("Psi"); it != space.end()) {
        cfg.psi_name = as_string(require_field(*it, "name", origin, "space.Psi.name"),
                                 origin, "space.Psi.name");
        if (cfg.psi_name != "zero" && cfg.psi_name != "quadratic" &&
            cfg.psi_name != "cosine" && cfg.psi_name != "log-cosh" &&
            cfg.psi_name != "custom-series") {
            config_fail(origin, "space.Psi.name",
                        "must be one of zero, quadratic, cosine, log-cosh, custom-series");
        }
        if (const auto c = it->find("coefficient"); c != it->end())
            cfg.psi_coefficient = as_number(*c, origin, "space.Psi.coefficient");
        if (const auto c = it->find("coefficients"); c != it->end())
            cfg.psi_coefficients = as_numbers(*c, origin, "space.Psi.coefficients");
        if (cfg.psi_name == "custom-series" && cfg.psi_coefficients.empty())
            config_fail(origin, "space.Psi.coefficients", "is required for custom-series");
    }
}

void parse_graph(const json& graph, const std::string& origin, ScenarioConfig& cfg) {
    cfg.graph_kind = as_string(require_field(graph, "kind", origin, "graph.kind"),
                               origin, "graph.kind");
    if (cfg.graph_kind == "cmc-radial") {
        cfg.c = as_number(require_field(graph, "c", origin, "graph.c"), origin, "graph.c");
        if (const auto it = graph.find("d"); it != graph.end())
            cfg.d = as_number(*it, origin, "graph.d");
        if (cfg.fiber_dim != 1 || cfg.fiber_metric != "flat")
            config_fail(origin, "fiber", "must be the flat line for cmc-radial graphs");
    } else if (cfg.graph_kind == "affine") {
        const json& matrix = require_field(graph, "matrix", origin, "graph.matrix");
        if (!matrix.is_array() || matrix.empty())
            config_fail(origin, "graph.matrix", "must be a nonempty array of rows");
        for (const auto& row : matrix)
            cfg.affine_matrix.push_back(as_numbers(row, origin, "graph.matrix"));
        if (static_cast<int>(cfg.affine_matrix.size()) != cfg.fiber_dim)
            config_fail(origin, "graph.matrix", "must have fiber.dim rows");
        for (const auto& row : cfg.affine_matrix) {
            if (static_cast<int>(row.size()) != cfg.m)
                config_fail(origin, "graph.matrix", "rows must have space.m entries");
        }
        if (const auto it = graph.find("offset"); it != graph.end())
            cfg.offset = as_numbers(*it, origin, "graph.offset");
    } else if (cfg.graph_kind == "constant") {
        if (const auto it = graph.find("offset"); it != graph.end())
            cfg.offset = as_numbers(*it, origin, "graph.offset");
    } else {
        config_fail(origin, "graph.kind",
                    "must be one of cmc-radial, affine, constant");
    }
    if (!cfg.offset.empty() && static_cast<int>(cfg.offset.size()) != cfg.fiber_dim)
        config_fail(origin, "graph.offset", "must have fiber.dim entries");
}

void parse_probes(const json& probes, const std::string& origin, ScenarioConfig& cfg) {
    cfg.radii = as_numbers(require_field(probes, "radii", origin, "probes.radii"),
                           origin, "probes.radii");
    if (cfg.radii.empty()) config_fail(origin, "probes.radii", "must be nonempty");
    double prev = 0.0;
    for (double r : cfg.radii) {
        if (!(r > prev))
            config_fail(origin, "probes.radii",
                        "must be strictly increasing and positive");
        prev = r;
    }
    if (const auto it = probes.find("grid_size"); it != probes.end()) {
        cfg.grid_size = as_integer(*it, origin, "probes.grid_size");
        if (cfg.grid_size < 64) config_fail(origin, "probes.grid_size", "must be >= 64");
    }
    if (const auto it = probes.find("fd"); it != probes.end()) {
        const json& fd = *it;
        if (const auto f = fd.find("first_order_scale"); f != fd.end())
            cfg.fd.first_order_scale = as_number(*f, origin, "probes.fd.first_order_scale");
        if (const auto f = fd.find("second_order_scale"); f != fd.end())
            cfg.fd.second_order_scale =
                as_number(*f, origin, "probes.fd.second_order_scale");
        if (const auto f = fd.find("derived_field_scale"); f != fd.end())
            cfg.fd.derived_field_scale =
                as_number(*f, origin, "probes.fd.derived_field_scale");
        if (!(cfg.fd.first_order_scale > 0.0) || !(cfg.fd.second_order_scale > 0.0) ||
            !(cfg.fd.derived_field_scale > 0.0))
            config_fail(origin, "probes.fd", "step scales must be positive");
    }
}

void parse_outputs(const json& outputs, const std::string& origin, ScenarioConfig& cfg) {
    if (const auto it = outputs.find("directory"); it != outputs.end()) {
        cfg.out_directory = as_string(*it, origin, "outputs.directory");
        cfg.out_directory_set = true;
    }
    if (const auto it = outputs.find("formats"); it != outputs.end()) {
        if (!it->is_array()) config_fail(origin, "outputs.formats", "must be an array");
        cfg.write_json = false;
        cfg.write_csv = false;
        for (const auto& f : *it) {
            const std::string name = as_string(f, origin, "outputs.formats");
            if (name == "json") {
                cfg.write_json = true;
            } else if (name == "csv") {
                cfg.write_csv = true;
            } else {
                config_fail(origin, "outputs.formats", "entries must be json or csv");
            }
        }
    }
}

ordered_json canonical_config(const ScenarioConfig& cfg) {
    ordered_json doc;
    doc["name"] = cfg.name;

    ordered_json tau;
    tau["name"] = cfg.tau_name;
    if (!cfg.tau_coefficients.empty()) tau["coefficients"] = cfg.tau_coefficients;
    ordered_json psi;
    psi["name"] = cfg.psi_name;
    if (cfg.psi_name == "quadratic" || cfg.psi_name == "cosine")
        psi["coefficient"] = cfg.psi_coefficient;
    if (!cfg.psi_coefficients.empty()) psi["coefficients"] = cfg.psi_coefficients;
    ordered_json space;
    space["m"] = cfg.m;
    space["t_max"] = cfg.t_max;
    space["tau"] = tau;
    space["Psi"] = psi;
    doc["space"] = space;

    ordered_json fiber;
    fiber["dim"] = cfg.fiber_dim;
    fiber["metric"] = cfg.fiber_metric;
    doc["fiber"] = fiber;

    ordered_json graph;
    graph["kind"] = cfg.graph_kind;
    if (cfg.graph_kind == "cmc-radial") {
        graph["c"] = cfg.c;
        graph["d"] = cfg.d;
    }
    if (!cfg.affine_matrix.empty()) graph["matrix"] = cfg.affine_matrix;
    if (!cfg.offset.empty()) graph["offset"] = cfg.offset;
    doc["graph"] = graph;

    ordered_json probes;
    probes["radii"] = cfg.radii;
    probes["grid_size"] = cfg.grid_size;
    ordered_json fd;
    fd["first_order_scale"] = cfg.fd.first_order_scale;
    fd["second_order_scale"] = cfg.fd.second_order_scale;
    fd["derived_field_scale"] = cfg.fd.derived_field_scale;
    probes["fd"] = fd;
    doc["probes"] = probes;

    if (cfg.has_comparison) {
        ordered_json comparison;
        comparison["alpha"] = cfg.comparison_alpha;
        comparison["delta"] = cfg.comparison_delta;
        doc["comparison"] = comparison;
    }

    ordered_json outputs;
    outputs["directory"] = cfg.out_directory;
    ordered_json formats = ordered_json::array();
    if (cfg.write_json) formats.push_back("json");
    if (cfg.write_csv) formats.push_back("csv");
    outputs["formats"] = formats;
    doc["outputs"] = outputs;
    return doc;
}

// === Scenario assembly ===

Vec probe_point(int m, double r) {
    Vec p = Vec::Zero(m);
    p[0] = r;
    p[1] = m == 2 ? 0.3 : 1.2;
    if (m >= 3) p[2] = 0.4;
    return p;
}

std::pair<Chart, MetricField> make_fiber(const ScenarioConfig& cfg) {
    const int n = cfg.fiber_dim;
    if (cfg.fiber_metric == "flat") {
        Chart chart =
            Chart::box("flat fiber", Vec::Constant(n, -10.0), Vec::Constant(n, 10.0));
        MetricField metric{chart, [n](const Vec&) { return Mat(Mat::Identity(n, n)); }};
        return {chart, metric};
    }
    if (cfg.fiber_metric == "round-sphere") {
        if (n != 2)
            throw ConfigError("round-sphere fiber is chart-backed for dim 2 only");
        constexpr double kPi = std::numbers::pi;
        Vec lower(2);
        Vec upper(2);
        lower << 0.3, -kPi;
        upper << kPi - 0.3, kPi;
        Chart chart = Chart::box("round fiber", lower, upper);
        MetricField metric{chart, [](const Vec& q) {
                               Mat h = Mat::Identity(2, 2);
                               const double s = std::sin(q[0]);
                               h(1, 1) = s * s;
                               return h;
                           }};
        return {chart, metric};
    }
    throw ConfigError("fiber.metric must be flat or round-sphere");
}

struct BuiltScenario {
    WarpedSpace space;
    GraphMap map;
    bool has_profile = false;
    CmcProfile profile;
    CZeroResult ceiling;
};

std::vector<double> dense_grid(double t_max, int intervals) {
    std::vector<double> grid(intervals + 1);
    for (int i = 0; i <= intervals; ++i) grid[i] = t_max * i / intervals;
    return grid;
}

BuiltScenario build_scenario(const ScenarioConfig& cfg, const RadialSpace& rs) {
    BuiltScenario built;
    if (cfg.graph_kind == "cmc-radial") {
        built.ceiling = c_zero(rs);
        built.profile = cmc_profile(rs, cfg.c, cfg.d, dense_grid(rs.t_max, 400));
        built.has_profile = true;
        LiftedGraph lifted = lift_to_graph(rs, built.profile);
        built.space = lifted.space;
        built.map = lifted.map;
        return built;
    }

    const RadialChartSpace base = radial_chart_space(rs);
    auto [fiber_chart, fiber_metric] = make_fiber(cfg);
    built.space = WarpedSpace{base.metric, fiber_metric, base.weight};

    Vec offset;
    if (cfg.offset.empty()) {
        offset = 0.5 * (fiber_chart.lower + fiber_chart.upper);
        if (!offset.allFinite()) offset = Vec::Zero(cfg.fiber_dim);
    } else {
        offset = Eigen::Map<const Vec>(cfg.offset.data(),
                                       static_cast<int>(cfg.offset.size()));
    }

    built.map.source_chart = base.metric.chart;
    built.map.target_chart = fiber_chart;
    if (cfg.graph_kind == "affine") {
        Mat a(cfg.fiber_dim, cfg.m);
        for (int i = 0; i < cfg.fiber_dim; ++i)
            for (int k = 0; k < cfg.m; ++k) a(i, k) = cfg.affine_matrix[i][k];
        built.map.eval = [a, offset](const Vec& x) { return Vec(offset + a * x); };
        built.map.jacobian = [a](const Vec&) { return a; };
    } else {
        const int n = cfg.fiber_dim;
        const int m = cfg.m;
        built.map.eval = [offset](const Vec&) { return offset; };
        built.map.jacobian = [n, m](const Vec&) { return Mat(Mat::Zero(n, m)); };
    }
    return built;
}

void validate_probes(const ScenarioConfig& cfg, const BuiltScenario& built) {
    std::vector<std::string> violations;
    for (double r : cfg.radii) {
        const Vec p = probe_point(cfg.m, r);
        const double pad = 5e-3 * std::max(1.0, std::abs(r));
        if (!built.space.base_metric.chart.contains(p, pad)) {
            violations.push_back("probe t = " + fmt_short(r) +
                                 " violates the base chart margin " + fmt_short(pad));
            continue;
        }
        const Vec image = built.map.eval(p);
        if (!built.map.target_chart.contains(image, 0.02)) {
            violations.push_back("probe t = " + fmt_short(r) +
                                 " maps outside the fiber chart margin");
        }
    }
    if (!violations.empty()) {
        std::string joined = "probe validation failed:";
        for (const std::string& v : violations) joined += "\n  " + v;
        throw ConfigError(joined);
    }
}

double eigenframe_residual(const GraphPointFrame& frame) {
    const Mat& x = frame.base_frame;
    const Mat& xs = frame.graph_frame;
    const Mat& u = frame.fiber_frame;
    const Mat& j = frame.jacobian;
    const int m = frame.base_dims();
    const int n = frame.fiber_dims();
    const Mat eye_m = Mat::Identity(m, m);

    double r = (x.transpose() * frame.g * x - eye_m).cwiseAbs().maxCoeff();
    const Mat pulled = j.transpose() * frame.htilde * j;
    const Mat lam = frame.singular_values_sq.asDiagonal();
    r = std::max(r, (pulled * x - frame.g * x * lam).cwiseAbs().maxCoeff());
    r = std::max(
        r, (u.transpose() * frame.htilde * u - Mat::Identity(n, n)).cwiseAbs().maxCoeff());

    const Mat jx = j * x;
    for (int i = 0; i < m; ++i) {
        Vec target = Vec::Zero(n);
        if (i < frame.rank && i < n)
            target = std::sqrt(frame.singular_values_sq[i]) * u.col(i);
        r = std::max(r, (jx.col(i) - target).cwiseAbs().maxCoeff());
    }

    const Mat gstar = frame.g + pulled;
    r = std::max(r, (xs.transpose() * gstar * xs - eye_m).cwiseAbs().maxCoeff());

    for (int i = 0; i < n; ++i) {
        Vec target = Vec::Zero(m);
        if (i < frame.rank) {
            const double lam_sq = frame.singular_values_sq[i];
            target = std::sqrt(lam_sq) / (1.0 + lam_sq) * x.col(i);
        }
        r = std::max(r, (df_adjoint(frame, u.col(i)) - target).cwiseAbs().maxCoeff());
    }

    const Mat tangent = frame.ambient_tangent_frame();
    const Mat ambient = frame.ambient_metric();
    r = std::max(r,
                 (tangent.transpose() * ambient * tangent - eye_m).cwiseAbs().maxCoeff());
    return r;
}

std::vector<CheckRecord> probe_checks(const BuiltScenario& built,
                                      const ScenarioConfig& cfg, double r) {
    const Vec p = probe_point(cfg.m, r);
    const std::string tag = "[t=" + fmt_short(r) + "]";
    std::vector<CheckRecord> records;

    const GraphPointFrame frame = eigenframe(built.space, built.map, p, cfg.fd);
    const CurvatureBundle bundle = curvature_bundle(built.space, built.map, p, cfg.fd);

    records.push_back(residual_check("eigenframe" + tag, kPropFrame,
                                     eigenframe_residual(frame), cfg.tol.frame));

    const WeightPairingCheck pairing = q_psi_residuals(built.space, built.map, p, cfg.fd);
    records.push_back(residual_check(
        "weight-pairing" + tag, kPropPairing,
        std::max(pairing.pulled_residual, pairing.fiber_residual), cfg.tol.pairing));

    const double det_ratio =
        spd_determinant(graph_metric(built.space, built.map, p, cfg.fd), "induced metric") /
        spd_determinant(frame.g, "base metric");
    records.push_back(target_check("angle-determinant" + tag, kPropAngle,
                                   bundle.cos_angle * std::sqrt(det_ratio), 1.0,
                                   cfg.tol.angle_determinant));

    const double tension_norm =
        std::sqrt(bundle.total_tension.dot(frame.htilde * bundle.total_tension));
    const bool h_zero = bundle.mean_curvature_norm <= cfg.tol.minimal_h;
    const bool tension_zero = tension_norm <= cfg.tol.minimal_tension;
    CheckRecord minimal;
    minimal.name = "minimality" + tag;
    minimal.property = kPropMinimal;
    minimal.value = bundle.mean_curvature_norm;
    minimal.bound = tension_norm;
    minimal.margin = h_zero == tension_zero ? 0.0 : -1.0;
    minimal.status = h_zero == tension_zero ? CheckStatus::Pass : CheckStatus::Fail;
    records.push_back(minimal);

    // The divergence and calibration identities assume parallel mean
    // curvature, which holds for the constructed profiles (hypersurface
    // graphs of constant |H|) and for totally geodesic graphs.
    if (cfg.graph_kind == "cmc-radial" || cfg.graph_kind == "constant") {
        const double tol = cfg.graph_kind == "constant" ? cfg.tol.geodesic_identity
                                                        : cfg.tol.identity;
        records.push_back(residual_check(
            "divergence-identity" + tag, kPropDivergence,
            heinz_divergence_residual(built.space, built.map, p, cfg.fd), tol));
        const CalibrationCheck calibration =
            calibration_divergence_residual(built.space, built.map, p, cfg.fd);
        records.push_back(residual_check("calibration-identity" + tag, kPropCalibration,
                                         calibration.divergence_residual, tol));
        records.push_back(residual_check("calibration-crosscheck" + tag, kPropCrosscheck,
                                         calibration.morphism_crosscheck,
                                         cfg.tol.crosscheck));
    }
    if (cfg.graph_kind == "cmc-radial") {
        records.push_back(target_check("curvature-norm" + tag, kPropCurvature,
                                       bundle.mean_curvature_norm,
                                       std::abs(cfg.c) / cfg.m, cfg.tol.curvature_norm));
    }
    return records;
}

struct ScanRow {
    double r = 0.0;
    double volume = 0.0;
    double area = 0.0;
    double quotient = 0.0;
    double lambda1 = 0.0;
    double cheeger_margin = 0.0;
    double heinz_margin = 0.0;
    double rayleigh = 0.0;
    double phi = 0.0;
};

void write_profile_csv(const std::string& path, const RadialSpace& rs,
                       const CmcProfile& profile) {
    const SlopeTable table = slope_table(rs, profile);
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << "t,phi,phi_c,F,xi,residual\n";
    for (std::size_t i = 0; i < profile.grid.size(); ++i) {
        out << fmt_csv(profile.grid[i]) << ',' << fmt_csv(profile.phi_values[i]) << ','
            << fmt_csv(profile.phi_c_values[i]) << ',' << fmt_csv(profile.F_values[i])
            << ',' << fmt_csv(table.xi[i]) << ',' << fmt_csv(table.residual[i]) << '\n';
    }
}

void write_scan_csv(const std::string& path, const std::vector<ScanRow>& rows) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << "r,V_psi,A_psi,quotient,lambda1,cheeger_margin,heinz_margin\n";
    for (const ScanRow& row : rows) {
        out << fmt_csv(row.r) << ',' << fmt_csv(row.volume) << ',' << fmt_csv(row.area)
            << ',' << fmt_csv(row.quotient) << ',' << fmt_csv(row.lambda1) << ','
            << fmt_csv(row.cheeger_margin) << ',' << fmt_csv(row.heinz_margin) << '\n';
    }
}

} // namespace

// === Public API ===

ScenarioConfig parse_scenario_text(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError(origin + ": top level must be an object");

    ScenarioConfig cfg;
    if (const auto it = j.find("name"); it != j.end())
        cfg.name = as_string(*it, origin, "name");

    parse_space(require_field(j, "space", origin, "space"), origin, cfg);

    if (const auto it = j.find("fiber"); it != j.end()) {
        cfg.fiber_dim =
            as_integer(require_field(*it, "dim", origin, "fiber.dim"), origin, "fiber.dim");
        if (cfg.fiber_dim < 1) config_fail(origin, "fiber.dim", "must be >= 1");
        if (const auto metric = it->find("metric"); metric != it->end())
            cfg.fiber_metric = as_string(*metric, origin, "fiber.metric");
        if (cfg.fiber_metric != "flat" && cfg.fiber_metric != "round-sphere")
            config_fail(origin, "fiber.metric", "must be flat or round-sphere");
    }

    parse_graph(require_field(j, "graph", origin, "graph"), origin, cfg);
    parse_probes(require_field(j, "probes", origin, "probes"), origin, cfg);

    if (const auto it = j.find("comparison"); it != j.end()) {
        cfg.has_comparison = true;
        cfg.comparison_alpha = as_number(
            require_field(*it, "alpha", origin, "comparison.alpha"), origin,
            "comparison.alpha");
        cfg.comparison_delta = as_number(
            require_field(*it, "delta", origin, "comparison.delta"), origin,
            "comparison.delta");
        if (!(cfg.comparison_alpha >= cfg.comparison_delta) ||
            !(cfg.comparison_delta >= 0.0))
            config_fail(origin, "comparison", "needs alpha >= delta >= 0");
    }

    if (const auto it = j.find("outputs"); it != j.end())
        parse_outputs(*it, origin, cfg);
    return cfg;
}

ScenarioConfig parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario_text(buffer.str(), path);
}

ScenarioConfig builtin_scenario(const std::string& name) {
    ScenarioConfig cfg;
    if (name == "cmc-hyperbolic") {
        cfg.name = "cmc-hyperbolic";
        cfg.tau_name = "hyperbolic";
        cfg.psi_name = "zero";
        cfg.m = 2;
        cfg.t_max = 5.0;
        cfg.graph_kind = "cmc-radial";
        cfg.c = 0.5;
        cfg.d = 0.0;
        cfg.radii = {1.0, 2.0, 3.0, 4.0};
        cfg.grid_size = 2048;
    } else if (name == "affine-euclidean") {
        cfg.name = "affine-euclidean";
        cfg.tau_name = "euclidean";
        cfg.psi_name = "quadratic";
        cfg.psi_coefficient = 0.25;
        cfg.m = 2;
        cfg.t_max = 5.0;
        cfg.fiber_dim = 2;
        cfg.fiber_metric = "flat";
        cfg.graph_kind = "affine";
        cfg.affine_matrix = {{0.3, -0.2}, {0.1, 0.4}};
        cfg.offset = {0.2, -0.1};
        cfg.radii = {1.0, 2.0, 3.5};
    } else if (name == "constant-flat") {
        cfg.name = "constant-flat";
        cfg.tau_name = "euclidean";
        cfg.psi_name = "zero";
        cfg.m = 2;
        cfg.t_max = 5.0;
        cfg.fiber_dim = 2;
        cfg.fiber_metric = "flat";
        cfg.graph_kind = "constant";
        cfg.offset = {0.5, 0.5};
        cfg.radii = {1.0, 2.5, 4.0};
        cfg.has_comparison = true;
        cfg.comparison_alpha = 0.0;
        cfg.comparison_delta = 0.0;
    } else {
        throw ConfigError("unknown builtin scenario '" + name +
                          "'; known: cmc-hyperbolic, affine-euclidean, constant-flat");
    }
    return cfg;
}

RadialSpace make_radial_space(const ScenarioConfig& config) {
    RadialSpace rs;
    rs.m = config.m;
    rs.t_max = config.t_max;

    if (config.tau_name == "euclidean") {
        rs.tau = [](double t) { return t; };
        rs.tau_prime = [](double) { return 1.0; };
    } else if (config.tau_name == "hyperbolic") {
        rs.tau = [](double t) { return std::sinh(t); };
        rs.tau_prime = [](double t) { return std::cosh(t); };
    } else if (config.tau_name == "sphere") {
        if (config.t_max >= std::numbers::pi)
            throw ConfigError("sphere profile needs t_max < pi");
        rs.tau = [](double t) { return std::sin(t); };
        rs.tau_prime = [](double t) { return std::cos(t); };
    } else if (config.tau_name == "custom-series") {
        const std::vector<double> a = config.tau_coefficients;
        rs.tau = [a](double t) {
            double value = t;
            double power = t * t;
            for (double coef : a) {
                value += coef * power;
                power *= t;
            }
            return value;
        };
        rs.tau_prime = [a](double t) {
            double value = 1.0;
            double power = t;
            int k = 2;
            for (double coef : a) {
                value += coef * k * power;
                power *= t;
                ++k;
            }
            return value;
        };
    } else {
        throw ConfigError("unknown profile builtin '" + config.tau_name + "'");
    }

    if (config.psi_name == "zero") {
        rs.Psi = [](double) { return 0.0; };
        rs.Psi_prime = [](double) { return 0.0; };
    } else if (config.psi_name == "quadratic") {
        const double a = config.psi_coefficient;
        rs.Psi = [a](double t) { return a * t * t; };
        rs.Psi_prime = [a](double t) { return 2.0 * a * t; };
    } else if (config.psi_name == "cosine") {
        const double a = config.psi_coefficient;
        rs.Psi = [a](double t) { return a * (1.0 + std::cos(t)); };
        rs.Psi_prime = [a](double t) { return -a * std::sin(t); };
    } else if (config.psi_name == "log-cosh") {
        rs.Psi = [](double t) { return std::log(std::cosh(t)); };
        rs.Psi_prime = [](double t) { return std::tanh(t); };
    } else if (config.psi_name == "custom-series") {
        const std::vector<double> b = config.psi_coefficients;
        rs.Psi = [b](double t) {
            double value = 0.0;
            double power = t * t;
            for (double coef : b) {
                value += coef * power;
                power *= t;
            }
            return value;
        };
        rs.Psi_prime = [b](double t) {
            double value = 0.0;
            double power = t;
            int k = 2;
            for (double coef : b) {
                value += coef * k * power;
                power *= t;
                ++k;
            }
            return value;
        };
    } else {
        throw ConfigError("unknown weight builtin '" + config.psi_name + "'");
    }
    return rs;
}

const char* to_string(CheckStatus status) {
    switch (status) {
        case CheckStatus::Pass: return "PASS";
        case CheckStatus::Fail: return "FAIL";
        case CheckStatus::Flagged: return "FLAGGED";
    }
    return "UNKNOWN";
}

std::size_t ReportBundle::failures() const {
    std::size_t count = 0;
    for (const CheckRecord& rec : records) {
        if (rec.status == CheckStatus::Fail) ++count;
    }
    return count;
}

ReportBundle run_scenario(const ScenarioConfig& cfg) {
    ReportBundle bundle;
    bundle.scenario = cfg.name;
    bundle.config_hash = fnv1a_hex(canonical_config(cfg).dump());
    bundle.timestamp = utc_timestamp();

    const RadialSpace rs = make_radial_space(cfg);
    validate_radial_space(rs);
    const BuiltScenario built = build_scenario(cfg, rs);
    validate_probes(cfg, built);

    if (built.has_profile) {
        CheckRecord admissibility;
        admissibility.name = "admissibility";
        admissibility.property = kPropAdmissible;
        admissibility.value = std::abs(cfg.c);
        admissibility.bound = built.ceiling.value;
        admissibility.margin = built.ceiling.value - std::abs(cfg.c);
        admissibility.status =
            built.ceiling.boundary ? CheckStatus::Flagged : CheckStatus::Pass;
        bundle.records.push_back(admissibility);

        bundle.records.push_back(residual_check("slope-equation", kPropSlope,
                                                xi_ode_residual(rs, built.profile),
                                                cfg.tol.slope_equation));
    }

    const auto probe_results =
        ordered_map(cfg.serial, cfg.radii.size(), [&](std::size_t i) {
            return probe_checks(built, cfg, cfg.radii[i]);
        });
    for (const auto& records : probe_results)
        bundle.records.insert(bundle.records.end(), records.begin(), records.end());

    std::vector<ScanRow> rows;
    if (built.has_profile) {
        const CheegerScan scan = cheeger_scan(rs, cfg.radii);
        const auto solved = ordered_map(cfg.serial, cfg.radii.size(), [&](std::size_t i) {
            ScanRow row;
            row.r = cfg.radii[i];
            const WeightedBallMeasures measures = weighted_ball_measures(rs, row.r);
            row.volume = measures.volume;
            row.area = measures.boundary_area;
            row.quotient = scan.quotients[i];
            const SpectralResult spectral = drift_eigenvalue(rs, row.r, cfg.grid_size);
            row.lambda1 = spectral.lambda1;
            row.rayleigh = spectral.rayleigh_quotient;
            row.cheeger_margin =
                spectral.lambda1 - 0.25 * built.ceiling.value * built.ceiling.value;
            row.heinz_margin = row.quotient - std::abs(cfg.c);
            row.phi = phi_at(rs, row.r);
            return row;
        });
        rows = solved;

        for (const ScanRow& row : rows) {
            const std::string tag = "[r=" + fmt_short(row.r) + "]";
            bundle.records.push_back(residual_check(
                "quotient-consistency" + tag, kPropQuotient,
                std::abs(row.quotient * row.phi - 1.0), cfg.tol.quotient_consistency));
            bundle.records.push_back(residual_check(
                "solver-consistency" + tag, kPropSolver,
                std::abs(row.rayleigh - row.lambda1) / std::max(1.0, row.lambda1),
                cfg.tol.solver_consistency));
            bundle.records.push_back(floor_check("cheeger-margin" + tag, kPropCheeger,
                                                 row.cheeger_margin,
                                                 -cfg.tol.spectral_slack));
            bundle.records.push_back(
                floor_check("heinz-margin" + tag, kPropHeinz, row.heinz_margin,
                            built.ceiling.value - std::abs(cfg.c) -
                                cfg.tol.spectral_slack));
        }
    }

    if (cfg.has_comparison) {
        const auto compared = ordered_map(cfg.serial, cfg.radii.size(), [&](std::size_t i) {
            return setti_margin(rs, cfg.radii[i], cfg.comparison_alpha,
                                cfg.comparison_delta, cfg.grid_size);
        });
        for (std::size_t i = 0; i < compared.size(); ++i) {
            const SettiResult& result = compared[i];
            const std::string tag = "[r=" + fmt_short(cfg.radii[i]) + "]";
            CheckRecord rec = floor_check("eigenvalue-comparison" + tag, kPropComparison,
                                          result.margin, -cfg.tol.spectral_slack);
            if (!result.hypothesis_ok) {
                rec.status = CheckStatus::Fail;
                rec.property =
                    std::string(kPropComparison) + "; " + result.hypothesis_note;
            }
            bundle.records.push_back(rec);
        }
    }

    namespace fs = std::filesystem;
    if (cfg.write_csv || cfg.write_json) fs::create_directories(cfg.out_directory);
    if (cfg.write_csv && built.has_profile) {
        const std::string profile_path =
            (fs::path(cfg.out_directory) / "profile.csv").string();
        write_profile_csv(profile_path, rs, built.profile);
        bundle.artifacts.push_back(profile_path);
        const std::string scan_path = (fs::path(cfg.out_directory) / "scan.csv").string();
        write_scan_csv(scan_path, rows);
        bundle.artifacts.push_back(scan_path);
    }
    if (cfg.write_json) {
        const std::string report_path =
            (fs::path(cfg.out_directory) / "report.json").string();
        bundle.artifacts.push_back(report_path);
        std::ofstream out(report_path);
        if (!out) throw Error("cannot open " + report_path + " for writing");
        out << report_to_json(bundle, cfg);
    }
    return bundle;
}

std::string report_to_json(const ReportBundle& bundle, const ScenarioConfig& cfg) {
    ordered_json doc;
    doc["scenario"] = bundle.scenario;

    ordered_json provenance;
    provenance["config_hash"] = bundle.config_hash;
    ordered_json tolerances;
    tolerances["identity"] = cfg.tol.identity;
    tolerances["geodesic_identity"] = cfg.tol.geodesic_identity;
    tolerances["crosscheck"] = cfg.tol.crosscheck;
    tolerances["frame"] = cfg.tol.frame;
    tolerances["pairing"] = cfg.tol.pairing;
    tolerances["curvature_norm"] = cfg.tol.curvature_norm;
    tolerances["angle_determinant"] = cfg.tol.angle_determinant;
    tolerances["minimal_h"] = cfg.tol.minimal_h;
    tolerances["minimal_tension"] = cfg.tol.minimal_tension;
    tolerances["slope_equation"] = cfg.tol.slope_equation;
    tolerances["quotient_consistency"] = cfg.tol.quotient_consistency;
    tolerances["solver_consistency"] = cfg.tol.solver_consistency;
    tolerances["spectral_slack"] = cfg.tol.spectral_slack;
    provenance["tolerances"] = tolerances;
    provenance["timestamp"] = bundle.timestamp;
    doc["provenance"] = provenance;

    doc["config"] = canonical_config(cfg);

    ordered_json checks = ordered_json::array();
    for (const CheckRecord& rec : bundle.records) {
        ordered_json entry;
        entry["name"] = rec.name;
        entry["property"] = rec.property;
        entry["value"] = rec.value;
        entry["bound"] = rec.bound;
        entry["margin"] = rec.margin;
        entry["status"] = to_string(rec.status);
        checks.push_back(entry);
    }
    doc["checks"] = checks;
    doc["artifacts"] = bundle.artifacts;
    return doc.dump(2) + "\n";
}

std::string list_builtins_text() {
    std::ostringstream out;
    out << "profile builtins (tau):\n"
        << "  euclidean      tau(t) = t         flat radial profile, any m\n"
        << "  hyperbolic     tau(t) = sinh t    curvature -1 profile, any m\n"
        << "  sphere         tau(t) = sin t     curvature +1 profile, any m; needs t_max < pi\n"
        << "  custom-series  tau(t) = t + sum a_k t^k, powers from 2; coefficients echoed in reports\n"
        << "weight builtins (Psi):\n"
        << "  zero           Psi(t) = 0\n"
        << "  quadratic      Psi(t) = a t^2            coefficient a\n"
        << "  cosine         Psi(t) = a (1 + cos t)    coefficient a\n"
        << "  log-cosh       Psi(t) = log cosh t\n"
        << "  custom-series  Psi(t) = sum b_k t^k, powers from 2; coefficients echoed in reports\n"
        << "scenario builtins: cmc-hyperbolic, affine-euclidean, constant-flat\n";
    return out.str();
}

int verify_suite(const std::string& name, std::ostream& out) {
    int failures = 0;
    const auto line = [&](bool ok, const std::string& label, const std::string& detail) {
        out << (ok ? "[PASS] " : "[FAIL] ") << label;
        if (!detail.empty()) out << " (" << detail << ")";
        out << "\n";
        if (!ok) ++failures;
    };

    if (name == "identities") {
        for (const char* key : {"constant-flat", "affine-euclidean", "cmc-hyperbolic"}) {
            ScenarioConfig cfg = builtin_scenario(key);
            cfg.write_json = false;
            cfg.write_csv = false;
            const ReportBundle bundle = run_scenario(cfg);
            for (const CheckRecord& rec : bundle.records) {
                line(rec.status != CheckStatus::Fail, cfg.name + ": " + rec.name,
                     "value " + fmt_short(rec.value) + ", bound " + fmt_short(rec.bound));
            }
        }
        return failures;
    }

    if (name == "spectral") {
        RadialSpace flat;
        flat.m = 2;
        flat.t_max = 2.0;
        flat.tau = [](double t) { return t; };
        flat.tau_prime = [](double) { return 1.0; };
        flat.Psi = [](double) { return 0.0; };
        flat.Psi_prime = [](double) { return 0.0; };

        const SpectralResult unit = drift_eigenvalue(flat, 1.0, 4096);
        line(std::abs(unit.lambda1 - 5.783185962946785) <= 5e-3,
             "flat disc eigenvalue matches the Bessel oracle",
             "lambda1 " + fmt_short(unit.lambda1));
        // Double arithmetic limits eigenpair agreement to roundoff of the
        // stiffness scale, which grows as (grid / radius)^2.
        const double pair_tol =
            1e-14 * std::pow(unit.grid_size / unit.radius, 2.0);
        line(std::abs(unit.rayleigh_quotient - unit.lambda1) <= pair_tol,
             "eigenvalue matches the Rayleigh quotient",
             "gap " + fmt_short(std::abs(unit.rayleigh_quotient - unit.lambda1)));

        const double l512 = drift_eigenvalue(flat, 1.0, 512).lambda1;
        const double l1024 = drift_eigenvalue(flat, 1.0, 1024).lambda1;
        const double l2048 = drift_eigenvalue(flat, 1.0, 2048).lambda1;
        const double ratio = std::abs(l512 - l1024) / std::abs(l1024 - l2048);
        line(ratio >= 3.5, "grid gaps shrink at second order",
             "ratio " + fmt_short(ratio));

        RadialSpace hyper;
        hyper.m = 2;
        hyper.t_max = 20.0;
        hyper.tau = [](double t) { return std::sinh(t); };
        hyper.tau_prime = [](double t) { return std::cosh(t); };
        hyper.Psi = [](double) { return 0.0; };
        hyper.Psi_prime = [](double) { return 0.0; };
        double prev = std::numeric_limits<double>::infinity();
        bool decreasing = true;
        for (double r : {5.0, 10.0, 20.0}) {
            const double lambda = drift_eigenvalue(hyper, r, 2048).lambda1;
            decreasing = decreasing && lambda < prev;
            prev = lambda;
        }
        line(decreasing, "eigenvalue decreases with the ball radius", "");
        return failures;
    }

    if (name == "radial") {
        for (int m : {2, 3, 4}) {
            RadialSpace hyper;
            hyper.m = m;
            hyper.t_max = 20.0;
            hyper.tau = [](double t) { return std::sinh(t); };
            hyper.tau_prime = [](double t) { return std::cosh(t); };
            hyper.Psi = [](double) { return 0.0; };
            hyper.Psi_prime = [](double) { return 0.0; };
            const CZeroResult ceiling = c_zero(hyper);
            line(std::abs(ceiling.value - (m - 1)) <= 1e-5,
                 "hyperbolic ceiling equals m - 1 for m = " + std::to_string(m),
                 "value " + fmt_short(ceiling.value));
        }
        RadialSpace flat;
        flat.m = 2;
        flat.t_max = 8.0;
        flat.tau = [](double t) { return t; };
        flat.tau_prime = [](double) { return 1.0; };
        flat.Psi = [](double) { return 0.0; };
        flat.Psi_prime = [](double) { return 0.0; };
        const CheegerScan scan = cheeger_scan(flat, {0.5, 1.0, 2.0, 5.0});
        bool rate_ok = true;
        for (std::size_t i = 0; i < scan.radii.size(); ++i) {
            rate_ok = rate_ok &&
                      std::abs(scan.quotients[i] * scan.radii[i] - flat.m) <= 1e-9;
        }
        line(rate_ok, "flat quotient times radius equals the dimension", "");
        return failures;
    }

    throw ConfigError("unknown verify suite '" + name +
                      "'; known: identities, spectral, radial");
}

} // namespace warpgeo
