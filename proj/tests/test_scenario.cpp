#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "warpgeo/errors.hpp"
#include "warpgeo/radial.hpp"
#include "warpgeo/scenario.hpp"

using namespace warpgeo;
namespace fs = std::filesystem;

namespace {

// === Helpers ===

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

/// Runs fn, which is expected to throw ConfigError, and returns the message.
/// An empty result means fn did not throw at all.
template <typename Fn>
std::string config_error_of(Fn&& fn) {
    try {
        fn();
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(static_cast<bool>(in));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

/// Removes the timestamp line, which is the only part of a report that is
/// allowed to differ between two runs of the same config.
std::string without_timestamp(const std::string& text) {
    std::string out;
    for (const std::string& line : split_lines(text)) {
        if (contains(line, "\"timestamp\"")) continue;
        out += line;
        out += '\n';
    }
    return out;
}

const CheckRecord* find_record(const ReportBundle& bundle, const std::string& name) {
    for (const CheckRecord& rec : bundle.records) {
        if (rec.name == name) return &rec;
    }
    return nullptr;
}

std::vector<std::string> record_names(const ReportBundle& bundle) {
    std::vector<std::string> names;
    names.reserve(bundle.records.size());
    for (const CheckRecord& rec : bundle.records) names.push_back(rec.name);
    return names;
}

/// Disables artifacts and shrinks the spectral grid so unit runs stay fast.
ScenarioConfig quiet(ScenarioConfig cfg, int grid_size = 256) {
    cfg.write_json = false;
    cfg.write_csv = false;
    cfg.grid_size = grid_size;
    return cfg;
}

std::string minimal_text() {
    return R"({
        "space": { "m": 2, "t_max": 5.0, "tau": { "name": "euclidean" } },
        "graph": { "kind": "constant" },
        "probes": { "radii": [1.0, 2.0] }
    })";
}

/// Parses the minimal config with one field patched in via raw JSON text.
ScenarioConfig parse_patched(const std::string& key, const std::string& value) {
    nlohmann::json doc = nlohmann::json::parse(minimal_text());
    nlohmann::json patch = nlohmann::json::parse(value);
    nlohmann::json* slot = &doc;
    std::string rest = key;
    for (std::size_t dot = rest.find('.'); dot != std::string::npos;
         dot = rest.find('.')) {
        slot = &(*slot)[rest.substr(0, dot)];
        rest = rest.substr(dot + 1);
    }
    (*slot)[rest] = patch;
    return parse_scenario_text(doc.dump(), "patched");
}

std::string patched_error(const std::string& key, const std::string& value) {
    return config_error_of([&] { (void)parse_patched(key, value); });
}

} // namespace

// === Parsing: defaults and full round trip ===

TEST_CASE("minimal config text fills documented defaults") {
    const ScenarioConfig cfg = parse_scenario_text(minimal_text(), "minimal");
    CHECK(cfg.name == "scenario");
    CHECK(cfg.tau_name == "euclidean");
    CHECK(cfg.psi_name == "zero");
    CHECK(cfg.m == 2);
    CHECK(cfg.t_max == 5.0);
    CHECK(cfg.fiber_dim == 1);
    CHECK(cfg.fiber_metric == "flat");
    CHECK(cfg.graph_kind == "constant");
    CHECK(cfg.radii == std::vector<double>{1.0, 2.0});
    CHECK(cfg.grid_size == 4096);
    CHECK(cfg.out_directory == "out");
    CHECK_FALSE(cfg.out_directory_set);
    CHECK(cfg.write_json);
    CHECK(cfg.write_csv);
    CHECK_FALSE(cfg.has_comparison);
    CHECK_FALSE(cfg.serial);
}

TEST_CASE("line comments are accepted inside config documents") {
    const std::string text = R"({
        // a constant slice over the flat plane
        "space": { "m": 2, "t_max": 5.0, "tau": { "name": "euclidean" } },
        "graph": { "kind": "constant" }, // totally geodesic
        "probes": { "radii": [1.0] }
    })";
    const ScenarioConfig cfg = parse_scenario_text(text, "commented");
    CHECK(cfg.graph_kind == "constant");
    CHECK(cfg.radii.size() == 1);
}

TEST_CASE("every config section round trips through the parser") {
    const std::string text = R"({
        "name": "kitchen-sink",
        "space": {
            "m": 3,
            "t_max": 2.5,
            "tau": { "name": "custom-series", "coefficients": [0.0, 0.1] },
            "Psi": { "name": "cosine", "coefficient": 0.3 }
        },
        "fiber": { "dim": 2, "metric": "round-sphere" },
        "graph": {
            "kind": "affine",
            "matrix": [[0.1, 0.0, 0.2], [0.0, 0.3, 0.1]],
            "offset": [1.0, 0.5]
        },
        "probes": {
            "radii": [0.5, 1.5],
            "grid_size": 128,
            "fd": {
                "first_order_scale": 2.0,
                "second_order_scale": 3.0,
                "derived_field_scale": 0.002
            }
        },
        "comparison": { "alpha": 0.5, "delta": 0.25 },
        "outputs": { "directory": "elsewhere", "formats": ["csv"] }
    })";
    const ScenarioConfig cfg = parse_scenario_text(text, "sink");
    CHECK(cfg.name == "kitchen-sink");
    CHECK(cfg.m == 3);
    CHECK(cfg.t_max == 2.5);
    CHECK(cfg.tau_name == "custom-series");
    CHECK(cfg.tau_coefficients == std::vector<double>{0.0, 0.1});
    CHECK(cfg.psi_name == "cosine");
    CHECK(cfg.psi_coefficient == 0.3);
    CHECK(cfg.fiber_dim == 2);
    CHECK(cfg.fiber_metric == "round-sphere");
    CHECK(cfg.graph_kind == "affine");
    REQUIRE(cfg.affine_matrix.size() == 2);
    CHECK(cfg.affine_matrix[0] == std::vector<double>{0.1, 0.0, 0.2});
    CHECK(cfg.affine_matrix[1] == std::vector<double>{0.0, 0.3, 0.1});
    CHECK(cfg.offset == std::vector<double>{1.0, 0.5});
    CHECK(cfg.radii == std::vector<double>{0.5, 1.5});
    CHECK(cfg.grid_size == 128);
    CHECK(cfg.fd.first_order_scale == 2.0);
    CHECK(cfg.fd.second_order_scale == 3.0);
    CHECK(cfg.fd.derived_field_scale == 0.002);
    CHECK(cfg.has_comparison);
    CHECK(cfg.comparison_alpha == 0.5);
    CHECK(cfg.comparison_delta == 0.25);
    CHECK(cfg.out_directory == "elsewhere");
    CHECK(cfg.out_directory_set);
    CHECK(cfg.write_csv);
    CHECK_FALSE(cfg.write_json);
}

// === Parsing: validation errors carry field paths ===

TEST_CASE("parse errors name the origin and the offending field") {
    SUBCASE("malformed json reports the origin") {
        const std::string msg =
            config_error_of([] { (void)parse_scenario_text("{ nope", "broken.json"); });
        CHECK(contains(msg, "broken.json"));
    }
    SUBCASE("top level must be an object") {
        const std::string msg =
            config_error_of([] { (void)parse_scenario_text("[1, 2]", "arr"); });
        CHECK(contains(msg, "top level must be an object"));
    }
    SUBCASE("missing space section") {
        const std::string msg = config_error_of(
            [] { (void)parse_scenario_text(R"({"graph":{},"probes":{}})", "cfg"); });
        CHECK(contains(msg, "field 'space' is required"));
    }
    SUBCASE("base dimension outside the chart-backed range") {
        CHECK(contains(patched_error("space.m", "4"), "space.m"));
    }
    SUBCASE("nonpositive truncation radius") {
        CHECK(contains(patched_error("space.t_max", "-1.0"), "must be positive"));
    }
    SUBCASE("unknown profile name") {
        CHECK(contains(patched_error("space.tau.name", "\"spiral\""), "space.tau.name"));
    }
    SUBCASE("custom series without coefficients") {
        CHECK(contains(patched_error("space.tau", R"({"name":"custom-series"})"),
                       "space.tau.coefficients"));
    }
    SUBCASE("unknown weight name") {
        CHECK(contains(patched_error("space.Psi", R"({"name":"linear"})"),
                       "space.Psi.name"));
    }
    SUBCASE("fiber dimension must be positive") {
        CHECK(contains(patched_error("fiber", R"({"dim":0})"), "fiber.dim"));
    }
    SUBCASE("unknown fiber metric") {
        CHECK(contains(patched_error("fiber", R"({"dim":2,"metric":"lorentzian"})"),
                       "fiber.metric"));
    }
    SUBCASE("unknown graph kind") {
        CHECK(contains(patched_error("graph.kind", "\"helicoid\""), "graph.kind"));
    }
    SUBCASE("radial profile graphs require the flat line fiber") {
        nlohmann::json doc = nlohmann::json::parse(minimal_text());
        doc["fiber"] = {{"dim", 2}, {"metric", "flat"}};
        doc["graph"] = {{"kind", "cmc-radial"}, {"c", 0.5}};
        const std::string msg = config_error_of(
            [&] { (void)parse_scenario_text(doc.dump(), "cfg"); });
        CHECK(contains(msg, "flat line"));
    }
    SUBCASE("affine matrix must have fiber.dim rows") {
        nlohmann::json doc = nlohmann::json::parse(minimal_text());
        doc["fiber"] = {{"dim", 2}, {"metric", "flat"}};
        doc["graph"] = {{"kind", "affine"},
                        {"matrix", nlohmann::json::parse("[[0.1, 0.2]]")}};
        const std::string msg = config_error_of(
            [&] { (void)parse_scenario_text(doc.dump(), "cfg"); });
        CHECK(contains(msg, "fiber.dim rows"));
    }
    SUBCASE("affine matrix rows must have space.m entries") {
        nlohmann::json doc = nlohmann::json::parse(minimal_text());
        doc["graph"] = {{"kind", "affine"},
                        {"matrix", nlohmann::json::parse("[[0.1, 0.2, 0.3]]")}};
        const std::string msg = config_error_of(
            [&] { (void)parse_scenario_text(doc.dump(), "cfg"); });
        CHECK(contains(msg, "space.m entries"));
    }
    SUBCASE("offset length must match the fiber dimension") {
        CHECK(contains(patched_error("graph.offset", "[0.1, 0.2]"), "graph.offset"));
    }
    SUBCASE("probe radii must be strictly increasing") {
        CHECK(contains(patched_error("probes.radii", "[1.0, 1.0]"),
                       "strictly increasing"));
    }
    SUBCASE("probe radii must be positive") {
        CHECK(contains(patched_error("probes.radii", "[-1.0, 2.0]"), "probes.radii"));
    }
    SUBCASE("spectral grid floor") {
        CHECK(contains(patched_error("probes.grid_size", "32"), ">= 64"));
    }
    SUBCASE("finite difference scales must be positive") {
        CHECK(contains(patched_error("probes.fd", R"({"first_order_scale":-1.0})"),
                       "probes.fd"));
    }
    SUBCASE("comparison hypotheses must be ordered") {
        CHECK(contains(patched_error("comparison", R"({"alpha":0.1,"delta":0.2})"),
                       "alpha >= delta >= 0"));
    }
    SUBCASE("comparison gradient bound must be nonnegative") {
        CHECK(contains(patched_error("comparison", R"({"alpha":0.5,"delta":-0.1})"),
                       "comparison"));
    }
    SUBCASE("unknown output format") {
        CHECK(contains(patched_error("outputs", R"({"formats":["xml"]})"),
                       "json or csv"));
    }
    SUBCASE("output formats must be an array") {
        CHECK(contains(patched_error("outputs", R"({"formats":"json"})"),
                       "must be an array"));
    }
}

TEST_CASE("unreadable config files raise ConfigError") {
    CHECK_THROWS_AS((void)parse_scenario_file("/nonexistent/nope.json"), ConfigError);
    const std::string msg = config_error_of(
        [] { (void)parse_scenario_file("/nonexistent/nope.json"); });
    CHECK(contains(msg, "cannot read config file"));
    CHECK(contains(msg, "/nonexistent/nope.json"));
}

// === Parsing: the annotated example configs ===

TEST_CASE("annotated example configs parse to the expected scenarios") {
    const std::string dir = WARPGEO_CONFIG_DIR;

    SUBCASE("cmc-hyperbolic") {
        const ScenarioConfig cfg = parse_scenario_file(dir + "/cmc-hyperbolic.json");
        CHECK(cfg.name == "cmc-hyperbolic");
        CHECK(cfg.tau_name == "hyperbolic");
        CHECK(cfg.psi_name == "zero");
        CHECK(cfg.m == 2);
        CHECK(cfg.t_max == 5.0);
        CHECK(cfg.graph_kind == "cmc-radial");
        CHECK(cfg.c == 0.5);
        CHECK(cfg.d == 0.0);
        CHECK(cfg.radii == std::vector<double>{1.0, 2.0, 3.0, 4.0});
        CHECK(cfg.grid_size == 2048);
        CHECK(cfg.out_directory == "out/cmc-hyperbolic");
        CHECK(cfg.write_json);
        CHECK(cfg.write_csv);
    }
    SUBCASE("affine-euclidean") {
        const ScenarioConfig cfg = parse_scenario_file(dir + "/affine-euclidean.json");
        CHECK(cfg.name == "affine-euclidean");
        CHECK(cfg.psi_name == "quadratic");
        CHECK(cfg.psi_coefficient == 0.25);
        CHECK(cfg.fiber_dim == 2);
        CHECK(cfg.graph_kind == "affine");
        REQUIRE(cfg.affine_matrix.size() == 2);
        CHECK(cfg.affine_matrix[0] == std::vector<double>{0.3, -0.2});
        CHECK(cfg.offset == std::vector<double>{0.2, -0.1});
        CHECK(cfg.write_json);
        CHECK_FALSE(cfg.write_csv);
    }
    SUBCASE("constant-flat") {
        const ScenarioConfig cfg = parse_scenario_file(dir + "/constant-flat.json");
        CHECK(cfg.name == "constant-flat");
        CHECK(cfg.graph_kind == "constant");
        CHECK(cfg.offset == std::vector<double>{0.5, 0.5});
        CHECK(cfg.has_comparison);
        CHECK(cfg.comparison_alpha == 0.0);
        CHECK(cfg.comparison_delta == 0.0);
        CHECK(cfg.grid_size == 2048);
    }
}

// === Builtin scenarios ===

TEST_CASE("builtin scenarios carry their documented settings") {
    const ScenarioConfig cmc = builtin_scenario("cmc-hyperbolic");
    CHECK(cmc.tau_name == "hyperbolic");
    CHECK(cmc.graph_kind == "cmc-radial");
    CHECK(cmc.c == 0.5);
    CHECK(cmc.grid_size == 2048);

    const ScenarioConfig affine = builtin_scenario("affine-euclidean");
    CHECK(affine.graph_kind == "affine");
    CHECK(affine.psi_coefficient == 0.25);
    CHECK(affine.radii == std::vector<double>{1.0, 2.0, 3.5});

    const ScenarioConfig constant = builtin_scenario("constant-flat");
    CHECK(constant.graph_kind == "constant");
    CHECK(constant.has_comparison);
    CHECK(constant.radii == std::vector<double>{1.0, 2.5, 4.0});

    const std::string msg =
        config_error_of([] { (void)builtin_scenario("mystery"); });
    CHECK(contains(msg, "unknown builtin scenario"));
    CHECK(contains(msg, "cmc-hyperbolic"));
}

// === Radial space construction from configs ===

TEST_CASE("make_radial_space instantiates the named builtins") {
    SUBCASE("custom series matches its polynomial") {
        ScenarioConfig cfg;
        cfg.tau_name = "custom-series";
        cfg.tau_coefficients = {0.0, 1.0 / 6.0, 0.0, 1.0 / 120.0};
        cfg.psi_name = "custom-series";
        cfg.psi_coefficients = {0.25};
        cfg.t_max = 2.0;
        const RadialSpace rs = make_radial_space(cfg);
        const double t = 0.7;
        const double tau_expected =
            t + std::pow(t, 3) / 6.0 + std::pow(t, 5) / 120.0;
        CHECK(rs.tau(t) == doctest::Approx(tau_expected).epsilon(1e-14));
        CHECK(rs.tau_prime(t) ==
              doctest::Approx(1.0 + t * t / 2.0 + std::pow(t, 4) / 24.0)
                  .epsilon(1e-14));
        CHECK(rs.Psi(t) == doctest::Approx(0.25 * t * t).epsilon(1e-14));
        CHECK(rs.Psi_prime(t) == doctest::Approx(0.5 * t).epsilon(1e-14));
        CHECK_NOTHROW(validate_radial_space(rs));
    }
    SUBCASE("sphere profile enforces the chart bound") {
        ScenarioConfig cfg;
        cfg.tau_name = "sphere";
        cfg.t_max = 3.0;
        CHECK_NOTHROW((void)make_radial_space(cfg));
        cfg.t_max = 3.5;
        const std::string msg =
            config_error_of([&] { (void)make_radial_space(cfg); });
        CHECK(contains(msg, "t_max < pi"));
    }
    SUBCASE("unrecognized names are rejected") {
        ScenarioConfig cfg;
        cfg.tau_name = "bogus";
        CHECK(contains(config_error_of([&] { (void)make_radial_space(cfg); }),
                       "unknown profile builtin"));
        cfg.tau_name = "euclidean";
        cfg.psi_name = "bogus";
        CHECK(contains(config_error_of([&] { (void)make_radial_space(cfg); }),
                       "unknown weight builtin"));
    }
}

// === Running scenarios: record inventory and gating ===

TEST_CASE("constant graph scenario runs its full record inventory") {
    const ReportBundle bundle = run_scenario(quiet(builtin_scenario("constant-flat")));
    CHECK(bundle.scenario == "constant-flat");
    CHECK(bundle.failures() == 0);
    CHECK(bundle.all_passed());
    CHECK(bundle.artifacts.empty());

    std::vector<std::string> expected;
    for (const char* tag : {"[t=1]", "[t=2.5]", "[t=4]"}) {
        for (const char* base :
             {"eigenframe", "weight-pairing", "angle-determinant", "minimality",
              "divergence-identity", "calibration-identity", "calibration-crosscheck"}) {
            expected.push_back(std::string(base) + tag);
        }
    }
    for (const char* tag : {"[r=1]", "[r=2.5]", "[r=4]"})
        expected.push_back(std::string("eigenvalue-comparison") + tag);

    std::vector<std::string> actual = record_names(bundle);
    CHECK(actual.front() == "eigenframe[t=1]");
    std::sort(actual.begin(), actual.end());
    std::sort(expected.begin(), expected.end());
    CHECK(actual == expected);

    for (const CheckRecord& rec : bundle.records) {
        CAPTURE(rec.name);
        CHECK(rec.status == CheckStatus::Pass);
        CHECK_FALSE(rec.property.empty());
    }

    const CheckRecord* angle = find_record(bundle, "angle-determinant[t=2.5]");
    REQUIRE(angle != nullptr);
    CHECK(angle->value == doctest::Approx(1.0).epsilon(1e-12));

    // Flat and unweighted with both hypotheses at zero: the comparison ball
    // sits one dimension up, so the margin is far from the floor.
    const CheckRecord* comparison = find_record(bundle, "eigenvalue-comparison[r=1]");
    REQUIRE(comparison != nullptr);
    CHECK(comparison->value > 3.5);
    CHECK(comparison->value < 4.5);
}

TEST_CASE("affine graphs run only the pointwise universal checks") {
    const ReportBundle bundle = run_scenario(quiet(builtin_scenario("affine-euclidean")));
    CHECK(bundle.all_passed());
    CHECK(bundle.records.size() == 12); // 4 universal checks at 3 probes
    for (const CheckRecord& rec : bundle.records) {
        CHECK_FALSE(contains(rec.name, "divergence-identity"));
        CHECK_FALSE(contains(rec.name, "calibration"));
        CHECK_FALSE(contains(rec.name, "curvature-norm"));
        CHECK_FALSE(contains(rec.name, "admissibility"));
    }
    // The affine graph is genuinely curved, so minimality holds with both
    // sides nonzero.
    const CheckRecord* minimal = find_record(bundle, "minimality[t=2]");
    REQUIRE(minimal != nullptr);
    CHECK(minimal->value > 1e-3);
    CHECK(minimal->bound > 1e-3);
    CHECK(minimal->status == CheckStatus::Pass);
}

TEST_CASE("interior ceiling keeps the admissibility record unflagged") {
    // Quadratic weight over the flat plane: the isoperimetric ceiling is
    // attained strictly inside the chart, so nothing is truncated.
    const std::string text = R"({
        "name": "cmc-weighted-flat",
        "space": {
            "m": 2, "t_max": 5.0,
            "tau": { "name": "euclidean" },
            "Psi": { "name": "quadratic", "coefficient": 0.25 }
        },
        "graph": { "kind": "cmc-radial", "c": 0.5 },
        "probes": { "radii": [1.0, 2.0], "grid_size": 256 }
    })";
    ScenarioConfig cfg = parse_scenario_text(text, "inline");
    cfg.write_json = false;
    cfg.write_csv = false;

    const ReportBundle parallel = run_scenario(cfg);
    CHECK(parallel.all_passed());

    const CheckRecord* admissibility = find_record(parallel, "admissibility");
    REQUIRE(admissibility != nullptr);
    CHECK(admissibility->status == CheckStatus::Pass);
    CHECK(admissibility->value == 0.5);
    CHECK(admissibility->bound == doctest::Approx(1.5669739890260234).epsilon(1e-6));

    CHECK(find_record(parallel, "slope-equation") != nullptr);
    CHECK(find_record(parallel, "curvature-norm[t=1]") != nullptr);
    CHECK(find_record(parallel, "cheeger-margin[r=2]") != nullptr);
    const CheckRecord* heinz = find_record(parallel, "heinz-margin[r=1]");
    REQUIRE(heinz != nullptr);
    CHECK(heinz->value > 0.0);
    CHECK(heinz->status == CheckStatus::Pass);

    ScenarioConfig serial_cfg = cfg;
    serial_cfg.serial = true;
    const ReportBundle serial = run_scenario(serial_cfg);
    REQUIRE(serial.records.size() == parallel.records.size());
    for (std::size_t i = 0; i < serial.records.size(); ++i) {
        CAPTURE(serial.records[i].name);
        CHECK(serial.records[i].name == parallel.records[i].name);
        CHECK(serial.records[i].value == parallel.records[i].value);
        CHECK(serial.records[i].bound == parallel.records[i].bound);
        CHECK(serial.records[i].margin == parallel.records[i].margin);
        CHECK(serial.records[i].status == parallel.records[i].status);
    }
}

TEST_CASE("probe validation rejects points outside the chart margins") {
    ScenarioConfig cfg = quiet(builtin_scenario("constant-flat"));
    cfg.radii = {4.999};
    const std::string base_msg = config_error_of([&] { (void)run_scenario(cfg); });
    CHECK(contains(base_msg, "probe validation failed"));
    CHECK(contains(base_msg, "base chart margin"));

    ScenarioConfig fiber_cfg = quiet(builtin_scenario("constant-flat"));
    fiber_cfg.offset = {9.999, 0.0};
    const std::string fiber_msg =
        config_error_of([&] { (void)run_scenario(fiber_cfg); });
    CHECK(contains(fiber_msg, "fiber chart margin"));
}

// === Running scenarios: artifacts and determinism ===

TEST_CASE("artifact runs are deterministic and write the documented files") {
    ScenarioConfig cfg = builtin_scenario("cmc-hyperbolic");
    cfg.radii = {1.0, 2.0};
    cfg.grid_size = 256;
    cfg.out_directory = "scenario-test-out";
    fs::remove_all(cfg.out_directory);

    const ReportBundle first = run_scenario(cfg);
    CHECK(first.all_passed());

    // The hyperbolic quotient keeps decreasing toward the truncation radius,
    // so the ceiling is a truncated infimum: flagged, but never a failure.
    const CheckRecord* admissibility = find_record(first, "admissibility");
    REQUIRE(admissibility != nullptr);
    CHECK(admissibility->status == CheckStatus::Flagged);
    CHECK(admissibility->bound ==
          doctest::Approx(1.0 / std::tanh(2.5)).epsilon(1e-6));

    REQUIRE(first.artifacts.size() == 3);
    for (const std::string& path : first.artifacts) CHECK(fs::exists(path));

    const std::string profile_path = cfg.out_directory + "/profile.csv";
    const std::string scan_path = cfg.out_directory + "/scan.csv";
    const std::string report_path = cfg.out_directory + "/report.json";

    const std::vector<std::string> profile = split_lines(read_file(profile_path));
    REQUIRE(profile.size() > 10);
    CHECK(profile.front() == "t,phi,phi_c,F,xi,residual");

    const std::vector<std::string> scan = split_lines(read_file(scan_path));
    REQUIRE(scan.size() == 3);
    CHECK(scan.front() == "r,V_psi,A_psi,quotient,lambda1,cheeger_margin,heinz_margin");
    CHECK(scan[1].rfind("1,", 0) == 0);
    CHECK(scan[2].rfind("2,", 0) == 0);

    const std::string report_text = read_file(report_path);
    const nlohmann::json doc = nlohmann::json::parse(report_text);
    CHECK(doc.at("scenario") == "cmc-hyperbolic");
    CHECK(doc.at("provenance").at("config_hash") == first.config_hash);
    CHECK(first.config_hash.size() == 16);
    CHECK(doc.at("provenance").at("tolerances").size() == 13);
    CHECK(doc.at("config").at("space").at("m") == 2);
    CHECK(doc.at("config").at("graph").at("c") == 0.5);
    REQUIRE(doc.at("checks").size() == first.records.size());
    for (const auto& entry : doc.at("checks")) {
        CHECK(entry.contains("name"));
        CHECK(entry.contains("property"));
        CHECK(entry.contains("value"));
        CHECK(entry.contains("bound"));
        CHECK(entry.contains("margin"));
        CHECK(entry.contains("status"));
    }
    CHECK(doc.at("checks").front().at("name") == "admissibility");
    CHECK(doc.at("checks").front().at("status") == "FLAGGED");
    CHECK(doc.at("artifacts").size() == 3);

    // Byte-stable apart from the timestamp, including under the parallel map.
    const ReportBundle second = run_scenario(cfg);
    CHECK(second.config_hash == first.config_hash);
    const std::string report_again = read_file(report_path);
    CHECK(without_timestamp(report_again) == without_timestamp(report_text));

    fs::remove_all(cfg.out_directory);
}

TEST_CASE("disabled outputs write nothing at all") {
    ScenarioConfig cfg = quiet(builtin_scenario("constant-flat"));
    cfg.out_directory = "scenario-test-unwritten";
    fs::remove_all(cfg.out_directory);
    const ReportBundle bundle = run_scenario(cfg);
    CHECK(bundle.artifacts.empty());
    CHECK_FALSE(fs::exists(cfg.out_directory));
}

TEST_CASE("config hash tracks scenario content") {
    ScenarioConfig cfg = quiet(builtin_scenario("constant-flat"));
    cfg.has_comparison = false;
    cfg.radii = {1.0};
    const std::string hash_a = run_scenario(cfg).config_hash;
    const std::string hash_b = run_scenario(cfg).config_hash;
    CHECK(hash_a == hash_b);

    ScenarioConfig moved = cfg;
    moved.offset = {0.25, 0.5};
    CHECK(run_scenario(moved).config_hash != hash_a);
}

// === Status names, builtin catalog, verification suites ===

TEST_CASE("status names serialize to the report vocabulary") {
    CHECK(std::string(to_string(CheckStatus::Pass)) == "PASS");
    CHECK(std::string(to_string(CheckStatus::Fail)) == "FAIL");
    CHECK(std::string(to_string(CheckStatus::Flagged)) == "FLAGGED");
}

TEST_CASE("builtin catalog lists profiles, weights, and scenarios") {
    const std::string text = list_builtins_text();
    CHECK(contains(text, "euclidean"));
    CHECK(contains(text, "hyperbolic"));
    CHECK(contains(text, "log-cosh"));
    CHECK(contains(text, "custom-series"));
    CHECK(contains(text, "scenario builtins: cmc-hyperbolic, affine-euclidean, "
                         "constant-flat"));
}

TEST_CASE("verification suites pass and print one line per check") {
    SUBCASE("radial") {
        std::ostringstream out;
        CHECK(verify_suite("radial", out) == 0);
        CHECK(contains(out.str(), "[PASS]"));
        CHECK(contains(out.str(), "ceiling equals m - 1"));
        CHECK_FALSE(contains(out.str(), "[FAIL]"));
    }
    SUBCASE("spectral") {
        std::ostringstream out;
        CHECK(verify_suite("spectral", out) == 0);
        CHECK(contains(out.str(), "Bessel oracle"));
        CHECK(contains(out.str(), "Rayleigh quotient"));
        CHECK_FALSE(contains(out.str(), "[FAIL]"));
    }
    SUBCASE("identities") {
        std::ostringstream out;
        CHECK(verify_suite("identities", out) == 0);
        CHECK(contains(out.str(), "constant-flat: eigenframe[t=1]"));
        CHECK(contains(out.str(), "cmc-hyperbolic: curvature-norm[t=1]"));
        CHECK_FALSE(contains(out.str(), "[FAIL]"));
    }
    SUBCASE("unknown suite") {
        std::ostringstream out;
        const std::string msg =
            config_error_of([&] { (void)verify_suite("mystery", out); });
        CHECK(contains(msg, "unknown verify suite"));
    }
}
