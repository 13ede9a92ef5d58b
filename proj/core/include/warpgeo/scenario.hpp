#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "warpgeo/fd.hpp"
#include "warpgeo/graph.hpp"
#include "warpgeo/radial.hpp"

namespace warpgeo {

/// Tolerances used by the scenario runner; every report record carries the
/// one it was judged against.
struct Tolerances {
    double identity = 1e-4;             // divergence and calibration residuals
    double geodesic_identity = 1e-8;    // same residuals on totally geodesic graphs
    double crosscheck = 1e-6;           // morphism transport of the mean curvature
    double frame = 1e-8;                // eigenframe orthogonality and transport
    double pairing = 1e-8;              // weight pairing agreement
    double curvature_norm = 1e-4;       // |H| against the prescribed constant
    double angle_determinant = 1e-10;   // cos angle vs induced determinant
    double minimal_h = 1e-8;            // minimality equivalence, |H| side
    double minimal_tension = 1e-7;      // minimality equivalence, tension side
    double slope_equation = 1e-3;       // first order profile equation residual
    double quotient_consistency = 1e-9; // ball quotient vs reciprocal profile
    double solver_consistency = 1e-10;  // eigenvalue vs Rayleigh quotient (relative)
    double spectral_slack = 1e-6;       // discretization slack for eigenvalue bounds
};

/// Parsed scenario description. The schema is a single JSON file (comments
/// allowed) with sections space / fiber / graph / probes / outputs and an
/// optional comparison section; annotated examples live under configs/.
struct ScenarioConfig {
    std::string name = "scenario";

    // space
    std::string tau_name = "euclidean";
    std::vector<double> tau_coefficients; // custom-series, powers start at 2
    std::string psi_name = "zero";
    double psi_coefficient = 0.0;
    std::vector<double> psi_coefficients; // custom-series, powers start at 2
    int m = 2;
    double t_max = 5.0;

    // fiber (affine and constant graphs; the radial profile lift always uses
    // a flat line fiber)
    int fiber_dim = 1;
    std::string fiber_metric = "flat";

    // graph
    std::string graph_kind = "constant";
    double c = 0.0;
    double d = 0.0;
    std::vector<std::vector<double>> affine_matrix; // fiber_dim rows, m columns
    std::vector<double> offset;                     // fiber point, defaults to chart center

    // probes
    std::vector<double> radii;
    int grid_size = 4096;
    FdConfig fd;
    Tolerances tol;

    // optional eigenvalue comparison hypotheses
    bool has_comparison = false;
    double comparison_alpha = 0.0;
    double comparison_delta = 0.0;

    // outputs
    std::string out_directory = "out";
    bool out_directory_set = false; // true when the config file named a directory
    bool write_json = true;
    bool write_csv = true;
    bool serial = false;
};

/// Parses and validates a config document; origin labels error messages.
[[nodiscard]] ScenarioConfig parse_scenario_text(const std::string& text,
                                                 const std::string& origin);
[[nodiscard]] ScenarioConfig parse_scenario_file(const std::string& path);

/// Ready-made configs mirroring the annotated files under configs/. Names:
/// cmc-hyperbolic, affine-euclidean, constant-flat.
[[nodiscard]] ScenarioConfig builtin_scenario(const std::string& name);

/// Instantiates the radial space described by the config's space section.
[[nodiscard]] RadialSpace make_radial_space(const ScenarioConfig& config);

enum class CheckStatus { Pass, Fail, Flagged };
[[nodiscard]] const char* to_string(CheckStatus status);

/// One report line: a named check of a plain-language property, the measured
/// value, the bound it was compared against, and the signed slack. Flagged
/// is reserved for truncated infima, never for violations.
struct CheckRecord {
    std::string name;
    std::string property;
    double value = 0.0;
    double bound = 0.0;
    double margin = 0.0;
    CheckStatus status = CheckStatus::Pass;
};

struct ReportBundle {
    std::string scenario;
    std::string config_hash; // FNV-1a of the canonical config serialization
    std::string timestamp;   // UTC, excluded from determinism guarantees
    std::vector<CheckRecord> records;
    std::vector<std::string> artifacts; // files written by the run

    [[nodiscard]] std::size_t failures() const;
    [[nodiscard]] bool all_passed() const { return failures() == 0; }
};

/// Runs the full check suite implied by graph_kind, writes the configured
/// artifacts, and returns the records. Deterministic for a fixed config,
/// including under the parallel probe map.
[[nodiscard]] ReportBundle run_scenario(const ScenarioConfig& config);

/// Canonical JSON serialization of a report (byte-stable except timestamp).
[[nodiscard]] std::string report_to_json(const ReportBundle& bundle,
                                         const ScenarioConfig& config);

/// Catalog of builtin profile and weight functions with closed forms.
[[nodiscard]] std::string list_builtins_text();

/// Named verification suites for the CLI: identities | spectral | radial.
/// Prints one line per check; returns the number of failures.
int verify_suite(const std::string& name, std::ostream& out);

} // namespace warpgeo
