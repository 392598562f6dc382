#pragma once

// Run configuration for the qmaflow command line tool.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmaflow/flow.hpp"
#include "qmaflow/geometry.hpp"

namespace qmaflow {

enum class Mode { solve, cr_flow, verify, oracle };

std::string to_string(Mode mode);
std::optional<Mode> mode_from_string(const std::string& name);

/// A scalar datum: a named preset, a snapshot file, or a seeded random field.
struct DatumSpec {
    enum class Kind { preset, snapshot, random } kind = Kind::preset;
    std::string preset = "zero";
    double amp = 0.2;
    std::filesystem::path snapshot;
    std::optional<std::uint64_t> seed;  // random fields fall back to RunConfig::seed
    std::string pointer;                // JSON pointer of the datum, for error messages
};

struct RunConfig {
    Mode mode = Mode::solve;
    int n = 1;
    std::vector<int> grid;
    std::vector<double> periods;

    std::optional<DatumSpec> f;  // solve
    std::optional<DatumSpec> u;  // cr-flow

    Scheme scheme = Scheme::explicit_euler;
    std::optional<double> dt;
    double dt_safety = 0.5;
    double tol = 1e-9;
    double t_max = 500.0;
    long max_steps = 2'000'000;

    int samples = 100;
    std::uint64_t seed = 1;

    std::filesystem::path out_dir = "out";
    long snapshot_every = 0;
    std::string csv = "diagnostics.csv";

    /// Fully resolved configuration (defaults filled, output directory
    /// excluded) and its FNV-1a hash.
    nlohmann::json resolved;
    std::string hash;
};

/// Names of the analytic presets: zero, cos1, cos13, sum-modes.
const std::vector<std::string>& preset_names();

/// Validates `doc`; relative snapshot paths resolve against `base_dir`.
/// Throws ConfigError naming the offending JSON pointer. `mode` (from the
/// command line) takes effect when the document has no "mode".
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                       std::optional<Mode> mode = std::nullopt);
RunConfig parse_config(const std::filesystem::path& path, std::optional<Mode> mode = std::nullopt);

/// Applies a seed override and recomputes the resolved form and hash.
void override_seed(RunConfig& cfg, std::uint64_t seed);

GeometryPtr make_geometry(const RunConfig& cfg);
ScalarField materialize(const DatumSpec& datum, const GeometryPtr& geom, std::uint64_t default_seed);

}  // namespace qmaflow
