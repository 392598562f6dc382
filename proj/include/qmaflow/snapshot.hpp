#pragma once

// QMAFLD01 field snapshots: 8 magic bytes, a little-endian uint32 header
// length, a JSON header, then the row-major float64 payload (little-endian).

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmaflow/geometry.hpp"

namespace qmaflow {

inline constexpr char kSnapshotMagic[8] = {'Q', 'M', 'A', 'F', 'L', 'D', '0', '1'};

struct Snapshot {
    nlohmann::json header;
    std::vector<double> values;
};

/// `extra` entries are merged into the header (e.g. a config hash).
void write_snapshot(const std::filesystem::path& path, const ScalarField& field, const std::string& name,
                    const nlohmann::json& extra = nlohmann::json::object());

Snapshot read_snapshot(const std::filesystem::path& path);

/// Checks n, grid and periods against `geom`; mismatches name both values.
ScalarField field_from_snapshot(const Snapshot& snap, const GeometryPtr& geom);

}  // namespace qmaflow
