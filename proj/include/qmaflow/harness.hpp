#pragma once

// Executes a RunConfig and writes its artifacts into the output directory:
//   solve    diagnostics CSV, phi_tilde.qmf, f.qmf, summary.json
//   cr-flow  diagnostics CSV, phi_final.qmf, u.qmf, summary.json
//   verify   oracle_reports.jsonl, summary.json
//   oracle   oracle_reports.jsonl, summary.json
// Failures additionally write error.json.

#include <optional>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "qmaflow/config.hpp"
#include "qmaflow/cr_flow.hpp"
#include "qmaflow/flow.hpp"
#include "qmaflow/oracles.hpp"

namespace qmaflow {

enum ExitCode : int {
    exit_ok = 0,
    exit_config = 1,
    exit_not_converged = 2,
    exit_blowup = 3,
    exit_check_failed = 4,
    exit_internal = 5,
};

struct RunOutcome {
    int exit_code = exit_ok;
    nlohmann::json summary;
    std::optional<nlohmann::json> error;
    std::optional<QmaResult> qma;
    std::optional<CrResult> cr;
    std::vector<oracle::OracleReport> reports;
};

/// Progress goes to `log` unless it is null.
RunOutcome run(const RunConfig& cfg, std::ostream* log = nullptr);

}  // namespace qmaflow
