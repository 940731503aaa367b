#pragma once

// Runs the diagnostic batteries selected by a RunConfig and assembles the structured
// report (schema in docs/report-schema.md).

#include <string>

#include <json.hpp>

#include "cartan/config.hpp"

namespace cartan {

inline constexpr const char* kReportSchema = "cartan.report/1";

enum ExitCode : int {
    kExitPass = 0,
    kExitFail = 1,
    kExitConfig = 2,
    kExitInternal = 3,
};

struct RunOutcome {
    nlohmann::json report;
    int exit_code = kExitPass;
};

/// Deterministic for a given config (seed included). Throws ParseError/UsageError for an
/// invalid config; module errors inside a battery are recorded in the report instead.
RunOutcome run(const RunConfig& config);

/// Pretty-printed JSON with sorted keys and a trailing newline.
std::string render_report(const nlohmann::json& report);
/// Human-readable digest: one line per battery and an overall verdict.
std::string render_summary(const nlohmann::json& report);

}  // namespace cartan
