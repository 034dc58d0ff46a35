//---------------------------------------------------------------------------//
//! \file modrec/suite.hpp
//! Scenario pipeline (simulate, estimate, reconstruct) and suite runner.
//---------------------------------------------------------------------------//
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "io.hpp"

namespace modrec
{
//---------------------------------------------------------------------------//
//! One reconstruction variant of a scenario, reduced to table quantities.
struct MethodSummary
{
    std::optional<double> fidelity;
    int s_rec{0};
    int s_correct{0};  //!< reconstructed modes whose type matches the truth
    std::string family;  //!< pruned family label
    bool converged{false};

    bool operator==(MethodSummary const&) const = default;
};

//! One row of the summary table.
struct SuiteRow
{
    std::string case_id;
    int s_e{0};
    std::string configuration;  //!< expected family label
    MethodSummary g_theta;
    MethodSummary g_only;
    Measured g2_exp{};
    std::string error;  //!< non-empty when the scenario failed

    bool operator==(SuiteRow const&) const = default;
};

//! Full output of one scenario run.
struct ScenarioOutcome
{
    SuiteRow row;
    std::optional<ClickTally> tally;
    std::optional<CorrelationSet> observed;
    std::optional<ReconstructionResult> g_theta;
    std::optional<ReconstructionResult> g_only;
};

struct RunOptions
{
    unsigned int workers{1};  //!< scenario-level threads in a suite
    unsigned int inner_workers{1};  //!< simulation/fit threads per scenario
};

// Count of reconstructed modes whose kind is also present in the truth,
// matched kind by kind
int correct_mode_count(ModelFamily const& expected, ModelFamily const& reconstructed);

// Simulate, estimate and reconstruct with both objectives. Artifacts go to
// out_dir when given. Errors are caught and recorded in the row.
ScenarioOutcome run_scenario(std::string case_id,
                             ScenarioConfig const& config,
                             std::optional<std::filesystem::path> const& out_dir = {},
                             RunOptions const& options = {});

//---------------------------------------------------------------------------//
//! A suite entry that either parsed or carries its validation error.
struct SuiteEntry
{
    std::string case_id;
    std::optional<ScenarioConfig> config;
    std::string error;
};

/*!
 * Parse a suite document:
 *   { "schema_version": 1, "defaults": {...}, "scenarios": [ {...}, ... ] }
 * Each scenario is merged over the defaults and must carry a "case" id.
 */
std::vector<SuiteEntry> suite_from_json(nlohmann::json const& j);

// Compare case identifiers: roman numerals and integers numerically,
// otherwise lexicographically
bool case_less(std::string const& a, std::string const& b);

// Run every entry; outcomes are sorted by case identifier
std::vector<ScenarioOutcome>
run_suite(std::vector<SuiteEntry> const& entries,
          std::optional<std::filesystem::path> const& out_dir = {},
          RunOptions const& options = {});

void write_summary_csv(std::ostream& os, std::vector<SuiteRow> const& rows);
void write_summary_table(std::ostream& os, std::vector<SuiteRow> const& rows);

//---------------------------------------------------------------------------//
}  // namespace modrec
