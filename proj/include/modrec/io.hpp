//---------------------------------------------------------------------------//
//! \file modrec/io.hpp
//! Scenario configuration, tally CSV and result documents.
//---------------------------------------------------------------------------//
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "correlations.hpp"
#include "estimators.hpp"
#include "modes.hpp"
#include "reconstruct.hpp"
#include "simulator.hpp"

namespace modrec
{
inline constexpr int schema_version = 1;

//---------------------------------------------------------------------------//
/*!
 * Everything needed to simulate, estimate and reconstruct one scenario.
 *
 * The field is optional: a reconstruction-only config may omit it, in which
 * case no ground truth (and no fidelity) is available.
 */
struct ScenarioConfig
{
    std::string name{"scenario"};
    std::optional<FieldSpec> field;
    DetectorTree tree{DetectorTree::uniform(4, 1.0)};
    std::uint64_t n_pulses{1000000};
    std::uint64_t seed{1};
    int s_max{4};
    std::optional<int> exact_s;
    BootstrapConfig bootstrap{};
    double presence_threshold{1e-3};
    ObjectiveKind objective{ObjectiveKind::g_theta};
    std::optional<std::size_t> n_max;

    // Cross-field invariants (s_max vs tree size, etc.)
    void validate() const;
};

ScenarioConfig scenario_from_json(nlohmann::json const& j);
nlohmann::json to_json(ScenarioConfig const& config);

ScenarioConfig load_scenario(std::filesystem::path const& path);

//---------------------------------------------------------------------------//
// Basic JSON forms
nlohmann::json to_json(FieldSpec const& field);
FieldSpec field_from_json(nlohmann::json const& j);
nlohmann::json to_json(DetectorTree const& tree);
DetectorTree tree_from_json(nlohmann::json const& j);
nlohmann::json to_json(CorrelationSet const& set);
CorrelationSet correlation_set_from_json(nlohmann::json const& j);
nlohmann::json to_json(FitResult const& fit, CorrelationSet const& observed);

nlohmann::json result_document(ScenarioConfig const& config,
                               CorrelationSet const& observed,
                               ReconstructionResult const& result);

//---------------------------------------------------------------------------//
// Tally CSV: "n_branches,N" and "n_pulses,P" header lines, then one
// "pattern,count" row per click pattern 0..2^N-1
void write_tally(std::ostream& os, ClickTally const& tally);
ClickTally read_tally(std::istream& is);
void save_tally(std::filesystem::path const& path, ClickTally const& tally);
ClickTally load_tally(std::filesystem::path const& path);

// Per-mode expected vs reconstructed mean photon numbers
void write_mode_plot(std::ostream& os,
                     std::optional<FieldSpec> const& expected,
                     FieldSpec const& reconstructed);

// Human-readable reconstruction report
void write_report(std::ostream& os,
                  ScenarioConfig const& config,
                  CorrelationSet const& observed,
                  ReconstructionResult const& result);

nlohmann::json load_json(std::filesystem::path const& path);
void save_json(std::filesystem::path const& path, nlohmann::json const& j);
void save_text(std::filesystem::path const& path, std::string const& text);

//---------------------------------------------------------------------------//
}  // namespace modrec
