//---------------------------------------------------------------------------//
//! \file modrec/simulator.hpp
//! Monte Carlo click tallies and the exact click-pattern distribution.
//---------------------------------------------------------------------------//
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "correlations.hpp"
#include "modes.hpp"

namespace modrec
{
//---------------------------------------------------------------------------//
/*!
 * Histogram of per-pulse click patterns.
 *
 * counts[pattern] where bit i of pattern is set iff detector i clicked.
 */
class ClickTally
{
  public:
    explicit ClickTally(int n_branches);
    ClickTally(int n_branches, std::vector<std::uint64_t> counts);

    int n_branches() const { return n_branches_; }
    std::uint64_t n_pulses() const { return n_pulses_; }
    std::vector<std::uint64_t> const& counts() const { return counts_; }

    void add(std::uint32_t pattern, std::uint64_t count = 1);
    ClickTally& operator+=(ClickTally const& other);

    bool operator==(ClickTally const&) const = default;

  private:
    int n_branches_;
    std::uint64_t n_pulses_{0};
    std::vector<std::uint64_t> counts_;
};

//---------------------------------------------------------------------------//
struct PatternDistribution
{
    std::vector<double> probs;  //!< indexed like ClickTally::counts
    double truncation_deficit{0};
    bool truncation_warning{false};
};

//---------------------------------------------------------------------------//
struct SimulationOptions
{
    std::uint64_t chunk_size{1u << 16};
    unsigned int workers{1};  //!< 0 selects hardware concurrency
};

// Pulse-by-pulse Monte Carlo; identical output for any worker count
ClickTally simulate_pulses(FieldSpec const& field,
                           DetectorTree const& tree,
                           std::uint64_t n_pulses,
                           std::uint64_t seed,
                           SimulationOptions const& options = {});

// Exact pattern probabilities from the photon law truncated at n_max
// (automatic when unset)
PatternDistribution
exact_click_distribution(FieldSpec const& field,
                         DetectorTree const& tree,
                         std::optional<std::size_t> n_max = std::nullopt);

//---------------------------------------------------------------------------//
}  // namespace modrec
