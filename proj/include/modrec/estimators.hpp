//---------------------------------------------------------------------------//
//! \file modrec/estimators.hpp
//! Experimental g^(K), theta^(K) and click probabilities from tallies.
//---------------------------------------------------------------------------//
#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "correlations.hpp"
#include "simulator.hpp"

namespace modrec
{
//---------------------------------------------------------------------------//
struct BootstrapConfig
{
    int n_resamples{200};
    std::uint64_t seed{0};
};

//! Marginal probabilities of a click-pattern histogram.
struct ClickMarginals
{
    std::vector<double> q_click;  //!< per branch
    std::vector<double> q_noclick;  //!< per branch, 1 - q_click
    std::map<BranchSet, double> q_noclick_subset;  //!< no branch of S clicks
    std::map<BranchSet, double> q_allclick_subset;  //!< every branch of S clicks
};

// Marginals over every non-empty subset
ClickMarginals estimate_q(ClickTally const& tally);

//---------------------------------------------------------------------------//
// Point estimates from normalized pattern frequencies. These accept any
// probability vector over 2^N patterns, e.g. an exact PatternDistribution.

// Mean over size-K subsets of P(all click) / prod P(click)
double g_from_frequencies(std::span<double const> freq, int n_branches, int order);
// Same, one entry per size-K subset (ascending bitmask order)
std::vector<double>
g_subsets_from_frequencies(std::span<double const> freq, int n_branches, int order);
// Q_S(0) / prod Q_i(0)
double theta_from_frequencies(std::span<double const> freq,
                              int n_branches,
                              BranchSet subset);

//---------------------------------------------------------------------------//
Measured estimate_g(ClickTally const& tally, int order, BootstrapConfig const& boot = {});
Measured estimate_theta(ClickTally const& tally,
                        BranchSet subset,
                        BootstrapConfig const& boot = {});

// Full click-basis correlation set (g for K = 2..N, theta for every subset)
CorrelationSet correlation_set_estimate(ClickTally const& tally,
                                        BootstrapConfig const& boot = {});

//---------------------------------------------------------------------------//
}  // namespace modrec
