//---------------------------------------------------------------------------//
//! \file modrec/correlations.hpp
//! Detector tree and theoretical g^(K)(0) / theta^(K)(0) statistics.
//---------------------------------------------------------------------------//
#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "modes.hpp"

namespace modrec
{
//---------------------------------------------------------------------------//
/*!
 * Set of detector-tree branches stored as a bitmask (bit i = branch i).
 */
struct BranchSet
{
    std::uint32_t bits{0};

    int size() const { return std::popcount(bits); }
    bool empty() const { return bits == 0; }
    bool contains(int i) const { return (bits >> i) & 1u; }

    static BranchSet single(int i) { return {1u << i}; }
    static BranchSet all(int n) { return {(1u << n) - 1u}; }

    // Zero-based branch indices in ascending order
    std::vector<int> indices() const;
    // Human-readable one-based label, e.g. "1-3-4"
    std::string label() const;

    auto operator<=>(BranchSet const&) const = default;
};

// All subsets of {0..n-1} of the given size, in ascending bitmask order
std::vector<BranchSet> subsets_of_size(int n_branches, int size);

//---------------------------------------------------------------------------//
/*!
 * Beam-splitter tree feeding N click detectors.
 *
 * Branch i receives each photon with probability split[i] and detects it
 * with efficiency eff[i].
 */
class DetectorTree
{
  public:
    DetectorTree(std::vector<double> split, std::vector<double> eff);

    // Equal split 1/N and uniform efficiency
    static DetectorTree uniform(int n_branches, double eff);

    int n_branches() const { return static_cast<int>(split_.size()); }
    std::vector<double> const& split() const { return split_; }
    std::vector<double> const& eff() const { return eff_; }

    // Probability that a single photon is detected somewhere in the subset
    double detection_weight(BranchSet subset) const;

    bool operator==(DetectorTree const&) const = default;

  private:
    std::vector<double> split_;
    std::vector<double> eff_;
};

//---------------------------------------------------------------------------//
//! Value with a one-sigma uncertainty (zero for theory).
struct Measured
{
    double value{0};
    double sigma{0};

    bool operator==(Measured const&) const = default;
};

//! What kind of g^(K) a correlation set carries.
enum class GBasis
{
    photon_number,  //!< factorial-moment ratio, independent of the tree
    click,  //!< subset-averaged coincidence ratio of click probabilities
};

std::string_view to_string(GBasis basis);
GBasis g_basis_from_string(std::string_view name);

/*!
 * Bundle of correlation statistics for one field seen through one tree.
 *
 * Theta is kept per branch subset; it is never averaged across subsets.
 */
struct CorrelationSet
{
    int n_branches{0};
    GBasis g_basis{GBasis::photon_number};
    std::map<int, Measured> g;
    std::map<BranchSet, Measured> theta;
    std::vector<double> q_click;
    std::vector<double> q_noclick;
    double q_noclick_all{1};
    std::uint64_t n_pulses{0};
};

//---------------------------------------------------------------------------//
// g^(K)(0) = f^(K) / (f^(1))^K from field factorial moments
double g_theory(FieldSpec const& field, int order);

// No-click probability of every branch in the subset: G(1 - sum eta_i t_i)
double q_noclick_subset(FieldSpec const& field,
                        DetectorTree const& tree,
                        BranchSet subset);

// Q_S(0) / prod_{i in S} Q_i(0)
double theta_theory(FieldSpec const& field,
                    DetectorTree const& tree,
                    BranchSet subset);

// Expected click-based g^(K): subset average of P(all click)/prod P(click)
double g_click_theory(FieldSpec const& field,
                      DetectorTree const& tree,
                      int order);

CorrelationSet correlation_set_theory(FieldSpec const& field,
                                      DetectorTree const& tree,
                                      int k_max,
                                      GBasis basis = GBasis::photon_number);

//---------------------------------------------------------------------------//
/*!
 * Probability that every branch in the subset clicks, by inclusion-exclusion
 * over the no-click probabilities of its sub-subsets.
 */
template<class NoClickFn>
double all_click_probability(NoClickFn&& q_noclick, BranchSet subset)
{
    double total = 0;
    // Enumerate sub-subsets T of S including the empty set
    std::uint32_t t = subset.bits;
    while (true)
    {
        BranchSet sub{t};
        double q = sub.empty() ? 1.0 : q_noclick(sub);
        total += (sub.size() % 2 == 0) ? q : -q;
        if (t == 0)
            break;
        t = (t - 1) & subset.bits;
    }
    return total;
}

//---------------------------------------------------------------------------//
}  // namespace modrec
