//---------------------------------------------------------------------------//
//! \file correlations.cpp
//---------------------------------------------------------------------------//
#include "modrec/correlations.hpp"

#include <cmath>
#include <numeric>

#include "modrec/errors.hpp"

namespace modrec
{
namespace
{
constexpr int max_branches = 16;
constexpr double split_tolerance = 1e-12;

double require_mean(FieldSpec const& field)
{
    double mean = field.mean();
    if (!(mean > 0))
    {
        throw UndefinedStatistic(
            "correlation statistics are undefined for a field with zero mean "
            "photon number");
    }
    return mean;
}

}  // namespace

//---------------------------------------------------------------------------//
std::vector<int> BranchSet::indices() const
{
    std::vector<int> result;
    for (int i = 0; i < 32; ++i)
    {
        if (contains(i))
            result.push_back(i);
    }
    return result;
}

std::string BranchSet::label() const
{
    std::string result;
    for (int i : indices())
    {
        if (!result.empty())
            result += '-';
        result += std::to_string(i + 1);
    }
    return result;
}

std::vector<BranchSet> subsets_of_size(int n_branches, int size)
{
    std::vector<BranchSet> result;
    for (std::uint32_t bits = 0; bits < (1u << n_branches); ++bits)
    {
        if (std::popcount(bits) == size)
            result.push_back({bits});
    }
    return result;
}

//---------------------------------------------------------------------------//
DetectorTree::DetectorTree(std::vector<double> split, std::vector<double> eff)
    : split_(std::move(split)), eff_(std::move(eff))
{
    if (split_.size() < 2 || split_.size() > max_branches)
    {
        throw ValidationError("detector tree needs between 2 and "
                              + std::to_string(max_branches) + " branches");
    }
    if (eff_.size() != split_.size())
    {
        throw ValidationError(
            "detector tree 'eff' must have one entry per branch of 'split'");
    }
    double sum = 0;
    for (double t : split_)
    {
        if (!(t >= 0))
            throw ValidationError("detector tree 'split' entries must be >= 0");
        sum += t;
    }
    if (std::abs(sum - 1) > split_tolerance)
    {
        throw ValidationError("detector tree 'split' must sum to 1, got "
                              + std::to_string(sum));
    }
    for (double e : eff_)
    {
        if (!(e > 0 && e <= 1))
            throw ValidationError("detector tree 'eff' entries must lie in (0, 1]");
    }
}

DetectorTree DetectorTree::uniform(int n_branches, double eff)
{
    if (n_branches < 2)
        throw ValidationError("detector tree needs at least 2 branches");
    auto n = static_cast<std::size_t>(n_branches);
    return DetectorTree(std::vector<double>(n, 1.0 / n_branches),
                        std::vector<double>(n, eff));
}

double DetectorTree::detection_weight(BranchSet subset) const
{
    double w = 0;
    for (int i : subset.indices())
    {
        if (i >= n_branches())
            throw DomainError("branch index out of range for detector tree");
        w += split_[static_cast<std::size_t>(i)] * eff_[static_cast<std::size_t>(i)];
    }
    return w;
}

//---------------------------------------------------------------------------//
std::string_view to_string(GBasis basis)
{
    return basis == GBasis::click ? "click" : "photon_number";
}

GBasis g_basis_from_string(std::string_view name)
{
    if (name == "click")
        return GBasis::click;
    if (name == "photon_number" || name == "photon-number")
        return GBasis::photon_number;
    throw ValidationError("unknown g basis '" + std::string(name) + "'");
}

//---------------------------------------------------------------------------//
double g_theory(FieldSpec const& field, int order)
{
    if (order < 2)
        throw DomainError("g^(K) needs K >= 2");
    double mean = require_mean(field);
    auto fm = field_factorial_moments(field, order);
    return fm.back() / std::pow(mean, order);
}

double q_noclick_subset(FieldSpec const& field,
                        DetectorTree const& tree,
                        BranchSet subset)
{
    if (subset.empty())
        throw DomainError("no-click probability needs a non-empty subset");
    if (subset.bits >> tree.n_branches())
        throw DomainError("branch index out of range for detector tree");
    // Rounding can push the weight a hair above 1 for a lossless full tree
    double x = std::max(0.0, 1 - tree.detection_weight(subset));
    return pgf_eval(field, x);
}

double theta_theory(FieldSpec const& field,
                    DetectorTree const& tree,
                    BranchSet subset)
{
    if (subset.size() < 2)
        throw DomainError("theta^(K) needs a subset of at least two branches");
    double denom = 1;
    for (int i : subset.indices())
        denom *= q_noclick_subset(field, tree, BranchSet::single(i));
    if (!(denom > 0))
    {
        throw DomainError("theta^(K) undefined: a single-branch no-click "
                          "probability is zero");
    }
    return q_noclick_subset(field, tree, subset) / denom;
}

double g_click_theory(FieldSpec const& field, DetectorTree const& tree, int order)
{
    if (order < 2 || order > tree.n_branches())
        throw DomainError("click g^(K) needs 2 <= K <= N");
    require_mean(field);
    auto q = [&](BranchSet s) { return q_noclick_subset(field, tree, s); };

    auto subsets = subsets_of_size(tree.n_branches(), order);
    double sum = 0;
    for (auto s : subsets)
    {
        double denom = 1;
        for (int i : s.indices())
            denom *= 1 - q(BranchSet::single(i));
        if (!(denom > 0))
            throw UndefinedStatistic("click g^(K) undefined: a branch never clicks");
        sum += all_click_probability(q, s) / denom;
    }
    return sum / static_cast<double>(subsets.size());
}

CorrelationSet correlation_set_theory(FieldSpec const& field,
                                      DetectorTree const& tree,
                                      int k_max,
                                      GBasis basis)
{
    int const n = tree.n_branches();
    if (k_max < 2 || k_max > n)
        throw DomainError("correlation set needs 2 <= k_max <= N");
    require_mean(field);

    CorrelationSet result;
    result.n_branches = n;
    result.g_basis = basis;
    for (int k = 2; k <= k_max; ++k)
    {
        double g = basis == GBasis::click ? g_click_theory(field, tree, k)
                                          : g_theory(field, k);
        result.g[k] = {g, 0};
        for (auto s : subsets_of_size(n, k))
            result.theta[s] = {theta_theory(field, tree, s), 0};
    }
    for (int i = 0; i < n; ++i)
    {
        double q0 = q_noclick_subset(field, tree, BranchSet::single(i));
        result.q_noclick.push_back(q0);
        result.q_click.push_back(1 - q0);
    }
    result.q_noclick_all = q_noclick_subset(field, tree, BranchSet::all(n));
    return result;
}

//---------------------------------------------------------------------------//
}  // namespace modrec
