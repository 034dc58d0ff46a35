//---------------------------------------------------------------------------//
//! \file estimators.cpp
//---------------------------------------------------------------------------//
#include "modrec/estimators.hpp"

#include <cmath>
#include <functional>
#include <random>

#include "modrec/errors.hpp"
#include "modrec/rng.hpp"

namespace modrec
{
namespace
{
//---------------------------------------------------------------------------//
// Sum over all patterns that are subsets of each mask
std::vector<double> subset_sums(std::span<double const> freq, int n)
{
    std::vector<double> s(freq.begin(), freq.end());
    for (int i = 0; i < n; ++i)
    {
        for (std::uint32_t m = 0; m < s.size(); ++m)
        {
            if (m >> i & 1u)
                s[m] += s[m ^ (1u << i)];
        }
    }
    return s;
}

// Sum over all patterns that are supersets of each mask
std::vector<double> superset_sums(std::span<double const> freq, int n)
{
    std::vector<double> s(freq.begin(), freq.end());
    for (int i = 0; i < n; ++i)
    {
        for (std::uint32_t m = 0; m < s.size(); ++m)
        {
            if (!(m >> i & 1u))
                s[m] += s[m | (1u << i)];
        }
    }
    return s;
}

void check_freq(std::span<double const> freq, int n)
{
    if (freq.size() != (std::size_t{1} << n))
        throw ValidationError("pattern frequencies need 2^N entries");
}

std::vector<double> normalized(ClickTally const& tally)
{
    if (tally.n_pulses() == 0)
        throw EmptyTallyError("click tally holds no pulses");
    std::vector<double> freq;
    freq.reserve(tally.counts().size());
    auto total = static_cast<double>(tally.n_pulses());
    for (auto c : tally.counts())
        freq.push_back(static_cast<double>(c) / total);
    return freq;
}

// Per-subset g values given precomputed superset sums
std::vector<double>
g_subsets(std::vector<double> const& allclick, int n, int order)
{
    std::vector<double> result;
    for (auto s : subsets_of_size(n, order))
    {
        double denom = 1;
        for (int i : s.indices())
            denom *= allclick[1u << i];
        if (!(denom > 0))
        {
            throw ZeroSinglesError("branch never clicks; g^("
                                   + std::to_string(order)
                                   + ") is undefined for subset "
                                   + s.label());
        }
        result.push_back(allclick[s.bits] / denom);
    }
    return result;
}

double theta_of(std::vector<double> const& noclick_sub, int n, BranchSet subset)
{
    std::uint32_t const full = (1u << n) - 1u;
    double denom = 1;
    for (int i : subset.indices())
        denom *= noclick_sub[full ^ (1u << i)];
    if (!(denom > 0))
    {
        throw DomainError("theta undefined for subset " + subset.label()
                          + ": a branch always clicks");
    }
    return noclick_sub[full ^ subset.bits] / denom;
}

//---------------------------------------------------------------------------//
/*!
 * Pulse-level bootstrap: resample the pattern histogram multinomially and
 * return the standard deviation of each statistic across resamples.
 *
 * Resamples for which a statistic is undefined are skipped.
 */
std::vector<double>
bootstrap_sigmas(ClickTally const& tally,
                 BootstrapConfig const& boot,
                 std::function<std::vector<double>(std::span<double const>)> const& stats)
{
    if (boot.n_resamples < 2)
        throw ValidationError("bootstrap needs at least 2 resamples");

    auto const& counts = tally.counts();
    auto const total = tally.n_pulses();
    std::vector<double> sum, sum_sq;
    int used = 0;
    std::vector<double> freq(counts.size());
    std::size_t last_nonzero = 0;
    for (std::size_t c = 0; c < counts.size(); ++c)
    {
        if (counts[c] > 0)
            last_nonzero = c;
    }

    for (int r = 0; r < boot.n_resamples; ++r)
    {
        CounterRng rng(boot.seed, static_cast<std::uint64_t>(r));
        // Multinomial draw as a chain of conditional binomials
        std::uint64_t remaining = total;
        double mass_left = 1;
        for (std::size_t c = 0; c < counts.size(); ++c)
        {
            double p = static_cast<double>(counts[c]) / static_cast<double>(total);
            std::uint64_t k = 0;
            if (remaining > 0 && p > 0)
            {
                double cond = c == last_nonzero ? 1.0
                                                     : std::min(1.0, p / mass_left);
                std::binomial_distribution<std::uint64_t> draw(remaining, cond);
                k = draw(rng);
            }
            freq[c] = static_cast<double>(k) / static_cast<double>(total);
            remaining -= k;
            mass_left -= p;
        }

        std::vector<double> values;
        try
        {
            values = stats(freq);
        }
        catch (Error const&)
        {
            continue;
        }
        if (sum.empty())
        {
            sum.assign(values.size(), 0.0);
            sum_sq.assign(values.size(), 0.0);
        }
        for (std::size_t i = 0; i < values.size(); ++i)
        {
            sum[i] += values[i];
            sum_sq[i] += values[i] * values[i];
        }
        ++used;
    }

    std::vector<double> sigma(sum.size(), 0.0);
    if (used < 2)
        return sigma;
    for (std::size_t i = 0; i < sum.size(); ++i)
    {
        double mean = sum[i] / used;
        double var = (sum_sq[i] - used * mean * mean) / (used - 1);
        sigma[i] = std::sqrt(std::max(0.0, var));
    }
    return sigma;
}

}  // namespace

//---------------------------------------------------------------------------//
ClickMarginals estimate_q(ClickTally const& tally)
{
    auto freq = normalized(tally);
    int const n = tally.n_branches();
    std::uint32_t const full = (1u << n) - 1u;
    auto noclick_sub = subset_sums(freq, n);
    auto allclick = superset_sums(freq, n);

    ClickMarginals result;
    for (int i = 0; i < n; ++i)
    {
        std::uint64_t clicks = 0;
        for (std::uint32_t p = 0; p <= full; ++p)
        {
            if (p >> i & 1u)
                clicks += tally.counts()[p];
        }
        // fl(fl(1 - a) + a) == 1 for a in [0, 1], so the pair sums to 1
        double q1 = static_cast<double>(clicks)
                    / static_cast<double>(tally.n_pulses());
        result.q_click.push_back(q1);
        result.q_noclick.push_back(1 - q1);
    }
    for (std::uint32_t s = 1; s <= full; ++s)
    {
        result.q_noclick_subset[{s}] = noclick_sub[full ^ s];
        result.q_allclick_subset[{s}] = allclick[s];
    }
    return result;
}

double g_from_frequencies(std::span<double const> freq, int n_branches, int order)
{
    auto values = g_subsets_from_frequencies(freq, n_branches, order);
    double sum = 0;
    for (double v : values)
        sum += v;
    return sum / static_cast<double>(values.size());
}

std::vector<double>
g_subsets_from_frequencies(std::span<double const> freq, int n_branches, int order)
{
    check_freq(freq, n_branches);
    if (order < 2 || order > n_branches)
        throw DomainError("g^(K) estimator needs 2 <= K <= N");
    return g_subsets(superset_sums(freq, n_branches), n_branches, order);
}

double theta_from_frequencies(std::span<double const> freq,
                              int n_branches,
                              BranchSet subset)
{
    check_freq(freq, n_branches);
    if (subset.size() < 2 || (subset.bits >> n_branches))
        throw DomainError("theta estimator needs a valid subset of >= 2 branches");
    return theta_of(subset_sums(freq, n_branches), n_branches, subset);
}

//---------------------------------------------------------------------------//
Measured estimate_g(ClickTally const& tally, int order, BootstrapConfig const& boot)
{
    auto freq = normalized(tally);
    int const n = tally.n_branches();
    Measured result;
    result.value = g_from_frequencies(freq, n, order);
    result.sigma = bootstrap_sigmas(tally, boot, [&](std::span<double const> f) {
                       return std::vector<double>{g_from_frequencies(f, n, order)};
                   }).at(0);
    return result;
}

Measured estimate_theta(ClickTally const& tally, BranchSet subset, BootstrapConfig const& boot)
{
    auto freq = normalized(tally);
    int const n = tally.n_branches();
    Measured result;
    result.value = theta_from_frequencies(freq, n, subset);
    result.sigma = bootstrap_sigmas(tally, boot, [&](std::span<double const> f) {
                       return std::vector<double>{theta_from_frequencies(f, n, subset)};
                   }).at(0);
    return result;
}

CorrelationSet correlation_set_estimate(ClickTally const& tally, BootstrapConfig const& boot)
{
    auto freq = normalized(tally);
    int const n = tally.n_branches();
    if (n < 2)
        throw ValidationError("correlation set needs at least two branches");

    std::vector<BranchSet> theta_subsets;
    for (int k = 2; k <= n; ++k)
    {
        for (auto s : subsets_of_size(n, k))
            theta_subsets.push_back(s);
    }

    // All statistics in one vector: g for K = 2..N, then theta per subset
    auto all_stats = [&](std::span<double const> f) {
        auto allclick = superset_sums(f, n);
        auto noclick_sub = subset_sums(f, n);
        std::vector<double> out;
        for (int k = 2; k <= n; ++k)
        {
            auto per = g_subsets(allclick, n, k);
            double sum = 0;
            for (double v : per)
                sum += v;
            out.push_back(sum / static_cast<double>(per.size()));
        }
        for (auto s : theta_subsets)
            out.push_back(theta_of(noclick_sub, n, s));
        return out;
    };

    auto values = all_stats(freq);
    auto sigmas = bootstrap_sigmas(tally, boot, all_stats);

    CorrelationSet result;
    result.n_branches = n;
    result.g_basis = GBasis::click;
    result.n_pulses = tally.n_pulses();
    std::size_t idx = 0;
    for (int k = 2; k <= n; ++k, ++idx)
        result.g[k] = {values[idx], sigmas[idx]};
    for (auto s : theta_subsets)
    {
        result.theta[s] = {values[idx], sigmas[idx]};
        ++idx;
    }

    auto marg = estimate_q(tally);
    result.q_click = marg.q_click;
    result.q_noclick = marg.q_noclick;
    result.q_noclick_all = marg.q_noclick_subset.at(BranchSet::all(n));
    return result;
}

//---------------------------------------------------------------------------//
}  // namespace modrec
