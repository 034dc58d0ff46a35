//---------------------------------------------------------------------------//
//! \file simulator.cpp
//---------------------------------------------------------------------------//
#include "modrec/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "modrec/correlations.hpp"
#include "modrec/errors.hpp"
#include "modrec/rng.hpp"

namespace modrec
{
//---------------------------------------------------------------------------//
ClickTally::ClickTally(int n_branches)
    : n_branches_(n_branches), counts_(std::size_t{1} << n_branches, 0)
{
    if (n_branches < 1 || n_branches > 16)
        throw ValidationError("click tally needs between 1 and 16 branches");
}

ClickTally::ClickTally(int n_branches, std::vector<std::uint64_t> counts)
    : ClickTally(n_branches)
{
    if (counts.size() != counts_.size())
    {
        throw ValidationError("click tally needs exactly 2^N = "
                              + std::to_string(counts_.size()) + " counts");
    }
    counts_ = std::move(counts);
    for (auto c : counts_)
        n_pulses_ += c;
}

void ClickTally::add(std::uint32_t pattern, std::uint64_t count)
{
    counts_.at(pattern) += count;
    n_pulses_ += count;
}

ClickTally& ClickTally::operator+=(ClickTally const& other)
{
    if (other.n_branches_ != n_branches_)
        throw ValidationError("cannot merge tallies of different tree sizes");
    for (std::size_t i = 0; i < counts_.size(); ++i)
        counts_[i] += other.counts_[i];
    n_pulses_ += other.n_pulses_;
    return *this;
}

//---------------------------------------------------------------------------//
namespace
{
//! Per-mode photon-number sampler with precomputed constants.
class PhotonSampler
{
  public:
    explicit PhotonSampler(OpticalMode const& mode)
        : kind_(mode.kind()), param_(mode.param())
    {
        if (kind_ == ModeKind::thermal && param_ > 0)
            log_ratio_ = std::log(param_ / (1 + param_));
        if (kind_ == ModeKind::poissonian)
        {
            // Split large means into equal Poissonian parts to keep the
            // inversion well-conditioned
            parts_ = std::max(1, static_cast<int>(std::ceil(param_ / 20)));
            exp_neg_ = std::exp(-param_ / parts_);
            part_mean_ = param_ / parts_;
        }
    }

    unsigned int operator()(CounterRng& rng) const
    {
        switch (kind_)
        {
            case ModeKind::single_photon:
                return rng.uniform() < param_ ? 1u : 0u;
            case ModeKind::thermal: {
                if (param_ == 0)
                    return 0;
                // Geometric law: P(n >= k) = (nu / (1 + nu))^k
                double u = 1 - rng.uniform();  // (0, 1]
                return static_cast<unsigned int>(std::floor(std::log(u) / log_ratio_));
            }
            case ModeKind::poissonian: {
                if (param_ == 0)
                    return 0;
                unsigned int total = 0;
                for (int part = 0; part < parts_; ++part)
                {
                    double u = rng.uniform();
                    double p = exp_neg_;
                    double cdf = p;
                    unsigned int n = 0;
                    while (u >= cdf && p > 0)
                    {
                        ++n;
                        p *= part_mean_ / n;
                        cdf += p;
                    }
                    total += n;
                }
                return total;
            }
        }
        return 0;
    }

  private:
    ModeKind kind_;
    double param_;
    double log_ratio_{0};
    int parts_{1};
    double exp_neg_{1};
    double part_mean_{0};
};

struct PulseKernel
{
    std::vector<PhotonSampler> samplers;
    std::vector<double> cumulative;  //!< cumulative t_i * eta_i

    std::uint32_t pulse(CounterRng& rng) const
    {
        unsigned int photons = 0;
        for (auto const& s : samplers)
            photons += s(rng);

        std::uint32_t pattern = 0;
        for (unsigned int k = 0; k < photons; ++k)
        {
            // One uniform routes the photon and decides its detection:
            // branch i detects it with probability t_i * eta_i
            double u = rng.uniform();
            auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
            if (it != cumulative.end())
                pattern |= 1u << (it - cumulative.begin());
        }
        return pattern;
    }
};

ClickTally run_chunk(PulseKernel const& kernel,
                     int n_branches,
                     std::uint64_t seed,
                     std::uint64_t chunk,
                     std::uint64_t n)
{
    ClickTally tally(n_branches);
    CounterRng rng(seed, chunk);
    for (std::uint64_t i = 0; i < n; ++i)
        tally.add(kernel.pulse(rng));
    return tally;
}

}  // namespace

//---------------------------------------------------------------------------//
ClickTally simulate_pulses(FieldSpec const& field,
                           DetectorTree const& tree,
                           std::uint64_t n_pulses,
                           std::uint64_t seed,
                           SimulationOptions const& options)
{
    if (options.chunk_size == 0)
        throw ValidationError("simulation chunk size must be positive");
    int const n = tree.n_branches();

    PulseKernel kernel;
    for (auto const& m : field.modes())
        kernel.samplers.emplace_back(m);
    double acc = 0;
    for (int i = 0; i < n; ++i)
    {
        acc += tree.split()[static_cast<std::size_t>(i)]
               * tree.eff()[static_cast<std::size_t>(i)];
        kernel.cumulative.push_back(acc);
    }

    std::uint64_t const n_chunks = (n_pulses + options.chunk_size - 1)
                                   / options.chunk_size;
    auto chunk_len = [&](std::uint64_t c) {
        return std::min(options.chunk_size, n_pulses - c * options.chunk_size);
    };

    unsigned int workers = options.workers;
    if (workers == 0)
        workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned int>(
        std::min<std::uint64_t>(workers, std::max<std::uint64_t>(1, n_chunks)));

    // Chunk c is always simulated from stream (seed, c); workers take chunks
    // round-robin and the integer tallies are summed, so the result does not
    // depend on the worker count.
    std::vector<ClickTally> partial(workers, ClickTally(n));
    auto work = [&](unsigned int w) {
        for (std::uint64_t c = w; c < n_chunks; c += workers)
            partial[w] += run_chunk(kernel, n, seed, c, chunk_len(c));
    };
    if (workers == 1)
    {
        work(0);
    }
    else
    {
        std::vector<std::jthread> threads;
        for (unsigned int w = 0; w < workers; ++w)
            threads.emplace_back(work, w);
    }

    ClickTally total(n);
    for (auto const& p : partial)
        total += p;
    return total;
}

//---------------------------------------------------------------------------//
PatternDistribution exact_click_distribution(FieldSpec const& field,
                                             DetectorTree const& tree,
                                             std::optional<std::size_t> n_max)
{
    int const n = tree.n_branches();
    std::uint32_t const full = (1u << n) - 1u;
    auto law = pn_distribution(field, n_max ? *n_max : auto_n_max(field));

    // Closed-form no-click probability of every subset; the truncated law
    // only feeds the deficit report
    std::vector<double> q(std::size_t{1} << n, 1.0);
    for (std::uint32_t s = 1; s <= full; ++s)
        q[s] = q_noclick_subset(field, tree, BranchSet{s});

    PatternDistribution result;
    result.probs.resize(q.size());
    for (std::uint32_t c = 0; c <= full; ++c)
    {
        // Exactly pattern c: no click outside c, every branch of c clicks
        std::uint32_t const outside = full & ~c;
        double p = 0;
        std::uint32_t t = c;
        while (true)
        {
            double qt = q[outside | t];
            p += (std::popcount(t) % 2 == 0) ? qt : -qt;
            if (t == 0)
                break;
            t = (t - 1) & c;
        }
        result.probs[c] = std::max(0.0, p);
    }
    result.truncation_deficit = law.truncation_deficit;
    result.truncation_warning = law.truncation_warning;
    return result;
}

//---------------------------------------------------------------------------//
}  // namespace modrec
