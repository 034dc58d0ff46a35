//---------------------------------------------------------------------------//
//! \file modrec/rng.hpp
//! Counter-based random stream keyed by (seed, stream index).
//---------------------------------------------------------------------------//
#pragma once

#include <cstdint>
#include <limits>

namespace modrec
{
//---------------------------------------------------------------------------//
//! SplitMix64 finalizer (see https://prng.di.unimi.it).
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

//---------------------------------------------------------------------------//
/*!
 * Counter-based generator: the i-th output of stream (seed, stream) is
 * mix64(key + (i + 1) * gamma), with the key derived from both inputs.
 *
 * Any stream can be positioned without generating its predecessors, so
 * independent work units (e.g. pulse chunks) each get their own stream and
 * results do not depend on how the units are scheduled.
 */
class CounterRng
{
  public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ull)))
    {
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max()
    {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()()
    {
        return mix64(key_ + (++counter_) * gamma);
    }

    //! Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    std::uint64_t counter() const { return counter_; }

  private:
    static constexpr std::uint64_t gamma = 0x9e3779b97f4a7c15ull;
    std::uint64_t key_;
    std::uint64_t counter_{0};
};

//---------------------------------------------------------------------------//
}  // namespace modrec
