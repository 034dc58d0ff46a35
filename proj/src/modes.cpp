//---------------------------------------------------------------------------//
//! \file modes.cpp
//---------------------------------------------------------------------------//
#include "modrec/modes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "modrec/errors.hpp"

namespace modrec
{
//---------------------------------------------------------------------------//
std::string_view to_string(ModeKind kind)
{
    switch (kind)
    {
        case ModeKind::poissonian:
            return "poissonian";
        case ModeKind::thermal:
            return "thermal";
        case ModeKind::single_photon:
            return "single_photon";
    }
    return "unknown";
}

ModeKind mode_kind_from_string(std::string_view name)
{
    if (name == "poissonian" || name == "poi" || name == "coherent")
        return ModeKind::poissonian;
    if (name == "thermal" || name == "th")
        return ModeKind::thermal;
    if (name == "single_photon" || name == "single-photon" || name == "sps")
        return ModeKind::single_photon;
    throw ValidationError("unknown mode kind '" + std::string(name) + "'");
}

//---------------------------------------------------------------------------//
OpticalMode::OpticalMode(ModeKind kind, double param)
    : kind_(kind), param_(param)
{
    if (!(param >= 0) || !std::isfinite(param))
    {
        throw ValidationError("mode parameter must be finite and >= 0, got "
                              + std::to_string(param));
    }
    if (kind == ModeKind::single_photon && param > 1)
    {
        throw ValidationError(
            "single-photon emission probability must lie in [0, 1], got "
            + std::to_string(param));
    }
}

double OpticalMode::pmf(std::size_t n) const
{
    switch (kind_)
    {
        case ModeKind::poissonian: {
            if (param_ == 0)
                return n == 0 ? 1.0 : 0.0;
            auto dn = static_cast<double>(n);
            return std::exp(dn * std::log(param_) - param_
                            - std::lgamma(dn + 1));
        }
        case ModeKind::thermal: {
            auto dn = static_cast<double>(n);
            return std::pow(param_ / (1 + param_), dn) / (1 + param_);
        }
        case ModeKind::single_photon:
            return n == 0 ? 1 - param_ : (n == 1 ? param_ : 0.0);
    }
    return 0;
}

//---------------------------------------------------------------------------//
FieldSpec::FieldSpec(std::vector<OpticalMode> modes) : modes_(std::move(modes))
{
    auto n_poi = std::count_if(modes_.begin(), modes_.end(), [](auto const& m) {
        return m.kind() == ModeKind::poissonian;
    });
    if (n_poi > 1)
    {
        throw ValidationError(
            "a field may hold at most one Poissonian mode (a sum of "
            "Poissonians is Poissonian; merge them into one mode)");
    }
}

double FieldSpec::mean() const
{
    return std::accumulate(modes_.begin(),
                           modes_.end(),
                           0.0,
                           [](double acc, auto const& m) { return acc + m.mean(); });
}

FieldSpec FieldSpec::with(OpticalMode mode) const
{
    auto modes = modes_;
    modes.push_back(mode);
    return FieldSpec(std::move(modes));
}

//---------------------------------------------------------------------------//
double pgf_eval(OpticalMode const& mode, double x)
{
    if (!(x >= 0 && x <= 1))
    {
        throw DomainError("generating function argument must lie in [0, 1], got "
                          + std::to_string(x));
    }
    double const y = 1 - x;
    switch (mode.kind())
    {
        case ModeKind::poissonian:
            return std::exp(-mode.param() * y);
        case ModeKind::thermal:
            return 1 / (1 + mode.param() * y);
        case ModeKind::single_photon:
            return 1 - mode.param() * y;
    }
    return 0;
}

double pgf_eval(FieldSpec const& field, double x)
{
    double result = 1;
    for (auto const& m : field.modes())
        result *= pgf_eval(m, x);
    return result;
}

//---------------------------------------------------------------------------//
std::vector<double> factorial_moments(OpticalMode const& mode, int k_max)
{
    if (k_max < 1)
        throw DomainError("k_max must be >= 1");

    std::vector<double> result(static_cast<std::size_t>(k_max), 0.0);
    double const v = mode.param();
    switch (mode.kind())
    {
        case ModeKind::poissonian: {
            double acc = 1;
            for (auto& f : result)
                f = (acc *= v);
            break;
        }
        case ModeKind::thermal: {
            double acc = 1;
            int k = 0;
            for (auto& f : result)
                f = (acc *= ++k * v);
            break;
        }
        case ModeKind::single_photon:
            result[0] = v;
            break;
    }
    return result;
}

std::vector<double> field_factorial_moments(FieldSpec const& field, int k_max)
{
    if (k_max < 1)
        throw DomainError("k_max must be >= 1");
    auto const len = static_cast<std::size_t>(k_max) + 1;

    // Binomial coefficients up to k_max
    std::vector<std::vector<double>> binom(len, std::vector<double>(len, 0.0));
    for (std::size_t n = 0; n < len; ++n)
    {
        binom[n][0] = binom[n][n] = 1;
        for (std::size_t j = 1; j < n; ++j)
            binom[n][j] = binom[n - 1][j - 1] + binom[n - 1][j];
    }

    // Running product of generating functions; index 0 holds f^(0) = 1
    std::vector<double> acc(len, 0.0);
    acc[0] = 1;
    for (auto const& mode : field.modes())
    {
        std::vector<double> single(len);
        single[0] = 1;
        auto fm = factorial_moments(mode, k_max);
        std::copy(fm.begin(), fm.end(), single.begin() + 1);

        std::vector<double> next(len, 0.0);
        for (std::size_t k = 0; k < len; ++k)
        {
            for (std::size_t j = 0; j <= k; ++j)
                next[k] += binom[k][j] * acc[j] * single[k - j];
        }
        acc = std::move(next);
    }
    return {acc.begin() + 1, acc.end()};
}

//---------------------------------------------------------------------------//
PhotonDistribution
pn_distribution(FieldSpec const& field, std::size_t n_max, double warn_bound)
{
    PhotonDistribution result;
    result.probs.assign(n_max + 1, 0.0);
    result.probs[0] = 1;

    std::vector<double> law(n_max + 1);
    std::vector<double> next(n_max + 1);
    for (auto const& mode : field.modes())
    {
        for (std::size_t n = 0; n <= n_max; ++n)
            law[n] = mode.pmf(n);
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t n = 0; n <= n_max; ++n)
        {
            for (std::size_t k = 0; k <= n; ++k)
                next[n] += result.probs[k] * law[n - k];
        }
        result.probs.swap(next);
    }

    double total = std::accumulate(result.probs.begin(), result.probs.end(), 0.0);
    result.truncation_deficit = std::max(0.0, 1 - total);
    result.truncation_warning = result.truncation_deficit > warn_bound;
    return result;
}

std::size_t auto_n_max(FieldSpec const& field, double bound)
{
    // Cheap growth: the deficit is monotone in n_max, so double then bisect.
    auto deficit = [&](std::size_t n) {
        return pn_distribution(field, n, 1.0).truncation_deficit;
    };
    std::size_t hi = 8;
    while (hi < max_auto_n_max && deficit(hi) >= bound)
        hi = std::min(max_auto_n_max, hi * 2);
    if (deficit(hi) >= bound)
        return max_auto_n_max;
    std::size_t lo = 0;
    while (lo < hi)
    {
        std::size_t mid = (lo + hi) / 2;
        if (deficit(mid) < bound)
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo;
}

//---------------------------------------------------------------------------//
}  // namespace modrec
