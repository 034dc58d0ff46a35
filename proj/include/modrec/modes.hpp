//---------------------------------------------------------------------------//
//! \file modrec/modes.hpp
//! Statistical optical modes and their photon-number laws.
//---------------------------------------------------------------------------//
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace modrec
{
//---------------------------------------------------------------------------//
enum class ModeKind
{
    poissonian,
    thermal,
    single_photon,
};

std::string_view to_string(ModeKind kind);
ModeKind mode_kind_from_string(std::string_view name);

//---------------------------------------------------------------------------//
/*!
 * One statistical mode of the field.
 *
 * The parameter is the mean photon number per pulse for every kind; for a
 * single-photon mode it is also the emission probability and therefore lies
 * in [0, 1]. An ensemble of M identical emitters is M single-photon modes.
 */
class OpticalMode
{
  public:
    OpticalMode(ModeKind kind, double param);

    static OpticalMode poissonian(double mu) { return {ModeKind::poissonian, mu}; }
    static OpticalMode thermal(double nu) { return {ModeKind::thermal, nu}; }
    static OpticalMode single_photon(double p)
    {
        return {ModeKind::single_photon, p};
    }

    ModeKind kind() const { return kind_; }
    double param() const { return param_; }
    double mean() const { return param_; }

    // Probability of exactly n photons
    double pmf(std::size_t n) const;

    bool operator==(OpticalMode const&) const = default;

  private:
    ModeKind kind_;
    double param_;
};

//---------------------------------------------------------------------------//
/*!
 * Ordered set of independent modes composing a field.
 *
 * At most one Poissonian mode is allowed: a sum of Poissonians is itself
 * Poissonian, so callers must merge them explicitly. An empty list is the
 * vacuum.
 */
class FieldSpec
{
  public:
    FieldSpec() = default;
    explicit FieldSpec(std::vector<OpticalMode> modes);

    std::span<OpticalMode const> modes() const { return modes_; }
    std::size_t size() const { return modes_.size(); }
    bool empty() const { return modes_.empty(); }
    double mean() const;

    // Copy with an extra mode appended (validated)
    FieldSpec with(OpticalMode mode) const;

    bool operator==(FieldSpec const&) const = default;

  private:
    std::vector<OpticalMode> modes_;
};

//---------------------------------------------------------------------------//
struct PhotonDistribution
{
    std::vector<double> probs;  //!< p_0..p_nmax
    double truncation_deficit{0};  //!< 1 - sum(probs), clamped at 0
    bool truncation_warning{false};  //!< deficit above the configured bound
};

inline constexpr double default_truncation_bound = 1e-10;
inline constexpr std::size_t max_auto_n_max = 200;

// Photon-number generating function sum_n p_n x^n for x in [0, 1]
double pgf_eval(OpticalMode const& mode, double x);

// Generating function of the whole field (product over modes)
double pgf_eval(FieldSpec const& field, double x);

// Factorial moments E{n!/(n-k)!} for k = 1..k_max
std::vector<double> factorial_moments(OpticalMode const& mode, int k_max);

// Field factorial moments via the Leibniz product rule, f^(0) = 1
std::vector<double> field_factorial_moments(FieldSpec const& field, int k_max);

// Truncated photon-number law of the field
PhotonDistribution
pn_distribution(FieldSpec const& field,
                std::size_t n_max,
                double warn_bound = default_truncation_bound);

// Smallest n_max with deficit below bound, capped at max_auto_n_max
std::size_t auto_n_max(FieldSpec const& field,
                       double bound = default_truncation_bound);

//---------------------------------------------------------------------------//
}  // namespace modrec
