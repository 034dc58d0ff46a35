//---------------------------------------------------------------------------//
//! \file modrec/reconstruct.hpp
//! Mode-structure reconstruction by least-squares model selection.
//---------------------------------------------------------------------------//
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "correlations.hpp"
#include "modes.hpp"
#include "optimize.hpp"

namespace modrec
{
//---------------------------------------------------------------------------//
//! Count of Poissonian, thermal and single-photon modes in a candidate model.
struct ModelFamily
{
    int n_poi{0};
    int n_th{0};
    int n_sps{0};

    int size() const { return n_poi + n_th + n_sps; }
    std::string label() const;

    // Family of an explicit field (its mode kinds)
    static ModelFamily of(FieldSpec const& field);

    auto operator<=>(ModelFamily const&) const = default;
};

// Families with 1 <= S <= s_max (or S == exact_s), ordered by total size,
// then n_poi, then n_th
std::vector<ModelFamily>
enumerate_models(int s_max, std::optional<int> exact_s = std::nullopt);

// Build a field from parameters laid out as (mu; nu_1..; p_1..)
FieldSpec family_field(ModelFamily const& family, std::span<double const> params);

//---------------------------------------------------------------------------//
// Weight of the squared g^(K) residual: 1/K! when g2_exp > 1, else 1
double lagrange_g(int order, double g2_exp);

enum class ObjectiveKind
{
    g_theta,  //!< g and theta residuals, lambda_theta from the recursion
    g_only,  //!< lambda_theta forced to zero
};

std::string_view to_string(ObjectiveKind kind);
ObjectiveKind objective_kind_from_string(std::string_view name);

//! The three contributions to the least-squares objective.
struct ObjectiveTerms
{
    double g_term{0};  //!< sum_K lambda_g(K) (g_rec - g_exp)^2
    double theta_term{0};  //!< sum over subsets (theta_rec - theta_exp)^2
    double q_term{0};  //!< sum_i (Q_i(0)_rec - Q_i(0)_exp)^2

    double total(double lambda_theta, double w_q) const
    {
        return g_term + lambda_theta * theta_term + w_q * q_term;
    }
};

ObjectiveTerms ls_terms(std::span<double const> params,
                        ModelFamily const& family,
                        CorrelationSet const& observed,
                        DetectorTree const& tree);

double ls_objective(std::span<double const> params,
                    ModelFamily const& family,
                    CorrelationSet const& observed,
                    DetectorTree const& tree,
                    double lambda_theta,
                    double w_q = 1.0);

//---------------------------------------------------------------------------//
struct FitOptions
{
    ObjectiveKind objective{ObjectiveKind::g_theta};
    int restarts{8};
    std::uint64_t seed{0};
    double w_q{1.0};
    double bound_scale{5.0};  //!< mu, nu in [0, bound_scale * observed mean]
    double lambda_damping{0.5};
    double balance_tolerance{0.1};
    int max_lambda_iterations{10};
    SimplexOptions simplex{};
};

struct FitResult
{
    ModelFamily family;
    std::vector<double> params;  //!< (mu; nu_1.. desc; p_1.. desc)
    double ls_value{0};
    double lambda_theta{1};
    ObjectiveTerms terms;
    bool converged{false};
    int n_restarts_used{0};
    int lambda_iterations{0};
    std::string error;  //!< non-empty when the fit failed outright
};

FitResult fit_model(ModelFamily const& family,
                    CorrelationSet const& observed,
                    DetectorTree const& tree,
                    FitOptions const& options = {});

//---------------------------------------------------------------------------//
struct ReconstructOptions
{
    FitOptions fit{};
    std::optional<int> exact_s;
    double presence_threshold{1e-3};
    double tie_relative{1e-9};
    double tie_absolute{1e-12};
    unsigned int workers{1};
};

struct ReconstructionResult
{
    FitResult best;
    std::vector<FitResult> ranked;  //!< ascending ls_value
    FieldSpec pruned;  //!< best fit with sub-threshold modes dropped
    ModelFamily pruned_family;
    int s_rec{0};
    std::optional<double> fidelity;
};

ReconstructionResult reconstruct(CorrelationSet const& observed,
                                 DetectorTree const& tree,
                                 int s_max,
                                 std::optional<FieldSpec> const& truth = std::nullopt,
                                 ReconstructOptions const& options = {});

//---------------------------------------------------------------------------//
// 2|m_e . m_x| / (|m_e|^2 + |m_x|^2); vectors are zero-padded to equal length
double fidelity(std::span<double const> m_e, std::span<double const> m_x);

/*!
 * Mean-photon vectors of two fields in a shared canonical layout: the
 * Poissonian slot, then thermal slots, then single-photon slots, each group
 * sorted descending and zero-padded to the larger of the two fields.
 */
std::pair<std::vector<double>, std::vector<double>>
aligned_means(FieldSpec const& expected, FieldSpec const& reconstructed);

// Fidelity of two fields after canonical alignment
double fidelity(FieldSpec const& expected, FieldSpec const& reconstructed);

//---------------------------------------------------------------------------//
}  // namespace modrec
