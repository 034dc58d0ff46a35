//---------------------------------------------------------------------------//
//! \file reconstruct.cpp
//---------------------------------------------------------------------------//
#include "modrec/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <thread>

#include "modrec/errors.hpp"
#include "modrec/rng.hpp"

namespace modrec
{
namespace
{
constexpr double inf = std::numeric_limits<double>::infinity();

//! Total objective below which both terms count as balanced.
constexpr double negligible_objective = 1e-24;
constexpr double min_lambda_theta = 1e-6;
constexpr double max_lambda_theta = 1e6;

//---------------------------------------------------------------------------//
/*!
 * Evaluates the objective terms for one family against one observed set.
 *
 * Every no-click probability of the tree is computed once per parameter
 * vector; g (either basis), theta and Q_i(0) are derived from that table.
 */
class ModelEvaluator
{
  public:
    ModelEvaluator(ModelFamily const& family,
                   CorrelationSet const& observed,
                   DetectorTree const& tree)
        : family_(family), basis_(observed.g_basis), n_(tree.n_branches())
    {
        if (observed.n_branches != n_)
            throw ValidationError("observed correlation set and detector tree "
                                  "have different branch counts");
        if (observed.q_noclick.size() != static_cast<std::size_t>(n_))
            throw ValidationError("observed set lacks per-branch no-click data");
        auto g2 = observed.g.find(2);
        double g2_exp = g2 != observed.g.end() ? g2->second.value : 1.0;
        for (auto const& [order, m] : observed.g)
        {
            if (order < 2 || order > n_)
                throw ValidationError("observed g order outside 2..N");
            orders_.push_back(order);
            g_exp_.push_back(m.value);
            lambda_g_.push_back(lagrange_g(order, g2_exp));
            if (basis_ == GBasis::click)
            {
                auto subsets = subsets_of_size(n_, order);
                std::vector<std::vector<int>> members;
                for (auto sub : subsets)
                    members.push_back(sub.indices());
                click_subsets_.push_back(std::move(subsets));
                click_members_.push_back(std::move(members));
            }
        }
        for (auto const& [subset, m] : observed.theta)
        {
            if (subset.size() < 2 || (subset.bits >> n_))
                throw ValidationError("observed theta subset is invalid");
            theta_subsets_.push_back(subset);
            theta_members_.push_back(subset.indices());
            theta_exp_.push_back(m.value);
        }
        q_exp_ = observed.q_noclick;
        for (std::uint32_t s = 0; s < (1u << n_); ++s)
            y_.push_back(std::min(1.0, tree.detection_weight({s})));
        max_order_ = orders_.empty() ? 1 : *std::max_element(orders_.begin(), orders_.end());
        q_.resize(y_.size());
        all_click_.resize(y_.size());
    }

    ObjectiveTerms operator()(std::span<double const> params) const
    {
        if (params.size() != static_cast<std::size_t>(family_.size()))
            throw ValidationError("parameter count does not match model family");
        double mean = 0;
        for (double v : params)
            mean += v;
        if (!(mean > 0))
            throw UndefinedStatistic("reconstructed field has zero mean");

        // No-click table: product of closed-form generating functions at
        // 1 - y_S, parameters laid out as (mu; nu..; p..)
        std::size_t const n_poi = static_cast<std::size_t>(family_.n_poi);
        std::size_t const n_th = static_cast<std::size_t>(family_.n_th);
        double const mu = n_poi ? params[0] : 0.0;
        for (std::size_t s = 0; s < y_.size(); ++s)
        {
            double const y = y_[s];
            double v = std::exp(-mu * y);
            for (std::size_t i = n_poi; i < params.size(); ++i)
            {
                v *= i < n_poi + n_th ? 1 / (1 + params[i] * y)
                                      : 1 - params[i] * y;
            }
            q_[s] = v;
        }

        ObjectiveTerms t;
        if (basis_ == GBasis::photon_number)
            photon_number_g(params, t);
        else
            click_g(t);

        for (std::size_t j = 0; j < theta_subsets_.size(); ++j)
        {
            double denom = 1;
            for (int i : theta_members_[j])
                denom *= q_[1u << i];
            double d = q_[theta_subsets_[j].bits] / denom - theta_exp_[j];
            t.theta_term += d * d;
        }
        for (int i = 0; i < n_; ++i)
        {
            double d = q_[1u << i] - q_exp_[static_cast<std::size_t>(i)];
            t.q_term += d * d;
        }
        return t;
    }

  private:
    void photon_number_g(std::span<double const> params, ObjectiveTerms& t) const
    {
        FieldSpec field = family_field(family_, params);
        auto fm = field_factorial_moments(field, max_order_);
        for (std::size_t k = 0; k < orders_.size(); ++k)
        {
            double g_rec = fm[static_cast<std::size_t>(orders_[k] - 1)]
                           / std::pow(fm[0], orders_[k]);
            double d = g_rec - g_exp_[k];
            t.g_term += lambda_g_[k] * d * d;
        }
    }

    void click_g(ObjectiveTerms& t) const
    {
        // P(all of S click) = sum_{T subset S} (-1)^|T| Q_T(0), as a zeta
        // transform over the signed no-click table
        for (std::uint32_t s = 0; s < q_.size(); ++s)
        {
            double qs = s == 0 ? 1.0 : q_[s];
            all_click_[s] = std::popcount(s) % 2 ? -qs : qs;
        }
        for (int i = 0; i < n_; ++i)
        {
            for (std::uint32_t m = 0; m < all_click_.size(); ++m)
            {
                if (m >> i & 1u)
                    all_click_[m] += all_click_[m ^ (1u << i)];
            }
        }
        for (std::size_t k = 0; k < orders_.size(); ++k)
        {
            double sum = 0;
            for (std::size_t j = 0; j < click_subsets_[k].size(); ++j)
            {
                double denom = 1;
                for (int i : click_members_[k][j])
                    denom *= all_click_[1u << i];
                sum += all_click_[click_subsets_[k][j].bits] / denom;
            }
            double g_rec = sum / static_cast<double>(click_subsets_[k].size());
            double d = g_rec - g_exp_[k];
            t.g_term += lambda_g_[k] * d * d;
        }
    }

    ModelFamily family_;
    GBasis basis_;
    int n_;
    int max_order_{1};
    std::vector<int> orders_;
    std::vector<double> g_exp_;
    std::vector<double> lambda_g_;
    std::vector<std::vector<BranchSet>> click_subsets_;
    std::vector<std::vector<std::vector<int>>> click_members_;
    std::vector<BranchSet> theta_subsets_;
    std::vector<std::vector<int>> theta_members_;
    std::vector<double> theta_exp_;
    std::vector<double> q_exp_;
    std::vector<double> y_;
    // Scratch tables; an evaluator is used by one fit at a time
    mutable std::vector<double> q_;
    mutable std::vector<double> all_click_;
};

// Mean photon number implied by the all-branch no-click probability,
// treating the field as Poissonian
double observed_mean(CorrelationSet const& observed, DetectorTree const& tree)
{
    double w = std::min(1.0, tree.detection_weight(BranchSet::all(tree.n_branches())));
    if (!(observed.q_noclick_all > 0) || !(w > 0))
        return inf;
    return -std::log(observed.q_noclick_all) / w;
}

// Sort thermal and single-photon parameters descending within their groups
void canonicalize(ModelFamily const& f, std::vector<double>& params)
{
    auto th = params.begin() + f.n_poi;
    auto sps = th + f.n_th;
    std::sort(th, sps, std::greater<>());
    std::sort(sps, params.end(), std::greater<>());
}

std::uint64_t family_key(ModelFamily const& f)
{
    return static_cast<std::uint64_t>(f.n_poi) | static_cast<std::uint64_t>(f.n_th) << 8
           | static_cast<std::uint64_t>(f.n_sps) << 16;
}

}  // namespace

//---------------------------------------------------------------------------//
std::string ModelFamily::label() const
{
    std::string result;
    auto add = [&](int n, char const* name) {
        if (n == 0)
            return;
        if (!result.empty())
            result += ", ";
        result += std::to_string(n) + " " + name;
    };
    add(n_sps, "SPS");
    add(n_th, "Th");
    add(n_poi, "Poi");
    return result.empty() ? "vacuum" : result;
}

ModelFamily ModelFamily::of(FieldSpec const& field)
{
    ModelFamily f;
    for (auto const& m : field.modes())
    {
        switch (m.kind())
        {
            case ModeKind::poissonian:
                ++f.n_poi;
                break;
            case ModeKind::thermal:
                ++f.n_th;
                break;
            case ModeKind::single_photon:
                ++f.n_sps;
                break;
        }
    }
    return f;
}

std::vector<ModelFamily> enumerate_models(int s_max, std::optional<int> exact_s)
{
    if (s_max < 1)
        throw ValidationError("s_max must be >= 1");
    if (exact_s && (*exact_s < 1 || *exact_s > s_max))
        throw ValidationError("exact_s must lie in [1, s_max]");

    std::vector<ModelFamily> result;
    int const lo = exact_s ? *exact_s : 1;
    int const hi = exact_s ? *exact_s : s_max;
    for (int total = lo; total <= hi; ++total)
    {
        for (int n_poi = 0; n_poi <= 1; ++n_poi)
        {
            for (int n_th = 0; n_th <= total - n_poi; ++n_th)
                result.push_back({n_poi, n_th, total - n_poi - n_th});
        }
    }
    return result;
}

FieldSpec family_field(ModelFamily const& family, std::span<double const> params)
{
    if (params.size() != static_cast<std::size_t>(family.size()))
        throw ValidationError("parameter count does not match model family");
    std::vector<OpticalMode> modes;
    modes.reserve(params.size());
    std::size_t i = 0;
    for (int k = 0; k < family.n_poi; ++k)
        modes.push_back(OpticalMode::poissonian(params[i++]));
    for (int k = 0; k < family.n_th; ++k)
        modes.push_back(OpticalMode::thermal(params[i++]));
    for (int k = 0; k < family.n_sps; ++k)
        modes.push_back(OpticalMode::single_photon(params[i++]));
    return FieldSpec(std::move(modes));
}

//---------------------------------------------------------------------------//
double lagrange_g(int order, double g2_exp)
{
    if (order < 2)
        throw DomainError("lambda_g needs K >= 2");
    if (!(g2_exp > 1))
        return 1.0;
    return 1 / std::tgamma(order + 1.0);
}

std::string_view to_string(ObjectiveKind kind)
{
    return kind == ObjectiveKind::g_only ? "g-only" : "g-theta";
}

ObjectiveKind objective_kind_from_string(std::string_view name)
{
    if (name == "g-theta" || name == "g_theta")
        return ObjectiveKind::g_theta;
    if (name == "g-only" || name == "g_only")
        return ObjectiveKind::g_only;
    throw ValidationError("unknown objective '" + std::string(name)
                          + "' (expected g-theta or g-only)");
}

ObjectiveTerms ls_terms(std::span<double const> params,
                        ModelFamily const& family,
                        CorrelationSet const& observed,
                        DetectorTree const& tree)
{
    return ModelEvaluator(family, observed, tree)(params);
}

double ls_objective(std::span<double const> params,
                    ModelFamily const& family,
                    CorrelationSet const& observed,
                    DetectorTree const& tree,
                    double lambda_theta,
                    double w_q)
{
    return ls_terms(params, family, observed, tree).total(lambda_theta, w_q);
}

//---------------------------------------------------------------------------//
/*!
 * Fit one family: multi-start simplex minimization wrapped in the
 * lambda_theta recursion.
 *
 * The recursion starts from lambda_theta = 1 and moves lambda_theta toward
 * the ratio g_term / theta_term of the current optimum (geometric damping),
 * refitting until lambda_theta * theta_term matches g_term within the
 * balance tolerance or the iteration cap is reached.
 */
FitResult fit_model(ModelFamily const& family,
                    CorrelationSet const& observed,
                    DetectorTree const& tree,
                    FitOptions const& options)
{
    FitResult result;
    result.family = family;
    result.ls_value = inf;
    if (family.size() < 1)
    {
        result.error = "empty model family";
        return result;
    }
    if (options.restarts < 1)
        throw ValidationError("fit needs at least one restart");

    double const m_obs = observed_mean(observed, tree);
    if (!(m_obs > 0) || !std::isfinite(m_obs))
    {
        result.error = "undefined statistic: observed field has no usable mean "
                       "photon number";
        return result;
    }

    ModelEvaluator evaluate(family, observed, tree);
    Box box;
    for (int k = 0; k < family.n_poi + family.n_th; ++k)
    {
        box.lower.push_back(0);
        box.upper.push_back(options.bound_scale * m_obs);
    }
    for (int k = 0; k < family.n_sps; ++k)
    {
        box.lower.push_back(0);
        box.upper.push_back(1);
    }

    auto starts = latin_hypercube(options.restarts, box,
                                  mix64(options.seed ^ mix64(family_key(family))));
    bool const g_only = options.objective == ObjectiveKind::g_only;
    double lambda = g_only ? 0.0 : 1.0;
    std::vector<double> best_x;
    bool inner_ok = false;
    bool balanced = false;
    ObjectiveTerms terms;
    std::string last_error;

    for (int it = 0; it < options.max_lambda_iterations; ++it)
    {
        auto objective = [&](std::span<double const> x) {
            try
            {
                return evaluate(x).total(lambda, options.w_q);
            }
            catch (UndefinedStatistic const& e)
            {
                last_error = e.what();
                return inf;
            }
        };

        std::vector<std::vector<double>> inits = starts;
        if (!best_x.empty())
            inits.push_back(best_x);

        SimplexResult winner;
        winner.f = inf;
        for (auto const& x0 : inits)
        {
            auto r = minimize_simplex(objective, x0, box, options.simplex);
            if (r.f < winner.f || winner.x.empty())
                winner = std::move(r);
        }
        result.n_restarts_used += static_cast<int>(inits.size());
        result.lambda_iterations = it + 1;

        if (!std::isfinite(winner.f))
        {
            result.error = last_error.empty() ? "objective is undefined everywhere"
                                              : last_error;
            result.converged = false;
            result.params = winner.x;
            return result;
        }
        best_x = winner.x;
        inner_ok = winner.converged;
        terms = evaluate(best_x);
        result.lambda_theta = lambda;

        if (g_only)
        {
            balanced = true;
            break;
        }
        double const g_part = terms.g_term;
        double const t_part = lambda * terms.theta_term;
        if (g_part + t_part <= negligible_objective
            || std::abs(g_part - t_part)
                   <= options.balance_tolerance * std::max(g_part, t_part))
        {
            balanced = true;
            break;
        }
        if (!(terms.theta_term > 0) || it + 1 == options.max_lambda_iterations)
            break;

        double target = std::clamp(g_part / terms.theta_term,
                                   min_lambda_theta, max_lambda_theta);
        lambda = std::pow(lambda, 1 - options.lambda_damping)
                 * std::pow(target, options.lambda_damping);
    }

    result.params = best_x;
    canonicalize(family, result.params);
    result.terms = terms;
    result.ls_value = terms.total(result.lambda_theta, options.w_q);
    result.converged = inner_ok && balanced;
    return result;
}

//---------------------------------------------------------------------------//
ReconstructionResult reconstruct(CorrelationSet const& observed,
                                 DetectorTree const& tree,
                                 int s_max,
                                 std::optional<FieldSpec> const& truth,
                                 ReconstructOptions const& options)
{
    if (s_max < 1 || s_max > tree.n_branches())
    {
        throw ValidationError(
            "s_max = " + std::to_string(s_max)
            + " exceeds the photon-number resolution of a "
            + std::to_string(tree.n_branches()) + "-branch detector tree");
    }
    auto families = enumerate_models(s_max, options.exact_s);

    std::vector<FitResult> fits(families.size());
    unsigned int workers = options.workers == 0
                               ? std::max(1u, std::thread::hardware_concurrency())
                               : options.workers;
    workers = std::min<unsigned int>(workers, static_cast<unsigned int>(families.size()));
    auto work = [&](unsigned int w) {
        for (std::size_t i = w; i < families.size(); i += workers)
            fits[i] = fit_model(families[i], observed, tree, options.fit);
    };
    if (workers <= 1)
    {
        work(0);
    }
    else
    {
        std::vector<std::jthread> threads;
        for (unsigned int w = 0; w < workers; ++w)
            threads.emplace_back(work, w);
    }

    auto usable = [](FitResult const& f) {
        return f.error.empty() && std::isfinite(f.ls_value);
    };
    if (std::none_of(fits.begin(), fits.end(), usable))
    {
        throw NumericalFailure("every model family failed to fit"
                               + (fits.empty() ? std::string{}
                                               : ": " + fits.front().error));
    }

    // Failed fits sink to the end; ties keep enumeration order
    std::stable_sort(fits.begin(), fits.end(), [&](auto const& a, auto const& b) {
        bool ua = usable(a), ub = usable(b);
        if (ua != ub)
            return ua;
        return a.ls_value < b.ls_value;
    });

    ReconstructionResult result;
    double const min_ls = fits.front().ls_value;
    std::size_t best = 0;
    for (std::size_t i = 0; i < fits.size() && usable(fits[i]); ++i)
    {
        double ls = fits[i].ls_value;
        double tol = options.tie_relative * std::max(std::abs(ls), std::abs(min_ls))
                     + options.tie_absolute;
        if (ls - min_ls > tol)
            break;
        if (fits[i].family.size() < fits[best].family.size())
            best = i;
    }
    result.best = fits[best];
    result.ranked = std::move(fits);

    std::vector<OpticalMode> kept;
    auto full = family_field(result.best.family, result.best.params);
    for (auto const& m : full.modes())
    {
        if (m.mean() >= options.presence_threshold)
            kept.push_back(m);
    }
    result.pruned = FieldSpec(std::move(kept));
    result.pruned_family = ModelFamily::of(result.pruned);
    result.s_rec = static_cast<int>(result.pruned.size());
    if (truth)
        result.fidelity = fidelity(*truth, result.pruned);
    return result;
}

//---------------------------------------------------------------------------//
double fidelity(std::span<double const> m_e, std::span<double const> m_x)
{
    std::size_t const n = std::max(m_e.size(), m_x.size());
    double dot = 0, ne = 0, nx = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        double a = i < m_e.size() ? m_e[i] : 0.0;
        double b = i < m_x.size() ? m_x[i] : 0.0;
        dot += a * b;
        ne += a * a;
        nx += b * b;
    }
    if (!(ne + nx > 0))
        throw UndefinedStatistic("fidelity is undefined for two zero vectors");
    return 2 * std::abs(dot) / (ne + nx);
}

std::pair<std::vector<double>, std::vector<double>>
aligned_means(FieldSpec const& expected, FieldSpec const& reconstructed)
{
    auto group = [](FieldSpec const& f, ModeKind kind) {
        std::vector<double> v;
        for (auto const& m : f.modes())
        {
            if (m.kind() == kind)
                v.push_back(m.mean());
        }
        std::sort(v.begin(), v.end(), std::greater<>());
        return v;
    };

    std::pair<std::vector<double>, std::vector<double>> result;
    for (auto kind : {ModeKind::poissonian, ModeKind::thermal, ModeKind::single_photon})
    {
        auto a = group(expected, kind);
        auto b = group(reconstructed, kind);
        std::size_t const len = std::max(a.size(), b.size());
        a.resize(len, 0.0);
        b.resize(len, 0.0);
        result.first.insert(result.first.end(), a.begin(), a.end());
        result.second.insert(result.second.end(), b.begin(), b.end());
    }
    return result;
}

double fidelity(FieldSpec const& expected, FieldSpec const& reconstructed)
{
    auto [e, x] = aligned_means(expected, reconstructed);
    return fidelity(e, x);
}

//---------------------------------------------------------------------------//
}  // namespace modrec
