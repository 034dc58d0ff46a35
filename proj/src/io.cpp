//---------------------------------------------------------------------------//
//! \file io.cpp
//---------------------------------------------------------------------------//
#include "modrec/io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "modrec/errors.hpp"

namespace modrec
{
using nlohmann::json;

namespace
{
//---------------------------------------------------------------------------//
template<class T>
T required(json const& j, char const* key, std::string const& where)
{
    if (!j.is_object() || !j.contains(key))
        throw ValidationError(where + ": missing required field '" + key + "'");
    try
    {
        return j.at(key).get<T>();
    }
    catch (json::exception const&)
    {
        throw ValidationError(where + ": field '" + key + "' has the wrong type");
    }
}

template<class T>
T optional_field(json const& j, char const* key, T fallback, std::string const& where)
{
    if (!j.contains(key) || j.at(key).is_null())
        return fallback;
    return required<T>(j, key, where);
}

void check_schema(json const& j, std::string const& where)
{
    if (!j.is_object())
        throw ValidationError(where + ": expected a JSON object");
    if (j.contains("schema_version"))
    {
        int v = required<int>(j, "schema_version", where);
        if (v != schema_version)
        {
            throw ValidationError(where + ": unsupported schema_version "
                                  + std::to_string(v) + " (expected "
                                  + std::to_string(schema_version) + ")");
        }
    }
}

json measured_json(Measured const& m)
{
    return {{"value", m.value}, {"sigma", m.sigma}};
}

std::vector<int> one_based(BranchSet s)
{
    std::vector<int> out;
    for (int i : s.indices())
        out.push_back(i + 1);
    return out;
}

}  // namespace

//---------------------------------------------------------------------------//
void ScenarioConfig::validate() const
{
    if (s_max < 1 || s_max > tree.n_branches())
    {
        throw ValidationError(
            "s_max: " + std::to_string(s_max)
            + " exceeds the photon-number resolution bound of the "
            + std::to_string(tree.n_branches()) + "-branch detector tree");
    }
    if (exact_s && (*exact_s < 1 || *exact_s > s_max))
        throw ValidationError("exact_s: must lie in [1, s_max]");
    if (bootstrap.n_resamples < 2)
        throw ValidationError("bootstrap.n_resamples: must be >= 2");
    if (!(presence_threshold >= 0))
        throw ValidationError("presence_threshold: must be >= 0");
}

//---------------------------------------------------------------------------//
json to_json(FieldSpec const& field)
{
    json modes = json::array();
    for (auto const& m : field.modes())
        modes.push_back({{"kind", std::string(to_string(m.kind()))}, {"mean", m.mean()}});
    return {{"modes", modes}};
}

FieldSpec field_from_json(json const& j)
{
    std::string const where = "field";
    json const& list = j.is_array() ? j : j.value("modes", json::array());
    if (!list.is_array())
        throw ValidationError("field.modes: expected an array");
    std::vector<OpticalMode> modes;
    std::size_t idx = 0;
    for (auto const& m : list)
    {
        std::string const w = "field.modes[" + std::to_string(idx++) + "]";
        auto kind_name = required<std::string>(m, "kind", w);
        double mean = m.contains("mean") ? required<double>(m, "mean", w)
                                         : required<double>(m, "param", w);
        try
        {
            modes.emplace_back(mode_kind_from_string(kind_name), mean);
        }
        catch (ValidationError const& e)
        {
            throw ValidationError(w + ": " + e.what());
        }
    }
    try
    {
        return FieldSpec(std::move(modes));
    }
    catch (ValidationError const& e)
    {
        throw ValidationError(where + ": " + e.what());
    }
}

json to_json(DetectorTree const& tree)
{
    return {{"split", tree.split()}, {"eff", tree.eff()}};
}

DetectorTree tree_from_json(json const& j)
{
    std::string const where = "detector_tree";
    std::vector<double> eff;
    std::vector<double> split;
    if (j.contains("split"))
    {
        split = required<std::vector<double>>(j, "split", where);
    }
    else
    {
        int n = required<int>(j, "n_branches", where);
        if (n < 2)
            throw ValidationError("detector_tree.n_branches: must be >= 2");
        split.assign(static_cast<std::size_t>(n), 1.0 / n);
    }
    if (j.contains("eff") && j.at("eff").is_number())
        eff.assign(split.size(), j.at("eff").get<double>());
    else
        eff = required<std::vector<double>>(j, "eff", where);
    try
    {
        return DetectorTree(std::move(split), std::move(eff));
    }
    catch (ValidationError const& e)
    {
        throw ValidationError(where + ": " + e.what());
    }
}

//---------------------------------------------------------------------------//
ScenarioConfig scenario_from_json(json const& j)
{
    std::string const where = "config";
    check_schema(j, where);
    ScenarioConfig c;
    c.name = optional_field<std::string>(j, "name", c.name, where);
    if (j.contains("field") && !j.at("field").is_null())
        c.field = field_from_json(j.at("field"));
    if (!j.contains("detector_tree"))
        throw ValidationError("config: missing required field 'detector_tree'");
    c.tree = tree_from_json(j.at("detector_tree"));
    c.n_pulses = optional_field<std::uint64_t>(j, "n_pulses", c.n_pulses, where);
    c.seed = optional_field<std::uint64_t>(j, "seed", c.seed, where);
    c.s_max = optional_field<int>(j, "s_max", c.tree.n_branches(), where);
    if (j.contains("exact_s") && !j.at("exact_s").is_null())
        c.exact_s = required<int>(j, "exact_s", where);
    if (j.contains("bootstrap"))
    {
        auto const& b = j.at("bootstrap");
        c.bootstrap.n_resamples = optional_field<int>(b, "n_resamples", 200, "bootstrap");
        c.bootstrap.seed = optional_field<std::uint64_t>(b, "seed", c.seed, "bootstrap");
    }
    else
    {
        c.bootstrap.seed = c.seed;
    }
    c.presence_threshold
        = optional_field<double>(j, "presence_threshold", c.presence_threshold, where);
    c.objective = objective_kind_from_string(
        optional_field<std::string>(j, "objective", "g-theta", where));
    if (j.contains("n_max") && !j.at("n_max").is_null())
        c.n_max = required<std::size_t>(j, "n_max", where);
    c.validate();
    return c;
}

json to_json(ScenarioConfig const& c)
{
    json j = {{"schema_version", schema_version},
              {"name", c.name},
              {"detector_tree", to_json(c.tree)},
              {"n_pulses", c.n_pulses},
              {"seed", c.seed},
              {"s_max", c.s_max},
              {"exact_s", c.exact_s ? json(*c.exact_s) : json(nullptr)},
              {"bootstrap",
               {{"n_resamples", c.bootstrap.n_resamples}, {"seed", c.bootstrap.seed}}},
              {"presence_threshold", c.presence_threshold},
              {"objective", std::string(to_string(c.objective))},
              {"n_max", c.n_max ? json(*c.n_max) : json(nullptr)}};
    j["field"] = c.field ? to_json(*c.field) : json(nullptr);
    return j;
}

ScenarioConfig load_scenario(std::filesystem::path const& path)
{
    return scenario_from_json(load_json(path));
}

//---------------------------------------------------------------------------//
json to_json(CorrelationSet const& set)
{
    json g = json::array();
    for (auto const& [order, m] : set.g)
    {
        auto e = measured_json(m);
        e["order"] = order;
        g.push_back(e);
    }
    json theta = json::array();
    for (auto const& [subset, m] : set.theta)
    {
        auto e = measured_json(m);
        e["branches"] = one_based(subset);
        theta.push_back(e);
    }
    return {{"schema_version", schema_version},
            {"kind", "correlation_set"},
            {"n_branches", set.n_branches},
            {"g_basis", std::string(to_string(set.g_basis))},
            {"n_pulses", set.n_pulses},
            {"g", g},
            {"theta", theta},
            {"q_click", set.q_click},
            {"q_noclick", set.q_noclick},
            {"q_noclick_all", set.q_noclick_all}};
}

CorrelationSet correlation_set_from_json(json const& j)
{
    std::string const where = "correlation_set";
    check_schema(j, where);
    CorrelationSet set;
    set.n_branches = required<int>(j, "n_branches", where);
    if (set.n_branches < 2 || set.n_branches > 16)
        throw ValidationError("correlation_set.n_branches: must lie in [2, 16]");
    set.g_basis = g_basis_from_string(
        optional_field<std::string>(j, "g_basis", "click", where));
    set.n_pulses = optional_field<std::uint64_t>(j, "n_pulses", 0, where);
    for (auto const& e : required<json>(j, "g", where))
    {
        int order = required<int>(e, "order", "correlation_set.g");
        set.g[order] = {required<double>(e, "value", "correlation_set.g"),
                        optional_field<double>(e, "sigma", 0.0, "correlation_set.g")};
    }
    for (auto const& e : required<json>(j, "theta", where))
    {
        BranchSet s;
        for (int b : required<std::vector<int>>(e, "branches", "correlation_set.theta"))
        {
            if (b < 1 || b > set.n_branches)
                throw ValidationError("correlation_set.theta: branch index out of range");
            s.bits |= 1u << (b - 1);
        }
        set.theta[s] = {required<double>(e, "value", "correlation_set.theta"),
                        optional_field<double>(e, "sigma", 0.0, "correlation_set.theta")};
    }
    set.q_noclick = required<std::vector<double>>(j, "q_noclick", where);
    if (set.q_noclick.size() != static_cast<std::size_t>(set.n_branches))
        throw ValidationError("correlation_set.q_noclick: need one entry per branch");
    if (j.contains("q_click"))
    {
        set.q_click = required<std::vector<double>>(j, "q_click", where);
    }
    else
    {
        for (double q : set.q_noclick)
            set.q_click.push_back(1 - q);
    }
    set.q_noclick_all = required<double>(j, "q_noclick_all", where);
    return set;
}

//---------------------------------------------------------------------------//
json to_json(FitResult const& fit, CorrelationSet const& observed)
{
    double g2 = observed.g.count(2) ? observed.g.at(2).value : 1.0;
    json lambda_g = json::object();
    for (auto const& [order, m] : observed.g)
        lambda_g[std::to_string(order)] = lagrange_g(order, g2);
    json modes = json::array();
    if (fit.params.size() == static_cast<std::size_t>(fit.family.size()))
    {
        for (auto const& m : family_field(fit.family, fit.params).modes())
        {
            modes.push_back(
                {{"kind", std::string(to_string(m.kind()))}, {"mean", m.mean()}});
        }
    }
    json j = {{"family",
               {{"n_poi", fit.family.n_poi},
                {"n_th", fit.family.n_th},
                {"n_sps", fit.family.n_sps},
                {"label", fit.family.label()}}},
              {"modes", modes},
              {"ls_value", fit.ls_value},
              {"lambda_theta", fit.lambda_theta},
              {"lambda_g", lambda_g},
              {"terms",
               {{"g", fit.terms.g_term},
                {"theta", fit.terms.theta_term},
                {"q", fit.terms.q_term}}},
              {"converged", fit.converged},
              {"n_restarts_used", fit.n_restarts_used},
              {"lambda_iterations", fit.lambda_iterations}};
    if (!fit.error.empty())
        j["error"] = fit.error;
    return j;
}

json result_document(ScenarioConfig const& config,
                     CorrelationSet const& observed,
                     ReconstructionResult const& result)
{
    json ranked = json::array();
    for (auto const& f : result.ranked)
        ranked.push_back(to_json(f, observed));
    return {{"schema_version", schema_version},
            {"kind", "reconstruction_result"},
            {"config", to_json(config)},
            {"observed", to_json(observed)},
            {"best", to_json(result.best, observed)},
            {"pruned",
             {{"family",
               {{"n_poi", result.pruned_family.n_poi},
                {"n_th", result.pruned_family.n_th},
                {"n_sps", result.pruned_family.n_sps},
                {"label", result.pruned_family.label()}}},
              {"modes", to_json(result.pruned)["modes"]}}},
            {"s_rec", result.s_rec},
            {"fidelity", result.fidelity ? json(*result.fidelity) : json(nullptr)},
            {"ranked", ranked}};
}

//---------------------------------------------------------------------------//
void write_tally(std::ostream& os, ClickTally const& tally)
{
    os << "n_branches," << tally.n_branches() << '\n';
    os << "n_pulses," << tally.n_pulses() << '\n';
    for (std::size_t p = 0; p < tally.counts().size(); ++p)
        os << p << ',' << tally.counts()[p] << '\n';
}

ClickTally read_tally(std::istream& is)
{
    auto header = [&](char const* key) -> std::uint64_t {
        std::string line;
        if (!std::getline(is, line))
            throw ValidationError(std::string("tally: missing '") + key + "' header line");
        auto comma = line.find(',');
        if (comma == std::string::npos || line.substr(0, comma) != key)
            throw ValidationError(std::string("tally: expected '") + key + ",<value>' header");
        try
        {
            std::size_t used = 0;
            auto v = std::stoull(line.substr(comma + 1), &used);
            return v;
        }
        catch (std::exception const&)
        {
            throw ValidationError(std::string("tally: bad value for '") + key + "'");
        }
    };
    auto n = header("n_branches");
    auto n_pulses = header("n_pulses");
    if (n < 1 || n > 16)
        throw ValidationError("tally: n_branches must lie in [1, 16]");

    std::vector<std::uint64_t> counts(std::size_t{1} << n, 0);
    std::vector<bool> seen(counts.size(), false);
    std::string line;
    while (std::getline(is, line))
    {
        if (line.empty() || line == "\r")
            continue;
        std::istringstream row(line);
        std::uint64_t pattern = 0, count = 0;
        char comma = 0;
        if (!(row >> pattern >> comma >> count) || comma != ',')
            throw ValidationError("tally: malformed row '" + line + "'");
        if (pattern >= counts.size() || seen[pattern])
            throw ValidationError("tally: pattern out of range or repeated: "
                                  + std::to_string(pattern));
        seen[pattern] = true;
        counts[pattern] = count;
    }
    for (std::size_t p = 0; p < seen.size(); ++p)
    {
        if (!seen[p])
            throw ValidationError("tally: missing row for pattern " + std::to_string(p));
    }
    ClickTally tally(static_cast<int>(n), std::move(counts));
    if (tally.n_pulses() != n_pulses)
        throw ValidationError("tally: counts do not sum to n_pulses");
    return tally;
}

void save_tally(std::filesystem::path const& path, ClickTally const& tally)
{
    std::ostringstream os;
    write_tally(os, tally);
    save_text(path, os.str());
}

ClickTally load_tally(std::filesystem::path const& path)
{
    std::ifstream is(path);
    if (!is)
        throw IoError("cannot open tally file " + path.string());
    return read_tally(is);
}

//---------------------------------------------------------------------------//
void write_mode_plot(std::ostream& os,
                     std::optional<FieldSpec> const& expected,
                     FieldSpec const& reconstructed)
{
    FieldSpec const none;
    auto [e, x] = aligned_means(expected ? *expected : none, reconstructed);

    // Recover the slot kinds from the aligned layout
    auto count = [](FieldSpec const& f, ModeKind k) {
        return static_cast<std::size_t>(std::count_if(
            f.modes().begin(), f.modes().end(), [&](auto const& m) { return m.kind() == k; }));
    };
    FieldSpec const& ref = expected ? *expected : none;
    std::vector<std::string> labels;
    for (auto kind : {ModeKind::poissonian, ModeKind::thermal, ModeKind::single_photon})
    {
        auto len = std::max(count(ref, kind), count(reconstructed, kind));
        char const* tag = kind == ModeKind::poissonian ? "Poi"
                          : kind == ModeKind::thermal  ? "Th"
                                                       : "SPS";
        for (std::size_t i = 0; i < len; ++i)
            labels.push_back(std::string(tag) + (len > 1 ? std::to_string(i + 1) : ""));
    }

    os << "mode,expected,reconstructed\n";
    os << std::setprecision(10);
    for (std::size_t i = 0; i < labels.size(); ++i)
    {
        os << labels[i] << ',';
        if (expected)
            os << e[i];
        os << ',' << x[i] << '\n';
    }
}

void write_report(std::ostream& os,
                  ScenarioConfig const& config,
                  CorrelationSet const& observed,
                  ReconstructionResult const& result)
{
    os << "scenario: " << config.name << '\n';
    os << "objective: " << to_string(config.objective) << '\n';
    os << "pulses: " << observed.n_pulses << '\n';
    os << std::setprecision(6);
    for (auto const& [order, m] : observed.g)
        os << "g(" << order << ")_exp = " << m.value << " +- " << m.sigma << '\n';
    for (auto const& [s, m] : observed.theta)
        os << "theta[" << s.label() << "]_exp = " << m.value << " +- " << m.sigma << '\n';
    if (config.field)
        os << "expected field: " << ModelFamily::of(*config.field).label() << '\n';
    os << "selected family: " << result.best.family.label()
       << "  (LS = " << result.best.ls_value
       << ", lambda_theta = " << result.best.lambda_theta
       << (result.best.converged ? "" : ", NOT converged") << ")\n";
    os << "reconstructed modes (S_rec = " << result.s_rec << "):\n";
    for (auto const& m : result.pruned.modes())
        os << "  " << to_string(m.kind()) << "  " << m.mean() << '\n';
    if (result.fidelity)
        os << "fidelity: " << *result.fidelity << '\n';
    os << "ranked families:\n";
    for (auto const& f : result.ranked)
    {
        os << "  " << std::setw(22) << std::left << f.family.label() << std::right
           << " LS = " << f.ls_value << (f.converged ? "" : "  (not converged)");
        if (!f.error.empty())
            os << "  error: " << f.error;
        os << '\n';
    }
}

//---------------------------------------------------------------------------//
json load_json(std::filesystem::path const& path)
{
    std::ifstream is(path);
    if (!is)
        throw IoError("cannot open " + path.string());
    try
    {
        return json::parse(is);
    }
    catch (json::parse_error const& e)
    {
        throw ValidationError(path.string() + ": malformed JSON: " + e.what());
    }
}

void save_json(std::filesystem::path const& path, json const& j)
{
    save_text(path, j.dump(2) + "\n");
}

void save_text(std::filesystem::path const& path, std::string const& text)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw IoError("cannot write " + path.string());
    os << text;
    if (!os)
        throw IoError("failed writing " + path.string());
}

//---------------------------------------------------------------------------//
}  // namespace modrec
