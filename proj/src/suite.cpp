//---------------------------------------------------------------------------//
//! \file suite.cpp
//---------------------------------------------------------------------------//
#include "modrec/suite.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <iomanip>
#include <sstream>
#include <thread>

#include "modrec/errors.hpp"

namespace modrec
{
namespace fs = std::filesystem;
using nlohmann::json;

namespace
{
//---------------------------------------------------------------------------//
MethodSummary summarize(ReconstructionResult const& r, std::optional<FieldSpec> const& truth)
{
    MethodSummary m;
    m.fidelity = r.fidelity;
    m.s_rec = r.s_rec;
    m.family = r.pruned_family.label();
    m.converged = r.best.converged;
    if (truth)
        m.s_correct = correct_mode_count(ModelFamily::of(*truth), r.pruned_family);
    return m;
}

std::optional<int> roman_value(std::string const& s)
{
    if (s.empty())
        return std::nullopt;
    auto digit = [](char c) -> int {
        switch (c)
        {
            case 'I': return 1;
            case 'V': return 5;
            case 'X': return 10;
            case 'L': return 50;
            case 'C': return 100;
            case 'D': return 500;
            case 'M': return 1000;
            default: return 0;
        }
    };
    int total = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
    {
        int v = digit(s[i]);
        if (v == 0)
            return std::nullopt;
        int next = i + 1 < s.size() ? digit(s[i + 1]) : 0;
        total += v < next ? -v : v;
    }
    return total;
}

std::optional<long> numeric_value(std::string const& s)
{
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) {
            return std::isdigit(c);
        }))
    {
        return std::nullopt;
    }
    return std::stol(s);
}

std::string safe_dirname(std::string const& id)
{
    std::string out;
    for (char c : id)
        out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_';
    return out.empty() ? "_" : out;
}

std::string fmt(double v, int precision)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << v;
    return os.str();
}

std::string fmt(std::optional<double> v)
{
    return v ? fmt(*v, 4) : "-";
}

}  // namespace

//---------------------------------------------------------------------------//
int correct_mode_count(ModelFamily const& expected, ModelFamily const& reconstructed)
{
    return std::min(expected.n_poi, reconstructed.n_poi)
           + std::min(expected.n_th, reconstructed.n_th)
           + std::min(expected.n_sps, reconstructed.n_sps);
}

//---------------------------------------------------------------------------//
ScenarioOutcome run_scenario(std::string case_id,
                             ScenarioConfig const& config,
                             std::optional<fs::path> const& out_dir,
                             RunOptions const& options)
{
    ScenarioOutcome out;
    SuiteRow& row = out.row;
    row.case_id = std::move(case_id);
    try
    {
        config.validate();
        if (!config.field)
            throw ValidationError("field: a scenario to simulate needs a field");
        row.s_e = static_cast<int>(config.field->size());
        row.configuration = ModelFamily::of(*config.field).label();

        SimulationOptions sim;
        sim.workers = options.inner_workers;
        out.tally = simulate_pulses(*config.field, config.tree, config.n_pulses, config.seed, sim);
        out.observed = correlation_set_estimate(*out.tally, config.bootstrap);
        if (out.observed->g.count(2))
            row.g2_exp = out.observed->g.at(2);

        ReconstructOptions ropt;
        ropt.fit.seed = config.seed;
        ropt.exact_s = config.exact_s;
        ropt.presence_threshold = config.presence_threshold;
        ropt.workers = options.inner_workers;

        ropt.fit.objective = ObjectiveKind::g_theta;
        out.g_theta = reconstruct(*out.observed, config.tree, config.s_max, config.field, ropt);
        ropt.fit.objective = ObjectiveKind::g_only;
        out.g_only = reconstruct(*out.observed, config.tree, config.s_max, config.field, ropt);

        row.g_theta = summarize(*out.g_theta, config.field);
        row.g_only = summarize(*out.g_only, config.field);

        if (out_dir)
        {
            fs::create_directories(*out_dir);
            save_json(*out_dir / "config.json", to_json(config));
            save_tally(*out_dir / "tally.csv", *out.tally);
            save_json(*out_dir / "correlations.json", to_json(*out.observed));
            for (auto [kind, result] : {std::pair{ObjectiveKind::g_theta, &*out.g_theta},
                                        std::pair{ObjectiveKind::g_only, &*out.g_only}})
            {
                ScenarioConfig c = config;
                c.objective = kind;
                std::string const tag(to_string(kind));
                save_json(*out_dir / ("result_" + tag + ".json"),
                          result_document(c, *out.observed, *result));
                std::ostringstream report, plot;
                write_report(report, c, *out.observed, *result);
                write_mode_plot(plot, config.field, result->pruned);
                save_text(*out_dir / ("report_" + tag + ".txt"), report.str());
                save_text(*out_dir / ("modes_" + tag + ".csv"), plot.str());
            }
        }
    }
    catch (std::exception const& e)
    {
        row.error = e.what();
    }
    return out;
}

//---------------------------------------------------------------------------//
std::vector<SuiteEntry> suite_from_json(json const& j)
{
    if (!j.is_object())
        throw ValidationError("suite: expected a JSON object");
    if (j.contains("schema_version") && j.at("schema_version") != schema_version)
        throw ValidationError("suite: unsupported schema_version");
    json const defaults = j.value("defaults", json::object());
    if (!defaults.is_object())
        throw ValidationError("suite.defaults: expected an object");
    json const list = j.value("scenarios", json::array());
    if (!list.is_array())
        throw ValidationError("suite.scenarios: expected an array");

    std::vector<SuiteEntry> entries;
    for (std::size_t i = 0; i < list.size(); ++i)
    {
        SuiteEntry e;
        json merged = defaults;
        if (list[i].is_object())
            merged.merge_patch(list[i]);
        if (merged.contains("case") && merged.at("case").is_string())
            e.case_id = merged.at("case").get<std::string>();
        else if (merged.contains("case") && merged.at("case").is_number_integer())
            e.case_id = std::to_string(merged.at("case").get<long>());
        else
            e.case_id = "#" + std::to_string(i + 1);
        if (!merged.contains("name"))
            merged["name"] = e.case_id;
        merged.erase("case");
        try
        {
            if (!list[i].is_object())
                throw ValidationError("suite.scenarios: entry is not an object");
            e.config = scenario_from_json(merged);
        }
        catch (std::exception const& ex)
        {
            e.error = ex.what();
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

bool case_less(std::string const& a, std::string const& b)
{
    auto key = [](std::string const& s) -> std::optional<long> {
        if (auto r = roman_value(s))
            return *r;
        return numeric_value(s);
    };
    auto ka = key(a), kb = key(b);
    if (ka && kb && *ka != *kb)
        return *ka < *kb;
    if (ka.has_value() != kb.has_value())
        return ka.has_value();
    return a < b;
}

//---------------------------------------------------------------------------//
std::vector<ScenarioOutcome> run_suite(std::vector<SuiteEntry> const& entries,
                                       std::optional<fs::path> const& out_dir,
                                       RunOptions const& options)
{
    std::vector<ScenarioOutcome> outcomes(entries.size());
    auto run_one = [&](std::size_t i) {
        auto const& e = entries[i];
        if (!e.config)
        {
            outcomes[i].row.case_id = e.case_id;
            outcomes[i].row.error = e.error;
            return;
        }
        std::optional<fs::path> dir;
        if (out_dir)
            dir = *out_dir / safe_dirname(e.case_id);
        outcomes[i] = run_scenario(e.case_id, *e.config, dir, options);
    };

    unsigned int workers = options.workers == 0
                               ? std::max(1u, std::thread::hardware_concurrency())
                               : options.workers;
    workers = std::max(1u, std::min<unsigned int>(workers, entries.size()));
    if (workers <= 1)
    {
        for (std::size_t i = 0; i < entries.size(); ++i)
            run_one(i);
    }
    else
    {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> threads;
        for (unsigned int w = 0; w < workers; ++w)
        {
            threads.emplace_back([&] {
                for (std::size_t i; (i = next++) < entries.size();)
                    run_one(i);
            });
        }
    }

    std::stable_sort(outcomes.begin(), outcomes.end(), [](auto const& a, auto const& b) {
        return case_less(a.row.case_id, b.row.case_id);
    });
    if (out_dir)
    {
        fs::create_directories(*out_dir);
        std::vector<SuiteRow> rows;
        for (auto const& o : outcomes)
            rows.push_back(o.row);
        std::ostringstream csv, table;
        write_summary_csv(csv, rows);
        write_summary_table(table, rows);
        save_text(*out_dir / "summary.csv", csv.str());
        save_text(*out_dir / "summary.txt", table.str());
    }
    return outcomes;
}

//---------------------------------------------------------------------------//
void write_summary_csv(std::ostream& os, std::vector<SuiteRow> const& rows)
{
    os << "case,s_e,configuration,f_g_theta,s_rec_g_theta,s_correct_g_theta,"
          "family_g_theta,f_g,s_rec_g,s_correct_g,family_g,g2_exp,g2_sigma,error\n";
    auto quote = [](std::string const& s) {
        std::string out = "\"";
        for (char c : s)
            out += c == '"' ? std::string("\"\"") : std::string(1, c);
        return out + "\"";
    };
    os << std::setprecision(10);
    for (auto const& r : rows)
    {
        auto f = [](std::optional<double> v) {
            std::ostringstream s;
            if (v)
                s << std::setprecision(10) << *v;
            return s.str();
        };
        bool ok = r.error.empty();
        os << quote(r.case_id) << ',' << r.s_e << ',' << quote(r.configuration) << ','
           << f(r.g_theta.fidelity) << ',' << (ok ? std::to_string(r.g_theta.s_rec) : "")
           << ',' << (ok ? std::to_string(r.g_theta.s_correct) : "") << ','
           << quote(r.g_theta.family) << ',' << f(r.g_only.fidelity) << ','
           << (ok ? std::to_string(r.g_only.s_rec) : "") << ','
           << (ok ? std::to_string(r.g_only.s_correct) : "") << ','
           << quote(r.g_only.family) << ',' << (ok ? f(r.g2_exp.value) : "") << ','
           << (ok ? f(r.g2_exp.sigma) : "") << ',' << quote(r.error) << '\n';
    }
}

void write_summary_table(std::ostream& os, std::vector<SuiteRow> const& rows)
{
    os << std::left << std::setw(6) << "case" << std::setw(5) << "S_e" << std::setw(22)
       << "configuration" << std::setw(10) << "F_g+th" << std::setw(10) << "S_g+th"
       << std::setw(10) << "F_g" << std::setw(10) << "S_g" << "g2_exp\n";
    for (auto const& r : rows)
    {
        os << std::setw(6) << r.case_id;
        if (!r.error.empty())
        {
            os << "error: " << r.error << '\n';
            continue;
        }
        auto s = [](MethodSummary const& m) {
            return std::to_string(m.s_rec) + " (" + std::to_string(m.s_correct) + ")";
        };
        os << std::setw(5) << r.s_e << std::setw(22) << r.configuration << std::setw(10)
           << fmt(r.g_theta.fidelity) << std::setw(10) << s(r.g_theta) << std::setw(10)
           << fmt(r.g_only.fidelity) << std::setw(10) << s(r.g_only)
           << fmt(r.g2_exp.value, 3) << " +- " << fmt(r.g2_exp.sigma, 3) << '\n';
    }
    os << std::right;
}

//---------------------------------------------------------------------------//
}  // namespace modrec
