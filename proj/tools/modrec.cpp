//---------------------------------------------------------------------------//
//! \file modrec.cpp
//! Command-line front end: simulate, estimate, reconstruct and run suites.
//---------------------------------------------------------------------------//
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "modrec/errors.hpp"
#include "modrec/io.hpp"
#include "modrec/suite.hpp"

namespace fs = std::filesystem;
using namespace modrec;

namespace
{
enum ExitCode
{
    exit_ok = 0,
    exit_validation = 2,
    exit_io = 3,
    exit_numerical = 4,
};

//! Command-line values that override the config file.
struct Overrides
{
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> pulses;
    std::optional<std::size_t> n_max;
    std::optional<int> s_max;
    std::optional<int> exact_s;
    std::optional<double> presence_threshold;
    std::optional<int> bootstrap_resamples;
    std::optional<std::string> objective;

    void apply(ScenarioConfig& c) const
    {
        if (seed)
        {
            c.seed = *seed;
            c.bootstrap.seed = *seed;
        }
        if (pulses)
            c.n_pulses = *pulses;
        if (n_max)
            c.n_max = *n_max;
        if (s_max)
            c.s_max = *s_max;
        if (exact_s)
            c.exact_s = *exact_s;
        if (presence_threshold)
            c.presence_threshold = *presence_threshold;
        if (bootstrap_resamples)
            c.bootstrap.n_resamples = *bootstrap_resamples;
        if (objective)
            c.objective = objective_kind_from_string(*objective);
        c.validate();
    }
};

void add_science_flags(CLI::App* cmd, Overrides& o)
{
    cmd->add_option("--seed", o.seed, "RNG seed (simulation and bootstrap)");
    cmd->add_option("--pulses", o.pulses, "number of simulated pulses");
    cmd->add_option("--n-max", o.n_max, "photon-number truncation for exact sums");
    cmd->add_option("--s-max", o.s_max, "largest model size to fit");
    cmd->add_option("--exact-s", o.exact_s, "fit only models of exactly this size");
    cmd->add_option("--presence-threshold", o.presence_threshold,
                    "drop reconstructed modes below this mean");
    cmd->add_option("--bootstrap-resamples", o.bootstrap_resamples,
                    "bootstrap resamples for uncertainties");
    cmd->add_option("--objective", o.objective, "g-theta or g-only")
        ->check(CLI::IsMember({"g-theta", "g-only"}));
}

std::ostream& open_out(std::optional<fs::path> const& path, std::ofstream& file)
{
    if (!path)
        return std::cout;
    file.open(*path, std::ios::binary);
    if (!file)
        throw IoError("cannot write " + path->string());
    return file;
}

fs::path sibling(fs::path const& p, std::string const& suffix)
{
    return p.parent_path() / (p.stem().string() + suffix);
}

//---------------------------------------------------------------------------//
int cmd_simulate(fs::path const& config_path, std::optional<fs::path> const& out,
                 Overrides const& o, unsigned int workers)
{
    auto config = load_scenario(config_path);
    o.apply(config);
    if (!config.field)
        throw ValidationError("field: simulation needs a field");
    SimulationOptions sim;
    sim.workers = workers;
    auto tally = simulate_pulses(*config.field, config.tree, config.n_pulses, config.seed, sim);
    std::ofstream file;
    write_tally(open_out(out, file), tally);
    return exit_ok;
}

int cmd_exact(fs::path const& config_path, std::optional<fs::path> const& out,
              Overrides const& o)
{
    auto config = load_scenario(config_path);
    o.apply(config);
    if (!config.field)
        throw ValidationError("field: exact distribution needs a field");
    auto dist = exact_click_distribution(*config.field, config.tree, config.n_max);
    if (dist.truncation_warning)
    {
        std::cerr << "warning: photon-number truncation discards "
                  << dist.truncation_deficit << " of the probability\n";
    }
    std::ofstream file;
    auto& os = open_out(out, file);
    os << "pattern,probability\n" << std::setprecision(17);
    for (std::size_t p = 0; p < dist.probs.size(); ++p)
        os << p << ',' << dist.probs[p] << '\n';
    return exit_ok;
}

int cmd_theory(fs::path const& config_path, std::optional<fs::path> const& out,
               std::string const& basis, Overrides const& o)
{
    auto config = load_scenario(config_path);
    o.apply(config);
    if (!config.field)
        throw ValidationError("field: theory needs a field");
    auto set = correlation_set_theory(*config.field, config.tree, config.tree.n_branches(),
                                      g_basis_from_string(basis));
    std::ofstream file;
    open_out(out, file) << to_json(set).dump(2) << '\n';
    return exit_ok;
}

int cmd_estimate(fs::path const& tally_path, std::optional<fs::path> const& out,
                 Overrides const& o)
{
    auto tally = load_tally(tally_path);
    BootstrapConfig boot;
    if (o.seed)
        boot.seed = *o.seed;
    if (o.bootstrap_resamples)
        boot.n_resamples = *o.bootstrap_resamples;
    auto set = correlation_set_estimate(tally, boot);
    std::ofstream file;
    open_out(out, file) << to_json(set).dump(2) << '\n';
    return exit_ok;
}

int cmd_reconstruct(std::optional<fs::path> const& tally_path,
                    std::optional<fs::path> const& corr_path,
                    std::optional<fs::path> const& config_path,
                    std::optional<fs::path> const& out,
                    Overrides const& o,
                    unsigned int workers)
{
    if (tally_path.has_value() == corr_path.has_value())
        throw ValidationError("reconstruct: give exactly one of --tally or --correlations");

    ScenarioConfig config;
    if (config_path)
        config = load_scenario(*config_path);
    o.apply(config);

    CorrelationSet observed;
    if (tally_path)
    {
        auto tally = load_tally(*tally_path);
        if (tally.n_branches() != config.tree.n_branches())
            throw ValidationError("tally and detector_tree disagree on the branch count");
        observed = correlation_set_estimate(tally, config.bootstrap);
    }
    else
    {
        observed = correlation_set_from_json(load_json(*corr_path));
    }

    ReconstructOptions ropt;
    ropt.fit.objective = config.objective;
    ropt.fit.seed = config.seed;
    ropt.exact_s = config.exact_s;
    ropt.presence_threshold = config.presence_threshold;
    ropt.workers = workers;
    auto result = reconstruct(observed, config.tree, config.s_max, config.field, ropt);

    std::ostringstream report;
    write_report(report, config, observed, result);
    if (out)
    {
        save_json(*out, result_document(config, observed, result));
        save_text(sibling(*out, "_report.txt"), report.str());
        std::ostringstream plot;
        write_mode_plot(plot, config.field, result.pruned);
        save_text(sibling(*out, "_modes.csv"), plot.str());
    }
    std::cout << report.str();
    return exit_ok;
}

int cmd_suite(fs::path const& suite_path, fs::path const& out, Overrides const& o,
              unsigned int workers)
{
    auto entries = suite_from_json(load_json(suite_path));
    for (auto& e : entries)
    {
        if (!e.config)
            continue;
        try
        {
            o.apply(*e.config);
        }
        catch (Error const& ex)
        {
            e.config.reset();
            e.error = ex.what();
        }
    }
    RunOptions ropt;
    ropt.workers = workers;
    auto outcomes = run_suite(entries, out, ropt);
    std::vector<SuiteRow> rows;
    for (auto const& oc : outcomes)
        rows.push_back(oc.row);
    write_summary_table(std::cout, rows);
    return exit_ok;
}

}  // namespace

//---------------------------------------------------------------------------//
int main(int argc, char** argv)
{
    CLI::App app{"Multimode field simulation and mode-structure reconstruction"};
    app.require_subcommand(1);

    Overrides o;
    std::optional<fs::path> out;
    fs::path config_path;
    unsigned int workers = 1;

    auto* sim = app.add_subcommand("simulate", "simulate click tallies from a config");
    sim->add_option("config", config_path, "scenario config (JSON)")->required();
    sim->add_option("--out", out, "tally CSV (default stdout)");
    sim->add_option("--workers", workers, "simulation threads (0 = all cores)");
    add_science_flags(sim, o);

    auto* exact = app.add_subcommand("exact", "exact click-pattern probabilities");
    exact->add_option("config", config_path, "scenario config (JSON)")->required();
    exact->add_option("--out", out, "CSV output (default stdout)");
    add_science_flags(exact, o);

    std::string basis = "photon-number";
    auto* theory = app.add_subcommand("theory", "theoretical correlation set of a field");
    theory->add_option("config", config_path, "scenario config (JSON)")->required();
    theory->add_option("--out", out, "JSON output (default stdout)");
    theory->add_option("--basis", basis, "g basis: photon-number or click")
        ->check(CLI::IsMember({"photon-number", "click"}));
    add_science_flags(theory, o);

    fs::path tally_in;
    auto* est = app.add_subcommand("estimate", "estimate g and theta from a tally");
    est->add_option("tally", tally_in, "tally CSV")->required();
    est->add_option("--out", out, "JSON output (default stdout)");
    add_science_flags(est, o);

    std::optional<fs::path> tally_opt, corr_opt, config_opt;
    auto* rec = app.add_subcommand("reconstruct", "reconstruct the mode structure");
    rec->add_option("--tally", tally_opt, "tally CSV");
    rec->add_option("--correlations", corr_opt, "correlation-set JSON");
    rec->add_option("--config", config_opt, "scenario config (tree, truth, options)");
    rec->add_option("--out", out,
                    "result JSON; report and plot data are written beside it");
    rec->add_option("--workers", workers, "fit threads (0 = all cores)");
    add_science_flags(rec, o);

    fs::path suite_out;
    auto* suite = app.add_subcommand("suite", "run a scenario suite");
    suite->add_option("config", config_path, "suite config (JSON)")->required();
    suite->add_option("--out", suite_out, "output directory")->required();
    suite->add_option("--workers", workers, "concurrent scenarios (0 = all cores)");
    add_science_flags(suite, o);

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        int code = app.exit(e);
        return code == 0 ? exit_ok : exit_validation;
    }

    try
    {
        if (*sim)
            return cmd_simulate(config_path, out, o, workers);
        if (*exact)
            return cmd_exact(config_path, out, o);
        if (*theory)
            return cmd_theory(config_path, out, basis, o);
        if (*est)
            return cmd_estimate(tally_in, out, o);
        if (*rec)
            return cmd_reconstruct(tally_opt, corr_opt, config_opt, out, o, workers);
        if (*suite)
            return cmd_suite(config_path, suite_out, o, workers);
    }
    catch (IoError const& e)
    {
        std::cerr << "I/O error: " << e.what() << '\n';
        return exit_io;
    }
    catch (fs::filesystem_error const& e)
    {
        std::cerr << "I/O error: " << e.what() << '\n';
        return exit_io;
    }
    catch (NumericalFailure const& e)
    {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return exit_numerical;
    }
    catch (Error const& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return exit_validation;
    }
    return exit_ok;
}
