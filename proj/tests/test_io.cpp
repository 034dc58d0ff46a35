#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "modrec/errors.hpp"
#include "modrec/io.hpp"
#include "modrec/suite.hpp"

using namespace modrec;
using nlohmann::json;
namespace fs = std::filesystem;

namespace
{
json base_config()
{
    return json::parse(R"({
        "schema_version": 1,
        "name": "demo",
        "field": {"modes": [{"kind": "thermal", "mean": 0.2},
                            {"kind": "single_photon", "mean": 0.05}]},
        "detector_tree": {"split": [0.25, 0.25, 0.25, 0.25], "eff": [0.7, 0.63, 0.57, 0.5]},
        "n_pulses": 50000,
        "seed": 3,
        "s_max": 2,
        "bootstrap": {"n_resamples": 10}
    })");
}

std::string error_of(json const& j)
{
    try
    {
        scenario_from_json(j);
    }
    catch (ValidationError const& e)
    {
        return e.what();
    }
    return {};
}

fs::path scratch_dir(std::string const& name)
{
    auto dir = fs::temp_directory_path() / ("modrec_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(std::string const& args)
{
    std::string cmd = std::string(MODREC_CLI) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
}  // namespace

//---------------------------------------------------------------------------//
TEST_CASE("scenario config parsing")
{
    auto c = scenario_from_json(base_config());
    CHECK(c.name == "demo");
    REQUIRE(c.field);
    CHECK(c.field->size() == 2);
    CHECK(c.tree.eff()[3] == 0.5);
    CHECK(c.s_max == 2);
    CHECK(c.bootstrap.n_resamples == 10);
    CHECK(c.bootstrap.seed == 3);
    CHECK(c.objective == ObjectiveKind::g_theta);

    auto round = scenario_from_json(to_json(c));
    CHECK(round.field == c.field);
    CHECK(round.tree == c.tree);
    CHECK(round.n_pulses == c.n_pulses);
    CHECK(round.s_max == c.s_max);
}

TEST_CASE("scenario config validation names the field")
{
    auto j = base_config();
    j["detector_tree"]["split"] = {0.3, 0.3, 0.2, 0.1};
    CHECK(error_of(j).find("split") != std::string::npos);

    j = base_config();
    j["field"]["modes"] = {{{"kind", "poissonian"}, {"mean", 0.1}},
                           {{"kind", "poissonian"}, {"mean", 0.2}}};
    CHECK(error_of(j).find("one Poissonian") != std::string::npos);

    j = base_config();
    j["s_max"] = 5;
    CHECK(error_of(j).find("resolution") != std::string::npos);

    j = base_config();
    j["n_pulses"] = "many";
    CHECK(error_of(j).find("n_pulses") != std::string::npos);

    j = base_config();
    j["schema_version"] = 7;
    CHECK(error_of(j).find("schema_version") != std::string::npos);

    j = base_config();
    j.erase("detector_tree");
    CHECK(error_of(j).find("detector_tree") != std::string::npos);

    j = base_config();
    j["field"]["modes"][0]["mean"] = -1;
    CHECK(error_of(j).find("field.modes[0]") != std::string::npos);
}

TEST_CASE("tally CSV round trip")
{
    ClickTally t(3, {10, 1, 2, 3, 4, 5, 6, 1234567890123ull});
    std::stringstream ss;
    write_tally(ss, t);
    CHECK(ss.str().rfind("n_branches,3\nn_pulses,", 0) == 0);
    CHECK(read_tally(ss) == t);

    auto sim = simulate_pulses(FieldSpec({OpticalMode::thermal(0.4)}), DetectorTree::uniform(4, 0.6),
                               20000, 1);
    auto dir = scratch_dir("tally");
    save_tally(dir / "t.csv", sim);
    CHECK(load_tally(dir / "t.csv") == sim);
    CHECK_THROWS_AS(load_tally(dir / "missing.csv"), IoError);
}

TEST_CASE("malformed tallies are rejected")
{
    auto bad = [](std::string text) {
        std::istringstream is(text);
        CHECK_THROWS_AS(read_tally(is), ValidationError);
    };
    bad("");
    bad("n_branches,2\n");
    bad("n_branches,2\nn_pulses,3\n0,1\n1,1\n2,1\n");  // missing a row
    bad("n_branches,2\nn_pulses,5\n0,1\n1,1\n2,1\n3,1\n");  // wrong sum
    bad("n_branches,2\nn_pulses,4\n0,1\n1,1\n2,1\n4,1\n");  // out of range
    bad("n_branches,2\nn_pulses,4\n0,1\n1,1\n1,1\n3,1\n");  // repeated
    bad("n_branches,2\nn_pulses,4\n0,1\n1,x\n2,1\n3,1\n");
    bad("pulses,2\n");
}

TEST_CASE("correlation set JSON round trip")
{
    auto field = FieldSpec({OpticalMode::thermal(0.3), OpticalMode::poissonian(0.2)});
    auto set = correlation_set_theory(field, DetectorTree::uniform(4, 0.6), 4);
    auto j = to_json(set);
    CHECK(j["theta"][0]["branches"] == json::array({1, 2}));
    auto back = correlation_set_from_json(json::parse(j.dump()));
    CHECK(back.n_branches == 4);
    CHECK(back.g_basis == set.g_basis);
    CHECK(back.g == set.g);
    CHECK(back.theta == set.theta);
    CHECK(back.q_noclick == set.q_noclick);
    CHECK(back.q_noclick_all == set.q_noclick_all);
}

TEST_CASE("result document and report")
{
    auto c = scenario_from_json(base_config());
    auto obs = correlation_set_estimate(simulate_pulses(*c.field, c.tree, c.n_pulses, c.seed),
                                        c.bootstrap);
    auto r = reconstruct(obs, c.tree, c.s_max, c.field);
    auto doc = result_document(c, obs, r);
    CHECK(doc["schema_version"] == schema_version);
    CHECK(doc["config"]["name"] == "demo");
    CHECK(doc["ranked"].size() == r.ranked.size());
    CHECK(doc["fidelity"].is_number());
    CHECK(doc["best"].contains("lambda_theta"));
    CHECK(doc["best"]["lambda_g"].contains("2"));

    std::ostringstream report, plot;
    write_report(report, c, obs, r);
    CHECK(report.str().find("selected family") != std::string::npos);
    write_mode_plot(plot, c.field, r.pruned);
    CHECK(plot.str().rfind("mode,expected,reconstructed\n", 0) == 0);
}

//---------------------------------------------------------------------------//
TEST_CASE("case identifiers sort numerically")
{
    std::vector<std::string> ids{"X", "II", "IX", "I", "XV", "V", "10", "2", "abc"};
    std::sort(ids.begin(), ids.end(), case_less);
    CHECK(ids == std::vector<std::string>{"I", "2", "II", "V", "IX", "10", "X", "XV", "abc"});
}

TEST_CASE("suite parsing and error rows")
{
    auto j = json::parse(R"({
        "schema_version": 1,
        "defaults": {"detector_tree": {"split": [0.5, 0.5], "eff": [0.7, 0.6]},
                     "n_pulses": 20000, "s_max": 1, "bootstrap": {"n_resamples": 5}},
        "scenarios": [
            {"case": "II", "field": {"modes": [{"kind": "thermal", "mean": 0.3}]}, "seed": 2},
            {"case": "I", "field": {"modes": [{"kind": "poissonian", "mean": 0.3}]}, "seed": 1},
            {"case": "III", "field": {"modes": [{"kind": "thermal", "mean": 0.3}]}, "s_max": 3}
        ]
    })");
    auto entries = suite_from_json(j);
    REQUIRE(entries.size() == 3);
    CHECK(entries[0].config);
    CHECK_FALSE(entries[2].config);
    CHECK(entries[2].error.find("s_max") != std::string::npos);

    auto dir = scratch_dir("suite");
    auto outcomes = run_suite(entries, dir);
    REQUIRE(outcomes.size() == 3);
    CHECK(outcomes[0].row.case_id == "I");
    CHECK(outcomes[1].row.case_id == "II");
    CHECK(outcomes[2].row.case_id == "III");
    CHECK(outcomes[0].row.error.empty());
    CHECK(outcomes[0].row.g_theta.family == "1 Poi");
    CHECK_FALSE(outcomes[2].row.error.empty());
    CHECK(fs::exists(dir / "summary.csv"));
    CHECK(fs::exists(dir / "I" / "tally.csv"));
    CHECK(fs::exists(dir / "II" / "result_g-only.json"));
    CHECK_FALSE(fs::exists(dir / "III"));

    RunOptions two;
    two.workers = 2;
    auto again = run_suite(entries, std::nullopt, two);
    for (std::size_t i = 0; i < 3; ++i)
    {
        CHECK(again[i].row == outcomes[i].row);
        CHECK(again[i].tally == outcomes[i].tally);
    }

    CHECK(run_suite(suite_from_json(json::parse(R"({"scenarios": []})"))).empty());
}

//---------------------------------------------------------------------------//
TEST_CASE("command-line tool")
{
    auto dir = scratch_dir("cli");
    auto cfg = dir / "config.json";
    save_json(cfg, base_config());
    auto tally = (dir / "tally.csv").string();

    CHECK(run_cli("simulate " + cfg.string() + " --out " + tally) == 0);
    auto t = load_tally(tally);
    CHECK(t.n_pulses() == 50000);
    CHECK(run_cli("simulate " + cfg.string() + " --pulses 1000 --workers 2 --out "
                  + (dir / "small.csv").string())
          == 0);
    CHECK(load_tally(dir / "small.csv").n_pulses() == 1000);

    auto result = (dir / "result.json").string();
    CHECK(run_cli("reconstruct --tally " + tally + " --config " + cfg.string() + " --out "
                  + result)
          == 0);
    auto doc = load_json(result);
    CHECK(doc["fidelity"].is_number());
    CHECK(fs::exists(dir / "result_report.txt"));
    CHECK(fs::exists(dir / "result_modes.csv"));

    CHECK(run_cli("estimate " + tally + " --bootstrap-resamples 5 --out "
                  + (dir / "corr.json").string())
          == 0);
    CHECK(run_cli("reconstruct --correlations " + (dir / "corr.json").string() + " --config "
                  + cfg.string() + " --objective g-only --s-max 1")
          == 0);
    CHECK(run_cli("theory " + cfg.string() + " --out " + (dir / "theory.json").string()) == 0);
    CHECK(run_cli("exact " + cfg.string() + " --out " + (dir / "exact.csv").string()) == 0);

    // Validation failures exit with 2
    auto bad = base_config();
    bad["detector_tree"]["split"] = {0.3, 0.3, 0.2, 0.1};
    save_json(dir / "bad.json", bad);
    CHECK(run_cli("simulate " + (dir / "bad.json").string()) == 2);
    CHECK(run_cli("reconstruct --tally " + tally + " --config " + cfg.string() + " --s-max 5")
          == 2);
    save_tally(dir / "empty.csv", ClickTally(4));
    CHECK(run_cli("reconstruct --tally " + (dir / "empty.csv").string() + " --config "
                  + cfg.string())
          == 2);
    CHECK(run_cli("reconstruct --tally " + tally + " --objective bogus") == 2);

    // I/O failures exit with 3
    CHECK(run_cli("simulate " + (dir / "nope.json").string()) == 3);
    CHECK(run_cli("simulate " + cfg.string() + " --out " + (dir / "no/such/dir.csv").string())
          == 3);

    // Suites: an empty suite succeeds
    save_json(dir / "empty_suite.json", json::parse(R"({"schema_version": 1, "scenarios": []})"));
    CHECK(run_cli("suite " + (dir / "empty_suite.json").string() + " --out "
                  + (dir / "suite_out").string())
          == 0);
    CHECK(fs::exists(dir / "suite_out" / "summary.csv"));
}
