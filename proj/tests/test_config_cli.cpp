#include "nanoevo/cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <locale>
#include <sstream>

using namespace nanoevo;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("nanoevo_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write_json_file(const fs::path& p, const json& doc)
{
    std::ofstream(p) << doc.dump(2);
    return p;
}

json small_config()
{
    json j = to_json(SimConfig{});
    j["world"]["width"] = 20;
    j["world"]["height"] = 20;
    j["world"]["cc_count"] = 40;
    j["world"]["hc_count"] = 20;
    j["world"]["agent_count"] = 40;
    j["learning"]["steps"] = 60;
    j["simulation"]["total_dose"] = 200;
    j["ssa"]["bolus"] = 5000;
    j["ssa"]["n_compartments"] = 10;
    return j;
}

std::string config_error_key(const json& doc)
{
    try {
        config_from_json(doc);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "";
}

} // namespace

TEST(Config, ShippedDefaultMatchesBuiltIn)
{
    const SimConfig shipped = load_config(std::string(NANOEVO_SOURCE_DIR) + "/config/default.json");
    EXPECT_EQ(to_json(shipped), to_json(SimConfig{}));
}

TEST(Config, RoundTrip)
{
    SimConfig c;
    c.seed = 99;
    c.world.placement = Placement::Scattered;
    c.evolution.signature_drift = SignatureDrift::PerStep;
    c.simulation.entry = EntrySites::LeftEdge;
    c.simulation.dose_sweep = {0, 10, 20};
    c.ssa.boundary = Boundary::Source;
    c.ssa.k_hop_override = 0.0;
    c.kinetics.directions = {1, -1, 1, 1};
    EXPECT_EQ(to_json(config_from_json(to_json(c))), to_json(c));
}

TEST(Config, UnknownKeyRejected)
{
    json j = to_json(SimConfig{});
    j["world"]["colour"] = "blue";
    EXPECT_EQ(config_error_key(j), "world.colour");
    json k = to_json(SimConfig{});
    k["extra"] = 1;
    EXPECT_EQ(config_error_key(k), "extra");
}

TEST(Config, RangeErrorsNameTheKey)
{
    json j = to_json(SimConfig{});
    j["evolution"]["replace_fraction"] = 0.7;
    EXPECT_EQ(config_error_key(j), "evolution.replace_fraction");
    j = to_json(SimConfig{});
    j["kinetics"]["curiosity"] = 0.0;
    EXPECT_EQ(config_error_key(j), "kinetics.curiosity");
    j = to_json(SimConfig{});
    j["ssa"]["threshold_fraction"] = 1.5;
    EXPECT_EQ(config_error_key(j), "ssa.threshold_fraction");
    j = to_json(SimConfig{});
    j["world"]["placement"] = "spiral";
    EXPECT_EQ(config_error_key(j), "world.placement");
    j = to_json(SimConfig{});
    j["simulation"]["total_dose"] = -3;
    EXPECT_EQ(config_error_key(j), "simulation.total_dose");
}

TEST(Config, PartialDocumentUsesDefaults)
{
    const SimConfig c = config_from_json(json{{"seed", 7}, {"world", {{"width", 30}}}});
    EXPECT_EQ(c.seed, 7u);
    EXPECT_EQ(c.world.width, 30);
    EXPECT_EQ(c.world.height, 50);
}

TEST(Config, ManifestAccepted)
{
    SimConfig c;
    c.seed = 1234;
    const SimConfig back = config_from_json(cli::detail::manifest("learn", c));
    EXPECT_EQ(back.seed, 1234u);
}

TEST(Config, MissingFileNamesPath)
{
    try {
        load_config("/nonexistent/conf.json");
        FAIL();
    } catch (const std::exception& e) {
        EXPECT_NE(std::string(e.what()).find("/nonexistent/conf.json"), std::string::npos);
    }
}

TEST(CmdLearn, WritesParseableOutputs)
{
    const auto dir = scratch("learn");
    const auto cfg = write_json_file(dir / "cfg.json", small_config());
    cli::CommonOptions o;
    o.config_path = cfg.string();
    o.out_dir = (dir / "out").string();
    std::ostringstream out, err;
    ASSERT_EQ(cli::cmd_learn(o, out, err), 0) << err.str();
    for (const char* f : {"stats.csv", "final_population.json", "run_manifest.json", "fitness.svg", "param_hist.svg"})
        EXPECT_GT(fs::file_size(dir / "out" / f), 0u) << f;
    const json pop = json::parse(slurp(dir / "out" / "final_population.json"));
    EXPECT_EQ(pop["agents"].size(), 40u);
    const json man = json::parse(slurp(dir / "out" / "run_manifest.json"));
    EXPECT_EQ(man["command"], "learn");
    const std::string stats = slurp(dir / "out" / "stats.csv");
    EXPECT_EQ(stats.rfind("step,time_s,alive_cc", 0), 0u);
    EXPECT_EQ(std::count(stats.begin(), stats.end(), '\n'), 61);
}

TEST(CmdLearn, MissingConfigIsNamed)
{
    cli::CommonOptions o;
    o.config_path = "/no/such/config.json";
    o.out_dir = scratch("learn_missing").string();
    std::ostringstream out, err;
    EXPECT_NE(cli::cmd_learn(o, out, err), 0);
    EXPECT_NE(err.str().find("/no/such/config.json"), std::string::npos);
}

TEST(CmdLearn, BadKeyGivesKeyLevelMessage)
{
    const auto dir = scratch("learn_badkey");
    json j = small_config();
    j["learning"]["stepz"] = 3;
    cli::CommonOptions o;
    o.config_path = write_json_file(dir / "cfg.json", j).string();
    o.out_dir = (dir / "out").string();
    std::ostringstream out, err;
    EXPECT_EQ(cli::cmd_learn(o, out, err), cli::kUsageError);
    EXPECT_NE(err.str().find("learning.stepz"), std::string::npos);
}

TEST(CmdLearn, RerunIsByteIdenticalAndLocaleIndependent)
{
    const auto dir = scratch("learn_rerun");
    const auto cfg = write_json_file(dir / "cfg.json", small_config());
    cli::CommonOptions o;
    o.config_path = cfg.string();
    o.out_dir = (dir / "a").string();
    std::ostringstream out, err;
    ASSERT_EQ(cli::cmd_learn(o, out, err), 0);

    struct Grouping : std::numpunct<char> {
        char do_decimal_point() const override { return ','; }
        char do_thousands_sep() const override { return '.'; }
        std::string do_grouping() const override { return "\1"; }
    };
    const std::locale previous = std::locale::global(std::locale(std::locale::classic(), new Grouping));
    o.config_path = (dir / "a" / "run_manifest.json").string();
    o.out_dir = (dir / "b").string();
    const int rc = cli::cmd_learn(o, out, err);
    std::locale::global(previous);
    ASSERT_EQ(rc, 0) << err.str();
    EXPECT_EQ(slurp(dir / "a" / "stats.csv"), slurp(dir / "b" / "stats.csv"));
    EXPECT_EQ(slurp(dir / "a" / "final_population.json"), slurp(dir / "b" / "final_population.json"));
}

TEST(CmdLearn, ReplicatesGetOwnDirectories)
{
    const auto dir = scratch("learn_reps");
    cli::CommonOptions o;
    o.config_path = write_json_file(dir / "cfg.json", small_config()).string();
    o.out_dir = (dir / "out").string();
    o.replicates = 3;
    o.jobs = 2;
    std::ostringstream out, err;
    ASSERT_EQ(cli::cmd_learn(o, out, err), 0) << err.str();
    for (const char* r : {"rep_000", "rep_001", "rep_002"})
        EXPECT_TRUE(fs::exists(dir / "out" / r / "stats.csv"));
    EXPECT_NE(slurp(dir / "out" / "rep_000" / "stats.csv"), slurp(dir / "out" / "rep_001" / "stats.csv"));
}

namespace {

fs::path learned_population(const fs::path& dir)
{
    cli::CommonOptions o;
    o.config_path = write_json_file(dir / "cfg.json", small_config()).string();
    o.out_dir = (dir / "learn").string();
    std::ostringstream out, err;
    EXPECT_EQ(cli::cmd_learn(o, out, err), 0) << err.str();
    return dir / "learn" / "final_population.json";
}

} // namespace

TEST(CmdSimulate, ZeroDose)
{
    const auto dir = scratch("sim_zero");
    const auto pop = learned_population(dir);
    json j = small_config();
    j["simulation"]["total_dose"] = 0;
    cli::CommonOptions o;
    o.config_path = write_json_file(dir / "zero.json", j).string();
    o.out_dir = (dir / "out").string();
    std::ostringstream out, err;
    ASSERT_EQ(cli::cmd_simulate(o, pop.string(), out, err), 0) << err.str();
    const json outcome = json::parse(slurp(dir / "out" / "outcome.json"));
    EXPECT_EQ(outcome["kill_fraction_cc"].get<double>(), 0.0);
    EXPECT_TRUE(fs::exists(dir / "out" / "timeseries.csv"));
}

TEST(CmdSimulate, SingleGenomeList)
{
    const auto dir = scratch("sim_single");
    const auto genomes = write_json_file(
        dir / "g.json", json{{"genomes", {{{"speed", 2}, {"p_a", 0.5}, {"p_d", 0.1}, {"p_i", 0.4}, {"p_k", 0.8}}}}});
    cli::CommonOptions o;
    o.config_path = write_json_file(dir / "cfg.json", small_config()).string();
    o.out_dir = (dir / "out").string();
    std::ostringstream out, err;
    ASSERT_EQ(cli::cmd_simulate(o, genomes.string(), out, err), 0) << err.str();
    EXPECT_EQ(json::parse(slurp(dir / "out" / "outcome.json"))["genome_pool_size"], 1);
}

TEST(CmdSimulate, DoseSweepRows)
{
    const auto dir = scratch("sim_sweep");
    const auto pop = learned_population(dir);
    json j = small_config();
    j["simulation"]["dose_sweep"] = {0, 100, 200, 400};
    cli::CommonOptions o;
    o.config_path = write_json_file(dir / "sweep.json", j).string();
    o.out_dir = (dir / "out").string();
    std::ostringstream out, err;
    ASSERT_EQ(cli::cmd_simulate(o, pop.string(), out, err), 0) << err.str();
    const std::string csv = slurp(dir / "out" / "dose_response.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
    EXPECT_EQ(csv.rfind("total_dose,", 0), 0u);
}

TEST(CmdSimulate, EmptyGenomeListFails)
{
    const auto dir = scratch("sim_empty");
    const auto genomes = write_json_file(dir / "g.json", json{{"genomes", json::array()}});
    cli::CommonOptions o;
    o.out_dir = (dir / "out").string();
    std::ostringstream out, err;
    EXPECT_NE(cli::cmd_simulate(o, genomes.string(), out, err), 0);
    EXPECT_FALSE(fs::exists(dir / "out" / "outcome.json"));
}

TEST(CmdValidate, NoHoppingGivesDepthOne)
{
    const auto dir = scratch("validate_nohop");
    json j = small_config();
    j["ssa"]["k_hop_override"] = 0.0;
    cli::CommonOptions o;
    o.config_path = write_json_file(dir / "cfg.json", j).string();
    o.out_dir = (dir / "out").string();
    std::ostringstream out, err;
    ASSERT_EQ(cli::cmd_validate(o, out, err), 0) << err.str();
    const json depth = json::parse(slurp(dir / "out" / "depth.json"));
    EXPECT_EQ(depth["penetration_depth"].get<double>(), 1.0);
    EXPECT_TRUE(fs::exists(dir / "out" / "penetration.svg"));
    const std::string csv = slurp(dir / "out" / "trajectory.csv");
    EXPECT_EQ(csv.rfind("time_s,compartment,np_free,receptors_free,complexes,np_internal,cell_alive", 0), 0u);
}

TEST(CmdValidate, TwentyReplicates)
{
    const auto dir = scratch("validate_reps");
    cli::CommonOptions o;
    o.config_path = write_json_file(dir / "cfg.json", small_config()).string();
    o.out_dir = (dir / "out").string();
    o.replicates = 20;
    std::ostringstream out, err;
    ASSERT_EQ(cli::cmd_validate(o, out, err), 0) << err.str();
    int files = 0;
    for (const auto& e : fs::directory_iterator(dir / "out"))
        files += e.path().filename().string().rfind("trajectory_r", 0) == 0;
    EXPECT_EQ(files, 20);
    EXPECT_TRUE(fs::exists(dir / "out" / "trajectory.csv"));
    const json depth = json::parse(slurp(dir / "out" / "depth.json"));
    EXPECT_EQ(depth["depths"].size(), 20u);
    EXPECT_EQ(json::parse(slurp(dir / "out" / "run_manifest.json"))["replicate_seeds"].size(), 20u);
}

TEST(CmdMapUnits, Examples)
{
    const auto dir = scratch("map_units");
    cli::MapUnitsOptions o;
    o.pa = 0.3;
    o.pd = 1.0;
    o.out_dir = dir.string();
    std::ostringstream out, err;
    ASSERT_EQ(cli::cmd_map_units(o, out, err), 0) << err.str();
    const json u = json::parse(slurp(dir / "units.json"));
    EXPECT_NEAR(u["ka"]["value"].get<double>(), 361.0, 0.005 * 361.0);
    EXPECT_EQ(u["kd"]["value"].get<double>(), 2e-4);
    EXPECT_EQ(u["step_duration_s"].get<double>(), 5000.0);

    cli::MapUnitsOptions z;
    z.pa = 0.0;
    z.out_dir = dir.string();
    ASSERT_EQ(cli::cmd_map_units(z, out, err), 0);
    const json v = json::parse(slurp(dir / "units.json"));
    EXPECT_EQ(v["ka"]["value"].get<double>(), 0.0);
    EXPECT_EQ(v["ka"]["range_flag"], "below range");
}

TEST(CmdMapUnits, OutOfDomainFails)
{
    cli::MapUnitsOptions o;
    o.pa = 1.5;
    o.out_dir = scratch("map_units_bad").string();
    std::ostringstream out, err;
    EXPECT_NE(cli::cmd_map_units(o, out, err), 0);
    cli::MapUnitsOptions none;
    none.out_dir = o.out_dir;
    EXPECT_NE(cli::cmd_map_units(none, out, err), 0);
}

TEST(Report, NumbersUseDotDecimal)
{
    EXPECT_EQ(report::format_number(0.5), "0.5");
    EXPECT_EQ(std::stod(report::format_number(2e-4)), 2e-4);
    EXPECT_EQ(report::format_number(1234.5), "1234.5");
    EXPECT_EQ(report::format_number(12345), "12345");
}
