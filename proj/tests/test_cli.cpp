#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "patrol/cli.hpp"

using namespace patrol;
using patrol::cli::RunReport;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = PATROL_FIXTURES;

std::string fixture(const std::string& name) { return kFixtures + "/" + name; }

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / ("patrol_cli_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(PATROL_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(read_file(p.string())); }

}  // namespace

TEST(CliValidate, ValidInvalidAndMissing) {
  const RunReport ok = cli::cmd_validate(fixture("unit_triangle.json"));
  EXPECT_EQ(ok.exit_code, 0);
  EXPECT_TRUE(ok.report["results"]["violations"].empty());
  EXPECT_EQ(ok.report["instance_digest"].get<std::string>().size(), 16u);

  const RunReport bad = cli::cmd_validate(fixture("triangle_violation.json"));
  EXPECT_EQ(bad.exit_code, 1);
  ASSERT_EQ(bad.report["results"]["violations"].size(), 1u);
  EXPECT_EQ(bad.report["results"]["violations"][0]["witness"], nlohmann::json({"a", "b", "c"}));

  const RunReport missing = cli::cmd_validate(fixture("does_not_exist.json"));
  EXPECT_EQ(missing.exit_code, 2);
  EXPECT_EQ(missing.report["error"]["kind"], "io");

  EXPECT_EQ(cli::cmd_validate(fixture("malformed.json")).exit_code, 2);
}

TEST(CliPlan, UnitTriangleReport) {
  const RunReport r = cli::cmd_plan(fixture("unit_triangle.json"), 1e-6);
  ASSERT_EQ(r.exit_code, 0) << r.summary;
  const auto& res = r.report["results"];
  EXPECT_EQ(res["schedule"]["visits"], nlohmann::json({"a", "b", "a", "c"}));
  EXPECT_DOUBLE_EQ(res["objective_inf"].get<double>(), 2.0);
  EXPECT_DOUBLE_EQ(res["objective_2"].get<double>(), 2.0);
  EXPECT_DOUBLE_EQ(res["lower_bound"]["value"].get<double>(), 1.5);
  for (const auto& c : r.report["checks"]) EXPECT_TRUE(c["passed"].get<bool>()) << c["name"];
  EXPECT_EQ(r.document["visits"], nlohmann::json({"a", "b", "a", "c"}));
}

TEST(CliPlan, UniformAndSinglePoint) {
  const RunReport u = cli::cmd_plan(fixture("uniform_square.json"), 1e-6);
  ASSERT_EQ(u.exit_code, 0);
  EXPECT_EQ(u.report["results"]["tours"].size(), 1u);
  const RunReport one = cli::cmd_plan(fixture("single.json"), 1e-6);
  ASSERT_EQ(one.exit_code, 0);
  EXPECT_EQ(one.report["results"]["schedule"]["visits"], nlohmann::json({"a"}));
  EXPECT_DOUBLE_EQ(one.report["results"]["objective_inf"].get<double>(), 0.0);
}

TEST(CliPlan, DeterministicApartFromTimings) {
  const auto a = cli::cmd_plan(fixture("line4.json"), 1e-6);
  const auto b = cli::cmd_plan(fixture("line4.json"), 1e-6);
  EXPECT_EQ(cli::without_timings(a.report).dump(), cli::without_timings(b.report).dump());
}

TEST(CliEval, ObjectivesAndUnbounded) {
  const auto r = cli::cmd_eval(fixture("unit_triangle.json"), fixture("schedule_abac.json"), {2.0, kInfiniteExponent});
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_DOUBLE_EQ(r.report["results"]["objectives"]["inf"].get<double>(), 2.0);
  EXPECT_LE(r.report["results"]["objectives"]["2"].get<double>(), r.report["results"]["objectives"]["inf"].get<double>());
  const auto miss = cli::cmd_eval(fixture("unit_triangle.json"), fixture("schedule_missing.json"), {kInfiniteExponent});
  ASSERT_EQ(miss.exit_code, 0);
  EXPECT_EQ(miss.report["results"]["objectives"]["inf"], "UNBOUNDED");
  const auto unknown = cli::cmd_eval(fixture("unit_triangle.json"), fixture("schedule_unknown.json"), {2.0});
  EXPECT_EQ(unknown.exit_code, 1);
}

TEST(CliOracles, TspOptCoverAndLimits) {
  const auto tsp = cli::cmd_oracle_tsp(fixture("line4.json"), {});
  ASSERT_EQ(tsp.exit_code, 0);
  EXPECT_DOUBLE_EQ(tsp.report["results"]["value"].get<double>(), 6.0);
  const auto sub = cli::cmd_oracle_tsp(fixture("line4.json"), {"p0", "p2"});
  EXPECT_DOUBLE_EQ(sub.report["results"]["value"].get<double>(), 4.0);
  EXPECT_EQ(cli::cmd_oracle_tsp(fixture("line4.json"), {"nope"}).exit_code, 1);

  const auto opt = cli::cmd_oracle_opt(fixture("unit_triangle.json"), kInfiniteExponent, 6);
  ASSERT_EQ(opt.exit_code, 0);
  EXPECT_DOUBLE_EQ(opt.report["results"]["value"].get<double>(), 2.0);
  EXPECT_TRUE(opt.report["results"]["search_bound"]["upper_bound_only"].get<bool>());
  EXPECT_EQ(cli::cmd_oracle_opt(fixture("unit_triangle.json"), 2.0, 20).exit_code, 1);

  const auto cover = cli::cmd_oracle_cover(fixture("line4.json"), 2, {});
  ASSERT_EQ(cover.exit_code, 0);
  EXPECT_DOUBLE_EQ(cover.report["results"]["value"].get<double>(), 1.0);

  const auto tc = cli::cmd_treecover(fixture("line4.json"), 2, 1e-6, {});
  ASSERT_EQ(tc.exit_code, 0);
  EXPECT_DOUBLE_EQ(tc.report["results"]["budget"].get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(tc.report["results"]["max_tree_cost"].get<double>(), 2.0);
}

TEST(CliSecurity, AttackAndMix) {
  const auto a = cli::cmd_attack(fixture("unit_triangle.json"), fixture("schedule_abac.json"));
  ASSERT_EQ(a.exit_code, 0);
  EXPECT_EQ(a.report["results"]["best"]["target"], "a");
  EXPECT_DOUBLE_EQ(a.report["results"]["best"]["utility"].get<double>(), 0.5);
  const auto unb = cli::cmd_attack(fixture("unit_triangle.json"), fixture("schedule_missing.json"));
  EXPECT_EQ(unb.report["results"]["best"]["utility"], "UNBOUNDED");

  const auto m = cli::cmd_mix(fixture("unit_triangle.json"), fixture("strategy.json"));
  ASSERT_EQ(m.exit_code, 0) << m.summary;
  EXPECT_TRUE(m.document.contains("visits"));
  EXPECT_EQ(cli::cmd_mix(fixture("unit_triangle.json"), fixture("malformed.json")).exit_code, 2);
}

TEST(CliBench, CorpusRandomEmptyAndInvalid) {
  const auto r = cli::cmd_bench({fixture("corpus"), 1e-6, 3, 5, 8, 6});
  ASSERT_EQ(r.exit_code, 0);
  const auto& rows = r.report["results"]["rows"];
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0]["name"], "a_unit_triangle.json");
  EXPECT_EQ(rows[3]["name"], "random-5");
  for (const auto& row : rows) {
    EXPECT_EQ(row["status"], "ok");
    EXPECT_TRUE(row["envelope_pass"].get<bool>());
  }
  EXPECT_TRUE(rows[0].contains("bruteforce_inf"));
  EXPECT_EQ(std::count(r.csv.begin(), r.csv.end(), '\n'), 7);

  const fs::path empty = scratch() / "empty_corpus";
  fs::create_directories(empty);
  const auto e = cli::cmd_bench({empty.string(), 1e-6, 0, 1, 8, 6});
  EXPECT_EQ(e.exit_code, 0);
  EXPECT_TRUE(e.report["results"]["rows"].empty());

  const auto inv = cli::cmd_bench({fixture("corpus_with_invalid"), 1e-6, 0, 1, 8, 6});
  EXPECT_EQ(inv.exit_code, 0);
  const auto& irows = inv.report["results"]["rows"];
  ASSERT_EQ(irows.size(), 3u);
  EXPECT_EQ(irows[0]["status"], "ok");
  EXPECT_EQ(irows[1]["status"], "failed");
  EXPECT_EQ(irows[2]["status"], "ok");

  EXPECT_EQ(cli::cmd_bench({fixture("no_such_dir"), 1e-6, 0, 1, 8, 6}).exit_code, 2);
}

TEST(CliBinary, ExitCodes) {
  const fs::path dir = scratch();
  EXPECT_EQ(run("validate " + fixture("unit_triangle.json")), 0);
  EXPECT_EQ(run("validate " + fixture("triangle_violation.json")), 1);
  EXPECT_EQ(run("validate " + fixture("missing.json")), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("eval " + fixture("unit_triangle.json") + " " + fixture("schedule_abac.json") + " --p 1"), 2);
  EXPECT_EQ(run("plan " + fixture("unit_triangle.json") + " --out " + (dir / "plan.json").string() +
                " --schedule-out " + (dir / "sched.json").string()),
            0);
  EXPECT_EQ(read_json(dir / "sched.json")["visits"], nlohmann::json({"a", "b", "a", "c"}));
  EXPECT_EQ(read_json(dir / "plan.json")["command"], "plan");
  EXPECT_EQ(run("eval " + fixture("unit_triangle.json") + " " + (dir / "sched.json").string() +
                " --p 2 --p inf --out " + (dir / "eval.json").string()),
            0);
  EXPECT_DOUBLE_EQ(read_json(dir / "eval.json")["results"]["objectives"]["inf"].get<double>(), 2.0);
  EXPECT_EQ(run("plan " + fixture("unit_triangle.json") + " --out /nonexistent/dir/plan.json"), 2);
}

TEST(CliBinary, GenThenPlanAndBenchFiles) {
  const fs::path dir = scratch();
  const auto inst = (dir / "gen.json").string();
  ASSERT_EQ(run("gen --n 12 --weights pareto --seed 4 --out " + inst), 0);
  EXPECT_EQ(load_instance_file(inst), generate_random({12, WeightLaw::pareto, Geometry::euclidean_plane}, 4));
  EXPECT_EQ(run("gen --n 5 --weights zipf --out " + inst), 2);
  EXPECT_EQ(run("bench " + fixture("corpus") + " --random 2 --seed 9 --out " + (dir / "bench.json").string() +
                " --csv " + (dir / "bench.csv").string()),
            0);
  EXPECT_EQ(read_json(dir / "bench.json")["results"]["rows"].size(), 5u);
  EXPECT_TRUE(fs::exists(dir / "bench.csv"));
}
