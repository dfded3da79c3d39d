// patrol: command-line front-end. Reports go to --out as JSON, summaries to
// stdout, errors to stderr.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "patrol/cli.hpp"

namespace {

using patrol::cli::RunReport;

struct Outputs {
  std::string report;    // --out
  std::string document;  // --schedule-out / --strategy-out style side document
  std::string csv;       // --csv
};

int emit(const RunReport& r, const Outputs& out) {
  std::cout << r.summary;
  if (r.exit_code != patrol::cli::kOk && r.report.contains("error")) {
    std::cerr << "error: " << r.report["error"]["message"].get<std::string>() << "\n";
  }
  try {
    if (!out.report.empty()) patrol::write_file(out.report, r.report.dump(2) + "\n");
    if (!out.document.empty() && !r.document.is_null()) patrol::write_file(out.document, r.document.dump(2) + "\n");
    if (!out.csv.empty()) patrol::write_file(out.csv, r.csv);
  } catch (const patrol::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return patrol::cli::kIoOrUsage;
  }
  return r.exit_code;
}

std::vector<double> parse_exponents(const std::vector<std::string>& names) {
  std::vector<double> ps;
  for (const auto& n : names) ps.push_back(patrol::parse_exponent(n));
  return ps;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted patrolling schedules: planning, evaluation, oracles and attacker analysis"};
  app.require_subcommand(1);

  std::string instance, schedule, strategy, corpus;
  double eps = 1e-6;
  std::uint64_t seed = 1;
  std::size_t max_period = 8, k = 2, n = 10, random_count = 0, random_max_n = 12;
  std::vector<std::string> p_names{"inf"}, subset;
  std::string p_name = "inf", weights = "uniform", geometry = "euclidean-plane";
  Outputs out;

  auto add_instance = [&](CLI::App* c) { c->add_option("instance", instance, "Instance document")->required(); };
  auto add_out = [&](CLI::App* c) { c->add_option("--out", out.report, "Write the JSON report here"); };

  auto* validate = app.add_subcommand("validate", "Check an instance document and its metric");
  add_instance(validate);
  add_out(validate);

  auto* gen = app.add_subcommand("gen", "Generate a seeded random instance");
  gen->add_option("--n", n, "Number of points")->check(CLI::Range(3, 100000));
  gen->add_option("--weights", weights, "unit | uniform | dyadic | pareto");
  gen->add_option("--geometry", geometry, "euclidean-plane | random-closure");
  gen->add_option("--seed", seed, "Random seed");
  gen->add_option("--out", out.document, "Write the instance document here");
  gen->add_option("--report", out.report, "Write the JSON report here");

  auto* plan = app.add_subcommand("plan", "Build a periodic patrol schedule");
  add_instance(plan);
  plan->add_option("--eps", eps, "Relative precision of the budget search");
  add_out(plan);
  plan->add_option("--schedule-out", out.document, "Write the schedule document here");

  auto* eval = app.add_subcommand("eval", "Evaluate a schedule");
  add_instance(eval);
  eval->add_option("schedule", schedule, "Schedule document")->required();
  eval->add_option("--p", p_names, "Cost exponents: 2, inf or any number >= 2");
  add_out(eval);

  auto* tsp = app.add_subcommand("oracle-tsp", "Exact TSP tour (Held-Karp, up to 16 points)");
  add_instance(tsp);
  tsp->add_option("--subset", subset, "Point labels (default: all)");
  add_out(tsp);

  auto* opt = app.add_subcommand("oracle-opt", "Best periodic schedule by exhaustive search (n <= 6)");
  add_instance(opt);
  opt->add_option("--p", p_name, "Cost exponent");
  opt->add_option("--max-period", max_period, "Longest period searched");
  add_out(opt);

  auto* cover = app.add_subcommand("oracle-cover", "Best partition into k MSTs (<= 10 points)");
  add_instance(cover);
  cover->add_option("--k", k, "Number of trees");
  cover->add_option("--subset", subset, "Point labels (default: all)");
  add_out(cover);

  auto* tc = app.add_subcommand("treecover", "Approximate min-max k tree cover");
  add_instance(tc);
  tc->add_option("--k", k, "Number of trees");
  tc->add_option("--eps", eps, "Relative precision of the budget search");
  tc->add_option("--subset", subset, "Point labels (default: all)");
  add_out(tc);

  auto* attack = app.add_subcommand("attack", "Attacker best response against a schedule");
  add_instance(attack);
  attack->add_option("schedule", schedule, "Schedule document")->required();
  add_out(attack);

  auto* mix = app.add_subcommand("mix", "Derandomize a mixed strategy into one schedule");
  add_instance(mix);
  mix->add_option("strategy", strategy, "Mixed strategy document")->required();
  add_out(mix);
  mix->add_option("--schedule-out", out.document, "Write the schedule document here");

  auto* bench = app.add_subcommand("bench", "Plan a corpus and tabulate ratios");
  bench->add_option("corpus", corpus, "Directory of instance documents (*.json)");
  bench->add_option("--eps", eps, "Relative precision of the budget search");
  bench->add_option("--random", random_count, "Also plan this many seeded random instances");
  bench->add_option("--seed", seed, "First seed for random instances");
  bench->add_option("--max-n", random_max_n, "Largest random instance size")->check(CLI::Range(3, 100000));
  bench->add_option("--max-period", max_period, "Brute-force comparison period (n <= 6)");
  add_out(bench);
  bench->add_option("--csv", out.csv, "Write the CSV table here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : patrol::cli::kIoOrUsage;
  }

  try {
    namespace c = patrol::cli;
    if (*validate) return emit(c::cmd_validate(instance), out);
    if (*gen) {
      auto law = patrol::parse_weight_law(weights);
      auto geo = patrol::parse_geometry(geometry);
      if (!law || !geo) {
        std::cerr << "error: unknown weight law or geometry\n";
        return c::kIoOrUsage;
      }
      return emit(c::cmd_gen({n, *law, *geo}, seed), out);
    }
    if (*plan) return emit(c::cmd_plan(instance, eps), out);
    if (*eval) return emit(c::cmd_eval(instance, schedule, parse_exponents(p_names)), out);
    if (*tsp) return emit(c::cmd_oracle_tsp(instance, subset), out);
    if (*opt) return emit(c::cmd_oracle_opt(instance, patrol::parse_exponent(p_name), max_period), out);
    if (*cover) return emit(c::cmd_oracle_cover(instance, k, subset), out);
    if (*tc) return emit(c::cmd_treecover(instance, k, eps, subset), out);
    if (*attack) return emit(c::cmd_attack(instance, schedule), out);
    if (*mix) return emit(c::cmd_mix(instance, strategy), out);
    if (*bench) return emit(c::cmd_bench({corpus, eps, random_count, seed, random_max_n, max_period}), out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return patrol::cli::kIoOrUsage;
  }
  return patrol::cli::kIoOrUsage;
}
