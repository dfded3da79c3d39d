#pragma once

// Command implementations behind the `patrol` executable. Each command returns
// a RunReport (exit code, JSON report, human summary) and never throws.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "patrol/error.hpp"
#include "patrol/instance.hpp"
#include "patrol/mst.hpp"
#include "patrol/oracle.hpp"
#include "patrol/planner.hpp"
#include "patrol/schedule.hpp"
#include "patrol/security.hpp"
#include "patrol/treecover.hpp"

namespace patrol::cli {

using nlohmann::json;

enum ExitCode : int { kOk = 0, kDomainFailure = 1, kIoOrUsage = 2 };

struct RunReport {
  int exit_code = kOk;
  json report = json::object();
  std::string summary;
  /// Extra document some commands emit (schedule, instance, CSV table).
  json document;
  std::string csv;
};

/// Drops wall-clock fields so reports from repeated runs compare equal.
inline json without_timings(json report) {
  if (report.is_object()) report.erase("timings_ms");
  return report;
}

namespace detail {

class Stopwatch {
 public:
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline json cost_json(CostValue c) { return to_json(c); }

/// Finite doubles only; JSON has no infinity.
inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json tree_json(const Tree& t, const Instance& inst) {
  json edges = json::array();
  for (const auto& e : t.edges) edges.push_back({inst.label(e.u), inst.label(e.v), e.length});
  std::vector<std::string> vertices;
  for (PointId v : t.vertices) vertices.push_back(inst.label(v));
  return {{"vertices", vertices}, {"edges", edges}, {"cost", t.cost}};
}

inline std::vector<PointId> resolve_labels(const Instance& inst, const std::vector<std::string>& labels) {
  if (labels.empty()) return all_points(inst);
  std::vector<PointId> ids;
  for (const auto& l : labels) {
    auto id = inst.find(l);
    if (!id) throw ValidationError("unknown point label '" + l + "'");
    ids.push_back(*id);
  }
  return ids;
}

inline json checks_json(const std::vector<InvariantCheck>& checks) {
  json out = json::array();
  for (const auto& c : checks) out.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return out;
}

/// Runs `body`, mapping library errors onto exit codes.
inline RunReport guarded(const std::string& command, const json& parameters,
                         const std::function<void(RunReport&)>& body) {
  RunReport r;
  r.report["command"] = command;
  r.report["parameters"] = parameters;
  Stopwatch clock;
  auto fail = [&](int code, const std::string& kind, const std::string& what) {
    r.exit_code = code;
    r.report["error"] = {{"kind", kind}, {"message", what}};
    r.summary = command + ": " + what + "\n";
  };
  try {
    body(r);
  } catch (const IoError& e) {
    fail(kIoOrUsage, "io", e.what());
  } catch (const ParseError& e) {
    fail(kIoOrUsage, "parse", e.what());
  } catch (const MetricError& e) {
    fail(kDomainFailure, "metric", e.what());
  } catch (const ValidationError& e) {
    fail(kDomainFailure, "validation", e.what());
  } catch (const LimitError& e) {
    fail(kDomainFailure, "limit", e.what());
  } catch (const std::invalid_argument& e) {
    fail(kIoOrUsage, "usage", e.what());
  } catch (const std::exception& e) {
    fail(kDomainFailure, "internal", e.what());
  }
  r.report["timings_ms"] = {{"total", clock.elapsed_ms()}};
  return r;
}

inline Instance load_with_digest(const std::string& path, RunReport& r) {
  Instance inst = load_instance_file(path);
  r.report["instance_digest"] = instance_digest(inst);
  return inst;
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline RunReport cmd_validate(const std::string& instance_path) {
  return detail::guarded("validate", {{"instance", instance_path}}, [&](RunReport& r) {
    const std::string text = read_file(instance_path);
    json violations = json::array();
    try {
      Instance inst = load_instance(text);
      r.report["instance_digest"] = instance_digest(inst);
      r.report["results"] = {{"valid", true}, {"points", inst.size()}, {"violations", violations}};
      r.summary = "valid instance with " + std::to_string(inst.size()) + " points\n";
    } catch (const MetricError& e) {
      std::vector<std::string> labels;
      try {
        labels = json::parse(text).at("labels").get<std::vector<std::string>>();
      } catch (const std::exception&) {
      }
      for (const auto& v : e.report().violations) {
        json w = {{"kind", to_string(v.kind)}, {"description", describe(v, &labels)}};
        std::vector<std::string> witness;
        auto name = [&](PointId p) { return p < labels.size() ? labels[p] : std::to_string(p); };
        witness.push_back(name(v.a));
        if (v.kind != ViolationKind::nonzero_diagonal) witness.push_back(name(v.b));
        if (v.kind == ViolationKind::triangle) witness.push_back(name(v.c));
        w["witness"] = witness;
        violations.push_back(w);
      }
      r.exit_code = kDomainFailure;
      r.report["results"] = {{"valid", false},
                             {"violations", violations},
                             {"triangle_violations_total", e.report().triangle_violations_total}};
      r.summary = std::string("invalid metric: ") + e.what() + "\n";
    }
  });
}

inline RunReport cmd_gen(const GeneratorSpec& spec, std::uint64_t seed) {
  json params = {{"n", spec.n},
                 {"weights", std::string(to_string(spec.weights))},
                 {"geometry", std::string(to_string(spec.geometry))},
                 {"seed", seed}};
  return detail::guarded("gen", params, [&](RunReport& r) {
    Instance inst = generate_random(spec, seed);
    r.report["instance_digest"] = instance_digest(inst);
    r.document = instance_to_json(inst);
    r.report["results"] = {{"points", inst.size()}};
    r.summary = "generated " + std::to_string(inst.size()) + "-point instance (digest " + instance_digest(inst) + ")\n";
  });
}

inline json plan_json(const PlanResult& p, const Instance& inst) {
  json classes = json::array();
  for (std::size_t k = 0; k < p.classes.size(); ++k) {
    const auto& c = p.classes[k];
    const auto& cover = p.tours.covers[k];
    std::vector<std::string> members;
    for (PointId x : c.members) members.push_back(inst.label(x));
    json trees = json::array();
    for (const auto& t : cover.trees) trees.push_back(detail::tree_json(t, inst));
    classes.push_back({{"index", c.index},
                       {"rounded_weight", c.rounded_weight},
                       {"members", members},
                       {"theta", c.theta},
                       {"budget", cover.budget_used},
                       {"max_tree_cost", cover.max_cost()},
                       {"trees", trees}});
  }
  json tours = json::array();
  for (std::size_t t = 0; t < p.tours.tours.size(); ++t) {
    tours.push_back({{"class", p.tours.tour_class[t]},
                     {"visits", schedule_to_json(p.tours.tours[t], inst)["visits"]},
                     {"length", period_length(p.tours.tours[t], inst)}});
  }
  json lists = json::array();
  for (const auto& l : p.lists) lists.push_back({{"index", l.index}, {"lambda", l.lambda}, {"tours", l.tour_ids}});
  json thresholds = json::array();
  for (const auto& t : p.lower_bound.thresholds) {
    thresholds.push_back({{"weight", t.weight},
                          {"points", t.points},
                          {"tour_bound", t.tour_bound},
                          {"exact_tsp", t.exact_tsp},
                          {"value", t.value}});
  }
  return {{"schedule", schedule_to_json(p.schedule, inst)},
          {"period_length", period_length(p.schedule, inst)},
          {"phases", p.phases},
          {"I", p.I},
          {"J", p.J},
          {"classes", classes},
          {"tours", tours},
          {"lists", lists},
          {"objective_inf", detail::cost_json(p.objective_inf)},
          {"objective_2", detail::cost_json(p.objective_2)},
          {"lower_bound", {{"value", p.lower_bound.value}, {"pairwise", p.lower_bound.pairwise}, {"thresholds", thresholds}}},
          {"envelope",
           {{"factor", kEnvelopeFactor},
            {"limit", p.envelope_limit()},
            {"ratio", detail::number_or_null(p.lower_bound_ratio())},
            {"bound", kEnvelopeFactor * static_cast<double>(p.I + 1)}}}};
}

inline RunReport cmd_plan(const std::string& instance_path, double eps) {
  return detail::guarded("plan", {{"instance", instance_path}, {"eps", eps}}, [&](RunReport& r) {
    Instance inst = detail::load_with_digest(instance_path, r);
    detail::Stopwatch clock;
    PlanResult p = plan(inst, eps);
    r.report["results"] = plan_json(p, inst);
    r.report["checks"] = detail::checks_json(p.checks);
    r.document = schedule_to_json(p.schedule, inst);
    if (!p.all_checks_passed()) r.exit_code = kDomainFailure;
    std::ostringstream os;
    os.precision(10);
    os << "plan: " << p.schedule.size() << " visits per period, " << p.phases << " phases, I=" << p.I
       << ", J=" << p.J << "\n"
       << "  objective_inf = " << p.objective_inf.value() << "\n"
       << "  objective_2   = " << p.objective_2.value() << "\n"
       << "  lower_bound   = " << p.lower_bound.value << "\n"
       << "  envelope      = " << p.objective_inf.value() << " <= " << p.envelope_limit() << "\n";
    for (const auto& c : p.checks) os << "  check " << c.name << ": " << (c.passed ? "pass" : "FAIL " + c.detail) << "\n";
    r.summary = os.str();
    r.report["timings_ms"]["plan"] = clock.elapsed_ms();
  });
}

inline RunReport cmd_eval(const std::string& instance_path, const std::string& schedule_path,
                          const std::vector<double>& exponents) {
  std::vector<std::string> names;
  for (double p : exponents) names.push_back(exponent_name(p));
  return detail::guarded("eval", {{"instance", instance_path}, {"schedule", schedule_path}, {"p", names}},
                         [&](RunReport& r) {
    Instance inst = detail::load_with_digest(instance_path, r);
    Schedule s = load_schedule(read_file(schedule_path), inst);
    json objectives = json::object(), per_point = json::object();
    std::ostringstream os;
    os.precision(10);
    os << "period length " << period_length(s, inst) << "\n";
    for (double p : exponents) {
      const auto name = exponent_name(p);
      const auto costs = point_costs(s, inst, p);
      json pts = json::object();
      for (PointId x = 0; x < inst.size(); ++x) pts[inst.label(x)] = detail::cost_json(costs[x]);
      per_point[name] = pts;
      const CostValue obj = weighted_objective(s, inst, p);
      objectives[name] = detail::cost_json(obj);
      os << "objective p=" << name << ": " << (obj.is_unbounded() ? std::string("UNBOUNDED") : std::to_string(obj.value()))
         << "\n";
    }
    r.report["results"] = {{"period_length", period_length(s, inst)},
                           {"visits", s.size()},
                           {"objectives", objectives},
                           {"point_costs", per_point}};
    r.summary = os.str();
  });
}

inline json oracle_json(const OracleResult& o, const Instance& inst) {
  json out = {{"value", detail::cost_json(o.value)},
              {"search_bound",
               {{"method", o.bound.method}, {"max_period", o.bound.max_period}, {"upper_bound_only", o.bound.upper_bound_only}}}};
  if (o.schedule) out["witness"] = schedule_to_json(*o.schedule, inst);
  if (!o.partition.empty()) {
    json parts = json::array();
    for (const auto& part : o.partition) {
      std::vector<std::string> labels;
      for (PointId x : part) labels.push_back(inst.label(x));
      parts.push_back(labels);
    }
    out["partition"] = parts;
  }
  return out;
}

inline RunReport cmd_oracle_tsp(const std::string& instance_path, const std::vector<std::string>& subset) {
  return detail::guarded("oracle-tsp", {{"instance", instance_path}, {"subset", subset}}, [&](RunReport& r) {
    Instance inst = detail::load_with_digest(instance_path, r);
    const auto o = held_karp_tsp(inst, detail::resolve_labels(inst, subset));
    r.report["results"] = oracle_json(o, inst);
    r.summary = "optimal tour cost " + std::to_string(o.value.value()) + "\n";
  });
}

inline RunReport cmd_oracle_opt(const std::string& instance_path, double p, std::size_t max_period) {
  return detail::guarded("oracle-opt", {{"instance", instance_path}, {"p", exponent_name(p)}, {"max_period", max_period}},
                         [&](RunReport& r) {
    Instance inst = detail::load_with_digest(instance_path, r);
    const auto o = brute_force_weighted_opt(inst, p, max_period);
    r.report["results"] = oracle_json(o, inst);
    r.summary = "best periodic schedule up to period " + std::to_string(max_period) + ": " +
                std::to_string(o.value.value()) + " (upper bound on the optimum)\n";
  });
}

inline RunReport cmd_oracle_cover(const std::string& instance_path, std::size_t k, const std::vector<std::string>& subset) {
  return detail::guarded("oracle-cover", {{"instance", instance_path}, {"k", k}, {"subset", subset}}, [&](RunReport& r) {
    Instance inst = detail::load_with_digest(instance_path, r);
    const auto o = partition_tree_cover_oracle(inst, detail::resolve_labels(inst, subset), k);
    r.report["results"] = oracle_json(o, inst);
    r.summary = "best partition max MST cost " + std::to_string(o.value.value()) + "\n";
  });
}

inline RunReport cmd_treecover(const std::string& instance_path, std::size_t k, double eps,
                               const std::vector<std::string>& subset) {
  return detail::guarded("treecover", {{"instance", instance_path}, {"k", k}, {"eps", eps}, {"subset", subset}},
                         [&](RunReport& r) {
    Instance inst = detail::load_with_digest(instance_path, r);
    const auto cover = minmax_tree_cover(inst, detail::resolve_labels(inst, subset), k, eps);
    json trees = json::array();
    for (const auto& t : cover.trees) trees.push_back(detail::tree_json(t, inst));
    r.report["results"] = {{"budget", cover.budget_used},
                           {"failed_budget", cover.budget_failed},
                           {"max_tree_cost", cover.max_cost()},
                           {"trees", trees}};
    r.summary = std::to_string(cover.trees.size()) + " trees, max cost " + std::to_string(cover.max_cost()) +
                " at budget " + std::to_string(cover.budget_used) + "\n";
  });
}

inline RunReport cmd_attack(const std::string& instance_path, const std::string& schedule_path) {
  return detail::guarded("attack", {{"instance", instance_path}, {"schedule", schedule_path}}, [&](RunReport& r) {
    Instance inst = detail::load_with_digest(instance_path, r);
    Schedule s = load_schedule(read_file(schedule_path), inst);
    const AttackOutcome best = attacker_best_response(s, inst);
    json targets = json::array();
    for (PointId x = 0; x < inst.size(); ++x) {
      const TargetAttack a = best_attack_on_target(s, inst, x);
      const CostValue c2 = point_cost(s, x, inst, 2.0);
      targets.push_back({{"target", inst.label(x)},
                         {"duration", detail::number_or_null(a.duration)},
                         {"utility", detail::cost_json(a.utility)},
                         {"expected_return_time", detail::cost_json(expected_return_time(s, inst, x))},
                         {"weighted_c2", c2.is_unbounded() ? json("UNBOUNDED") : json(inst.weight(x) * c2.value())}});
    }
    r.report["results"] = {{"best",
                            {{"target", inst.label(best.target)},
                             {"duration", detail::number_or_null(best.duration)},
                             {"utility", detail::cost_json(best.utility)}}},
                           {"targets", targets}};
    r.summary = best.utility.is_unbounded()
                    ? "target " + inst.label(best.target) + " is never visited: UNBOUNDED\n"
                    : "best attack: target " + inst.label(best.target) + ", duration " + std::to_string(best.duration) +
                          ", utility " + std::to_string(best.utility.value()) + "\n";
  });
}

inline RunReport cmd_mix(const std::string& instance_path, const std::string& strategy_path) {
  return detail::guarded("mix", {{"instance", instance_path}, {"strategy", strategy_path}}, [&](RunReport& r) {
    Instance inst = detail::load_with_digest(instance_path, r);
    json doc;
    try {
      doc = json::parse(read_file(strategy_path));
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("strategy document is not valid JSON: ") + e.what());
    }
    const MixedStrategy m = strategy_from_json(doc, inst);
    const MixResult mix = mix_tours(m, inst);
    r.document = schedule_to_json(mix.schedule, inst);
    r.report["results"] = {{"order", mix.order},
                           {"repetitions", mix.repetitions},
                           {"q", mix.threshold_probability},
                           {"longest_period", mix.longest_period},
                           {"K", mix.scale},
                           {"K_fallback", mix.scale_fallback},
                           {"visits", mix.schedule.size()},
                           {"period_length", period_length(mix.schedule, inst)},
                           {"objective_2", detail::cost_json(weighted_objective(mix.schedule, inst, 2.0))}};
    r.summary = "mixed tour with " + std::to_string(mix.schedule.size()) + " visits per period\n";
  });
}

struct BenchOptions {
  std::string corpus_dir;  // may be empty when only random instances are used
  double eps = 1e-6;
  std::size_t random_count = 0;
  std::uint64_t seed = 1;
  std::size_t random_max_n = 12;
  std::size_t max_period = 8;  // brute-force comparison bound (n <= 6 only)
};

/// Plans every corpus instance (files sorted by name) plus `random_count`
/// seeded instances, and tabulates objective / lower-bound ratios.
inline RunReport cmd_bench(const BenchOptions& opt) {
  json params = {{"corpus", opt.corpus_dir},
                 {"eps", opt.eps},
                 {"random", opt.random_count},
                 {"seed", opt.seed},
                 {"random_max_n", opt.random_max_n},
                 {"max_period", opt.max_period}};
  return detail::guarded("bench", params, [&](RunReport& r) {
    struct Entry {
      std::string name;
      std::function<Instance()> load;
    };
    std::vector<Entry> entries;
    if (!opt.corpus_dir.empty()) {
      namespace fs = std::filesystem;
      std::error_code ec;
      if (!fs::is_directory(opt.corpus_dir, ec)) throw IoError("corpus directory '" + opt.corpus_dir + "' not found");
      std::vector<fs::path> files;
      for (const auto& de : fs::directory_iterator(opt.corpus_dir)) {
        if (de.is_regular_file() && de.path().extension() == ".json") files.push_back(de.path());
      }
      std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
        return a.filename().string() < b.filename().string();
      });
      for (const auto& f : files) {
        entries.push_back({f.filename().string(), [f] { return load_instance_file(f.string()); }});
      }
    }
    static constexpr WeightLaw kLaws[] = {WeightLaw::uniform, WeightLaw::dyadic, WeightLaw::pareto, WeightLaw::unit};
    for (std::size_t i = 0; i < opt.random_count; ++i) {
      const std::uint64_t seed = opt.seed + i;
      const std::size_t span = opt.random_max_n >= 3 ? opt.random_max_n - 2 : 1;
      GeneratorSpec spec{3 + static_cast<std::size_t>(seed % span), kLaws[i % 4],
                         i % 2 == 0 ? Geometry::euclidean_plane : Geometry::random_closure};
      entries.push_back({"random-" + std::to_string(seed), [spec, seed] { return generate_random(spec, seed); }});
    }

    json rows = json::array();
    std::ostringstream csv;
    csv.precision(17);
    csv << "name,n,I,J,objective_inf,objective_2,lower_bound,ratio,envelope_bound,envelope_pass,checks_pass,"
           "bruteforce_inf,alg_over_bruteforce,status,error\n";
    std::size_t failed = 0, envelope_violations = 0;
    for (const auto& e : entries) {
      json row = {{"name", e.name}};
      try {
        Instance inst = e.load();
        PlanResult p = plan(inst, opt.eps);
        const double bound = kEnvelopeFactor * static_cast<double>(p.I + 1);
        const bool envelope_pass = p.objective_inf.value() <= p.envelope_limit();
        if (!envelope_pass) ++envelope_violations;
        row.update({{"n", inst.size()},
                    {"digest", instance_digest(inst)},
                    {"I", p.I},
                    {"J", p.J},
                    {"objective_inf", detail::cost_json(p.objective_inf)},
                    {"objective_2", detail::cost_json(p.objective_2)},
                    {"lower_bound", p.lower_bound.value},
                    {"ratio", detail::number_or_null(p.lower_bound_ratio())},
                    {"envelope_bound", bound},
                    {"envelope_pass", envelope_pass},
                    {"checks_pass", p.all_checks_passed()},
                    {"status", "ok"}});
        csv << e.name << ',' << inst.size() << ',' << p.I << ',' << p.J << ',' << p.objective_inf.value() << ','
            << p.objective_2.value() << ',' << p.lower_bound.value << ',' << p.lower_bound_ratio() << ',' << bound
            << ',' << envelope_pass << ',' << p.all_checks_passed() << ',';
        if (inst.size() <= kBruteForceMaxPoints && opt.max_period >= inst.size() &&
            opt.max_period <= kBruteForceMaxPeriod) {
          const auto bf = brute_force_weighted_opt(inst, kInfiniteExponent, opt.max_period);
          const double ratio = bf.value.value() > 0.0 ? p.objective_inf.value() / bf.value.value() : 0.0;
          row["bruteforce_inf"] = bf.value.value();
          row["alg_over_bruteforce"] = ratio;
          csv << bf.value.value() << ',' << ratio;
        } else {
          csv << ',';
        }
        csv << ",ok,\n";
      } catch (const std::exception& ex) {
        ++failed;
        row["status"] = "failed";
        row["error"] = ex.what();
        std::string msg = ex.what();
        std::replace(msg.begin(), msg.end(), ',', ';');
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        csv << e.name << ",,,,,,,,,,,,,failed," << msg << "\n";
      }
      rows.push_back(row);
    }
    r.csv = csv.str();
    r.report["results"] = {{"rows", rows},
                           {"instances", entries.size()},
                           {"failed", failed},
                           {"envelope_violations", envelope_violations}};
    r.summary = "bench: " + std::to_string(entries.size()) + " instances, " + std::to_string(failed) + " failed, " +
                std::to_string(envelope_violations) + " envelope violations\n";
  });
}

}  // namespace patrol::cli
