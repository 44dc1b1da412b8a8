// rpnjoin: generate relations, print plans, evaluate multi-join queries and
// run the shape benchmark from the command line.
//
// Data goes to files or stdout; diagnostics and statistics go to stderr.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rpnjoin/rpnjoin.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kParse = 3,
  kCatalog = 4,
  kCardinalityLimit = 5,
  kIo = 6,
  kInvalidInput = 7,
};

using namespace rpnjoin;

struct GenArgs {
  std::string name = "R";
  std::size_t count = 0;
  Value key_lo = 0;
  Value key_hi = 0;
  std::uint64_t seed = 0;
  std::string out;
};

struct PlanArgs {
  std::vector<std::string> relations;
  std::string shape;
  std::string expr;
};

struct RunArgs {
  PlanArgs plan;
  std::vector<std::string> inputs;
  std::string algorithm = "sortmerge";
  std::string mode = "sequential";
  std::string out;
  bool stats = false;
};

struct BenchArgs {
  std::vector<std::size_t> tuples;
  std::vector<std::size_t> relations;
  bool paired = false;
  bool cross = false;
  std::vector<std::string> shapes = {"linear", "bushy"};
  std::string algorithm = "sortmerge";
  std::uint64_t seed = 1;
  std::size_t reps = 5;
  std::string out;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

PlanTree build_plan(const PlanArgs& args) {
  if (args.expr.empty() == args.shape.empty()) {
    throw UsageError("give exactly one of --shape or --expr");
  }
  if (!args.expr.empty()) {
    if (!args.relations.empty()) {
      throw UsageError("--relations is only used with --shape");
    }
    return parse_plan(args.expr);
  }
  auto shape = parse_plan_shape(args.shape);
  if (!shape) {
    throw UsageError("unknown shape '" + args.shape + "'");
  }
  if (args.relations.empty()) {
    throw UsageError("--shape needs --relations");
  }
  return make_plan(*shape, args.relations);
}

int cmd_gen(const GenArgs& args) {
  Relation r = generate_relation(args.name, args.count, KeyRange{args.key_lo, args.key_hi}, args.seed);
  relation_to_csv(r, args.out);
  return kOk;
}

int cmd_plan(const PlanArgs& args) {
  const PlanTree plan = build_plan(args);
  std::cout << plan_to_text(plan) << '\n' << rpn_to_text(to_rpn(plan)) << '\n';
  return kOk;
}

int cmd_run(const RunArgs& args) {
  const PlanTree plan = build_plan(args.plan);
  auto algorithm = parse_join_algorithm(args.algorithm);
  if (!algorithm) throw UsageError("unknown algorithm '" + args.algorithm + "'");
  auto mode = parse_eval_mode(args.mode);
  if (!mode) throw UsageError("unknown mode '" + args.mode + "'");

  Catalog catalog;
  for (const auto& spec : args.inputs) {
    auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
      throw UsageError("--input expects name=path, got '" + spec + "'");
    }
    catalog.add(relation_from_csv(spec.substr(eq + 1), spec.substr(0, eq)));
  }

  EvalContext ctx(catalog, *algorithm, *mode);
  const Relation result = eval_plan(plan, ctx);
  if (args.out.empty()) {
    write_relation_csv(result, std::cout);
  } else {
    relation_to_csv(result, args.out);
  }
  std::cerr << "cardinality " << result.cardinality() << '\n';
  if (args.stats) {
    std::cerr << "tuple_comparisons " << ctx.counters.tuple_comparisons << " page_reads "
              << ctx.counters.page_reads << '\n';
  }
  return kOk;
}

int cmd_bench(const BenchArgs& args) {
  if (args.paired && args.cross) throw UsageError("--paired and --cross are exclusive");
  BenchConfig config;
  config.tuples_per_relation = args.tuples;
  config.relation_counts = args.relations;
  config.layout = args.cross ? GridLayout::kCross : GridLayout::kPaired;
  config.seed = args.seed;
  config.repetitions = args.reps;
  config.shapes.clear();
  for (const auto& s : args.shapes) {
    auto shape = parse_plan_shape(s);
    if (!shape) throw UsageError("unknown shape '" + s + "'");
    config.shapes.push_back(*shape);
  }
  auto algorithm = parse_join_algorithm(args.algorithm);
  if (!algorithm) throw UsageError("unknown algorithm '" + args.algorithm + "'");
  config.algorithm = *algorithm;

  const auto records = run_benchmark(config);
  if (args.out.empty()) {
    write_results_csv(records, std::cout);
  } else {
    write_results_csv(records, std::filesystem::path(args.out));
  }
  return kOk;
}

void add_plan_options(CLI::App* cmd, PlanArgs& args) {
  cmd->add_option("--relations", args.relations, "Comma-separated relation names")
      ->delimiter(',');
  cmd->add_option("--shape", args.shape, "Generated plan shape: linear or bushy");
  cmd->add_option("--expr", args.expr, "Infix plan, e.g. \"(R1 JOIN R2) JOIN R3\"");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-join evaluation over RPN plan trees"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a random relation CSV");
  gen_cmd->add_option("--name", gen.name, "Relation name");
  gen_cmd->add_option("--count", gen.count, "Number of tuples")->required();
  gen_cmd->add_option("--key-lo", gen.key_lo, "Inclusive lower key bound")->required();
  gen_cmd->add_option("--key-hi", gen.key_hi, "Exclusive upper key bound")->required();
  gen_cmd->add_option("--seed", gen.seed, "Generator seed")->required();
  gen_cmd->add_option("--out", gen.out, "Output CSV path")->required();

  PlanArgs plan;
  auto* plan_cmd = app.add_subcommand("plan", "Print a plan in infix and RPN form");
  add_plan_options(plan_cmd, plan);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Evaluate a multi-join plan over CSV inputs");
  add_plan_options(run_cmd, run.plan);
  run_cmd->add_option("--input", run.inputs, "name=path of a relation CSV (repeatable)");
  run_cmd->add_option("--algorithm", run.algorithm, "sortmerge|nested|block|rocking|hash");
  run_cmd->add_option("--mode", run.mode, "sequential|concurrent");
  run_cmd->add_option("--out", run.out, "Result CSV path (stdout if omitted)");
  run_cmd->add_flag("--stats", run.stats, "Print cost counters to stderr");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time linear and bushy plans over a grid");
  bench_cmd->add_option("--tuples", bench.tuples, "Tuples per relation")->delimiter(',')->required();
  bench_cmd->add_option("--relations", bench.relations, "Relation counts")->delimiter(',')->required();
  bench_cmd->add_flag("--paired", bench.paired, "Zip the two lists (default)");
  bench_cmd->add_flag("--cross", bench.cross, "Use every combination of the two lists");
  bench_cmd->add_option("--shapes", bench.shapes, "linear,bushy")->delimiter(',');
  bench_cmd->add_option("--algorithm", bench.algorithm, "sortmerge|nested|block|rocking|hash");
  bench_cmd->add_option("--seed", bench.seed, "Base seed");
  bench_cmd->add_option("--reps", bench.reps, "Timed repetitions per cell");
  bench_cmd->add_option("--out", bench.out, "Results CSV path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen_cmd) return cmd_gen(gen);
    if (*plan_cmd) return cmd_plan(plan);
    if (*run_cmd) return cmd_run(run);
    if (*bench_cmd) return cmd_bench(bench);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const CatalogError& e) {
    std::cerr << "catalog error: " << e.what() << '\n';
    return kCatalog;
  } catch (const CardinalityLimitError& e) {
    std::cerr << "cardinality limit: " << e.what() << '\n';
    return kCardinalityLimit;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const InvalidRangeError& e) {
    std::cerr << "invalid range: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const MalformedProgramError& e) {
    std::cerr << "malformed program: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
