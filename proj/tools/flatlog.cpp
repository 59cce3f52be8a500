// flatlog: run Datalog programs over TSV fact directories, or benchmark the
// built-in synthetic suites.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "flatlog/error.hpp"
#include "flatlog/io.hpp"
#include "flatlog/parser.hpp"
#include "flatlog/runtime.hpp"
#include "flatlog/verify.hpp"
#include "flatlog/workloads.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace flatlog;

namespace {

constexpr int kProgramError = 1;
constexpr int kIoError = 2;
constexpr int kInternalError = 3;

// Facts above this count are not checked against the naive oracle unless
// --verify insists.
constexpr std::size_t kOracleLimit = 5000;

struct CommonFlags {
  std::size_t workers = 1;
  std::size_t threads = 0;  // 0: min(workers, hardware threads)
  std::string schedule = "seq";
  long long head_threshold = -1;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--workers", f.workers, "work slices per join (p)")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", f.threads, "OS threads (default: min(workers, cores))");
  cmd->add_option("--schedule", f.schedule, "rule scheduling within a stratum")
      ->check(CLI::IsMember({"seq", "stream"}));
  cmd->add_option("--head-threshold", f.head_threshold, "fixed head flush threshold (0 flushes every merge)")
      ->check(CLI::NonNegativeNumber);
}

EngineOptions engine_options(const CommonFlags& f) {
  EngineOptions o;
  o.workers = f.workers;
  o.threads = f.threads ? f.threads : std::min<std::size_t>(f.workers, std::max(1u, std::thread::hardware_concurrency()));
  o.schedule = f.schedule == "stream" ? ScheduleMode::PhaseAligned : ScheduleMode::Sequential;
  if (f.head_threshold >= 0) o.flush.fixed = static_cast<std::size_t>(f.head_threshold);
  o.apply_environment();
  return o;
}

json stat_json(const StatRecord& s) {
  return {{"stratum", s.stratum}, {"iteration", s.iteration}, {"rule", s.subject},
          {"phase", s.phase},     {"micros", s.micros},       {"tuples", s.tuples}};
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------

struct RunFlags {
  CommonFlags common;
  std::string program;
  std::string facts;
  std::string out;
  std::string stats;
  bool strict = false;
  bool binary = false;
};

int cmd_run(const RunFlags& f) {
  const fs::path program_path = f.program;
  if (!fs::is_regular_file(program_path)) throw IoError("program file not found: " + f.program);
  if (!f.facts.empty() && !fs::is_directory(f.facts)) throw IoError("fact directory not found: " + f.facts);

  EngineOptions options = engine_options(f.common);
  std::ofstream stats;
  if (!f.stats.empty()) {
    stats.open(f.stats);
    if (!stats) throw IoError("cannot write " + f.stats);
    options.on_stat = [&stats](const StatRecord& s) { stats << stat_json(s).dump() << '\n'; };
  }

  Engine engine(parse(read_file(program_path)), options);
  if (!f.facts.empty()) {
    LoadOptions load;
    load.strict = f.strict;
    load.prefer_binary = f.binary;
    load.warn = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
    load_inputs(engine, f.facts, load);
  }
  RunSummary summary = engine.run();
  write_outputs(engine, f.out, f.binary);
  if (stats.is_open() && !stats) throw IoError("write error on " + f.stats);

  std::cout << "relations:\n";
  for (const auto& d : engine.program().relations) {
    if (d.helper) continue;
    std::cout << "  " << d.name << '\t' << summary.cardinalities.at(d.name) << (d.output ? "\t(output)" : "") << '\n';
  }
  std::cout << "strata:\n";
  for (const auto& s : summary.strata) {
    std::cout << "  " << s.stratum << '\t' << (s.recursive ? "recursive" : "base") << '\t' << s.iterations
              << " iterations\t";
    for (std::size_t i = 0; i < s.relations.size(); ++i) std::cout << (i ? "," : "") << s.relations[i];
    std::cout << '\n';
  }
  std::cout << "time: " << summary.seconds << " s\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct BenchFlags {
  CommonFlags common;
  std::string suite;
  std::string scale = "tiny";
  std::uint64_t seed = 1;
  std::size_t path = 0;
  bool verify = false;
  bool no_verify = false;
};

int cmd_bench(const BenchFlags& f) {
  workloads::Workload w;
  try {
    if (f.path) {
      if (f.suite != "tc") throw std::invalid_argument("--path only applies to the tc suite");
      w = workloads::tc_path(f.path);
    } else {
      w = workloads::suite(f.suite, f.scale, f.seed);
    }
  } catch (const std::invalid_argument& e) {
    throw ProgramError(e.what());
  }

  EngineOptions options = engine_options(f.common);
  std::map<std::string, std::uint64_t> phase_micros;
  options.on_stat = [&](const StatRecord& s) { phase_micros[s.phase] += s.micros; };
  verify::EngineRun run = verify::run_engine(w, options);

  json report;
  report["suite"] = f.suite;
  report["scale"] = f.path ? "path" + std::to_string(f.path) : f.scale;
  report["seed"] = f.seed;
  report["workers"] = options.workers;
  report["threads"] = options.threads;
  report["schedule"] = f.common.schedule;
  report["facts"] = workloads::fact_count(w);
  report["seconds"] = run.summary.seconds;
  report["phase_micros"] = phase_micros;
  json strata = json::array();
  for (const auto& s : run.summary.strata) {
    strata.push_back({{"stratum", s.stratum}, {"relations", s.relations}, {"recursive", s.recursive}, {"iterations", s.iterations}});
  }
  report["strata"] = strata;
  json cards;
  for (const auto& name : w.outputs) cards[name] = run.summary.cardinalities.at(name);
  report["cardinalities"] = cards;

  const bool check = !f.no_verify && (f.verify || workloads::fact_count(w) <= kOracleLimit);
  std::string problem;
  if (check) {
    auto t0 = std::chrono::steady_clock::now();
    problem = verify::compare_fixpoint(w, run, verify::run_oracle(w));
    report["oracle_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report["verified"] = problem.empty();
    if (!problem.empty()) report["mismatch"] = problem;
  } else {
    report["verified"] = nullptr;
  }
  std::cout << report.dump(2) << '\n';
  if (!problem.empty()) {
    std::cerr << "error: oracle mismatch: " << problem << '\n';
    return kInternalError;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flatlog: recursive Datalog with worst-case optimal joins over sorted columns"};
  app.require_subcommand(1);

  RunFlags rf;
  CLI::App* run = app.add_subcommand("run", "evaluate a program over a fact directory");
  run->add_option("program", rf.program, "Datalog source file")->required();
  run->add_option("--facts", rf.facts, "directory holding <Relation>.tsv input files");
  run->add_option("--out", rf.out, "directory for <Relation>.tsv outputs")->required();
  run->add_option("--stats", rf.stats, "write per-phase JSON-lines stats here");
  run->add_flag("--strict-inputs", rf.strict, "fail on a missing input file instead of warning");
  run->add_flag("--binary", rf.binary, "read .snap inputs when present and also write .snap outputs");
  add_common(run, rf.common);

  BenchFlags bf;
  CLI::App* bench = app.add_subcommand("bench", "run a synthetic suite and report timings");
  bench->add_option("suite", bf.suite, "tc, sg, triangle, star, neg2hop, andersen, fractured, callgraph")->required();
  bench->add_option("--scale", bf.scale, "tiny, small, medium or large");
  bench->add_option("--seed", bf.seed, "generator seed");
  bench->add_option("--path", bf.path, "tc only: use the path graph on N nodes");
  bench->add_flag("--verify", bf.verify, "check against the naive oracle regardless of size");
  bench->add_flag("--no-verify", bf.no_verify, "never run the oracle");
  add_common(bench, bf.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kProgramError;
  }

  try {
    if (app.got_subcommand(run)) return cmd_run(rf);
    return cmd_bench(bf);
  } catch (const ProgramError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kProgramError;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const InternalError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternalError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
}
