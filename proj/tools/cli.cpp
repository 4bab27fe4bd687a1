#include "cli.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "twinverify/casestudy.hpp"
#include "twinverify/model.hpp"
#include "twinverify/query.hpp"
#include "twinverify/smc.hpp"
#include "twinverify/stats.hpp"
#include "twinverify/timing.hpp"
#include "twinverify/zone_engine.hpp"

#ifndef TWINVERIFY_DEFAULT_DATA_DIR
#define TWINVERIFY_DEFAULT_DATA_DIR "data"
#endif

namespace twinverify::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct OutputConfig {
  std::string format = "table";
  std::string output;
  std::string artifacts;
  std::string timing = "off";

  bool measured() const { return timing == "measured"; }
};

struct CapConfig {
  std::optional<std::uint64_t> max_states;
  std::optional<std::uint64_t> max_mem_kib;
  std::string order = "bfs";
  bool no_subsumption = false;
};

struct SmcConfig {
  double epsilon = 0.05;
  double alpha = 0.05;
  double beta = 0.05;
  double delta = 0.01;
  std::optional<double> theta;
  std::optional<std::int64_t> time_bound;
  std::optional<std::uint64_t> runs;
  std::uint64_t seed = kDefaultSeed;
  unsigned workers = 1;
  std::uint64_t step_bound = 1'000'000;
  std::uint64_t max_runs = 10'000;
};

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Readers see either the old file or the complete new one.
void write_atomic(const fs::path& p, const std::string& content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".partial";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw UsageError("cannot write '" + tmp.string() + "'");
    f << content;
    f.flush();
    if (!f) throw UsageError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, p);
}

void emit(const OutputConfig& oc, const std::string& report, std::ostream& out) {
  if (oc.output.empty())
    out << report;
  else
    write_atomic(oc.output, report);
}

std::optional<std::uint64_t> env_u64(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  std::uint64_t x = 0;
  const char* end = v + std::char_traits<char>::length(v);
  auto [p, ec] = std::from_chars(v, end, x);
  if (ec != std::errc() || p != end) throw UsageError(std::string("invalid value for ") + name + ": '" + v + "'");
  return x;
}

// Flags win over TWINVERIFY_MAX_STATES / TWINVERIFY_MAX_MEM_KIB.
ZoneEngineOptions engine_options(const CapConfig& c) {
  ZoneEngineOptions o;
  if (auto s = c.max_states ? c.max_states : env_u64("TWINVERIFY_MAX_STATES")) o.caps.max_states = *s;
  if (auto m = c.max_mem_kib ? c.max_mem_kib : env_u64("TWINVERIFY_MAX_MEM_KIB")) o.caps.max_mem_kib = *m;
  o.subsumption = !c.no_subsumption;
  o.order = c.order == "dfs" ? SearchOrder::Dfs : SearchOrder::Bfs;
  return o;
}

SmcOptions smc_options(const SmcConfig& c) {
  auto open_unit = [](double v, const char* name) {
    if (!(v > 0.0 && v < 1.0)) throw UsageError(std::string("--") + name + " must lie in (0, 1)");
  };
  open_unit(c.epsilon, "epsilon");
  open_unit(c.alpha, "alpha");
  open_unit(c.beta, "beta");
  if (!(c.delta > 0.0 && c.delta < 0.5)) throw UsageError("--delta must lie in (0, 0.5)");
  if (c.theta && !(*c.theta >= 0.0 && *c.theta <= 1.0)) throw UsageError("--theta must lie in [0, 1]");
  if (c.workers == 0) throw UsageError("--workers must be at least 1");
  SmcOptions o;
  o.epsilon = c.epsilon;
  o.alpha = c.alpha;
  o.beta = c.beta;
  o.delta = c.delta;
  if (c.runs && *c.runs > 0) o.runs = c.runs;
  o.seed = c.seed;
  o.workers = c.workers;
  o.step_bound = c.step_bound;
  o.max_runs = c.max_runs;
  return o;
}

void add_output_flags(CLI::App* cmd, OutputConfig& oc) {
  cmd->add_option("--format", oc.format, "Report format")->check(CLI::IsMember({"table", "json", "csv"}));
  cmd->add_option("--output,-o", oc.output, "Write the report to this file (atomically) instead of stdout");
  cmd->add_option("--timing", oc.timing, "Report measured CPU time (off keeps reports deterministic)")
      ->check(CLI::IsMember({"off", "measured"}));
}

void add_cap_flags(CLI::App* cmd, CapConfig& cc) {
  cmd->add_option("--max-states", cc.max_states, "Cap on stored symbolic states (env TWINVERIFY_MAX_STATES)");
  cmd->add_option("--max-mem-kib", cc.max_mem_kib, "Cap on estimated state storage (env TWINVERIFY_MAX_MEM_KIB)");
  cmd->add_option("--order", cc.order, "Search order")->check(CLI::IsMember({"bfs", "dfs"}));
  cmd->add_flag("--no-subsumption", cc.no_subsumption, "Store states by equality instead of zone inclusion");
}

void add_smc_flags(CLI::App* cmd, SmcConfig& sc) {
  cmd->add_option("--epsilon", sc.epsilon, "Half-width of probability estimates");
  cmd->add_option("--alpha", sc.alpha, "1 - confidence; type-I error of tests");
  cmd->add_option("--beta", sc.beta, "Type-II error of tests");
  cmd->add_option("--delta", sc.delta, "Indifference half-width of hypothesis tests");
  cmd->add_option("--runs", sc.runs, "Fixed run count for probability estimates (0 = Chernoff bound)");
  cmd->add_option("--seed", sc.seed, "Master seed");
  cmd->add_option("--workers", sc.workers, "Simulation worker threads");
  cmd->add_option("--step-bound", sc.step_bound, "Discrete steps allowed per run");
  cmd->add_option("--max-runs", sc.max_runs, "Run cap for sequential tests");
}

std::string cpu_cell(const PerfTriple& p, bool measured) {
  if (!measured) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.0f", p.cpu_ms);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string o = "\"";
  for (char ch : s) o += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return o + "\"";
}

std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s + ' ' : s + std::string(w - s.size(), ' '); }

struct ResultRow {
  int index = 0;
  std::string query;
  Engine engine = Engine::Classical;
  std::string verdict;
  PerfTriple stats;
  std::string detail;
  std::string artifact;
};

std::string render_rows(const std::string& model, const std::optional<std::uint64_t>& seed,
                        const std::vector<ResultRow>& rows, const OutputConfig& oc) {
  std::ostringstream os;
  const bool measured = oc.measured();
  if (oc.format == "json") {
    Json j;
    j["model"] = model;
    j["seed"] = seed ? Json(*seed) : Json(nullptr);
    auto arr = Json::array();
    for (const auto& r : rows) {
      Json o;
      o["index"] = r.index;
      o["engine"] = to_string(r.engine);
      o["query"] = r.query;
      o["verdict"] = r.verdict;
      o["states"] = r.stats.states_explored;
      o["cpu_ms"] = measured ? Json(r.stats.cpu_ms) : Json(nullptr);
      o["mem_kib"] = r.stats.peak_mem_kib;
      o["detail"] = r.detail;
      o["artifact"] = r.artifact.empty() ? Json(nullptr) : Json(r.artifact);
      arr.push_back(std::move(o));
    }
    j["results"] = std::move(arr);
    os << j.dump(2) << '\n';
    return os.str();
  }
  if (oc.format == "csv") {
    os << "index,engine,verdict,states,cpu_ms,mem_kib,query,detail,artifact\n";
    for (const auto& r : rows)
      os << r.index << ',' << to_string(r.engine) << ',' << csv_field(r.verdict) << ',' << r.stats.states_explored
         << ',' << cpu_cell(r.stats, measured) << ',' << r.stats.peak_mem_kib << ',' << csv_field(r.query) << ','
         << csv_field(r.detail) << ',' << csv_field(r.artifact) << '\n';
    return os.str();
  }
  os << "model: " << model;
  if (seed) os << "  seed: " << *seed;
  os << '\n';
  os << pad("#", 4) << pad("engine", 7) << pad("verdict", 30) << pad("states", 11) << pad("cpu_ms", 8)
     << pad("mem_kib", 9) << "query\n";
  for (const auto& r : rows) {
    os << pad(std::to_string(r.index), 4) << pad(to_string(r.engine), 7) << pad(r.verdict, 30)
       << pad(std::to_string(r.stats.states_explored), 11) << pad(cpu_cell(r.stats, measured), 8)
       << pad(std::to_string(r.stats.peak_mem_kib), 9) << r.query << '\n';
    if (!r.detail.empty()) os << "    " << r.detail << '\n';
    if (!r.artifact.empty()) os << "    artifact: " << r.artifact << '\n';
  }
  return os.str();
}

std::vector<QueryLine> collect_queries(const std::vector<std::string>& inline_queries, const std::string& file) {
  std::vector<QueryLine> qs;
  if (!file.empty()) qs = parse_query_file(read_text(file));
  for (const auto& text : inline_queries) qs.push_back({0, text, parse_query(text)});
  if (qs.empty()) throw UsageError("no queries given (use --query or --queries)");
  return qs;
}

// Distribution files resolve against `histograms` when given, else the
// model's directory.
Network load_validated(const std::string& path, const std::string& histograms) {
  Network net = histograms.empty() ? load_model(path) : parse_model(read_text(path), file_loader(histograms));
  if (auto diags = validate(net); !diags.empty()) throw ParseError(diags);
  return net;
}

fs::path artifact_path(std::string dir, const std::string& model, int index, const char* kind) {
  if (dir.empty()) dir = ".";
  return fs::path(dir) / (fs::path(model).stem().string() + "-q" + std::to_string(index) + "-" + kind + ".csv");
}

int cmd_check(const std::string& model, const std::string& histograms, const std::vector<std::string>& queries,
              const std::string& query_file, const CapConfig& cc, const OutputConfig& oc, std::ostream& out, std::ostream& err) {
  Network net = load_validated(model, histograms);
  if (net.has_empirical_delays()) {
    err << "note: empirical delays replaced by their weighted averages for classical checking\n";
    net = to_approximate(net);
  }
  const ZoneEngineOptions opt = engine_options(cc);
  std::vector<BoundQuery> bound;
  const auto lines = collect_queries(queries, query_file);
  for (const auto& l : lines) {
    bound.push_back(bind(l.ast, net));
    require_engine(bound.back(), Engine::Classical);
  }
  std::vector<ResultRow> rows;
  int code = kExitOk;
  for (std::size_t i = 0; i < bound.size(); ++i) {
    const CmcVerdict v = check_query(net, bound[i], opt);
    ResultRow r;
    r.index = static_cast<int>(i + 1);
    r.query = lines[i].text;
    r.verdict = to_string(v.result);
    r.stats = v.stats;
    r.detail = v.limit.empty() ? "" : "cap reached: " + v.limit;
    if (v.witness) {
      const fs::path p = artifact_path(oc.artifacts, model, r.index, "witness");
      write_atomic(p, witness_csv(net, *v.witness));
      r.artifact = p.string();
    }
    if (v.result == CmcResult::ResourceLimit)
      code = std::max<int>(code, kExitResourceLimit);
    else if (v.result == CmcResult::NotSatisfied)
      code = std::max<int>(code, kExitRefuted);
    rows.push_back(std::move(r));
  }
  emit(oc, render_rows(model, std::nullopt, rows, oc), out);
  return code;
}

std::string smc_detail(const SmcVerdict& v) {
  switch (v.kind) {
    case SmcKind::ProbBound: return std::to_string(v.successes) + "/" + std::to_string(v.runs) + " runs";
    case SmcKind::TestResult: return std::to_string(v.runs) + " runs, " + to_string(v.outcome);
    case SmcKind::Estimate: return std::to_string(v.runs) + " runs";
    case SmcKind::Trajectories: return std::to_string(v.runs) + " runs";
  }
  return {};
}

int cmd_smc(const std::string& model, const std::string& histograms, const std::vector<std::string>& queries,
            const std::string& query_file, const SmcConfig& sc, const OutputConfig& oc, std::ostream& out, std::ostream& err) {
  const Network net = load_validated(model, histograms);
  const SmcOptions opt = smc_options(sc);
  auto lines = collect_queries(queries, query_file);
  std::vector<BoundQuery> bound;
  for (auto& l : lines) {
    QueryAst& a = l.ast;
    if (sc.theta && a.kind == QueryKind::ProbEstimate) {
      a.kind = QueryKind::ProbTest;
      a.direction = Direction::AtLeast;
      a.threshold = *sc.theta;
    }
    if (sc.time_bound) {
      if (*sc.time_bound <= 0) throw UsageError("--time-bound must be positive");
      a.m1.bound = a.m2.bound = a.time_bound = *sc.time_bound;
    }
    bound.push_back(bind(a, net));
    require_engine(bound.back(), Engine::Statistical);
  }
  std::vector<ResultRow> rows;
  int code = kExitOk;
  for (std::size_t i = 0; i < bound.size(); ++i) {
    const SmcVerdict v = run_smc_query(net, bound[i], opt);
    ResultRow r;
    r.index = static_cast<int>(i + 1);
    r.query = render_query(bound[i].ast);
    r.engine = Engine::Statistical;
    r.verdict = render_verdict(v);
    if (v.kind == SmcKind::Estimate) r.verdict += " ms";
    r.stats = v.stats;
    r.detail = smc_detail(v);
    if (v.kind == SmcKind::Trajectories) {
      const fs::path p = artifact_path(oc.artifacts, model, r.index, "trajectories");
      write_atomic(p, trajectory_csv(v));
      r.artifact = p.string();
    }
    if (!v.holds()) code = kExitRefuted;
    rows.push_back(std::move(r));
  }
  (void)err;
  emit(oc, render_rows(model, opt.seed, rows, oc), out);
  return code;
}

struct IngestConfig {
  std::string log;
  double bucket_width = 0;
  std::string source;
  std::string target;
};

// Without explicit keys the log must contain exactly two event kinds; the
// first one seen is the source.
int cmd_ingest(const IngestConfig& ic, const OutputConfig& oc, std::ostream& out, std::ostream& err) {
  if (!(ic.bucket_width > 0)) throw UsageError("--bucket-width must be positive");
  const auto log = parse_log(read_text(ic.log));
  EventKey src;
  EventKey tgt;
  if (ic.source.empty() != ic.target.empty()) throw UsageError("--source and --target must be given together");
  if (!ic.source.empty()) {
    src = EventKey::parse(ic.source);
    tgt = EventKey::parse(ic.target);
  } else {
    std::vector<EventKey> kinds;
    for (const auto& rec : log) {
      bool seen = false;
      for (const auto& k : kinds) seen = seen || k.matches(rec);
      if (!seen) kinds.push_back({rec.component, rec.event});
    }
    if (kinds.size() != 2)
      throw UsageError("log has " + std::to_string(kinds.size()) +
                       " event kinds; name the pair with --source and --target");
    src = kinds[0];
    tgt = kinds[1];
  }
  const EmpiricalDistribution d = build_histogram(log, src, tgt, ic.bucket_width);
  err << "ingested " << d.total() << " latencies from " << src.component << ':' << src.event << " to "
      << tgt.component << ':' << tgt.event << ", weighted average " << weighted_average(d) << " ms\n";
  emit(oc, render_histogram(d), out);
  return kExitOk;
}

struct SuiteConfig {
  std::string name = "dt";
  std::string data_dir;
  std::string profile = "slow";
  std::string histograms;
  std::vector<int> rows;
};

fs::path resolve_suite_dir(const SuiteConfig& c) {
  if (fs::is_directory(c.name) && fs::exists(fs::path(c.name) / "suite.tvq")) return c.name;
  std::string base = c.data_dir;
  if (base.empty()) {
    const char* env = std::getenv("TWINVERIFY_DATA_DIR");
    base = env != nullptr && *env != '\0' ? env : TWINVERIFY_DEFAULT_DATA_DIR;
  }
  const fs::path dir = fs::path(base) / c.name;
  if (!fs::exists(dir / "suite.tvq")) throw UsageError("unknown suite '" + c.name + "' (looked in " + dir.string() + ")");
  return dir;
}

int cmd_suite(const SuiteConfig& c, const CapConfig& cc, const SmcConfig& sc, const OutputConfig& oc,
              std::ostream& out, std::ostream& err) {
  CaseStudyConfig cfg;
  cfg.data_dir = resolve_suite_dir(c);
  cfg.profile = c.profile;
  if (!c.histograms.empty()) cfg.histogram_dir = c.histograms;
  SuiteDefinition def = build_case_study(cfg);
  if (!c.rows.empty()) {
    const std::set<int> keep(c.rows.begin(), c.rows.end());
    std::erase_if(def.rows, [&](const SuiteRow& r) { return keep.count(r.id) == 0; });
    if (def.rows.empty()) throw UsageError("--rows selects no suite rows");
  }
  SuiteOptions opt;
  opt.cmc = engine_options(cc);
  opt.smc = smc_options(sc);
  const SuiteReport report = run_suite(def, opt);
  ReportFormat f = ReportFormat::Table;
  if (oc.format == "json") f = ReportFormat::Json;
  if (oc.format == "csv") f = ReportFormat::Csv;
  if (!oc.artifacts.empty()) {
    for (const auto& r : report.rows) {
      if (r.artifact.empty()) continue;
      const char* kind = r.engine == Engine::Classical ? "witness" : "trajectories";
      write_atomic(fs::path(oc.artifacts) / ("row" + std::to_string(r.id) + "-" + kind + ".csv"), r.artifact);
    }
  }
  for (const auto& r : report.rows)
    if (r.verdict == "error") err << "row " << r.id << " (" << to_string(r.engine) << "): " << r.detail << '\n';
  emit(oc, render_report(report, f, oc.measured()), out);
  return report.all_met() ? kExitOk : kExitRefuted;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"twinverify: classical and statistical verification of timed-automata networks"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", "twinverify 0.1.0");

  std::string model;
  std::vector<std::string> queries;
  std::string query_file;
  std::string histograms;
  OutputConfig oc;
  CapConfig cc;
  SmcConfig sc;
  SmcConfig suite_sc;
  IngestConfig ic;
  SuiteConfig suc;

  auto* check = app.add_subcommand("check", "Zone-based model checking of classical queries");
  check->add_option("model", model, "Model file (.tvm)")->required();
  check->add_option("--query,-q", queries, "Query text (repeatable)");
  check->add_option("--queries", query_file, "Query file, one query per line");
  check->add_option("--histograms", histograms, "Directory holding the model's distribution files");
  check->add_option("--artifacts", oc.artifacts, "Directory for witness CSV files (default: current directory)");
  add_cap_flags(check, cc);
  add_output_flags(check, oc);

  auto* smc = app.add_subcommand("smc", "Statistical model checking by seeded simulation");
  smc->add_option("model", model, "Model file (.tvm)")->required();
  smc->add_option("--query,-q", queries, "Query text (repeatable)");
  smc->add_option("--queries", query_file, "Query file, one query per line");
  smc->add_option("--histograms", histograms, "Directory holding the model's distribution files");
  smc->add_option("--artifacts", oc.artifacts, "Directory for trajectory CSV files (default: current directory)");
  smc->add_option("--theta", sc.theta, "Turn probability estimates into tests of Pr >= theta");
  smc->add_option("--time-bound", sc.time_bound, "Override the time bound of every query (ms)");
  add_smc_flags(smc, sc);
  add_output_flags(smc, oc);

  auto* ingest = app.add_subcommand("ingest", "Build a latency histogram from an event log");
  ingest->add_option("log", ic.log, "Log CSV: timestamp_ms,component,event")->required();
  ingest->add_option("--bucket-width", ic.bucket_width, "Bucket width (ms)")->required();
  ingest->add_option("--source", ic.source, "Source event, component:event or event");
  ingest->add_option("--target", ic.target, "Target event, component:event or event");
  ingest->add_option("--output,-o", oc.output, "Write the histogram to this file instead of stdout");

  auto* suite = app.add_subcommand("suite", "Run a case-study property suite");
  suite->add_option("name", suc.name, "Suite name under the data directory, or a suite directory")->required();
  suite->add_option("--data-dir", suc.data_dir, "Data directory (env TWINVERIFY_DATA_DIR)");
  suite->add_option("--profile", suc.profile, "Shipped timing profile (slow, fast)");
  suite->add_option("--histograms", suc.histograms, "Directory of histogram CSVs overriding the profile");
  suite->add_option("--rows", suc.rows, "Only run these row ids")->delimiter(',');
  suite->add_option("--artifacts", oc.artifacts, "Directory for witness and trajectory CSV files");
  add_cap_flags(suite, cc);
  suite_sc.runs = 100;
  add_smc_flags(suite, suite_sc);
  add_output_flags(suite, oc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*check) return cmd_check(model, histograms, queries, query_file, cc, oc, out, err);
    if (*smc) return cmd_smc(model, histograms, queries, query_file, sc, oc, out, err);
    if (*ingest) return cmd_ingest(ic, oc, out, err);
    return cmd_suite(suc, cc, suite_sc, oc, out, err);
  } catch (const ParseError& e) {
    for (const auto& d : e.diagnostics()) err << "error: " << to_string(d) << '\n';
    if (e.diagnostics().empty()) err << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitUsage;
}

}  // namespace twinverify::cli
