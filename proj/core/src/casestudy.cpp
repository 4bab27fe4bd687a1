#include "twinverify/casestudy.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace twinverify {

const char* to_string(Expectation e) {
  switch (e) {
    case Expectation::Satisfied: return "satisfied";
    case Expectation::NotSatisfied: return "not-satisfied";
    case Expectation::High: return "high";
    case Expectation::Low: return "low";
    case Expectation::Estimate: return "estimate";
    case Expectation::Trajectories: return "trajectories";
    case Expectation::ResourceLimitTolerated: return "resource-limit-tolerated";
  }
  return "?";
}

namespace {

std::optional<Expectation> expectation_from(std::string_view s) {
  for (auto e : {Expectation::Satisfied, Expectation::NotSatisfied, Expectation::High, Expectation::Low,
                 Expectation::Estimate, Expectation::Trajectories, Expectation::ResourceLimitTolerated})
    if (s == to_string(e)) return e;
  return std::nullopt;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ModelError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<SuiteRow> parse_suite(std::string_view text) {
  std::vector<SuiteRow> rows;
  std::vector<Diagnostic> diags;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    const std::string line(text.substr(start, nl == text.npos ? text.npos : nl - start));
    ++line_no;
    start = nl == text.npos ? text.size() + 1 : nl + 1;
    std::istringstream is(line);
    std::string id, engine, expect;
    if (!(is >> id) || id[0] == '#') continue;
    auto bad = [&](const std::string& msg) { diags.push_back({"SUITE_SYNTAX", msg, {line_no, 1}, line}); };
    if (!(is >> engine >> expect)) {
      bad("expected '<id> <cmc|smc> <expectation> <query>'");
      continue;
    }
    SuiteRow row;
    row.line = line_no;
    try {
      row.id = std::stoi(id);
    } catch (const std::exception&) {
      bad("row id must be an integer");
      continue;
    }
    if (engine != "cmc" && engine != "smc") {
      bad("engine must be 'cmc' or 'smc'");
      continue;
    }
    row.engine = engine == "cmc" ? Engine::Classical : Engine::Statistical;
    const auto e = expectation_from(expect);
    if (!e) {
      bad("unknown expectation '" + expect + "'");
      continue;
    }
    row.expect = *e;
    std::getline(is, row.text);
    row.text.erase(0, row.text.find_first_not_of(" \t"));
    while (!row.text.empty() && (row.text.back() == '\r' || row.text.back() == ' ')) row.text.pop_back();
    try {
      row.ast = parse_query(row.text);
    } catch (const ParseError& err) {
      for (auto d : err.diagnostics()) {
        d.pos.line = line_no;
        diags.push_back(d);
      }
      continue;
    }
    if (engine_of(row.ast.kind) != row.engine) {
      diags.push_back({"ENGINE_MISMATCH", "query form does not match the row's engine", {line_no, 1}, row.text});
      continue;
    }
    rows.push_back(std::move(row));
  }
  if (!diags.empty()) throw ParseError(diags);
  return rows;
}

EmpiricalDistribution triangular_histogram(double lo, double hi, double mode, double width, std::uint64_t total) {
  if (!(lo < hi) || mode < lo || mode > hi || !(width > 0))
    throw TimingError("triangular histogram needs lo <= mode <= hi, lo < hi and width > 0");
  auto cdf = [&](double x) {
    if (x <= lo) return 0.0;
    if (x >= hi) return 1.0;
    if (x <= mode) return (x - lo) * (x - lo) / ((hi - lo) * (mode - lo));
    return 1.0 - (hi - x) * (hi - x) / ((hi - lo) * (hi - mode));
  };
  std::vector<Bucket> buckets;
  for (double a = lo; a < hi; a += width) {
    const double b = std::min(a + width, hi);
    const auto count = static_cast<std::uint64_t>(std::llround(static_cast<double>(total) * (cdf(b) - cdf(a))));
    if (count > 0) buckets.push_back({a, b, count});
  }
  return EmpiricalDistribution(std::move(buckets));
}

std::map<std::string, EmpiricalDistribution> synthetic_profile(const std::string& name) {
  // The rare 60 s stall keeps the report delay's weighted average (8 ms)
  // above a 5 ms window that almost every sample meets.
  const EmpiricalDistribution report({{1, 3, 9999}, {60000, 60001, 1}});
  if (name == "slow") {
    return {{"unity_frame", triangular_histogram(60, 140, 90, 5)},
            {"ctrl_compute", triangular_histogram(60, 120, 80, 5)},
            {"plan_compute", triangular_histogram(150, 300, 200, 10)},
            {"server_proc", triangular_histogram(20, 60, 30, 5)},
            {"ctrl_report", report}};
  }
  if (name == "fast") {
    return {{"unity_frame", triangular_histogram(15, 25, 20, 1)},
            {"ctrl_compute", triangular_histogram(10, 20, 15, 1)},
            {"plan_compute", triangular_histogram(5, 15, 10, 1)},
            {"server_proc", triangular_histogram(2, 8, 5, 1)},
            {"ctrl_report", report}};
  }
  throw TimingError("unknown timing profile '" + name + "'");
}

SuiteDefinition build_case_study(const CaseStudyConfig& cfg) {
  const std::filesystem::path hist = cfg.histogram_dir ? *cfg.histogram_dir : cfg.data_dir / "profiles" / cfg.profile;
  if (!std::filesystem::is_directory(hist)) throw ModelError("timing profile directory not found: " + hist.string());
  SuiteDefinition s;
  s.profile = cfg.histogram_dir ? cfg.histogram_dir->string() : cfg.profile;
  s.sta = parse_model(read_file(cfg.data_dir / "model.tvm"), file_loader(hist));
  if (auto diags = validate(s.sta); !diags.empty()) throw ParseError(diags);
  s.ta = to_approximate(s.sta);
  s.rows = parse_suite(read_file(cfg.data_dir / "suite.tvq"));
  return s;
}

bool meets(Expectation e, const CmcVerdict& v) {
  switch (e) {
    case Expectation::Satisfied: return v.result == CmcResult::Satisfied;
    case Expectation::NotSatisfied: return v.result == CmcResult::NotSatisfied;
    case Expectation::ResourceLimitTolerated: return v.result != CmcResult::NotSatisfied;
    default: return false;
  }
}

bool meets(Expectation e, const SmcVerdict& v) {
  switch (e) {
    case Expectation::High:
      if (v.kind == SmcKind::TestResult) return v.outcome == TestOutcome::AcceptH1;
      return v.kind == SmcKind::ProbBound && v.interval.lower >= 0.5;
    case Expectation::Low:
      if (v.kind == SmcKind::TestResult) return v.outcome == TestOutcome::AcceptH0;
      return v.kind == SmcKind::ProbBound && v.interval.upper <= 0.5;
    case Expectation::Satisfied: return v.holds();
    case Expectation::NotSatisfied: return !v.holds();
    case Expectation::Estimate: return v.kind == SmcKind::Estimate;
    case Expectation::Trajectories: return v.kind == SmcKind::Trajectories && !v.points.empty();
    case Expectation::ResourceLimitTolerated: return true;
  }
  return false;
}

bool SuiteReport::all_met() const {
  for (const auto& r : rows)
    if (!r.met) return false;
  return true;
}

SuiteReport run_suite(const SuiteDefinition& suite, const SuiteOptions& opt) {
  SuiteReport report;
  report.profile = suite.profile;
  report.seed = opt.smc.seed;
  for (const auto& row : suite.rows) {
    ReportRow out;
    out.id = row.id;
    out.engine = row.engine;
    out.expect = row.expect;
    out.query = row.text;
    try {
      if (row.engine == Engine::Classical) {
        const BoundQuery q = bind(row.ast, suite.ta);
        const CmcVerdict v = check_query(suite.ta, q, opt.cmc);
        out.verdict = to_string(v.result);
        out.stats = v.stats;
        out.met = meets(row.expect, v);
        out.detail = v.limit;
        if (v.witness) out.artifact = witness_csv(suite.ta, *v.witness);
      } else {
        const BoundQuery q = bind(row.ast, suite.sta);
        const SmcVerdict v = run_smc_query(suite.sta, q, opt.smc);
        out.verdict = render_verdict(v);
        if (v.kind == SmcKind::Estimate) out.verdict += " ms";
        out.stats = v.stats;
        out.met = meets(row.expect, v);
        if (v.kind == SmcKind::ProbBound)
          out.detail = std::to_string(v.successes) + "/" + std::to_string(v.runs) + " runs";
        else if (v.kind == SmcKind::TestResult || v.kind == SmcKind::Estimate)
          out.detail = std::to_string(v.runs) + " runs";
        if (v.kind == SmcKind::Trajectories) out.artifact = trajectory_csv(v);
      }
    } catch (const ParseError& e) {
      out.verdict = "error";
      out.detail = e.diagnostics().empty() ? e.what() : to_string(e.diagnostics().front());
    } catch (const std::exception& e) {
      out.verdict = "error";
      out.detail = e.what();
    }
    report.rows.push_back(std::move(out));
  }
  return report;
}

namespace {

std::string cpu_cell(const PerfTriple& p, bool measured) {
  if (!measured) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.0f", p.cpu_ms);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s + ' ' : s + std::string(w - s.size(), ' '); }

}  // namespace

std::string render_report(const SuiteReport& r, ReportFormat f, bool measured_timing) {
  std::ostringstream os;
  if (f == ReportFormat::Json) {
    nlohmann::ordered_json j;
    j["profile"] = r.profile;
    j["seed"] = r.seed;
    j["all_met"] = r.all_met();
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : r.rows) {
      nlohmann::ordered_json o;
      o["id"] = row.id;
      o["engine"] = to_string(row.engine);
      o["query"] = row.query;
      o["expected"] = to_string(row.expect);
      o["verdict"] = row.verdict;
      o["met"] = row.met;
      o["states"] = row.stats.states_explored;
      o["cpu_ms"] = measured_timing ? nlohmann::ordered_json(row.stats.cpu_ms) : nlohmann::ordered_json(nullptr);
      o["mem_kib"] = row.stats.peak_mem_kib;
      o["detail"] = row.detail;
      rows.push_back(std::move(o));
    }
    j["rows"] = std::move(rows);
    os << j.dump(2) << '\n';
    return os.str();
  }
  if (f == ReportFormat::Csv) {
    os << "id,engine,verdict,states,cpu_ms,mem_kib,expected,met,query\n";
    for (const auto& row : r.rows)
      os << row.id << ',' << to_string(row.engine) << ',' << csv_field(row.verdict) << ','
         << row.stats.states_explored << ',' << cpu_cell(row.stats, measured_timing) << ',' << row.stats.peak_mem_kib
         << ',' << to_string(row.expect) << ',' << (row.met ? "yes" : "no") << ',' << csv_field(row.query) << '\n';
    return os.str();
  }
  os << "profile: " << r.profile << "  seed: " << r.seed << '\n';
  os << pad("id", 4) << pad("engine", 8) << pad("verdict", 30) << pad("states", 12) << pad("cpu_ms", 9)
     << pad("mem_kib", 10) << pad("expected", 26) << "ok\n";
  for (const auto& row : r.rows) {
    os << pad(std::to_string(row.id), 4) << pad(to_string(row.engine), 8) << pad(row.verdict, 30)
       << pad(std::to_string(row.stats.states_explored), 12) << pad(cpu_cell(row.stats, measured_timing), 9)
       << pad(std::to_string(row.stats.peak_mem_kib), 10) << pad(to_string(row.expect), 26)
       << (row.met ? "yes" : "NO");
    if (!row.detail.empty()) os << "  (" << row.detail << ')';
    os << '\n';
  }
  os << (r.all_met() ? "all expectations met\n" : "some expectations NOT met\n");
  return os.str();
}

DiscrepancyResult discrepancy_demo(const std::filesystem::path& data_dir, int window, const SmcOptions& opt) {
  const Network sta = parse_model(read_file(data_dir / "discrepancy.tvm"));
  const Network ta = to_approximate(sta);
  DiscrepancyResult r;
  const std::string prop = "(Receiver.Wait imply w <= " + std::to_string(window) + ")";
  r.cmc_query = "A[] " + prop;
  r.smc_query = "Pr[<=10]([] " + prop + ")";
  r.cmc = check_query(ta, bind(parse_query(r.cmc_query), ta));
  const BoundQuery sq = bind(parse_query(r.smc_query), sta);
  r.smc = estimate_probability(sta, sq.ast.m1, opt);
  r.smc_average = estimate_probability(ta, bind(parse_query(r.smc_query), ta).ast.m1, opt);
  return r;
}

}  // namespace twinverify
