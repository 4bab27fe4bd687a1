// Acceptance run: one PASS/FAIL line per criterion; exit status 0 iff all pass.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "dbm_oracle.hpp"
#include "nets.hpp"
#include "oracle.hpp"
#include "twinverify/casestudy.hpp"
#include "twinverify/query.hpp"
#include "twinverify/smc.hpp"
#include "twinverify/stats.hpp"
#include "twinverify/zone_engine.hpp"

using namespace twinverify;

namespace {

const std::filesystem::path kData = std::filesystem::path(TWINVERIFY_TEST_DATA_DIR) / "dt";

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

Dbm build(const testing::ConstraintSet& s) {
  Dbm z(s.clocks + 1);
  for (const auto& a : s.atoms)
    if (!a.apply(z)) break;
  return z;
}

CmcVerdict check(const Network& n, const std::string& q, const ZoneEngineOptions& opt = {}) {
  return check_query(n, bind(parse_query(q), n), opt);
}

Monitor monitor(const Network& n, const std::string& q) { return bind(parse_query(q), n).ast.m1; }

// After 1 ms one of ten edges fires uniformly; `hits` of them reach Hit.
std::string coin_net(int hits) {
  std::string s = "process C {\n  loc Flip init delay fixed 1\n  loc Hit\n  loc Miss\n";
  for (int k = 0; k < 10; ++k) s += std::string("  edge Flip -> ") + (k < hits ? "Hit" : "Miss") + "\n";
  return s + "}\n";
}

Outcome dbm_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(1);
  int mismatches = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto s = testing::random_constraint_set(rng, 3, 5);
    const Dbm z = build(s);
    if (z.is_empty() != !testing::brute_nonempty(s)) ++mismatches;
    if (!z.is_empty() && !testing::canonical(z)) ++mismatches;
    testing::for_grid(s.clocks, 0.5, 7.0, [&](const std::vector<double>& p) {
      const bool in = !z.is_empty() && z.contains(p);
      if (in != s.holds(p)) ++mismatches;
      return true;
    });
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 60,
          "1000 sets, " + std::to_string(mismatches) + " mismatches, " + fmt(secs, 1) + " s"};
}

// Shared corpus for the reachability and subsumption criteria.
std::vector<testing::RandomNet> oracle_corpus() {
  Rng rng(2025);
  std::vector<testing::RandomNet> nets;
  while (nets.size() < 200) {
    auto rn = testing::random_closed_net(rng);
    if (validate(testing::net_of(rn.text)).empty()) nets.push_back(std::move(rn));
  }
  return nets;
}

Outcome reachability_oracle(const std::vector<testing::RandomNet>& corpus) {
  const auto t0 = std::chrono::steady_clock::now();
  int mismatches = 0;
  for (const auto& rn : corpus) {
    const Network n = testing::net_of(rn.text);
    const bool expect = testing::DiscreteOracle(n).reachable(rn.target);
    if ((check(n, rn.target.query(n)).result == CmcResult::Satisfied) != expect) ++mismatches;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 120,
          std::to_string(corpus.size()) + " nets, " + std::to_string(mismatches) + " mismatches, " + fmt(secs, 1) +
              " s"};
}

Outcome deadlock_detection() {
  const CmcVerdict crossed = check(testing::net_of(testing::kCrossedWait), "A[] not deadlock");
  const CmcVerdict hand = check(testing::net_of(testing::kHandshake), "A[] not deadlock");
  const bool pass = crossed.result == CmcResult::NotSatisfied && crossed.witness.has_value() &&
                    hand.result == CmcResult::Satisfied;
  return {pass, std::string("crossed-wait ") + to_string(crossed.result) + (crossed.witness ? " with witness" : "") +
                    ", handshake " + to_string(hand.result)};
}

Outcome subsumption(const std::vector<testing::RandomNet>& corpus) {
  int queries = 0, differ = 0;
  for (const auto& rn : corpus) {
    const Network n = testing::net_of(rn.text);
    testing::OracleTarget untimed = rn.target;
    untimed.clock_lower = -1;
    for (const std::string& q :
         {rn.target.query(n), std::string("A[] not deadlock"), untimed.query(n).replace(0, 3, "A<>")}) {
      ZoneEngineOptions off;
      off.subsumption = false;
      ++queries;
      if (check(n, q).result != check(n, q, off).result) ++differ;
    }
  }
  return {differ == 0, std::to_string(queries) + " queries, " + std::to_string(differ) + " verdict differences"};
}

Outcome chernoff() {
  const std::uint64_t n = chernoff_runs(0.05, 0.05);
  return {n == 738, "N = " + std::to_string(n)};
}

Outcome coverage() {
  const auto t0 = std::chrono::steady_clock::now();
  const Network net = testing::net_of(coin_net(3));
  const Monitor m = monitor(net, "Pr[<=2](<> C.Hit)");
  int covered = 0;
  for (int r = 0; r < 500; ++r) {
    SmcOptions o;
    o.seed = 5000 + static_cast<std::uint64_t>(r);
    const SmcVerdict v = estimate_probability(net, m, o);
    covered += (v.interval.lower <= 0.3 && 0.3 <= v.interval.upper) ? 1 : 0;
  }
  const double rate = covered / 500.0;
  const double secs = seconds_since(t0);
  return {rate >= 0.93 && secs < 180, "coverage " + fmt(rate) + " over 500 estimations, " + fmt(secs, 1) + " s"};
}

Outcome sprt_errors() {
  SmcOptions o;
  o.alpha = o.beta = 0.05;
  o.delta = 0.05;
  const Network high = testing::net_of(coin_net(6));
  const Network low = testing::net_of(coin_net(4));
  const Monitor mh = monitor(high, "Pr[<=2](<> C.Hit)");
  const Monitor ml = monitor(low, "Pr[<=2](<> C.Hit)");
  int wrong_high = 0, wrong_low = 0;
  for (int r = 0; r < 500; ++r) {
    o.seed = 9000 + static_cast<std::uint64_t>(r);
    wrong_high += hypothesis_test(high, mh, Direction::AtLeast, 0.5, o).outcome != TestOutcome::AcceptH1 ? 1 : 0;
    wrong_low += hypothesis_test(low, ml, Direction::AtLeast, 0.5, o).outcome != TestOutcome::AcceptH0 ? 1 : 0;
  }
  const double eh = wrong_high / 500.0, el = wrong_low / 500.0;
  return {eh <= 0.07 && el <= 0.07, "error at p=0.6 " + fmt(eh) + ", at p=0.4 " + fmt(el)};
}

Outcome value_estimation() {
  const Network fixed = testing::net_of("process A {\n  loc L init delay fixed 5\n  edge L -> L\n}\n");
  const ExprPtr t5 = bind(parse_query("E[<=12; 10](max: A.t)"), fixed).ast.value;
  const SmcVerdict five = estimate_value(fixed, *t5, Reduce::Max, 12, 10, SmcOptions{});
  const Network uni =
      testing::net_of("dist u = {[0,10):1}\nprocess A {\n  loc L init delay empirical u\n  edge L -> L\n}\n");
  const ExprPtr tu = bind(parse_query("E[<=1000; 1000](max: A.t)"), uni).ast.value;
  const SmcVerdict gap = estimate_value(uni, *tu, Reduce::Max, 1000, 1000, SmcOptions{});
  const bool pass = five.mean == 5.0 && five.half_width == 0.0 && gap.mean >= 9.5 && gap.mean <= 10.0;
  return {pass, "fixed " + render_verdict(five) + ", uniform max gap mean " + fmt(gap.mean, 4)};
}

const ReportRow* find_row(const SuiteReport& r, int id, Engine e) {
  for (const auto& x : r.rows)
    if (x.id == id && x.engine == e) return &x;
  return nullptr;
}

Outcome suite_reproduction() {
  const auto t0 = std::chrono::steady_clock::now();
  CaseStudyConfig cfg;
  cfg.data_dir = kData;
  const SuiteDefinition suite = build_case_study(cfg);
  SuiteOptions opt;
  opt.smc.runs = 100;
  const SuiteReport r = run_suite(suite, opt);
  std::vector<std::string> bad;
  auto need = [&](bool ok, const std::string& what) {
    if (!ok) bad.push_back(what);
  };
  const ReportRow* six = find_row(r, 6, Engine::Classical);
  need(six && six->verdict == "Satisfied", "row 6");
  for (int id : {7, 8, 9, 10}) {
    const ReportRow* c = find_row(r, id, Engine::Classical);
    const ReportRow* s = find_row(r, id, Engine::Statistical);
    need(c && c->verdict == "NotSatisfied", "row " + std::to_string(id) + " cmc");
    need(s && s->verdict.rfind("Pr <= ", 0) == 0 && s->met, "row " + std::to_string(id) + " smc");
  }
  const ReportRow* twelve = find_row(r, 12, Engine::Statistical);
  need(twelve && twelve->verdict.size() > 3 && twelve->verdict.find(" +/- ") != std::string::npos &&
           twelve->verdict.compare(twelve->verdict.size() - 3, 3, " ms") == 0,
       "row 12");
  const ReportRow* thirteen = find_row(r, 13, Engine::Statistical);
  need(thirteen && thirteen->artifact.rfind("run,time_ms,expr_name,value\n", 0) == 0, "row 13");
  const double secs = seconds_since(t0);
  need(secs < 300, "runtime");

  SuiteDefinition only4 = suite;
  std::erase_if(only4.rows, [](const SuiteRow& row) { return row.id != 4; });
  SuiteOptions capped = opt;
  capped.cmc.caps.max_states = 20;
  const SuiteReport r4 = run_suite(only4, capped);
  need(r4.rows.size() == 1 && r4.rows[0].verdict == "ResourceLimit", "row 4 cap");

  std::string detail = "slow profile, " + std::to_string(r.rows.size()) + " rows in " + fmt(secs, 1) + " s";
  for (const auto& b : bad) detail += "; failed " + b;
  return {bad.empty(), detail};
}

Outcome discrepancy() {
  SmcOptions o;
  o.epsilon = 0.01;
  const DiscrepancyResult d = discrepancy_demo(kData, 3, o);
  const bool pass = d.cmc.result == CmcResult::NotSatisfied && d.smc.direction == Direction::AtLeast &&
                    d.smc.bound >= 0.95;
  return {pass, std::string("CMC ") + to_string(d.cmc.result) + ", SMC " + render_verdict(d.smc) + " over " +
                    std::to_string(d.smc.runs) + " runs"};
}

Outcome determinism() {
  const std::string data = kData.parent_path().string();
  const char* argv[] = {"twinverify", "suite", "dt", "--seed", "42", "--data-dir", data.c_str()};
  std::ostringstream a, b, err;
  const int ca = cli::run(7, argv, a, err);
  const int cb = cli::run(7, argv, b, err);
  const bool pass = ca == cb && !a.str().empty() && a.str() == b.str();
  return {pass, std::to_string(a.str().size()) + " bytes, " + (a.str() == b.str() ? "identical" : "different")};
}

}  // namespace

int main() {
  const auto corpus = oracle_corpus();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"dbm oracle equivalence", dbm_oracle},
      {"reachability oracle", [&] { return reachability_oracle(corpus); }},
      {"deadlock detection", deadlock_detection},
      {"subsumption soundness", [&] { return subsumption(corpus); }},
      {"chernoff run count", chernoff},
      {"estimator coverage", coverage},
      {"sprt error rates", sprt_errors},
      {"value estimation", value_estimation},
      {"suite reproduction", suite_reproduction},
      {"discrepancy demo", discrepancy},
      {"suite determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS " : "FAIL ") << (i + 1) << ' ' << criteria[i].first << ": " << o.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
