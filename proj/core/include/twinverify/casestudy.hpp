#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "twinverify/model.hpp"
#include "twinverify/query.hpp"
#include "twinverify/smc.hpp"
#include "twinverify/timing.hpp"
#include "twinverify/zone_engine.hpp"

namespace twinverify {

/// Qualitative expectation attached to a suite row.
enum class Expectation : std::uint8_t {
  Satisfied,
  NotSatisfied,
  High,  // Clopper-Pearson lower bound >= 0.5
  Low,   // Clopper-Pearson upper bound <= 0.5
  Estimate,
  Trajectories,
  ResourceLimitTolerated,
};
const char* to_string(Expectation e);

struct SuiteRow {
  int id = 0;
  Engine engine = Engine::Classical;
  Expectation expect = Expectation::Satisfied;
  std::string text;
  QueryAst ast;
  int line = 0;
};

/// Suite file: `<id> <cmc|smc> <expectation> <query>` per line, `#`
/// comments. Throws ParseError with line positions.
std::vector<SuiteRow> parse_suite(std::string_view text);

/// Triangular density on [lo, hi) with the given mode, binned at `width`
/// with counts round(total * bucket mass); empty buckets are dropped.
EmpiricalDistribution triangular_histogram(double lo, double hi, double mode, double width,
                                           std::uint64_t total = 1000);

/// The generator behind the shipped `profiles/<name>/*.csv` files.
/// Throws TimingError for an unknown profile.
std::map<std::string, EmpiricalDistribution> synthetic_profile(const std::string& name);

struct CaseStudyConfig {
  std::filesystem::path data_dir;  // directory holding model.tvm, suite.tvq, profiles/
  std::string profile = "slow";
  std::optional<std::filesystem::path> histogram_dir;  // overrides profiles/<profile>
};

struct SuiteDefinition {
  Network sta;  // Empirical delays
  Network ta;   // to_approximate(sta)
  std::vector<SuiteRow> rows;
  std::string profile;
};

/// Loads and validates the case-study model under a timing profile.
/// Throws ParseError / ModelError on invalid inputs.
SuiteDefinition build_case_study(const CaseStudyConfig& cfg);

struct SuiteOptions {
  ZoneEngineOptions cmc;
  SmcOptions smc;
};

struct ReportRow {
  int id = 0;
  Engine engine = Engine::Classical;
  Expectation expect = Expectation::Satisfied;
  std::string query;
  std::string verdict;  // Satisfied, Pr >= 0.963783, 1387.94 +/- 1.35 ms, ...
  bool met = false;
  PerfTriple stats;
  std::string detail;    // cap hit, diagnostic, or accepted hypothesis
  std::string artifact;  // trajectory or witness CSV, if any
};

struct SuiteReport {
  std::string profile;
  std::uint64_t seed = 0;
  std::vector<ReportRow> rows;

  bool all_met() const;
};

/// Runs every row on its engine, CMC rows on the TA net and SMC rows on the
/// STA net. Row failures become report entries; the suite never aborts.
SuiteReport run_suite(const SuiteDefinition& suite, const SuiteOptions& opt);

/// Whether a classical / statistical result meets an expectation.
bool meets(Expectation e, const CmcVerdict& v);
bool meets(Expectation e, const SmcVerdict& v);

enum class ReportFormat : std::uint8_t { Table, Json, Csv };

/// CPU time is reported only when `measured_timing` is set; it is the one
/// nondeterministic column.
std::string render_report(const SuiteReport& r, ReportFormat f, bool measured_timing);

struct DiscrepancyResult {
  CmcVerdict cmc;          // on the TA approximation
  SmcVerdict smc;          // on the Empirical net
  SmcVerdict smc_average;  // Empirical replaced by its weighted average
  std::string cmc_query;
  std::string smc_query;
};

/// Bounded-response property `Receiver.Wait imply w <= window` on the shipped
/// two-component net with a bimodal latency.
DiscrepancyResult discrepancy_demo(const std::filesystem::path& data_dir, int window, const SmcOptions& opt);

}  // namespace twinverify
