#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"
#include "nets.hpp"

using namespace twinverify;
using testing::ScratchDir;
using testing::slurp;

namespace {

// A counter with 51 reachable values; enough to trip small state caps.
constexpr const char* kCounter = R"(int v[0,50] = 0
process C {
  loc L init delay fixed 1
  edge L -> L guard v < 50 update v = v + 1
}
)";

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "twinverify");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string write(const ScratchDir& dir, const std::string& name, const std::string& text) {
  const auto p = dir / name;
  std::ofstream(p) << text;
  return p.string();
}

// Restores an environment variable on scope exit.
class EnvGuard {
public:
  EnvGuard(const char* name, const char* value) : name_(name) {
    if (const char* old = std::getenv(name)) old_ = old;
    ::setenv(name, value, 1);
  }
  ~EnvGuard() {
    if (old_.empty()) ::unsetenv(name_);
    else ::setenv(name_, old_.c_str(), 1);
  }

private:
  const char* name_;
  std::string old_;
};

const std::string kData = std::string(TWINVERIFY_TEST_DATA_DIR);
const std::filesystem::path kGolden = TWINVERIFY_TEST_GOLDEN_DIR;

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("deadlock-free handshake exits 0") {
    ScratchDir dir("cli");
    const Result r = invoke({"check", write(dir, "hs.tvm", testing::kHandshake), "-q", "A[] not deadlock"});
    CHECK(r.code == cli::kExitOk);
    CHECK(r.out.find("Satisfied") != std::string::npos);
  }

  TEST_CASE("crossed waits exit 1 with a witness file") {
    ScratchDir dir("cli");
    const Result r = invoke({"check", write(dir, "cw.tvm", testing::kCrossedWait), "-q", "A[] not deadlock",
                          "--artifacts", dir.path().string()});
    CHECK(r.code == cli::kExitRefuted);
    CHECK(r.out.find("NotSatisfied") != std::string::npos);
    const auto witness = dir / "cw-q1-witness.csv";
    CHECK(std::filesystem::exists(witness));
    CHECK(r.out.find(witness.string()) != std::string::npos);
  }

  TEST_CASE("state cap exits 2") {
    ScratchDir dir("cli");
    const Result r = invoke({"check", write(dir, "c.tvm", kCounter), "-q", "E<> v == 50", "--max-states", "10"});
    CHECK(r.code == cli::kExitResourceLimit);
    CHECK(r.out.find("ResourceLimit") != std::string::npos);
  }

  TEST_CASE("resource limit outranks a refutation") {
    ScratchDir dir("cli");
    const Result r = invoke({"check", write(dir, "c.tvm", kCounter), "-q", "A[] v < 0", "-q", "E<> v == 50",
                          "--max-states", "10", "--artifacts", dir.path().string()});
    CHECK(r.code == cli::kExitResourceLimit);
  }

  TEST_CASE("environment caps apply only without the flag") {
    ScratchDir dir("cli");
    const std::string model = write(dir, "c.tvm", kCounter);
    const std::string artifacts = dir.path().string();
    EnvGuard env("TWINVERIFY_MAX_STATES", "10");
    CHECK(invoke({"check", model, "-q", "E<> v == 50", "--artifacts", artifacts}).code == cli::kExitResourceLimit);
    CHECK(invoke({"check", model, "-q", "E<> v == 50", "--max-states", "1000", "--artifacts", artifacts}).code ==
          cli::kExitOk);
  }

  TEST_CASE("usage, parse and io errors exit 3") {
    ScratchDir dir("cli");
    const std::string model = write(dir, "hs.tvm", testing::kHandshake);
    const Result missing = invoke({"check", (dir / "absent.tvm").string(), "-q", "E<> A.Wait"});
    CHECK(missing.code == cli::kExitUsage);
    CHECK(missing.err.rfind("error: ", 0) == 0);
    CHECK(invoke({"check", model, "-q", "E<> (x == )"}).code == cli::kExitUsage);
    CHECK(invoke({"check", model, "-q", "E<> Nobody.Home"}).code == cli::kExitUsage);
    CHECK(invoke({"check", write(dir, "bad.tvm", "process {")}).code == cli::kExitUsage);
    CHECK(invoke({"frobnicate"}).code == cli::kExitUsage);
    CHECK(invoke({"check", model, "--format", "xml", "-q", "E<> A.Wait"}).code == cli::kExitUsage);
    CHECK(invoke({"--help"}).code == cli::kExitOk);
  }

  TEST_CASE("queries sent to the wrong engine exit 3") {
    ScratchDir dir("cli");
    const std::string model = write(dir, "hs.tvm", testing::kHandshake);
    const Result smc = invoke({"smc", model, "-q", "E<> A.Wait"});
    CHECK(smc.code == cli::kExitUsage);
    CHECK(smc.err.find("ENGINE_MISMATCH") != std::string::npos);
    CHECK(invoke({"check", model, "-q", "Pr[<=10](<> A.Wait)"}).code == cli::kExitUsage);
  }

  TEST_CASE("statistical runs are reproducible from the seed") {
    ScratchDir dir("cli");
    const std::string model = write(dir, "hs.tvm", testing::kHandshake);
    const std::vector<std::string> args{"smc", model, "-q", "Pr[<=100](<> B.Reply)", "--runs", "50",
                                        "--seed", "11", "--format", "json"};
    const Result a = invoke(args), b = invoke(args);
    CHECK(a.code == cli::kExitOk);
    CHECK(a.out == b.out);
    const auto j = nlohmann::json::parse(a.out);
    CHECK(j["seed"] == 11);
    CHECK(j["results"][0]["verdict"] == "Pr >= 0.928878");
  }

  TEST_CASE("theta turns an estimate into a test") {
    ScratchDir dir("cli");
    const Result r = invoke({"smc", write(dir, "hs.tvm", testing::kHandshake), "-q", "Pr[<=100](<> B.Reply)", "--theta",
                          "0.5", "--format", "csv"});
    CHECK(r.code == cli::kExitOk);
    CHECK(r.out.find("accept") != std::string::npos);
  }

  TEST_CASE("simulate writes a trajectory file") {
    ScratchDir dir("cli");
    const Result r = invoke({"smc", write(dir, "hs.tvm", testing::kHandshake), "-q", "simulate 2 [<=10] {ping}",
                          "--artifacts", dir.path().string()});
    CHECK(r.code == cli::kExitOk);
    const auto csv = dir / "hs-q1-trajectories.csv";
    REQUIRE(std::filesystem::exists(csv));
    CHECK(slurp(csv).rfind("run,time_ms,expr_name,value\n", 0) == 0);
  }

  TEST_CASE("ingest reproduces the golden histogram") {
    const Result r = invoke({"ingest", (kGolden / "ingest_log.csv").string(), "--bucket-width", "10", "--source",
                             "planner:request", "--target", "unity:response"});
    CHECK(r.code == cli::kExitOk);
    CHECK(r.out == slurp(kGolden / "ingest_hist.csv"));
  }

  TEST_CASE("ingest pairs the only two event kinds by default") {
    const Result ambiguous = invoke({"ingest", (kGolden / "ingest_log.csv").string(), "--bucket-width", "10"});
    CHECK(ambiguous.code == cli::kExitUsage);
    CHECK(ambiguous.err.find("--source") != std::string::npos);
    ScratchDir dir("cli");
    const std::string log = write(dir, "log.csv", "timestamp_ms,component,event\n0,a,req\n4,b,resp\n10,a,req\n17,b,resp\n");
    const Result r = invoke({"ingest", log, "--bucket-width", "5"});
    CHECK(r.code == cli::kExitOk);
    CHECK(r.out == "lo,hi,count\n0,5,1\n5,10,1\n");
  }

  TEST_CASE("output files are written whole") {
    ScratchDir dir("cli");
    const auto out = dir / "hist.csv";
    const Result r = invoke({"ingest", (kGolden / "ingest_log.csv").string(), "--bucket-width", "10", "--source",
                             "planner:request", "--target", "unity:response", "-o", out.string()});
    CHECK(r.code == cli::kExitOk);
    CHECK(r.out.empty());
    CHECK(slurp(out) == slurp(kGolden / "ingest_hist.csv"));
    CHECK_FALSE(std::filesystem::exists(out.string() + ".partial"));
  }

  TEST_CASE("suite json is valid and reports met expectations") {
    const Result r = invoke({"suite", "dt", "--data-dir", kData, "--rows", "6,7", "--format", "json"});
    CHECK(r.code == cli::kExitOk);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["all_met"] == true);
    CHECK(j["rows"].size() == 3);
  }

  TEST_CASE("fast profile misses the slow expectations") {
    CHECK(invoke({"suite", "dt", "--data-dir", kData, "--rows", "7", "--profile", "fast"}).code == cli::kExitRefuted);
  }

  TEST_CASE("suite artifacts are opt-in") {
    ScratchDir dir("cli");
    CHECK(invoke({"suite", "dt", "--data-dir", kData, "--rows", "13", "--artifacts", dir.path().string()}).code ==
          cli::kExitOk);
    CHECK(std::filesystem::exists(dir / "row13-trajectories.csv"));
  }

  TEST_CASE("suite reports are byte-identical for a fixed seed") {
    const std::vector<std::string> args{"suite", "dt", "--data-dir", kData, "--seed", "42", "--format", "csv"};
    const Result a = invoke(args), b = invoke(args);
    CHECK(a.code == cli::kExitOk);
    CHECK(a.out == b.out);
  }
}
