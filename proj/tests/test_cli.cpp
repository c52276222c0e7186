#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const char* cli_path() { return LEDGERLENS_CLI; }

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("ledgerlens_cli_" + std::to_string(::getpid()) + "_" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(cli_path()) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

}  // namespace

TEST_CASE("version prints schema identifiers") {
  CHECK(run_cli("--version") == 0);
}

TEST_CASE("simulate twice produces identical files; missing inputs exit 2") {
  TempDir dir;
  write(dir.file("sim.cfg"), "n_transactions=400\nsend_rate=200\nseed=6\n");
  CHECK(run_cli("simulate --config " + dir.file("sim.cfg") + " --out " + dir.file("a.csv")) == 0);
  CHECK(run_cli("simulate --config " + dir.file("sim.cfg") + " --out " + dir.file("b.csv")) == 0);
  CHECK(slurp(dir.file("a.csv")) == slurp(dir.file("b.csv")));

  CHECK(run_cli("recommend --in " + dir.file("missing.csv") + " --out " + dir.file("r.md")) == 2);
  CHECK(run_cli("simulate --config " + dir.file("nope.cfg") + " --out " + dir.file("x.csv")) == 2);
  write(dir.file("bad.cfg"), "send_rate=-5\n");
  CHECK(run_cli("simulate --config " + dir.file("bad.cfg") + " --out " + dir.file("x.csv")) == 2);
}

TEST_CASE("seed flag overrides the config seed") {
  TempDir dir;
  write(dir.file("sim.cfg"), "n_transactions=300\nseed=1\n");
  CHECK(run_cli("simulate --config " + dir.file("sim.cfg") + " --seed 2 --out " +
                dir.file("a.csv")) == 0);
  CHECK(run_cli("simulate --config " + dir.file("sim.cfg") + " --out " + dir.file("b.csv")) == 0);
  CHECK(slurp(dir.file("a.csv")) != slurp(dir.file("b.csv")));
}

TEST_CASE("emit-raw output re-ingests to the same canonical log") {
  TempDir dir;
  write(dir.file("sim.cfg"), "n_transactions=350\nsend_rate=150\nseed=7\n");
  CHECK(run_cli("simulate --config " + dir.file("sim.cfg") + " --out " + dir.file("direct.csv") +
                " --emit-raw " + dir.file("raw.ndjson")) == 0);
  CHECK(run_cli("ingest --in " + dir.file("raw.ndjson") + " --out " + dir.file("ingested.csv")) ==
        0);
  CHECK(slurp(dir.file("direct.csv")) == slurp(dir.file("ingested.csv")));
}

TEST_CASE("analyze, eventlog, mine, and recommend chain end to end") {
  TempDir dir;
  CHECK(run_cli("simulate --preset drm --seed 3 --out " + dir.file("log.csv")) == 0);

  CHECK(run_cli("analyze --in " + dir.file("log.csv") + " --ins 10 --out " +
                dir.file("metrics.json")) == 0);
  const auto metrics = nlohmann::json::parse(slurp(dir.file("metrics.json")));
  CHECK(metrics.at("n_transactions").get<std::size_t>() == 10000);
  CHECK(metrics.at("hotkeys").size() >= 2);

  CHECK(run_cli("eventlog --in " + dir.file("log.csv") + " --xes " + dir.file("log.xes") +
                " --csv " + dir.file("events.csv")) == 0);
  CHECK(slurp(dir.file("log.xes")).find("<log") != std::string::npos);

  CHECK(run_cli("mine --in " + dir.file("events.csv") + " --dfg " + dir.file("dfg.dot") +
                " --alpha " + dir.file("alpha.dot") + " --anomalies " +
                dir.file("anomalies.json")) == 0);
  CHECK(slurp(dir.file("dfg.dot")).find("digraph") == 0);

  CHECK(run_cli("recommend --in " + dir.file("log.csv") + " --out " + dir.file("report.md") +
                " --json " + dir.file("recs.json")) == 0);
  const auto recs = nlohmann::json::parse(slurp(dir.file("recs.json")));
  std::set<std::string> kinds;
  for (const auto& rec : recs.at("recommendations")) kinds.insert(rec.at("kind"));
  CHECK(kinds == std::set<std::string>{"activity_reordering", "delta_writes",
                                       "smart_contract_partitioning"});
}

TEST_CASE("thresholds file and environment variable are honoured") {
  TempDir dir;
  write(dir.file("sim.cfg"), "n_transactions=500\nseed=4\n");
  CHECK(run_cli("simulate --config " + dir.file("sim.cfg") + " --out " + dir.file("log.csv")) ==
        0);
  // Absurdly high hotkey floor: hotkeys must vanish from the metrics.
  write(dir.file("th.cfg"), "Hk_min=100000\n");
  CHECK(run_cli("analyze --in " + dir.file("log.csv") + " --thresholds " + dir.file("th.cfg") +
                " --out " + dir.file("m.json")) == 0);
  CHECK(nlohmann::json::parse(slurp(dir.file("m.json"))).at("hotkeys").empty());

  const std::string env_cmd = std::string("LEDGERLENS_THRESHOLDS=") + dir.file("th.cfg") + " " +
                              cli_path() + " analyze --in " + dir.file("log.csv") + " --out " +
                              dir.file("m2.json") + " 2>/dev/null";
  REQUIRE(std::system(env_cmd.c_str()) == 0);
  CHECK(nlohmann::json::parse(slurp(dir.file("m2.json"))).at("hotkeys").empty());

  write(dir.file("bad.cfg"), "Et=7\n");
  CHECK(run_cli("analyze --in " + dir.file("log.csv") + " --thresholds " + dir.file("bad.cfg") +
                " --out " + dir.file("m3.json")) == 2);
}

TEST_CASE("loop on the SCM preset lists the expected legs") {
  TempDir dir;
  CHECK(run_cli("loop --preset scm --seed 1 --out " + dir.file("loop.md") + " --json " +
                dir.file("loop.json")) == 0);
  const auto loop = nlohmann::json::parse(slurp(dir.file("loop.json")));
  std::vector<std::string> legs;
  for (const auto& leg : loop.at("legs")) legs.push_back(leg.at("leg"));
  REQUIRE(legs.size() == 5);
  CHECK(legs[0] == "baseline");
  CHECK(std::find(legs.begin(), legs.end(), "activity_reordering") != legs.end());
  CHECK(std::find(legs.begin(), legs.end(), "process_model_pruning") != legs.end());
  CHECK(std::find(legs.begin(), legs.end(), "transaction_rate_control") != legs.end());
  CHECK(legs.back() == "all");
  const std::string md = slurp(dir.file("loop.md"));
  CHECK(md.find("| baseline |") != std::string::npos);
}
