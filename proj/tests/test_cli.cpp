#include <doctest.h>

#include <sys/wait.h>

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "geodcd/graph.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;  // stdout and stderr
};

Run run(const std::string& args) {
  const std::string cmd = std::string(GEODCD_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  while (const std::size_t n = fread(buf, 1, sizeof buf, p)) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("geodcd_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
  std::string write(const std::string& name, const json& j) const {
    std::ofstream(file(name)) << j.dump(2);
    return file(name);
  }
};

json small(const std::string& variant = "SIMPLE") {
  return json{{"schema", "geodcd-experiment/1"},
              {"sbm", {{"variant", variant}, {"d", 40}, {"T", 4}, {"k", 2}, {"p_in", 0.6}, {"p_out", 0.05}}},
              {"methods", {"NSC"}},
              {"seed", 7}};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("generate is reproducible for a fixed seed") {
  TempDir a, b;
  const auto cfg = a.write("c.json", small());
  REQUIRE(run("generate --config " + cfg + " --out " + a.file("o")).code == 0);
  REQUIRE(run("generate --config " + cfg + " --out " + b.file("o")).code == 0);
  CHECK(slurp(a.file("o/sequence.json")) == slurp(b.file("o/sequence.json")));
  CHECK(slurp(a.file("o/truth.json")) == slurp(b.file("o/truth.json")));
  const auto seq = geodcd::load_sequence(a.file("o/sequence.json"));
  CHECK(seq.T() == 4);
  CHECK(seq.d() == 40);
  REQUIRE(run("generate --config " + cfg + " --seed 8 --out " + b.file("p")).code == 0);
  CHECK(slurp(a.file("o/sequence.json")) != slurp(b.file("p/sequence.json")));
}

TEST_CASE("invalid probability exits 2 naming the field") {
  TempDir t;
  json j = small();
  j["sbm"]["p_in"] = 1.2;
  const auto r = run("generate --config " + t.write("c.json", j) + " --out " + t.file("o"));
  CHECK(r.code == 2);
  CHECK(r.out.find("p_in") != std::string::npos);
}

TEST_CASE("missing input exits 2") {
  TempDir t;
  CHECK(run("detect --config " + t.file("absent.json")).code == 2);
  json j = small();
  j.erase("sbm");
  j["input"] = "nowhere.json";
  j["truth"] = "nowhere_truth.json";
  CHECK(run("detect --config " + t.write("c.json", j) + " --out " + t.file("o")).code == 2);
  CHECK(run("bogus").code == 2);
  CHECK(run("generate").code == 2);
}

TEST_CASE("detect then score against truth") {
  TempDir t;
  const auto cfg = t.write("c.json", small());
  REQUIRE(run("generate --config " + cfg + " --out " + t.file("o")).code == 0);
  const auto self = run("score --truth " + t.file("o/truth.json") + " --pred " + t.file("o/truth.json"));
  REQUIRE(self.code == 0);
  std::istringstream lines(self.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "t_index,metric,value");
  int rows = 0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    CHECK(std::stod(line.substr(line.rfind(',') + 1)) == doctest::Approx(1.0));
    ++rows;
  }
  CHECK(rows == 4 + 3);

  REQUIRE(run("detect --config " + cfg + " --out " + t.file("d")).code == 0);
  CHECK(fs::exists(t.file("d/partitions.json")));
  CHECK(fs::exists(t.file("d/fit_report.csv")));
  const auto sc = run("score --metric ecs --truth " + t.file("o/truth.json") + " --pred " + t.file("d/partitions.json"));
  CHECK(sc.code == 0);
  CHECK(sc.out.find("median,ecs") != std::string::npos);
}

TEST_CASE("variable-k detect writes the k trace and benefit table") {
  TempDir t;
  json j = small();
  j["pipeline"] = {{"variable", true}, {"k_min", 2}, {"k_max", 4}};
  REQUIRE(run("detect --config " + t.write("c.json", j) + " --out " + t.file("o")).code == 0);
  const std::string k = slurp(t.file("o/k_trace.csv"));
  CHECK(k.rfind("t_index,k\n", 0) == 0);
  CHECK(std::count(k.begin(), k.end(), '\n') == 5);
  CHECK(fs::exists(t.file("o/benefit.csv")));
}

TEST_CASE("multiview generation keeps every view") {
  TempDir t;
  json j = small("MVSBM");
  j["sbm"]["S"] = 3;
  j["methods"] = {"SMM"};
  REQUIRE(run("generate --config " + t.write("c.json", j) + " --out " + t.file("o")).code == 0);
  const auto seq = geodcd::load_sequence(t.file("o/sequence.json"));
  for (const auto& g : seq.snapshots) CHECK(g.view_count() == 3);
}

TEST_CASE("geocheck and bench outputs") {
  TempDir t;
  json j = small();
  j["modes"] = {"geodesic", "static"};
  j["repetitions"] = 2;
  const auto cfg = t.write("c.json", j);
  const auto g = run("geocheck --config " + cfg + " --out " + t.file("g"));
  CHECK(g.code == 0);
  CHECK(g.out.find("sigma3/sigma1") != std::string::npos);
  CHECK(fs::exists(t.file("g/geocheck_sigma.csv")));
  CHECK(fs::exists(t.file("g/geocheck_proj.csv")));
  const auto b = run("bench --config " + cfg + " --jobs 2 --out " + t.file("b"));
  CHECK(b.code == 0);
  for (const char* f : {"bench_runs.csv", "bench_summary.csv", "bench_trace.csv"}) CHECK(fs::exists(t.file(std::string("b/") + f)));
}

TEST_CASE("shipped configs parse through the CLI") {
  TempDir t;
  const auto r = run("generate --config " + std::string(GEODCD_CONFIG_DIR) + "/fig5_simple_sbm.json --out " + t.file("o"));
  CHECK(r.code == 0);
}
