#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <functional>
#include <fstream>
#include <string>

#include "geodcd/error.hpp"
#include "geodcd/graph.hpp"
#include "geodcd/sbm.hpp"
#include "support.hpp"

using namespace geodcd;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("geodcd_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal file loads with symmetric adjacency") {
  TempDir dir;
  write(dir.file("s.json"), R"({"d": 3, "directed": false, "snapshots": [{"edges": [[0, 1, 1.0]]}, {"edges": [[0, 1, 1.0]]}]})");
  const auto seq = load_sequence(dir.file("s.json"));
  REQUIRE(seq.T() == 2);
  for (const auto& g : seq.snapshots) {
    const Mat a = g.adjacency();
    CHECK(a.rows() == 3);
    CHECK(a(0, 1) == 1.0);
    CHECK(a(1, 0) == 1.0);
    CHECK(a.sum() == 2.0);
  }
  CHECK(seq.times == std::vector<double>{0.0, 1.0});
}

TEST_CASE("self-loop is rejected") {
  TempDir dir;
  write(dir.file("s.json"), R"({"d": 3, "directed": false, "snapshots": [{"edges": [[0, 0, 1.0]]}]})");
  CHECK(error_of([&] { load_sequence(dir.file("s.json")); }).find("self-loop") != std::string::npos);
}

TEST_CASE("malformed files name the problem") {
  TempDir dir;
  write(dir.file("a.json"), R"({"directed": false, "snapshots": []})");
  CHECK(error_of([&] { load_sequence(dir.file("a.json")); }).find("'d'") != std::string::npos);
  write(dir.file("b.json"), R"({"d": 2, "directed": false, "snapshots": [{"edges": [[0, 5, 1.0]]}]})");
  CHECK(error_of([&] { load_sequence(dir.file("b.json")); }).find("out of range") != std::string::npos);
  write(dir.file("c.json"), "{not json");
  CHECK(error_of([&] { load_sequence(dir.file("c.json")); }).find("parse error") != std::string::npos);
  CHECK(error_of([&] { load_sequence(dir.file("missing.json")); }).find("missing.json") != std::string::npos);
  write(dir.file("d.json"), R"({"d": 2, "directed": false, "times": [1.0, 0.5], "snapshots": [{"edges": []}, {"edges": []}]})");
  CHECK(error_of([&] { load_sequence(dir.file("d.json")); }).find("increasing") != std::string::npos);
  write(dir.file("e.json"), R"({"d": 2, "directed": false, "snapshots": [{"edges": [[0, 1, 1.0], [1, 0, 2.0]]}]})");
  CHECK(error_of([&] { load_sequence(dir.file("e.json")); }).find("duplicate") != std::string::npos);
}

TEST_CASE("generated sequence round-trips bit-identically") {
  TempDir dir;
  SbmConfig c;
  c.seed = 11;
  const auto data = generate(c);
  dump_sequence(data.seq, dir.file("seq.json"));
  const auto back = load_sequence(dir.file("seq.json"));
  CHECK(back == data.seq);
  dump_partitions(data.truth, dir.file("truth.json"));
  CHECK(load_partitions(dir.file("truth.json")) == data.truth);
}

TEST_CASE("round trips: empty, signed, multiview, directed, bipartite, soft") {
  TempDir dir;
  SnapshotSequence empty;
  GraphSnapshot g0;
  g0.d = 4;
  empty.snapshots = {g0};
  empty.times = {0.0};
  dump_sequence(empty, dir.file("e.json"));
  CHECK(load_sequence(dir.file("e.json")) == empty);

  Philox rng(5, 0);
  SnapshotSequence sg;
  for (int i = 0; i < 2; ++i) sg.snapshots.push_back(testing::random_graph(rng, 9, 0.4, false, true));
  sg.times = {0.0, 0.25};
  sg.name_table = {"a", "b", "c", "d", "e", "f", "g", "h", "i"};
  dump_sequence(sg, dir.file("s.json"));
  CHECK(load_sequence(dir.file("s.json")) == sg);

  SbmConfig mv;
  mv.variant = SbmVariant::MVSBM;
  mv.S = 3;
  mv.d = 30;
  mv.T = 3;
  const auto mvd = generate(mv);
  dump_sequence(mvd.seq, dir.file("m.json"));
  const auto mvb = load_sequence(dir.file("m.json"));
  CHECK(mvb == mvd.seq);
  CHECK(mvb.snapshots.front().view_count() == 3);

  SbmConfig sc;
  sc.variant = SbmVariant::SCBM;
  sc.bipartite = true;
  sc.d = 24;
  sc.T = 3;
  sc.k = 2;
  sc.B = Mat::Constant(2, 2, 0.2);
  sc.B.diagonal().setConstant(0.5);
  const auto scd = generate(sc);
  dump_sequence(scd.seq, dir.file("b.json"));
  CHECK(load_sequence(dir.file("b.json")) == scd.seq);

  PartitionSequence soft;
  Mat m(3, 2);
  m << 1.0, 0.0, 0.25, 0.75, 0.5, 0.5;
  soft.steps = {soft_partition(m), hard_partition({0, -1, 1})};
  dump_partitions(soft, dir.file("p.json"));
  CHECK(load_partitions(dir.file("p.json")) == soft);
}

TEST_CASE("validate partition") {
  Partition p = hard_partition({0, 1, 1});
  CHECK(p.k == 2);
  CHECK_NOTHROW(validate(p));
  p.labels[0] = 5;
  CHECK_THROWS_AS(validate(p), InputError);
  Mat m(2, 2);
  m << 0.7, 0.2, 0.5, 0.5;
  CHECK_THROWS_AS(validate(soft_partition(m)), InputError);
}

TEST_CASE("ensure_connected") {
  Philox rng(6, 0);
  GraphSnapshot conn = testing::disjoint_cliques(1, 5);
  CHECK(ensure_connected(conn) == conn);

  GraphSnapshot tri;
  tri.d = 6;
  tri.edges() = {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}, {3, 4, 1}, {4, 5, 1}, {3, 5, 1}};
  int nc = 0;
  components(tri, &nc);
  CHECK(nc == 2);
  const auto fixed = ensure_connected(tri);
  CHECK(fixed.edges().size() == tri.edges().size() + 1);
  components(fixed, &nc);
  CHECK(nc == 1);

  GraphSnapshot iso;
  iso.d = 7;
  const auto star = ensure_connected(iso);
  CHECK(star.edges().size() == 6);
  components(star, &nc);
  CHECK(nc == 1);
  CHECK_NOTHROW(validate(star));

  GraphSnapshot dir = iso;
  dir.directed = true;
  CHECK_THROWS_AS(ensure_connected(dir), InputError);
}

TEST_CASE("drop_nodes reindexes") {
  GraphSnapshot g;
  g.d = 4;
  g.edges() = {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}};
  const auto h = drop_nodes(g, {1});
  CHECK(h.d == 3);
  CHECK(h.edges() == EdgeList{{1, 2, 1}});
}

TEST_CASE("directed and signed adjacency") {
  GraphSnapshot g;
  g.d = 3;
  g.directed = true;
  g.edges() = {{0, 1, 2.0}, {2, 0, -1.0}};
  const Mat a = g.adjacency();
  CHECK(a(0, 1) == 2.0);
  CHECK(a(1, 0) == 0.0);
  CHECK(g.is_signed());
  CHECK(positive_part(a).sum() == 2.0);
  CHECK(negative_part(a)(2, 0) == 1.0);
  CHECK(degrees(a)[0] == 2.0);
}
