// JSON containers for sequences and partitions. Schema in README.md.

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "geodcd/error.hpp"
#include "geodcd/graph.hpp"

namespace geodcd {

using nlohmann::json;

namespace {

constexpr const char* kSequenceFormat = "geodcd-sequence";
constexpr const char* kPartitionFormat = "geodcd-partitions";

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path + ": parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << j.dump(1) << '\n';
  if (!out) throw InputError("write failed: " + path);
}

template <class T>
T field(const json& j, const char* name, const std::string& where) {
  if (!j.contains(name)) throw InputError(where + ": missing field '" + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    throw InputError(where + ": field '" + name + "' has the wrong type");
  }
}

json edges_to_json(const EdgeList& edges) {
  json arr = json::array();
  for (const auto& e : edges) arr.push_back(json::array({e.src, e.dst, e.w}));
  return arr;
}

EdgeList edges_from_json(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw InputError(where + ": edge list must be an array");
  EdgeList out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& t = arr[i];
    const std::string at = where + "[" + std::to_string(i) + "]";
    if (!t.is_array() || t.size() != 3 || !t[0].is_number_integer() || !t[1].is_number_integer() ||
        !t[2].is_number())
      throw InputError(at + ": edge must be [src, dst, weight]");
    out.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<double>()});
  }
  return out;
}

}  // namespace

SnapshotSequence load_sequence(const std::string& path) {
  const json j = read_json(path);
  if (j.value("format", std::string(kSequenceFormat)) != kSequenceFormat)
    throw InputError(path + ": field 'format' is not " + kSequenceFormat);
  SnapshotSequence seq;
  const int d = field<int>(j, "d", path);
  const bool directed = field<bool>(j, "directed", path);
  const int views = j.value("views", 1);
  if (views < 1) throw InputError(path + ": field 'views' must be >= 1");
  std::optional<std::pair<int, int>> split;
  if (j.contains("bipartite_split") && !j["bipartite_split"].is_null()) {
    const auto s = field<std::vector<int>>(j, "bipartite_split", path);
    if (s.size() != 2) throw InputError(path + ": field 'bipartite_split' must have 2 entries");
    split = std::pair{s[0], s[1]};
  }
  if (j.contains("name_table")) seq.name_table = field<std::vector<std::string>>(j, "name_table", path);
  if (!j.contains("snapshots") || !j["snapshots"].is_array())
    throw InputError(path + ": missing field 'snapshots'");
  const auto& snaps = j["snapshots"];
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    const std::string where = path + ": snapshots[" + std::to_string(i) + "]";
    GraphSnapshot g;
    g.d = d;
    g.directed = directed;
    g.bipartite_split = split;
    const auto& s = snaps[i];
    if (s.contains("views")) {
      const auto& vs = s["views"];
      if (!vs.is_array() || static_cast<int>(vs.size()) != views)
        throw InputError(where + ": views must have " + std::to_string(views) + " entries");
      g.views.clear();
      for (std::size_t v = 0; v < vs.size(); ++v)
        g.views.push_back(edges_from_json(vs[v], where + ".views[" + std::to_string(v) + "]"));
    } else {
      if (views != 1) throw InputError(where + ": multiview sequence needs a 'views' field");
      if (!s.contains("edges")) throw InputError(where + ": missing field 'edges'");
      g.views = {edges_from_json(s["edges"], where + ".edges")};
    }
    seq.snapshots.push_back(std::move(g));
  }
  seq.times = j.contains("times") ? field<std::vector<double>>(j, "times", path)
                                  : default_times(static_cast<int>(seq.snapshots.size()));
  try {
    validate(seq);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
  return seq;
}

void dump_sequence(const SnapshotSequence& seq, const std::string& path) {
  json j;
  j["format"] = kSequenceFormat;
  j["version"] = 1;
  const GraphSnapshot* first = seq.snapshots.empty() ? nullptr : &seq.snapshots.front();
  j["d"] = first ? first->d : 0;
  j["directed"] = first ? first->directed : false;
  const int views = first ? first->view_count() : 1;
  if (views > 1) j["views"] = views;
  if (first && first->bipartite_split)
    j["bipartite_split"] = {first->bipartite_split->first, first->bipartite_split->second};
  if (!seq.name_table.empty()) j["name_table"] = seq.name_table;
  j["times"] = seq.times;
  json snaps = json::array();
  for (const auto& g : seq.snapshots) {
    json s;
    if (views > 1) {
      s["views"] = json::array();
      for (const auto& v : g.views) s["views"].push_back(edges_to_json(v));
    } else {
      s["edges"] = edges_to_json(g.edges());
    }
    snaps.push_back(std::move(s));
  }
  j["snapshots"] = std::move(snaps);
  write_json(j, path);
}

PartitionSequence load_partitions(const std::string& path) {
  const json j = read_json(path);
  if (j.value("format", std::string(kPartitionFormat)) != kPartitionFormat)
    throw InputError(path + ": field 'format' is not " + kPartitionFormat);
  if (!j.contains("steps") || !j["steps"].is_array()) throw InputError(path + ": missing field 'steps'");
  PartitionSequence out;
  const auto& steps = j["steps"];
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const std::string where = path + ": steps[" + std::to_string(i) + "]";
    const auto& s = steps[i];
    Partition p;
    if (s.contains("membership")) {
      const auto rows = field<std::vector<std::vector<double>>>(s, "membership", where);
      const int k = rows.empty() ? 0 : static_cast<int>(rows.front().size());
      Mat m(rows.size(), k);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (static_cast<int>(rows[r].size()) != k) throw InputError(where + ": ragged membership");
        for (int c = 0; c < k; ++c) m(r, c) = rows[r][c];
      }
      p = soft_partition(std::move(m));
      if (s.contains("labels")) p.labels = field<std::vector<int>>(s, "labels", where);
    } else {
      p = hard_partition(field<std::vector<int>>(s, "labels", where));
      if (s.contains("k")) p.k = std::max(p.k, field<int>(s, "k", where));
    }
    try {
      validate(p);
    } catch (const InputError& e) {
      throw InputError(where + ": " + e.what());
    }
    out.steps.push_back(std::move(p));
  }
  return out;
}

void dump_partitions(const PartitionSequence& parts, const std::string& path) {
  json j;
  j["format"] = kPartitionFormat;
  j["version"] = 1;
  json steps = json::array();
  for (const auto& p : parts.steps) {
    json s;
    s["k"] = p.k;
    s["labels"] = p.labels;
    if (p.soft()) {
      json rows = json::array();
      for (Eigen::Index r = 0; r < p.membership.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < p.membership.cols(); ++c) row.push_back(p.membership(r, c));
        rows.push_back(std::move(row));
      }
      s["membership"] = std::move(rows);
    }
    steps.push_back(std::move(s));
  }
  j["steps"] = std::move(steps);
  write_json(j, path);
}

}  // namespace geodcd
