#include "geodcd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "geodcd/error.hpp"

namespace geodcd {

using nlohmann::json;

namespace {

template <class T>
T field(const json& j, const std::string& key, const std::string& where, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError("config: field '" + where + key + "' has the wrong type");
  }
}

Mat matrix_field(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) return {};
  const json& m = j.at(key);
  const std::string name = "config: field '" + where + key + "'";
  if (!m.is_array() || m.empty() || !m.front().is_array()) throw InputError(name + " must be a nested array");
  const auto rows = static_cast<Eigen::Index>(m.size());
  const auto cols = static_cast<Eigen::Index>(m.front().size());
  Mat out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!m[r].is_array() || static_cast<Eigen::Index>(m[r].size()) != cols) throw InputError(name + " is ragged");
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!m[r][c].is_number()) throw InputError(name + " must hold numbers");
      out(r, c) = m[r][c].get<double>();
    }
  }
  return out;
}

void check_keys(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw InputError("config: '" + where + "' must be an object");
  for (const auto& [k, v] : j.items()) {
    (void)v;
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      throw InputError("config: unknown field '" + where + k + "'");
  }
}

std::string resolve(const std::string& base, const std::string& p) {
  if (p.empty() || base.empty() || std::filesystem::path(p).is_absolute()) return p;
  return (std::filesystem::path(base) / p).string();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

SbmConfig sbm_from_json(const json& j) {
  const std::string w = "sbm.";
  check_keys(j,
             {"variant", "d", "T", "k", "p_in", "p_out", "p_switch", "p_switch_send", "p_switch_receive", "eta_in",
              "eta_out", "F", "B", "Phi", "phi_overlap", "tree", "leaf_jitter", "S", "bipartite", "bridge", "merges",
              "merge_start", "merge_end", "seed"},
             "sbm.");
  SbmConfig c;
  c.variant = variant_from_name(field<std::string>(j, "variant", w, "SIMPLE"));
  c.d = field<int>(j, "d", w, c.d);
  c.T = field<int>(j, "T", w, c.T);
  c.k = field<int>(j, "k", w, c.k);
  c.p_in = field<double>(j, "p_in", w, c.p_in);
  c.p_out = field<double>(j, "p_out", w, c.p_out);
  c.p_switch = field<double>(j, "p_switch", w, c.p_switch);
  c.p_switch_send = field<double>(j, "p_switch_send", w, c.p_switch);
  c.p_switch_receive = field<double>(j, "p_switch_receive", w, c.p_switch);
  c.eta_in = field<double>(j, "eta_in", w, c.eta_in);
  c.eta_out = field<double>(j, "eta_out", w, c.eta_out);
  c.F = matrix_field(j, "F", w);
  c.B = matrix_field(j, "B", w);
  c.Phi = matrix_field(j, "Phi", w);
  if (j.contains("phi_overlap")) c.Phi = overlap_phi(c.d, field<int>(j, "phi_overlap", w, 0));
  if (c.variant == SbmVariant::MMSBM && c.B.size() == 0) {
    c.B = Mat::Constant(c.k, c.k, c.p_out);
    c.B.diagonal().setConstant(c.p_in);
  }
  if (j.contains("tree")) {
    const json& t = j.at("tree");
    check_keys(t, {"parent", "weight"}, "sbm.tree.");
    HsbmTree tree;
    tree.parent = field<std::vector<int>>(t, "parent", "sbm.tree.", {});
    tree.weight = field<std::vector<double>>(t, "weight", "sbm.tree.", {});
    c.tree = tree;
  }
  c.leaf_jitter = field<double>(j, "leaf_jitter", w, c.leaf_jitter);
  c.S = field<int>(j, "S", w, c.S);
  c.bipartite = field<bool>(j, "bipartite", w, c.bipartite);
  c.bridge = field<bool>(j, "bridge", w, c.bridge);
  c.merges = field<int>(j, "merges", w, c.merges);
  c.merge_start = field<int>(j, "merge_start", w, c.merge_start);
  c.merge_end = field<int>(j, "merge_end", w, c.merge_end);
  c.seed = field<std::uint64_t>(j, "seed", w, c.seed);
  validate(c);
  return c;
}

MethodRun method_from_json(const json& mj, const json& pj) {
  MethodRun run;
  PipelineConfig& p = run.pipeline;
  const std::string mw = "method.";
  if (mj.is_string()) {
    p.method.method = method_from_name(mj.get<std::string>());
  } else {
    check_keys(mj,
               {"method", "label", "p", "epsilon", "r", "tau", "usc_shift", "regularize_degrees", "fuzzifier",
                "p_thresh", "k_c", "k_e", "row_normalize"},
               mw);
    if (!mj.contains("method")) throw InputError("config: field 'method.method' is required");
    p.method.method = method_from_name(field<std::string>(mj, "method", mw, ""));
    run.label = field<std::string>(mj, "label", mw, "");
    p.method.p = field<double>(mj, "p", mw, p.method.p);
    p.method.epsilon = field<double>(mj, "epsilon", mw, p.method.epsilon);
    if (mj.contains("r")) p.method.r = field<double>(mj, "r", mw, 0.0);
    if (mj.contains("tau")) p.method.tau = field<double>(mj, "tau", mw, 0.0);
    if (mj.contains("usc_shift")) p.method.usc_shift = field<double>(mj, "usc_shift", mw, 0.0);
    p.method.regularize_degrees = field<bool>(mj, "regularize_degrees", mw, false);
    p.method.fuzzifier = field<double>(mj, "fuzzifier", mw, p.method.fuzzifier);
    p.method.p_thresh = field<double>(mj, "p_thresh", mw, p.method.p_thresh);
    if (mj.contains("k_c")) {
      p.k_c = field<int>(mj, "k_c", mw, 2);
      run.k_c_given = true;
    }
    if (mj.contains("k_e")) p.k_e = field<int>(mj, "k_e", mw, 1);
    if (mj.contains("row_normalize")) p.row_normalize = field<bool>(mj, "row_normalize", mw, true);
  }
  if (run.label.empty()) run.label = std::string(method_name(p.method.method));

  if (!pj.is_null()) {
    const std::string w = "pipeline.";
    check_keys(pj,
               {"k_c", "k_e", "variable", "k_min", "k_max", "max_outer", "tol", "inner_iters", "init_window", "gaussian_sigma",
                "warm_start", "row_normalize", "align", "kmeans_restarts", "seed"},
               w);
    if (pj.contains("k_c") && !run.k_c_given) {
      p.k_c = field<int>(pj, "k_c", w, 2);
      run.k_c_given = true;
    }
    if (pj.contains("k_e") && !p.k_e) p.k_e = field<int>(pj, "k_e", w, 1);
    p.variable = field<bool>(pj, "variable", w, false);
    p.k_min = field<int>(pj, "k_min", w, p.k_min);
    p.k_max = field<int>(pj, "k_max", w, p.k_max);
    p.fit.max_outer = field<int>(pj, "max_outer", w, p.fit.max_outer);
    p.fit.tol = field<double>(pj, "tol", w, p.fit.tol);
    p.fit.inner_iters = field<int>(pj, "inner_iters", w, p.fit.inner_iters);
    p.fit.init_window = field<int>(pj, "init_window", w, p.fit.init_window);
    p.gaussian_sigma = field<double>(pj, "gaussian_sigma", w, p.gaussian_sigma);
    p.warm_start = field<bool>(pj, "warm_start", w, p.warm_start);
    if (pj.contains("row_normalize") && !p.row_normalize) p.row_normalize = field<bool>(pj, "row_normalize", w, true);
    p.align = field<bool>(pj, "align", w, p.align);
    p.kmeans_restarts = field<int>(pj, "kmeans_restarts", w, p.kmeans_restarts);
    p.seed = field<std::uint64_t>(pj, "seed", w, p.seed);
  }
  validate(p);
  return run;
}

ExperimentConfig experiment_from_json(const json& j, const std::string& base_dir) {
  check_keys(j,
             {"schema", "name", "description", "sbm", "input", "truth", "prediction", "mask", "methods", "method", "pipeline",
              "modes", "metrics", "seeds", "repetitions", "seed", "output_dir"},
             "");
  const std::string schema = field<std::string>(j, "schema", "", "");
  if (schema != kExperimentSchema)
    throw InputError("config: field 'schema' must be \"" + std::string(kExperimentSchema) + "\"");
  ExperimentConfig c;
  c.name = field<std::string>(j, "name", "", "experiment");
  if (j.contains("sbm")) c.sbm = sbm_from_json(j.at("sbm"));
  if (j.contains("input")) c.input = resolve(base_dir, field<std::string>(j, "input", "", ""));
  if (j.contains("truth")) c.truth = resolve(base_dir, field<std::string>(j, "truth", "", ""));
  if (j.contains("prediction")) c.prediction = resolve(base_dir, field<std::string>(j, "prediction", "", ""));
  if (j.contains("mask")) c.mask = resolve(base_dir, field<std::string>(j, "mask", "", ""));
  if (c.sbm && c.input) throw InputError("config: give either 'sbm' or 'input', not both");

  const json pj = j.contains("pipeline") ? j.at("pipeline") : json();
  if (j.contains("methods")) {
    if (!j.at("methods").is_array()) throw InputError("config: field 'methods' must be an array");
    for (const auto& m : j.at("methods")) c.methods.push_back(method_from_json(m, pj));
  } else if (j.contains("method")) {
    c.methods.push_back(method_from_json(j.at("method"), pj));
  }
  if (j.contains("modes")) c.modes = field<std::vector<std::string>>(j, "modes", "", {});
  for (const auto& m : c.modes)
    if (m != "geodesic" && m != "static") throw InputError("config: field 'modes' holds unknown mode '" + m + "'");
  if (j.contains("metrics")) c.metrics = field<std::vector<std::string>>(j, "metrics", "", {});
  for (const auto& m : c.metrics)
    if (m != "ami" && m != "ecs") throw InputError("config: field 'metrics' holds unknown metric '" + m + "'");
  if (j.contains("seeds")) {
    c.seeds = field<std::vector<std::uint64_t>>(j, "seeds", "", {});
  } else if (j.contains("repetitions")) {
    const int reps = field<int>(j, "repetitions", "", 1);
    const auto base = field<std::uint64_t>(j, "seed", "", 0);
    if (reps < 1) throw InputError("config: field 'repetitions' must be >= 1");
    c.seeds.clear();
    for (int r = 0; r < reps; ++r) c.seeds.push_back(base + static_cast<std::uint64_t>(r));
  } else if (j.contains("seed")) {
    c.seeds = {field<std::uint64_t>(j, "seed", "", 0)};
  }
  if (c.seeds.empty()) throw InputError("config: field 'seeds' is empty");
  c.output_dir = field<std::string>(j, "output_dir", "", "");
  return c;
}

ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InputError("config '" + path + "': parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  return experiment_from_json(j, std::filesystem::path(path).parent_path().string());
}

std::vector<std::vector<int>> load_mask(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open mask file '" + path + "'");
  json j;
  try {
    in >> j;
    return j.at("masked").get<std::vector<std::vector<int>>>();
  } catch (const json::exception& e) {
    throw InputError("mask '" + path + "': expected {\"masked\": [[node, ...], ...]}: " + e.what());
  }
}

const PartitionSequence& truth_for(const SbmOutput& data, Method m) {
  if (m == Method::SCC_RECEIVE && data.truth_receive) return *data.truth_receive;
  return data.truth;
}

std::vector<double> score_trace(const PartitionSequence& truth, const PartitionSequence& pred, const std::string& metric,
                                const std::vector<std::vector<int>>* mask, double p_thresh) {
  if (truth.T() != pred.T()) throw InputError("score: truth and prediction differ in snapshot count");
  if (mask && static_cast<int>(mask->size()) != truth.T()) throw InputError("score: mask length differs from T");
  std::vector<double> out;
  for (int i = 0; i < truth.T(); ++i) {
    Partition t = truth.steps[i];
    const Partition& p = pred.steps[i];
    if (t.size() != p.size()) throw InputError("score: node counts differ at snapshot " + std::to_string(i));
    // unlabeled predictions (other side of a bipartite split) are masked too
    for (int l = 0; l < t.size(); ++l)
      if (p.labels[l] < 0) t.labels[l] = -1;
    if (mask)
      for (int l : (*mask)[i]) {
        if (l < 0 || l >= t.size()) throw InputError("score: mask node out of range");
        t.labels[l] = -1;
      }
    out.push_back(score_step(t, p, metric, p_thresh));
  }
  return out;
}

BenchResult run_bench(const ExperimentConfig& cfg, int jobs, const std::function<void(std::uint64_t)>& on_seed_done) {
  if (cfg.methods.empty()) throw InputError("bench: no methods configured");
  if (!cfg.sbm && !cfg.input) throw InputError("bench: need 'sbm' or 'input'");
  if (cfg.input && !cfg.truth) throw InputError("bench: 'input' needs a 'truth' partition file");

  std::optional<SbmOutput> fixed_data;
  if (cfg.input) {
    fixed_data = SbmOutput{load_sequence(*cfg.input), load_partitions(*cfg.truth), std::nullopt};
  }
  std::optional<std::vector<std::vector<int>>> mask;
  if (cfg.mask) mask = load_mask(*cfg.mask);

  const std::size_t n = cfg.seeds.size();
  std::vector<BenchResult> per_seed(n);
  std::vector<std::exception_ptr> failures(n);
  std::atomic<std::size_t> next{0};
  std::mutex cb_mutex;

  auto work = [&] {
    for (std::size_t s = next++; s < n; s = next++) {
      const std::uint64_t seed = cfg.seeds[s];
      try {
        SbmOutput data;
        if (fixed_data) {
          data = *fixed_data;
        } else {
          SbmConfig sc = *cfg.sbm;
          sc.seed = seed;
          data = generate(sc);
        }
        BenchResult& out = per_seed[s];
        for (const auto& run : cfg.methods) {
          const PartitionSequence& truth = truth_for(data, run.pipeline.method.method);
          PipelineConfig pc = run.pipeline;
          pc.seed = seed;
          if (!run.k_c_given) pc.k_c = std::max(1, truth.steps.front().k);
          for (const auto& mode : cfg.modes) {
            const auto t0 = std::chrono::steady_clock::now();
            PartitionSequence pred =
                mode == "static" ? detect_static(data.seq, pc) : detect(data.seq, pc).parts;
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            out.timings.push_back({seed, run.label, mode, secs});
            for (const auto& metric : cfg.metrics) {
              const auto trace = score_trace(truth, pred, metric, mask ? &*mask : nullptr, pc.method.p_thresh);
              for (std::size_t i = 0; i < trace.size(); ++i)
                out.rows.push_back({seed, run.label, mode, metric, static_cast<int>(i), trace[i]});
            }
          }
        }
      } catch (...) {
        failures[s] = std::current_exception();
      }
      if (on_seed_done) {
        std::lock_guard<std::mutex> lock(cb_mutex);
        on_seed_done(seed);
      }
    }
  };

  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  // order-independent aggregation: sort seeds, keep config order inside a seed
  std::vector<std::size_t> order(n);
  for (std::size_t s = 0; s < n; ++s) order[s] = s;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cfg.seeds[a] < cfg.seeds[b]; });
  BenchResult res;
  for (std::size_t s : order) {
    res.rows.insert(res.rows.end(), per_seed[s].rows.begin(), per_seed[s].rows.end());
    res.timings.insert(res.timings.end(), per_seed[s].timings.begin(), per_seed[s].timings.end());
  }
  return res;
}

void write_trace_csv(const std::vector<TraceRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << "seed,method,mode,metric,t_index,value\n";
  for (const auto& r : rows)
    out << r.seed << ',' << r.method << ',' << r.mode << ',' << r.metric << ',' << r.t_index << ',' << fmt(r.value)
        << '\n';
}

namespace {

using Key = std::tuple<std::string, std::string, std::string>;

// Keys in first-appearance order.
std::vector<Key> keys_of(const BenchResult& res) {
  std::vector<Key> keys;
  for (const auto& r : res.rows) {
    Key k{r.method, r.mode, r.metric};
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  }
  return keys;
}

}  // namespace

void write_summary_csv(const BenchResult& res, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << "method,mode,metric,reps,mean,std,median,q25,q75,wall_seconds_mean\n";
  for (const auto& key : keys_of(res)) {
    const auto& [method, mode, metric] = key;
    // per-seed mean over time
    std::map<std::uint64_t, std::pair<double, int>> per_seed;
    std::vector<double> all;
    for (const auto& r : res.rows) {
      if (r.method != method || r.mode != mode || r.metric != metric) continue;
      per_seed[r.seed].first += r.value;
      per_seed[r.seed].second += 1;
      all.push_back(r.value);
    }
    std::vector<double> means;
    for (const auto& [s, v] : per_seed) means.push_back(v.first / v.second);
    const Summary ms = summarize(means);
    const Summary as = summarize(all);
    double wall = 0.0;
    int count = 0;
    for (const auto& t : res.timings)
      if (t.method == method && t.mode == mode) {
        wall += t.seconds;
        ++count;
      }
    out << method << ',' << mode << ',' << metric << ',' << means.size() << ',' << fmt(ms.mean) << ','
        << fmt(ms.stddev) << ',' << fmt(as.median) << ',' << fmt(as.q25) << ',' << fmt(as.q75) << ','
        << fmt(count ? wall / count : 0.0) << '\n';
  }
}

void write_median_trace_csv(const BenchResult& res, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << "method,mode,metric,t_index,median,q25,q75\n";
  for (const auto& key : keys_of(res)) {
    const auto& [method, mode, metric] = key;
    std::map<int, std::vector<double>> by_t;
    for (const auto& r : res.rows)
      if (r.method == method && r.mode == mode && r.metric == metric) by_t[r.t_index].push_back(r.value);
    for (const auto& [t, v] : by_t) {
      const Summary s = summarize(v);
      out << method << ',' << mode << ',' << metric << ',' << t << ',' << fmt(s.median) << ',' << fmt(s.q25) << ','
          << fmt(s.q75) << '\n';
    }
  }
}

}  // namespace geodcd
