// geodcd: generate | detect | score | geocheck | bench
//
// Exit codes: 0 success, 1 method error, 2 input error.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "geodcd/error.hpp"
#include "geodcd/experiment.hpp"
#include "geodcd/kernels.hpp"

namespace fs = std::filesystem;
using namespace geodcd;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

std::string out_dir(const Common& c, const ExperimentConfig* cfg) {
  std::string dir = c.out;
  if (dir.empty() && cfg && !cfg->output_dir.empty()) dir = cfg->output_dir;
  if (dir.empty())
    if (const char* env = std::getenv("GEODCD_OUT_DIR")) dir = env;
  if (dir.empty()) dir = "out";
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory '" + dir + "': " + ec.message());
  return dir;
}

std::string path_in(const std::string& dir, const std::string& file) { return (fs::path(dir) / file).string(); }

ExperimentConfig load(const Common& c) {
  if (c.config.empty()) throw InputError("missing --config");
  ExperimentConfig cfg = load_experiment(c.config);
  if (c.seed) cfg.seeds = {*c.seed};
  return cfg;
}

// The sequence (and truth if generated) named by a config.
SbmOutput data_of(const ExperimentConfig& cfg) {
  if (cfg.input) {
    SbmOutput d;
    d.seq = load_sequence(*cfg.input);
    if (cfg.truth) d.truth = load_partitions(*cfg.truth);
    return d;
  }
  if (!cfg.sbm) throw InputError("config needs 'sbm' or 'input'");
  SbmConfig sc = *cfg.sbm;
  sc.seed = cfg.seeds.front();
  return generate(sc);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out.precision(12);
  return out;
}

int cmd_generate(const Common& c) {
  const ExperimentConfig cfg = load(c);
  if (!cfg.sbm) throw InputError("generate: config has no 'sbm' section");
  const std::string dir = out_dir(c, &cfg);
  const SbmOutput data = data_of(cfg);
  dump_sequence(data.seq, path_in(dir, "sequence.json"));
  dump_partitions(data.truth, path_in(dir, "truth.json"));
  if (data.truth_receive) dump_partitions(*data.truth_receive, path_in(dir, "truth_receive.json"));
  std::cout << "wrote " << path_in(dir, "sequence.json") << " (T=" << data.seq.T() << ", d=" << data.seq.d() << ")\n";
  return 0;
}

int cmd_detect(const Common& c) {
  const ExperimentConfig cfg = load(c);
  if (cfg.methods.empty()) throw InputError("detect: config has no method");
  const std::string dir = out_dir(c, &cfg);
  const SbmOutput data = data_of(cfg);
  const MethodRun& run = cfg.methods.front();
  PipelineConfig pc = run.pipeline;
  pc.seed = cfg.seeds.front();
  if (!run.k_c_given && !data.truth.steps.empty()) pc.k_c = std::max(1, truth_for(data, pc.method.method).steps.front().k);

  const bool static_only = cfg.modes.size() == 1 && cfg.modes.front() == "static";
  DetectResult res;
  if (static_only) {
    res.parts = detect_static(data.seq, pc);
  } else {
    res = detect(data.seq, pc);
  }
  dump_partitions(res.parts, path_in(dir, "partitions.json"));
  {
    auto out = open_out(path_in(dir, "fit_report.csv"));
    out << "iteration,objective\n";
    for (std::size_t i = 0; i < res.report.objective_trace.size(); ++i)
      out << i << ',' << res.report.objective_trace[i] << '\n';
  }
  {
    auto out = open_out(path_in(dir, "k_trace.csv"));
    out << "t_index,k\n";
    for (int i = 0; i < res.parts.T(); ++i) out << i << ',' << res.parts.steps[i].k << '\n';
  }
  if (res.benefit) {
    auto out = open_out(path_in(dir, "benefit.csv"));
    out << "k,t_index,modularity,filtered\n";
    const auto& b = *res.benefit;
    for (Eigen::Index r = 0; r < b.H.rows(); ++r)
      for (Eigen::Index i = 0; i < b.H.cols(); ++i)
        out << b.k_min + r << ',' << i << ',' << b.H(r, i) << ',' << b.filtered(r, i) << '\n';
  }
  std::cout << "wrote " << path_in(dir, "partitions.json") << " (" << res.report.iterations << " fit iterations)\n";
  return 0;
}

int cmd_score(const Common& c, std::string truth, std::string pred, std::string metric) {
  std::optional<ExperimentConfig> cfg;
  if (!c.config.empty()) cfg = load(c);
  if (truth.empty() && cfg && cfg->truth) truth = *cfg->truth;
  if (pred.empty() && cfg && cfg->prediction) pred = *cfg->prediction;
  if (truth.empty() || pred.empty()) throw InputError("score: need truth and prediction files");
  std::vector<std::string> metrics{metric};
  if (metric.empty()) metrics = cfg ? cfg->metrics : std::vector<std::string>{"ami"};
  std::optional<std::vector<std::vector<int>>> mask;
  if (cfg && cfg->mask) mask = load_mask(*cfg->mask);

  const PartitionSequence t = load_partitions(truth);
  const PartitionSequence p = load_partitions(pred);
  std::ostringstream csv;
  csv.precision(12);
  csv << "t_index,metric,value\n";
  std::ostringstream summary;
  summary.precision(12);
  for (const auto& m : metrics) {
    const auto trace = score_trace(t, p, m, mask ? &*mask : nullptr);
    for (std::size_t i = 0; i < trace.size(); ++i) csv << i << ',' << m << ',' << trace[i] << '\n';
    const Summary s = summarize(trace);
    summary << "median," << m << ',' << s.median << '\n'
            << "q25," << m << ',' << s.q25 << '\n'
            << "q75," << m << ',' << s.q75 << '\n';
  }
  csv << summary.str();
  if (!c.out.empty() || (cfg && !cfg->output_dir.empty()) || std::getenv("GEODCD_OUT_DIR")) {
    const std::string dir = out_dir(c, cfg ? &*cfg : nullptr);
    open_out(path_in(dir, "scores.csv")) << csv.str();
  }
  std::cout << csv.str();
  return 0;
}

int cmd_geocheck(const Common& c) {
  const ExperimentConfig cfg = load(c);
  const std::string dir = out_dir(c, &cfg);
  const SbmOutput data = data_of(cfg);
  MethodSpec spec;
  spec.method = Method::SMM;
  if (!cfg.methods.empty()) spec = cfg.methods.front().pipeline.method;
  const StructureCheck chk = geodesic_structure_check(build_mcms(data.seq, spec));
  {
    auto out = open_out(path_in(dir, "geocheck_sigma.csv"));
    out << "index,sigma\n";
    for (Eigen::Index i = 0; i < chk.sigma.size(); ++i) out << i + 1 << ',' << chk.sigma[i] << '\n';
  }
  {
    auto out = open_out(path_in(dir, "geocheck_proj.csv"));
    out << "t_index,sign,x,y\n";
    const int T = static_cast<int>(chk.proj.rows() / 2);
    for (int r = 0; r < 2 * T; ++r)
      out << r % T << ',' << (r < T ? "+" : "-") << ',' << chk.proj(r, 0) << ',' << chk.proj(r, 1) << '\n';
  }
  const double ratio = chk.sigma.size() > 2 ? chk.sigma[2] / chk.sigma[0] : 0.0;
  std::cout << "sigma3/sigma1 = " << ratio << '\n';
  return 0;
}

int cmd_bench(const Common& c) {
  const ExperimentConfig cfg = load(c);
  const std::string dir = out_dir(c, &cfg);
  const BenchResult res = run_bench(cfg, c.jobs);
  write_trace_csv(res.rows, path_in(dir, "bench_runs.csv"));
  write_summary_csv(res, path_in(dir, "bench_summary.csv"));
  write_median_trace_csv(res, path_in(dir, "bench_trace.csv"));
  std::ifstream in(path_in(dir, "bench_summary.csv"));
  std::cout << in.rdbuf();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic community detection with Grassmann geodesics"};
  app.require_subcommand(1);
  Common common;
  std::string truth, pred, metric;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", common.config, "experiment config (JSON)");
    if (config_required) opt->required();
    sub->add_option("--out", common.out, "output directory (default: config output_dir, $GEODCD_OUT_DIR, ./out)");
    sub->add_option("--seed", common.seed, "override the seed list with one seed");
    sub->add_option("--jobs", common.jobs, "worker threads for bench")->check(CLI::PositiveNumber);
  };

  auto* gen = app.add_subcommand("generate", "sample a dynamic SBM and its ground truth");
  add_common(gen, true);
  auto* det = app.add_subcommand("detect", "run the pipeline on a sequence");
  add_common(det, true);
  auto* sco = app.add_subcommand("score", "score predicted partitions against truth");
  add_common(sco, false);
  sco->add_option("--truth", truth, "ground-truth partition file");
  sco->add_option("--pred", pred, "predicted partition file");
  sco->add_option("--metric", metric, "ami or ecs")->check(CLI::IsMember({"ami", "ecs"}));
  auto* geo = app.add_subcommand("geocheck", "first-eigenvector geodesic diagnostic");
  add_common(geo, true);
  auto* ben = app.add_subcommand("bench", "seeded repetitions, geodesic vs static");
  add_common(ben, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*gen) return cmd_generate(common);
    if (*det) return cmd_detect(common);
    if (*sco) return cmd_score(common, truth, pred, metric);
    if (*geo) return cmd_geocheck(common);
    if (*ben) return cmd_bench(common);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const MethodError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
