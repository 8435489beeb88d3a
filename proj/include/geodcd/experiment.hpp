#pragma once

// Experiment documents (schema "geodcd-experiment/1") and the seeded benchmark
// runner shared by the CLI and the acceptance harness.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "geodcd/metrics.hpp"
#include "geodcd/pipeline.hpp"
#include "geodcd/sbm.hpp"

namespace geodcd {

inline constexpr const char* kExperimentSchema = "geodcd-experiment/1";

struct MethodRun {
  std::string label;  // column name in outputs, defaults to the method name
  PipelineConfig pipeline;
  bool k_c_given = false;
};

struct ExperimentConfig {
  std::string name;
  std::optional<SbmConfig> sbm;
  std::optional<std::string> input;  // sequence file instead of a generator
  std::optional<std::string> truth;  // partition file for scoring
  std::optional<std::string> prediction;  // partition file for `score`
  std::optional<std::string> mask;   // per-snapshot node indices excluded from scoring
  std::vector<MethodRun> methods;
  std::vector<std::string> modes{"geodesic"};  // geodesic | static
  std::vector<std::string> metrics{"ami"};
  std::vector<std::uint64_t> seeds{0};
  std::string output_dir;
};

SbmConfig sbm_from_json(const nlohmann::json& j);
MethodRun method_from_json(const nlohmann::json& method, const nlohmann::json& pipeline);

// Relative paths in the document resolve against base_dir.
ExperimentConfig experiment_from_json(const nlohmann::json& j, const std::string& base_dir = "");
ExperimentConfig load_experiment(const std::string& path);

// Per-snapshot node masks: mask[i] lists nodes excluded at snapshot i.
std::vector<std::vector<int>> load_mask(const std::string& path);

struct TraceRow {
  std::uint64_t seed = 0;
  std::string method;
  std::string mode;
  std::string metric;
  int t_index = 0;
  double value = 0.0;
};

struct RunTiming {
  std::uint64_t seed = 0;
  std::string method;
  std::string mode;
  double seconds = 0.0;
};

struct BenchResult {
  std::vector<TraceRow> rows;  // sorted by seed, then config order
  std::vector<RunTiming> timings;
  std::vector<std::string> errors;
};

// The truth to score a method against: receive side for SCC-receive.
const PartitionSequence& truth_for(const SbmOutput& data, Method m);

// Scores pred against truth step by step, honoring an optional mask.
std::vector<double> score_trace(const PartitionSequence& truth, const PartitionSequence& pred,
                                const std::string& metric, const std::vector<std::vector<int>>* mask = nullptr,
                                double p_thresh = 0.2);

BenchResult run_bench(const ExperimentConfig& cfg, int jobs,
                      const std::function<void(std::uint64_t)>& on_seed_done = {});

void write_trace_csv(const std::vector<TraceRow>& rows, const std::string& path);
void write_summary_csv(const BenchResult& res, const std::string& path);
void write_median_trace_csv(const BenchResult& res, const std::string& path);

}  // namespace geodcd
