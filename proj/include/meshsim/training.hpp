#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "meshsim/checkpoint.hpp"
#include "meshsim/dataset.hpp"
#include "meshsim/forward.hpp"

namespace meshsim {

struct RunConfig {
  std::string name = "run";
  SamplingMode sampling = SamplingMode::UpOnly;
  PropagationMode propagation = PropagationMode::Adaptive;
  int R = 3;
  int K = 4;
  int budget = 20;  // total MP steps: intra steps + up passes (+ down passes)
  int epochs = 50;
  std::vector<std::uint64_t> seeds{0};
  int patience = 20;
  double learning_rate = 1e-3;
  double final_learning_rate = 1e-4;
  int latent = 128;
  int hidden = 128;
};

void validate_run_config(const RunConfig& config);
nlohmann::json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& j);
std::vector<RunConfig> run_configs_from_json(const nlohmann::json& j);

/// The ablation cells: <+A,U>, <-A,U>, <+A,U+D>, <-A,U+D>, plus the flat
/// R = 1, K = 1 baseline, all at one budget.
std::vector<RunConfig> ablation_configs(int budget, int epochs, const std::vector<std::uint64_t>& seeds);

/// Root mean square error averaged per sample first:
/// sqrt(mean_i mean_j (y_ij - yhat_ij)^2).
double rmse(const std::vector<std::vector<double>>& predictions, const std::vector<std::vector<double>>& truth);

/// Intra-level step budget left after the up (and down) passes.
int intra_budget(const RunConfig& config);

/// Per-sample network inputs and one schedule shared by the whole dataset.
/// Adaptive mode fits the element-wise max of the training samples' tuned
/// tables to the budget; uniform mode splits the budget evenly.
struct PreparedData {
  std::vector<ModelInputs> inputs;  // by sample id
  std::vector<std::vector<double>> targets;
  MPSchedule schedule;
  MPSchedule tuned_max;
};

PreparedData prepare_run(const Dataset& dataset, const RunConfig& config, int workers = 0);

struct MetricsRow {
  std::string run_id;
  RunConfig config;
  std::uint64_t seed = 0;
  int epoch = 0;
  std::string split;
  double rmse = 0.0;
  long long params = 0;
  long long flops = 0;
};

struct TrainResult {
  std::string run_id;
  std::uint64_t seed = 0;
  std::vector<MetricsRow> metrics;
  int best_epoch = 0;
  double best_val_rmse = 0.0;
  double test_rmse = 0.0;
  long long params = 0;
  long long flops = 0;  // mean forward FLOPs per sample
  long long counted_steps = 0;
  std::string checkpoint_path;
  double seconds = 0.0;
};

/// Trains one seed; writes <out_dir>/checkpoint.json (best validation epoch)
/// and <out_dir>/metrics.csv. `epochs` = 0 evaluates the initial model.
TrainResult train(const Dataset& dataset, const RunConfig& config, std::uint64_t seed, const std::string& out_dir,
                  const PreparedData* prepared = nullptr);

/// Denormalized predictions of a model for the given sample ids.
std::vector<std::vector<double>> predict(const ModelParameters& params, const Normalization& norm,
                                         const PreparedData& data, const std::vector<int>& ids, int workers = 0);

struct EvalReport {
  std::string split;
  double rmse = 0.0;
  int samples = 0;
};

EvalReport evaluate(const std::string& checkpoint_path, const Dataset& dataset, Split split);

struct AblationRow {
  std::string config;
  std::uint64_t seed = 0;
  double test_rmse = 0.0;
  double best_val_rmse = 0.0;
  int best_epoch = 0;
  long long params = 0;
  long long flops = 0;
  long long steps = 0;
  double seconds = 0.0;
};

/// Trains every config for every seed under <out_dir>/<config>/seed_<s>.
/// All configs must count the same total MP steps.
std::vector<AblationRow> ablate(const Dataset& dataset, const std::vector<RunConfig>& configs,
                                const std::string& out_dir);

/// Median test RMSE of one config over its seeds.
double median_test_rmse(const std::vector<AblationRow>& rows, const std::string& config);

}  // namespace meshsim
