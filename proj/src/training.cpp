#include "meshsim/training.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>

#include "meshsim/errors.hpp"
#include "meshsim/optimizer.hpp"
#include "meshsim/parallel.hpp"
#include "meshsim/report.hpp"

namespace meshsim {

using nlohmann::json;
namespace fs = std::filesystem;

void validate_run_config(const RunConfig& c) {
  if (c.name.empty() || !std::all_of(c.name.begin(), c.name.end(), [](unsigned char ch) {
        return std::isalnum(ch) || ch == '_' || ch == '-' || ch == '.';
      }))
    throw InvalidArgument("run config name '" + c.name + "' must be non-empty [A-Za-z0-9_.-]");
  if (c.R < 1 || c.K < 1) throw InvalidArgument("run config '" + c.name + "': R and K must be at least 1");
  if (c.epochs < 0 || c.patience < 1) throw InvalidArgument("run config '" + c.name + "': bad epochs or patience");
  if (c.seeds.empty()) throw InvalidArgument("run config '" + c.name + "': no seeds");
  if (!(c.learning_rate > 0.0) || !(c.final_learning_rate > 0.0))
    throw InvalidArgument("run config '" + c.name + "': learning rates must be positive");
  if (intra_budget(c) < c.R * c.K)
    throw InvalidArgument("run config '" + c.name + "': budget " + std::to_string(c.budget) +
                          " leaves fewer intra-level steps than the " + std::to_string(c.R * c.K) +
                          " (level, group) pairs");
}

int intra_budget(const RunConfig& c) {
  const int passes = c.R - 1;
  return c.budget - passes - (c.sampling == SamplingMode::UpDown ? passes : 0);
}

json to_json(const RunConfig& c) {
  return {{"name", c.name},
          {"sampling_mode", to_string(c.sampling)},
          {"propagation_mode", to_string(c.propagation)},
          {"R", c.R},
          {"K", c.K},
          {"budget", c.budget},
          {"epochs", c.epochs},
          {"seeds", c.seeds},
          {"patience", c.patience},
          {"learning_rate", c.learning_rate},
          {"final_learning_rate", c.final_learning_rate},
          {"latent", c.latent},
          {"hidden", c.hidden}};
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  try {
    c.name = j.value("name", c.name);
    if (j.contains("sampling_mode")) c.sampling = sampling_mode_from_string(j.at("sampling_mode").get<std::string>());
    if (j.contains("propagation_mode"))
      c.propagation = propagation_mode_from_string(j.at("propagation_mode").get<std::string>());
    c.R = j.value("R", c.R);
    c.K = j.value("K", c.K);
    c.budget = j.value("budget", c.budget);
    c.epochs = j.value("epochs", c.epochs);
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    c.patience = j.value("patience", c.patience);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.final_learning_rate = j.value("final_learning_rate", c.final_learning_rate);
    c.latent = j.value("latent", c.latent);
    c.hidden = j.value("hidden", c.hidden);
  } catch (const json::exception& e) {
    throw ParseError(std::string("run config: ") + e.what(), 0, "");
  }
  validate_run_config(c);
  return c;
}

std::vector<RunConfig> run_configs_from_json(const json& j) {
  const json* list = &j;
  json defaults = json::object();
  if (j.is_object()) {
    if (!j.contains("configs")) return {run_config_from_json(j)};
    list = &j.at("configs");
    defaults = j.value("defaults", json::object());
  }
  if (!list->is_array()) throw ParseError("run configs: expected an array of configs", 0, "configs");
  std::vector<RunConfig> out;
  for (const auto& item : *list) {
    json merged = defaults;
    merged.update(item);
    out.push_back(run_config_from_json(merged));
  }
  return out;
}

std::vector<RunConfig> ablation_configs(int budget, int epochs, const std::vector<std::uint64_t>& seeds) {
  std::vector<RunConfig> out;
  auto add = [&](const std::string& name, SamplingMode s, PropagationMode p, int R, int K) {
    RunConfig c;
    c.name = name;
    c.sampling = s;
    c.propagation = p;
    c.R = R;
    c.K = K;
    c.budget = budget;
    c.epochs = epochs;
    c.seeds = seeds;
    out.push_back(c);
  };
  add("plusA_U", SamplingMode::UpOnly, PropagationMode::Adaptive, 3, 4);
  add("minusA_U", SamplingMode::UpOnly, PropagationMode::Uniform, 3, 4);
  add("plusA_UD", SamplingMode::UpDown, PropagationMode::Adaptive, 3, 4);
  add("minusA_UD", SamplingMode::UpDown, PropagationMode::Uniform, 3, 4);
  add("flat", SamplingMode::UpOnly, PropagationMode::Uniform, 1, 1);
  return out;
}

double rmse(const std::vector<std::vector<double>>& pred, const std::vector<std::vector<double>>& truth) {
  if (pred.size() != truth.size()) throw InvalidArgument("rmse: sample counts differ");
  if (pred.empty()) throw InvalidArgument("rmse: no samples");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].size() != truth[i].size() || pred[i].empty())
      throw InvalidArgument("rmse: node counts differ in sample " + std::to_string(i));
    double s = 0.0;
    for (std::size_t j = 0; j < pred[i].size(); ++j) s += (truth[i][j] - pred[i][j]) * (truth[i][j] - pred[i][j]);
    sum += s / static_cast<double>(pred[i].size());
  }
  return std::sqrt(sum / static_cast<double>(pred.size()));
}

PreparedData prepare_run(const Dataset& d, const RunConfig& c, int workers) {
  validate_run_config(c);
  PreparedData out;
  const int n = static_cast<int>(d.samples.size());
  out.inputs.resize(n);
  out.targets.resize(n);
  std::vector<MPSchedule> tuned(n);
  parallel_for(
      n,
      [&](int id) {
        const auto& s = d.samples[id];
        const auto view = sample_view(s, d.spec, c.R, c.K);
        out.inputs[id] = prepare_inputs(view.mesh, view.partitions, d.norm.force);
        out.targets[id] = s.target();
        tuned[id] = view.tuned;
      },
      workers);
  std::vector<MPSchedule> train_tuned;
  for (int id : d.train) train_tuned.push_back(tuned[id]);
  if (train_tuned.empty()) train_tuned = tuned;
  out.tuned_max = elementwise_max(train_tuned);
  out.schedule = c.propagation == PropagationMode::Adaptive ? fit_schedule(out.tuned_max, intra_budget(c))
                                                            : uniform_schedule(c.R, c.K, intra_budget(c));
  return out;
}

std::vector<std::vector<double>> predict(const ModelParameters& params, const Normalization& norm,
                                         const PreparedData& data, const std::vector<int>& ids, int workers) {
  std::vector<std::vector<double>> out(ids.size());
  parallel_for(
      static_cast<int>(ids.size()),
      [&](int i) {
        const auto res = forward(params, data.inputs[ids[i]], data.schedule, 1);
        const auto& y = res.output->value;
        out[i].resize(static_cast<std::size_t>(y.rows()));
        for (Eigen::Index j = 0; j < y.rows(); ++j) out[i][j] = y(j, 0) * norm.target_stddev + norm.target_mean;
      },
      workers);
  return out;
}

namespace {

std::vector<std::vector<double>> gather(const std::vector<std::vector<double>>& all, const std::vector<int>& ids) {
  std::vector<std::vector<double>> out;
  for (int id : ids) out.push_back(all[id]);
  return out;
}

json schedule_json(const MPSchedule& s) { return {{"R", s.R}, {"K", s.K}, {"cap", s.cap}, {"steps", s.steps}}; }

MPSchedule schedule_from(const json& j) {
  MPSchedule s;
  s.R = j.at("R").get<int>();
  s.K = j.at("K").get<int>();
  s.cap = j.at("cap").get<int>();
  s.steps = j.at("steps").get<std::vector<int>>();
  return s;
}

}  // namespace

TrainResult train(const Dataset& d, const RunConfig& c, std::uint64_t seed, const std::string& out_dir,
                  const PreparedData* prepared) {
  validate_run_config(c);
  const auto t0 = std::chrono::steady_clock::now();
  PreparedData local;
  if (!prepared) {
    local = prepare_run(d, c);
    prepared = &local;
  }
  const auto& data = *prepared;
  if (d.train.empty() || d.val.empty() || d.test.empty())
    throw TrainingError("train: every split needs at least one sample");

  ModelConfig mc;
  mc.R = c.R;
  mc.K = c.K;
  mc.latent = c.latent;
  mc.hidden = c.hidden;
  mc.sampling = c.sampling;
  mc.seed = seed;
  auto params = init_parameters(mc);
  Adam opt(params.parameters(), {c.learning_rate});

  TrainResult res;
  res.run_id = c.name + "_s" + std::to_string(seed);
  res.seed = seed;
  res.params = count_parameters(params);
  res.counted_steps = counted_steps(data.schedule, c.sampling);
  if (res.counted_steps != c.budget)
    throw TrainingError("train: schedule counts " + std::to_string(res.counted_steps) + " steps, budget is " +
                        std::to_string(c.budget));
  long double flops = 0;
  for (const auto& in : data.inputs) flops += estimate_flops(in, data.schedule, params);
  res.flops = static_cast<long long>(std::llround(flops / static_cast<long double>(data.inputs.size())));

  fs::create_directories(out_dir);
  res.checkpoint_path = (fs::path(out_dir) / "checkpoint.json").string();
  auto row = [&](int epoch, const std::string& split, double value) {
    res.metrics.push_back({res.run_id, c, seed, epoch, split, value, res.params, res.flops});
  };
  auto save = [&](int epoch) {
    json extra = {{"config", to_json(c)},
                  {"seed", seed},
                  {"epoch", epoch},
                  {"schedule", schedule_json(data.schedule)},
                  {"counted_steps", res.counted_steps}};
    save_checkpoint(res.checkpoint_path, params, d.norm, extra);
  };

  std::vector<ad::Mat> targets(data.targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    targets[i].resize(static_cast<Eigen::Index>(data.targets[i].size()), 1);
    for (std::size_t j = 0; j < data.targets[i].size(); ++j)
      targets[i](static_cast<Eigen::Index>(j), 0) = (data.targets[i][j] - d.norm.target_mean) / d.norm.target_stddev;
  }

  const auto val_truth = gather(data.targets, d.val);
  res.best_val_rmse = rmse(predict(params, d.norm, data, d.val), val_truth);
  res.best_epoch = 0;
  row(0, "val", res.best_val_rmse);
  save(0);

  const long long total_updates = static_cast<long long>(c.epochs) * static_cast<long long>(d.train.size());
  const int group_workers = worker_count();
  int since_best = 0;
  const double scale2 = d.norm.target_stddev * d.norm.target_stddev;
  for (int epoch = 1; epoch <= c.epochs; ++epoch) {
    std::vector<int> order = d.train;
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(epoch)));
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
      std::swap(order[i], order[static_cast<int>(unit_uniform(rng) * (i + 1))]);

    double train_sq = 0.0;
    for (int id : order) {
      const auto fw = forward(params, data.inputs[id], data.schedule, group_workers);
      if (fw.steps.total() != c.budget)
        throw TrainingError("train: forward executed " + std::to_string(fw.steps.total()) + " MP steps, budget is " +
                            std::to_string(c.budget));
      const auto loss = ad::mse(fw.output, targets[id]);
      const double l = loss->value(0, 0);
      if (!std::isfinite(l))
        throw TrainingError("train: non-finite loss at epoch " + std::to_string(epoch) + ", sample " +
                            std::to_string(id) + "; best checkpoint (epoch " + std::to_string(res.best_epoch) +
                            ") kept at " + res.checkpoint_path);
      train_sq += l * scale2;
      ad::backward(loss);
      opt.step(decayed_learning_rate(c.learning_rate, c.final_learning_rate, opt.steps_taken(), total_updates));
    }
    row(epoch, "train", std::sqrt(train_sq / static_cast<double>(order.size())));
    const double val = rmse(predict(params, d.norm, data, d.val), val_truth);
    row(epoch, "val", val);
    if (val < res.best_val_rmse) {
      res.best_val_rmse = val;
      res.best_epoch = epoch;
      since_best = 0;
      save(epoch);
    } else if (++since_best >= c.patience) {
      break;
    }
  }

  const auto best = load_checkpoint(res.checkpoint_path);
  res.test_rmse = rmse(predict(best.params, d.norm, data, d.test), gather(data.targets, d.test));
  row(res.best_epoch, "test", res.test_rmse);
  write_text_file(fs::path(out_dir) / "metrics.csv", metrics_csv(res.metrics));
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const json summary = {{"run_id", res.run_id},         {"seed", seed},
                        {"best_epoch", res.best_epoch}, {"best_val_rmse", res.best_val_rmse},
                        {"test_rmse", res.test_rmse},   {"params", res.params},
                        {"flops", res.flops},           {"counted_steps", res.counted_steps},
                        {"seconds", res.seconds},       {"config", to_json(c)}};
  write_text_file(fs::path(out_dir) / "summary.json", summary.dump(2) + "\n");
  return res;
}

EvalReport evaluate(const std::string& checkpoint_path, const Dataset& d, Split split) {
  const auto ck = load_checkpoint(checkpoint_path);
  if (!ck.extra.contains("config") || !ck.extra.contains("schedule"))
    throw ParseError("checkpoint " + checkpoint_path + ": no run record", 0, "run");
  const auto cfg = run_config_from_json(ck.extra.at("config"));
  const auto& ids = d.indices(split);
  if (ids.empty()) throw InvalidArgument("evaluate: split '" + to_string(split) + "' is empty");
  PreparedData data;
  data.schedule = schedule_from(ck.extra.at("schedule"));
  data.inputs.resize(d.samples.size());
  data.targets.resize(d.samples.size());
  parallel_for(static_cast<int>(ids.size()), [&](int i) {
    const auto& s = d.samples[ids[i]];
    const auto view = sample_view(s, d.spec, cfg.R, cfg.K);
    data.inputs[s.id] = prepare_inputs(view.mesh, view.partitions, ck.norm.force);
    data.targets[s.id] = s.target();
  });
  EvalReport rep;
  rep.split = to_string(split);
  rep.samples = static_cast<int>(ids.size());
  rep.rmse = rmse(predict(ck.params, ck.norm, data, ids), gather(data.targets, ids));
  return rep;
}

std::vector<AblationRow> ablate(const Dataset& d, const std::vector<RunConfig>& configs, const std::string& out_dir) {
  if (configs.empty()) throw InvalidArgument("ablate: no configs");
  for (const auto& c : configs) {
    validate_run_config(c);
    if (c.budget != configs.front().budget)
      throw InvalidArgument("ablate: config '" + c.name + "' has budget " + std::to_string(c.budget) +
                            ", expected the common budget " + std::to_string(configs.front().budget));
  }
  std::vector<AblationRow> rows;
  for (const auto& c : configs) {
    const auto data = prepare_run(d, c);
    for (auto seed : c.seeds) {
      const auto dir = (fs::path(out_dir) / c.name / ("seed_" + std::to_string(seed))).string();
      const auto r = train(d, c, seed, dir, &data);
      rows.push_back({c.name, seed, r.test_rmse, r.best_val_rmse, r.best_epoch, r.params, r.flops, r.counted_steps,
                      r.seconds});
    }
  }
  return rows;
}

double median_test_rmse(const std::vector<AblationRow>& rows, const std::string& config) {
  std::vector<double> v;
  for (const auto& r : rows)
    if (r.config == config) v.push_back(r.test_rmse);
  if (v.empty()) throw InvalidArgument("median: no rows for config '" + config + "'");
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace meshsim
