#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <json.hpp>

#include "meshsim/dataset.hpp"
#include "meshsim/errors.hpp"
#include "meshsim/mesh_io.hpp"
#include "meshsim/partition.hpp"
#include "meshsim/report.hpp"
#include "meshsim/training.hpp"

using namespace meshsim;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json read_json(const std::string& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what(), 0, "");
  }
}

void emit_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << std::endl;
}

std::string dataset_for_run(const std::string& checkpoint) {
  const auto run = fs::path(checkpoint).parent_path() / "run.json";
  if (fs::exists(run)) return read_json(run.string()).at("dataset").get<std::string>();
  throw InvalidArgument("eval: no --dataset given and no run.json next to " + checkpoint);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical mesh-graph simulator with a plane-stress FEM oracle"};
  app.require_subcommand(1);

  std::string spec_path, out_dir, variant;
  bool full_scale = false;
  auto* gen = app.add_subcommand("gen-dataset", "Mesh, partition, tune and solve every sample of a dataset spec");
  gen->add_option("--spec", spec_path, "dataset spec (JSON); omitted fields keep their defaults");
  gen->add_option("--out", out_dir, "output directory")->required();
  gen->add_option("--variant", variant, "generalization variant applied to the spec");
  gen->add_flag("--full-scale", full_scale, "start from the 555-sample grid instead of the desk default");

  std::string mesh_path;
  int K = 4;
  std::uint64_t seed = 0;
  bool raw = false;
  auto* part = app.add_subcommand("partition", "Direction groups of a mesh file's directed edges");
  part->add_option("--mesh", mesh_path, "mesh file")->required();
  part->add_option("--K", K, "number of groups");
  part->add_option("--seed", seed, "clustering seed");
  part->add_flag("--raw", raw, "skip relabeling groups to canonical directions");

  std::string dataset_dir;
  int sample = -1;
  auto* tune = app.add_subcommand("tune-steps", "MP step table of one sample, or the dataset-wide maximum");
  tune->add_option("--dataset", dataset_dir, "dataset directory")->required();
  tune->add_option("--sample", sample, "sample id (default: max over the training split)");

  std::string config_path;
  auto* tr = app.add_subcommand("train", "Train one run config for each of its seeds");
  tr->add_option("--config", config_path, "run config (JSON)")->required();
  tr->add_option("--dataset", dataset_dir, "dataset directory")->required();
  tr->add_option("--out", out_dir, "output directory; one seed_<s> folder per seed")->required();

  std::string checkpoint, split = "test";
  auto* ev = app.add_subcommand("eval", "RMSE of a checkpoint on one split");
  ev->add_option("--checkpoint", checkpoint, "checkpoint manifest")->required();
  ev->add_option("--split", split, "train, val or test");
  ev->add_option("--dataset", dataset_dir, "dataset directory (default: the one the run trained on)");

  auto* ab = app.add_subcommand("ablate", "Train several configs at one shared MP-step budget");
  ab->add_option("--configs", config_path, "configs file: {\"dataset\", \"out\", \"defaults\", \"configs\": [...]}")
      ->required();
  ab->add_option("--dataset", dataset_dir, "dataset directory (overrides the file)");
  ab->add_option("--out", out_dir, "output directory (overrides the file)");

  std::string runs_dir, csv_path;
  auto* rep = app.add_subcommand("report", "Collect run metrics into CSV");
  rep->add_option("--runs", runs_dir, "directory searched for metrics.csv files")->required();
  rep->add_option("--csv", csv_path, "output CSV; test rows also go to <stem>_final.csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("usage", e.what());
    return 2;
  }

  try {
    if (*gen) {
      DatasetSpec spec = full_scale ? full_scale_spec() : DatasetSpec{};
      if (!spec_path.empty()) {
        json j = to_json(spec);
        j.update(read_json(spec_path));
        spec = dataset_spec_from_json(j);
      }
      if (!variant.empty()) spec = dataset_variant(spec, variant);
      const auto d = gen_dataset(spec);
      save_dataset(d, out_dir);
      std::cout << json{{"samples", d.samples.size()},
                        {"train", d.train.size()},
                        {"val", d.val.size()},
                        {"test", d.test.size()},
                        {"out", out_dir}}
                       .dump()
                << std::endl;
    } else if (*part) {
      const auto mf = read_mesh(mesh_path);
      auto p = divide_mesh_graph(mf.graph, K, seed);
      if (!raw) p = canonicalize_partition(std::move(p));
      json centroids = json::array();
      for (const auto& c : p.centroids) centroids.push_back({c.x, c.y});
      std::cout << json{{"K", p.K},
                        {"iterations", p.iterations_used},
                        {"centroids", centroids},
                        {"group_sizes", p.group_sizes()},
                        {"assignment", p.assignment}}
                       .dump()
                << std::endl;
    } else if (*tune) {
      const auto d = load_dataset(dataset_dir);
      MPSchedule s;
      if (sample >= 0) {
        if (sample >= static_cast<int>(d.samples.size())) throw InvalidArgument("tune-steps: no sample " + std::to_string(sample));
        s = tune_mp_steps(d.samples[sample].mesh, d.samples[sample].partitions, d.spec.step_cap);
      } else {
        std::vector<MPSchedule> all;
        for (int id : d.train) all.push_back(d.samples[id].tuned);
        s = elementwise_max(all);
      }
      json table = json::array();
      for (int r = 1; r <= s.R; ++r) {
        json row = json::array();
        for (int k = 0; k < s.K; ++k) row.push_back(s.at(r, k));
        table.push_back(row);
      }
      std::cout << json{{"R", s.R}, {"K", s.K}, {"cap", s.cap}, {"L", table}}.dump() << std::endl;
    } else if (*tr) {
      const auto d = load_dataset(dataset_dir);
      const auto configs = run_configs_from_json(read_json(config_path));
      if (configs.size() != 1) throw InvalidArgument("train: expected exactly one config (use ablate for several)");
      const auto& c = configs.front();
      const auto data = prepare_run(d, c);
      json results = json::array();
      for (auto s : c.seeds) {
        const auto dir = (fs::path(out_dir) / ("seed_" + std::to_string(s))).string();
        const auto r = train(d, c, s, dir, &data);
        write_text_file(fs::path(dir) / "run.json",
                        json{{"dataset", fs::absolute(dataset_dir).string()}, {"config", to_json(c)}}.dump(2) + "\n");
        results.push_back({{"run_id", r.run_id},
                           {"checkpoint", r.checkpoint_path},
                           {"best_epoch", r.best_epoch},
                           {"val_rmse", r.best_val_rmse},
                           {"test_rmse", r.test_rmse},
                           {"params", r.params},
                           {"flops", r.flops}});
      }
      std::cout << json{{"runs", results}}.dump() << std::endl;
    } else if (*ev) {
      const auto d = load_dataset(dataset_dir.empty() ? dataset_for_run(checkpoint) : dataset_dir);
      const auto r = evaluate(checkpoint, d, split_from_string(split));
      std::cout << json{{"split", r.split}, {"samples", r.samples}, {"rmse", r.rmse}}.dump() << std::endl;
    } else if (*ab) {
      const auto file = read_json(config_path);
      if (dataset_dir.empty()) dataset_dir = file.value("dataset", "");
      if (out_dir.empty()) out_dir = file.value("out", "");
      if (dataset_dir.empty() || out_dir.empty())
        throw InvalidArgument("ablate: dataset and out must be given in the file or on the command line");
      const auto d = load_dataset(dataset_dir);
      const auto rows = ablate(d, run_configs_from_json(file), out_dir);
      write_text_file(fs::path(out_dir) / "ablation.csv", ablation_csv(rows));
      json medians = json::object();
      for (const auto& r : rows)
        if (!medians.contains(r.config)) medians[r.config] = median_test_rmse(rows, r.config);
      std::cout << json{{"median_test_rmse", medians}, {"table", (fs::path(out_dir) / "ablation.csv").string()}}.dump()
                << std::endl;
    } else if (*rep) {
      const int n = report(runs_dir, csv_path);
      std::cout << json{{"rows", n}, {"csv", csv_path}}.dump() << std::endl;
    }
  } catch (const Error& e) {
    emit_error(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return 1;
  }
  return 0;
}
