#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "plma/suite.hpp"

namespace {

using nlohmann::json;

// Registers --flag writing into params[key] only when given on the command line.
template <class T>
void param(CLI::App* app, const std::string& flag, json& params, const std::string& key,
           const std::string& help) {
  app->add_option_function<T>(flag, [&params, key](const T& v) { params[key] = v; }, help);
}

void finetune_flags(CLI::App* app, json& params) {
  param<int>(app, "--epochs", params, "epochs", "finetuning epochs T");
  param<int>(app, "--starts", params, "starts", "start points K");
  param<int>(app, "--chains", params, "chains", "chains per start M");
  param<int>(app, "--chain-length", params, "chain_length", "MH steps per chain (default n/3)");
  param<int>(app, "--long-run", params, "long_run_length", "initial MH steps (default 10n)");
  param<int>(app, "--ls-iterations", params, "ls_iterations", "local search rounds (default n)");
  param<int>(app, "--ls-candidates", params, "ls_candidates", "swaps per round (default n)");
  param<double>(app, "--lr", params, "learning_rate", "Adam learning rate");
  param<double>(app, "--time-limit", params, "time_limit", "seconds per solve (0: none)");
}

void network_flags(CLI::App* app, json& params, json& dims) {
  param<std::string>(app, "--model", params, "model", "network | direct");
  param<std::string>(app, "--checkpoint", params, "checkpoint", "network checkpoint to start from");
  param<int>(app, "--d", dims, "d", "hidden width");
  param<int>(app, "--gcn-layers", dims, "gcn_layers", "GCN layers");
  param<int>(app, "--attention-blocks", dims, "attention_blocks", "cross-attention blocks");
  param<int>(app, "--heads", dims, "heads", "attention heads");
  param<double>(app, "--clip", dims, "clip", "tanh scale of the head");
}

struct Common {
  std::vector<std::string> instances;
  std::vector<std::uint64_t> seeds;
  std::string output;
  std::string artifacts;
  std::string config_file;
  bool force = false;
  int workers = 0;
};

void common_flags(CLI::App* app, Common& c, bool with_instances) {
  if (with_instances) {
    app->add_option("-i,--instance", c.instances,
                    "sources: qaplib:<name>, file:<path>, uniform:<n>:<seed>, geometric:<n>:<seed>");
  }
  app->add_option("-s,--seed", c.seeds, "seeds (repeatable)");
  app->add_option("-o,--output", c.output, "JSONL run log to append to");
  app->add_option("-c,--config", c.config_file, "JSON suite config; flags override its fields");
  app->add_flag("-f,--force", c.force, "rerun records already in the log");
  app->add_option("-w,--workers", c.workers, "worker threads (0: hardware)");
}

int run(const json& base, const Common& c, const json& params, const json& dims) {
  json config = c.config_file.empty() ? json::object() : json::parse(plma::read_file(c.config_file));
  for (const auto& [k, v] : base.items()) config[k] = v;
  json& p = config["params"];
  if (p.is_null()) p = json::object();
  for (const auto& [k, v] : params.items()) p[k] = v;
  for (const auto& [k, v] : dims.items()) p["dims"][k] = v;
  if (!c.instances.empty()) config["instances"] = c.instances;
  if (!c.seeds.empty()) config["seeds"] = c.seeds;
  if (!c.output.empty()) config["output"] = c.output;
  if (!c.artifacts.empty()) config["artifacts"] = c.artifacts;

  plma::SuiteOptions opts;
  opts.force = c.force;
  opts.workers = c.workers;
  int failures = 0;
  opts.on_record = [&](const plma::RunRecord& r) {
    if (r.failed()) {
      ++failures;
      std::cerr << r.instance << " seed " << r.seed << ": " << r.error << '\n';
      return;
    }
    std::cout << r.instance << " seed " << r.seed << " " << r.method << " cost " << r.cost;
    if (r.gap) std::cout << " gap " << *r.gap << "%";
    std::cout << " time " << r.wall_time << "s\n";
  };
  const auto records = plma::run_suite(config, opts);
  std::cout << records.size() << " record(s), config " << plma::config_hash(config) << '\n';
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-based permutation search for quadratic assignment and bandwidth"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "write synthetic instances in QAPLIB format");
  std::string family = "uniform";
  int gen_n = 20, gen_count = 1;
  std::uint64_t gen_seed = 0;
  std::string gen_out = ".";
  gen->add_option("--family", family, "uniform | geometric")
      ->check(CLI::IsMember({"uniform", "geometric"}));
  gen->add_option("-n", gen_n, "instance size")->check(CLI::Range(2, 100000));
  gen->add_option("--count", gen_count, "number of instances")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "first seed; instance k uses seed + k");
  gen->add_option("--out", gen_out, "output directory");

  // solve
  auto* solve = app.add_subcommand("solve", "finetune or run a baseline on instances");
  Common solve_c;
  json solve_params = json::object(), solve_dims = json::object();
  std::string method = "plma";
  solve->add_option("-m,--method", method, "plma | gd_free | ar_seq | ipfp")
      ->check(CLI::IsMember({"plma", "gd_free", "ar_seq", "ipfp"}));
  common_flags(solve, solve_c, true);
  finetune_flags(solve, solve_params);
  network_flags(solve, solve_params, solve_dims);
  solve->add_flag_function(
      "--stop-at-target", [&](std::int64_t) { solve_params["stop_at_target"] = true; },
      "stop once the reference cost is reached");
  param<int>(solve, "--max-iters", solve_params, "max_iters", "IPFP iterations");
  param<int>(solve, "--restarts", solve_params, "restarts", "IPFP restarts");

  // pretrain
  auto* pre = app.add_subcommand("pretrain", "pretrain the network on synthetic instances");
  Common pre_c;
  json pre_params = json::object(), pre_dims = json::object();
  common_flags(pre, pre_c, false);
  param<std::string>(pre, "--family", pre_params, "family", "uniform | geometric");
  param<int>(pre, "-n", pre_params, "n", "instance size");
  param<int>(pre, "--steps", pre_params, "steps", "optimizer steps");
  param<int>(pre, "--batch", pre_params, "batch_size", "instances per step");
  param<int>(pre, "--samples", pre_params, "samples", "chains per instance");
  param<int>(pre, "--chain-length", pre_params, "chain_length", "MH steps (default n)");
  param<double>(pre, "--lr", pre_params, "learning_rate", "Adam learning rate");
  param<std::string>(pre, "--save", pre_params, "save", "checkpoint path ({seed} is substituted)");
  param<int>(pre, "--d", pre_dims, "d", "hidden width");
  param<int>(pre, "--gcn-layers", pre_dims, "gcn_layers", "GCN layers");
  param<int>(pre, "--heads", pre_dims, "heads", "attention heads");

  // bm
  auto* bm = app.add_subcommand("bm", "bandwidth minimisation by bisection");
  Common bm_c;
  json bm_params = json::object();
  common_flags(bm, bm_c, false);
  bm->add_option("-g,--graph", bm_c.instances,
                 "sources: mtx:<path> or graph:<path|cycle|complete|star>:<n>, graph:random:<n>:<seed>");
  bm->add_option("--out-dir", bm_c.artifacts, "directory for permutations and summaries");
  param<int>(bm, "--epochs", bm_params, "epochs", "epochs per bisection level");
  param<int>(bm, "--starts", bm_params, "starts", "start points K");
  param<int>(bm, "--chains", bm_params, "chains", "chains per start M");
  param<double>(bm, "--lr", bm_params, "learning_rate", "Adam learning rate");
  param<double>(bm, "--time-limit", bm_params, "time_limit", "seconds per level (0: none)");

  // report
  auto* rep = app.add_subcommand("report", "summarise run logs");
  std::vector<std::string> inputs;
  std::string csv_out, json_out;
  rep->add_option("inputs", inputs, "JSONL run logs")->required()->check(CLI::ExistingFile);
  rep->add_option("--csv", csv_out, "write all records as CSV");
  rep->add_option("--json", json_out, "write the summary as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      std::filesystem::create_directories(gen_out);
      for (int k = 0; k < gen_count; ++k) {
        const std::uint64_t seed = gen_seed + static_cast<std::uint64_t>(k);
        plma::QapInstance inst =
            family == "uniform" ? plma::gen_uniform(gen_n, seed) : plma::gen_geometric(gen_n, seed);
        const auto path = std::filesystem::path(gen_out) /
                          (family + std::to_string(gen_n) + "_" + std::to_string(seed) + ".dat");
        std::ofstream(path) << plma::write_qaplib(inst);
        std::cout << path.string() << '\n';
      }
      return 0;
    }
    if (*solve) {
      json base = {{"command", "solve"}};
      if (solve->count("--method") > 0) base["method"] = method;
      return run(base, solve_c, solve_params, solve_dims);
    }
    if (*pre) return run({{"command", "pretrain"}}, pre_c, pre_params, pre_dims);
    if (*bm) return run({{"command", "bm"}}, bm_c, bm_params, json::object());
    if (*rep) {
      std::vector<plma::RunRecord> records;
      for (const auto& path : inputs) {
        auto r = plma::read_records(path);
        records.insert(records.end(), r.begin(), r.end());
      }
      if (!csv_out.empty()) {
        std::ofstream out(csv_out);
        plma::write_csv(out, records);
      }
      int failures = 0;
      for (const auto& r : records) failures += r.failed();
      const plma::Summary s = plma::summarize(records);
      std::cout << plma::format_summary(s);
      if (!json_out.empty()) std::ofstream(json_out) << plma::summary_json(s).dump(2) << '\n';
      return failures == 0 ? 0 : 1;
    }
  } catch (const plma::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
