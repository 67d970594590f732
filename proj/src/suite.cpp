#include "plma/suite.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "plma/baselines.hpp"

namespace plma {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json dims_defaults() {
  const NetworkDims d;
  return {{"d_in", d.d_in},     {"d", d.d},
          {"gcn_layers", d.gcn_layers}, {"attention_blocks", d.attention_blocks},
          {"heads", d.heads},   {"sinkhorn_iters", d.sinkhorn_iters},
          {"clip", d.clip}};
}

json finetune_defaults() {
  const FinetuneConfig f;
  return {{"epochs", f.epochs},
          {"starts", f.starts},
          {"chains", f.chains},
          {"chain_length", f.chain_length},
          {"long_run_length", f.long_run_length},
          {"ls_iterations", f.ls_iterations},
          {"ls_candidates", f.ls_candidates},
          {"learning_rate", f.learning_rate},
          {"clip_grad_norm", f.clip_grad_norm},
          {"time_limit", f.time_limit},
          {"stop_at_target", f.stop_at_target},
          {"model", "network"},
          {"checkpoint", ""},
          {"dims", dims_defaults()}};
}

json ipfp_defaults() {
  const IpfpConfig c;
  return {{"max_iters", c.max_iters}, {"tol", c.tol}, {"restarts", c.restarts}};
}

json pretrain_defaults() {
  const PretrainConfig p;
  return {{"family", "uniform"},
          {"n", 20},
          {"steps", 100},
          {"batch_size", p.batch_size},
          {"samples", p.samples},
          {"chain_length", p.chain_length},
          {"ls_iterations", p.local_search.iterations},
          {"ls_candidates", p.local_search.candidates},
          {"learning_rate", p.learning_rate},
          {"clip_grad_norm", p.clip_grad_norm},
          {"dims", dims_defaults()},
          {"save", ""}};
}

json bm_defaults() {
  const BiPlmaConfig b;
  return {{"epochs", b.solver.epochs},
          {"starts", b.solver.starts},
          {"chains", b.solver.chains},
          {"chain_length", b.solver.chain_length},
          {"long_run_length", b.solver.long_run_length},
          {"ls_iterations", b.solver.ls_iterations},
          {"ls_candidates", b.solver.ls_candidates},
          {"learning_rate", b.solver.learning_rate},
          {"time_limit", b.solver.time_limit},
          {"clip", b.clip},
          {"sinkhorn_iters", b.sinkhorn_iters}};
}

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) {
    return !(a.is_number_integer() && b.is_number_float());
  }
  return a.type() == b.type();
}

// Overlays `user` onto `defaults`, rejecting unknown keys and type changes.
json merge_checked(const json& defaults, const json& user, const std::string& where) {
  if (!user.is_object()) throw ConfigError(where + " must be an object");
  json out = defaults;
  for (const auto& [key, value] : user.items()) {
    if (!defaults.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
    if (defaults[key].is_object()) {
      out[key] = merge_checked(defaults[key], value, where + "." + key);
    } else if (!same_kind(defaults[key], value)) {
      throw ConfigError("key '" + key + "' in " + where + " has the wrong type");
    } else if (defaults[key].is_number_float()) {
      out[key] = value.get<double>();
    } else {
      out[key] = value;
    }
  }
  return out;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

NetworkDims dims_from(const json& j) {
  NetworkDims d;
  d.d_in = j["d_in"].get<int>();
  d.d = j["d"].get<int>();
  d.gcn_layers = j["gcn_layers"].get<int>();
  d.attention_blocks = j["attention_blocks"].get<int>();
  d.heads = j["heads"].get<int>();
  d.sinkhorn_iters = j["sinkhorn_iters"].get<int>();
  d.clip = j["clip"].get<double>();
  d.validate();
  return d;
}

FinetuneConfig finetune_from(const json& p, std::uint64_t seed, int workers) {
  FinetuneConfig f;
  f.epochs = p["epochs"].get<int>();
  f.starts = p["starts"].get<int>();
  f.chains = p["chains"].get<int>();
  f.chain_length = p["chain_length"].get<int>();
  f.long_run_length = p["long_run_length"].get<int>();
  f.ls_iterations = p["ls_iterations"].get<int>();
  f.ls_candidates = p["ls_candidates"].get<int>();
  f.learning_rate = p["learning_rate"].get<double>();
  if (p.contains("clip_grad_norm")) f.clip_grad_norm = p["clip_grad_norm"].get<double>();
  f.time_limit = p["time_limit"].get<double>();
  if (p.contains("stop_at_target")) f.stop_at_target = p["stop_at_target"].get<bool>();
  f.seed = seed;
  f.workers = workers;
  return f;
}

std::unique_ptr<HeatmapModel> make_model(const json& p, int n, std::uint64_t seed) {
  const std::string kind = p["model"].get<std::string>();
  const NetworkDims dims = dims_from(p["dims"]);
  if (kind == "direct") return std::make_unique<DirectModel>(n, dims.clip, dims.sinkhorn_iters);
  if (kind != "network") throw ConfigError("unknown model '" + kind + "'");
  const std::string ckpt = p["checkpoint"].get<std::string>();
  if (!ckpt.empty()) return std::make_unique<NetworkModel>(load_checkpoint(ckpt));
  return std::make_unique<NetworkModel>(init_params(dims, seed));
}

std::vector<int> split_ints(const std::string& s, std::size_t from) {
  std::vector<int> out;
  std::stringstream ss(s.substr(from));
  std::string part;
  while (std::getline(ss, part, ':')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw ConfigError("bad integer '" + part + "' in source '" + s + "'");
    }
  }
  return out;
}

OrderTable order_table(const std::string& qaplib_dir) {
  const fs::path roles = fs::path(qaplib_dir) / "roles.json";
  if (!fs::exists(roles)) return {};
  return OrderTable::parse(read_file(roles.string()));
}

struct Outcome {
  double cost = 0.0;
  std::optional<double> reference;
};

}  // namespace

std::string default_data_dir() {
  if (const char* env = std::getenv("PLMA_DATA_DIR"); env && *env) return env;
  return PLMA_DATA_DIR_DEFAULT;
}

SuiteItem resolve_source(const std::string& source, const std::string& data_dir) {
  const auto colon = source.find(':');
  if (colon == std::string::npos) throw ConfigError("source '" + source + "' has no kind prefix");
  const std::string kind = source.substr(0, colon);
  const std::string rest = source.substr(colon + 1);
  SuiteItem item;
  item.label = source;
  if (kind == "qaplib") {
    const std::string dir = (fs::path(data_dir) / "qaplib").string();
    if (!fs::exists(fs::path(dir) / (rest + ".dat"))) {
      throw std::runtime_error("unknown QAPLIB instance '" + rest + "' under " + dir);
    }
    item.qap = load_qaplib(dir, rest, order_table(dir));
    item.label = rest;
  } else if (kind == "file") {
    const fs::path p(rest);
    if (!fs::exists(p)) throw std::runtime_error("instance file not found: " + rest);
    item.qap = load_qaplib(p.parent_path().string(), p.stem().string(),
                           order_table(p.parent_path().string()));
    item.label = p.stem().string();
  } else if (kind == "uniform" || kind == "geometric") {
    const auto v = split_ints(source, colon + 1);
    if (v.size() != 2 || v[0] < 2 || v[1] < 0) throw ConfigError("expected " + kind + ":<n>:<seed>");
    item.qap = kind == "uniform" ? gen_uniform(v[0], static_cast<std::uint64_t>(v[1]))
                                 : gen_geometric(v[0], static_cast<std::uint64_t>(v[1]));
    item.label = kind + std::to_string(v[0]) + "_" + std::to_string(v[1]);
    item.qap->name = item.label;
  } else if (kind == "mtx") {
    if (!fs::exists(rest)) throw std::runtime_error("graph file not found: " + rest);
    item.graph = parse_matrix_market(read_file(rest));
    item.label = fs::path(rest).stem().string();
    item.graph->name = item.label;
  } else if (kind == "graph") {
    const auto sep = rest.find(':');
    const std::string shape = rest.substr(0, sep);
    const auto v = sep == std::string::npos ? std::vector<int>{} : split_ints(rest, sep + 1);
    if (v.empty() || v[0] < 1) throw ConfigError("expected graph:<kind>:<n>");
    if (shape == "path") item.graph = path_graph(v[0]);
    else if (shape == "cycle") item.graph = cycle_graph(v[0]);
    else if (shape == "complete") item.graph = complete_graph(v[0]);
    else if (shape == "star") item.graph = star_graph(v[0]);
    else if (shape == "random" && v.size() == 2)
      item.graph = random_graph(v[0], 3.0 / v[0], static_cast<std::uint64_t>(v[1]));
    else throw ConfigError("unknown graph source '" + source + "'");
    item.label = item.graph->name;
  } else {
    throw ConfigError("unknown source kind '" + kind + "'");
  }
  return item;
}

json resolve_config(const json& config) {
  if (!config.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> top{"command", "method", "instances", "seeds",
                                         "params",  "output", "artifacts"};
  for (const auto& [key, value] : config.items()) {
    if (!top.count(key)) throw ConfigError("unknown top-level key '" + key + "'");
  }
  if (!config.contains("command") || !config["command"].is_string()) {
    throw ConfigError("config needs a string 'command'");
  }
  json out;
  std::string command = config["command"].get<std::string>();
  std::string method = config.value("method", std::string{});
  if (command == "finetune") {
    if (!method.empty() && method != "plma") throw ConfigError("finetune runs method 'plma'");
    command = "solve";
    method = "plma";
  }
  json defaults;
  if (command == "solve" || command == "baseline") {
    if (method.empty()) method = command == "solve" ? "plma" : "";
    if (method == "plma" || method == "gd_free" || method == "ar_seq") {
      defaults = finetune_defaults();
    } else if (method == "ipfp") {
      defaults = ipfp_defaults();
    } else {
      throw ConfigError("unknown method '" + method + "'");
    }
    if (command == "baseline" && method == "plma") {
      throw ConfigError("baseline runs gd_free, ar_seq or ipfp");
    }
  } else if (command == "pretrain") {
    defaults = pretrain_defaults();
    method = "pretrain";
  } else if (command == "bm") {
    defaults = bm_defaults();
    method = "bi_plma";
  } else {
    throw ConfigError("unknown command '" + command + "'");
  }
  out["command"] = command;
  out["method"] = method;
  out["params"] = merge_checked(defaults, config.value("params", json::object()), "params");

  out["instances"] = json::array();
  if (config.contains("instances")) {
    if (!config["instances"].is_array()) throw ConfigError("'instances' must be a list");
    for (const auto& s : config["instances"]) {
      if (!s.is_string()) throw ConfigError("instance sources must be strings");
      out["instances"].push_back(s);
    }
  }
  out["seeds"] = json::array({0});
  if (config.contains("seeds")) {
    if (!config["seeds"].is_array()) throw ConfigError("'seeds' must be a list");
    out["seeds"] = json::array();
    for (const auto& s : config["seeds"]) {
      if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0))
        throw ConfigError("seeds must be nonnegative integers");
      out["seeds"].push_back(s.get<std::uint64_t>());
    }
  }
  for (const char* key : {"output", "artifacts"}) {
    if (config.contains(key)) {
      if (!config[key].is_string()) throw ConfigError(std::string("'") + key + "' must be a string");
      out[key] = config[key];
    }
  }
  return out;
}

std::string config_hash(const json& config) {
  const json r = resolve_config(config);
  const json semantic = {{"command", r["command"]},
                         {"method", r["method"]},
                         {"instances", r["instances"]},
                         {"params", r["params"]}};
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << fnv1a(semantic.dump());
  return os.str();
}

json bandwidth_summary(const std::string& name, int n, const BiPlmaResult& r) {
  json levels = json::array();
  for (const auto& l : r.levels) {
    levels.push_back({{"m", l.m},
                      {"h_best", l.h_best},
                      {"feasible", l.feasible},
                      {"epochs", l.epochs},
                      {"seconds", l.seconds}});
  }
  return {{"name", name},         {"n", n},
          {"rcm_bound", r.rcm_bound}, {"bandwidth", r.upper},
          {"lower", r.lower},     {"levels", levels}};
}

std::vector<RunRecord> run_suite(const json& config, const SuiteOptions& opts) {
  const json cfg = resolve_config(config);
  const std::string hash = config_hash(config);
  const std::string command = cfg["command"].get<std::string>();
  const std::string method = cfg["method"].get<std::string>();
  const json& params = cfg["params"];
  const std::string data_dir = opts.data_dir.empty() ? default_data_dir() : opts.data_dir;
  const std::string output = cfg.value("output", std::string{});

  // Resolve every source up front so a bad path fails before any solve runs.
  std::vector<SuiteItem> items;
  if (command == "pretrain") {
    SuiteItem it;
    it.label = params["family"].get<std::string>() + ":" + std::to_string(params["n"].get<int>());
    items.push_back(it);
  } else {
    for (const auto& s : cfg["instances"]) {
      SuiteItem it = resolve_source(s.get<std::string>(), data_dir);
      if (command == "bm" && !it.graph) throw ConfigError("bm needs graph sources: " + it.label);
      if (command != "bm" && !it.qap) throw ConfigError(command + " needs QAP sources: " + it.label);
      items.push_back(std::move(it));
    }
  }

  std::map<std::pair<std::string, std::uint64_t>, RunRecord> done;
  if (!output.empty() && !opts.force) {
    for (auto& r : read_records(output)) {
      if (r.config_hash == hash && !r.failed()) done[{r.instance, r.seed}] = r;
    }
  }

  std::vector<RunRecord> records;
  for (const SuiteItem& item : items) {
    for (const auto& sj : cfg["seeds"]) {
      const std::uint64_t seed = sj.get<std::uint64_t>();
      if (auto it = done.find({item.label, seed}); it != done.end()) {
        records.push_back(it->second);
        continue;
      }
      const int n = item.qap ? item.qap->n : item.graph ? item.graph->n : params["n"].get<int>();
      RunRecord rec = make_record(item.label, n, method, 0.0, std::nullopt, 0.0, seed, hash);
      try {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        if (command == "solve" || command == "baseline") {
          const QapInstance& inst = *item.qap;
          o.reference = inst.best_known;
          if (method == "ipfp") {
            IpfpConfig ic;
            ic.max_iters = params["max_iters"].get<int>();
            ic.tol = params["tol"].get<double>();
            ic.restarts = params["restarts"].get<int>();
            ic.seed = seed;
            ic.workers = opts.workers;
            o.cost = ipfp_restarts(inst, ic).cost;
          } else {
            const FinetuneConfig fc = finetune_from(params, seed, opts.workers);
            auto model = make_model(params, inst.n, seed);
            FinetuneResult r;
            if (method == "plma") {
              r = finetune(fc, {inst}, *model);
            } else if (method == "gd_free") {
              r = gd_free(fc, inst, model->forward(inst)->heatmap);
            } else {
              AdamOptimizer adam(model->params(), fc.learning_rate);
              r = ar_seq_search(fc, {inst}, *model, adam);
            }
            o.cost = r.incumbents[0].cost;
          }
        } else if (command == "pretrain") {
          PretrainConfig pc;
          pc.steps = params["steps"].get<int>();
          pc.batch_size = params["batch_size"].get<int>();
          pc.samples = params["samples"].get<int>();
          pc.chain_length = params["chain_length"].get<int>();
          pc.local_search = {params["ls_iterations"].get<int>(), params["ls_candidates"].get<int>()};
          pc.learning_rate = params["learning_rate"].get<double>();
          pc.clip_grad_norm = params["clip_grad_norm"].get<double>();
          pc.seed = seed;
          pc.workers = opts.workers;
          const std::string family = params["family"].get<std::string>();
          InstanceSource src;
          if (family == "uniform") src = uniform_source(params["n"].get<int>());
          else if (family == "geometric") src = geometric_source(params["n"].get<int>());
          else throw ConfigError("unknown pretraining family '" + family + "'");
          NetworkModel model(init_params(dims_from(params["dims"]), seed));
          double last = 0.0;
          pretrain(pc, src, model, [&](const TrainRecord& tr) { last = tr.best_cost; });
          o.cost = last;
          std::string save = params["save"].get<std::string>();
          if (!save.empty()) {
            if (auto pos = save.find("{seed}"); pos != std::string::npos) {
              save.replace(pos, 6, std::to_string(seed));
            }
            save_checkpoint(save, model.network());
          }
        } else {
          BiPlmaConfig bc;
          bc.solver = finetune_from(params, seed, opts.workers);
          bc.solver.stop_at_target = true;
          bc.clip = params["clip"].get<double>();
          bc.sinkhorn_iters = params["sinkhorn_iters"].get<int>();
          const BiPlmaResult r = bi_plma(*item.graph, bc);
          o.cost = r.upper;
          const std::string artifacts = cfg.value("artifacts", std::string{});
          if (!artifacts.empty()) {
            fs::create_directories(artifacts);
            const std::string stem =
                (fs::path(artifacts) / (item.label + ".s" + std::to_string(seed))).string();
            std::ofstream perm(stem + ".perm");
            for (int v : r.witness.one_based()) perm << v << '\n';
            std::ofstream summary(stem + ".json");
            summary << bandwidth_summary(item.label, item.graph->n, r).dump(2) << '\n';
          }
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rec = make_record(item.label, n, method, o.cost, o.reference, secs, seed, hash);
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
      if (!output.empty()) append_records(output, {rec});
      if (opts.on_record) opts.on_record(rec);
      records.push_back(rec);
    }
  }
  return records;
}

std::vector<RunRecord> run_suite_file(const std::string& path, const SuiteOptions& opts) {
  json config;
  try {
    config = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  return run_suite(config, opts);
}

}  // namespace plma
