#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "plma/bandwidth.hpp"
#include "plma/report.hpp"

namespace plma {

// Batch runner behind the command-line tool.
//
// A suite config is a JSON object:
//   command    "solve" | "finetune" | "baseline" | "pretrain" | "bm"
//   method     "plma" | "gd_free" | "ar_seq" | "ipfp" (solve and baseline only)
//   instances  list of sources, see resolve_source
//   seeds      list of unsigned integers (default [0])
//   params     command-specific settings; unknown keys are rejected
//   output     JSONL log the records are appended to (optional)
//   artifacts  directory for bandwidth permutations and summaries (optional)
//
// Records already present in the log with the same config hash, instance and
// seed are not recomputed unless `force` is set.

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SuiteOptions {
  bool force = false;
  std::string data_dir;  // empty: $PLMA_DATA_DIR, then the bundled data directory
  int workers = 0;
  std::function<void(const RunRecord&)> on_record;
};

struct SuiteItem {
  std::string label;
  std::optional<QapInstance> qap;
  std::optional<BmGraph> graph;
};

// Data directory used when SuiteOptions::data_dir is empty.
std::string default_data_dir();

// Sources:
//   qaplib:<name>             bundled QAPLIB instance with its .sln reference
//   file:<path>               QAPLIB-format file (.sln next to it is used if present)
//   uniform:<n>:<seed>        synthetic uniform instance
//   geometric:<n>:<seed>      synthetic geometric instance
//   mtx:<path>                MatrixMarket graph (bm only)
//   graph:<kind>:<n>[:<seed>] path | cycle | complete | star | random (bm only)
// Throws ConfigError for unknown kinds and std::runtime_error for missing files.
SuiteItem resolve_source(const std::string& source, const std::string& data_dir);

// Defaults filled in and unknown keys rejected; the result is what gets hashed.
nlohmann::json resolve_config(const nlohmann::json& config);

// FNV-1a over the canonical dump of the resolved command, method, instances
// and params (seeds, output, artifacts and worker count do not participate).
std::string config_hash(const nlohmann::json& config);

std::vector<RunRecord> run_suite(const nlohmann::json& config, const SuiteOptions& opts = {});
std::vector<RunRecord> run_suite_file(const std::string& path, const SuiteOptions& opts = {});

nlohmann::json bandwidth_summary(const std::string& name, int n, const BiPlmaResult& r);

}  // namespace plma
