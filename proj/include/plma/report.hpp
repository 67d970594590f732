#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace plma {

// One solve of one instance under one seed.
struct RunRecord {
  std::string instance;
  int n = 0;
  std::string method;
  double cost = 0.0;
  std::optional<double> reference;
  std::optional<double> gap;  // percent; present iff reference is
  double wall_time = 0.0;     // seconds around the solve call
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string error;          // nonempty when the run failed

  bool failed() const { return !error.empty(); }
  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

// (cost - ref) / ref * 100. Throws std::invalid_argument unless ref > 0.
double compute_gap(double cost, double ref);

// Fills gap from reference (or clears both when no reference is given).
RunRecord make_record(std::string instance, int n, std::string method, double cost,
                      std::optional<double> reference, double wall_time, std::uint64_t seed,
                      std::string config_hash);

nlohmann::json to_json(const RunRecord& r);
RunRecord record_from_json(const nlohmann::json& j);

// Line-delimited JSON, one record per line.
std::string to_jsonl(const std::vector<RunRecord>& records);
std::vector<RunRecord> parse_jsonl(const std::string& text);
void append_records(const std::string& path, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_records(const std::string& path);

void write_csv(std::ostream& out, const std::vector<RunRecord>& records);

struct InstanceStats {
  std::string group;
  std::string instance;
  int n = 0;
  int runs = 0;
  double min_gap = 0.0;
  double mean_gap = 0.0;
  double max_gap = 0.0;
  double mean_cost = 0.0;
  double mean_time = 0.0;

  friend bool operator==(const InstanceStats&, const InstanceStats&) = default;
};

struct GroupStats {
  std::string group;
  int instances = 0;
  double mean_min_gap = 0.0;
  double mean_mean_gap = 0.0;
  double mean_max_gap = 0.0;
  double mean_time = 0.0;

  friend bool operator==(const GroupStats&, const GroupStats&) = default;
};

struct Summary {
  std::vector<InstanceStats> instances;
  std::vector<GroupStats> groups;

  friend bool operator==(const Summary&, const Summary&) = default;
};

// Instance family: the name up to its first digit ("tai12a" -> "tai").
std::string instance_family(const std::string& name);

// Per-instance statistics over seeds, then group averages of those. Groups
// are "<method>/<family>". Failed records and records without a gap are
// skipped; throws std::invalid_argument when nothing is left.
Summary summarize(const std::vector<RunRecord>& records);

std::string format_summary(const Summary& s);
nlohmann::json summary_json(const Summary& s);

}  // namespace plma
