#include "plma/report.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include "plma/instances.hpp"

namespace plma {

double compute_gap(double cost, double ref) {
  if (!(ref > 0.0)) throw std::invalid_argument("gap reference must be positive");
  return (cost - ref) / ref * 100.0;
}

RunRecord make_record(std::string instance, int n, std::string method, double cost,
                      std::optional<double> reference, double wall_time, std::uint64_t seed,
                      std::string config_hash) {
  RunRecord r;
  r.instance = std::move(instance);
  r.n = n;
  r.method = std::move(method);
  r.cost = cost;
  r.reference = reference;
  if (reference) r.gap = compute_gap(cost, *reference);
  r.wall_time = wall_time;
  r.seed = seed;
  r.config_hash = std::move(config_hash);
  return r;
}

nlohmann::json to_json(const RunRecord& r) {
  nlohmann::json j;
  j["instance"] = r.instance;
  j["n"] = r.n;
  j["method"] = r.method;
  j["cost"] = r.cost;
  j["reference"] = r.reference ? nlohmann::json(*r.reference) : nlohmann::json(nullptr);
  j["gap"] = r.gap ? nlohmann::json(*r.gap) : nlohmann::json(nullptr);
  j["wall_time"] = r.wall_time;
  j["seed"] = r.seed;
  j["config_hash"] = r.config_hash;
  if (r.failed()) j["error"] = r.error;
  return j;
}

RunRecord record_from_json(const nlohmann::json& j) {
  RunRecord r;
  r.instance = j.at("instance").get<std::string>();
  r.n = j.at("n").get<int>();
  r.method = j.at("method").get<std::string>();
  r.cost = j.at("cost").get<double>();
  if (j.contains("reference") && !j["reference"].is_null()) r.reference = j["reference"].get<double>();
  if (j.contains("gap") && !j["gap"].is_null()) r.gap = j["gap"].get<double>();
  if (r.gap.has_value() != r.reference.has_value()) {
    throw std::invalid_argument("record has a gap without a reference or vice versa");
  }
  r.wall_time = j.at("wall_time").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.config_hash = j.at("config_hash").get<std::string>();
  if (j.contains("error")) r.error = j["error"].get<std::string>();
  return r;
}

std::string to_jsonl(const std::vector<RunRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

std::vector<RunRecord> parse_jsonl(const std::string& text) {
  std::vector<RunRecord> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(record_from_json(nlohmann::json::parse(line)));
  }
  return out;
}

void append_records(const std::string& path, const std::vector<RunRecord>& records) {
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for appending");
  out << to_jsonl(records);
  if (!out) throw std::runtime_error("write to " + path + " failed");
}

std::vector<RunRecord> read_records(const std::string& path) {
  std::ifstream probe(path);
  if (!probe) return {};
  return parse_jsonl(read_file(path));
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  out << "instance,n,method,cost,reference,gap,wall_time,seed,config_hash,error\n";
  for (const auto& r : records) {
    out << csv_field(r.instance) << ',' << r.n << ',' << csv_field(r.method) << ','
        << num(r.cost) << ',' << (r.reference ? num(*r.reference) : "") << ','
        << (r.gap ? num(*r.gap) : "") << ',' << num(r.wall_time) << ',' << r.seed << ','
        << r.config_hash << ',' << csv_field(r.error) << '\n';
  }
}

std::string instance_family(const std::string& name) {
  const auto it = std::find_if(name.begin(), name.end(),
                               [](unsigned char c) { return std::isdigit(c); });
  return it == name.begin() ? name : std::string(name.begin(), it);
}

Summary summarize(const std::vector<RunRecord>& records) {
  // Keyed by (group, instance) so the output order is deterministic.
  std::map<std::pair<std::string, std::string>, std::vector<const RunRecord*>> by_instance;
  for (const auto& r : records) {
    if (r.failed() || !r.gap) continue;
    by_instance[{r.method + "/" + instance_family(r.instance), r.instance}].push_back(&r);
  }
  if (by_instance.empty()) throw std::invalid_argument("summarize: no records with a gap");

  Summary s;
  std::map<std::string, std::vector<const InstanceStats*>> by_group;
  for (const auto& [key, runs] : by_instance) {
    InstanceStats st;
    st.group = key.first;
    st.instance = key.second;
    st.n = runs.front()->n;
    st.runs = static_cast<int>(runs.size());
    st.min_gap = *runs.front()->gap;
    st.max_gap = *runs.front()->gap;
    for (const RunRecord* r : runs) {
      st.min_gap = std::min(st.min_gap, *r->gap);
      st.max_gap = std::max(st.max_gap, *r->gap);
      st.mean_gap += *r->gap;
      st.mean_cost += r->cost;
      st.mean_time += r->wall_time;
    }
    st.mean_gap /= st.runs;
    st.mean_cost /= st.runs;
    st.mean_time /= st.runs;
    s.instances.push_back(st);
  }
  for (const auto& st : s.instances) by_group[st.group].push_back(&st);
  for (const auto& [group, members] : by_group) {
    GroupStats g;
    g.group = group;
    g.instances = static_cast<int>(members.size());
    for (const InstanceStats* st : members) {
      g.mean_min_gap += st->min_gap;
      g.mean_mean_gap += st->mean_gap;
      g.mean_max_gap += st->max_gap;
      g.mean_time += st->mean_time;
    }
    g.mean_min_gap /= g.instances;
    g.mean_mean_gap /= g.instances;
    g.mean_max_gap /= g.instances;
    g.mean_time /= g.instances;
    s.groups.push_back(g);
  }
  return s;
}

std::string format_summary(const Summary& s) {
  std::ostringstream os;
  os << std::fixed;
  os << std::left << std::setw(24) << "group" << std::setw(16) << "instance" << std::right
     << std::setw(5) << "n" << std::setw(6) << "runs" << std::setw(10) << "min%"
     << std::setw(10) << "mean%" << std::setw(10) << "max%" << std::setw(10) << "time(s)"
     << '\n';
  for (const auto& st : s.instances) {
    os << std::left << std::setw(24) << st.group << std::setw(16) << st.instance << std::right
       << std::setw(5) << st.n << std::setw(6) << st.runs << std::setprecision(2)
       << std::setw(10) << st.min_gap << std::setw(10) << st.mean_gap << std::setw(10)
       << st.max_gap << std::setw(10) << st.mean_time << '\n';
  }
  os << '\n'
     << std::left << std::setw(24) << "group" << std::right << std::setw(10) << "instances"
     << std::setw(10) << "min%" << std::setw(10) << "mean%" << std::setw(10) << "max%"
     << std::setw(10) << "time(s)" << '\n';
  for (const auto& g : s.groups) {
    os << std::left << std::setw(24) << g.group << std::right << std::setw(10) << g.instances
       << std::setprecision(2) << std::setw(10) << g.mean_min_gap << std::setw(10)
       << g.mean_mean_gap << std::setw(10) << g.mean_max_gap << std::setw(10) << g.mean_time
       << '\n';
  }
  return os.str();
}

nlohmann::json summary_json(const Summary& s) {
  nlohmann::json j;
  j["instances"] = nlohmann::json::array();
  for (const auto& st : s.instances) {
    j["instances"].push_back({{"group", st.group},
                              {"instance", st.instance},
                              {"n", st.n},
                              {"runs", st.runs},
                              {"min_gap", st.min_gap},
                              {"mean_gap", st.mean_gap},
                              {"max_gap", st.max_gap},
                              {"mean_cost", st.mean_cost},
                              {"mean_time", st.mean_time}});
  }
  j["groups"] = nlohmann::json::array();
  for (const auto& g : s.groups) {
    j["groups"].push_back({{"group", g.group},
                           {"instances", g.instances},
                           {"mean_min_gap", g.mean_min_gap},
                           {"mean_mean_gap", g.mean_mean_gap},
                           {"mean_max_gap", g.mean_max_gap},
                           {"mean_time", g.mean_time}});
  }
  return j;
}

}  // namespace plma
