#include <gtest/gtest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "plma/suite.hpp"

using namespace plma;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

RunRecord record(const std::string& inst, double gap, std::uint64_t seed,
                 const std::string& method = "plma") {
  return make_record(inst, 12, method, 100.0 + gap, 100.0, 0.5, seed, "abc");
}

fs::path temp_path(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "plma_test_report";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  fs::remove(p);
  return p;
}

}  // namespace

TEST(ComputeGap, Examples) {
  EXPECT_EQ(compute_gap(100, 100), 0.0);
  EXPECT_NEAR(compute_gap(521.75, 521.91), -0.0307, 5e-5);
  EXPECT_NEAR(compute_gap(110, 100), 10.0, 1e-12);
  EXPECT_THROW(compute_gap(1, 0), std::invalid_argument);
  EXPECT_THROW(compute_gap(1, -2), std::invalid_argument);
}

TEST(RunRecord, GapPresentIffReference) {
  const RunRecord a = make_record("x", 3, "ipfp", 5.0, std::nullopt, 0.1, 0, "h");
  EXPECT_FALSE(a.gap.has_value());
  const RunRecord b = make_record("x", 3, "ipfp", 5.0, 4.0, 0.1, 0, "h");
  ASSERT_TRUE(b.gap.has_value());
  EXPECT_EQ(*b.gap, 25.0);
}

TEST(RunRecord, JsonlRoundTripIsLossless) {
  std::vector<RunRecord> rs{record("nug12", 0.1 + 0.2, 1), record("tai12a", 1.0 / 3, 2)};
  rs.push_back(make_record("uniform8_3", 8, "gd_free", 3.14159265358979, std::nullopt, 1e-7, 99,
                           "ffee"));
  rs.back().error = "boom";
  EXPECT_EQ(parse_jsonl(to_jsonl(rs)), rs);
  const fs::path p = temp_path("roundtrip.jsonl");
  append_records(p.string(), {rs[0]});
  append_records(p.string(), {rs[1], rs[2]});
  EXPECT_EQ(read_records(p.string()), rs);
  EXPECT_TRUE(read_records((p.parent_path() / "missing.jsonl").string()).empty());
}

TEST(RunRecord, CsvHasHeaderAndRows) {
  std::ostringstream out;
  write_csv(out, {record("nug12", 0.0, 1), record("had12", 2.0, 1)});
  std::istringstream in(out.str());
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 3);
  EXPECT_NE(out.str().find("\nnug12,12,plma,"), std::string::npos);
}

TEST(InstanceFamily, PrefixBeforeDigit) {
  EXPECT_EQ(instance_family("tai12a"), "tai");
  EXPECT_EQ(instance_family("nug30"), "nug");
  EXPECT_EQ(instance_family("plain"), "plain");
}

TEST(Summarize, SingleRecord) {
  const Summary s = summarize({record("nug12", 1.5, 0)});
  ASSERT_EQ(s.instances.size(), 1u);
  EXPECT_EQ(s.instances[0].min_gap, 1.5);
  EXPECT_EQ(s.instances[0].mean_gap, 1.5);
  EXPECT_EQ(s.instances[0].max_gap, 1.5);
}

TEST(Summarize, MeanOfPerInstanceStatistics) {
  const std::vector<RunRecord> rs{record("nug12", 0, 0), record("nug12", 2, 1),
                                  record("nug14", 4, 0), record("nug14", 4, 1)};
  const Summary s = summarize(rs);
  ASSERT_EQ(s.groups.size(), 1u);
  EXPECT_EQ(s.groups[0].group, "plma/nug");
  EXPECT_EQ(s.groups[0].instances, 2);
  EXPECT_DOUBLE_EQ(s.groups[0].mean_mean_gap, 2.5);
  EXPECT_DOUBLE_EQ(s.groups[0].mean_min_gap, 2.0);
  EXPECT_DOUBLE_EQ(s.groups[0].mean_max_gap, 3.0);
  EXPECT_EQ(summarize(parse_jsonl(to_jsonl(rs))), s);
  EXPECT_NE(format_summary(s).find("plma/nug"), std::string::npos);
  EXPECT_EQ(summary_json(s)["groups"].size(), 1u);
}

TEST(Summarize, SeparatesMethodsAndSkipsFailures) {
  std::vector<RunRecord> rs{record("nug12", 1, 0), record("nug12", 3, 0, "ipfp")};
  RunRecord bad = record("nug12", 50, 1);
  bad.error = "failed";
  rs.push_back(bad);
  const Summary s = summarize(rs);
  EXPECT_EQ(s.groups.size(), 2u);
  for (const auto& i : s.instances) EXPECT_EQ(i.runs, 1);
  EXPECT_THROW(summarize({}), std::invalid_argument);
}

TEST(ConfigHash, SemanticFieldsOnly) {
  const json base = {{"command", "solve"},
                     {"method", "ipfp"},
                     {"instances", {"uniform:6:1"}},
                     {"seeds", {0, 1}}};
  json other_seeds = base;
  other_seeds["seeds"] = {5};
  other_seeds["output"] = "/tmp/x.jsonl";
  EXPECT_EQ(config_hash(base), config_hash(other_seeds));
  json explicit_default = base;
  explicit_default["params"] = {{"max_iters", 100}};
  EXPECT_EQ(config_hash(base), config_hash(explicit_default));
  json changed = base;
  changed["params"] = {{"max_iters", 50}};
  EXPECT_NE(config_hash(base), config_hash(changed));
  EXPECT_EQ(config_hash(base).size(), 16u);
}

TEST(ResolveConfig, RejectsBadSchemas) {
  EXPECT_THROW(resolve_config({{"command", "dance"}}), ConfigError);
  EXPECT_THROW(resolve_config({{"command", "solve"}, {"bogus", 1}}), ConfigError);
  EXPECT_THROW(resolve_config({{"command", "solve"}, {"params", {{"epochz", 3}}}}), ConfigError);
  EXPECT_THROW(resolve_config({{"command", "solve"}, {"params", {{"epochs", "many"}}}}),
               ConfigError);
  EXPECT_THROW(resolve_config({{"command", "solve"}, {"seeds", {-1}}}), ConfigError);
  EXPECT_THROW(resolve_config({{"command", "baseline"}, {"method", "plma"}}), ConfigError);
}

TEST(ResolveSource, Kinds) {
  const std::string data = default_data_dir();
  const SuiteItem q = resolve_source("qaplib:nug12", data);
  ASSERT_TRUE(q.qap.has_value());
  EXPECT_EQ(q.qap->best_known, 578.0);
  const SuiteItem u = resolve_source("uniform:7:3", data);
  EXPECT_EQ(u.label, "uniform7_3");
  EXPECT_EQ(u.qap->n, 7);
  EXPECT_TRUE(resolve_source("graph:cycle:9", data).graph.has_value());
  EXPECT_THROW(resolve_source("qaplib:nope99", data), std::runtime_error);
  EXPECT_THROW(resolve_source("ftp:whatever", data), ConfigError);
}

TEST(RunSuite, EmptyInstanceList) {
  EXPECT_TRUE(run_suite({{"command", "solve"}, {"instances", json::array()}}).empty());
}

TEST(RunSuite, TenSeedsShareHash) {
  json cfg = {{"command", "solve"},
              {"method", "ipfp"},
              {"instances", {"uniform:8:2"}},
              {"seeds", {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}}};
  const auto rs = run_suite(cfg);
  ASSERT_EQ(rs.size(), 10u);
  std::set<std::uint64_t> seeds;
  for (const auto& r : rs) {
    seeds.insert(r.seed);
    EXPECT_EQ(r.config_hash, rs[0].config_hash);
    EXPECT_FALSE(r.failed());
  }
  EXPECT_EQ(seeds.size(), 10u);
}

TEST(RunSuite, SkipsExistingUnlessForced) {
  const fs::path out = temp_path("skip.jsonl");
  json cfg = {{"command", "solve"},
              {"method", "ipfp"},
              {"instances", {"uniform:6:1"}},
              {"seeds", {0, 1}},
              {"output", out.string()}};
  int computed = 0;
  SuiteOptions opts;
  opts.on_record = [&](const RunRecord&) { ++computed; };
  const auto first = run_suite(cfg, opts);
  EXPECT_EQ(computed, 2);
  const auto second = run_suite(cfg, opts);
  EXPECT_EQ(computed, 2);
  EXPECT_EQ(second.size(), 2u);
  EXPECT_EQ(read_records(out.string()).size(), 2u);
  opts.force = true;
  run_suite(cfg, opts);
  EXPECT_EQ(computed, 4);
  EXPECT_EQ(read_records(out.string()).size(), 4u);
}

TEST(RunSuite, UnknownInstanceFails) {
  EXPECT_THROW(run_suite({{"command", "solve"}, {"instances", {"file:/no/such/file.dat"}}}),
               std::runtime_error);
}

TEST(RunSuite, Nug12FinetuneDefaultsReachesOptimum) {
  const auto rs = run_suite({{"command", "finetune"}, {"instances", {"qaplib:nug12"}}});
  ASSERT_EQ(rs.size(), 1u);
  ASSERT_FALSE(rs[0].failed()) << rs[0].error;
  ASSERT_TRUE(rs[0].gap.has_value());
  EXPECT_EQ(*rs[0].gap, 0.0);
  EXPECT_EQ(rs[0].reference, 578.0);
}

TEST(RunSuite, BandwidthWritesArtifacts) {
  const fs::path dir = fs::temp_directory_path() / "plma_test_bm";
  fs::remove_all(dir);
  const auto rs = run_suite({{"command", "bm"},
                             {"instances", {"graph:cycle:12"}},
                             {"artifacts", dir.string()}});
  ASSERT_EQ(rs.size(), 1u);
  EXPECT_EQ(rs[0].cost, 2.0);
  EXPECT_TRUE(fs::exists(dir / "C12.s0.perm"));
  EXPECT_TRUE(fs::exists(dir / "C12.s0.json"));
}
