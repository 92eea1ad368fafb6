#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "gridnet/domains.hpp"
#include "gridnet/io.hpp"
#include "gridnet/network.hpp"
#include "gridnet/stats.hpp"
#include "gridnet/synthetic.hpp"

#include "../tools/cli_app.hpp"

namespace fs = std::filesystem;
using namespace gridnet;

namespace {

int run(std::vector<std::string> args) { return cli_main(args); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SyntheticSpec tiny_spec(double variance) {
  SyntheticSpec s;
  s.rows = 9;
  s.cols = 11;
  s.T = 400;
  s.n_mothers = 2;
  s.phi = 0.3;
  s.noise_variance = 1.0;
  s.decorrelate_lags = 10;
  s.rng_seed = 17;
  s.domains = {
      {4.0, 2.5, 1.5, 3.5, variance, {{0, 1.0, 0}}},
      {4.0, 8.0, 1.5, 3.5, variance, {{1, 1.0, 0}}},
  };
  return s;
}

// One shared scene directory per process: <tmp>/scene/{spec.json, field/...}
struct SceneFixture {
  fs::path root, field, spec_file;

  SceneFixture() {
    root = fs::temp_directory_path() /
           ("gridnet_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(root);
    spec_file = root / "scene_spec.json";
    write_json(spec_to_json(tiny_spec(4.0)), spec_file);
    REQUIRE(run({"gen-synthetic", "--spec", spec_file.string(), "--out",
                 (root / "scene").string()}) == 0);
    field = root / "scene" / "field";
  }
};

SceneFixture& scene() {
  static SceneFixture f;
  return f;
}

}  // namespace

TEST_CASE("usage errors exit with code 2") {
  CHECK(run({}) == 2);                                   // no subcommand
  CHECK(run({"no-such-command"}) == 2);
  CHECK(run({"domains", "--bogus-flag"}) == 2);
  CHECK(run({"gen-synthetic"}) == 2);                    // missing --out
  CHECK(run({"--version"}) == 0);
}

TEST_CASE("gen-synthetic writes a complete scene with a manifest") {
  SceneFixture& fx = scene();
  CHECK(fs::exists(fx.root / "scene" / "spec.json"));
  CHECK(fs::exists(fx.root / "scene" / "ground_truth.json"));
  CHECK(fs::exists(fx.field / "header.json"));
  CHECK(fs::exists(fx.field / "field.f64"));

  nlohmann::json man = read_json(fx.root / "scene" / "manifest.json");
  CHECK(man["command"] == "gen-synthetic");
  REQUIRE(man.contains("outputs"));
  for (auto& [name, hash] : man["outputs"].items())
    CHECK(file_hash_hex(fx.root / "scene" / name) == hash.get<std::string>());

  // rerun without --force refuses, with --force succeeds
  CHECK(run({"gen-synthetic", "--spec", fx.spec_file.string(), "--out",
             (fx.root / "scene").string()}) == 2);
  CHECK(run({"gen-synthetic", "--spec", fx.spec_file.string(), "--out",
             (fx.root / "scene").string(), "--force"}) == 0);
}

TEST_CASE("estimate-delta reports a plausible threshold") {
  SceneFixture& fx = scene();
  fs::path out = fx.root / "delta.json";
  CHECK(run({"estimate-delta", "--in", fx.field.string(), "--alpha", "0.01",
             "--pairs", "500", "--seed", "3", "--out", out.string()}) == 0);
  nlohmann::json j = read_json(out);
  double delta = j["delta"].get<double>();
  CHECK(delta > 0.0);
  CHECK(delta < 1.0);
  CHECK(j["n_significant"].get<int>() >= 20);
}

TEST_CASE("a field with no coherent signal exits with code 4") {
  SceneFixture& fx = scene();
  fs::path spec_file = fx.root / "weak_spec.json";
  write_json(spec_to_json(tiny_spec(1e-4)), spec_file);
  REQUIRE(run({"gen-synthetic", "--spec", spec_file.string(), "--out",
               (fx.root / "weak").string()}) == 0);
  CHECK(run({"estimate-delta", "--in", (fx.root / "weak" / "field").string(),
             "--alpha", "0.0000001", "--pairs", "500"}) == 4);
  // an impossible threshold drains the domain search the same way
  CHECK(run({"domains", "--in", fx.field.string(), "--out",
             (fx.root / "nodom").string(), "--delta", "0.99"}) == 4);
  // the empty result is still written for inspection
  DomainSet empty = domains_from_json(read_json(fx.root / "nodom" /
                                                "domains.json"));
  CHECK(empty.domains.empty());
}

TEST_CASE("domains finds the two planted regions") {
  SceneFixture& fx = scene();
  fs::path out = fx.root / "dom";
  CHECK(run({"domains", "--in", fx.field.string(), "--out", out.string(),
             "--delta", "0.55", "--k", "4"}) == 0);
  CHECK(fs::exists(out / "homogeneity_field.csv"));
  CHECK(fs::exists(out / "domain_map.csv"));
  CHECK(fs::exists(out / "manifest.json"));
  DomainSet ds = domains_from_json(read_json(out / "domains.json"));
  CHECK(ds.domains.size() == 2);
  CHECK(ds.delta == 0.55);
  CHECK(ds.K == 4);
}

TEST_CASE("domain argument validation") {
  SceneFixture& fx = scene();
  fs::path out = fx.root / "dom_bad";
  CHECK(run({"domains", "--in", fx.field.string(), "--out", out.string(),
             "--delta", "0.5", "--alpha", "0.01"}) == 2);
  CHECK(run({"domains", "--in", fx.field.string(), "--out", out.string()}) ==
        2);  // neither threshold
  CHECK(run({"domains", "--in", (fx.root / "missing").string(), "--out",
             out.string(), "--delta", "0.5"}) == 3);
}

TEST_CASE("network and analyze consume the domain output") {
  SceneFixture& fx = scene();
  fs::path dom = fx.root / "dom";  // produced above; rebuild if absent
  if (!fs::exists(dom / "domains.json"))
    REQUIRE(run({"domains", "--in", fx.field.string(), "--out", dom.string(),
                 "--delta", "0.55", "--k", "4"}) == 0);

  fs::path net = fx.root / "net";
  CHECK(run({"network", "--in", fx.field.string(), "--domains",
             (dom / "domains.json").string(), "--out", net.string(),
             "--tau-max", "10", "--q", "0.05"}) == 0);
  CHECK(fs::exists(net / "edges.csv"));
  DomainNetwork n = network_from_json(read_json(net / "network.json"));
  CHECK(n.tau_max == 10);
  CHECK(n.q == 0.05);
  CHECK(n.nodes.size() == 2);
  CHECK(n.M == 21);  // one pair, 21 lags

  CHECK(run({"analyze", "--network", (net / "network.json").string(),
             "--domains", (dom / "domains.json").string(), "--out",
             (fx.root / "ana").string()}) == 0);
  nlohmann::json rep = read_json(fx.root / "ana" / "analysis.json");
  CHECK(rep.contains("balance"));
  CHECK(rep.contains("k_core"));
  CHECK(rep["stats"]["n_nodes"] == 2);

  CHECK(run({"network", "--in", fx.field.string(), "--domains",
             (fx.root / "absent.json").string(), "--out",
             (fx.root / "net_bad").string()}) == 3);
}

TEST_CASE("the pipeline runs end to end and hashes its outputs") {
  SceneFixture& fx = scene();
  fs::path out = fx.root / "pipe";
  CHECK(run({"pipeline", "--in", fx.field.string(), "--out", out.string(),
             "--delta", "0.55", "--k", "4", "--tau-max", "10", "--q", "0.05",
             "--center"}) == 0);
  for (const char* name :
       {"domains.json", "homogeneity_field.csv", "domain_map.csv",
        "network.json", "edges.csv", "analysis.json", "manifest.json"})
    CHECK(fs::exists(out / name));

  nlohmann::json man = read_json(out / "manifest.json");
  CHECK(man["command"] == "pipeline");
  CHECK(man["parameters"]["delta"] == 0.55);
  REQUIRE(man.contains("outputs"));
  CHECK(man["outputs"].size() >= 6);
  for (auto& [name, hash] : man["outputs"].items())
    CHECK(file_hash_hex(out / name) == hash.get<std::string>());
}

TEST_CASE("worker count does not change the results") {
  SceneFixture& fx = scene();
  fs::path a = fx.root / "thr1";
  fs::path b = fx.root / "thr4";
  REQUIRE(run({"domains", "--in", fx.field.string(), "--out", a.string(),
               "--delta", "0.55", "--k", "4", "--threads", "1"}) == 0);
  REQUIRE(run({"domains", "--in", fx.field.string(), "--out", b.string(),
               "--delta", "0.55", "--k", "4", "--threads", "4"}) == 0);
  CHECK(slurp(a / "domains.json") == slurp(b / "domains.json"));
  CHECK(slurp(a / "homogeneity_field.csv") == slurp(b / "homogeneity_field.csv"));
  CHECK(slurp(a / "domain_map.csv") == slurp(b / "domain_map.csv"));
}

TEST_CASE("preprocess centering removes per-cell means") {
  SceneFixture& fx = scene();
  fs::path out = fx.root / "pre";
  CHECK(run({"preprocess", "--in", fx.field.string(), "--out", out.string(),
             "--center"}) == 0);
  Field f = read_field(out);
  for (int c = 0; c < f.n_cells(); c += 7)
    CHECK(std::abs(series_mean(f.series(c))) < 1e-9);
  REQUIRE(!f.preprocessing_log.empty());
}
