#include "cli_app.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gridnet/analysis.hpp"
#include "gridnet/delta.hpp"
#include "gridnet/domains.hpp"
#include "gridnet/errors.hpp"
#include "gridnet/io.hpp"
#include "gridnet/network.hpp"
#include "gridnet/preprocess.hpp"
#include "gridnet/similarity.hpp"
#include "gridnet/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------- plumbing

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    auto d = std::chrono::steady_clock::now() - start_;
    return std::chrono::duration<double, std::milli>(d).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Manifest collected while a subcommand runs; written last so it can carry
// content hashes of everything else.
struct Manifest {
  std::string command;
  json parameters = json::object();
  json timings = json::object();
  std::vector<fs::path> outputs;

  void add(const fs::path& p) { outputs.push_back(p); }

  void write(const fs::path& dir) const {
    json j;
    j["command"] = command;
    j["version"] = kVersion;
    j["parameters"] = parameters;
    j["timings_ms"] = timings;
    json outs = json::object();
    for (const fs::path& p : outputs)
      outs[fs::relative(p, dir).generic_string()] = gridnet::file_hash_hex(p);
    j["outputs"] = outs;
    gridnet::write_json(j, dir / "manifest.json");
  }
};

void guard_overwrite(const fs::path& p, bool force) {
  if (!force && fs::exists(p))
    throw gridnet::config_error("refusing to overwrite " + p.string() +
                                " (pass --force to allow)");
}

void apply_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

gridnet::Field load_field(const fs::path& in) {
  if (!fs::exists(in))
    throw gridnet::data_error("no such field: " + in.string());
  return gridnet::read_field(in);
}

void write_homogeneity_csv(const gridnet::GridGraph& g,
                           const std::vector<double>& h, const fs::path& file) {
  std::FILE* out = std::fopen(file.string().c_str(), "w");
  if (!out) throw gridnet::data_error("cannot open for writing: " + file.string());
  std::fprintf(out, "cell,row,col,homogeneity\n");
  for (int c = 0; c < g.n_cells; ++c) {
    if (g.is_lattice())
      std::fprintf(out, "%d,%d,%d,", c, g.cell_row[c], g.cell_col[c]);
    else
      std::fprintf(out, "%d,,,", c);
    std::fprintf(out, "%.17g\n", h[c]);
  }
  std::fclose(out);
}

gridnet::SignalMode parse_signal_mode(const std::string& s) {
  if (s == "mean") return gridnet::SignalMode::mean;
  if (s == "area" || s == "area_weighted_sum")
    return gridnet::SignalMode::area_weighted_sum;
  throw gridnet::config_error("unknown signal mode: " + s);
}

// ------------------------------------------------------------- subcommands

struct GenArgs {
  std::string out;
  std::string spec_file;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool force = false;
  int threads = 0;
};

int run_gen(const GenArgs& a) {
  apply_threads(a.threads);
  gridnet::SyntheticSpec spec = a.spec_file.empty()
                                    ? gridnet::default_synthetic_spec()
                                    : gridnet::spec_from_json(
                                          gridnet::read_json(a.spec_file));
  if (a.seed_given) spec.rng_seed = a.seed;

  fs::path out(a.out);
  guard_overwrite(out / "spec.json", a.force);
  guard_overwrite(out / "field" / "header.json", a.force);
  fs::create_directories(out / "field");

  Manifest man;
  man.command = "gen-synthetic";
  man.parameters = gridnet::spec_to_json(spec);

  Stopwatch total;
  auto [field, truth] = gridnet::render_field(spec);
  man.timings["render"] = total.ms();

  Stopwatch io;
  gridnet::write_json(gridnet::spec_to_json(spec), out / "spec.json");
  gridnet::write_json(gridnet::ground_truth_to_json(truth),
                      out / "ground_truth.json");
  gridnet::write_field(field, out / "field");
  man.timings["write"] = io.ms();
  man.timings["total"] = total.ms();

  man.add(out / "spec.json");
  man.add(out / "ground_truth.json");
  man.add(out / "field" / "header.json");
  man.add(out / "field" / "field.f64");
  man.write(out);
  std::cout << "synthetic field: " << field.n_cells() << " cells, T="
            << field.T << ", " << truth.extent.size() << " planted domains\n";
  return 0;
}

struct PreprocessArgs {
  std::string in, out;
  int deseasonalize = 0;
  bool detrend = false;
  bool center = false;
  bool force = false;
  int threads = 0;
};

int run_preprocess(const PreprocessArgs& a) {
  apply_threads(a.threads);
  gridnet::Field f = load_field(a.in);
  fs::path out(a.out);
  guard_overwrite(out / "header.json", a.force);

  Manifest man;
  man.command = "preprocess";
  man.parameters = {{"in", a.in},
                    {"deseasonalize", a.deseasonalize},
                    {"detrend", a.detrend},
                    {"center", a.center}};
  Stopwatch total;
  if (a.deseasonalize > 0) gridnet::deseasonalize(f, a.deseasonalize);
  if (a.detrend) gridnet::theil_sen_detrend(f);
  if (a.center) gridnet::center(f);
  man.timings["transform"] = total.ms();

  fs::create_directories(out);
  gridnet::write_field(f, out);
  man.timings["total"] = total.ms();
  man.add(out / "header.json");
  man.add(out / "field.f64");
  man.write(out);
  std::cout << "preprocessed " << f.n_cells() << " cells";
  for (const auto& step : f.preprocessing_log) std::cout << " | " << step;
  std::cout << "\n";
  return 0;
}

struct DeltaArgs {
  std::string in, out;
  double alpha = 0.01;
  int pairs = 10000;
  std::uint64_t seed = 1;
  bool force = false;
  int threads = 0;
};

json delta_to_json(const gridnet::DeltaEstimate& est) {
  return {{"delta", est.delta},
          {"alpha", est.alpha},
          {"n_pairs_sampled", est.n_pairs_sampled},
          {"n_significant", est.n_significant},
          {"rng_seed", est.rng_seed}};
}

int run_estimate_delta(const DeltaArgs& a) {
  apply_threads(a.threads);
  gridnet::Field f = load_field(a.in);
  gridnet::DeltaEstimate est =
      gridnet::estimate_delta(f, a.alpha, a.pairs, a.seed);
  json j = delta_to_json(est);
  std::cout << j.dump(2) << "\n";
  if (!a.out.empty()) {
    guard_overwrite(a.out, a.force);
    gridnet::write_json(j, a.out);
  }
  return 0;
}

struct DomainsArgs {
  std::string in, out;
  double delta = 0.0;
  bool delta_given = false;
  double alpha = 0.01;
  bool alpha_given = false;
  int K = 4;
  int pairs = 10000;
  std::uint64_t seed = 1;
  bool force = false;
  int threads = 0;
};

int run_domains(const DomainsArgs& a) {
  apply_threads(a.threads);
  if (a.delta_given == a.alpha_given)
    throw gridnet::config_error("give exactly one of --delta and --alpha");
  gridnet::Field f = load_field(a.in);
  fs::path out(a.out);
  guard_overwrite(out / "domains.json", a.force);
  fs::create_directories(out);

  Manifest man;
  man.command = "domains";
  man.parameters = {{"in", a.in}, {"K", a.K}, {"rng_seed", a.seed}};

  Stopwatch total;
  gridnet::CorrelationEngine eng(f);
  double delta = a.delta;
  if (a.alpha_given) {
    Stopwatch sw;
    gridnet::DeltaEstimate est =
        gridnet::estimate_delta(eng, a.alpha, a.pairs, a.seed);
    delta = est.delta;
    man.timings["estimate_delta"] = sw.ms();
    man.parameters["alpha"] = a.alpha;
    man.parameters["n_pairs"] = a.pairs;
    gridnet::write_json(delta_to_json(est), out / "delta.json");
    man.add(out / "delta.json");
  }
  man.parameters["delta"] = delta;

  Stopwatch hsw;
  std::vector<double> hfield =
      gridnet::homogeneity_field(eng, *f.grid, a.K);
  man.timings["homogeneity_field"] = hsw.ms();

  Stopwatch dsw;
  gridnet::DomainSet domains =
      gridnet::identify_domains(eng, *f.grid, a.K, delta);
  man.timings["identify"] = dsw.ms();

  gridnet::write_json(gridnet::domains_to_json(domains), out / "domains.json");
  write_homogeneity_csv(*f.grid, hfield, out / "homogeneity_field.csv");
  gridnet::write_domains_csv(domains, *f.grid, out / "domain_map.csv");
  man.timings["total"] = total.ms();
  man.add(out / "domains.json");
  man.add(out / "homogeneity_field.csv");
  man.add(out / "domain_map.csv");
  man.write(out);

  std::cout << domains.domains.size() << " domains at delta=" << delta
            << ", K=" << a.K << "\n";
  if (domains.domains.empty())
    throw gridnet::no_signal_error("no domains found (threshold too strict?)");
  return 0;
}

struct NetworkArgs {
  std::string in, domains_file, out;
  int tau_max = 20;
  double q = 0.10;
  std::string signal = "mean";
  bool unbiased = false;
  bool conservative = false;
  bool average_weight = false;
  std::string correlograms = "edges";
  bool force = false;
  int threads = 0;
};

void export_correlograms(const gridnet::DomainNetwork& net,
                         const std::vector<gridnet::DomainSignal>& signals,
                         const gridnet::NetworkOptions& opt,
                         const std::string& which, const fs::path& dir,
                         Manifest& man) {
  if (which == "none") return;
  fs::create_directories(dir);
  auto find_signal = [&](int id) -> const gridnet::DomainSignal& {
    for (const auto& s : signals)
      if (s.domain_id == id) return s;
    throw gridnet::data_error("edge references unknown domain " +
                              std::to_string(id));
  };
  auto emit = [&](int i, int j) {
    gridnet::Correlogram c =
        gridnet::pair_correlogram(find_signal(i).values, find_signal(j).values,
                                  opt.tau_max, opt.unbiased_lagged);
    // Rebuild the significance flags from the published edge, mirrored back
    // into the (i, j) orientation when the edge is stored the other way.
    for (const gridnet::Edge& e : net.edges) {
      if (!((e.src == i && e.dst == j) || (e.src == j && e.dst == i)))
        continue;
      bool mirrored = e.src == j;
      auto mark = [&](int tau) {
        int t = mirrored ? -tau : tau;
        c.significant[c.index(t)] = 1;
      };
      for (int tau = e.lag_lo; tau <= e.lag_hi; ++tau) mark(tau);
      for (int tau : e.extra_significant_lags) mark(tau);
    }
    char name[64];
    std::snprintf(name, sizeof name, "correlogram_%d_%d.csv", i, j);
    gridnet::write_correlogram_csv(c, dir / name);
    man.add(dir / name);
  };
  if (which == "edges") {
    for (const gridnet::Edge& e : net.edges)
      emit(std::min(e.src, e.dst), std::max(e.src, e.dst));
  } else if (which == "all") {
    for (std::size_t i = 0; i < signals.size(); ++i)
      for (std::size_t j = i + 1; j < signals.size(); ++j)
        emit(signals[i].domain_id, signals[j].domain_id);
  } else {
    throw gridnet::config_error("unknown correlogram selection: " + which);
  }
}

int run_network(const NetworkArgs& a) {
  apply_threads(a.threads);
  gridnet::Field f = load_field(a.in);
  gridnet::DomainSet domains =
      gridnet::domains_from_json(gridnet::read_json(a.domains_file));
  for (const auto& d : domains.domains)
    for (int c : d.cells)
      if (c < 0 || c >= f.n_cells())
        throw gridnet::data_error("domain cell " + std::to_string(c) +
                                  " outside the field");
  fs::path out(a.out);
  guard_overwrite(out / "network.json", a.force);
  fs::create_directories(out);

  gridnet::NetworkOptions opt;
  opt.tau_max = a.tau_max;
  opt.q = a.q;
  opt.mode = parse_signal_mode(a.signal);
  opt.unbiased_lagged = a.unbiased;
  opt.conservative_fdr = a.conservative;
  opt.average_weight_over_range = a.average_weight;
  if (f.T > 0 && 4 * a.tau_max > f.T)
    std::cerr << "warning: tau_max above T/4, lag variances get noisy\n";

  Manifest man;
  man.command = "network";
  man.parameters = {{"in", a.in},
                    {"domains", a.domains_file},
                    {"tau_max", a.tau_max},
                    {"q", a.q},
                    {"signal", a.signal},
                    {"unbiased", a.unbiased},
                    {"conservative", a.conservative},
                    {"average_weight", a.average_weight}};

  Stopwatch total;
  std::vector<gridnet::DomainSignal> signals;
  for (const auto& d : domains.domains)
    signals.push_back(gridnet::domain_signal(f, d, opt.mode));
  gridnet::DomainNetwork net = gridnet::infer_network(signals, opt);
  man.timings["infer"] = total.ms();

  gridnet::write_json(gridnet::network_to_json(net), out / "network.json");
  gridnet::write_edges_csv(net, out / "edges.csv");
  man.add(out / "network.json");
  man.add(out / "edges.csv");
  export_correlograms(net, signals, opt, a.correlograms,
                      out / "correlograms", man);
  man.timings["total"] = total.ms();
  man.write(out);

  std::cout << net.edges.size() << " edges among " << net.nodes.size()
            << " domains (q=" << a.q << ", tau_max=" << a.tau_max << ")\n";
  return 0;
}

struct AnalyzeArgs {
  std::string network_file, domains_file, out;
  bool force = false;
  int threads = 0;
};

int run_analyze(const AnalyzeArgs& a) {
  apply_threads(a.threads);
  gridnet::DomainNetwork net =
      gridnet::network_from_json(gridnet::read_json(a.network_file));
  gridnet::DomainSet domains =
      gridnet::domains_from_json(gridnet::read_json(a.domains_file));
  fs::path out(a.out);
  guard_overwrite(out / "analysis.json", a.force);
  fs::create_directories(out);

  Manifest man;
  man.command = "analyze";
  man.parameters = {{"network", a.network_file}, {"domains", a.domains_file}};
  Stopwatch total;
  json report = gridnet::analysis_report(net, domains);
  gridnet::write_json(report, out / "analysis.json");
  man.timings["total"] = total.ms();
  man.add(out / "analysis.json");
  man.write(out);

  const auto& st = report["stats"];
  std::cout << "analysis: " << st["n_nodes"] << " nodes, " << st["n_edges"]
            << " edges, all_balanced="
            << report["balance"]["all_balanced"].get<bool>() << "\n";
  return 0;
}

struct PipelineArgs {
  DomainsArgs dom;
  NetworkArgs netw;
  PreprocessArgs pre;
  std::string in, out;
  bool force = false;
  int threads = 0;
};

int run_pipeline(const PipelineArgs& a) {
  apply_threads(a.threads);
  if (a.dom.delta_given == a.dom.alpha_given)
    throw gridnet::config_error("give exactly one of --delta and --alpha");
  gridnet::Field f = load_field(a.in);
  fs::path out(a.out);
  guard_overwrite(out / "manifest.json", a.force);
  fs::create_directories(out);

  Manifest man;
  man.command = "pipeline";
  man.parameters = {{"in", a.in},
                    {"K", a.dom.K},
                    {"tau_max", a.netw.tau_max},
                    {"q", a.netw.q},
                    {"signal", a.netw.signal},
                    {"rng_seed", a.dom.seed},
                    {"deseasonalize", a.pre.deseasonalize},
                    {"detrend", a.pre.detrend},
                    {"center", a.pre.center}};
  Stopwatch total;

  bool preprocessed =
      a.pre.deseasonalize > 0 || a.pre.detrend || a.pre.center;
  if (preprocessed) {
    Stopwatch sw;
    if (a.pre.deseasonalize > 0) gridnet::deseasonalize(f, a.pre.deseasonalize);
    if (a.pre.detrend) gridnet::theil_sen_detrend(f);
    if (a.pre.center) gridnet::center(f);
    fs::create_directories(out / "field");
    gridnet::write_field(f, out / "field");
    man.add(out / "field" / "header.json");
    man.add(out / "field" / "field.f64");
    man.timings["preprocess"] = sw.ms();
  }

  gridnet::CorrelationEngine eng(f);
  double delta = a.dom.delta;
  if (a.dom.alpha_given) {
    Stopwatch sw;
    gridnet::DeltaEstimate est =
        gridnet::estimate_delta(eng, a.dom.alpha, a.dom.pairs, a.dom.seed);
    delta = est.delta;
    man.timings["estimate_delta"] = sw.ms();
    gridnet::write_json(delta_to_json(est), out / "delta.json");
    man.add(out / "delta.json");
  }
  man.parameters["delta"] = delta;

  Stopwatch hsw;
  std::vector<double> hfield =
      gridnet::homogeneity_field(eng, *f.grid, a.dom.K);
  man.timings["homogeneity_field"] = hsw.ms();
  Stopwatch dsw;
  gridnet::DomainSet domains =
      gridnet::identify_domains(eng, *f.grid, a.dom.K, delta);
  man.timings["identify"] = dsw.ms();

  gridnet::write_json(gridnet::domains_to_json(domains), out / "domains.json");
  write_homogeneity_csv(*f.grid, hfield, out / "homogeneity_field.csv");
  gridnet::write_domains_csv(domains, *f.grid, out / "domain_map.csv");
  man.add(out / "domains.json");
  man.add(out / "homogeneity_field.csv");
  man.add(out / "domain_map.csv");

  if (domains.domains.empty()) {
    man.timings["total"] = total.ms();
    man.write(out);
    throw gridnet::no_signal_error("no domains found, stopping the pipeline");
  }

  gridnet::NetworkOptions opt;
  opt.tau_max = a.netw.tau_max;
  opt.q = a.netw.q;
  opt.mode = parse_signal_mode(a.netw.signal);
  opt.unbiased_lagged = a.netw.unbiased;
  opt.conservative_fdr = a.netw.conservative;
  opt.average_weight_over_range = a.netw.average_weight;

  Stopwatch nsw;
  std::vector<gridnet::DomainSignal> signals;
  for (const auto& d : domains.domains)
    signals.push_back(gridnet::domain_signal(f, d, opt.mode));
  gridnet::DomainNetwork net = gridnet::infer_network(signals, opt);
  man.timings["network"] = nsw.ms();
  gridnet::write_json(gridnet::network_to_json(net), out / "network.json");
  gridnet::write_edges_csv(net, out / "edges.csv");
  man.add(out / "network.json");
  man.add(out / "edges.csv");
  export_correlograms(net, signals, opt, a.netw.correlograms,
                      out / "correlograms", man);

  Stopwatch asw;
  json report = gridnet::analysis_report(net, domains);
  gridnet::write_json(report, out / "analysis.json");
  man.timings["analyze"] = asw.ms();
  man.add(out / "analysis.json");

  man.timings["total"] = total.ms();
  man.write(out);
  std::cout << "pipeline: " << domains.domains.size() << " domains, "
            << net.edges.size() << " edges -> " << out.string() << "\n";
  return 0;
}

void add_common(CLI::App* cmd, int* threads, bool* force) {
  cmd->add_option("--threads,--parallelism", *threads,
                  "worker count (0 = all available cores)");
  cmd->add_flag("--force", *force, "overwrite existing outputs");
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"spatio-temporal domain and network analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  GenArgs gen;
  auto* cgen = app.add_subcommand("gen-synthetic",
                                  "render the built-in synthetic scene");
  cgen->add_option("--out", gen.out, "output directory")->required();
  cgen->add_option("--spec", gen.spec_file, "scene description JSON");
  auto* seed_opt =
      cgen->add_option("--seed", gen.seed, "override the scene rng seed");
  add_common(cgen, &gen.threads, &gen.force);

  PreprocessArgs pre;
  auto* cpre = app.add_subcommand("preprocess",
                                  "deseasonalize / detrend / center a field");
  cpre->add_option("--in", pre.in, "input field directory")->required();
  cpre->add_option("--out", pre.out, "output field directory")->required();
  cpre->add_option("--deseasonalize", pre.deseasonalize,
                   "seasonal period to remove (0 = off)");
  cpre->add_flag("--detrend", pre.detrend, "remove per-cell Theil-Sen trend");
  cpre->add_flag("--center", pre.center, "remove per-cell temporal mean");
  add_common(cpre, &pre.threads, &pre.force);

  DeltaArgs del;
  auto* cdel = app.add_subcommand("estimate-delta",
                                  "data-driven homogeneity threshold");
  cdel->add_option("--in", del.in, "input field directory")->required();
  cdel->add_option("--alpha", del.alpha, "per-pair significance level");
  cdel->add_option("--pairs", del.pairs, "random pair sample size");
  cdel->add_option("--seed", del.seed, "rng seed");
  cdel->add_option("--out", del.out, "also write the estimate JSON here");
  add_common(cdel, &del.threads, &del.force);

  DomainsArgs dom;
  auto* cdom = app.add_subcommand("domains", "identify functional domains");
  cdom->add_option("--in", dom.in, "input field directory")->required();
  cdom->add_option("--out", dom.out, "output directory")->required();
  auto* ddel = cdom->add_option("--delta", dom.delta,
                                "homogeneity threshold");
  auto* dalp = cdom->add_option("--alpha", dom.alpha,
                                "estimate the threshold at this level");
  ddel->excludes(dalp);
  cdom->add_option("--k", dom.K, "neighborhood size K");
  cdom->add_option("--pairs", dom.pairs, "sample size for --alpha");
  cdom->add_option("--seed", dom.seed, "rng seed");
  add_common(cdom, &dom.threads, &dom.force);

  NetworkArgs netw;
  auto* cnet = app.add_subcommand("network", "infer the domain network");
  cnet->add_option("--in", netw.in, "input field directory")->required();
  cnet->add_option("--domains", netw.domains_file, "domains.json path")
      ->required();
  cnet->add_option("--out", netw.out, "output directory")->required();
  cnet->add_option("--tau-max", netw.tau_max, "maximum lag");
  cnet->add_option("--q", netw.q, "FDR level");
  cnet->add_option("--signal", netw.signal,
                   "domain signal: mean | area_weighted_sum");
  cnet->add_flag("--unbiased", netw.unbiased,
                 "divide lagged correlations by T-|tau| instead of T");
  cnet->add_flag("--conservative", netw.conservative,
                 "FDR valid under arbitrary dependence");
  cnet->add_flag("--average-weight", netw.average_weight,
                 "weight from the mean correlation over the lag range");
  cnet->add_option("--correlograms", netw.correlograms,
                   "export correlograms: none | edges | all");
  add_common(cnet, &netw.threads, &netw.force);

  AnalyzeArgs ana;
  auto* cana = app.add_subcommand("analyze", "signed/lag network analysis");
  cana->add_option("--network", ana.network_file, "network.json path")
      ->required();
  cana->add_option("--domains", ana.domains_file, "domains.json path")
      ->required();
  cana->add_option("--out", ana.out, "output directory")->required();
  add_common(cana, &ana.threads, &ana.force);

  PipelineArgs pipe;
  auto* cpipe = app.add_subcommand(
      "pipeline", "preprocess, threshold, domains, network, analysis");
  cpipe->add_option("--in", pipe.in, "input field directory")->required();
  cpipe->add_option("--out", pipe.out, "output directory")->required();
  auto* pdel =
      cpipe->add_option("--delta", pipe.dom.delta, "homogeneity threshold");
  auto* palp = cpipe->add_option("--alpha", pipe.dom.alpha,
                                 "estimate the threshold at this level");
  pdel->excludes(palp);
  cpipe->add_option("--k", pipe.dom.K, "neighborhood size K");
  cpipe->add_option("--pairs", pipe.dom.pairs, "sample size for --alpha");
  cpipe->add_option("--seed", pipe.dom.seed, "rng seed");
  cpipe->add_option("--tau-max", pipe.netw.tau_max, "maximum lag");
  cpipe->add_option("--q", pipe.netw.q, "FDR level");
  cpipe->add_option("--signal", pipe.netw.signal,
                    "domain signal: mean | area_weighted_sum");
  cpipe->add_flag("--unbiased", pipe.netw.unbiased,
                  "divide lagged correlations by T-|tau| instead of T");
  cpipe->add_flag("--conservative", pipe.netw.conservative,
                  "FDR valid under arbitrary dependence");
  cpipe->add_flag("--average-weight", pipe.netw.average_weight,
                  "weight from the mean correlation over the lag range");
  cpipe->add_option("--correlograms", pipe.netw.correlograms,
                    "export correlograms: none | edges | all");
  cpipe->add_option("--deseasonalize", pipe.pre.deseasonalize,
                    "seasonal period to remove (0 = off)");
  cpipe->add_flag("--detrend", pipe.pre.detrend,
                  "remove per-cell Theil-Sen trend");
  cpipe->add_flag("--center", pipe.pre.center,
                  "remove per-cell temporal mean");
  add_common(cpipe, &pipe.threads, &pipe.force);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::CallForVersion& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (cgen->parsed()) {
      gen.seed_given = seed_opt->count() > 0;
      return run_gen(gen);
    }
    if (cpre->parsed()) return run_preprocess(pre);
    if (cdel->parsed()) return run_estimate_delta(del);
    if (cdom->parsed()) {
      dom.delta_given = ddel->count() > 0;
      dom.alpha_given = dalp->count() > 0;
      return run_domains(dom);
    }
    if (cnet->parsed()) return run_network(netw);
    if (cana->parsed()) return run_analyze(ana);
    if (cpipe->parsed()) {
      pipe.dom.delta_given = pdel->count() > 0;
      pipe.dom.alpha_given = palp->count() > 0;
      pipe.dom.threads = pipe.threads;
      pipe.pre.threads = pipe.threads;
      return run_pipeline(pipe);
    }
    throw gridnet::config_error("no subcommand selected");
  } catch (const gridnet::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const gridnet::no_signal_error& e) {
    std::cerr << "no signal: " << e.what() << "\n";
    return 4;
  } catch (const gridnet::data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const gridnet::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}

int cli_main(const std::vector<std::string>& args) {
  std::vector<std::string> full;
  full.reserve(args.size() + 1);
  full.push_back("gridnet");
  full.insert(full.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(full.size());
  for (const auto& s : full) argv.push_back(s.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}
