#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "whype/channel.hpp"
#include "whype/cost.hpp"
#include "whype/experiments.hpp"
#include "whype/hv.hpp"
#include "whype/io.hpp"
#include "whype/ota.hpp"
#include "whype/pipeline.hpp"

namespace fs = std::filesystem;
using namespace whype;

namespace {

constexpr std::uint64_t kDefaultSeed = 12345;

std::uint64_t resolve_seed(bool seed_given, std::uint64_t flag_value) {
  if (seed_given) return flag_value;
  if (const char* env = std::getenv("WHYPE_SEED")) {
    std::string s(env);
    try {
      std::size_t pos = 0;
      std::uint64_t v = std::stoull(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw std::runtime_error("WHYPE_SEED is not an unsigned integer: '" + s +
                               "'");
    }
  }
  return kDefaultSeed;
}

// Ordered key=value list of the run's effective configuration; its FNV-1a
// hash is stamped into every output so reruns are verifiable byte-for-byte.
struct RunMeta {
  std::string subcommand;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> kv;

  void add(const std::string& k, const std::string& v) { kv.emplace_back(k, v); }
  void add(const std::string& k, const char* v) { kv.emplace_back(k, v); }
  void add(const std::string& k, double v) { kv.emplace_back(k, fmt_g17(v)); }
  void add(const std::string& k, int v) { kv.emplace_back(k, std::to_string(v)); }
  void add(const std::string& k, std::size_t v) {
    kv.emplace_back(k, std::to_string(v));
  }
  void add(const std::string& k, bool v) { kv.emplace_back(k, v ? "1" : "0"); }

  std::string hash() const {
    std::string canon;
    for (const auto& [k, v] : kv) canon += k + "=" + v + "\n";
    return hash_hex(canon);
  }
  std::string csv_comment() const {
    return "# seed=" + std::to_string(seed) + " config=" + hash() + "\n";
  }
  nlohmann::json base_json() const {
    return {{"seed", seed}, {"config_hash", hash()}};
  }
  void write(const fs::path& dir) const {
    nlohmann::json cfg = nlohmann::json::object();
    for (const auto& [k, v] : kv) cfg[k] = v;
    nlohmann::json j = {{"subcommand", subcommand},
                        {"seed", seed},
                        {"config_hash", hash()},
                        {"config", cfg}};
    std::ofstream out(dir / "metadata.json");
    if (!out)
      throw std::runtime_error("cannot open for writing: " +
                               (dir / "metadata.json").string());
    out << j.dump(2) << '\n';
  }
};

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot open for writing: " + p.string());
  return out;
}

TxLayout parse_layout(const std::string& s) {
  return s == "edge" ? TxLayout::EdgeSpread : TxLayout::Cluster;
}

// "a:b:step", inclusive on both ends (floating-point drift tolerated).
std::vector<double> parse_points(const std::string& spec) {
  auto fail = [&]() -> std::vector<double> {
    throw std::runtime_error("--points must be a:b:step with a <= b, step > 0: '" +
                             spec + "'");
  };
  std::vector<std::string> f;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ':')) f.push_back(tok);
  if (f.size() != 3) return fail();
  double a, b, step;
  try {
    a = std::stod(f[0]);
    b = std::stod(f[1]);
    step = std::stod(f[2]);
  } catch (const std::exception&) {
    return fail();
  }
  if (!(step > 0) || a > b) return fail();
  std::vector<double> pts;
  for (int i = 0;; ++i) {
    double v = a + i * step;
    if (v > b + step * 1e-9) break;
    pts.push_back(std::min(v, b));
  }
  return pts;
}

// "A:B" selects the standard receiver-count ladder within [A, B].
std::vector<int> parse_rx_sweep(const std::string& spec) {
  auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw std::runtime_error("--sweep-rx must be A:B: '" + spec + "'");
  int a, b;
  try {
    a = std::stoi(spec.substr(0, colon));
    b = std::stoi(spec.substr(colon + 1));
  } catch (const std::exception&) {
    throw std::runtime_error("--sweep-rx must be A:B: '" + spec + "'");
  }
  std::vector<int> out;
  for (int n : {4, 8, 16, 32, 64})
    if (n >= a && n <= b) out.push_back(n);
  if (out.empty())
    throw std::runtime_error("--sweep-rx range selects none of {4,8,16,32,64}");
  return out;
}

struct ChannelFlags {
  std::string geometry_file;
  std::string channel_file;
  int tx = 3;
  int rx = 8;
  std::string layout = "cluster";
  double jitter_mm = 1.5;
  double cluster_radius_mm = 0.5;
  double freq_ghz = 60.0;
  double permittivity = 1.0;
  double alpha = 2.0;
  int reflections = 0;
  double reflection_att = 0.5;
  double tx_power_dbm = 0.0;
  bool tx_power_set = false;
  double noise_psd = 0.0;
  double noise_scale = 0.0;
  CLI::Option* tx_power_opt = nullptr;

  void finalize() { tx_power_set = tx_power_opt && tx_power_opt->count() > 0; }
};

void add_channel_flags(CLI::App* cmd, ChannelFlags& f, bool with_channel_file) {
  cmd->add_option("--geometry", f.geometry_file,
                  "package geometry JSON (overrides --tx/--rx/--layout)")
      ->check(CLI::ExistingFile);
  if (with_channel_file)
    cmd->add_option("--channel", f.channel_file,
                    "channel matrix CSV (skips synthesis)")
        ->check(CLI::ExistingFile);
  cmd->add_option("--tx", f.tx, "transmitter count");
  cmd->add_option("--rx", f.rx, "receiver count");
  cmd->add_option("--layout", f.layout, "TX placement for synthesis")
      ->check(CLI::IsMember({"edge", "cluster"}));
  cmd->add_option("--jitter-mm", f.jitter_mm, "RX grid jitter");
  cmd->add_option("--cluster-radius-mm", f.cluster_radius_mm,
                  "TX cluster radius");
  cmd->add_option("--freq-ghz", f.freq_ghz, "carrier frequency");
  cmd->add_option("--permittivity", f.permittivity,
                  "effective relative permittivity");
  cmd->add_option("--alpha", f.alpha, "path-loss exponent");
  cmd->add_option("--reflections", f.reflections,
                  "first-order sidewall reflections (0-4)");
  cmd->add_option("--reflection-att", f.reflection_att,
                  "per-reflection amplitude factor");
  f.tx_power_opt =
      cmd->add_option("--tx-power-dbm", f.tx_power_dbm, "per-transmitter power");
  cmd->add_option("--noise-psd", f.noise_psd,
                  "noise power spectral density (mW/Hz-equivalent units)");
  cmd->add_option("--noise-scale", f.noise_scale,
                  "set N0 = (scale * mean |H| * sqrt(P))^2");
}

void meta_add_channel_flags(RunMeta& meta, const ChannelFlags& f) {
  meta.add("geometry", f.geometry_file);
  meta.add("channel", f.channel_file);
  meta.add("tx", f.tx);
  meta.add("rx", f.rx);
  meta.add("layout", f.layout);
  meta.add("jitter_mm", f.jitter_mm);
  meta.add("cluster_radius_mm", f.cluster_radius_mm);
  meta.add("freq_ghz", f.freq_ghz);
  meta.add("permittivity", f.permittivity);
  meta.add("alpha", f.alpha);
  meta.add("reflections", f.reflections);
  meta.add("reflection_att", f.reflection_att);
  meta.add("tx_power_dbm", f.tx_power_set ? fmt_g17(f.tx_power_dbm) : "default");
  meta.add("noise_psd", f.noise_psd);
  meta.add("noise_scale", f.noise_scale);
}

struct ResolvedChannel {
  ChannelMatrix channel;
  PackageGeometry geometry;
  ImpulseResponseSet irs;
  bool synthesized = false;
};

ResolvedChannel resolve_channel(const ChannelFlags& f, std::uint64_t seed) {
  ResolvedChannel rc;
  if (!f.channel_file.empty()) {
    rc.channel = load_channel(f.channel_file);
  } else {
    if (!f.geometry_file.empty()) {
      rc.geometry = load_geometry(f.geometry_file);
    } else {
      rc.geometry =
          default_geometry(f.tx, f.rx, parse_layout(f.layout), f.jitter_mm,
                           derive_seed(seed, 0x9e0b), f.cluster_radius_mm);
      rc.geometry.carrier_freq_hz = f.freq_ghz * 1e9;
      rc.geometry.eff_permittivity = f.permittivity;
      rc.geometry.validate();
    }
    SynthModel model;
    model.alpha = f.alpha;
    model.reflection_count = f.reflections;
    model.reflection_attenuation = f.reflection_att;
    SynthResult sr = synth_channel(rc.geometry, model);
    rc.channel = sr.channel;
    rc.irs = sr.irs;
    rc.synthesized = true;
  }
  if (f.tx_power_set) rc.channel.tx_power_dbm = f.tx_power_dbm;
  if (f.noise_psd > 0) {
    rc.channel.noise_psd = f.noise_psd;
  } else if (f.noise_scale > 0) {
    double mean = 0.0;
    for (const auto& g : rc.channel.gains) mean += std::abs(g);
    mean /= static_cast<double>(rc.channel.gains.size());
    double s = f.noise_scale * mean * std::sqrt(rc.channel.tx_power_mw());
    rc.channel.noise_psd = s * s;
  }
  rc.channel.validate();
  return rc;
}

int cmd_optimize(const ChannelFlags& cf, const std::string& assignment_file,
                 const std::string& method, int workers, std::size_t samples,
                 const std::string& ber_mode, const std::string& regions,
                 const std::string& out_dir, std::uint64_t seed) {
  RunMeta meta;
  meta.subcommand = "optimize";
  meta.seed = seed;
  meta_add_channel_flags(meta, cf);
  meta.add("assignment", assignment_file);
  meta.add("method", method);
  meta.add("workers", workers);
  meta.add("samples", samples);
  meta.add("ber_mode", ber_mode);
  meta.add("regions", regions);
  meta.add("out", out_dir);

  ResolvedChannel rc = resolve_channel(cf, seed);
  BerMode bm = ber_mode == "exact" ? BerMode::Exact : BerMode::Centroid;
  RegionMode rm =
      regions == "kmeans" ? RegionMode::KMeans : RegionMode::Supervised;

  PhaseAssignment pa;
  if (!assignment_file.empty()) {
    pa = load_assignment(assignment_file);
    if (static_cast<int>(pa.pairs.size()) != rc.channel.tx_count)
      throw std::runtime_error("assignment has " +
                               std::to_string(pa.pairs.size()) +
                               " pairs but the channel has M=" +
                               std::to_string(rc.channel.tx_count));
  } else {
    OptimizeOptions opt;
    opt.method = method == "random"   ? OptMethod::Random
                 : method == "greedy" ? OptMethod::Greedy
                                      : OptMethod::Exhaustive;
    opt.workers = workers;
    opt.seed = seed;
    opt.samples = samples;
    opt.ber_mode = bm;
    pa = optimize_phases(rc.channel, opt).assignment;
  }
  ConstellationSet cs = build_constellations(rc.channel, pa);
  DecisionRegions dr = decision_regions(cs, rm, seed);
  BerReport rep = ber_per_rx(dr, cs, rc.channel.noise_psd, bm);
  rep.assignment = pa;

  fs::path dir(out_dir);
  fs::create_directories(dir);
  nlohmann::json ameta = meta.base_json();
  ameta["avg_ber"] = rep.avg;
  ameta["consistent"] = dr.all_consistent;
  save_assignment(pa, (dir / "assignment.json").string(), &ameta);
  {
    auto out = open_out(dir / "ber_report.csv");
    out << meta.csv_comment();
    save_ber_report(rep, out);
  }
  if (rc.synthesized) {
    save_geometry(rc.geometry, (dir / "geometry.json").string());
    auto out = open_out(dir / "channel.csv");
    out << meta.csv_comment();
    export_channel(rc.channel, out);
  }
  meta.write(dir);
  std::cout << "avg BER " << fmt_g17(rep.avg) << ", consistent "
            << (dr.all_consistent ? "yes" : "no") << "\n"
            << "wrote " << (dir / "assignment.json").string() << ", "
            << (dir / "ber_report.csv").string() << "\n";
  return 0;
}

int cmd_channel(const ChannelFlags& cf, const std::string& impulse_file,
                double line_rate_gbps, const std::string& out_dir,
                std::uint64_t seed) {
  RunMeta meta;
  meta.subcommand = "channel";
  meta.seed = seed;
  meta_add_channel_flags(meta, cf);
  meta.add("impulse", impulse_file);
  meta.add("line_rate_gbps", line_rate_gbps);
  meta.add("out", out_dir);

  ImpulseResponseSet irs;
  ResolvedChannel rc;
  int m = cf.tx;
  if (!impulse_file.empty()) {
    irs = load_impulse(impulse_file);
  } else {
    rc = resolve_channel(cf, seed);
    if (!rc.synthesized)
      throw std::runtime_error(
          "channel inspection needs a geometry (or --impulse), not a matrix "
          "file: delay spreads are not recoverable from H alone");
    irs = rc.irs;
    m = rc.channel.tx_count;
  }
  CoherenceResult co = coherence_bandwidth(irs);
  double tput = ota_throughput_bps(m, co.bc_hz, line_rate_gbps * 1e9);

  fs::path dir(out_dir);
  fs::create_directories(dir);
  if (impulse_file.empty()) {
    save_geometry(rc.geometry, (dir / "geometry.json").string());
    auto ch = open_out(dir / "channel.csv");
    ch << meta.csv_comment();
    export_channel(rc.channel, ch);
  }
  {
    auto out = open_out(dir / "impulse_response.csv");
    out << meta.csv_comment();
    export_impulse(irs, out);
  }
  {
    auto out = open_out(dir / "channel_summary.csv");
    out << meta.csv_comment();
    out << "metric,value\n";
    for (std::size_t i = 0; i < irs.per_rx.size(); ++i)
      out << "tau_rms_ns_rx" << i << ','
          << fmt_g17(delay_spread_ns(irs, static_cast<int>(i))) << '\n';
    out << "worst_tau_rms_ns," << fmt_g17(co.worst_tau_rms_ns) << '\n';
    out << "coherence_bw_hz," << fmt_g17(co.bc_hz) << '\n';
    out << "ota_throughput_bps," << fmt_g17(tput) << '\n';
  }
  meta.write(dir);
  std::cout << "worst tau_rms " << fmt_g17(co.worst_tau_rms_ns)
            << " ns, coherence bandwidth " << fmt_g17(co.bc_hz / 1e9)
            << " GHz, OTA throughput " << fmt_g17(tput / 1e9) << " Gb/s\n";
  return 0;
}

struct DatasetFlags {
  std::string dataset_file;
  std::string encoder = "correlated";
  int classes = 1623;
  int dim = 512;
  int shots = 20;
  double p_q = 0.05;
};

void add_dataset_flags(CLI::App* cmd, DatasetFlags& f,
                       const std::string& default_encoder) {
  f.encoder = default_encoder;
  cmd->add_option("--dataset", f.dataset_file,
                  "imported hypervector set (label,bitstring lines)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--encoder", f.encoder,
                  "synthetic encoder family structure")
      ->check(CLI::IsMember({"orthogonal", "correlated"}));
  cmd->add_option("--classes", f.classes, "synthetic class pool size");
  cmd->add_option("--dim", f.dim, "hypervector dimension");
  cmd->add_option("--shots", f.shots, "examples per class");
  cmd->add_option("--p-q", f.p_q, "per-example bit deviation rate");
}

void meta_add_dataset_flags(RunMeta& meta, const DatasetFlags& f) {
  meta.add("dataset", f.dataset_file);
  meta.add("encoder", f.encoder);
  meta.add("classes", f.classes);
  meta.add("dim", f.dim);
  meta.add("shots", f.shots);
  meta.add("p_q", f.p_q);
}

ClassSet make_dataset(const DatasetFlags& f, std::uint64_t seed) {
  if (!f.dataset_file.empty())
    return ClassSet::imported(load_hypervector_set(f.dataset_file));
  SyntheticClassParams p = f.encoder == "correlated"
                               ? SyntheticClassParams::correlated()
                               : SyntheticClassParams{};
  p.dim = static_cast<std::size_t>(f.dim);
  p.class_count = f.classes;
  p.shots_per_class = f.shots;
  p.intra_class_flip = f.p_q;
  return ClassSet::synthetic(p, derive_seed(seed, 0xd5e7));
}

std::vector<double> resolve_rx_ber(const std::string& channel_model,
                                   const std::vector<double>& ber_values,
                                   const std::string& ber_report_file) {
  if (channel_model == "ideal") {
    if (!ber_values.empty() || !ber_report_file.empty())
      throw std::runtime_error(
          "--ber/--ber-report require --channel-model wireless");
    return {};
  }
  if (!ber_values.empty() && !ber_report_file.empty())
    throw std::runtime_error("give either --ber or --ber-report, not both");
  if (!ber_report_file.empty()) return load_ber_report(ber_report_file).per_rx;
  if (ber_values.empty())
    throw std::runtime_error(
        "wireless channel model needs --ber or --ber-report");
  return ber_values;
}

void write_experiment_outputs(const fs::path& dir, const RunMeta& meta,
                              const std::vector<ExperimentRow>& rows,
                              const std::vector<TraceRow>* traces) {
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "experiments.csv");
    out << meta.csv_comment();
    write_experiment_csv(out, rows);
  }
  if (traces && !traces->empty()) {
    auto out = open_out(dir / "traces.csv");
    out << meta.csv_comment();
    write_traces_csv(out, *traces);
  }
  meta.write(dir);
}

int cmd_cost(int tx, int rx, int d, double rate, double link_rate,
             int router_cycles, double clk_ghz, const std::string& tables_file,
             const std::string& sweep_rx, const std::string& out_dir,
             std::uint64_t seed) {
  RunMeta meta;
  meta.subcommand = "cost";
  meta.seed = seed;
  meta.add("tx", tx);
  meta.add("rx", rx);
  meta.add("d", d);
  meta.add("rate_gbps", rate);
  meta.add("link_rate_gbps", link_rate);
  meta.add("router_cycles", router_cycles);
  meta.add("clk_ghz", clk_ghz);
  meta.add("tables", tables_file);
  meta.add("sweep_rx", sweep_rx);
  meta.add("out", out_dir);

  CostTables tables;
  if (!tables_file.empty()) tables = load_cost_tables(tables_file);
  SystemConfig cfg;
  cfg.m = tx;
  cfg.n = rx;
  cfg.d = d;
  cfg.wireless_rate_gbps = rate;
  cfg.wired_link_gbps = link_rate;
  cfg.router_cycles = router_cycles;
  cfg.clk_ghz = clk_ghz;
  Comparison cmp = compare(cfg, tables);
  std::vector<ScalingRow> scaling;
  if (!sweep_rx.empty())
    scaling = scaling_sweep(cfg, parse_rx_sweep(sweep_rx), tables);

  fs::path dir(out_dir);
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "cost_report.csv");
    out << meta.csv_comment();
    write_cost_csv(out, {cmp.wired, cmp.wireless});
  }
  if (!scaling.empty()) {
    auto out = open_out(dir / "cost_scaling.csv");
    out << meta.csv_comment();
    write_scaling_csv(out, scaling);
  }
  meta.write(dir);
  print_cost_report(std::cout, cmp.wired);
  print_cost_report(std::cout, cmp.wireless);
  std::cout << "interconnect area ratio (wired/wireless) "
            << fmt_g17(cmp.interconnect_area_ratio)
            << ", energy ratio " << fmt_g17(cmp.interconnect_energy_ratio)
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "whype: over-the-air majority simulator for distributed "
      "hyperdimensional computing"};
  app.require_subcommand(1);

  std::uint64_t seed_flag = kDefaultSeed;
  std::string out_dir = "out";
  int workers = 1;
  std::vector<CLI::Option*> seed_opts;

  auto add_common = [&](CLI::App* cmd) {
    seed_opts.push_back(cmd->add_option(
        "--seed", seed_flag, "master seed (fallback: WHYPE_SEED, then 12345)"));
    cmd->add_option("--out", out_dir, "output directory");
  };

  // optimize
  auto* opt_cmd =
      app.add_subcommand("optimize", "design phase pairs for a channel");
  ChannelFlags opt_cf;
  std::string opt_assignment, opt_method = "exhaustive",
              opt_ber_mode = "centroid", opt_regions = "supervised";
  std::size_t opt_samples = 1000;
  add_channel_flags(opt_cmd, opt_cf, true);
  opt_cmd->add_option("--assignment", opt_assignment,
                      "evaluate this assignment instead of optimizing")
      ->check(CLI::ExistingFile);
  opt_cmd->add_option("--method", opt_method, "search strategy")
      ->check(CLI::IsMember({"exhaustive", "random", "greedy"}));
  opt_cmd->add_option("--samples", opt_samples, "random-method budget");
  opt_cmd->add_option("--workers", workers, "parallel workers");
  opt_cmd->add_option("--ber-mode", opt_ber_mode, "BER estimator")
      ->check(CLI::IsMember({"centroid", "exact"}));
  opt_cmd->add_option("--regions", opt_regions, "decision-region fit")
      ->check(CLI::IsMember({"supervised", "kmeans"}));
  add_common(opt_cmd);

  // channel
  auto* ch_cmd = app.add_subcommand(
      "channel", "synthesize or inspect a package channel");
  ChannelFlags ch_cf;
  std::string ch_impulse;
  double ch_line_rate = 10.0;
  add_channel_flags(ch_cmd, ch_cf, false);
  ch_cmd->add_option("--impulse", ch_impulse,
                     "impulse-response CSV to inspect instead of synthesizing")
      ->check(CLI::ExistingFile);
  ch_cmd->add_option("--line-rate-gbps", ch_line_rate,
                     "per-transmitter line-rate cap");
  add_common(ch_cmd);

  // experiment
  auto* exp_cmd =
      app.add_subcommand("experiment", "classification studies over the link");
  exp_cmd->require_subcommand(1);

  auto* few_cmd = exp_cmd->add_subcommand("few-shot", "episodic accuracy");
  DatasetFlags few_ds;
  int few_bundle = 3, few_episodes = 1000, few_episode_classes = 100,
      few_rx = 8, few_traces = 0;
  std::size_t few_capacity = 64;
  std::string few_mode = "permuted", few_channel = "ideal",
              few_support = "prototype", few_crediting = "set-recovery",
              few_ber_report;
  std::vector<double> few_ber;
  add_dataset_flags(few_cmd, few_ds, "correlated");
  few_cmd->add_option("--bundle", few_bundle, "bundled queries per episode");
  few_cmd->add_option("--episodes", few_episodes, "episode count");
  few_cmd->add_option("--episode-classes", few_episode_classes,
                      "classes drawn per episode");
  few_cmd->add_option("--mode", few_mode, "bundling mode")
      ->check(CLI::IsMember({"baseline", "permuted"}));
  few_cmd->add_option("--channel-model", few_channel, "link abstraction")
      ->check(CLI::IsMember({"ideal", "wireless"}));
  few_cmd->add_option("--ber", few_ber,
                      "per-receiver flip rate(s) for wireless mode");
  few_cmd->add_option("--ber-report", few_ber_report,
                      "BER report CSV for wireless mode")
      ->check(CLI::ExistingFile);
  few_cmd->add_option("--rx", few_rx, "receiver count");
  few_cmd->add_option("--capacity", few_capacity, "prototypes per receiver");
  few_cmd->add_option("--support", few_support, "support storage")
      ->check(CLI::IsMember({"prototype", "per-shot"}));
  few_cmd->add_option("--crediting", few_crediting, "baseline crediting rule")
      ->check(CLI::IsMember({"set-recovery", "any-hit"}));
  few_cmd->add_option("--traces", few_traces,
                      "emit similarity traces for this many episodes");
  few_cmd->add_option("--workers", workers, "parallel workers");
  add_common(few_cmd);

  auto* sweep_cmd =
      exp_cmd->add_subcommand("sweep-ber", "accuracy vs injected flip rate");
  DatasetFlags sweep_ds;
  std::string sweep_points = "0:0.5:0.02";
  int sweep_episodes = 1000, sweep_episode_classes = 100, sweep_rx_count = 8;
  std::size_t sweep_capacity = 64;
  add_dataset_flags(sweep_cmd, sweep_ds, "orthogonal");
  sweep_cmd->add_option("--points", sweep_points, "BER grid a:b:step");
  sweep_cmd->add_option("--episodes", sweep_episodes, "episodes per point");
  sweep_cmd->add_option("--episode-classes", sweep_episode_classes,
                        "classes drawn per episode");
  sweep_cmd->add_option("--rx", sweep_rx_count, "receiver count");
  sweep_cmd->add_option("--capacity", sweep_capacity,
                        "prototypes per receiver");
  sweep_cmd->add_option("--workers", workers, "parallel workers");
  add_common(sweep_cmd);

  auto* cont_cmd =
      exp_cmd->add_subcommand("continual", "incremental class arrival");
  DatasetFlags cont_ds;
  int cont_bundle = 3, cont_sessions = 6, cont_initial = 64, cont_per = 64,
      cont_shots = 5, cont_queries = 1000, cont_rx = 8;
  std::size_t cont_capacity = 64;
  std::string cont_mode = "permuted", cont_channel = "ideal",
              cont_crediting = "set-recovery", cont_ber_report;
  std::vector<double> cont_ber;
  add_dataset_flags(cont_cmd, cont_ds, "correlated");
  cont_cmd->add_option("--bundle", cont_bundle, "bundled queries per trial");
  cont_cmd->add_option("--sessions", cont_sessions, "session count");
  cont_cmd->add_option("--initial", cont_initial, "classes in session 1");
  cont_cmd->add_option("--per-session", cont_per, "new classes per session");
  cont_cmd->add_option("--session-shots", cont_shots,
                       "shots per new-class prototype");
  cont_cmd->add_option("--queries", cont_queries, "queries per session");
  cont_cmd->add_option("--mode", cont_mode, "bundling mode")
      ->check(CLI::IsMember({"baseline", "permuted"}));
  cont_cmd->add_option("--channel-model", cont_channel, "link abstraction")
      ->check(CLI::IsMember({"ideal", "wireless"}));
  cont_cmd->add_option("--ber", cont_ber,
                       "per-receiver flip rate(s) for wireless mode");
  cont_cmd->add_option("--ber-report", cont_ber_report,
                       "BER report CSV for wireless mode")
      ->check(CLI::ExistingFile);
  cont_cmd->add_option("--rx", cont_rx, "receiver count");
  cont_cmd->add_option("--capacity", cont_capacity, "prototypes per receiver");
  cont_cmd->add_option("--crediting", cont_crediting,
                       "baseline crediting rule")
      ->check(CLI::IsMember({"set-recovery", "any-hit"}));
  cont_cmd->add_option("--workers", workers, "parallel workers");
  add_common(cont_cmd);

  // cost
  auto* cost_cmd =
      app.add_subcommand("cost", "wired vs wireless interconnect model");
  int cost_tx = 3, cost_rx = 8, cost_d = 512, cost_cycles = 4;
  double cost_rate = 10.0, cost_link = 16.0, cost_clk = 1.0;
  std::string cost_tables, cost_sweep;
  cost_cmd->add_option("--tx", cost_tx, "encoder chip count");
  cost_cmd->add_option("--rx", cost_rx, "search chip count");
  cost_cmd->add_option("--d", cost_d, "bits per hypervector");
  cost_cmd->add_option("--rate", cost_rate, "wireless line rate (Gb/s)");
  cost_cmd->add_option("--link-rate", cost_link, "wired link rate (Gb/s)");
  cost_cmd->add_option("--router-cycles", cost_cycles, "router pipeline depth");
  cost_cmd->add_option("--clk-ghz", cost_clk, "router clock");
  cost_cmd->add_option("--tables", cost_tables, "cost table JSON")
      ->check(CLI::ExistingFile);
  cost_cmd->add_option("--sweep-rx", cost_sweep,
                       "A:B receiver-count scaling sweep");
  add_common(cost_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    bool seed_given = false;
    for (const CLI::Option* o : seed_opts)
      if (o->count() > 0) seed_given = true;
    std::uint64_t seed = resolve_seed(seed_given, seed_flag);
    opt_cf.finalize();
    ch_cf.finalize();

    if (opt_cmd->parsed())
      return cmd_optimize(opt_cf, opt_assignment, opt_method, workers,
                          opt_samples, opt_ber_mode, opt_regions, out_dir,
                          seed);
    if (ch_cmd->parsed())
      return cmd_channel(ch_cf, ch_impulse, ch_line_rate, out_dir, seed);

    if (few_cmd->parsed()) {
      RunMeta meta;
      meta.subcommand = "experiment few-shot";
      meta.seed = seed;
      meta_add_dataset_flags(meta, few_ds);
      meta.add("bundle", few_bundle);
      meta.add("episodes", few_episodes);
      meta.add("episode_classes", few_episode_classes);
      meta.add("mode", few_mode);
      meta.add("channel_model", few_channel);
      meta.add("ber_report", few_ber_report);
      for (double b : few_ber) meta.add("ber", b);
      meta.add("rx", few_rx);
      meta.add("capacity", few_capacity);
      meta.add("support", few_support);
      meta.add("crediting", few_crediting);
      meta.add("traces", few_traces);
      meta.add("out", out_dir);

      ClassSet set = make_dataset(few_ds, seed);
      FewShotConfig cfg;
      cfg.classes_per_episode = few_episode_classes;
      cfg.episodes = few_episodes;
      cfg.bundle = few_bundle;
      cfg.mode =
          few_mode == "baseline" ? BundlingMode::Baseline : BundlingMode::Permuted;
      cfg.channel =
          few_channel == "ideal" ? ChannelMode::Ideal : ChannelMode::Wireless;
      cfg.rx_ber = resolve_rx_ber(few_channel, few_ber, few_ber_report);
      cfg.rx_count = few_rx;
      cfg.capacity = few_capacity;
      cfg.support = few_support == "per-shot" ? SupportMode::PerShot
                                              : SupportMode::Prototype;
      cfg.crediting = few_crediting == "any-hit" ? Crediting::AnyHit
                                                 : Crediting::SetRecovery;
      cfg.workers = workers;
      cfg.trace_episodes = few_traces;
      FewShotResult res = run_few_shot(cfg, set, seed);
      std::vector<ExperimentRow> rows{{"few-shot", few_bundle, few_mode,
                                       few_channel, res.accuracy,
                                       res.std_error}};
      write_experiment_outputs(out_dir, meta, rows, &res.traces);
      std::cout << "few-shot bundle=" << few_bundle << " mode=" << few_mode
                << " channel=" << few_channel << " accuracy "
                << fmt_g17(res.accuracy) << " +- " << fmt_g17(res.std_error)
                << "\n";
      return 0;
    }

    if (sweep_cmd->parsed()) {
      RunMeta meta;
      meta.subcommand = "experiment sweep-ber";
      meta.seed = seed;
      meta_add_dataset_flags(meta, sweep_ds);
      meta.add("points", sweep_points);
      meta.add("episodes", sweep_episodes);
      meta.add("episode_classes", sweep_episode_classes);
      meta.add("rx", sweep_rx_count);
      meta.add("capacity", sweep_capacity);
      meta.add("out", out_dir);

      std::vector<double> pts = parse_points(sweep_points);
      ClassSet set = make_dataset(sweep_ds, seed);
      SweepConfig cfg;
      cfg.classes_per_episode = sweep_episode_classes;
      cfg.episodes = sweep_episodes;
      cfg.rx_count = sweep_rx_count;
      cfg.capacity = sweep_capacity;
      cfg.workers = workers;
      auto res = ber_accuracy_sweep(cfg, set, pts, seed);
      std::vector<ExperimentRow> rows;
      for (const auto& p : res)
        rows.push_back({"sweep-ber:" + fmt_g17(p.ber), 1, "baseline",
                        "wireless", p.accuracy, p.std_error});
      write_experiment_outputs(out_dir, meta, rows, nullptr);
      for (const auto& p : res)
        std::cout << "ber " << fmt_g17(p.ber) << " accuracy "
                  << fmt_g17(p.accuracy) << "\n";
      return 0;
    }

    if (cont_cmd->parsed()) {
      RunMeta meta;
      meta.subcommand = "experiment continual";
      meta.seed = seed;
      meta_add_dataset_flags(meta, cont_ds);
      meta.add("bundle", cont_bundle);
      meta.add("sessions", cont_sessions);
      meta.add("initial", cont_initial);
      meta.add("per_session", cont_per);
      meta.add("session_shots", cont_shots);
      meta.add("queries", cont_queries);
      meta.add("mode", cont_mode);
      meta.add("channel_model", cont_channel);
      meta.add("ber_report", cont_ber_report);
      for (double b : cont_ber) meta.add("ber", b);
      meta.add("rx", cont_rx);
      meta.add("capacity", cont_capacity);
      meta.add("crediting", cont_crediting);
      meta.add("out", out_dir);

      ClassSet set = make_dataset(cont_ds, seed);
      ContinualConfig cfg;
      cfg.initial_classes = cont_initial;
      cfg.classes_per_session = cont_per;
      cfg.shots = cont_shots;
      cfg.sessions = cont_sessions;
      cfg.queries_per_session = cont_queries;
      cfg.bundle = cont_bundle;
      cfg.mode = cont_mode == "baseline" ? BundlingMode::Baseline
                                          : BundlingMode::Permuted;
      cfg.channel =
          cont_channel == "ideal" ? ChannelMode::Ideal : ChannelMode::Wireless;
      cfg.rx_ber = resolve_rx_ber(cont_channel, cont_ber, cont_ber_report);
      cfg.rx_count = cont_rx;
      cfg.capacity = cont_capacity;
      cfg.crediting = cont_crediting == "any-hit" ? Crediting::AnyHit
                                                   : Crediting::SetRecovery;
      cfg.workers = workers;
      auto curve = run_continual(cfg, set, seed);
      std::vector<ExperimentRow> rows;
      for (const auto& pt : curve)
        rows.push_back({"continual:session" + std::to_string(pt.session),
                        cont_bundle, cont_mode, cont_channel, pt.accuracy,
                        pt.std_error});
      write_experiment_outputs(out_dir, meta, rows, nullptr);
      for (const auto& pt : curve)
        std::cout << "session " << pt.session << " (" << pt.classes_seen
                  << " classes) accuracy " << fmt_g17(pt.accuracy) << "\n";
      return 0;
    }

    if (cost_cmd->parsed())
      return cmd_cost(cost_tx, cost_rx, cost_d, cost_rate, cost_link,
                      cost_cycles, cost_clk, cost_tables, cost_sweep, out_dir,
                      seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
