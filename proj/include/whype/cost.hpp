#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "io.hpp"

namespace whype {

// Technology parameters, retargetable via JSON. Areas in mm^2; energies
// carry their own unit (pJ/bit, pJ/access, nJ/search).
struct CostTables {
  double router_area = 0.36;
  double router_pj_per_bit = 0.03;
  double link_onchip_area = 4e-4;
  double link_onchip_pj_per_bit = 0.06;
  double link_offchip_area_per_pin = 0.25;
  double link_offchip_pj_per_bit = 1.0;
  double majority_gate5_area = 0.32;
  double majority_pj_per_bit = 0.17;
  double buffer_area = 0.009;
  double buffer_pj_per_access = 0.005;
  double serdes_area = 0.04;
  double serdes_pj_per_bit = 0.54;
  double data_converter_area = 0.03;
  double data_converter_pj_per_bit = 0.07;
  double tx_area = 0.12;
  double tx_pj_per_bit = 1.5;
  double rx_area = 0.12;
  double rx_pj_per_bit = 1.3;
  double antenna_area = 0.08;
  double imc_engine_area = 0.30;
  double imc_nj_per_search = 15.29;

  void validate() const {
    for (double v :
         {router_area, router_pj_per_bit, link_onchip_area,
          link_onchip_pj_per_bit, link_offchip_area_per_pin,
          link_offchip_pj_per_bit, majority_gate5_area, majority_pj_per_bit,
          buffer_area, buffer_pj_per_access, serdes_area, serdes_pj_per_bit,
          data_converter_area, data_converter_pj_per_bit, tx_area,
          tx_pj_per_bit, rx_area, rx_pj_per_bit, antenna_area, imc_engine_area,
          imc_nj_per_search})
      if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument("cost table values must be non-negative");
  }
};

namespace detail {

inline void read_cost(const nlohmann::json& j, const char* group,
                      const char* key, double& out) {
  if (!j.contains(group)) return;
  const auto& g = j.at(group);
  if (g.contains(key)) out = g.at(key).get<double>();
}

}  // namespace detail

inline void save_cost_tables(const CostTables& t, const std::string& path) {
  nlohmann::json j = {
      {"router", {{"area_mm2", t.router_area}, {"pj_per_bit", t.router_pj_per_bit}}},
      {"link_onchip",
       {{"area_mm2", t.link_onchip_area}, {"pj_per_bit", t.link_onchip_pj_per_bit}}},
      {"link_offchip",
       {{"area_mm2_per_pin", t.link_offchip_area_per_pin},
        {"pj_per_bit", t.link_offchip_pj_per_bit}}},
      {"majority_gate5",
       {{"area_mm2", t.majority_gate5_area}, {"pj_per_bit", t.majority_pj_per_bit}}},
      {"buffer",
       {{"area_mm2", t.buffer_area}, {"pj_per_access", t.buffer_pj_per_access}}},
      {"serdes", {{"area_mm2", t.serdes_area}, {"pj_per_bit", t.serdes_pj_per_bit}}},
      {"data_converter",
       {{"area_mm2", t.data_converter_area},
        {"pj_per_bit", t.data_converter_pj_per_bit}}},
      {"tx", {{"area_mm2", t.tx_area}, {"pj_per_bit", t.tx_pj_per_bit}}},
      {"rx", {{"area_mm2", t.rx_area}, {"pj_per_bit", t.rx_pj_per_bit}}},
      {"antenna", {{"area_mm2", t.antenna_area}}},
      {"imc_engine",
       {{"area_mm2", t.imc_engine_area}, {"nj_per_search", t.imc_nj_per_search}}}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

// Missing keys keep their defaults so partial retargets are valid files.
inline CostTables load_cost_tables(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": invalid JSON: " + e.what());
  }
  CostTables t;
  detail::read_cost(j, "router", "area_mm2", t.router_area);
  detail::read_cost(j, "router", "pj_per_bit", t.router_pj_per_bit);
  detail::read_cost(j, "link_onchip", "area_mm2", t.link_onchip_area);
  detail::read_cost(j, "link_onchip", "pj_per_bit", t.link_onchip_pj_per_bit);
  detail::read_cost(j, "link_offchip", "area_mm2_per_pin",
                    t.link_offchip_area_per_pin);
  detail::read_cost(j, "link_offchip", "pj_per_bit", t.link_offchip_pj_per_bit);
  detail::read_cost(j, "majority_gate5", "area_mm2", t.majority_gate5_area);
  detail::read_cost(j, "majority_gate5", "pj_per_bit", t.majority_pj_per_bit);
  detail::read_cost(j, "buffer", "area_mm2", t.buffer_area);
  detail::read_cost(j, "buffer", "pj_per_access", t.buffer_pj_per_access);
  detail::read_cost(j, "serdes", "area_mm2", t.serdes_area);
  detail::read_cost(j, "serdes", "pj_per_bit", t.serdes_pj_per_bit);
  detail::read_cost(j, "data_converter", "area_mm2", t.data_converter_area);
  detail::read_cost(j, "data_converter", "pj_per_bit",
                    t.data_converter_pj_per_bit);
  detail::read_cost(j, "tx", "area_mm2", t.tx_area);
  detail::read_cost(j, "tx", "pj_per_bit", t.tx_pj_per_bit);
  detail::read_cost(j, "rx", "area_mm2", t.rx_area);
  detail::read_cost(j, "rx", "pj_per_bit", t.rx_pj_per_bit);
  detail::read_cost(j, "antenna", "area_mm2", t.antenna_area);
  detail::read_cost(j, "imc_engine", "area_mm2", t.imc_engine_area);
  detail::read_cost(j, "imc_engine", "nj_per_search", t.imc_nj_per_search);
  t.validate();
  return t;
}

struct SystemConfig {
  int m = 3;   // encoder/TX chips
  int n = 8;   // search/RX chips
  int d = 512; // bits per hypervector
  double wireless_rate_gbps = 10.0;
  double wired_link_gbps = 16.0;
  int router_cycles = 4;
  double clk_ghz = 1.0;

  void validate() const {
    if (m < 0) throw std::invalid_argument("M must be >= 0");
    if (n < 1) throw std::invalid_argument("N must be >= 1");
    if (d < 1) throw std::invalid_argument("d must be >= 1");
    if (!(wireless_rate_gbps > 0) || !(wired_link_gbps > 0) ||
        !(clk_ghz > 0) || router_cycles < 0)
      throw std::invalid_argument("rates and clocks must be positive");
  }
};

struct CostRow {
  std::string subsystem;  // interconnect | majority | search
  std::string component;
  double area_mm2 = 0.0;
  double energy_nj = 0.0;  // per end-to-end bundled-query delivery
};

struct CostReport {
  std::string system;  // wired | wireless
  std::vector<CostRow> rows;
  double latency_ns = 0.0;
  double throughput_gbps = 0.0;

  double subsystem_area(const std::string& s) const {
    double a = 0.0;
    for (const auto& r : rows)
      if (r.subsystem == s) a += r.area_mm2;
    return a;
  }
  double subsystem_energy_nj(const std::string& s) const {
    double e = 0.0;
    for (const auto& r : rows)
      if (r.subsystem == s) e += r.energy_nj;
    return e;
  }
  double total_area() const {
    double a = 0.0;
    for (const auto& r : rows) a += r.area_mm2;
    return a;
  }
  double total_energy_nj() const {
    double e = 0.0;
    for (const auto& r : rows) e += r.energy_nj;
    return e;
  }
};

inline double majority_gate_area(int m, const CostTables& t = {}) {
  if (m < 1) throw std::invalid_argument("majority fan-in must be >= 1");
  return t.majority_gate5_area * std::pow(m / 5.0, 3.5);
}

// Mean mesh path length for M+N chiplets arranged near-square.
inline double mesh_avg_hops(int m, int n) {
  return 2.0 * std::sqrt(static_cast<double>(m + n)) / 3.0;
}

inline CostReport imc_cost(int n, const CostTables& t = {}) {
  if (n < 1) throw std::invalid_argument("N must be >= 1");
  t.validate();
  CostReport rep;
  rep.system = "imc";
  rep.rows.push_back(
      {"search", "imc engine", n * t.imc_engine_area, n * t.imc_nj_per_search});
  return rep;
}

// Mesh of M encoder chips, N search chips and one central majority chip.
// Queries are collected over the mesh, reduced, and the bundle is
// redistributed; energy covers that full delivery plus N searches.
inline CostReport wired_cost(const SystemConfig& cfg, const CostTables& t = {}) {
  cfg.validate();
  t.validate();
  const int chiplets = cfg.m + cfg.n + 1;
  const double hops = mesh_avg_hops(cfg.m, cfg.n);
  const double d = cfg.d;
  const double flows = static_cast<double>(cfg.m + cfg.n);  // collect + distribute
  CostReport rep;
  rep.system = "wired";
  rep.rows.push_back({"interconnect", "router", chiplets * t.router_area,
                      flows * d * hops * t.router_pj_per_bit * 1e-3});
  rep.rows.push_back({"interconnect", "off-chip link",
                      chiplets * 2 * t.link_offchip_area_per_pin,
                      flows * d * hops * t.link_offchip_pj_per_bit * 1e-3});
  rep.rows.push_back({"majority", "majority gate",
                      majority_gate_area(std::max(cfg.m, 1), t),
                      d * t.majority_pj_per_bit * 1e-3});
  rep.rows.push_back({"majority", "buffer", 2 * t.buffer_area,
                      2 * d * t.buffer_pj_per_access * 1e-3});
  rep.rows.push_back({"search", "imc engine", cfg.n * t.imc_engine_area,
                      cfg.n * t.imc_nj_per_search});
  const double hop_ns =
      cfg.router_cycles / cfg.clk_ghz + d / cfg.wired_link_gbps;
  rep.latency_ns = hops * hop_ns;
  rep.throughput_gbps = 2.0 * cfg.wired_link_gbps;
  return rep;
}

// All chips talk through one shared wireless hop; the majority is computed
// in the channel, so no majority subsystem appears.
inline CostReport wireless_cost(const SystemConfig& cfg,
                                const CostTables& t = {}) {
  cfg.validate();
  t.validate();
  const int chips = cfg.m + cfg.n;
  const double d = cfg.d;
  CostReport rep;
  rep.system = "wireless";
  rep.rows.push_back({"interconnect", "serdes", chips * t.serdes_area,
                      chips * d * t.serdes_pj_per_bit * 1e-3});
  rep.rows.push_back({"interconnect", "data converter",
                      chips * t.data_converter_area,
                      chips * d * t.data_converter_pj_per_bit * 1e-3});
  rep.rows.push_back({"interconnect", "antenna", chips * t.antenna_area, 0.0});
  rep.rows.push_back({"interconnect", "transmitter", cfg.m * t.tx_area,
                      cfg.m * d * t.tx_pj_per_bit * 1e-3});
  rep.rows.push_back({"interconnect", "receiver", cfg.n * t.rx_area,
                      cfg.n * d * t.rx_pj_per_bit * 1e-3});
  rep.rows.push_back({"search", "imc engine", cfg.n * t.imc_engine_area,
                      cfg.n * t.imc_nj_per_search});
  rep.latency_ns = d / cfg.wireless_rate_gbps;
  rep.throughput_gbps = cfg.wireless_rate_gbps * cfg.m * cfg.n;
  return rep;
}

struct Comparison {
  CostReport wired;
  CostReport wireless;
  double interconnect_area_ratio = 0.0;   // wired / wireless
  double interconnect_energy_ratio = 0.0; // wired / wireless
};

inline Comparison compare(const SystemConfig& cfg, const CostTables& t = {}) {
  Comparison c;
  c.wired = wired_cost(cfg, t);
  c.wireless = wireless_cost(cfg, t);
  double wa = c.wired.subsystem_area("interconnect");
  double la = c.wireless.subsystem_area("interconnect");
  double we = c.wired.subsystem_energy_nj("interconnect");
  double le = c.wireless.subsystem_energy_nj("interconnect");
  c.interconnect_area_ratio = la > 0 ? wa / la : 0.0;
  c.interconnect_energy_ratio = le > 0 ? we / le : 0.0;
  return c;
}

inline void write_cost_csv(std::ostream& out,
                           const std::vector<CostReport>& reports) {
  out << "system,subsystem,component,area_mm2,energy_nj\n";
  for (const auto& rep : reports) {
    for (const auto& r : rep.rows)
      out << rep.system << ',' << r.subsystem << ',' << r.component << ','
          << fmt_g17(r.area_mm2) << ',' << fmt_g17(r.energy_nj) << '\n';
    out << rep.system << ",total,total," << fmt_g17(rep.total_area()) << ','
        << fmt_g17(rep.total_energy_nj()) << '\n';
    out << rep.system << ",summary,latency_ns," << fmt_g17(rep.latency_ns)
        << ",\n";
    out << rep.system << ",summary,throughput_gbps,"
        << fmt_g17(rep.throughput_gbps) << ",\n";
  }
}

inline void print_cost_report(std::ostream& out, const CostReport& rep) {
  out << rep.system << " system\n";
  auto line = [&](const std::string& a, const std::string& b, double area,
                  double nj) {
    out << "  " << a;
    for (std::size_t i = a.size(); i < 14; ++i) out << ' ';
    out << b;
    for (std::size_t i = b.size(); i < 16; ++i) out << ' ';
    char buf[96];
    std::snprintf(buf, sizeof buf, "%10.4f mm2  %12.4f nJ", area, nj);
    out << buf << '\n';
  };
  for (const auto& r : rep.rows)
    line(r.subsystem, r.component, r.area_mm2, r.energy_nj);
  line("total", "", rep.total_area(), rep.total_energy_nj());
  char buf[96];
  std::snprintf(buf, sizeof buf,
                "  latency %.4f ns, throughput %.4f Gb/s\n", rep.latency_ns,
                rep.throughput_gbps);
  out << buf;
}

struct ScalingRow {
  int n = 0;
  double wired_area = 0.0;
  double wireless_area = 0.0;
  double wired_energy_nj = 0.0;
  double wireless_energy_nj = 0.0;
  double wired_latency_ns = 0.0;
  double wireless_latency_ns = 0.0;
  double wired_throughput_gbps = 0.0;
  double wireless_throughput_gbps = 0.0;
};

// Interconnect-subsystem scaling with receiver count at fixed M.
inline std::vector<ScalingRow> scaling_sweep(SystemConfig cfg,
                                             const std::vector<int>& n_list,
                                             const CostTables& t = {}) {
  std::vector<ScalingRow> rows;
  rows.reserve(n_list.size());
  for (int n : n_list) {
    cfg.n = n;
    Comparison c = compare(cfg, t);
    ScalingRow r;
    r.n = n;
    r.wired_area = c.wired.subsystem_area("interconnect");
    r.wireless_area = c.wireless.subsystem_area("interconnect");
    r.wired_energy_nj = c.wired.subsystem_energy_nj("interconnect");
    r.wireless_energy_nj = c.wireless.subsystem_energy_nj("interconnect");
    r.wired_latency_ns = c.wired.latency_ns;
    r.wireless_latency_ns = c.wireless.latency_ns;
    r.wired_throughput_gbps = c.wired.throughput_gbps;
    r.wireless_throughput_gbps = c.wireless.throughput_gbps;
    rows.push_back(r);
  }
  return rows;
}

inline void write_scaling_csv(std::ostream& out,
                              const std::vector<ScalingRow>& rows) {
  out << "n,wired_area_mm2,wireless_area_mm2,wired_energy_nj,wireless_energy_"
         "nj,wired_latency_ns,wireless_latency_ns,wired_throughput_gbps,"
         "wireless_throughput_gbps\n";
  for (const auto& r : rows)
    out << r.n << ',' << fmt_g17(r.wired_area) << ','
        << fmt_g17(r.wireless_area) << ',' << fmt_g17(r.wired_energy_nj) << ','
        << fmt_g17(r.wireless_energy_nj) << ',' << fmt_g17(r.wired_latency_ns)
        << ',' << fmt_g17(r.wireless_latency_ns) << ','
        << fmt_g17(r.wired_throughput_gbps) << ','
        << fmt_g17(r.wireless_throughput_gbps) << '\n';
}

}  // namespace whype
