#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "catch2/catch_amalgamated.hpp"
#include "whype/cost.hpp"

using namespace whype;
using Catch::Approx;

TEST_CASE("subsystem sums partition the report totals") {
  SystemConfig cfg;
  Comparison c = compare(cfg);
  for (const CostReport* rep : {&c.wired, &c.wireless}) {
    double area = rep->subsystem_area("interconnect") +
                  rep->subsystem_area("majority") +
                  rep->subsystem_area("search");
    double energy = rep->subsystem_energy_nj("interconnect") +
                    rep->subsystem_energy_nj("majority") +
                    rep->subsystem_energy_nj("search");
    REQUIRE(area == Approx(rep->total_area()).epsilon(1e-15));
    REQUIRE(energy == Approx(rep->total_energy_nj()).epsilon(1e-15));
  }
  REQUIRE(c.wireless.subsystem_area("majority") == 0.0);
}

TEST_CASE("wireless rows scale linearly with chip counts") {
  SystemConfig a;
  a.m = 2;
  a.n = 5;
  SystemConfig b = a;
  b.m = 4;
  b.n = 10;
  CostReport ra = wireless_cost(a);
  CostReport rb = wireless_cost(b);
  REQUIRE(ra.rows.size() == rb.rows.size());
  for (std::size_t i = 0; i < ra.rows.size(); ++i) {
    REQUIRE(rb.rows[i].area_mm2 == Approx(2.0 * ra.rows[i].area_mm2));
    REQUIRE(rb.rows[i].energy_nj == Approx(2.0 * ra.rows[i].energy_nj));
  }
  REQUIRE(rb.latency_ns == ra.latency_ns);
  REQUIRE(rb.throughput_gbps == Approx(4.0 * ra.throughput_gbps));
}

TEST_CASE("wireless latency is the vector time on air, nothing else") {
  SystemConfig cfg;
  REQUIRE(wireless_cost(cfg).latency_ns == 51.2);
  cfg.m = 1;
  cfg.n = 1;
  REQUIRE(wireless_cost(cfg).latency_ns == 51.2);
  cfg.m = 7;
  cfg.n = 64;
  REQUIRE(wireless_cost(cfg).latency_ns == 51.2);
  cfg.d = 1024;
  REQUIRE(wireless_cost(cfg).latency_ns == 102.4);
}

TEST_CASE("wireless throughput is the broadcast rate times both fan counts") {
  SystemConfig cfg;
  REQUIRE(wireless_cost(cfg).throughput_gbps == 240.0);
  cfg.m = 7;
  cfg.n = 16;
  REQUIRE(wireless_cost(cfg).throughput_gbps == 10.0 * 7 * 16);
}

TEST_CASE("wired throughput is pinned by the two directed link flows") {
  SystemConfig cfg;
  REQUIRE(wired_cost(cfg).throughput_gbps == 32.0);
  cfg.wired_link_gbps = 20.0;
  REQUIRE(wired_cost(cfg).throughput_gbps == 40.0);
}

TEST_CASE("wired latency composes hop count with per-hop serialization") {
  SystemConfig cfg;
  cfg.m = 1;
  cfg.n = 8;  // nine chiplets make the mean path exactly two hops
  REQUIRE(mesh_avg_hops(cfg.m, cfg.n) == 2.0);
  REQUIRE(wired_cost(cfg).latency_ns == 72.0);  // 2 x (4 + 512/16)

  SystemConfig d;
  REQUIRE(wired_cost(d).latency_ns ==
          Approx(mesh_avg_hops(3, 8) * 36.0).epsilon(1e-15));

  double prev = 0.0;
  for (int n : {2, 4, 9, 20, 50}) {
    d.n = n;
    double lat = wired_cost(d).latency_ns;
    REQUIRE(lat > prev);
    prev = lat;
  }
}

TEST_CASE("majority gate area follows the fan-in power law") {
  REQUIRE(majority_gate_area(5) == 0.32);
  REQUIRE(majority_gate_area(10) == Approx(0.32 * std::pow(2.0, 3.5)));
  REQUIRE(majority_gate_area(1) == Approx(0.32 * std::pow(0.2, 3.5)));
  REQUIRE_THROWS_AS(majority_gate_area(0), std::invalid_argument);
  CostTables t;
  t.majority_gate5_area = 1.0;
  REQUIRE(majority_gate_area(5, t) == 1.0);
}

TEST_CASE("search engine cost is per chip") {
  CostReport one = imc_cost(1);
  REQUIRE(one.rows.size() == 1);
  REQUIRE(one.rows[0].area_mm2 == Approx(0.30));
  REQUIRE(one.rows[0].energy_nj == Approx(15.29));
  CostReport eight = imc_cost(8);
  REQUIRE(eight.rows[0].area_mm2 == Approx(2.40));
  REQUIRE(eight.rows[0].energy_nj == Approx(8 * 15.29));
  REQUIRE_THROWS_AS(imc_cost(0), std::invalid_argument);
}

TEST_CASE("interconnect area ratio at the default system") {
  Comparison c = compare(SystemConfig{});
  REQUIRE(c.wired.subsystem_area("interconnect") == Approx(10.32));
  REQUIRE(c.wireless.subsystem_area("interconnect") == Approx(2.97));
  REQUIRE(c.interconnect_area_ratio == Approx(10.32 / 2.97).epsilon(1e-12));
  // within a quarter of the nominal 3.2x advantage
  REQUIRE(c.interconnect_area_ratio > 3.2 * 0.75);
  REQUIRE(c.interconnect_area_ratio < 3.2 * 1.25);
  Comparison again = compare(SystemConfig{});
  REQUIRE(again.interconnect_area_ratio == c.interconnect_area_ratio);
  REQUIRE(again.wired.total_energy_nj() == c.wired.total_energy_nj());
}

TEST_CASE("throughput crossover sits at the link-pair budget") {
  auto wins = [](int m, int n) {
    SystemConfig cfg;
    cfg.m = m;
    cfg.n = n;
    Comparison c = compare(cfg);
    return c.wireless.throughput_gbps > c.wired.throughput_gbps;
  };
  REQUIRE_FALSE(wins(1, 1));  // 10 vs 32
  REQUIRE_FALSE(wins(3, 1));  // 30 vs 32
  REQUIRE_FALSE(wins(1, 3));
  REQUIRE(wins(1, 4));  // 40 vs 32
  REQUIRE(wins(2, 2));
}

TEST_CASE("interconnect gaps widen with receiver count") {
  SystemConfig cfg;
  auto rows = scaling_sweep(cfg, {4, 8, 16, 32, 64});
  REQUIRE(rows.size() == 5);
  double prev_area_gap = -1e300, prev_energy_gap = -1e300;
  for (const auto& r : rows) {
    double area_gap = r.wired_area - r.wireless_area;
    double energy_gap = r.wired_energy_nj - r.wireless_energy_nj;
    REQUIRE(area_gap > prev_area_gap);
    REQUIRE(energy_gap > prev_energy_gap);
    prev_area_gap = area_gap;
    prev_energy_gap = energy_gap;
    REQUIRE(r.wireless_latency_ns == 51.2);
    REQUIRE(r.wired_throughput_gbps == 32.0);
    REQUIRE(r.wireless_throughput_gbps == 10.0 * 3 * r.n);
  }
  // by the largest system the wireless side wins on every interconnect axis
  REQUIRE(rows.back().wired_area > rows.back().wireless_area);
  REQUIRE(rows.back().wired_energy_nj > rows.back().wireless_energy_nj);
  REQUIRE(rows.back().wired_latency_ns > rows.back().wireless_latency_ns);
}

TEST_CASE("an encoder-free system is a valid search appliance") {
  SystemConfig cfg;
  cfg.m = 0;
  CostReport w = wireless_cost(cfg);
  REQUIRE(w.throughput_gbps == 0.0);
  for (const auto& r : w.rows)
    if (r.component == "transmitter") {
      REQUIRE(r.area_mm2 == 0.0);
      REQUIRE(r.energy_nj == 0.0);
    }
  REQUIRE_NOTHROW(wired_cost(cfg));
  REQUIRE_NOTHROW(compare(cfg));
}

TEST_CASE("system configuration is validated") {
  SystemConfig cfg;
  cfg.m = -1;
  REQUIRE_THROWS_AS(wired_cost(cfg), std::invalid_argument);
  cfg = SystemConfig{};
  cfg.n = 0;
  REQUIRE_THROWS_AS(wireless_cost(cfg), std::invalid_argument);
  cfg = SystemConfig{};
  cfg.d = 0;
  REQUIRE_THROWS_AS(wired_cost(cfg), std::invalid_argument);
  cfg = SystemConfig{};
  cfg.wired_link_gbps = 0.0;
  REQUIRE_THROWS_AS(wired_cost(cfg), std::invalid_argument);
  cfg = SystemConfig{};
  cfg.router_cycles = -1;
  REQUIRE_THROWS_AS(wired_cost(cfg), std::invalid_argument);
}

TEST_CASE("technology tables round-trip through their file form") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "whype_test_cost";
  fs::create_directories(dir);
  std::string path = (dir / "tables.json").string();

  CostTables t;
  t.tx_pj_per_bit = 2.25;
  t.imc_nj_per_search = 11.5;
  save_cost_tables(t, path);
  CostTables r = load_cost_tables(path);
  REQUIRE(r.tx_pj_per_bit == 2.25);
  REQUIRE(r.imc_nj_per_search == 11.5);
  REQUIRE(r.router_area == t.router_area);
  REQUIRE(r.link_offchip_area_per_pin == t.link_offchip_area_per_pin);
  REQUIRE(r.majority_gate5_area == t.majority_gate5_area);
  REQUIRE(r.antenna_area == t.antenna_area);

  std::string partial = (dir / "partial.json").string();
  {
    std::ofstream out(partial);
    out << "{\"router\": {\"area_mm2\": 0.5}}\n";
  }
  CostTables p = load_cost_tables(partial);
  REQUIRE(p.router_area == 0.5);
  REQUIRE(p.router_pj_per_bit == 0.03);
  REQUIRE(p.imc_engine_area == 0.30);

  std::string bad = (dir / "bad.json").string();
  {
    std::ofstream out(bad);
    out << "{\"tx\": {\"pj_per_bit\": -1.0}}\n";
  }
  REQUIRE_THROWS_AS(load_cost_tables(bad), std::invalid_argument);

  std::string mangled = (dir / "mangled.json").string();
  {
    std::ofstream out(mangled);
    out << "not json at all\n";
  }
  REQUIRE_THROWS_WITH(load_cost_tables(mangled),
                      Catch::Matchers::ContainsSubstring("invalid JSON"));
  REQUIRE_THROWS_WITH(load_cost_tables((dir / "absent.json").string()),
                      Catch::Matchers::ContainsSubstring("cannot open"));
  fs::remove_all(dir);
}

TEST_CASE("cost tables reach every report row") {
  CostTables t;
  t.serdes_area = 0.08;  // doubled
  SystemConfig cfg;
  CostReport base = wireless_cost(cfg);
  CostReport bumped = wireless_cost(cfg, t);
  REQUIRE(bumped.rows[0].component == "serdes");
  REQUIRE(bumped.rows[0].area_mm2 == Approx(2.0 * base.rows[0].area_mm2));
}

TEST_CASE("cost tables serialize with stable headers and totals") {
  CostReport rep;
  rep.system = "demo";
  rep.rows.push_back({"interconnect", "router", 1.5, 0.25});
  rep.rows.push_back({"search", "imc engine", 2.0, 4.0});
  rep.latency_ns = 3.0;
  rep.throughput_gbps = 32.0;
  std::ostringstream os;
  write_cost_csv(os, {rep});
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  REQUIRE(line == "system,subsystem,component,area_mm2,energy_nj");
  std::getline(is, line);
  REQUIRE(line == "demo,interconnect,router,1.5,0.25");
  std::getline(is, line);
  REQUIRE(line == "demo,search,imc engine,2,4");
  std::getline(is, line);
  REQUIRE(line == "demo,total,total,3.5,4.25");
  std::getline(is, line);
  REQUIRE(line == "demo,summary,latency_ns,3,");
  std::getline(is, line);
  REQUIRE(line == "demo,summary,throughput_gbps,32,");
  REQUIRE_FALSE(std::getline(is, line));
}

TEST_CASE("scaling rows serialize one line per receiver count") {
  SystemConfig cfg;
  auto rows = scaling_sweep(cfg, {4, 8});
  std::ostringstream os;
  write_scaling_csv(os, rows);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  REQUIRE(line ==
          "n,wired_area_mm2,wireless_area_mm2,wired_energy_nj,wireless_energy_"
          "nj,wired_latency_ns,wireless_latency_ns,wired_throughput_gbps,"
          "wireless_throughput_gbps");
  int data_lines = 0;
  while (std::getline(is, line)) {
    REQUIRE(line.find(',') != std::string::npos);
    ++data_lines;
  }
  REQUIRE(data_lines == 2);
}
