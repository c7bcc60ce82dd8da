#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "io.hpp"
#include "rng.hpp"

namespace whype {

inline constexpr double kSpeedOfLightMmPerNs = 299.792458;
inline constexpr double kBoltzmannJPerK = 1.380649e-23;

// Thermal floor at 300 K over the 10 GHz signaling band plus a 10 dB noise
// figure, in mW, so BER is reproducible from config alone.
inline double default_noise_psd_mw() {
  return kBoltzmannJPerK * 300.0 * 10e9 * 10.0 * 1e3;
}

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance_mm(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

struct PackageDims {
  double L1 = 33.0;
  double L2 = 30.0;
  double l1 = 7.5;
  double s = 3.75;
  double h1 = 0.1;
  double h2 = 0.01;
};

struct PackageGeometry {
  int tx_count = 3;
  int rx_count = 8;
  std::vector<Point> tx_pos;
  std::vector<Point> rx_pos;
  PackageDims dims;
  double carrier_freq_hz = 60e9;
  double eff_permittivity = 1.0;

  double wavelength_mm() const {
    return kSpeedOfLightMmPerNs * 1e9 / carrier_freq_hz /
           std::sqrt(eff_permittivity);
  }

  void validate() const {
    if (tx_count < 1 || rx_count < 1)
      throw std::invalid_argument("geometry needs at least one TX and one RX");
    if (static_cast<int>(tx_pos.size()) != tx_count ||
        static_cast<int>(rx_pos.size()) != rx_count)
      throw std::invalid_argument("position count does not match chip counts");
    if (!(carrier_freq_hz > 0))
      throw std::invalid_argument("carrier frequency must be positive");
    if (!(eff_permittivity >= 1.0))
      throw std::invalid_argument("effective permittivity must be >= 1");
    std::vector<Point> all = tx_pos;
    all.insert(all.end(), rx_pos.begin(), rx_pos.end());
    for (const Point& p : all)
      if (p.x < 0 || p.x > dims.L1 || p.y < 0 || p.y > dims.L2)
        throw std::invalid_argument("antenna position outside the package");
    for (std::size_t i = 0; i < all.size(); ++i)
      for (std::size_t j = i + 1; j < all.size(); ++j)
        if (all[i].x == all[j].x && all[i].y == all[j].y)
          throw std::invalid_argument("coincident antenna positions");
  }
};

enum class TxLayout { EdgeSpread, Cluster };

// TXs along the left edge (or in a compact cluster, radius << wavelength, so
// inter-TX phase differences stay nearly constant across receivers); RXs on a
// ceil(sqrt(N)) grid. jitter_mm > 0 makes a seeded random channel family.
inline PackageGeometry default_geometry(int tx, int rx,
                                        TxLayout layout = TxLayout::EdgeSpread,
                                        double jitter_mm = 0.0,
                                        std::uint64_t seed = 0,
                                        double cluster_radius_mm = 0.5) {
  PackageGeometry g;
  g.tx_count = tx;
  g.rx_count = rx;
  SplitMix64 rng(derive_seed(seed, 0x9e0));
  if (layout == TxLayout::EdgeSpread) {
    for (int t = 0; t < tx; ++t)
      g.tx_pos.push_back({2.0, g.dims.L2 * (t + 1) / (tx + 1)});
  } else {
    Point c{2.0, g.dims.L2 / 2.0};
    for (int t = 0; t < tx; ++t)
      g.tx_pos.push_back({c.x + rng.uniform(-cluster_radius_mm, cluster_radius_mm),
                          c.y + rng.uniform(-cluster_radius_mm, cluster_radius_mm)});
  }
  int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(rx))));
  int rows = (rx + cols - 1) / cols;
  for (int k = 0; k < rx; ++k) {
    int r = k / cols, c = k % cols;
    double x = 8.0 + (g.dims.L1 - 10.0) * (c + 0.5) / cols;
    double y = g.dims.L2 * (r + 0.5) / rows;
    if (jitter_mm > 0) {
      x += rng.uniform(-jitter_mm, jitter_mm);
      y += rng.uniform(-jitter_mm, jitter_mm);
    }
    x = std::clamp(x, 0.5, g.dims.L1 - 0.5);
    y = std::clamp(y, 0.5, g.dims.L2 - 0.5);
    g.rx_pos.push_back({x, y});
  }
  g.validate();
  return g;
}

// Extra keys (run metadata) are permitted; load_geometry ignores them.
inline void save_geometry(const PackageGeometry& g, const std::string& path,
                          const nlohmann::json* metadata = nullptr) {
  nlohmann::json j;
  if (metadata) j = *metadata;
  j["chip_count_tx"] = g.tx_count;
  j["chip_count_rx"] = g.rx_count;
  auto pts = [](const std::vector<Point>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const Point& p : v) a.push_back({p.x, p.y});
    return a;
  };
  j["tx_positions"] = pts(g.tx_pos);
  j["rx_positions"] = pts(g.rx_pos);
  j["package_dims"] = {{"L1", g.dims.L1}, {"L2", g.dims.L2}, {"l1", g.dims.l1},
                       {"s", g.dims.s},   {"h1", g.dims.h1}, {"h2", g.dims.h2}};
  j["carrier_freq_hz"] = g.carrier_freq_hz;
  j["eff_permittivity"] = g.eff_permittivity;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

inline PackageGeometry load_geometry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  PackageGeometry g;
  g.tx_count = j.at("chip_count_tx").get<int>();
  g.rx_count = j.at("chip_count_rx").get<int>();
  if (j.contains("package_dims")) {
    const auto& d = j["package_dims"];
    g.dims.L1 = d.value("L1", g.dims.L1);
    g.dims.L2 = d.value("L2", g.dims.L2);
    g.dims.l1 = d.value("l1", g.dims.l1);
    g.dims.s = d.value("s", g.dims.s);
    g.dims.h1 = d.value("h1", g.dims.h1);
    g.dims.h2 = d.value("h2", g.dims.h2);
  }
  g.carrier_freq_hz = j.value("carrier_freq_hz", g.carrier_freq_hz);
  g.eff_permittivity = j.value("eff_permittivity", g.eff_permittivity);
  auto pts = [&](const char* key, std::vector<Point>& v) {
    if (!j.contains(key)) return false;
    for (const auto& e : j[key]) v.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
    return true;
  };
  bool has_tx = pts("tx_positions", g.tx_pos);
  bool has_rx = pts("rx_positions", g.rx_pos);
  if (!has_tx || !has_rx) {
    PackageGeometry def = default_geometry(g.tx_count, g.rx_count);
    if (!has_tx) g.tx_pos = def.tx_pos;
    if (!has_rx) g.rx_pos = def.rx_pos;
  }
  g.validate();
  return g;
}

struct ChannelMatrix {
  int rx_count = 0;
  int tx_count = 0;
  std::vector<std::complex<double>> gains;  // row-major [rx][tx]
  double carrier_freq_hz = 60e9;
  double tx_power_dbm = 0.0;
  double noise_psd = default_noise_psd_mw();

  std::complex<double>& at(int rx, int tx) { return gains[rx * tx_count + tx]; }
  const std::complex<double>& at(int rx, int tx) const {
    return gains[rx * tx_count + tx];
  }

  double tx_power_mw() const { return std::pow(10.0, tx_power_dbm / 10.0); }

  void validate() const {
    if (rx_count < 1 || tx_count < 1 ||
        gains.size() != static_cast<std::size_t>(rx_count) * tx_count)
      throw std::invalid_argument("channel matrix dimension mismatch");
    for (const auto& g : gains)
      if (!std::isfinite(g.real()) || !std::isfinite(g.imag()))
        throw std::invalid_argument("non-finite channel gain");
    if (!(noise_psd > 0)) throw std::invalid_argument("noise_psd must be > 0");
  }
};

struct Tap {
  double tau_ns = 0.0;
  std::complex<double> amp;
};

struct ImpulseResponseSet {
  std::vector<std::vector<Tap>> per_rx;

  void validate() const {
    if (per_rx.empty()) throw std::invalid_argument("no receivers");
    for (const auto& taps : per_rx) {
      if (taps.empty()) throw std::invalid_argument("receiver has no taps");
      double prev = -1.0;
      for (const Tap& t : taps) {
        if (t.tau_ns < 0) throw std::invalid_argument("negative tap delay");
        if (t.tau_ns <= prev)
          throw std::invalid_argument("tap delays must be strictly increasing");
        prev = t.tau_ns;
      }
    }
  }
};

struct SynthModel {
  double alpha = 2.0;              // amplitude path-loss exponent
  int reflection_count = 0;        // first-order sidewall images, <= 4
  double reflection_attenuation = 0.5;
  double ref_distance_mm = 1.0;    // d0 in the (d0/d)^alpha amplitude law
};

struct SynthResult {
  ChannelMatrix channel;
  ImpulseResponseSet irs;
};

// LOS amplitude (lambda/4*pi*d0)*(d0/d)^alpha with phase -2*pi*d/lambda,
// plus up to 4 image-source reflection taps per TX. Frequency-domain gains
// are the sum of the same taps evaluated at the carrier, so H and the
// impulse responses stay consistent by construction.
inline SynthResult synth_channel(const PackageGeometry& geom,
                                 const SynthModel& model = {}) {
  geom.validate();
  if (!(model.alpha > 0)) throw std::invalid_argument("alpha must be > 0");
  if (model.reflection_count < 0 || model.reflection_count > 4)
    throw std::invalid_argument("reflection_count must be in [0,4]");

  const double lam = geom.wavelength_mm();
  const double a0 = lam / (4.0 * 3.14159265358979323846 * model.ref_distance_mm);
  auto tap_for = [&](double d, double att) {
    if (d <= 0) throw std::invalid_argument("zero distance between antennas");
    double amp = att * a0 * std::pow(model.ref_distance_mm / d, model.alpha);
    double ph = -2.0 * 3.14159265358979323846 * d / lam;
    return Tap{d * std::sqrt(geom.eff_permittivity) / kSpeedOfLightMmPerNs,
               std::polar(amp, ph)};
  };

  SynthResult res;
  res.channel.rx_count = geom.rx_count;
  res.channel.tx_count = geom.tx_count;
  res.channel.carrier_freq_hz = geom.carrier_freq_hz;
  res.channel.gains.assign(static_cast<std::size_t>(geom.rx_count) * geom.tx_count, {});
  res.irs.per_rx.resize(geom.rx_count);

  for (int i = 0; i < geom.rx_count; ++i) {
    std::vector<Tap> taps;
    for (int j = 0; j < geom.tx_count; ++j) {
      const Point& t = geom.tx_pos[j];
      const Point& r = geom.rx_pos[i];
      std::vector<Tap> paths{tap_for(distance_mm(t, r), 1.0)};
      if (model.reflection_count > 0) {
        std::vector<double> imgs{
            distance_mm({t.x, -t.y}, r),
            distance_mm({t.x, 2 * geom.dims.L2 - t.y}, r),
            distance_mm({-t.x, t.y}, r),
            distance_mm({2 * geom.dims.L1 - t.x, t.y}, r)};
        std::sort(imgs.begin(), imgs.end());
        for (int k = 0; k < model.reflection_count; ++k)
          paths.push_back(tap_for(imgs[k], model.reflection_attenuation));
      }
      for (const Tap& p : paths) {
        res.channel.at(i, j) += p.amp;
        taps.push_back(p);
      }
    }
    std::sort(taps.begin(), taps.end(),
              [](const Tap& a, const Tap& b) { return a.tau_ns < b.tau_ns; });
    std::vector<Tap>& merged = res.irs.per_rx[i];
    for (const Tap& t : taps) {
      if (!merged.empty() && merged.back().tau_ns == t.tau_ns)
        merged.back().amp += t.amp;
      else
        merged.push_back(t);
    }
  }

  // passive propagation: renormalize if reflections ever push a gain past 1
  double maxg = 0.0;
  for (const auto& g : res.channel.gains) maxg = std::max(maxg, std::abs(g));
  if (maxg > 1.0) {
    for (auto& g : res.channel.gains) g /= maxg;
    for (auto& taps : res.irs.per_rx)
      for (Tap& t : taps) t.amp /= maxg;
  }
  res.channel.validate();
  res.irs.validate();
  return res;
}

// Header row carries N,M,freq_hz,tx_power_dbm,noise_psd; then one
// rx,tx,re,im row per matrix entry. %.17g keeps load(export(x)) == x.
inline void export_channel(const ChannelMatrix& ch, std::ostream& out) {
  out << ch.rx_count << ',' << ch.tx_count << ',' << fmt_g17(ch.carrier_freq_hz)
      << ',' << fmt_g17(ch.tx_power_dbm) << ',' << fmt_g17(ch.noise_psd) << '\n';
  for (int i = 0; i < ch.rx_count; ++i)
    for (int j = 0; j < ch.tx_count; ++j)
      out << i << ',' << j << ',' << fmt_g17(ch.at(i, j).real()) << ','
          << fmt_g17(ch.at(i, j).imag()) << '\n';
}

inline void export_channel(const ChannelMatrix& ch, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  export_channel(ch, out);
}

inline ChannelMatrix load_channel(const std::string& path) {
  auto rows = detail::read_csv_lines(path);
  if (rows.empty()) throw std::runtime_error(path + ": empty channel file");
  std::size_t k = 0;
  // tolerate an optional column-name row ahead of the value header
  {
    auto f = detail::split_csv(rows[0].second);
    if (!f.empty() && f[0] == "N") ++k;
  }
  if (k >= rows.size()) throw std::runtime_error(path + ": missing header row");
  auto hdr = detail::split_csv(rows[k].second);
  if (hdr.size() != 5)
    detail::parse_fail(path, rows[k].first,
                       "header must be N,M,freq_hz,tx_power_dbm,noise_psd");
  ChannelMatrix ch;
  ch.rx_count = static_cast<int>(detail::parse_int(hdr[0], path, rows[k].first));
  ch.tx_count = static_cast<int>(detail::parse_int(hdr[1], path, rows[k].first));
  ch.carrier_freq_hz = detail::parse_finite(hdr[2], path, rows[k].first);
  ch.tx_power_dbm = detail::parse_finite(hdr[3], path, rows[k].first);
  ch.noise_psd = detail::parse_finite(hdr[4], path, rows[k].first);
  if (ch.rx_count < 1 || ch.tx_count < 1)
    detail::parse_fail(path, rows[k].first, "N and M must be positive");
  ++k;

  std::size_t want = static_cast<std::size_t>(ch.rx_count) * ch.tx_count;
  ch.gains.assign(want, {});
  std::vector<bool> seen(want, false);
  std::size_t got = 0;
  for (; k < rows.size(); ++k) {
    auto [lineno, line] = rows[k];
    auto f = detail::split_csv(line);
    if (f.size() != 4) detail::parse_fail(path, lineno, "expected rx,tx,re,im");
    long rx = detail::parse_int(f[0], path, lineno);
    long tx = detail::parse_int(f[1], path, lineno);
    if (rx < 0 || rx >= ch.rx_count || tx < 0 || tx >= ch.tx_count)
      detail::parse_fail(path, lineno, "rx/tx index out of declared range");
    std::size_t idx = static_cast<std::size_t>(rx) * ch.tx_count + tx;
    if (seen[idx]) detail::parse_fail(path, lineno, "duplicate rx,tx entry");
    seen[idx] = true;
    ch.gains[idx] = {detail::parse_finite(f[2], path, lineno),
                     detail::parse_finite(f[3], path, lineno)};
    ++got;
  }
  if (got != want)
    throw std::runtime_error(path + ": expected " + std::to_string(want) +
                             " gain rows, got " + std::to_string(got));
  ch.validate();
  return ch;
}

inline void export_impulse(const ImpulseResponseSet& irs, std::ostream& out) {
  for (std::size_t i = 0; i < irs.per_rx.size(); ++i)
    for (const Tap& t : irs.per_rx[i])
      out << i << ',' << fmt_g17(t.tau_ns) << ',' << fmt_g17(t.amp.real())
          << ',' << fmt_g17(t.amp.imag()) << '\n';
}

inline void export_impulse(const ImpulseResponseSet& irs,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  export_impulse(irs, out);
}

inline ImpulseResponseSet load_impulse(const std::string& path) {
  auto rows = detail::read_csv_lines(path);
  ImpulseResponseSet irs;
  for (auto& [lineno, line] : rows) {
    auto f = detail::split_csv(line);
    if (f.size() != 4) detail::parse_fail(path, lineno, "expected rx,tau_ns,re,im");
    if (f[0] == "rx") continue;  // tolerate a column-name row
    long rx = detail::parse_int(f[0], path, lineno);
    if (rx < 0) detail::parse_fail(path, lineno, "negative receiver index");
    if (static_cast<std::size_t>(rx) >= irs.per_rx.size())
      irs.per_rx.resize(rx + 1);
    irs.per_rx[rx].push_back({detail::parse_finite(f[1], path, lineno),
                              {detail::parse_finite(f[2], path, lineno),
                               detail::parse_finite(f[3], path, lineno)}});
  }
  for (auto& taps : irs.per_rx)
    std::stable_sort(taps.begin(), taps.end(),
                     [](const Tap& a, const Tap& b) { return a.tau_ns < b.tau_ns; });
  irs.validate();
  return irs;
}

// Eq.-2-style second moment of the discrete power-delay profile.
inline double delay_spread_ns(const ImpulseResponseSet& irs, int receiver) {
  if (receiver < 0 || static_cast<std::size_t>(receiver) >= irs.per_rx.size())
    throw std::invalid_argument("receiver index out of range");
  const auto& taps = irs.per_rx[receiver];
  if (taps.empty()) throw std::invalid_argument("receiver has no taps");
  if (taps.size() == 1) return 0.0;  // zero variance, exactly
  double psum = 0.0, tsum = 0.0;
  for (const Tap& t : taps) {
    double p = std::norm(t.amp);
    psum += p;
    tsum += p * t.tau_ns;
  }
  double mean = tsum / psum;
  double var = 0.0;
  for (const Tap& t : taps)
    var += std::norm(t.amp) * (t.tau_ns - mean) * (t.tau_ns - mean);
  return std::sqrt(var / psum);
}

struct CoherenceResult {
  double worst_tau_rms_ns = 0.0;
  double bc_hz = std::numeric_limits<double>::infinity();
};

// B_c = 1 / worst-case delay spread; unbounded for pure single-path sets.
inline CoherenceResult coherence_bandwidth(const ImpulseResponseSet& irs) {
  irs.validate();
  CoherenceResult r;
  for (std::size_t i = 0; i < irs.per_rx.size(); ++i)
    r.worst_tau_rms_ns =
        std::max(r.worst_tau_rms_ns, delay_spread_ns(irs, static_cast<int>(i)));
  if (r.worst_tau_rms_ns > 0) r.bc_hz = 1e9 / r.worst_tau_rms_ns;
  return r;
}

// M concurrent BPSK streams at min(B_c, line-rate cap) x 1 b/s/Hz.
inline double ota_throughput_bps(
    int m, double bc_hz,
    double cap_hz = std::numeric_limits<double>::infinity()) {
  if (m < 1) throw std::invalid_argument("M must be >= 1");
  return static_cast<double>(m) * std::min(bc_hz, cap_hz);
}

}  // namespace whype
