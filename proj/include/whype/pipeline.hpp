#pragma once

#include <stdexcept>
#include <vector>

#include "hv.hpp"
#include "ota.hpp"

namespace whype {

struct OtaLink {
  ChannelMatrix channel;
  PhaseAssignment assignment;
  ConstellationSet constellations;  // noiseless superposition points
  DecisionRegions regions;
  double noise_sigma = 0.0;  // per-axis, sigma^2 = N0/2
  bool permute_enabled = true;
  PermutationSpec perm;
};

inline OtaLink make_link(const ChannelMatrix& ch, const PhaseAssignment& pa,
                         bool permute_enabled = true,
                         RegionMode mode = RegionMode::Supervised,
                         std::uint64_t region_seed = 0) {
  OtaLink link;
  link.channel = ch;
  link.assignment = pa;
  link.constellations = build_constellations(ch, pa);
  link.regions = decision_regions(link.constellations, mode, region_seed);
  link.noise_sigma = std::sqrt(ch.noise_psd / 2.0);
  link.permute_enabled = permute_enabled;
  link.perm.max_slot = ch.tx_count;
  return link;
}

// Whole-hypervector transmission: per bit position the (optionally permuted)
// query bits form the transmit word; each receiver sees its superposition
// point plus complex AWGN and decodes by nearest centroid. The noise stream
// is derived per position, so any parallel schedule gives identical output.
inline std::vector<Hypervector> transmit_bundle(
    const OtaLink& link, const std::vector<Hypervector>& queries,
    std::uint64_t seed) {
  const int m = link.channel.tx_count;
  const int n = link.channel.rx_count;
  if (static_cast<int>(queries.size()) != m)
    throw std::invalid_argument("query count does not match channel M");
  const std::size_t d = queries[0].dim();
  for (const auto& q : queries)
    if (q.dim() != d) throw std::invalid_argument("dimension mismatch");

  std::vector<Hypervector> sent;
  sent.reserve(m);
  for (int t = 0; t < m; ++t)
    sent.push_back(link.permute_enabled
                       ? permute(queries[t], t + 1, link.perm)
                       : queries[t]);

  std::vector<Hypervector> out(n, Hypervector(d));
  for (std::size_t p = 0; p < d; ++p) {
    unsigned word = 0;
    for (int t = 0; t < m; ++t) word |= static_cast<unsigned>(sent[t].get(p)) << t;
    SplitMix64 rng(derive_seed(seed, p));
    for (int i = 0; i < n; ++i) {
      std::complex<double> v = link.constellations.per_rx[i][word].value;
      if (link.noise_sigma > 0)
        v += std::complex<double>(link.noise_sigma * rng.gaussian(),
                                  link.noise_sigma * rng.gaussian());
      const ReceiverRegions& r = link.regions.per_rx[i];
      if (std::norm(v - r.c1) < std::norm(v - r.c0)) out[i].set(p, true);
    }
  }
  return out;
}

// Fast abstraction: exact digital majority of the (permuted) queries, then
// per-receiver i.i.d. bit flips at that receiver's BER.
inline std::vector<Hypervector> fast_bundle(
    const std::vector<Hypervector>& queries, const std::vector<double>& rx_ber,
    std::uint64_t seed, bool permute_enabled = true,
    const PermutationSpec& perm = {}, const TiePolicy& tie = {}) {
  if (queries.empty()) throw std::invalid_argument("empty bundle");
  for (double b : rx_ber)
    if (!(b >= 0.0) || b > 0.5)
      throw std::invalid_argument("per-receiver BER must be in [0, 0.5]");
  std::vector<Hypervector> sent;
  sent.reserve(queries.size());
  for (std::size_t t = 0; t < queries.size(); ++t)
    sent.push_back(permute_enabled ? permute(queries[t], t + 1, perm)
                                   : queries[t]);
  Hypervector clean = majority_bundle(sent, tie);
  std::vector<Hypervector> out;
  out.reserve(rx_ber.size());
  for (std::size_t i = 0; i < rx_ber.size(); ++i)
    out.push_back(bitflip_noise(clean, rx_ber[i], derive_seed(seed, 0xfb, i)));
  return out;
}

// Monte-Carlo counterpart of the analytic flip rate: fraction of decoded
// bits disagreeing with the digital majority, per receiver, over `trials`
// random query sets.
inline std::vector<double> measure_empirical_ber(const OtaLink& link,
                                                 std::size_t trials,
                                                 std::uint64_t seed,
                                                 std::size_t dim = 512) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const int m = link.channel.tx_count;
  const int n = link.channel.rx_count;
  std::vector<std::size_t> errs(n, 0);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    std::vector<Hypervector> queries;
    for (int t = 0; t < m; ++t)
      queries.push_back(
          random_hypervector(dim, derive_seed(seed, trial * m + t, 0x9e)));
    std::vector<Hypervector> sent;
    for (int t = 0; t < m; ++t)
      sent.push_back(link.permute_enabled
                         ? permute(queries[t], t + 1, link.perm)
                         : queries[t]);
    Hypervector clean = majority_bundle(sent);
    std::vector<Hypervector> rx =
        transmit_bundle(link, queries, derive_seed(seed, trial, 0x77));
    for (int i = 0; i < n; ++i) errs[i] += hamming_distance(rx[i], clean);
  }
  std::vector<double> ber(n);
  for (int i = 0; i < n; ++i)
    ber[i] = static_cast<double>(errs[i]) /
             (static_cast<double>(trials) * static_cast<double>(dim));
  return ber;
}

}  // namespace whype
