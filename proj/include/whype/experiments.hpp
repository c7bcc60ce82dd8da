#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "hv.hpp"
#include "io.hpp"
#include "rng.hpp"

namespace whype {

// Synthetic stand-in for a trained encoder. family_size = 1 gives independent
// quasi-orthogonal class prototypes; family_size > 1 groups classes around
// shared family bases (family_flip from a global base, class_flip from the
// family base), which controls inter-class confusability.
struct SyntheticClassParams {
  std::size_t dim = 512;
  int class_count = 1623;
  int shots_per_class = 20;
  double intra_class_flip = 0.05;
  int family_size = 1;
  double family_flip = 0.5;
  double class_flip = 0.0;

  // Calibrated so un-permuted bundling degrades like a trained encoder's
  // confusion structure. Values frozen by tools/calibrate_encoder.cpp.
  static SyntheticClassParams correlated() {
    SyntheticClassParams p;
    p.family_size = 8;
    p.family_flip = 0.21;
    p.class_flip = 0.105;
    return p;
  }

  void validate() const {
    if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
    if (class_count < 1) throw std::invalid_argument("class_count must be >= 1");
    if (shots_per_class < 1)
      throw std::invalid_argument("shots_per_class must be >= 1");
    if (family_size < 1) throw std::invalid_argument("family_size must be >= 1");
    for (double p : {intra_class_flip, family_flip, class_flip})
      if (!(p >= 0.0) || p > 1.0)
        throw std::invalid_argument("flip probabilities must be in [0,1]");
  }
};

class ClassSet {
 public:
  static ClassSet synthetic(const SyntheticClassParams& params,
                            std::uint64_t seed) {
    params.validate();
    ClassSet s;
    s.synthetic_ = true;
    s.params_ = params;
    s.seed_ = seed;
    Hypervector base = random_hypervector(params.dim, derive_seed(seed, 0xba5e));
    const int families =
        (params.class_count + params.family_size - 1) / params.family_size;
    std::vector<Hypervector> fbase;
    fbase.reserve(families);
    for (int f = 0; f < families; ++f)
      fbase.push_back(
          bitflip_noise(base, params.family_flip, derive_seed(seed, 0xfa31, f)));
    s.protos_.reserve(params.class_count);
    s.shots_.resize(params.class_count);
    s.supports_.reserve(params.class_count);
    s.labels_.reserve(params.class_count);
    for (int c = 0; c < params.class_count; ++c) {
      s.protos_.push_back(bitflip_noise(fbase[c / params.family_size],
                                        params.class_flip,
                                        derive_seed(seed, 0xc1a5, c)));
      s.labels_.push_back("c" + std::to_string(c));
      std::uint64_t shot_seed = derive_seed(seed, 0x5407, c);
      auto& shots = s.shots_[c];
      shots.reserve(params.shots_per_class);
      for (int k = 0; k < params.shots_per_class; ++k)
        shots.push_back(bitflip_noise(s.protos_[c], params.intra_class_flip,
                                      derive_seed(shot_seed, k)));
      s.supports_.push_back(majority_bundle(shots));
    }
    return s;
  }

  // Externally encoded hypervectors: one shot per record, grouped by label in
  // first-appearance order. Class prototypes are the shot majorities.
  static ClassSet imported(
      const std::vector<std::pair<std::string, Hypervector>>& records) {
    if (records.empty()) throw std::invalid_argument("empty hypervector set");
    ClassSet s;
    s.synthetic_ = false;
    for (const auto& [label, hv] : records) {
      int c = -1;
      for (std::size_t i = 0; i < s.labels_.size(); ++i)
        if (s.labels_[i] == label) { c = static_cast<int>(i); break; }
      if (c < 0) {
        c = static_cast<int>(s.labels_.size());
        s.labels_.push_back(label);
        s.shots_.emplace_back();
      }
      if (hv.dim() != records[0].second.dim())
        throw std::invalid_argument("dimension mismatch in imported set");
      s.shots_[c].push_back(hv);
    }
    for (const auto& shots : s.shots_) {
      s.supports_.push_back(majority_bundle(shots));
      s.protos_.push_back(s.supports_.back());
    }
    return s;
  }

  int class_count() const { return static_cast<int>(protos_.size()); }
  std::size_t dim() const { return protos_[0].dim(); }
  bool synthetic_source() const { return synthetic_; }
  const SyntheticClassParams& params() const { return params_; }
  const std::string& label(int c) const { return labels_[c]; }
  const Hypervector& prototype(int c) const { return protos_[c]; }
  const std::vector<Hypervector>& shots(int c) const { return shots_[c]; }

  // Majority bundle of all shots, cached at construction.
  const Hypervector& support_prototype(int c) const { return supports_[c]; }

  // Majority bundle of the first k shots (k <= available); 5-shot sessions.
  Hypervector support_prototype_k(int c, int k) const {
    const auto& shots = shots_[c];
    std::size_t n = std::min<std::size_t>(std::max(k, 1), shots.size());
    if (n == shots.size()) return supports_[c];
    std::vector<Hypervector> head(shots.begin(), shots.begin() + n);
    return majority_bundle(head);
  }

  // Fresh example for class c; tag makes the stream reproducible and
  // collision-free across episodes/slots.
  Hypervector query(int c, std::uint64_t tag) const {
    if (synthetic_)
      return bitflip_noise(protos_[c], params_.intra_class_flip,
                           derive_seed(derive_seed(seed_, 0x9e31, c), tag));
    return shots_[c][tag % shots_[c].size()];
  }

 private:
  bool synthetic_ = true;
  SyntheticClassParams params_;
  std::uint64_t seed_ = 0;
  std::vector<std::string> labels_;
  std::vector<Hypervector> protos_;
  std::vector<std::vector<Hypervector>> shots_;
  std::vector<Hypervector> supports_;
};

enum class SupportMode { Prototype, PerShot };
enum class BundlingMode { Baseline, Permuted };
enum class ChannelMode { Ideal, Wireless };
// Un-permuted bundles carry no slot information; SetRecovery credits the
// overlap between the top-M retrieved classes and the M bundled classes,
// AnyHit credits 1 whenever the single best match is one of them.
enum class Crediting { SetRecovery, AnyHit };

inline const char* to_string(BundlingMode m) {
  return m == BundlingMode::Baseline ? "baseline" : "permuted";
}
inline const char* to_string(ChannelMode c) {
  return c == ChannelMode::Ideal ? "ideal" : "wireless";
}

// Distributes classes (and their stored vectors) round-robin over receivers.
inline std::vector<AssociativeMemory> build_support(
    const ClassSet& set, SupportMode mode, const std::vector<int>& classes,
    int rx_count, std::size_t capacity = 64) {
  if (rx_count < 1) throw std::invalid_argument("rx_count must be >= 1");
  std::vector<AssociativeMemory> mems;
  mems.reserve(rx_count);
  for (int i = 0; i < rx_count; ++i) mems.emplace_back(capacity);
  for (std::size_t k = 0; k < classes.size(); ++k) {
    AssociativeMemory& am = mems[k % rx_count];
    int c = classes[k];
    if (mode == SupportMode::Prototype) {
      am.add(set.label(c), set.support_prototype(c));
    } else {
      for (const auto& shot : set.shots(c)) am.add(set.label(c), shot, true);
    }
  }
  return mems;
}

namespace detail {

struct EpisodeEntry {
  const Hypervector* proto;
  int cls;
  int rx;
  int entry_idx;
};

struct SlotTrace {
  int slot;
  int own;
  int best_other;
};

struct EpisodeSpec {
  const std::vector<EpisodeEntry>* entries;
  const std::vector<int>* slot_cls;  // distinct class ids, one per TX slot
  const std::vector<Hypervector>* queries;
  BundlingMode mode = BundlingMode::Permuted;
  Crediting crediting = Crediting::SetRecovery;
  const std::vector<double>* rx_ber = nullptr;  // null/empty = ideal channel
  int rx_count = 1;
  const PermutationSpec* perm = nullptr;
  const TiePolicy* tie = nullptr;
  std::uint64_t noise_seed = 0;
  std::vector<SlotTrace>* trace = nullptr;
};

// One classification episode: bundle M queries, pass the bundle through the
// (ideal or bit-flip) channel, search each receiver's local entries, reduce
// globally by (score desc, rx asc, entry asc). Returns the episode credit.
inline double run_episode(const EpisodeSpec& sp) {
  const auto& entries = *sp.entries;
  const auto& slot_cls = *sp.slot_cls;
  const auto& queries = *sp.queries;
  const int m = static_cast<int>(slot_cls.size());
  const std::size_t d = queries[0].dim();
  static const PermutationSpec kDefaultPerm{};
  static const TiePolicy kDefaultTie{};
  const PermutationSpec& perm = sp.perm ? *sp.perm : kDefaultPerm;
  const TiePolicy& tie = sp.tie ? *sp.tie : kDefaultTie;

  std::vector<Hypervector> sent;
  sent.reserve(m);
  for (int t = 0; t < m; ++t)
    sent.push_back(sp.mode == BundlingMode::Permuted
                       ? permute(queries[t], t + 1, perm)
                       : queries[t]);
  Hypervector clean = (m == 1) ? sent[0] : majority_bundle(sent, tie);

  const bool noisy = sp.rx_ber && !sp.rx_ber->empty();
  std::vector<Hypervector> copies;
  if (noisy) {
    copies.reserve(sp.rx_count);
    for (int i = 0; i < sp.rx_count; ++i) {
      double b = (*sp.rx_ber)[sp.rx_ber->size() == 1 ? 0 : i];
      copies.push_back(bitflip_noise(clean, b, derive_seed(sp.noise_seed, 0xb1, i)));
    }
  }
  auto copy_of = [&](int i) -> const Hypervector& {
    return noisy ? copies[i] : clean;
  };

  auto better = [](int s, int rx, int idx, int bs, int brx, int bidx) {
    if (s != bs) return s > bs;
    if (rx != brx) return rx < brx;
    return idx < bidx;
  };
  auto in_slots = [&](int cls) {
    return std::find(slot_cls.begin(), slot_cls.end(), cls) != slot_cls.end();
  };

  if (sp.mode == BundlingMode::Permuted) {
    int hits = 0;
    for (int t = 0; t < m; ++t) {
      std::size_t back = (d - perm.step(t + 1, d) % d) % d;
      std::vector<Hypervector> unrot;
      if (noisy) {
        unrot.reserve(sp.rx_count);
        for (int i = 0; i < sp.rx_count; ++i)
          unrot.push_back(rotate(copies[i], back));
      } else {
        unrot.push_back(rotate(clean, back));
      }
      int bs = -1, brx = 0, bcls = -1;
      std::size_t bidx = 0;
      int own = -1, other = -1;
      for (const auto& e : entries) {
        const Hypervector& view = noisy ? unrot[e.rx] : unrot[0];
        int s = hamming_similarity(*e.proto, view);
        if (e.cls == slot_cls[t]) {
          own = std::max(own, s);
        } else {
          other = std::max(other, s);
        }
        if (bs < 0 || better(s, e.rx, e.entry_idx, bs, brx,
                             static_cast<int>(bidx))) {
          bs = s;
          brx = e.rx;
          bidx = e.entry_idx;
          bcls = e.cls;
        }
      }
      if (bcls == slot_cls[t]) ++hits;
      if (sp.trace) sp.trace->push_back({t, own, other});
    }
    return static_cast<double>(hits) / m;
  }

  // Baseline: one un-rotated search over the raw bundle.
  struct Scored {
    int s, rx, idx, cls;
  };
  std::vector<Scored> scored;
  scored.reserve(entries.size());
  for (const auto& e : entries)
    scored.push_back({hamming_similarity(*e.proto, copy_of(e.rx)), e.rx,
                      e.entry_idx, e.cls});
  if (sp.trace) {
    for (int t = 0; t < m; ++t) {
      int own = -1, other = -1;
      for (const auto& sc : scored) {
        int& tgt = (sc.cls == slot_cls[t]) ? own : other;
        tgt = std::max(tgt, sc.s);
      }
      sp.trace->push_back({t, own, other});
    }
  }
  if (sp.crediting == Crediting::AnyHit) {
    const Scored* best = &scored[0];
    for (const auto& sc : scored)
      if (better(sc.s, sc.rx, sc.idx, best->s, best->rx, best->idx)) best = &sc;
    return in_slots(best->cls) ? 1.0 : 0.0;
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.s != b.s) return a.s > b.s;
    if (a.rx != b.rx) return a.rx < b.rx;
    return a.idx < b.idx;
  });
  std::vector<int> top;
  int overlap = 0;
  for (const auto& sc : scored) {
    if (std::find(top.begin(), top.end(), sc.cls) != top.end()) continue;
    top.push_back(sc.cls);
    if (in_slots(sc.cls)) ++overlap;
    if (static_cast<int>(top.size()) == m) break;
  }
  return static_cast<double>(overlap) / m;
}

inline void parallel_episodes(int episodes, int workers,
                              const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, episodes));
  if (workers == 1) {
    for (int e = 0; e < episodes; ++e) fn(e);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    int lo = static_cast<int>(static_cast<long long>(episodes) * w / workers);
    int hi =
        static_cast<int>(static_cast<long long>(episodes) * (w + 1) / workers);
    pool.emplace_back([lo, hi, &fn] {
      for (int e = lo; e < hi; ++e) fn(e);
    });
  }
  for (auto& th : pool) th.join();
}

inline void mean_sem(const std::vector<double>& xs, double& mean, double& sem) {
  mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  if (xs.size() < 2) {
    sem = 0.0;
    return;
  }
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  sem = std::sqrt(ss / (static_cast<double>(xs.size()) *
                        (static_cast<double>(xs.size()) - 1.0)));
}

// First `count` elements of a uniform random permutation of 0..n-1.
inline void sample_distinct(std::vector<int>& scratch, int n, int count,
                            SplitMix64& rng) {
  scratch.resize(n);
  std::iota(scratch.begin(), scratch.end(), 0);
  for (int i = 0; i < count; ++i) {
    std::size_t j = i + rng.below(static_cast<std::uint64_t>(n - i));
    std::swap(scratch[i], scratch[j]);
  }
}

inline void check_rx_ber(const std::vector<double>& rx_ber, int rx_count) {
  if (rx_ber.empty())
    throw std::invalid_argument(
        "wireless channel mode needs per-receiver BERs");
  if (rx_ber.size() != 1 && rx_ber.size() != static_cast<std::size_t>(rx_count))
    throw std::invalid_argument("BER list must have 1 or rx_count entries");
  for (double b : rx_ber)
    if (!(b >= 0.0) || b > 1.0)
      throw std::invalid_argument("BER values must be in [0,1]");
}

}  // namespace detail

struct FewShotConfig {
  int classes_per_episode = 100;
  int episodes = 1000;
  int bundle = 3;
  BundlingMode mode = BundlingMode::Permuted;
  ChannelMode channel = ChannelMode::Ideal;
  std::vector<double> rx_ber;  // wireless mode: 1 (broadcast) or rx_count values
  int rx_count = 8;
  std::size_t capacity = 64;
  SupportMode support = SupportMode::Prototype;
  Crediting crediting = Crediting::SetRecovery;
  PermutationSpec perm;
  TiePolicy tie;
  int workers = 1;
  int trace_episodes = 0;
};

struct TraceRow {
  int episode;
  int slot;
  std::string cls;
  int own;
  int best_other;
};

struct FewShotResult {
  double accuracy = 0.0;
  double std_error = 0.0;
  std::vector<TraceRow> traces;
};

namespace detail {

// Per-receiver entry lists for one episode, honoring round-robin placement
// and per-shot insertion order; throws on capacity overflow.
inline std::vector<EpisodeEntry> make_entries(const ClassSet& set,
                                              const std::vector<int>& classes,
                                              SupportMode support, int rx_count,
                                              std::size_t capacity) {
  std::vector<EpisodeEntry> entries;
  std::vector<int> next_idx(rx_count, 0);
  for (std::size_t k = 0; k < classes.size(); ++k) {
    int rx = static_cast<int>(k) % rx_count;
    int c = classes[k];
    if (support == SupportMode::Prototype) {
      entries.push_back({&set.support_prototype(c), c, rx, next_idx[rx]++});
    } else {
      for (const auto& shot : set.shots(c))
        entries.push_back({&shot, c, rx, next_idx[rx]++});
    }
  }
  for (int i = 0; i < rx_count; ++i)
    if (next_idx[i] > static_cast<int>(capacity))
      throw std::runtime_error(
          "associative memory capacity exceeded: receiver " +
          std::to_string(i) + " needs " + std::to_string(next_idx[i]) +
          " of " + std::to_string(capacity) + " entries");
  return entries;
}

}  // namespace detail

inline FewShotResult run_few_shot(const FewShotConfig& cfg, const ClassSet& set,
                                  std::uint64_t seed) {
  if (cfg.bundle < 1 || cfg.bundle % 2 == 0)
    throw std::invalid_argument(
        "bundle size must be odd: even majorities are tie-dominated");
  if (cfg.bundle > 63) throw std::invalid_argument("bundle size must be <= 63");
  if (cfg.rx_count < 1) throw std::invalid_argument("rx_count must be >= 1");
  if (cfg.episodes < 1) throw std::invalid_argument("episodes must be >= 1");
  if (cfg.classes_per_episode < cfg.bundle ||
      cfg.classes_per_episode > set.class_count())
    throw std::invalid_argument(
        "classes_per_episode must be in [bundle, class_count]");
  if (static_cast<std::size_t>(cfg.classes_per_episode) >
      static_cast<std::size_t>(cfg.rx_count) * cfg.capacity)
    throw std::runtime_error(
        "associative memory capacity exceeded: " +
        std::to_string(cfg.classes_per_episode) + " classes > " +
        std::to_string(cfg.rx_count) + " x " + std::to_string(cfg.capacity));
  if (cfg.channel == ChannelMode::Wireless)
    detail::check_rx_ber(cfg.rx_ber, cfg.rx_count);

  std::vector<double> credits(cfg.episodes, 0.0);
  std::vector<std::vector<detail::SlotTrace>> traces(
      std::min(cfg.trace_episodes, cfg.episodes));
  std::vector<std::vector<int>> slot_labels(traces.size());

  detail::parallel_episodes(cfg.episodes, cfg.workers, [&](int e) {
    thread_local std::vector<int> scratch;
    SplitMix64 sel(derive_seed(seed, 0x5e1e, e));
    detail::sample_distinct(scratch, set.class_count(), cfg.classes_per_episode,
                            sel);
    std::vector<int> classes(scratch.begin(),
                             scratch.begin() + cfg.classes_per_episode);
    auto entries = detail::make_entries(set, classes, cfg.support, cfg.rx_count,
                                        cfg.capacity);
    std::vector<int> slot_cls(classes.begin(), classes.begin() + cfg.bundle);
    std::vector<Hypervector> queries;
    queries.reserve(cfg.bundle);
    for (int t = 0; t < cfg.bundle; ++t)
      queries.push_back(set.query(
          slot_cls[t], (static_cast<std::uint64_t>(e) << 6) | t));

    detail::EpisodeSpec sp;
    sp.entries = &entries;
    sp.slot_cls = &slot_cls;
    sp.queries = &queries;
    sp.mode = cfg.mode;
    sp.crediting = cfg.crediting;
    sp.rx_ber = cfg.channel == ChannelMode::Wireless ? &cfg.rx_ber : nullptr;
    sp.rx_count = cfg.rx_count;
    sp.perm = &cfg.perm;
    sp.tie = &cfg.tie;
    sp.noise_seed = derive_seed(seed, 0xeb17, e);
    if (e < static_cast<int>(traces.size())) {
      sp.trace = &traces[e];
      slot_labels[e] = slot_cls;
    }
    credits[e] = detail::run_episode(sp);
  });

  FewShotResult res;
  detail::mean_sem(credits, res.accuracy, res.std_error);
  for (std::size_t e = 0; e < traces.size(); ++e)
    for (const auto& tr : traces[e])
      res.traces.push_back({static_cast<int>(e), tr.slot,
                            set.label(slot_labels[e][tr.slot]), tr.own,
                            tr.best_other});
  return res;
}

struct SweepConfig {
  int classes_per_episode = 100;
  int episodes = 1000;
  int rx_count = 8;
  std::size_t capacity = 64;
  SupportMode support = SupportMode::Prototype;
  int workers = 1;
};

struct SweepPointResult {
  double ber = 0.0;
  double accuracy = 0.0;
  double std_error = 0.0;
};

// Single-query (M=1) classification accuracy vs injected per-receiver flip
// rate. Class selections are shared across BER points; flips are not.
inline std::vector<SweepPointResult> ber_accuracy_sweep(
    const SweepConfig& cfg, const ClassSet& set,
    const std::vector<double>& ber_list, std::uint64_t seed) {
  if (ber_list.empty()) throw std::invalid_argument("empty BER list");
  for (double b : ber_list)
    if (!(b >= 0.0) || b > 0.5)
      throw std::invalid_argument("injected BER must be in [0, 0.5]");
  if (cfg.rx_count < 1) throw std::invalid_argument("rx_count must be >= 1");
  if (cfg.classes_per_episode < 1 ||
      cfg.classes_per_episode > set.class_count())
    throw std::invalid_argument(
        "classes_per_episode must be in [1, class_count]");

  std::vector<SweepPointResult> out;
  out.reserve(ber_list.size());
  for (std::size_t bi = 0; bi < ber_list.size(); ++bi) {
    std::vector<double> rx_ber{ber_list[bi]};
    std::vector<double> credits(cfg.episodes, 0.0);
    detail::parallel_episodes(cfg.episodes, cfg.workers, [&](int e) {
      thread_local std::vector<int> scratch;
      SplitMix64 sel(derive_seed(seed, 0x5e1e, e));
      detail::sample_distinct(scratch, set.class_count(),
                              cfg.classes_per_episode, sel);
      std::vector<int> classes(scratch.begin(),
                               scratch.begin() + cfg.classes_per_episode);
      auto entries = detail::make_entries(set, classes, cfg.support,
                                          cfg.rx_count, cfg.capacity);
      std::vector<int> slot_cls{classes[0]};
      std::vector<Hypervector> queries{
          set.query(classes[0], static_cast<std::uint64_t>(e) << 6)};
      detail::EpisodeSpec sp;
      sp.entries = &entries;
      sp.slot_cls = &slot_cls;
      sp.queries = &queries;
      sp.mode = BundlingMode::Baseline;
      sp.crediting = Crediting::AnyHit;
      sp.rx_ber = &rx_ber;
      sp.rx_count = cfg.rx_count;
      sp.noise_seed = derive_seed(seed, 0xbe2a, bi * 1000003ull + e);
      credits[e] = detail::run_episode(sp);
    });
    SweepPointResult pr;
    pr.ber = ber_list[bi];
    detail::mean_sem(credits, pr.accuracy, pr.std_error);
    out.push_back(pr);
  }
  return out;
}

struct ContinualConfig {
  int initial_classes = 64;
  int classes_per_session = 64;
  int shots = 5;
  int sessions = 6;
  int queries_per_session = 1000;
  int bundle = 3;
  BundlingMode mode = BundlingMode::Permuted;
  ChannelMode channel = ChannelMode::Ideal;
  std::vector<double> rx_ber;
  int rx_count = 8;
  std::size_t capacity = 64;
  Crediting crediting = Crediting::SetRecovery;
  PermutationSpec perm;
  TiePolicy tie;
  int workers = 1;
};

struct SessionPoint {
  int session = 0;
  int classes_seen = 0;
  double accuracy = 0.0;
  double std_error = 0.0;
};

// Incremental class arrival: each session adds new classes with few-shot
// prototypes at a stable receiver placement, then queries the whole history.
// Exhausting the class pool ends the curve early.
inline std::vector<SessionPoint> run_continual(const ContinualConfig& cfg,
                                               const ClassSet& set,
                                               std::uint64_t seed) {
  if (cfg.bundle < 1 || cfg.bundle % 2 == 0)
    throw std::invalid_argument(
        "bundle size must be odd: even majorities are tie-dominated");
  if (cfg.bundle > 63) throw std::invalid_argument("bundle size must be <= 63");
  if (cfg.initial_classes < cfg.bundle)
    throw std::invalid_argument("initial_classes must be >= bundle");
  if (cfg.classes_per_session < 0 || cfg.sessions < 1 ||
      cfg.queries_per_session < 1 || cfg.shots < 1 || cfg.rx_count < 1)
    throw std::invalid_argument("continual config values must be positive");
  if (cfg.channel == ChannelMode::Wireless)
    detail::check_rx_ber(cfg.rx_ber, cfg.rx_count);

  std::vector<int> pool(set.class_count());
  std::iota(pool.begin(), pool.end(), 0);
  SplitMix64 shuffle(derive_seed(seed, 0xc001));
  for (std::size_t i = pool.size(); i > 1; --i)
    std::swap(pool[i - 1], pool[shuffle.below(i)]);

  std::vector<Hypervector> supports;  // aligned with pool order
  std::vector<SessionPoint> curve;
  for (int s = 0; s < cfg.sessions; ++s) {
    long long seen = static_cast<long long>(cfg.initial_classes) +
                     static_cast<long long>(s) * cfg.classes_per_session;
    if (seen > set.class_count()) break;  // pool exhausted: partial curve
    if ((seen + cfg.rx_count - 1) / cfg.rx_count >
        static_cast<long long>(cfg.capacity))
      throw std::runtime_error(
          "associative memory capacity exceeded: session " +
          std::to_string(s + 1) + " needs " +
          std::to_string((seen + cfg.rx_count - 1) / cfg.rx_count) + " of " +
          std::to_string(cfg.capacity) + " entries per receiver");
    while (static_cast<long long>(supports.size()) < seen) {
      int c = pool[supports.size()];
      supports.push_back(set.support_prototype_k(c, cfg.shots));
    }
    std::vector<detail::EpisodeEntry> entries;
    entries.reserve(seen);
    for (long long k = 0; k < seen; ++k)
      entries.push_back({&supports[k], pool[k],
                         static_cast<int>(k % cfg.rx_count),
                         static_cast<int>(k / cfg.rx_count)});

    std::vector<double> credits(cfg.queries_per_session, 0.0);
    detail::parallel_episodes(cfg.queries_per_session, cfg.workers, [&](int j) {
      thread_local std::vector<int> scratch;
      std::uint64_t trial =
          static_cast<std::uint64_t>(s) * cfg.queries_per_session + j;
      SplitMix64 sel(derive_seed(seed, 0x7a1c, trial));
      detail::sample_distinct(scratch, static_cast<int>(seen), cfg.bundle, sel);
      std::vector<int> slot_cls(cfg.bundle);
      std::vector<Hypervector> queries;
      queries.reserve(cfg.bundle);
      for (int t = 0; t < cfg.bundle; ++t) {
        slot_cls[t] = pool[scratch[t]];
        queries.push_back(set.query(slot_cls[t], (trial << 6) | t));
      }
      detail::EpisodeSpec sp;
      sp.entries = &entries;
      sp.slot_cls = &slot_cls;
      sp.queries = &queries;
      sp.mode = cfg.mode;
      sp.crediting = cfg.crediting;
      sp.rx_ber = cfg.channel == ChannelMode::Wireless ? &cfg.rx_ber : nullptr;
      sp.rx_count = cfg.rx_count;
      sp.perm = &cfg.perm;
      sp.tie = &cfg.tie;
      sp.noise_seed = derive_seed(seed, 0xeb18, trial);
      credits[j] = detail::run_episode(sp);
    });
    SessionPoint pt;
    pt.session = s + 1;
    pt.classes_seen = static_cast<int>(seen);
    detail::mean_sem(credits, pt.accuracy, pt.std_error);
    curve.push_back(pt);
  }
  return curve;
}

struct ExperimentRow {
  std::string experiment;
  int bundle_size = 1;
  std::string mode;
  std::string channel;
  double accuracy = 0.0;
  double std_error = 0.0;
};

inline void write_experiment_csv(std::ostream& out,
                                 const std::vector<ExperimentRow>& rows) {
  out << "experiment,bundle_size,mode,channel,accuracy,stderr\n";
  for (const auto& r : rows)
    out << r.experiment << ',' << r.bundle_size << ',' << r.mode << ','
        << r.channel << ',' << fmt_g17(r.accuracy) << ','
        << fmt_g17(r.std_error) << '\n';
}

inline void write_traces_csv(std::ostream& out,
                             const std::vector<TraceRow>& rows) {
  out << "episode,slot,class,own_similarity,best_other_similarity\n";
  for (const auto& r : rows)
    out << r.episode << ',' << r.slot << ',' << r.cls << ',' << r.own << ','
        << r.best_other << '\n';
}

}  // namespace whype
