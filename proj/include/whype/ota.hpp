#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <fstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "channel.hpp"
#include "io.hpp"
#include "rng.hpp"

namespace whype {

inline constexpr int kPhaseCount = 8;  // 45-degree grid
inline constexpr int kPairCount = 56;  // ordered pairs with phi0 != phi1

inline double phase_deg(int idx) { return 45.0 * idx; }

inline std::complex<double> phase_unit(int idx) {
  static const std::array<std::complex<double>, 8> u = [] {
    std::array<std::complex<double>, 8> a{};
    for (int i = 0; i < 8; ++i)
      a[i] = std::polar(1.0, 45.0 * i * 3.14159265358979323846 / 180.0);
    return a;
  }();
  return u[idx];
}

struct PhasePair {
  int phi0 = 0;  // alphabet index for symbol 0
  int phi1 = 4;  // alphabet index for symbol 1

  bool operator==(const PhasePair& o) const {
    return phi0 == o.phi0 && phi1 == o.phi1;
  }
};

// Ordered distinct pairs in lexicographic (phi0, phi1) order; index order is
// the optimizer's tie-break order.
inline int pair_index(const PhasePair& p) {
  return p.phi0 * 7 + p.phi1 - (p.phi1 > p.phi0 ? 1 : 0);
}

inline PhasePair pair_from_index(int idx) {
  int a = idx / 7, r = idx % 7;
  return {a, r + (r >= a ? 1 : 0)};
}

struct PhaseAssignment {
  std::vector<PhasePair> pairs;

  int tx_count() const { return static_cast<int>(pairs.size()); }

  void validate() const {
    if (pairs.empty()) throw std::invalid_argument("assignment has no pairs");
    for (const PhasePair& p : pairs)
      if (p.phi0 < 0 || p.phi0 >= kPhaseCount || p.phi1 < 0 ||
          p.phi1 >= kPhaseCount)
        throw std::invalid_argument("phase outside the 8-value grid");
  }
};

// Bare list of [phi0_deg, phi1_deg] pairs. When metadata is supplied the
// list moves under "pairs_deg" next to the run's seed and config hash;
// load_assignment accepts both forms.
inline void save_assignment(const PhaseAssignment& pa, const std::string& path,
                            const nlohmann::json* metadata = nullptr) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const PhasePair& p : pa.pairs)
    pairs.push_back({phase_deg(p.phi0), phase_deg(p.phi1)});
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  if (metadata) {
    nlohmann::json j = *metadata;
    j["pairs_deg"] = pairs;
    out << j.dump(2) << '\n';
  } else {
    out << pairs.dump(2) << '\n';
  }
}

inline PhaseAssignment load_assignment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  if (j.is_object()) {
    if (!j.contains("pairs_deg"))
      throw std::runtime_error(path + ": missing pairs_deg");
    j = j.at("pairs_deg");
  }
  PhaseAssignment pa;
  for (const auto& e : j) {
    auto idx_of = [&](double deg) {
      double q = deg / 45.0;
      int i = static_cast<int>(std::lround(q));
      if (std::abs(q - i) > 1e-9 || i < 0 || i >= kPhaseCount)
        throw std::runtime_error(path + ": phase " + fmt_g17(deg) +
                                 " is not a multiple of 45 in [0,315]");
      return i;
    };
    pa.pairs.push_back({idx_of(e.at(0).get<double>()), idx_of(e.at(1).get<double>())});
  }
  pa.validate();
  return pa;
}

inline int majority_label(unsigned word, int m) {
  return 2 * std::popcount(word) > m ? 1 : 0;
}

struct ConstellationPoint {
  std::complex<double> value;
  unsigned word = 0;
  int label = 0;
};

struct ConstellationSet {
  int tx_count = 0;
  std::vector<std::vector<ConstellationPoint>> per_rx;  // 2^M points each
};

// Superposition per receiver: sum over TX j of gain[i][j]*sqrt(P)*e^{i*phi},
// where bit j of the transmit word selects phi1 over phi0.
inline ConstellationSet build_constellations(const ChannelMatrix& ch,
                                             const PhaseAssignment& pa) {
  ch.validate();
  pa.validate();
  if (pa.tx_count() != ch.tx_count)
    throw std::invalid_argument("assignment pair count does not match channel M");
  const int m = ch.tx_count;
  const unsigned words = 1u << m;
  const double amp = std::sqrt(ch.tx_power_mw());
  ConstellationSet cs;
  cs.tx_count = m;
  cs.per_rx.resize(ch.rx_count);
  for (int i = 0; i < ch.rx_count; ++i) {
    cs.per_rx[i].resize(words);
    for (unsigned w = 0; w < words; ++w) {
      std::complex<double> v = 0.0;
      for (int j = 0; j < m; ++j) {
        int phi = ((w >> j) & 1u) ? pa.pairs[j].phi1 : pa.pairs[j].phi0;
        v += ch.at(i, j) * (amp * phase_unit(phi));
      }
      cs.per_rx[i][w] = {v, w, majority_label(w, m)};
    }
  }
  return cs;
}

enum class RegionMode { Supervised, KMeans };

struct ReceiverRegions {
  std::complex<double> c0;
  std::complex<double> c1;
  double dc = 0.0;
  bool consistent = false;
};

struct DecisionRegions {
  std::vector<ReceiverRegions> per_rx;
  bool all_consistent = false;
};

namespace detail {

// Every point strictly nearest its own label's centroid. Coincident
// centroids fail unless only one label is present (vacuously consistent).
inline bool check_consistent(const std::vector<ConstellationPoint>& pts,
                             std::complex<double> c0, std::complex<double> c1,
                             bool both_labels) {
  if (!both_labels) return true;
  for (const ConstellationPoint& p : pts) {
    double d0 = std::norm(p.value - c0), d1 = std::norm(p.value - c1);
    if (p.label == 1 ? !(d1 < d0) : !(d0 < d1)) return false;
  }
  return true;
}

inline ReceiverRegions supervised_regions(
    const std::vector<ConstellationPoint>& pts) {
  std::complex<double> s0 = 0.0, s1 = 0.0;
  int n0 = 0, n1 = 0;
  for (const ConstellationPoint& p : pts) {
    if (p.label == 1) {
      s1 += p.value;
      ++n1;
    } else {
      s0 += p.value;
      ++n0;
    }
  }
  ReceiverRegions r;
  if (n0 == 0 || n1 == 0) {
    r.c0 = r.c1 = (s0 + s1) / static_cast<double>(n0 + n1);
    r.dc = 0.0;
    r.consistent = true;
    return r;
  }
  r.c0 = s0 / static_cast<double>(n0);
  r.c1 = s1 / static_cast<double>(n1);
  r.dc = std::abs(r.c1 - r.c0);
  r.consistent = check_consistent(pts, r.c0, r.c1, true);
  return r;
}

inline ReceiverRegions kmeans_regions(const std::vector<ConstellationPoint>& pts,
                                      std::uint64_t seed, int restarts) {
  const std::size_t n = pts.size();
  SplitMix64 rng(seed);
  double best_sse = std::numeric_limits<double>::infinity();
  std::complex<double> best_a = pts[0].value, best_b = pts[0].value;
  std::vector<int> assign(n), best_assign(n, 0);
  for (int r = 0; r < restarts; ++r) {
    std::size_t ia = rng.below(n);
    std::size_t ib = rng.below(n);
    std::complex<double> a = pts[ia].value, b = pts[ib].value;
    for (int it = 0; it < 100; ++it) {
      bool changed = false;
      std::complex<double> sa = 0.0, sb = 0.0;
      int na = 0, nb = 0;
      for (std::size_t i = 0; i < n; ++i) {
        int c = std::norm(pts[i].value - b) < std::norm(pts[i].value - a);
        if (assign[i] != c) changed = true;
        assign[i] = c;
        if (c) {
          sb += pts[i].value;
          ++nb;
        } else {
          sa += pts[i].value;
          ++na;
        }
      }
      if (na > 0) a = sa / static_cast<double>(na);
      if (nb > 0) b = sb / static_cast<double>(nb);
      if (!changed && it > 0) break;
    }
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      sse += std::norm(pts[i].value - (assign[i] ? b : a));
    if (sse < best_sse) {
      best_sse = sse;
      best_a = a;
      best_b = b;
      best_assign = assign;
    }
  }
  // match clusters to majority labels by vote; ties keep cluster 0 -> label 0
  int vote = 0;
  bool saw0 = false, saw1 = false;
  for (std::size_t i = 0; i < n; ++i) {
    vote += (pts[i].label == 1) == (best_assign[i] == 1) ? 1 : -1;
    (pts[i].label == 1 ? saw1 : saw0) = true;
  }
  ReceiverRegions r;
  r.c0 = vote >= 0 ? best_a : best_b;
  r.c1 = vote >= 0 ? best_b : best_a;
  r.dc = std::abs(r.c1 - r.c0);
  r.consistent = check_consistent(pts, r.c0, r.c1, saw0 && saw1);
  return r;
}

}  // namespace detail

inline DecisionRegions decision_regions(const ConstellationSet& cs,
                                        RegionMode mode = RegionMode::Supervised,
                                        std::uint64_t seed = 0,
                                        int kmeans_restarts = 10) {
  if (cs.per_rx.empty() || cs.per_rx[0].empty())
    throw std::invalid_argument("empty constellation");
  DecisionRegions dr;
  dr.all_consistent = true;
  for (std::size_t i = 0; i < cs.per_rx.size(); ++i) {
    ReceiverRegions r =
        mode == RegionMode::Supervised
            ? detail::supervised_regions(cs.per_rx[i])
            : detail::kmeans_regions(cs.per_rx[i], derive_seed(seed, i),
                                     kmeans_restarts);
    dr.all_consistent = dr.all_consistent && r.consistent;
    dr.per_rx.push_back(r);
  }
  return dr;
}

// Eq.-1-style BPSK error rate on the centroid distance.
inline double eq1_ber(double dc, double n0) {
  if (!(n0 > 0)) throw std::invalid_argument("N0 must be > 0");
  return 0.5 * std::erfc(0.5 * dc / std::sqrt(n0));
}

enum class BerMode { Centroid, Exact };

struct BerReport {
  std::vector<double> per_rx;
  double avg = 0.0;
  PhaseAssignment assignment;
};

namespace detail {

// Exact mode: per-point Gaussian error probability against the nearest-
// centroid boundary (per-axis sigma^2 = N0/2). Points already on the wrong
// side contribute > 1/2, which is what makes this mode a useful diagnostic.
inline double exact_rx_ber(const std::vector<ConstellationPoint>& pts,
                           const ReceiverRegions& r, double n0) {
  if (r.dc == 0.0) return 0.5;
  std::complex<double> u = (r.c1 - r.c0) / r.dc;
  std::complex<double> mid = 0.5 * (r.c0 + r.c1);
  double sum = 0.0;
  for (const ConstellationPoint& p : pts) {
    std::complex<double> rel = p.value - mid;
    double t = rel.real() * u.real() + rel.imag() * u.imag();
    double toward_own = p.label == 1 ? t : -t;
    sum += 0.5 * std::erfc(toward_own / std::sqrt(n0));
  }
  return sum / static_cast<double>(pts.size());
}

}  // namespace detail

inline BerReport ber_per_rx(const DecisionRegions& dr,
                            const ConstellationSet& cs, double n0,
                            BerMode mode = BerMode::Centroid) {
  if (!(n0 > 0)) throw std::invalid_argument("N0 must be > 0");
  BerReport rep;
  for (std::size_t i = 0; i < dr.per_rx.size(); ++i) {
    double b = mode == BerMode::Centroid
                   ? eq1_ber(dr.per_rx[i].dc, n0)
                   : detail::exact_rx_ber(cs.per_rx[i], dr.per_rx[i], n0);
    rep.per_rx.push_back(b);
    rep.avg += b;
  }
  rep.avg /= static_cast<double>(dr.per_rx.size());
  return rep;
}

inline void save_ber_report(const BerReport& rep, std::ostream& out) {
  out << "rx,ber\n";
  for (std::size_t i = 0; i < rep.per_rx.size(); ++i)
    out << i << ',' << fmt_g17(rep.per_rx[i]) << '\n';
  out << "avg," << fmt_g17(rep.avg) << '\n';
}

inline void save_ber_report(const BerReport& rep, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  save_ber_report(rep, out);
}

inline BerReport load_ber_report(const std::string& path) {
  BerReport rep;
  bool saw_avg = false;
  auto lines = detail::read_csv_lines(path);
  for (const auto& [lineno, text] : lines) {
    auto f = detail::split_csv(text);
    if (f.size() != 2)
      detail::parse_fail(path, lineno, "expected 2 fields, got " +
                                           std::to_string(f.size()));
    if (f[0] == "rx") continue;  // header
    if (f[0] == "avg") {
      rep.avg = detail::parse_finite(f[1], path, lineno);
      saw_avg = true;
      continue;
    }
    std::size_t idx =
        static_cast<std::size_t>(detail::parse_int(f[0], path, lineno));
    if (idx != rep.per_rx.size())
      detail::parse_fail(path, lineno, "receiver rows must be 0,1,2,...");
    double b = detail::parse_finite(f[1], path, lineno);
    if (b < 0.0 || b > 1.0)
      detail::parse_fail(path, lineno, "BER out of [0,1]");
    rep.per_rx.push_back(b);
  }
  if (rep.per_rx.empty())
    throw std::runtime_error(path + ": no receiver rows");
  if (!saw_avg) {
    rep.avg = 0.0;
    for (double b : rep.per_rx) rep.avg += b;
    rep.avg /= static_cast<double>(rep.per_rx.size());
  }
  return rep;
}

enum class OptMethod { Exhaustive, Random, Greedy };

struct OptimizeOptions {
  OptMethod method = OptMethod::Exhaustive;
  int workers = 1;
  std::uint64_t seed = 0;       // sampling stream for the random method
  std::size_t samples = 1000;   // random method budget
  BerMode ber_mode = BerMode::Centroid;
};

struct OptimizeResult {
  PhaseAssignment assignment;
  BerReport report;
  DecisionRegions regions;  // supervised regions of the winner
  bool consistent = false;
};

namespace detail {

// Shared candidate scoring: average BER over receivers for one assignment,
// expressed on precomputed per-(tx, pair, bit) receiver terms.
struct CandidateEvaluator {
  int m = 0, n = 0;
  double n0 = 0.0;
  BerMode mode = BerMode::Centroid;
  std::vector<std::complex<double>> terms;  // ((tx*56+pair)*2+bit)*n + rx
  std::vector<unsigned> maj1;               // words with majority 1
  std::vector<unsigned> maj0;

  explicit CandidateEvaluator(const ChannelMatrix& ch, double noise_psd,
                              BerMode ber_mode)
      : m(ch.tx_count), n(ch.rx_count), n0(noise_psd), mode(ber_mode) {
    const double amp = std::sqrt(ch.tx_power_mw());
    terms.resize(static_cast<std::size_t>(m) * kPairCount * 2 * n);
    for (int t = 0; t < m; ++t)
      for (int p = 0; p < kPairCount; ++p) {
        PhasePair pp = pair_from_index(p);
        for (int b = 0; b < 2; ++b) {
          std::complex<double> ph = amp * phase_unit(b ? pp.phi1 : pp.phi0);
          for (int i = 0; i < n; ++i)
            terms[term_idx(t, p, b, i)] = ch.at(i, t) * ph;
        }
      }
    for (unsigned w = 0; w < (1u << m); ++w)
      (majority_label(w, m) ? maj1 : maj0).push_back(w);
  }

  std::size_t term_idx(int t, int p, int b, int i) const {
    return ((static_cast<std::size_t>(t) * kPairCount + p) * 2 + b) * n + i;
  }

  // pts is row-major [rx][word]
  double score_points(const std::vector<std::complex<double>>& pts) const {
    const unsigned words = 1u << m;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const std::complex<double>* row = pts.data() + static_cast<std::size_t>(i) * words;
      std::complex<double> s1 = 0.0, s0 = 0.0;
      for (unsigned w : maj1) s1 += row[w];
      for (unsigned w : maj0) s0 += row[w];
      std::complex<double> c1 = s1 / static_cast<double>(maj1.size());
      std::complex<double> c0 = s0 / static_cast<double>(maj0.size());
      double dc = std::abs(c1 - c0);
      if (mode == BerMode::Centroid) {
        sum += eq1_ber(dc, n0);
      } else if (dc == 0.0) {
        sum += 0.5;
      } else {
        std::complex<double> u = (c1 - c0) / dc;
        std::complex<double> mid = 0.5 * (c0 + c1);
        double acc = 0.0;
        for (unsigned w = 0; w < words; ++w) {
          std::complex<double> rel = row[w] - mid;
          double t = rel.real() * u.real() + rel.imag() * u.imag();
          if (majority_label(w, m) == 0) t = -t;
          acc += 0.5 * std::erfc(t / std::sqrt(n0));
        }
        sum += acc / static_cast<double>(words);
      }
    }
    return sum / static_cast<double>(n);
  }

  double score_digits(const std::vector<int>& digits) const {
    const unsigned words = 1u << m;
    std::vector<std::complex<double>> pts(static_cast<std::size_t>(n) * words);
    for (int i = 0; i < n; ++i)
      for (unsigned w = 0; w < words; ++w) {
        std::complex<double> v = 0.0;
        for (int t = 0; t < m; ++t)
          v += terms[term_idx(t, digits[t], (w >> t) & 1u, i)];
        pts[static_cast<std::size_t>(i) * words + w] = v;
      }
    return score_points(pts);
  }
};

struct Best {
  double ber = std::numeric_limits<double>::infinity();
  std::vector<int> digits;

  void offer(double b, const std::vector<int>& d) {
    if (b < ber || (b == ber && (digits.empty() || d < digits))) {
      ber = b;
      digits = d;
    }
  }
};

// Depth-first over pair digits with partial superposition sums per level, so
// the innermost digit costs only 2^m complex adds per receiver. Evaluation
// order is a pure function of the digits; worker partitioning cannot change
// any candidate's floating-point result.
inline void exhaustive_scan(const CandidateEvaluator& ev, int p0_lo, int p0_hi,
                            Best& best) {
  const int m = ev.m, n = ev.n;
  const unsigned words = 1u << m;
  // partial[level] holds sums over the first `level` transmitters
  std::vector<std::vector<std::complex<double>>> partial(m + 1);
  for (int l = 0; l <= m; ++l)
    partial[l].assign(static_cast<std::size_t>(n) << l, 0.0);
  std::vector<int> digits(m, 0);

  auto fill_level = [&](int level, int p) {
    const auto& prev = partial[level];
    auto& cur = partial[level + 1];
    const unsigned half = 1u << level;
    for (int i = 0; i < n; ++i) {
      const std::complex<double>* t0 = &ev.terms[ev.term_idx(level, p, 0, i)];
      const std::complex<double>* t1 = &ev.terms[ev.term_idx(level, p, 1, i)];
      const std::complex<double>* src = prev.data() + static_cast<std::size_t>(i) * half;
      std::complex<double>* dst = cur.data() + (static_cast<std::size_t>(i) * half << 1);
      for (unsigned w = 0; w < half; ++w) {
        dst[w] = src[w] + *t0;
        dst[w + half] = src[w] + *t1;
      }
    }
  };

  // level-(m) layout above interleaves words as [low bits | new bit], which
  // matches word bit t = digit t because each level appends its bit on top
  auto rec = [&](auto&& self, int level) -> void {
    if (level == m) {
      best.offer(ev.score_points(partial[m]), digits);
      return;
    }
    int lo = level == 0 ? p0_lo : 0;
    int hi = level == 0 ? p0_hi : kPairCount;
    for (int p = lo; p < hi; ++p) {
      digits[level] = p;
      fill_level(level, p);
      self(self, level + 1);
    }
  };
  (void)words;
  rec(rec, 0);
}

}  // namespace detail

inline BerReport evaluate_assignment(const ChannelMatrix& ch,
                                     const PhaseAssignment& pa,
                                     BerMode mode = BerMode::Centroid) {
  ConstellationSet cs = build_constellations(ch, pa);
  DecisionRegions dr = decision_regions(cs, RegionMode::Supervised);
  BerReport rep = ber_per_rx(dr, cs, ch.noise_psd, mode);
  rep.assignment = pa;
  return rep;
}

// Minimizes average BER across receivers; ties resolve to the
// lexicographically smallest phase tuple. The exhaustive mode is globally
// optimal over the (8*7)^M grid and invariant to worker count.
inline OptimizeResult optimize_phases(const ChannelMatrix& ch,
                                      const OptimizeOptions& opt = {}) {
  ch.validate();
  const int m = ch.tx_count;
  if (m < 1) throw std::invalid_argument("M must be >= 1");
  detail::CandidateEvaluator ev(ch, ch.noise_psd, opt.ber_mode);
  detail::Best best;

  if (opt.method == OptMethod::Exhaustive) {
    if (m > 4)
      throw std::invalid_argument(
          "exhaustive search is limited to M <= 4 (56^M candidates); "
          "use the greedy or random method instead");
    int workers = std::max(1, opt.workers);
    workers = std::min(workers, kPairCount);
    if (workers == 1) {
      detail::exhaustive_scan(ev, 0, kPairCount, best);
    } else {
      std::vector<detail::Best> partials(workers);
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w) {
        int lo = kPairCount * w / workers;
        int hi = kPairCount * (w + 1) / workers;
        pool.emplace_back([&, w, lo, hi] {
          detail::exhaustive_scan(ev, lo, hi, partials[w]);
        });
      }
      for (auto& t : pool) t.join();
      for (const auto& p : partials)
        if (!p.digits.empty()) best.offer(p.ber, p.digits);
    }
  } else if (opt.method == OptMethod::Random) {
    if (opt.samples < 1) throw std::invalid_argument("random method needs samples >= 1");
    SplitMix64 rng(derive_seed(opt.seed, 0x5a17));
    std::vector<int> digits(m);
    for (std::size_t s = 0; s < opt.samples; ++s) {
      for (int t = 0; t < m; ++t)
        digits[t] = static_cast<int>(rng.below(kPairCount));
      best.offer(ev.score_digits(digits), digits);
    }
  } else {
    // greedy: coordinate descent from all-(0,180) pairs to a fixpoint
    std::vector<int> digits(m, pair_index({0, 4}));
    best.offer(ev.score_digits(digits), digits);
    for (int pass = 0; pass < 64; ++pass) {
      bool changed = false;
      for (int t = 0; t < m; ++t) {
        detail::Best local;
        std::vector<int> trial = best.digits;
        for (int p = 0; p < kPairCount; ++p) {
          trial[t] = p;
          local.offer(ev.score_digits(trial), trial);
        }
        if (local.digits != best.digits) changed = true;
        best = local;
      }
      if (!changed) break;
    }
  }

  OptimizeResult res;
  for (int t = 0; t < m; ++t)
    res.assignment.pairs.push_back(pair_from_index(best.digits[t]));
  ConstellationSet cs = build_constellations(ch, res.assignment);
  res.regions = decision_regions(cs, RegionMode::Supervised);
  res.consistent = res.regions.all_consistent;
  res.report = ber_per_rx(res.regions, cs, ch.noise_psd, opt.ber_mode);
  res.report.assignment = res.assignment;
  return res;
}

struct SweepPoint {
  int n = 0;
  double avg_ber = 0.0;
  bool consistent = false;
};

// Re-synthesize and re-optimize per receiver count. noise_scale sets N0 from
// the mean gain magnitude so every point sits in an informative BER regime;
// pass an explicit noise_psd to override.
inline std::vector<SweepPoint> ber_vs_n_sweep(
    int m, const std::vector<int>& n_list, std::uint64_t seed,
    TxLayout layout = TxLayout::Cluster, double jitter_mm = 1.5,
    const SynthModel& model = {}, const OptimizeOptions& opt = {},
    double noise_psd = 0.0, double noise_scale = 0.25) {
  std::vector<SweepPoint> out;
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    if (n_list[k] < 1) throw std::invalid_argument("N must be >= 1");
    PackageGeometry geom = default_geometry(m, n_list[k], layout, jitter_mm,
                                            derive_seed(seed, k));
    ChannelMatrix ch = synth_channel(geom, model).channel;
    if (noise_psd > 0) {
      ch.noise_psd = noise_psd;
    } else {
      double mean = 0.0;
      for (const auto& g : ch.gains) mean += std::abs(g);
      mean /= static_cast<double>(ch.gains.size());
      double a = noise_scale * mean * std::sqrt(ch.tx_power_mw());
      ch.noise_psd = a * a;
    }
    OptimizeResult r = optimize_phases(ch, opt);
    out.push_back({n_list[k], r.report.avg, r.consistent});
  }
  return out;
}

}  // namespace whype
