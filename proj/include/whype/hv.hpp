#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rng.hpp"

namespace whype {

// Fixed-length binary vector, bit-packed little-endian: bit i lives at
// word(i/64) >> (i%64). Tail bits beyond d are kept zero at all times.
class Hypervector {
 public:
  static constexpr std::size_t kDefaultDim = 512;

  explicit Hypervector(std::size_t d = kDefaultDim)
      : d_(d), w_((check_dim(d) + 63) / 64, 0) {}

  std::size_t dim() const { return d_; }
  std::size_t word_count() const { return w_.size(); }
  std::uint64_t word(std::size_t i) const { return w_[i]; }
  std::uint64_t& word(std::size_t i) { return w_[i]; }

  bool get(std::size_t i) const { return (w_[i / 64] >> (i % 64)) & 1u; }

  void set(std::size_t i, bool v) {
    std::uint64_t m = std::uint64_t{1} << (i % 64);
    if (v)
      w_[i / 64] |= m;
    else
      w_[i / 64] &= ~m;
  }

  void flip(std::size_t i) { w_[i / 64] ^= std::uint64_t{1} << (i % 64); }

  Hypervector complement() const {
    Hypervector out(d_);
    for (std::size_t i = 0; i < w_.size(); ++i) out.w_[i] = ~w_[i];
    out.mask_tail();
    return out;
  }

  std::size_t popcount() const {
    std::size_t n = 0;
    for (std::uint64_t w : w_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  bool operator==(const Hypervector& o) const {
    return d_ == o.d_ && w_ == o.w_;
  }
  bool operator!=(const Hypervector& o) const { return !(*this == o); }

  std::string to_bitstring() const {
    std::string s(d_, '0');
    for (std::size_t i = 0; i < d_; ++i)
      if (get(i)) s[i] = '1';
    return s;
  }

  static Hypervector from_bitstring(const std::string& s) {
    Hypervector out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '1')
        out.set(i, true);
      else if (s[i] != '0')
        throw std::invalid_argument("bitstring may contain only 0/1");
    }
    return out;
  }

  void mask_tail() {
    std::size_t r = d_ % 64;
    if (r != 0) w_.back() &= (~std::uint64_t{0}) >> (64 - r);
  }

 private:
  static std::size_t check_dim(std::size_t d) {
    if (d == 0) throw std::invalid_argument("invalid dimension: d must be > 0");
    return d;
  }

  std::size_t d_;
  std::vector<std::uint64_t> w_;
};

inline Hypervector random_hypervector(std::size_t d, std::uint64_t seed) {
  Hypervector out(d);
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < out.word_count(); ++i) out.word(i) = rng.next();
  out.mask_tail();
  return out;
}

// Circular rotation: bit i moves to (i + k) mod d.
inline Hypervector rotate(const Hypervector& v, std::size_t k) {
  const std::size_t d = v.dim();
  k %= d;
  if (k == 0) return v;
  Hypervector out(d);
  if (d % 64 == 0) {
    const std::size_t nw = v.word_count();
    const std::size_t q = k / 64, r = k % 64;
    for (std::size_t j = 0; j < nw; ++j) {
      std::uint64_t lo = v.word((j + nw - q) % nw);
      if (r == 0) {
        out.word(j) = lo;
      } else {
        std::uint64_t hi = v.word((j + nw - q - 1) % nw);
        out.word(j) = (lo << r) | (hi >> (64 - r));
      }
    }
  } else {
    for (std::size_t i = 0; i < d; ++i)
      if (v.get(i)) out.set((i + k) % d, true);
  }
  return out;
}

// Slot t rotates by t*stride; slot indices start at 1. max_slot of 0 means
// the rule is not bounded to a particular transmitter count.
struct PermutationSpec {
  std::size_t stride = 1;
  std::size_t max_slot = 0;

  std::size_t step(std::size_t slot, std::size_t d) const {
    if (slot < 1 || (max_slot != 0 && slot > max_slot))
      throw std::invalid_argument("invalid slot: must be in [1, M]");
    return (slot * stride) % d;
  }
};

inline Hypervector permute(const Hypervector& v, std::size_t slot,
                           const PermutationSpec& spec) {
  return rotate(v, spec.step(slot, v.dim()));
}

inline Hypervector inverse_permute(const Hypervector& v, std::size_t slot,
                                   const PermutationSpec& spec) {
  std::size_t s = spec.step(slot, v.dim());
  return rotate(v, (v.dim() - s) % v.dim());
}

// Even-sized bundles break ties against a fixed seeded vector so results
// carry no hidden RNG state.
struct TiePolicy {
  std::uint64_t seed = 0x7165u;
};

inline Hypervector majority_bundle(const std::vector<Hypervector>& vs,
                                   const TiePolicy& tie = {}) {
  if (vs.empty()) throw std::invalid_argument("empty bundle");
  const std::size_t d = vs[0].dim();
  for (const auto& v : vs)
    if (v.dim() != d) throw std::invalid_argument("dimension mismatch");
  const std::size_t m = vs.size();
  if (m == 1) return vs[0];

  Hypervector out(d);
  Hypervector tiebreak(d);
  if (m % 2 == 0) tiebreak = random_hypervector(d, derive_seed(tie.seed, m));

  for (std::size_t wi = 0; wi < out.word_count(); ++wi) {
    std::uint16_t cnt[64] = {};
    for (std::size_t t = 0; t < m; ++t) {
      std::uint64_t x = vs[t].word(wi);
      for (int b = 0; b < 64; ++b) cnt[b] += (x >> b) & 1u;
    }
    std::uint64_t w = 0;
    for (int b = 0; b < 64; ++b) {
      std::size_t c2 = std::size_t{2} * cnt[b];
      bool bit = c2 > m || (c2 == m && ((tiebreak.word(wi) >> b) & 1u));
      w |= std::uint64_t{bit} << b;
    }
    out.word(wi) = w;
  }
  out.mask_tail();
  return out;
}

inline std::size_t hamming_distance(const Hypervector& a,
                                    const Hypervector& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("dimension mismatch");
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.word_count(); ++i)
    n += static_cast<std::size_t>(std::popcount(a.word(i) ^ b.word(i)));
  return n;
}

// Agreement count d - HammingDistance; argmax-equivalent to the +-1 dot product.
inline int hamming_similarity(const Hypervector& a, const Hypervector& b) {
  return static_cast<int>(a.dim() - hamming_distance(a, b));
}

// Each bit flips independently with probability p. Expected flip count is
// small for the rates used here, so positions are geometric skip-sampled.
inline Hypervector bitflip_noise(const Hypervector& v, double p,
                                 std::uint64_t seed) {
  if (!(p >= 0.0) || p > 1.0)
    throw std::invalid_argument("flip probability must be in [0,1]");
  if (p == 0.0) return v;
  if (p == 1.0) return v.complement();
  Hypervector out = v;
  SplitMix64 rng(seed);
  const double denom = std::log1p(-p);
  double pos = -1.0;
  for (;;) {
    pos += 1.0 + std::floor(std::log1p(-rng.uniform()) / denom);
    if (pos >= static_cast<double>(v.dim())) break;
    out.flip(static_cast<std::size_t>(pos));
  }
  return out;
}

struct SearchResult {
  std::string label;
  int score = 0;
  std::size_t index = 0;
  std::vector<int> scores;
};

class AssociativeMemory {
 public:
  explicit AssociativeMemory(std::size_t capacity = 64)
      : capacity_(capacity) {}

  std::size_t size() const { return protos_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::string& label(std::size_t i) const { return labels_[i]; }
  const Hypervector& prototype(std::size_t i) const { return protos_[i]; }

  // Per-shot storage keeps several entries under one class label; prototype
  // storage forbids that, so duplicates are opt-in.
  void add(std::string label, Hypervector proto, bool allow_duplicate = false) {
    if (protos_.size() >= capacity_)
      throw std::runtime_error("associative memory capacity exceeded (" +
                               std::to_string(capacity_) + " entries)");
    if (!protos_.empty() && proto.dim() != protos_[0].dim())
      throw std::invalid_argument("dimension mismatch");
    if (!allow_duplicate)
      for (const auto& l : labels_)
        if (l == label) throw std::invalid_argument("duplicate label: " + label);
    labels_.push_back(std::move(label));
    protos_.push_back(std::move(proto));
  }

  // Ties resolve to the lowest entry index so runs are bit-reproducible.
  SearchResult search(const Hypervector& q) const {
    if (protos_.empty()) throw std::runtime_error("empty associative memory");
    SearchResult r;
    r.scores.reserve(protos_.size());
    int best = -1;
    for (std::size_t i = 0; i < protos_.size(); ++i) {
      int s = hamming_similarity(protos_[i], q);
      r.scores.push_back(s);
      if (s > best) {
        best = s;
        r.index = i;
      }
    }
    r.score = best;
    r.label = labels_[r.index];
    return r;
  }

 private:
  std::size_t capacity_;
  std::vector<std::string> labels_;
  std::vector<Hypervector> protos_;
};

// One record per line: <label>,<bitstring>. Labels may repeat (shot sets);
// uniqueness is an AssociativeMemory concern, not a file-format one.
inline void save_hypervector_set(
    const std::string& path,
    const std::vector<std::pair<std::string, Hypervector>>& set) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (const auto& [label, hv] : set) out << label << ',' << hv.to_bitstring() << '\n';
}

inline std::vector<std::pair<std::string, Hypervector>> load_hypervector_set(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::vector<std::pair<std::string, Hypervector>> set;
  std::string line;
  std::size_t lineno = 0, d = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected <label>,<bitstring>");
    std::string label = line.substr(0, comma);
    std::string bits = line.substr(comma + 1);
    if (!bits.empty() && bits.back() == '\r') bits.pop_back();
    if (d == 0) d = bits.size();
    if (bits.size() != d || d == 0)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": inconsistent bitstring length");
    try {
      set.emplace_back(std::move(label), Hypervector::from_bitstring(bits));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " +
                               e.what());
    }
  }
  return set;
}

}  // namespace whype
