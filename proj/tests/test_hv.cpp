#include <algorithm>
#include <bit>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "oracles.hpp"
#include "whype/hv.hpp"

using namespace whype;

namespace {

std::vector<Hypervector> random_set(std::size_t count, std::size_t dim,
                                    std::uint64_t seed) {
  std::vector<Hypervector> vs;
  for (std::size_t i = 0; i < count; ++i)
    vs.push_back(random_hypervector(dim, derive_seed(seed, i)));
  return vs;
}

}  // namespace

TEST_CASE("majority bundle matches a per-bit counting oracle") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (std::size_t m : {3u, 5u, 9u, 11u}) {
      for (std::size_t d : {512u, 96u}) {
        auto vs = random_set(m, d, derive_seed(seed, m, d));
        REQUIRE(majority_bundle(vs) == oracle::majority_by_counting(vs));
      }
    }
  }
}

TEST_CASE("three-input majority truth table") {
  // Bit position p of input t carries bit t of the 3-bit word p, so the 8
  // positions cover every input combination exactly once.
  std::vector<Hypervector> vs(3, Hypervector(8));
  for (unsigned p = 0; p < 8; ++p)
    for (unsigned t = 0; t < 3; ++t) vs[t].set(p, (p >> t) & 1u);
  Hypervector out = majority_bundle(vs);
  for (unsigned p = 0; p < 8; ++p) {
    unsigned ones = (p & 1u) + ((p >> 1) & 1u) + ((p >> 2) & 1u);
    REQUIRE(out.get(p) == (ones >= 2));
  }
}

TEST_CASE("five-input majority truth table") {
  std::vector<Hypervector> vs(5, Hypervector(32));
  for (unsigned p = 0; p < 32; ++p)
    for (unsigned t = 0; t < 5; ++t) vs[t].set(p, (p >> t) & 1u);
  Hypervector out = majority_bundle(vs);
  for (unsigned p = 0; p < 32; ++p)
    REQUIRE(out.get(p) == (std::popcount(p) >= 3));
}

TEST_CASE("majority is order-invariant") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto vs = random_set(7, 512, seed);
    Hypervector ref = majority_bundle(vs);
    std::mt19937 g(static_cast<unsigned>(seed));
    for (int k = 0; k < 3; ++k) {
      std::shuffle(vs.begin(), vs.end(), g);
      REQUIRE(majority_bundle(vs) == ref);
    }
  }
}

TEST_CASE("complementing all inputs complements an odd majority") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (std::size_t m : {3u, 5u, 7u}) {
      auto vs = random_set(m, 512, derive_seed(seed, m));
      Hypervector ref = majority_bundle(vs).complement();
      for (auto& v : vs) v = v.complement();
      REQUIRE(majority_bundle(vs) == ref);
    }
  }
}

TEST_CASE("even bundles break ties by a fixed seeded vector") {
  Hypervector v = random_hypervector(512, 41);
  std::vector<Hypervector> vs{v, v.complement()};
  // Every position ties, so the output is exactly the tie-break vector and
  // identical across runs with the same policy.
  Hypervector a = majority_bundle(vs);
  Hypervector b = majority_bundle(vs);
  REQUIRE(a == b);
  TiePolicy other{0xdead};
  Hypervector c = majority_bundle(vs, other);
  REQUIRE(c == majority_bundle(vs, other));
}

TEST_CASE("bundle input validation") {
  REQUIRE_THROWS_AS(majority_bundle({}), std::invalid_argument);
  std::vector<Hypervector> mixed{Hypervector(512), Hypervector(256)};
  REQUIRE_THROWS_AS(majority_bundle(mixed), std::invalid_argument);
  Hypervector single = random_hypervector(512, 1);
  REQUIRE(majority_bundle({single}) == single);
}

TEST_CASE("rotation composes additively and wraps to identity") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (std::size_t d : {512u, 100u, 64u}) {
      Hypervector v = random_hypervector(d, seed);
      REQUIRE(rotate(v, d) == v);
      REQUIRE(rotate(v, 0) == v);
      for (std::size_t a : {1u, 7u, 63u}) {
        for (std::size_t b : {2u, 65u}) {
          REQUIRE(rotate(rotate(v, a), b) == rotate(v, (a + b) % d));
        }
      }
      REQUIRE(rotate(v, 13).popcount() == v.popcount());
    }
  }
}

TEST_CASE("a common rotation commutes with majority") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto vs = random_set(5, 512, seed);
    Hypervector ref = rotate(majority_bundle(vs), 17);
    for (auto& v : vs) v = rotate(v, 17);
    REQUIRE(majority_bundle(vs) == ref);
  }
}

TEST_CASE("permutation preserves weight and pairwise distances") {
  PermutationSpec spec{3, 8};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto vs = random_set(4, 512, seed);
    for (std::size_t slot = 1; slot <= 8; ++slot) {
      for (std::size_t i = 0; i < vs.size(); ++i) {
        Hypervector pi = permute(vs[i], slot, spec);
        REQUIRE(pi.popcount() == vs[i].popcount());
        for (std::size_t j = i + 1; j < vs.size(); ++j)
          REQUIRE(hamming_distance(pi, permute(vs[j], slot, spec)) ==
                  hamming_distance(vs[i], vs[j]));
      }
    }
  }
}

TEST_CASE("permute and inverse_permute cancel for every slot and stride") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Hypervector v = random_hypervector(512, seed);
    for (std::size_t stride : {1u, 3u, 17u, 511u}) {
      PermutationSpec spec{stride, 8};
      for (std::size_t slot = 1; slot <= 8; ++slot) {
        REQUIRE(inverse_permute(permute(v, slot, spec), slot, spec) == v);
        REQUIRE(permute(inverse_permute(v, slot, spec), slot, spec) == v);
      }
    }
  }
}

TEST_CASE("slot bounds are enforced") {
  Hypervector v(512);
  PermutationSpec bounded{1, 4};
  REQUIRE_THROWS_WITH(permute(v, 0, bounded),
                      Catch::Matchers::ContainsSubstring("invalid slot"));
  REQUIRE_THROWS_AS(permute(v, 5, bounded), std::invalid_argument);
  PermutationSpec unbounded{1, 0};
  REQUIRE_NOTHROW(permute(v, 1000, unbounded));
}

TEST_CASE("hamming similarity matches a bit-scan oracle") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Hypervector a = random_hypervector(512, seed);
    Hypervector b = random_hypervector(512, seed + 100);
    REQUIRE(hamming_similarity(a, b) == oracle::agreement_by_scan(a, b));
    REQUIRE(hamming_similarity(a, a) == 512);
  }
}

TEST_CASE("bitflip noise hits its expected similarity") {
  const std::size_t d = 512;
  const int trials = 1000;
  for (double p : {0.05, 0.26}) {
    Hypervector v = random_hypervector(d, 7);
    double sum = 0.0;
    for (int t = 0; t < trials; ++t)
      sum += hamming_similarity(v, bitflip_noise(v, p, derive_seed(9, t)));
    double mean = sum / trials;
    double sigma = std::sqrt(d * p * (1.0 - p) / trials);
    REQUIRE(std::abs(mean - d * (1.0 - p)) < 3.0 * sigma);
  }
}

TEST_CASE("bitflip noise endpoints and validation") {
  Hypervector v = random_hypervector(512, 3);
  REQUIRE(bitflip_noise(v, 0.0, 1) == v);
  REQUIRE(bitflip_noise(v, 1.0, 1) == v.complement());
  REQUIRE(bitflip_noise(v, 0.3, 42) == bitflip_noise(v, 0.3, 42));
  REQUIRE_THROWS_AS(bitflip_noise(v, -0.1, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(bitflip_noise(v, 1.5, 1), std::invalid_argument);
}

TEST_CASE("random hypervectors are near-orthogonal") {
  // Pairwise agreement concentrates near d/2; 6 sigma on 512 bits.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto vs = random_set(8, 512, derive_seed(0xa11, seed));
    for (std::size_t i = 0; i < vs.size(); ++i)
      for (std::size_t j = i + 1; j < vs.size(); ++j) {
        int agree = hamming_similarity(vs[i], vs[j]);
        REQUIRE(std::abs(agree - 256) < 6 * std::sqrt(512.0 * 0.25));
      }
  }
}

TEST_CASE("associative memory search is rotation-invariant") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto vs = random_set(16, 512, seed);
    Hypervector q = bitflip_noise(vs[5], 0.1, derive_seed(seed, 0x91));
    AssociativeMemory plain(64), rotated(64);
    for (std::size_t i = 0; i < vs.size(); ++i) {
      plain.add("c" + std::to_string(i), vs[i]);
      rotated.add("c" + std::to_string(i), rotate(vs[i], 123));
    }
    REQUIRE(plain.search(q).index == rotated.search(rotate(q, 123)).index);
  }
}

TEST_CASE("associative memory resolves score ties to the lowest index") {
  Hypervector v = random_hypervector(512, 5);
  AssociativeMemory mem(8);
  mem.add("first", v);
  mem.add("second", v);  // same vector, distinct label
  SearchResult r = mem.search(v);
  REQUIRE(r.index == 0);
  REQUIRE(r.label == "first");
  REQUIRE(r.scores == std::vector<int>{512, 512});
}

TEST_CASE("associative memory enforces capacity and label uniqueness") {
  AssociativeMemory mem(2);
  mem.add("a", random_hypervector(512, 1));
  REQUIRE_THROWS_AS(mem.add("a", random_hypervector(512, 2)),
                    std::invalid_argument);
  mem.add("a", random_hypervector(512, 2), true);  // per-shot storage
  REQUIRE_THROWS_WITH(mem.add("b", random_hypervector(512, 3)),
                      Catch::Matchers::ContainsSubstring("capacity"));
  REQUIRE_THROWS_AS(mem.search(Hypervector(256)), std::exception);
}

TEST_CASE("hypervector set files round-trip") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "whype_test_hvset";
  fs::create_directories(dir);
  std::string path = (dir / "set.csv").string();

  std::vector<std::pair<std::string, Hypervector>> set;
  for (int i = 0; i < 5; ++i)
    set.emplace_back("class_" + std::to_string(i),
                     random_hypervector(512, 100 + i));
  set.emplace_back("class_0", random_hypervector(512, 200));  // repeated label
  save_hypervector_set(path, set);
  auto back = load_hypervector_set(path);
  REQUIRE(back.size() == set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    REQUIRE(back[i].first == set[i].first);
    REQUIRE(back[i].second == set[i].second);
  }
  fs::remove_all(dir);
}

TEST_CASE("hypervector set loader rejects malformed rows") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "whype_test_hvbad";
  fs::create_directories(dir);
  auto write = [&](const char* name, const char* text) {
    std::ofstream out(dir / name);
    out << text;
    return (dir / name).string();
  };
  REQUIRE_THROWS_WITH(load_hypervector_set(write("nocomma.csv", "abc\n")),
                      Catch::Matchers::ContainsSubstring("expected"));
  REQUIRE_THROWS_WITH(
      load_hypervector_set(write("ragged.csv", "a,0101\nb,01\n")),
      Catch::Matchers::ContainsSubstring("length"));
  REQUIRE_THROWS_AS(load_hypervector_set(write("badbit.csv", "a,01x1\n")),
                    std::exception);
  fs::remove_all(dir);
}

TEST_CASE("bitstring conversion round-trips") {
  Hypervector v = random_hypervector(300, 9);
  REQUIRE(Hypervector::from_bitstring(v.to_bitstring()) == v);
  REQUIRE(v.to_bitstring().size() == 300);
}
