// Grid search that froze SyntheticClassParams::correlated().
//
// The correlated preset stands in for a trained feature encoder: its
// two-level family structure is tuned so un-permuted bundling degrades
// with bundle size the way the reference accuracy profile below does.
// Rerun after changing the synthetic generator; update the preset in
// include/whype/experiments.hpp if a better cell appears.
//
// Usage:
//   calibrate_encoder                 coarse grid, 400 episodes x 4 seeds
//   calibrate_encoder G BF BC [E S]   one cell, default 1000 episodes x 10

#include <cstdio>
#include <cstdlib>

#include "whype/experiments.hpp"

namespace {

constexpr int kBundles[] = {3, 5, 7, 9, 11};
// Reference baseline-bundling accuracies the preset is tuned to match.
constexpr double kTargets[] = {0.966, 0.902, 0.803, 0.704, 0.543};

struct Profile {
  double acc[5] = {};
  double max_delta = 0.0;
};

Profile measure(int family_size, double family_flip, double class_flip,
                int episodes, int seeds) {
  Profile r;
  for (int mi = 0; mi < 5; ++mi) {
    double sum = 0.0;
    for (int s = 0; s < seeds; ++s) {
      whype::SyntheticClassParams p;
      p.family_size = family_size;
      p.family_flip = family_flip;
      p.class_flip = class_flip;
      whype::ClassSet set = whype::ClassSet::synthetic(p, 1000 + s);
      whype::FewShotConfig cfg;
      cfg.bundle = kBundles[mi];
      cfg.episodes = episodes;
      cfg.mode = whype::BundlingMode::Baseline;
      sum += whype::run_few_shot(cfg, set, 2000 + s).accuracy;
    }
    r.acc[mi] = sum / seeds;
    double d = std::abs(r.acc[mi] - kTargets[mi]);
    if (d > r.max_delta) r.max_delta = d;
  }
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc >= 4) {
    int g = std::atoi(argv[1]);
    double bf = std::atof(argv[2]);
    double bc = std::atof(argv[3]);
    int episodes = argc > 4 ? std::atoi(argv[4]) : 1000;
    int seeds = argc > 5 ? std::atoi(argv[5]) : 10;
    Profile r = measure(g, bf, bc, episodes, seeds);
    std::printf("family=%d family_flip=%.3f class_flip=%.3f\n", g, bf, bc);
    for (int mi = 0; mi < 5; ++mi)
      std::printf("  M=%-2d accuracy=%.4f delta=%+.4f\n", kBundles[mi],
                  r.acc[mi], r.acc[mi] - kTargets[mi]);
    std::printf("  max |delta| = %.4f\n", r.max_delta);
    return 0;
  }

  double best = 1e9;
  for (int g : {4, 5, 6, 8}) {
    for (double bf : {0.19, 0.20, 0.21, 0.22}) {
      for (double bc : {0.105, 0.115, 0.125, 0.135}) {
        Profile r = measure(g, bf, bc, 400, 4);
        std::printf("family=%d family_flip=%.3f class_flip=%.3f  ", g, bf, bc);
        for (double a : r.acc) std::printf("%.3f ", a);
        bool mark = r.max_delta < best;
        if (mark) best = r.max_delta;
        std::printf(" max|delta|=%.4f%s\n", r.max_delta, mark ? "  <--" : "");
        std::fflush(stdout);
      }
    }
  }
  return 0;
}
