#include <cmath>
#include <cstdint>
#include <vector>

#include <gtest/gtest.h>

#include "fslink/model.hpp"
#include "fslink/simgen.hpp"

namespace {

using fslink::ComparisonData;
using fslink::ErrorLevel;
using fslink::LinkageStructure;
using fslink::MUParams;
using fslink::ProblemDims;
using fslink::SimulationConfig;

TEST(Presets, ErrorLevelTables) {
  const MUParams low = fslink::preset_error_level(ErrorLevel::low);
  EXPECT_EQ(low.num_fields(), 3);
  EXPECT_DOUBLE_EQ(low.m()[0][0], 0.93);
  EXPECT_DOUBLE_EQ(low.m()[2][0], 0.98);
  EXPECT_DOUBLE_EQ(low.u()[0][1], 0.94);
  EXPECT_DOUBLE_EQ(low.u()[2][1], 0.98);

  const MUParams mod = fslink::preset_error_level(ErrorLevel::moderate);
  EXPECT_DOUBLE_EQ(mod.m()[0][0], 0.83);
  EXPECT_DOUBLE_EQ(mod.m()[2][0], 0.98);
  EXPECT_DOUBLE_EQ(mod.u()[0][1], 0.84);

  const MUParams mh = fslink::preset_error_level(ErrorLevel::moderate_high);
  EXPECT_DOUBLE_EQ(mh.m()[2][0], 0.88);
  EXPECT_DOUBLE_EQ(mh.u()[2][1], 0.98);

  EXPECT_EQ(fslink::error_level_from_string("moderate-high"),
            ErrorLevel::moderate_high);
  EXPECT_THROW(fslink::error_level_from_string("extreme"),
               std::invalid_argument);
}

TEST(Generate, PiExtremesPinTheOverlap) {
  SimulationConfig cfg;
  cfg.dims = {40, 12};
  cfg.pi = 1.0;
  cfg.seed = 5;
  for (std::int32_t r = 0; r < 3; ++r)
    EXPECT_EQ(fslink::generate_replicate(cfg, r).truth.num_links(), 12);
  cfg.pi = 0.0;
  for (std::int32_t r = 0; r < 3; ++r)
    EXPECT_EQ(fslink::generate_replicate(cfg, r).truth.num_links(), 0);
}

TEST(Generate, ConfigValidation) {
  SimulationConfig cfg;
  cfg.pi = -0.1;
  EXPECT_THROW(fslink::validate_config(cfg), std::invalid_argument);
  cfg.pi = 0.5;
  cfg.replicates = 0;
  EXPECT_THROW(fslink::validate_config(cfg), std::invalid_argument);
  cfg.replicates = 1;
  EXPECT_THROW(fslink::generate_replicate(cfg, -1), std::invalid_argument);

  // More matched B records than A records cannot be linked injectively.
  cfg.dims = {2, 5};
  cfg.pi = 1.0;
  EXPECT_THROW(fslink::generate_replicate(cfg, 0), std::runtime_error);
}

TEST(Generate, FixedSeedAndIndexReproduce) {
  SimulationConfig cfg;
  cfg.dims = {25, 8};
  cfg.pi = 0.6;
  cfg.seed = 77;
  const auto a = fslink::generate_replicate(cfg, 3);
  const auto b = fslink::generate_replicate(cfg, 3);
  ASSERT_EQ(a.truth.z().size(), b.truth.z().size());
  for (std::int32_t j = 0; j < 8; ++j) EXPECT_EQ(a.truth.z()[j], b.truth.z()[j]);
  for (std::int32_t j = 0; j < 8; ++j)
    for (std::int32_t i = 0; i < 25; ++i)
      for (std::int32_t f = 0; f < 3; ++f)
        EXPECT_EQ(a.data.level(i, j, f), b.data.level(i, j, f));

  const auto c = fslink::generate_replicate(cfg, 4);
  bool same = a.truth.num_links() == c.truth.num_links();
  if (same)
    for (std::int32_t j = 0; j < 8; ++j)
      same = same && a.truth.z()[j] == c.truth.z()[j];
  bool same_gamma = true;
  for (std::int32_t j = 0; j < 8 && same_gamma; ++j)
    for (std::int32_t i = 0; i < 25 && same_gamma; ++i)
      for (std::int32_t f = 0; f < 3 && same_gamma; ++f)
        same_gamma = a.data.level(i, j, f) == c.data.level(i, j, f);
  EXPECT_FALSE(same && same_gamma);
}

TEST(Generate, OverlapMeanMatchesBinomial) {
  SimulationConfig cfg;
  cfg.dims = {30, 10};
  cfg.pi = 0.6;
  cfg.seed = 2025;
  const int N = 1500;
  double total = 0.0;
  for (int r = 0; r < N; ++r)
    total += fslink::generate_replicate(cfg, r).truth.num_links();
  const double mean = total / N;
  const double se = std::sqrt(10 * cfg.pi * (1 - cfg.pi) / N);
  EXPECT_NEAR(mean, 10 * cfg.pi, 3 * se);
}

TEST(Generate, LevelFrequenciesFollowMu) {
  SimulationConfig cfg;
  cfg.dims = {200, 40};
  cfg.pi = 1.0;
  cfg.seed = 11;
  cfg.mu = fslink::preset_error_level(ErrorLevel::low);
  std::int64_t matched = 0, matched_agree_f1 = 0;
  std::int64_t unmatched = 0, unmatched_agree_f3 = 0;
  for (std::int32_t r = 0; r < 50; ++r) {
    const auto rep = fslink::generate_replicate(cfg, r);
    for (std::int32_t j = 0; j < 40; ++j)
      for (std::int32_t i = 0; i < 200; ++i) {
        const bool linked = rep.truth.link_of(j) == i;
        if (linked) {
          ++matched;
          matched_agree_f1 += rep.data.level(i, j, 0) == 1;
        } else {
          ++unmatched;
          unmatched_agree_f3 += rep.data.level(i, j, 2) == 1;
        }
      }
  }
  const double freq_m = static_cast<double>(matched_agree_f1) / matched;
  const double se_m = std::sqrt(0.93 * 0.07 / static_cast<double>(matched));
  EXPECT_NEAR(freq_m, 0.93, 3 * se_m);
  const double freq_u = static_cast<double>(unmatched_agree_f3) / unmatched;
  const double se_u = std::sqrt(0.02 * 0.98 / static_cast<double>(unmatched));
  EXPECT_NEAR(freq_u, 0.02, 3 * se_u);
}

// Full-scale recovery check: at the paper's geometry with full overlap and
// low error, the posterior mean of each field's match-agreement probability
// lands near the generating truth.
TEST(Generate, GibbsRecoversMuTruth) {
  SimulationConfig cfg;
  cfg.dims = {1000, 50};
  cfg.pi = 1.0;
  cfg.seed = 404;
  const auto rep = fslink::generate_replicate(cfg, 0);

  fslink::SamplerConfig scfg;
  scfg.seed = 808;
  fslink::detail::GibbsChain chain(rep.data, scfg);
  const int burn = 1000, kept = 4000;
  for (int t = 0; t < burn; ++t) chain.step();
  std::vector<double> mean_m1(3, 0.0);
  for (int t = 0; t < kept; ++t) {
    chain.step();
    for (int f = 0; f < 3; ++f) mean_m1[f] += chain.m()[f][0];
  }
  for (auto& x : mean_m1) x /= kept;
  EXPECT_NEAR(mean_m1[0], 0.93, 0.05);
  EXPECT_NEAR(mean_m1[1], 0.93, 0.05);
  EXPECT_NEAR(mean_m1[2], 0.98, 0.05);
}

}  // namespace
