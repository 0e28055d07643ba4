#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "musan/error.h"
#include "musan/matcher.h"
#include "musan/notation.h"
#include "musan/optimizer.h"
#include "musan/synth.h"
#include "support/oracles.h"

using musan::Instance;
using musan::PhraseSet;
using musan::SdlParams;
using musan::TileToken;

namespace {

PhraseSet makeSet(std::vector<Instance> instances, bool melodic = true, double score = 0.9) {
  PhraseSet s;
  s.instances = std::move(instances);
  s.melodic = melodic;
  s.mean_score = score;
  return s;
}

void expectTiles(const musan::Tiling& tiling, int n) {
  int pos = 0;
  for (const auto& t : tiling) {
    EXPECT_EQ(t.start, pos);
    EXPECT_GT(t.length, 0);
    pos = t.end();
  }
  EXPECT_EQ(pos, n);
}

}  // namespace

TEST(Sdl, WorkedExample) {
  SdlParams p;
  EXPECT_NEAR(musan::sdl(musan::parseStructure("A4B4A4"), p), 13.4, 1e-9);
  EXPECT_NEAR(musan::sdl(musan::parseStructure("A12"), p), 16.6, 1e-9);
  EXPECT_NEAR(musan::sdl(musan::parseStructure("A4X4A4"), p), 13.4, 1e-9);
}

TEST(Sdl, NearRepeatsAverageTheirLengths) {
  SdlParams p;
  // 5 tokens, labels: A (8), B (8, 8, 9 -> 25/3)
  EXPECT_NEAR(musan::sdl(musan::parseStructure("A8B8A8B8B9"), p), 5 + 1.3 * (8 + 25.0 / 3), 1e-9);
}

TEST(Sdl, MatchesDefinitionOnRandomStructures) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 300; ++k) {
    std::string text = oracle::randomNotation(rng);
    double h = std::uniform_real_distribution<double>(0.1, 3.0)(rng);
    double g = std::uniform_real_distribution<double>(0.1, 3.0)(rng);
    EXPECT_NEAR(musan::sdl(musan::parseStructure(text), SdlParams{h, g}), oracle::sdlFromDefinition(text, h, g), 1e-6)
        << text;
  }
}

TEST(Sdl, RejectsNonPositiveConstants) {
  EXPECT_THROW((SdlParams{0.0, 1.0}.validate()), musan::ContractError);
  EXPECT_THROW((SdlParams{1.0, -1.0}.validate()), musan::ContractError);
}

TEST(Optimizer, ChoosesRepetitionOverSinglePhrase) {
  std::vector<bool> mask(12, true);
  std::vector<PhraseSet> sets = {makeSet({{0, 4}, {8, 4}})};
  auto r = musan::optimizeStructure(mask, sets);
  EXPECT_NEAR(r.sdl, 13.4, 1e-9);
  EXPECT_EQ(musan::formatStructure(r.structure), "A4X4A4");
  EXPECT_FALSE(r.suboptimal);
  expectTiles(r.tiling, 12);
}

TEST(Optimizer, EmptySetListGivesOneFillerPerMelodyRun) {
  std::vector<bool> mask = {false, false, true, true, true, false};
  auto r = musan::optimizeStructure(mask, {});
  EXPECT_EQ(musan::formatStructure(r.structure), "i2X3o1");
  EXPECT_NEAR(r.sdl, 3 + 1.3 * 6, 1e-9);
}

TEST(Optimizer, BaselineDominance) {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 100; ++k) {
    int n = std::uniform_int_distribution<int>(1, 14)(rng);
    auto mask = oracle::randomMask(rng, n);
    auto sets = oracle::randomPhraseSets(rng, n, 4);
    auto r = musan::optimizeStructure(mask, sets);
    double baseline = static_cast<double>(musan::melodyRuns(mask).size()) + 1.3 * n;
    EXPECT_LE(r.sdl, baseline + 1e-9);
  }
}

TEST(Optimizer, AgreesWithBruteForceAndEnumeration) {
  std::mt19937_64 rng(23);
  for (int k = 0; k < 200; ++k) {
    int n = std::uniform_int_distribution<int>(1, 12)(rng);
    auto mask = oracle::randomMask(rng, n);
    auto sets = oracle::randomPhraseSets(rng, n, 5);
    for (auto& s : sets) {
      int melodic = 0;
      for (const auto& i : s.instances)
        for (int m = i.start; m < i.end(); ++m) melodic += mask[static_cast<std::size_t>(m)] ? 1 : 0;
      s.melodic = 2 * melodic > static_cast<int>(s.instances.size()) * s.length();
    }
    SdlParams p;
    auto fast = musan::optimizeStructure(mask, sets, p);
    auto slow = musan::bruteForceOptimize(mask, sets, p);
    double reference = oracle::minimumSdlByEnumeration(mask, sets, p);
    EXPECT_EQ(fast.sdl, slow.sdl) << "case " << k;
    EXPECT_NEAR(fast.sdl, reference, 1e-9) << "case " << k;
    EXPECT_EQ(fast.tiling, slow.tiling) << "case " << k;
    expectTiles(fast.tiling, n);
  }
}

TEST(Optimizer, DeterministicUnderSetPermutation) {
  std::mt19937_64 rng(29);
  for (int k = 0; k < 50; ++k) {
    int n = std::uniform_int_distribution<int>(4, 14)(rng);
    auto mask = oracle::randomMask(rng, n);
    auto sets = oracle::randomPhraseSets(rng, n, 5);
    auto a = musan::optimizeStructure(mask, sets);
    auto b = musan::optimizeStructure(mask, sets);
    EXPECT_EQ(a.tiling, b.tiling);
    std::reverse(sets.begin(), sets.end());
    auto c = musan::optimizeStructure(mask, sets);
    EXPECT_EQ(a.sdl, c.sdl);
    EXPECT_EQ(musan::formatStructure(a.structure).size(), musan::formatStructure(c.structure).size());
  }
}

TEST(Optimizer, StartEstimateIsAdmissible) {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 50; ++k) {
    int n = std::uniform_int_distribution<int>(2, 12)(rng);
    auto mask = oracle::randomMask(rng, n);
    auto sets = oracle::randomPhraseSets(rng, n, 4);
    musan::SearchOptions opt;
    opt.trace = true;
    auto r = musan::optimizeStructure(mask, sets, {}, opt);
    ASSERT_FALSE(r.trace.empty());
    for (const auto& e : r.trace) {
      EXPECT_LE(e.g_cost, e.f_estimate + 1e-9);
      if (e.position == 0) EXPECT_LE(e.f_estimate, r.sdl + 1e-9);
    }
  }
}

TEST(Optimizer, BudgetExhaustionReturnsValidTiling) {
  auto song = musan::synthesizeSong(99, {24, 2, 4, 4, 0.2});
  auto mask = musan::melodyMask(song);
  std::mt19937_64 rng(5);
  auto sets = oracle::randomPhraseSets(rng, 24, 8);
  auto r = musan::optimizeStructure(mask, sets, {}, musan::SearchOptions{1});
  expectTiles(r.tiling, 24);
  EXPECT_TRUE(r.suboptimal || r.expansions <= 1);
  auto full = musan::optimizeStructure(mask, sets);
  EXPECT_GE(r.sdl, full.sdl - 1e-9);
}

TEST(Optimizer, OracleGuard) {
  std::vector<bool> mask(33, true);
  EXPECT_THROW(musan::bruteForceOptimize(mask, {}), musan::ContractError);
}

TEST(Labels, IntroOutroAndFillers) {
  musan::Tiling t = {
      {0, 2, -1, false}, {2, 4, 0, true}, {6, 3, -1, false}, {9, 4, 0, true}, {13, 2, 1, true}, {15, 2, -1, false}};
  EXPECT_EQ(musan::formatStructure(musan::assignLabels(t)), "i2A4x3A4X2o2");
}

TEST(Labels, NonMelodicSetsGetLowercase) {
  musan::Tiling t = {{0, 2, 0, false}, {2, 4, 1, true}, {6, 2, 0, false}, {8, 4, 1, true}};
  EXPECT_EQ(musan::formatStructure(musan::assignLabels(t)), "a2A4a2A4");
}

TEST(Labels, RunsOutOfLetters) {
  musan::Tiling t;
  int pos = 0;
  for (int s = 0; s < 26; ++s)
    for (int r = 0; r < 2; ++r) {
      t.push_back({pos, 1, s, true});
      ++pos;
    }
  EXPECT_THROW(musan::assignLabels(t), musan::LabelSpaceError);
}

TEST(Absorb, FoldsShortFillerIntoRepeatedNeighbour) {
  musan::Tiling t = {{0, 8, 0, true},  {8, 8, 1, true},   {16, 8, 0, true},
                     {24, 8, 1, true}, {32, 1, -1, true}, {33, 8, 0, true}};
  auto out = musan::absorbNearRepeats(t);
  EXPECT_EQ(musan::formatStructure(musan::assignLabels(out)), "A8B8A8B8A9");
  EXPECT_LT(musan::tilingCost(out, {}), musan::tilingCost(t, {}));
}

TEST(Absorb, LeavesEdgesAndMismatchedMelodyAlone) {
  musan::Tiling edge = {{0, 1, -1, true}, {1, 4, 0, true}, {5, 4, 0, true}};
  EXPECT_EQ(musan::absorbNearRepeats(edge), edge);
  musan::Tiling mixed = {{0, 4, 0, true}, {4, 1, -1, false}, {5, 4, 0, true}, {9, 2, -1, true}};
  EXPECT_EQ(musan::absorbNearRepeats(mixed), mixed);
}
