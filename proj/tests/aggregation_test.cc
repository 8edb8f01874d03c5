#include <random>

#include <gtest/gtest.h>

#include "oracles.h"
#include "qarank/aggregation.h"
#include "qarank/text.h"

namespace qarank {
namespace {

std::vector<CandidateObservation> view(const std::vector<oracle::Observation>& obs) {
  std::vector<CandidateObservation> v;
  for (const auto& o : obs) v.push_back({o.span, o.rank, o.span_score, o.sim});
  return v;
}

TEST(NormalizeSpan, TrimsAndCollapses) {
  EXPECT_EQ(normalize_span("  New   York \n"), "New York");
  EXPECT_EQ(normalize_span("New York", true), "new york");
  EXPECT_EQ(normalize_span("New York", false), "New York");
}

TEST(Aggregate, WorkedExample) {
  std::vector<oracle::Observation> obs = {
      {"Paris", 0, 3.0, 0.5}, {"Lyon", 1, 2.0, 0.4}, {"Paris ", 2, 1.0, 0.1}};
  auto agg = aggregate(view(obs));
  ASSERT_EQ(agg.size(), 2u);
  EXPECT_EQ(agg[0].span, "Paris");
  EXPECT_EQ(agg[0].base_index, 0u);
  EXPECT_EQ(agg[0].occurrence_count, 2);
  EXPECT_EQ(agg[0].first_occurrence_rank, 0);
  EXPECT_DOUBLE_EQ(agg[0].span_score.sum, 4.0);
  EXPECT_DOUBLE_EQ(agg[0].span_score.mean, 2.0);
  EXPECT_DOUBLE_EQ(agg[0].span_score.min, 1.0);
  EXPECT_DOUBLE_EQ(agg[0].doc_query_sim.max, 0.5);
  EXPECT_EQ(agg[1].occurrence_count, 1);
  EXPECT_EQ(agg[1].first_occurrence_rank, 1);
}

TEST(Aggregate, CaseFoldIsOptional) {
  std::vector<oracle::Observation> obs = {{"paris", 0, 1, 0}, {"Paris", 1, 1, 0}};
  EXPECT_EQ(aggregate(view(obs)).size(), 2u);
  EXPECT_EQ(aggregate(view(obs), {true}).size(), 1u);
}

TEST(Aggregate, EmptyAndOrderingPreconditions) {
  EXPECT_TRUE(aggregate(std::vector<CandidateObservation>{}).empty());
  std::vector<oracle::Observation> bad = {{"a", 1, 0, 0}, {"b", 0, 0, 0}};
  EXPECT_THROW(aggregate(view(bad)), Error);
  std::vector<oracle::Observation> dup = {{"a", 0, 0, 0}, {"b", 0, 0, 0}};
  EXPECT_THROW(aggregate(view(dup)), Error);
}

TEST(Aggregate, RandomListsMatchGroupByOracle) {
  std::mt19937_64 rng(21);
  const std::vector<std::string> alphabet = {"a", "b", "c", " a", "b  ", "c d", "c  d", "A"};
  std::uniform_real_distribution<double> u(-2.0, 5.0);
  for (int t = 0; t < 300; ++t) {
    std::vector<oracle::Observation> obs;
    const int n = static_cast<int>(rng() % 41);
    int rank = 0;
    for (int i = 0; i < n; ++i) {
      rank += 1 + static_cast<int>(rng() % 2);
      obs.push_back({alphabet[rng() % alphabet.size()], rank, u(rng), u(rng)});
    }
    const bool fold = t % 2 == 1;
    auto got = aggregate(view(obs), {fold});
    auto expected = oracle::group_by(obs, fold);
    ASSERT_EQ(got.size(), expected.size());
    std::size_t total = 0;
    for (std::size_t g = 0; g < got.size(); ++g) {
      const auto& m = expected[g].members;
      total += m.size();
      EXPECT_EQ(got[g].span, expected[g].key);
      EXPECT_EQ(got[g].base_index, m.front());
      EXPECT_EQ(got[g].occurrence_count, static_cast<int>(m.size()));
      EXPECT_EQ(got[g].first_occurrence_rank, obs[m.front()].rank);
      double sum = 0, lo = 1e300, hi = -1e300;
      for (auto i : m) {
        sum += obs[i].span_score;
        lo = std::min(lo, obs[i].span_score);
        hi = std::max(hi, obs[i].span_score);
      }
      EXPECT_NEAR(got[g].span_score.sum, sum, 1e-9);
      EXPECT_NEAR(got[g].span_score.mean, sum / m.size(), 1e-9);
      EXPECT_EQ(got[g].span_score.min, lo);
      EXPECT_EQ(got[g].span_score.max, hi);
      // Invariants: min <= mean <= max, sum = mean * count.
      EXPECT_LE(got[g].doc_query_sim.min, got[g].doc_query_sim.mean + 1e-12);
      EXPECT_LE(got[g].doc_query_sim.mean, got[g].doc_query_sim.max + 1e-12);
      EXPECT_NEAR(got[g].doc_query_sim.sum, got[g].doc_query_sim.mean * m.size(), 1e-9);
      if (g) { EXPECT_LT(got[g - 1].first_occurrence_rank, got[g].first_occurrence_rank); }
    }
    EXPECT_EQ(total, obs.size());
  }
}

}  // namespace
}  // namespace qarank
