#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.h"
#include "qarank/reader.h"

namespace qarank {
namespace {

std::string tags(std::size_t dim, std::size_t one) {
  std::string s = "[";
  for (std::size_t i = 0; i < dim; ++i) s += std::string(i ? "," : "") + (i == one ? "1" : "0");
  return s + "]";
}

std::string candidate(const std::string& span, int rank, bool with_tags = true,
                      const std::string& score = "1.5") {
  std::string c = "{\"span\":\"" + span + "\",\"doc_id\":\"d1\",\"para_id\":0,\"span_score\":" +
                  score + ",\"original_rank\":" + std::to_string(rank);
  if (with_tags) c += ",\"pos_tags\":" + tags(kPosDim, 11) + ",\"ner_tags\":" + tags(kNerDim, 12);
  return c + "}";
}

std::string record(const std::string& id, const std::vector<std::string>& cands) {
  std::string s = "{\"question_id\":\"" + id +
                  "\",\"question_text\":\"Who?\",\"gold_answers\":[\"x\"],\"candidates\":[";
  for (std::size_t i = 0; i < cands.size(); ++i) s += (i ? "," : "") + cands[i];
  return s + "]}";
}

std::vector<QuestionRecord> parse(const std::string& text, const ReaderProfile& p, int k = 40) {
  std::istringstream in(text);
  return parse_candidate_dump(in, p, k);
}

std::string error_of(const std::string& text, const ReaderProfile& p, int k = 40) {
  try {
    parse(text, p, k);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(TagSets, Dimensions) {
  EXPECT_EQ(kPosTags.size(), 45u);
  EXPECT_EQ(kNerTags.size(), 13u);
  EXPECT_EQ(kNerTags.back(), "<other>");
  std::set<std::string_view> uniq(kPosTags.begin(), kPosTags.end());
  EXPECT_EQ(uniq.size(), 45u);
}

TEST(Profiles, FromName) {
  EXPECT_TRUE(ReaderProfile::from_name("drqa").has_linguistic_features);
  EXPECT_FALSE(ReaderProfile::from_name("bert").has_linguistic_features);
  EXPECT_THROW(ReaderProfile::from_name("gpt"), Error);
}

TEST(CandidateDump, ParsesAndSortsByRank) {
  auto r = parse(record("q1", {candidate("b", 1), candidate("a", 0)}), ReaderProfile::drqa());
  ASSERT_EQ(r.size(), 1u);
  ASSERT_EQ(r[0].candidates.size(), 2u);
  EXPECT_EQ(r[0].candidates[0].span, "a");
  EXPECT_EQ(r[0].candidates[0].pos_tags->at(11), 1);
}

TEST(CandidateDump, BertProfileNeedsNoTags) {
  auto r = parse(record("q1", {candidate("a", 0, false)}), ReaderProfile::bert());
  EXPECT_FALSE(r[0].candidates[0].pos_tags.has_value());
}

TEST(CandidateDump, DrqaProfileRequiresTags) {
  auto e = error_of(record("q7", {candidate("a", 0, false)}), ReaderProfile::drqa());
  EXPECT_NE(e.find("q7"), std::string::npos);
  EXPECT_NE(e.find("pos_tags"), std::string::npos);
}

TEST(CandidateDump, ValidationErrorsCarryLineAndQuestion) {
  const auto p = ReaderProfile::drqa();
  const std::string ok = record("q0", {candidate("a", 0)}) + "\n";
  auto e = error_of(ok + record("q9", {candidate("a", 40)}), p);
  EXPECT_NE(e.find(":2:"), std::string::npos) << e;
  EXPECT_NE(e.find("q9"), std::string::npos) << e;
  EXPECT_NE(error_of(record("q", {candidate("  ", 0)}), p).find("empty answer span"),
            std::string::npos);
  EXPECT_NE(error_of(record("q", {candidate("a", 0), candidate("b", 2)}), p).find("gaps"),
            std::string::npos);
  EXPECT_NE(error_of(record("q", {candidate("a", 0), candidate("b", 0)}), p).find("duplicates"),
            std::string::npos);
  EXPECT_NE(error_of(ok + ok, p).find("duplicate question_id"), std::string::npos);
  EXPECT_NE(error_of(record("q", {candidate("a", -1)}), p).find("outside"), std::string::npos);
  EXPECT_FALSE(error_of("{oops", p).empty());
  EXPECT_FALSE(error_of(record("q", {candidate("a", 0, true, "\"high\"")}), p).empty());
  EXPECT_THROW(parse(ok, p, 0), Error);
}

TEST(CandidateDump, RejectsWrongTagShapes) {
  const auto p = ReaderProfile::drqa();
  std::string c = candidate("a", 0);
  std::string short_pos = c;
  short_pos.replace(short_pos.find("\"pos_tags\":[") + 12, 2, "");
  EXPECT_FALSE(error_of(record("q", {short_pos}), p).empty());
  std::string two = c;
  two.replace(two.find("\"ner_tags\":[") + 12, 1, "2");
  EXPECT_FALSE(error_of(record("q", {two}), p).empty());
}

TEST(CandidateDump, SerializeParseRoundTrip) {
  std::mt19937_64 rng(11);
  std::vector<QuestionRecord> records;
  for (int q = 0; q < 30; ++q) {
    QuestionRecord r;
    r.question_id = "q" + std::to_string(q);
    r.question_text = "What is \"quoted\" \\ text " + std::to_string(q) + "?";
    r.gold_answers = {"ans", "ünï"};
    for (int c = 0; c < static_cast<int>(rng() % 6); ++c) {
      AnswerCandidate a;
      a.span = "span " + std::to_string(rng() % 100);
      a.doc_id = "doc" + std::to_string(rng() % 5);
      a.para_id = static_cast<int>(rng() % 3);
      a.span_score = std::ldexp(static_cast<double>(rng() % 1000000), -7) - 3.0;
      a.original_rank = c;
      a.pos_tags = std::vector<std::uint8_t>(kPosDim, 0);
      a.ner_tags = std::vector<std::uint8_t>(kNerDim, 0);
      (*a.pos_tags)[rng() % kPosDim] = 1;
      r.candidates.push_back(a);
    }
    records.push_back(r);
  }
  std::stringstream ss;
  write_candidate_dump(records, ss);
  auto back = parse_candidate_dump(ss, ReaderProfile::drqa(), 40);
  EXPECT_EQ(back, records);
  std::stringstream again;
  write_candidate_dump(back, again);
  std::stringstream first;
  write_candidate_dump(records, first);
  EXPECT_EQ(first.str(), again.str());
}

std::vector<Paragraph> paragraphs() {
  return {{"d2", 0, "The Seine flows through Paris, the capital of France since 987."},
          {"d1", 1, "Paris was founded by the Parisii. It is in France."},
          {"d1", 0, "Lyon is a city in France on the Rhone river."}};
}

TEST(MockReader, MatchesExhaustiveOracle) {
  const std::string q = "Which river flows through Paris in France?";
  auto got = mock_read(q, paragraphs(), 25);
  auto all = oracle::exhaustive_spans(q, paragraphs());
  ASSERT_EQ(got.size(), 25u);
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_EQ(got[i].original_rank, static_cast<int>(i));
    EXPECT_DOUBLE_EQ(got[i].span_score, all[i].score) << i;
    EXPECT_EQ(got[i].doc_id, all[i].doc_id) << i;
    EXPECT_EQ(got[i].para_id, all[i].para_id) << i;
    EXPECT_EQ(got[i].span, all[i].text) << i;
    ASSERT_TRUE(got[i].pos_tags && got[i].ner_tags);
    EXPECT_EQ(got[i].pos_tags->size(), kPosDim);
  }
}

TEST(MockReader, RandomParagraphsMatchOracle) {
  std::mt19937_64 rng(5);
  const std::vector<std::string> vocab = {"Alpha", "beta", "gamma", "42", "delta", "Eps", "the"};
  for (int t = 0; t < 30; ++t) {
    std::vector<Paragraph> ps;
    for (int p = 0; p < 3; ++p) {
      std::string text;
      for (int w = 0; w < 1 + static_cast<int>(rng() % 20); ++w) text += vocab[rng() % 7] + " ";
      ps.push_back({"d" + std::to_string(rng() % 2), p, text});
    }
    const std::string q = vocab[rng() % 7] + " " + vocab[rng() % 7];
    auto got = mock_read(q, ps, 40);
    auto all = oracle::exhaustive_spans(q, ps);
    ASSERT_EQ(got.size(), std::min<std::size_t>(40, all.size()));
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_DOUBLE_EQ(got[i].span_score, all[i].score);
      EXPECT_EQ(got[i].span, all[i].text);
    }
  }
}

TEST(MockReader, EdgeCases) {
  EXPECT_TRUE(mock_read("q", {}, 5).empty());
  EXPECT_THROW(mock_read("q", paragraphs(), 0), Error);
  auto one = mock_read("x", {{"d", 0, "solo"}}, 10);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].span, "solo");
  EXPECT_EQ(one[0].span_score, 0.0);
}

TEST(HeuristicTags, RulesAndCatchAll) {
  auto pos = heuristic_pos_tags({"The", "1999"});
  auto idx = [](std::string_view t) {
    return static_cast<std::size_t>(std::find(kPosTags.begin(), kPosTags.end(), t) -
                                    kPosTags.begin());
  };
  EXPECT_EQ(pos[idx("NNP")], 1);
  EXPECT_EQ(pos[idx("CD")], 1);
  EXPECT_EQ(heuristic_pos_tags({"of"})[idx("IN")], 1);
  EXPECT_EQ(heuristic_pos_tags({"the"})[idx("DT")], 1);
  EXPECT_EQ(heuristic_pos_tags({"river"})[idx("NN")], 1);
  auto ner = heuristic_ner_tags({"river"});
  EXPECT_EQ(ner[12], 1);
  EXPECT_EQ(std::count(ner.begin(), ner.end(), 1), 1);
  auto ner2 = heuristic_ner_tags({"Paris", "1999"});
  EXPECT_EQ(ner2[1], 1);
  EXPECT_EQ(ner2[9], 1);
  EXPECT_EQ(ner2[12], 0);
}

}  // namespace
}  // namespace qarank
