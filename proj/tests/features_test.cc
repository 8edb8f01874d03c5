#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "qarank/evaluation.h"
#include "qarank/features.h"

namespace qarank {
namespace {

std::size_t type_of(std::string_view q) {
  auto v = question_type(q);
  EXPECT_EQ(std::count(v.begin(), v.end(), 1.0), 1);
  return static_cast<std::size_t>(std::find(v.begin(), v.end(), 1.0) - v.begin());
}

std::size_t type_index(std::string_view name) {
  return static_cast<std::size_t>(std::find(kQuestionTypes.begin(), kQuestionTypes.end(), name) -
                                  kQuestionTypes.begin());
}

TEST(Schema, DimensionsPerProfile) {
  auto drqa = FeatureSchema::for_profile(ReaderProfile::drqa());
  auto bert = FeatureSchema::for_profile(ReaderProfile::bert());
  EXPECT_EQ(drqa.dimension(), 89u);
  EXPECT_EQ(bert.dimension(), 31u);
  EXPECT_FALSE(bert.has("pos"));
  std::size_t ir = 0, mc = 0, agg = 0;
  for (const auto& b : drqa.blocks()) {
    if (b.group == FeatureGroup::kRetrieval) ir += b.dim;
    if (b.group == FeatureGroup::kComprehension) mc += b.dim;
    if (b.group == FeatureGroup::kAggregation) agg += b.dim;
  }
  EXPECT_EQ(ir, 19u);
  EXPECT_EQ(mc, 60u);
  EXPECT_EQ(agg, 10u);
  EXPECT_EQ(drqa.offset("doc_query_sim"), 0u);
  EXPECT_EQ(drqa.offset("question_type"), 6u);
  EXPECT_EQ(drqa.offset("pos"), 34u);
  EXPECT_THROW(drqa.offset("nope"), Error);
  auto mask = drqa.indicator_mask();
  EXPECT_EQ(std::count(mask.begin(), mask.end(), true), 13 + 13 + 45);
}

TEST(Schema, BlindingDimensions) {
  auto drqa = FeatureSchema::for_profile(ReaderProfile::drqa());
  EXPECT_EQ(blind_features(drqa, {"query_document_similarity"}).dimension(), 84u);
  EXPECT_EQ(blind_features(drqa, {"aggregation"}).dimension(), 79u);
  EXPECT_EQ(blind_features(drqa, {"linguistic"}).dimension(), 31u);
  EXPECT_EQ(blind_features(drqa, {"span_score"}).dimension(), 84u);
  EXPECT_EQ(blind_features(drqa, {"ranking"}).dimension(), 86u);
  EXPECT_EQ(blind_features(drqa, {"length"}).dimension(), 86u);
  EXPECT_EQ(blind_features(drqa, {"query_paragraph_similarity"}).dimension(), 88u);
  EXPECT_EQ(blind_features(drqa, {"IR"}).dimension(), 89u - 19u - 4u);
  EXPECT_THROW(blind_features(drqa, {"unknown"}), Error);
  auto bert = FeatureSchema::for_profile(ReaderProfile::bert());
  EXPECT_THROW(blind_features(bert, {"linguistic"}), Error);
  EXPECT_EQ(blind_features(bert, {"query_document_similarity"}).dimension(), 26u);
}

TEST(Schema, JsonRoundTrip) {
  auto s = blind_features(FeatureSchema::for_profile(ReaderProfile::drqa()), {"length"});
  EXPECT_EQ(FeatureSchema::from_json(s.to_json()), s);
  auto j = nlohmann::json(s.to_json());
  j["dimension"] = 3;
  EXPECT_THROW(FeatureSchema::from_json(j), Error);
}

TEST(QuestionType, LongestPrefixOnWholeTokens) {
  EXPECT_EQ(type_of("What was the capital?"), type_index("what was"));
  EXPECT_EQ(type_of("what is love"), type_index("what is"));
  EXPECT_EQ(type_of("What river?"), type_index("what"));
  EXPECT_EQ(type_of("In which year?"), type_index("in which"));
  EXPECT_EQ(type_of("In what year?"), type_index("in what"));
  EXPECT_EQ(type_of("In 1990, who?"), type_index("in"));
  EXPECT_EQ(type_of("Whose hat?"), type_index("<other>"));
  EXPECT_EQ(type_of("Whatever"), type_index("<other>"));
  EXPECT_EQ(type_of("Is it?"), type_index("is"));
  EXPECT_EQ(type_of(""), type_index("<other>"));
  EXPECT_EQ(type_of("WHO are you"), type_index("who"));
}

struct Fixture {
  std::vector<Document> docs = {{"d1", "Paris", "Paris is the capital of France.\n\nIt is big."},
                                {"d2", "Lyon", "Lyon is a city."}};
  TfidfIndex index = TfidfIndex::build(docs);
  Corpus corpus{docs};
  AnswerCandidate cand{"big", "d1", 1, 2.5, 3,
                       std::vector<std::uint8_t>(kPosDim, 0),
                       std::vector<std::uint8_t>(kNerDim, 0)};
};

TEST(IrFeatures, ValuesFromCorpus) {
  Fixture f;
  const std::string q = "How big is Paris?";
  auto ir = extract_ir_features(q, f.cand, f.index, f.corpus);
  EXPECT_DOUBLE_EQ(ir.doc_query_sim, f.index.similarity(q, "Paris\nParis is the capital of France.\n\nIt is big."));
  EXPECT_DOUBLE_EQ(ir.para_query_sim, f.index.similarity(q, "It is big."));
  EXPECT_EQ(ir.doc_length, 1 + 9);  // title token counted with the body
  EXPECT_EQ(ir.para_length, 3);
  EXPECT_EQ(ir.question_length, 4);
  EXPECT_EQ(ir.paragraph_position, 1);
  AnswerCandidate missing = f.cand;
  missing.para_id = 7;
  EXPECT_THROW(extract_ir_features(q, missing, f.index, f.corpus), Error);
  missing.doc_id = "zz";
  EXPECT_THROW(extract_ir_features(q, missing, f.index, f.corpus), Error);
}

TEST(Assemble, PlacesBlocksInSchemaOrder) {
  Fixture f;
  f.cand.pos_tags->at(13) = 1;
  f.cand.ner_tags->at(12) = 1;
  const auto schema = FeatureSchema::for_profile(ReaderProfile::drqa());
  auto ir = extract_ir_features("Who is big?", f.cand, f.index, f.corpus);
  AggregatedCandidate agg{0, "big", 2, 3, {5.0, 2.5, 2.0, 3.0}, {0.4, 0.2, 0.1, 0.3}};
  auto x = assemble(f.cand, ir, &agg, schema);
  ASSERT_EQ(x.size(), 89u);
  EXPECT_EQ(x[schema.offset("span_score")], 2.5);
  EXPECT_EQ(x[schema.offset("original_rank")], 3.0);
  EXPECT_EQ(x[schema.offset("question_type") + type_index("who")], 1.0);
  EXPECT_EQ(x[schema.offset("pos") + 13], 1.0);
  EXPECT_EQ(x[schema.offset("ner") + 12], 1.0);
  EXPECT_EQ(x[schema.offset("occurrence_count")], 2.0);
  EXPECT_EQ(x[schema.offset("span_score_sum")], 5.0);
  EXPECT_EQ(x[schema.offset("doc_query_sim_max")], 0.3);
  EXPECT_THROW(assemble(f.cand, ir, nullptr, schema), Error);
  AnswerCandidate untagged = f.cand;
  untagged.pos_tags.reset();
  EXPECT_THROW(assemble(untagged, ir, &agg, schema), Error);
  auto no_agg = blind_features(schema, {"aggregation"});
  EXPECT_EQ(assemble(f.cand, ir, nullptr, no_agg).size(), 79u);
}

TEST(Scaler, RangeIndicatorsAndConstants) {
  const auto schema = FeatureSchema::for_profile(ReaderProfile::bert());
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  std::vector<FeatureVector> rows(40, FeatureVector(schema.dimension()));
  const auto mask = schema.indicator_mask();
  for (auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = mask[i] ? static_cast<double>(rng() % 2) : u(rng);
  const std::size_t constant = schema.offset("question_length");
  const std::size_t negative = schema.offset("span_score");
  for (auto& r : rows) {
    r[constant] = 7.0;
    r[negative] -= 30.0;
  }
  auto s = Scaler::fit(rows, schema);
  EXPECT_EQ(s.columns()[constant].transform, Scaler::Transform::kLogMinMax);
  EXPECT_EQ(s.columns()[negative].transform, Scaler::Transform::kMinMax);
  EXPECT_EQ(s.columns()[schema.offset("question_type")].transform,
            Scaler::Transform::kPassThrough);
  for (const auto& r : rows) {
    auto x = s.transform(r);
    for (std::size_t i = 0; i < x.size(); ++i) {
      EXPECT_GE(x[i], 0.0);
      EXPECT_LE(x[i], 1.0);
      if (mask[i]) { EXPECT_EQ(x[i], r[i]); }
    }
    EXPECT_EQ(x[constant], 0.0);
  }
  // Out-of-range inputs are clamped.
  FeatureVector big = rows[0];
  big[schema.offset("doc_length")] = 1e9;
  EXPECT_EQ(s.transform(big)[schema.offset("doc_length")], 1.0);
  // log1p then min-max.
  double lo = 1e300, hi = -1e300;
  const std::size_t dl = schema.offset("doc_length");
  for (const auto& r : rows) {
    lo = std::min(lo, std::log1p(r[dl]));
    hi = std::max(hi, std::log1p(r[dl]));
  }
  EXPECT_NEAR(s.transform(rows[3])[dl], (std::log1p(rows[3][dl]) - lo) / (hi - lo), 1e-12);
  EXPECT_THROW(s.transform(FeatureVector(3, 0.0)), Error);
  FeatureVector nan_row = rows[0];
  nan_row[0] = std::nan("");
  EXPECT_THROW(s.transform(nan_row), Error);
  EXPECT_EQ(Scaler::from_json(s.to_json()), s);
}

}  // namespace
}  // namespace qarank
