#ifndef QARANK_FEATURES_H_
#define QARANK_FEATURES_H_

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qarank/aggregation.h"
#include "qarank/corpus.h"
#include "qarank/reader.h"
#include "qarank/retrieval.h"

namespace qarank {

using FeatureVector = std::vector<double>;

enum class FeatureGroup { kRetrieval, kComprehension, kAggregation };

std::string_view to_string(FeatureGroup group);
FeatureGroup feature_group_from_string(std::string_view s);

struct FeatureBlock {
  std::string name;
  FeatureGroup group = FeatureGroup::kRetrieval;
  std::size_t dim = 1;
  // 0/1 indicator block: never log-transformed or rescaled.
  bool indicator = false;
  // For aggregation blocks: the base feature the statistic is computed from.
  std::string source;

  bool operator==(const FeatureBlock&) const = default;
};

// Named, ordered layout of the re-ranker input.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  FeatureSchema(ReaderProfile profile, std::vector<FeatureBlock> blocks);

  // Full layout for a reader profile: 89 dimensions when the reader carries
  // POS/NER bits, 31 otherwise.
  static FeatureSchema for_profile(const ReaderProfile& profile);

  const ReaderProfile& profile() const { return profile_; }
  const std::vector<FeatureBlock>& blocks() const { return blocks_; }
  std::size_t dimension() const { return dimension_; }
  bool has(std::string_view name) const;
  const FeatureBlock* find(std::string_view name) const;
  // Offset of a block's first dimension; throws if absent.
  std::size_t offset(std::string_view name) const;
  // One flag per dimension.
  std::vector<bool> indicator_mask() const;

  // Copy without the named blocks.
  FeatureSchema without(const std::vector<std::string>& names) const;

  nlohmann::ordered_json to_json() const;
  static FeatureSchema from_json(const nlohmann::json& j);

  bool operator==(const FeatureSchema&) const = default;

 private:
  ReaderProfile profile_;
  std::vector<FeatureBlock> blocks_;
  std::size_t dimension_ = 0;
};

inline constexpr std::size_t kQuestionTypeDim = 13;
extern const std::array<std::string_view, kQuestionTypeDim> kQuestionTypes;

// One-hot over the question's opening words, longest prefix first, matched
// on whole tokens and case-insensitively. Falls back to <other>.
std::array<double, kQuestionTypeDim> question_type(std::string_view question);

struct RetrievalFeatures {
  double doc_query_sim = 0.0;
  double para_query_sim = 0.0;
  double doc_length = 0.0;
  double para_length = 0.0;
  double question_length = 0.0;
  double paragraph_position = 0.0;
  std::array<double, kQuestionTypeDim> question_type{};
};

// Retrieval-side features of one candidate. Throws when the candidate's
// doc_id or para_id does not resolve in the corpus.
RetrievalFeatures extract_ir_features(std::string_view question,
                                      const AnswerCandidate& candidate,
                                      const TfidfIndex& index,
                                      const Corpus& corpus);

// Places the candidate's retrieval, comprehension and aggregation values in
// schema order. `aggregated` may be null only if the schema has no
// aggregation block. Throws naming the first block that cannot be filled.
FeatureVector assemble(const AnswerCandidate& candidate,
                       const RetrievalFeatures& ir,
                       const AggregatedCandidate* aggregated,
                       const FeatureSchema& schema);

// Per-dimension log1p + min-max scaling fitted on training vectors.
class Scaler {
 public:
  enum class Transform { kPassThrough, kLogMinMax, kMinMax };

  struct Column {
    Transform transform = Transform::kPassThrough;
    double min = 0.0;  // in transformed space
    double max = 0.0;

    bool operator==(const Column&) const = default;
  };

  Scaler() = default;

  // Indicator dimensions pass through. Other dimensions are log1p'd and
  // min-max scaled, unless their training minimum is negative, in which case
  // plain min-max applies.
  static Scaler fit(std::span<const FeatureVector> training,
                    const FeatureSchema& schema);
  // No-op scaler that only clamps to [0, 1].
  static Scaler unit(const FeatureSchema& schema);

  // Result lies in [0, 1]^d. Throws on dimension mismatch or non-finite input.
  FeatureVector transform(const FeatureVector& raw) const;

  std::size_t dimension() const { return columns_.size(); }
  const std::vector<Column>& columns() const { return columns_; }

  nlohmann::ordered_json to_json() const;
  static Scaler from_json(const nlohmann::json& j);

  bool operator==(const Scaler&) const = default;

 private:
  std::vector<Column> columns_;
};

}  // namespace qarank

#endif  // QARANK_FEATURES_H_
