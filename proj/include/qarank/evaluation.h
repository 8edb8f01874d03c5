#ifndef QARANK_EVALUATION_H_
#define QARANK_EVALUATION_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qarank/features.h"
#include "qarank/reader.h"

namespace qarank {

// SQuAD convention: lowercase, drop punctuation and the articles a/an/the,
// collapse whitespace.
std::string normalize_answer(std::string_view text);

// 1 iff the normalized prediction equals some normalized gold answer. Throws
// when gold_answers is empty.
bool exact_match(std::string_view prediction, const std::vector<std::string>& gold_answers);

struct QuestionVerdict {
  std::string question_id;
  std::string prediction;
  std::string baseline_prediction;
  bool correct = false;
  bool baseline_correct = false;
  bool answerable = false;  // some candidate matches a gold answer
};

struct EvaluationReport {
  std::string dataset;
  std::size_t questions = 0;
  double em = 0.0;
  double baseline_em = 0.0;
  double upper_bound_em = 0.0;
  std::optional<double> retention;  // absent when nothing was initially correct
  std::vector<QuestionVerdict> verdicts;

  nlohmann::ordered_json to_json(bool with_verdicts = false) const;
};

// `predictions[i]` is the chosen answer for `records[i]` (empty when the
// record has no candidates). The baseline is each record's rank-0 candidate.
EvaluationReport evaluate(const std::string& dataset,
                          std::span<const QuestionRecord> records,
                          std::span<const std::string> predictions);

// Fraction of records where any candidate matches a gold answer.
double upper_bound(std::span<const QuestionRecord> records);

// Among questions whose top candidate was correct under `before`, the fraction
// still correct under `after`. Orders are permutations of candidate indices.
std::optional<double> retention(std::span<const QuestionRecord> records,
                                const std::vector<std::vector<std::size_t>>& before,
                                const std::vector<std::vector<std::size_t>>& after);

// Same ratio from per-question correctness flags.
std::optional<double> retention(std::span<const QuestionVerdict> verdicts);

// Named feature groups that can be blinded together, in reporting order.
struct AblationGroup {
  std::string name;
  std::vector<std::string> features;  // empty for the aggregation group
};
const std::vector<AblationGroup>& ablation_groups();

// Removes the named features, ablation groups, or whole groups (IR, MC, AGG).
// Removing a base feature also removes the aggregates derived from it;
// removing aggregates keeps the base features. Unknown names throw.
FeatureSchema blind_features(const FeatureSchema& schema,
                             const std::vector<std::string>& names);

// Reference values from the published benchmark runs (EM, percent). They need
// the full Wikipedia corpus and pretrained readers and are kept for
// documentation; nothing here reproduces them.
struct PublishedResult {
  std::string_view dataset;
  double baseline_em;
  double reranked_em;
  double upper_bound_em;
};
inline constexpr PublishedResult kPublishedDrqa[] = {
    {"SQuAD-open", 29.8, 34.5, 54.2},
    {"CuratedTREC", 25.4, 32.4, 65.9},
    {"WebQuestions", 20.7, 21.8, 53.8},
    {"WikiMovies", 36.5, 43.3, 65.0},
};
inline constexpr PublishedResult kPublishedBert[] = {
    {"SQuAD-open", 23.3, 35.8, 61.2},
    {"CuratedTREC", 19.7, 32.0, 66.6},
    {"WebQuestions", 8.2, 13.7, 39.6},
    {"WikiMovies", 10.9, 20.6, 49.8},
};
inline constexpr double kPublishedRetentionLow = 0.946;
inline constexpr double kPublishedRetentionHigh = 0.961;

}  // namespace qarank

#endif  // QARANK_EVALUATION_H_
