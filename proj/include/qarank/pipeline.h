#ifndef QARANK_PIPELINE_H_
#define QARANK_PIPELINE_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qarank/corpus.h"
#include "qarank/evaluation.h"
#include "qarank/features.h"
#include "qarank/ranker.h"
#include "qarank/reader.h"
#include "qarank/retrieval.h"

namespace qarank {

struct PipelineConfig {
  int top_n_documents = 10;
  int top_k_candidates = 40;
  ReaderProfile profile = ReaderProfile::drqa();
  TrainConfig train;  // also carries inference_top
  // Share of each dataset held out for model selection.
  double selection_fraction = 0.10;
  bool case_fold_spans = false;
  std::uint32_t num_buckets = 1u << 24;
  bool include_title = true;
  MockReaderOptions mock_reader;

  void validate() const;
  // Flat key/value form used by config files.
  nlohmann::ordered_json to_json() const;
  // Keys absent from `j` keep their current value; unknown keys throw.
  void merge_json(const nlohmann::json& j);
  static PipelineConfig load(const std::string& path);
};

// Stages one and two of the pipeline: retrieve top-n documents, split them into
// paragraphs and run the mock reader. Gold answers are carried over.
QuestionRecord read_question(const QuestionRecord& question, const TfidfIndex& index,
                             const Corpus& corpus, const PipelineConfig& config);

// One aggregated candidate with its raw (unscaled) feature vector.
struct PreparedCandidate {
  std::string span;  // span text of the surviving candidate
  int first_occurrence_rank = 0;
  int occurrence_count = 1;
  FeatureVector raw;
};

struct PreparedQuestion {
  std::string question_id;
  std::vector<std::string> gold_answers;
  std::vector<PreparedCandidate> candidates;  // first-occurrence order
};

// Feature extraction + aggregation + assembly for one question. Errors name
// the question and the offending candidate.
PreparedQuestion prepare_question(const QuestionRecord& record, const TfidfIndex& index,
                                  const Corpus& corpus, const FeatureSchema& schema,
                                  bool case_fold_spans = false);

std::vector<PreparedQuestion> prepare_questions(const std::vector<QuestionRecord>& records,
                                                const TfidfIndex& index,
                                                const Corpus& corpus,
                                                const FeatureSchema& schema,
                                                bool case_fold_spans = false);

// Keeps only the blocks of `to` from vectors laid out as `from`.
PreparedQuestion project(const PreparedQuestion& q, const FeatureSchema& from,
                         const FeatureSchema& to);

// Everything needed to score candidates: weights, scaler, schema, settings
// and the training history.
struct ModelBundle {
  static constexpr int kFormatVersion = 1;

  FeatureSchema schema;
  Scaler scaler;
  RankerModel model;
  TrainConfig config;
  double lambda = 0.0;
  bool case_fold_spans = false;
  std::vector<std::string> datasets;
  std::vector<TrainingLog> logs;  // one per lambda tried

  nlohmann::ordered_json to_json() const;
  static ModelBundle from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static ModelBundle load(const std::string& path);
};

// Constant scorer (B = 0): re-ranking keeps the reader's order.
ModelBundle identity_bundle(const FeatureSchema& schema, const TrainConfig& config = {});

struct NamedQuestions {
  std::string name;
  std::vector<PreparedQuestion> questions;
};

// Seeded shuffle, then the first round(fraction * n) questions (at least one,
// at most n - 1) go to model selection.
void split_for_selection(std::vector<PreparedQuestion> questions, double fraction,
                         std::uint64_t seed, std::vector<PreparedQuestion>& train,
                         std::vector<PreparedQuestion>& selection);

// Labels candidates with exact match against the gold answers, scales them and
// samples adjacent pairs.
std::vector<TrainingPair> make_pairs(const std::vector<PreparedQuestion>& questions,
                                     const Scaler& scaler, const TrainConfig& config);

// Splits each dataset for selection, fits the scaler on the training part,
// trains once per lambda in the grid and keeps the lambda with the lowest
// selection loss.
ModelBundle train_bundle(const std::vector<NamedQuestions>& datasets,
                         const FeatureSchema& schema, const PipelineConfig& config);

struct RankedAnswer {
  std::string span;
  int first_occurrence_rank = 0;
  std::optional<double> score;
};

struct RerankedQuestion {
  std::string question_id;
  std::string answer;  // empty when there were no candidates
  std::vector<RankedAnswer> ranked;
};

RerankedQuestion rerank_question(const ModelBundle& bundle, const PreparedQuestion& q);

nlohmann::ordered_json to_json(const RerankedQuestion& r);

// Re-ranks every record with the bundle and scores the result.
EvaluationReport evaluate_with_model(const std::string& dataset,
                                     const std::vector<QuestionRecord>& records,
                                     const ModelBundle& bundle, const TfidfIndex& index,
                                     const Corpus& corpus,
                                     std::vector<RerankedQuestion>* reranked = nullptr);

}  // namespace qarank

#endif  // QARANK_PIPELINE_H_
