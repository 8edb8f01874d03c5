#ifndef QARANK_EXPERIMENTS_H_
#define QARANK_EXPERIMENTS_H_

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "qarank/corpus.h"
#include "qarank/evaluation.h"
#include "qarank/pipeline.h"

namespace qarank {

struct AblationRow {
  std::string group;  // "all" for the unblinded reference run
  std::size_t dimension = 0;
  double lambda = 0.0;
  EvaluationReport report;
};

// Ablation groups that have at least one feature under `schema`.
std::vector<std::string> applicable_ablation_groups(const FeatureSchema& schema);

// Trains one model per blinded group (plus an unblinded reference) on
// `train` and scores each on `eval_prepared`. Prepared vectors must follow
// `full`; they are projected onto each blinded schema and the scaler is refit.
std::vector<AblationRow> run_ablation(const std::vector<NamedQuestions>& train,
                                      const std::vector<QuestionRecord>& eval_records,
                                      const std::vector<PreparedQuestion>& eval_prepared,
                                      const FeatureSchema& full, const PipelineConfig& config,
                                      const std::vector<std::string>& groups);

void write_ablation_csv(const std::vector<AblationRow>& rows, std::ostream& out);

// Returns a corpus of exactly `size` documents.
using CorpusGenerator = std::function<std::vector<Document>(std::size_t size)>;

struct SweepRow {
  std::size_t corpus_size = 0;
  EvaluationReport report;
};

// Runs the full pipeline with a fixed model over corpora of increasing size.
// Sizes must be strictly increasing and each corpus must contain the previous
// one unchanged.
std::vector<SweepRow> corpus_sweep(const CorpusGenerator& generate,
                                   const std::vector<QuestionRecord>& questions,
                                   const std::vector<std::size_t>& sizes,
                                   const ModelBundle& bundle, const PipelineConfig& config);

// Header: corpus_size,baseline_em,reranked_em,upper_bound_em
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);

// Column-aligned text tables for terminals; EM shown in percent.
std::string format_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows);
std::string ablation_table(const std::vector<AblationRow>& rows);
std::string sweep_table(const std::vector<SweepRow>& rows);
std::string report_table(const EvaluationReport& report);

}  // namespace qarank

#endif  // QARANK_EXPERIMENTS_H_
