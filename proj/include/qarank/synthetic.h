#ifndef QARANK_SYNTHETIC_H_
#define QARANK_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qarank/corpus.h"
#include "qarank/reader.h"

// Generated corpora for desk-scale experiments.
namespace qarank::synthetic {

struct ToyDataset {
  std::vector<Document> documents;
  std::vector<QuestionRecord> questions;  // gold answers set, no candidates
};

// Fictional towns with planted facts (founder, founding year, river, region,
// population) and questions whose answers appear verbatim in exactly one
// document. Document ids are "town-NNNN".
ToyDataset make_toy_dataset(std::uint64_t seed = 7, std::size_t num_documents = 100,
                            std::size_t num_questions = 50);

// `base` followed by size - |base| distractor documents. Distractors share no
// token with any question and none of their hashed unigrams or bigrams land
// in a bucket used by a question, so they never score above zero. Their ids
// sort after the base ids. Distractor i depends only on (seed, i), so corpora
// of increasing size are nested.
std::vector<Document> make_disjoint_sweep_corpus(const ToyDataset& base, std::size_t size,
                                                 std::uint64_t seed,
                                                 std::uint32_t num_buckets);

// Like make_disjoint_sweep_corpus() but each distractor restates one
// question's content words next to a wrong capitalized name, so larger
// corpora push more noise into the retrieved set.
std::vector<Document> make_noisy_sweep_corpus(const ToyDataset& base, std::size_t size,
                                              std::uint64_t seed);

}  // namespace qarank::synthetic

#endif  // QARANK_SYNTHETIC_H_
