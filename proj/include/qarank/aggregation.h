#ifndef QARANK_AGGREGATION_H_
#define QARANK_AGGREGATION_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qarank {

// What the aggregator needs to know about one reader candidate.
struct CandidateObservation {
  std::string_view span;
  int original_rank = 0;
  double span_score = 0.0;
  double doc_query_sim = 0.0;
};

struct SummaryStats {
  double sum = 0.0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;

  bool operator==(const SummaryStats&) const = default;
};

// One group of candidates sharing a normalized span. The survivor is the
// highest-ranked member; its own features stay on the candidate and the
// statistics below are added on top of them.
struct AggregatedCandidate {
  std::size_t base_index = 0;  // index of the survivor in the input
  std::string span;            // normalized
  int occurrence_count = 0;
  int first_occurrence_rank = 0;
  SummaryStats span_score;
  SummaryStats doc_query_sim;
};

struct AggregationOptions {
  bool case_fold = false;
};

// Trims and collapses internal whitespace runs to a single space. Lowercases
// ASCII letters when case_fold is set.
std::string normalize_span(std::string_view span, bool case_fold = false);

// Merges candidates whose normalized spans are equal. Input must be strictly
// ascending in original_rank; output is ordered by first occurrence.
std::vector<AggregatedCandidate> aggregate(
    std::span<const CandidateObservation> candidates,
    const AggregationOptions& options = {});

}  // namespace qarank

#endif  // QARANK_AGGREGATION_H_
