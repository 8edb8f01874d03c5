#include "qarank/aggregation.h"

#include <algorithm>
#include <unordered_map>

#include "qarank/text.h"

namespace qarank {

std::string normalize_span(std::string_view span, bool case_fold) {
  std::string out;
  out.reserve(span.size());
  bool pending_space = false;
  for (char c : span) {
    const bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r' ||
                    c == '\f' || c == '\v';
    if (ws) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    if (case_fold && c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    out.push_back(c);
  }
  return out;
}

std::vector<AggregatedCandidate> aggregate(
    std::span<const CandidateObservation> candidates,
    const AggregationOptions& options) {
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (candidates[i].original_rank <= candidates[i - 1].original_rank)
      throw Error("aggregate: candidates must be sorted by ascending original_rank");
  }

  std::vector<AggregatedCandidate> out;
  std::unordered_map<std::string, std::size_t> group_of;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    std::string key = normalize_span(c.span, options.case_fold);
    auto [it, inserted] = group_of.try_emplace(key, out.size());
    if (inserted) {
      AggregatedCandidate g;
      g.base_index = i;
      g.span = std::move(key);
      g.occurrence_count = 1;
      g.first_occurrence_rank = c.original_rank;
      g.span_score = {c.span_score, c.span_score, c.span_score, c.span_score};
      g.doc_query_sim = {c.doc_query_sim, c.doc_query_sim, c.doc_query_sim,
                         c.doc_query_sim};
      out.push_back(std::move(g));
      continue;
    }
    auto& g = out[it->second];
    ++g.occurrence_count;
    g.span_score.sum += c.span_score;
    g.span_score.min = std::min(g.span_score.min, c.span_score);
    g.span_score.max = std::max(g.span_score.max, c.span_score);
    g.doc_query_sim.sum += c.doc_query_sim;
    g.doc_query_sim.min = std::min(g.doc_query_sim.min, c.doc_query_sim);
    g.doc_query_sim.max = std::max(g.doc_query_sim.max, c.doc_query_sim);
  }
  for (auto& g : out) {
    g.span_score.mean = g.span_score.sum / g.occurrence_count;
    g.doc_query_sim.mean = g.doc_query_sim.sum / g.occurrence_count;
  }
  return out;
}

}  // namespace qarank
