#ifndef QARANK_RETRIEVAL_H_
#define QARANK_RETRIEVAL_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qarank/corpus.h"

namespace qarank {

// Sparse term-weight vector, sorted by bucket id with unique buckets.
using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

struct IndexOptions {
  std::uint32_t num_buckets = 1u << 24;
  // Score documents on title + body. When false only the body is indexed.
  bool include_title = true;
};

struct ScoredDocument {
  std::string doc_id;
  double score = 0.0;
};

struct RetrievalResult {
  std::vector<ScoredDocument> documents;
  // Set when the question has no tokens; `documents` is then empty.
  bool empty_query = false;
};

// Hashed unigram+bigram TF-IDF index with cosine scoring.
//
// Term weight is tf * idf with idf = log((N + 1) / (df + 1)) + 1. Immutable
// after build(), so concurrent retrieve()/similarity() calls are safe.
class TfidfIndex {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  static TfidfIndex build(const std::vector<Document>& corpus,
                          const IndexOptions& options = {});

  // Top min(n, size()) documents by cosine similarity, ties by ascending doc_id.
  RetrievalResult retrieve(std::string_view question, std::size_t n) const;

  // Cosine similarity of two texts under this index's IDF statistics. 0 when
  // either side has no terms.
  double similarity(std::string_view a, std::string_view b) const;

  SparseVector vectorize(std::string_view text) const;
  // Text a document is scored on (title + body, or body only).
  std::string document_text(const Document& doc) const;

  std::uint32_t num_buckets() const { return options_.num_buckets; }
  bool include_title() const { return options_.include_title; }
  std::size_t size() const { return doc_ids_.size(); }
  std::uint32_t document_frequency(std::uint32_t bucket) const;
  double idf(std::uint32_t bucket) const;
  const std::string& doc_id(std::size_t i) const { return doc_ids_[i]; }
  const SparseVector& document_vector(std::size_t i) const { return doc_vectors_[i]; }

  void save(std::ostream& out) const;
  void save(const std::string& path) const;
  static TfidfIndex load(std::istream& in);
  static TfidfIndex load(const std::string& path);

 private:
  void rebuild_postings();

  IndexOptions options_;
  std::vector<std::string> doc_ids_;
  std::vector<SparseVector> doc_vectors_;
  std::vector<double> doc_norms_;
  std::unordered_map<std::uint32_t, std::uint32_t> df_;
  std::unordered_map<std::uint32_t,
                     std::vector<std::pair<std::uint32_t, double>>>
      postings_;
};

double cosine(const SparseVector& a, const SparseVector& b);
double norm(const SparseVector& v);

}  // namespace qarank

#endif  // QARANK_RETRIEVAL_H_
