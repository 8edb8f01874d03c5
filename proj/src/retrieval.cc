#include "qarank/retrieval.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "binary_io.h"

namespace qarank {

namespace {

constexpr char kMagic[8] = {'Q', 'A', 'R', 'K', 'I', 'D', 'X', '\0'};

// Term counts keyed by bucket, ascending.
std::map<std::uint32_t, std::uint32_t> count_terms(std::string_view text,
                                                   std::uint32_t num_buckets) {
  std::map<std::uint32_t, std::uint32_t> counts;
  for (std::uint32_t b : hashed_ngrams(tokenize(text), num_buckets)) ++counts[b];
  return counts;
}

}  // namespace

double norm(const SparseVector& v) {
  double s = 0.0;
  for (const auto& [b, w] : v) s += w * w;
  return std::sqrt(s);
}

double cosine(const SparseVector& a, const SparseVector& b) {
  if (a.empty() || b.empty()) return 0.0;
  double dot = 0.0;
  auto ia = a.begin(), ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      dot += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  double denom = norm(a) * norm(b);
  if (denom <= 0.0) return 0.0;
  return std::clamp(dot / denom, 0.0, 1.0);
}

std::string TfidfIndex::document_text(const Document& doc) const {
  if (!options_.include_title || doc.title.empty()) return doc.body;
  return doc.title + "\n" + doc.body;
}

TfidfIndex TfidfIndex::build(const std::vector<Document>& corpus,
                             const IndexOptions& options) {
  if (options.num_buckets < 1) throw Error("num_buckets must be >= 1");
  validate_corpus(corpus);

  TfidfIndex index;
  index.options_ = options;
  std::vector<std::map<std::uint32_t, std::uint32_t>> counts;
  counts.reserve(corpus.size());
  for (const auto& doc : corpus) {
    index.doc_ids_.push_back(doc.doc_id);
    counts.push_back(count_terms(index.document_text(doc), options.num_buckets));
    for (const auto& [bucket, tf] : counts.back()) ++index.df_[bucket];
  }
  index.doc_vectors_.reserve(corpus.size());
  index.doc_norms_.reserve(corpus.size());
  for (const auto& c : counts) {
    SparseVector v;
    v.reserve(c.size());
    for (const auto& [bucket, tf] : c) v.emplace_back(bucket, tf * index.idf(bucket));
    index.doc_norms_.push_back(norm(v));
    index.doc_vectors_.push_back(std::move(v));
  }
  index.rebuild_postings();
  return index;
}

void TfidfIndex::rebuild_postings() {
  postings_.clear();
  for (std::uint32_t d = 0; d < doc_vectors_.size(); ++d) {
    for (const auto& [bucket, w] : doc_vectors_[d]) postings_[bucket].emplace_back(d, w);
  }
}

std::uint32_t TfidfIndex::document_frequency(std::uint32_t bucket) const {
  auto it = df_.find(bucket);
  return it == df_.end() ? 0 : it->second;
}

double TfidfIndex::idf(std::uint32_t bucket) const {
  const double n = static_cast<double>(doc_ids_.size());
  const double df = document_frequency(bucket);
  return std::log((n + 1.0) / (df + 1.0)) + 1.0;
}

SparseVector TfidfIndex::vectorize(std::string_view text) const {
  SparseVector v;
  for (const auto& [bucket, tf] : count_terms(text, options_.num_buckets))
    v.emplace_back(bucket, tf * idf(bucket));
  return v;
}

double TfidfIndex::similarity(std::string_view a, std::string_view b) const {
  return cosine(vectorize(a), vectorize(b));
}

RetrievalResult TfidfIndex::retrieve(std::string_view question,
                                     std::size_t n) const {
  if (n < 1) throw Error("retrieve: n must be >= 1");
  RetrievalResult result;
  SparseVector q = vectorize(question);
  if (q.empty()) {
    result.empty_query = true;
    return result;
  }
  const double qnorm = norm(q);
  std::vector<double> dots(doc_ids_.size(), 0.0);
  for (const auto& [bucket, qw] : q) {
    auto it = postings_.find(bucket);
    if (it == postings_.end()) continue;
    for (const auto& [doc, dw] : it->second) dots[doc] += qw * dw;
  }
  std::vector<double> scores(doc_ids_.size(), 0.0);
  for (std::size_t d = 0; d < dots.size(); ++d) {
    double denom = qnorm * doc_norms_[d];
    scores[d] = denom > 0.0 ? std::clamp(dots[d] / denom, 0.0, 1.0) : 0.0;
  }

  std::vector<std::uint32_t> order(doc_ids_.size());
  std::iota(order.begin(), order.end(), 0u);
  const std::size_t take = std::min(n, order.size());
  std::partial_sort(order.begin(), order.begin() + take, order.end(),
                    [&](std::uint32_t a, std::uint32_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return doc_ids_[a] < doc_ids_[b];
                    });
  result.documents.reserve(take);
  for (std::size_t i = 0; i < take; ++i)
    result.documents.push_back({doc_ids_[order[i]], scores[order[i]]});
  return result;
}

// Layout: magic, version, hash name, num_buckets, include_title, documents
// (id, norm, sparse vector), then the df table sorted by bucket.
void TfidfIndex::save(std::ostream& out) const {
  out.write(kMagic, sizeof kMagic);
  binary::put_u32(out, kFormatVersion);
  binary::put_string(out, std::string(kHashName));
  binary::put_u32(out, options_.num_buckets);
  binary::put_u32(out, options_.include_title ? 1 : 0);
  binary::put_u64(out, doc_ids_.size());
  for (std::size_t d = 0; d < doc_ids_.size(); ++d) {
    binary::put_string(out, doc_ids_[d]);
    binary::put_f64(out, doc_norms_[d]);
    binary::put_u64(out, doc_vectors_[d].size());
    for (const auto& [bucket, w] : doc_vectors_[d]) {
      binary::put_u32(out, bucket);
      binary::put_f64(out, w);
    }
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> df(df_.begin(), df_.end());
  std::sort(df.begin(), df.end());
  binary::put_u64(out, df.size());
  for (const auto& [bucket, count] : df) {
    binary::put_u32(out, bucket);
    binary::put_u32(out, count);
  }
  if (!out) throw Error("failed writing index");
}

void TfidfIndex::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write index file: " + path);
  save(out);
}

TfidfIndex TfidfIndex::load(std::istream& in) {
  char magic[sizeof kMagic];
  binary::read_exact(in, magic, sizeof magic);
  if (!std::equal(magic, magic + sizeof magic, kMagic))
    throw Error("not an index file (bad magic)");
  std::uint32_t version = binary::get_u32(in);
  if (version != kFormatVersion)
    throw Error("index format version " + std::to_string(version) +
                " is not supported (expected " + std::to_string(kFormatVersion) + ")");
  std::string hash = binary::get_string(in, 256);
  if (hash != kHashName)
    throw Error("index was built with hash '" + hash + "', expected '" +
                std::string(kHashName) + "'");

  TfidfIndex index;
  index.options_.num_buckets = binary::get_u32(in);
  if (index.options_.num_buckets < 1) throw Error("corrupt index: num_buckets = 0");
  index.options_.include_title = binary::get_u32(in) != 0;
  std::uint64_t ndocs = binary::get_u64(in);
  for (std::uint64_t d = 0; d < ndocs; ++d) {
    index.doc_ids_.push_back(binary::get_string(in));
    index.doc_norms_.push_back(binary::get_f64(in));
    std::uint64_t nnz = binary::get_u64(in);
    SparseVector v;
    for (std::uint64_t i = 0; i < nnz; ++i) {
      std::uint32_t bucket = binary::get_u32(in);
      double w = binary::get_f64(in);
      if (bucket >= index.options_.num_buckets || !std::isfinite(w) || w < 0)
        throw Error("corrupt index: bad term entry");
      v.emplace_back(bucket, w);
    }
    index.doc_vectors_.push_back(std::move(v));
  }
  std::uint64_t ndf = binary::get_u64(in);
  for (std::uint64_t i = 0; i < ndf; ++i) {
    std::uint32_t bucket = binary::get_u32(in);
    std::uint32_t count = binary::get_u32(in);
    if (count > ndocs) throw Error("corrupt index: df exceeds corpus size");
    index.df_[bucket] = count;
  }
  index.rebuild_postings();
  return index;
}

TfidfIndex TfidfIndex::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open index file: " + path);
  return load(in);
}

}  // namespace qarank
