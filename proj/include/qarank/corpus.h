#ifndef QARANK_CORPUS_H_
#define QARANK_CORPUS_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qarank/text.h"

namespace qarank {

struct Document {
  std::string doc_id;
  std::string title;
  std::string body;
};

struct Paragraph {
  std::string doc_id;
  int para_id = 0;
  std::string text;
};

// Splits a document body on blank lines. Whitespace-only segments are dropped
// and the survivors are numbered from 0.
std::vector<Paragraph> split_paragraphs(const Document& doc);

// Throws on an empty corpus, an empty doc_id, a duplicate doc_id or a document
// whose title and body are both empty.
void validate_corpus(const std::vector<Document>& docs);

// Reads a JSON-lines corpus ({"doc_id", "title", "body"} per line). Malformed
// lines are reported with their 1-based line number.
std::vector<Document> load_corpus(const std::string& path);
void save_corpus(const std::vector<Document>& docs, const std::string& path);

// Owns the documents and their paragraph split, addressable by doc_id.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Document> docs);

  std::size_t size() const { return docs_.size(); }
  const std::vector<Document>& documents() const { return docs_; }

  // nullptr when the id is unknown.
  const Document* find(std::string_view doc_id) const;
  const std::vector<Paragraph>& paragraphs(std::string_view doc_id) const;
  // nullptr when the doc or paragraph does not exist.
  const Paragraph* paragraph(std::string_view doc_id, int para_id) const;

 private:
  std::vector<Document> docs_;
  std::vector<std::vector<Paragraph>> paragraphs_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

}  // namespace qarank

#endif  // QARANK_CORPUS_H_
