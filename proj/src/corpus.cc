#include "qarank/corpus.h"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace qarank {

namespace {

bool blank_line(std::string_view line) { return trim(line).empty(); }

}  // namespace

std::vector<Paragraph> split_paragraphs(const Document& doc) {
  std::vector<Paragraph> out;
  std::string current;
  auto flush = [&]() {
    std::string text = trim(current);
    if (!text.empty()) {
      out.push_back({doc.doc_id, static_cast<int>(out.size()), std::move(text)});
    }
    current.clear();
  };
  std::size_t pos = 0;
  const std::string& body = doc.body;
  while (pos <= body.size()) {
    std::size_t nl = body.find('\n', pos);
    std::string_view line = std::string_view(body).substr(
        pos, nl == std::string::npos ? std::string::npos : nl - pos);
    if (blank_line(line)) {
      flush();
    } else {
      if (!current.empty()) current.push_back('\n');
      current.append(line);
    }
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  flush();
  return out;
}

void validate_corpus(const std::vector<Document>& docs) {
  if (docs.empty()) throw Error("corpus is empty");
  std::unordered_set<std::string> seen;
  for (const auto& d : docs) {
    if (d.doc_id.empty()) throw Error("document with empty doc_id");
    if (!seen.insert(d.doc_id).second)
      throw Error("duplicate doc_id: " + d.doc_id);
    if (d.body.empty() && d.title.empty())
      throw Error("document " + d.doc_id + " has neither title nor body");
  }
}

std::vector<Document> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file: " + path);
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      Document d;
      d.doc_id = j.at("doc_id").get<std::string>();
      d.title = j.value("title", std::string());
      d.body = j.value("body", std::string());
      docs.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw Error(path + ":" + std::to_string(line_no) +
                  ": malformed corpus line: " + e.what());
    }
  }
  validate_corpus(docs);
  return docs;
}

void save_corpus(const std::vector<Document>& docs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write corpus file: " + path);
  for (const auto& d : docs) {
    nlohmann::ordered_json j;
    j["doc_id"] = d.doc_id;
    j["title"] = d.title;
    j["body"] = d.body;
    out << j.dump() << '\n';
  }
}

Corpus::Corpus(std::vector<Document> docs) : docs_(std::move(docs)) {
  validate_corpus(docs_);
  paragraphs_.reserve(docs_.size());
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    by_id_.emplace(docs_[i].doc_id, i);
    paragraphs_.push_back(split_paragraphs(docs_[i]));
  }
}

const Document* Corpus::find(std::string_view doc_id) const {
  auto it = by_id_.find(std::string(doc_id));
  return it == by_id_.end() ? nullptr : &docs_[it->second];
}

const std::vector<Paragraph>& Corpus::paragraphs(std::string_view doc_id) const {
  auto it = by_id_.find(std::string(doc_id));
  if (it == by_id_.end()) throw Error("unknown doc_id: " + std::string(doc_id));
  return paragraphs_[it->second];
}

const Paragraph* Corpus::paragraph(std::string_view doc_id, int para_id) const {
  auto it = by_id_.find(std::string(doc_id));
  if (it == by_id_.end()) return nullptr;
  const auto& paras = paragraphs_[it->second];
  if (para_id < 0 || static_cast<std::size_t>(para_id) >= paras.size())
    return nullptr;
  return &paras[para_id];
}

}  // namespace qarank
