#include "qarank/reader.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace qarank {

using nlohmann::json;
using nlohmann::ordered_json;

const std::array<std::string_view, kPosDim> kPosTags = {
    "CC",  "CD",  "DT",   "EX",  "FW",  "IN",  "JJ",  "JJR", "JJS",
    "LS",  "MD",  "NN",   "NNS", "NNP", "NNPS", "PDT", "POS", "PRP",
    "PRP$", "RB", "RBR",  "RBS", "RP",  "SYM", "TO",  "UH",  "VB",
    "VBD", "VBG", "VBN",  "VBP", "VBZ", "WDT", "WP",  "WP$", "WRB",
    "#",   "$",   ".",    ",",   ":",   "-LRB-", "-RRB-", "``", "''"};

const std::array<std::string_view, kNerDim> kNerTags = {
    "location", "person", "organization", "money",   "percent",
    "date",     "time",   "set",          "duration", "number",
    "ordinal",  "misc",   "<other>"};

ReaderProfile ReaderProfile::from_name(std::string_view name) {
  if (name == "drqa") return drqa();
  if (name == "bert") return bert();
  throw Error("unknown reader profile: " + std::string(name) +
              " (expected drqa or bert)");
}

namespace {

std::size_t pos_index(std::string_view tag) {
  auto it = std::find(kPosTags.begin(), kPosTags.end(), tag);
  return static_cast<std::size_t>(it - kPosTags.begin());
}

constexpr std::size_t kNerPerson = 1;
constexpr std::size_t kNerNumber = 9;
constexpr std::size_t kNerOther = 12;

std::optional<std::vector<std::uint8_t>> parse_tags(const json& c,
                                                    const char* key,
                                                    std::size_t dim) {
  if (!c.contains(key) || c.at(key).is_null()) return std::nullopt;
  const auto& arr = c.at(key);
  if (!arr.is_array() || arr.size() != dim)
    throw Error(std::string(key) + " must be an array of " + std::to_string(dim) +
                " entries");
  std::vector<std::uint8_t> bits;
  bits.reserve(dim);
  for (const auto& v : arr) {
    if (!v.is_number_integer()) throw Error(std::string(key) + " entries must be 0 or 1");
    auto x = v.get<long long>();
    if (x != 0 && x != 1) throw Error(std::string(key) + " entries must be 0 or 1");
    bits.push_back(static_cast<std::uint8_t>(x));
  }
  return bits;
}

AnswerCandidate parse_candidate(const json& c) {
  AnswerCandidate a;
  a.span = c.at("span").get<std::string>();
  a.doc_id = c.at("doc_id").get<std::string>();
  a.para_id = c.at("para_id").get<int>();
  if (!c.at("span_score").is_number()) throw Error("span_score must be a number");
  a.span_score = c.at("span_score").get<double>();
  a.original_rank = c.at("original_rank").get<int>();
  a.pos_tags = parse_tags(c, "pos_tags", kPosDim);
  a.ner_tags = parse_tags(c, "ner_tags", kNerDim);
  return a;
}

void validate_record(QuestionRecord& r, const ReaderProfile& profile, int k) {
  auto fail = [&](const std::string& what) {
    throw Error("question " + r.question_id + ": " + what);
  };
  if (r.question_id.empty()) throw Error("record with empty question_id");
  for (const auto& c : r.candidates) {
    if (trim(c.span).empty()) fail("empty answer span");
    if (!std::isfinite(c.span_score)) fail("non-finite span_score");
    if (c.original_rank < 0 || c.original_rank >= k)
      fail("original_rank " + std::to_string(c.original_rank) +
           " outside [0, " + std::to_string(k) + ")");
    if (c.para_id < 0) fail("negative para_id");
    if (profile.has_linguistic_features && (!c.pos_tags || !c.ner_tags))
      fail("profile '" + profile.name +
           "' requires pos_tags and ner_tags on every candidate");
  }
  std::stable_sort(r.candidates.begin(), r.candidates.end(),
                   [](const AnswerCandidate& a, const AnswerCandidate& b) {
                     return a.original_rank < b.original_rank;
                   });
  for (std::size_t i = 0; i < r.candidates.size(); ++i) {
    if (r.candidates[i].original_rank != static_cast<int>(i))
      fail("candidate ranks must be 0..n-1 without gaps or duplicates");
  }
}

ordered_json candidate_to_json(const AnswerCandidate& c) {
  ordered_json j;
  j["span"] = c.span;
  j["doc_id"] = c.doc_id;
  j["para_id"] = c.para_id;
  j["span_score"] = c.span_score;
  j["original_rank"] = c.original_rank;
  if (c.pos_tags) j["pos_tags"] = *c.pos_tags;
  if (c.ner_tags) j["ner_tags"] = *c.ner_tags;
  return j;
}

}  // namespace

std::vector<QuestionRecord> parse_candidate_dump(std::istream& in,
                                                 const ReaderProfile& profile,
                                                 int k,
                                                 const std::string& source) {
  if (k < 1) throw Error("k must be >= 1");
  std::vector<QuestionRecord> out;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    QuestionRecord r;
    try {
      auto j = json::parse(line);
      r.question_id = j.at("question_id").get<std::string>();
      r.question_text = j.at("question_text").get<std::string>();
      if (j.contains("gold_answers"))
        r.gold_answers = j.at("gold_answers").get<std::vector<std::string>>();
      for (const auto& c : j.at("candidates")) r.candidates.push_back(parse_candidate(c));
    } catch (const json::exception& e) {
      throw Error(where + "malformed record" +
                  (r.question_id.empty() ? "" : " (question " + r.question_id + ")") +
                  ": " + e.what());
    } catch (const Error& e) {
      throw Error(where + "question " + r.question_id + ": " + e.what());
    }
    try {
      validate_record(r, profile, k);
    } catch (const Error& e) {
      throw Error(where + e.what());
    }
    if (!seen.insert(r.question_id).second)
      throw Error(where + "duplicate question_id " + r.question_id);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<QuestionRecord> load_candidate_dump(const std::string& path,
                                                const ReaderProfile& profile,
                                                int k) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open candidate dump: " + path);
  return parse_candidate_dump(in, profile, k, path);
}

void write_candidate_dump(const std::vector<QuestionRecord>& records,
                          std::ostream& out) {
  for (const auto& r : records) {
    ordered_json j;
    j["question_id"] = r.question_id;
    j["question_text"] = r.question_text;
    j["gold_answers"] = r.gold_answers;
    j["candidates"] = ordered_json::array();
    for (const auto& c : r.candidates) j["candidates"].push_back(candidate_to_json(c));
    out << j.dump() << '\n';
  }
}

void save_candidate_dump(const std::vector<QuestionRecord>& records,
                         const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write candidate dump: " + path);
  write_candidate_dump(records, out);
}

std::vector<QuestionRecord> load_questions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open question file: " + path);
  std::vector<QuestionRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      auto j = json::parse(line);
      QuestionRecord r;
      r.question_id = j.at("question_id").get<std::string>();
      r.question_text = j.at("question_text").get<std::string>();
      if (j.contains("gold_answers"))
        r.gold_answers = j.at("gold_answers").get<std::vector<std::string>>();
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error(path + ":" + std::to_string(line_no) +
                  ": malformed question line: " + e.what());
    }
  }
  return out;
}

void save_questions(const std::vector<QuestionRecord>& questions,
                    const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write question file: " + path);
  for (const auto& q : questions) {
    ordered_json j;
    j["question_id"] = q.question_id;
    j["question_text"] = q.question_text;
    j["gold_answers"] = q.gold_answers;
    out << j.dump() << '\n';
  }
}

std::vector<std::uint8_t> heuristic_pos_tags(const std::vector<std::string>& tokens) {
  static const std::set<std::string, std::less<>> kDeterminers = {
      "the", "a", "an", "this", "that", "these", "those"};
  static const std::set<std::string, std::less<>> kPrepositions = {
      "of", "in", "on", "at", "by", "for", "with", "from", "into", "during"};
  static const std::set<std::string, std::less<>> kConjunctions = {"and", "or", "but"};
  std::vector<std::uint8_t> bits(kPosDim, 0);
  for (const auto& t : tokens) {
    if (t.empty()) continue;
    std::string low;
    for (unsigned char ch : t) low.push_back(static_cast<char>(std::tolower(ch)));
    std::string_view tag;
    if (std::any_of(t.begin(), t.end(), [](unsigned char ch) { return std::isdigit(ch); }))
      tag = "CD";
    else if (std::isupper(static_cast<unsigned char>(t[0])))
      tag = "NNP";
    else if (kDeterminers.count(low))
      tag = "DT";
    else if (low == "to")
      tag = "TO";
    else if (kPrepositions.count(low))
      tag = "IN";
    else if (kConjunctions.count(low))
      tag = "CC";
    else
      tag = "NN";
    bits[pos_index(tag)] = 1;
  }
  return bits;
}

std::vector<std::uint8_t> heuristic_ner_tags(const std::vector<std::string>& tokens) {
  std::vector<std::uint8_t> bits(kNerDim, 0);
  for (const auto& t : tokens) {
    if (t.empty()) continue;
    if (std::any_of(t.begin(), t.end(), [](unsigned char ch) { return std::isdigit(ch); }))
      bits[kNerNumber] = 1;
    else if (std::isupper(static_cast<unsigned char>(t[0])))
      bits[kNerPerson] = 1;
  }
  if (std::none_of(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; }))
    bits[kNerOther] = 1;
  return bits;
}

namespace {

struct ScoredSpan {
  double score;
  std::size_t para;  // index into the paragraph list
  int start;
  int length;
};

}  // namespace

std::vector<AnswerCandidate> mock_read(std::string_view question,
                                       const std::vector<Paragraph>& paragraphs,
                                       int k, const MockReaderOptions& options) {
  if (k < 1) throw Error("mock_read: k must be >= 1");
  if (paragraphs.empty()) return {};

  std::unordered_set<std::string> qtokens;
  for (auto& t : tokenize(question)) qtokens.insert(std::move(t));

  std::vector<std::vector<TokenSpan>> para_tokens;
  para_tokens.reserve(paragraphs.size());
  std::vector<ScoredSpan> spans;
  for (std::size_t p = 0; p < paragraphs.size(); ++p) {
    para_tokens.push_back(tokenize_with_offsets(paragraphs[p].text));
    const auto& toks = para_tokens.back();
    const std::string& text = paragraphs[p].text;
    const int n = static_cast<int>(toks.size());
    std::vector<bool> salient(n);
    for (int i = 0; i < n; ++i) {
      unsigned char first = text[toks[i].begin];
      bool has_digit = std::any_of(toks[i].text.begin(), toks[i].text.end(),
                                   [](unsigned char ch) { return std::isdigit(ch); });
      salient[i] = has_digit || std::isupper(first);
    }
    for (int s = 0; s < n; ++s) {
      for (int len = 1; len <= options.max_span_tokens && s + len <= n; ++len) {
        std::unordered_set<std::string_view> hits;
        const int lo = std::max(0, s - options.window);
        const int hi = std::min(n, s + len + options.window);
        for (int i = lo; i < hi; ++i) {
          if (i >= s && i < s + len) continue;
          if (qtokens.count(toks[i].text)) hits.insert(toks[i].text);
        }
        bool bonus = std::any_of(salient.begin() + s, salient.begin() + s + len,
                                 [](bool b) { return b; });
        spans.push_back({static_cast<double>(hits.size()) + (bonus ? 0.1 : 0.0), p, s, len});
      }
    }
  }

  auto better = [&](const ScoredSpan& a, const ScoredSpan& b) {
    if (a.score != b.score) return a.score > b.score;
    const auto& pa = paragraphs[a.para];
    const auto& pb = paragraphs[b.para];
    if (pa.doc_id != pb.doc_id) return pa.doc_id < pb.doc_id;
    if (pa.para_id != pb.para_id) return pa.para_id < pb.para_id;
    if (a.start != b.start) return a.start < b.start;
    if (a.length != b.length) return a.length < b.length;
    return a.para < b.para;
  };
  const std::size_t take = std::min<std::size_t>(k, spans.size());
  std::partial_sort(spans.begin(), spans.begin() + take, spans.end(), better);

  std::vector<AnswerCandidate> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    const auto& sp = spans[i];
    const auto& para = paragraphs[sp.para];
    const auto& toks = para_tokens[sp.para];
    const std::size_t b = toks[sp.start].begin;
    const std::size_t e = toks[sp.start + sp.length - 1].end;
    std::vector<std::string> surface;
    for (int t = sp.start; t < sp.start + sp.length; ++t)
      surface.push_back(para.text.substr(toks[t].begin, toks[t].end - toks[t].begin));
    AnswerCandidate c;
    c.span = para.text.substr(b, e - b);
    c.doc_id = para.doc_id;
    c.para_id = para.para_id;
    c.span_score = sp.score;
    c.original_rank = static_cast<int>(i);
    c.pos_tags = heuristic_pos_tags(surface);
    c.ner_tags = heuristic_ner_tags(surface);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace qarank
