#ifndef QARANK_READER_H_
#define QARANK_READER_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qarank/corpus.h"

namespace qarank {

inline constexpr std::size_t kPosDim = 45;
inline constexpr std::size_t kNerDim = 13;

// Bit order of the pos_tags vector (see docs/tagsets.md).
extern const std::array<std::string_view, kPosDim> kPosTags;
// Bit order of the ner_tags vector; the last entry is the catch-all.
extern const std::array<std::string_view, kNerDim> kNerTags;

// Declares which comprehension features a candidate dump carries.
struct ReaderProfile {
  std::string name;
  bool has_linguistic_features = false;

  static ReaderProfile drqa() { return {"drqa", true}; }
  static ReaderProfile bert() { return {"bert", false}; }
  // Accepts "drqa" or "bert".
  static ReaderProfile from_name(std::string_view name);

  bool operator==(const ReaderProfile&) const = default;
};

struct AnswerCandidate {
  std::string span;
  std::string doc_id;
  int para_id = 0;
  double span_score = 0.0;
  // 0-based position among the reader's top-k.
  int original_rank = 0;
  std::optional<std::vector<std::uint8_t>> pos_tags;
  std::optional<std::vector<std::uint8_t>> ner_tags;

  bool operator==(const AnswerCandidate&) const = default;
};

struct QuestionRecord {
  std::string question_id;
  std::string question_text;
  std::vector<std::string> gold_answers;
  std::vector<AnswerCandidate> candidates;  // ascending original_rank

  bool operator==(const QuestionRecord&) const = default;
};

// Reads a candidate dump (JSON lines, one question per line) and validates
// every record against the profile and k. Errors carry the line number and
// question_id.
std::vector<QuestionRecord> load_candidate_dump(const std::string& path,
                                                const ReaderProfile& profile,
                                                int k);
std::vector<QuestionRecord> parse_candidate_dump(std::istream& in,
                                                 const ReaderProfile& profile,
                                                 int k,
                                                 const std::string& source = "<stream>");

void write_candidate_dump(const std::vector<QuestionRecord>& records,
                          std::ostream& out);
void save_candidate_dump(const std::vector<QuestionRecord>& records,
                         const std::string& path);

// Question file for the full pipeline: {"question_id", "question_text",
// "gold_answers"} per line. Candidates are left empty.
std::vector<QuestionRecord> load_questions(const std::string& path);
void save_questions(const std::vector<QuestionRecord>& questions,
                    const std::string& path);

struct MockReaderOptions {
  // Tokens on each side of a span that are matched against the question.
  int window = 8;
  int max_span_tokens = 5;
};

// Deterministic stand-in for a neural reader. Every token span of 1..5 tokens
// scores |question tokens found in the surrounding window| plus 0.1 when the
// span holds a capitalized token or a digit. Returns the global top-k, ties
// broken by (doc_id, para_id, span start, span length). Candidates carry
// heuristic POS/NER bits.
std::vector<AnswerCandidate> mock_read(std::string_view question,
                                       const std::vector<Paragraph>& paragraphs,
                                       int k,
                                       const MockReaderOptions& options = {});

// Rule-based tag bits for a span of surface tokens; a bit is set when any
// token carries the tag.
std::vector<std::uint8_t> heuristic_pos_tags(const std::vector<std::string>& tokens);
std::vector<std::uint8_t> heuristic_ner_tags(const std::vector<std::string>& tokens);

}  // namespace qarank

#endif  // QARANK_READER_H_
