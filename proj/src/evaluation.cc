#include "qarank/evaluation.h"

#include <algorithm>
#include <cctype>
#include <set>

namespace qarank {

using nlohmann::ordered_json;

std::string normalize_answer(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (unsigned char c : text) {
    if (std::ispunct(c)) continue;
    cleaned.push_back(static_cast<char>(std::tolower(c)));
  }
  std::string out;
  std::size_t i = 0;
  while (i < cleaned.size()) {
    while (i < cleaned.size() && std::isspace(static_cast<unsigned char>(cleaned[i]))) ++i;
    std::size_t j = i;
    while (j < cleaned.size() && !std::isspace(static_cast<unsigned char>(cleaned[j]))) ++j;
    if (j > i) {
      std::string_view word(cleaned.data() + i, j - i);
      if (word != "a" && word != "an" && word != "the") {
        if (!out.empty()) out.push_back(' ');
        out.append(word);
      }
    }
    i = j;
  }
  return out;
}

bool exact_match(std::string_view prediction, const std::vector<std::string>& gold_answers) {
  if (gold_answers.empty()) throw Error("exact_match: empty gold answer set");
  const std::string p = normalize_answer(prediction);
  return std::any_of(gold_answers.begin(), gold_answers.end(),
                     [&](const std::string& g) { return normalize_answer(g) == p; });
}

double upper_bound(std::span<const QuestionRecord> records) {
  if (records.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& r : records) {
    for (const auto& c : r.candidates) {
      if (exact_match(c.span, r.gold_answers)) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

EvaluationReport evaluate(const std::string& dataset,
                          std::span<const QuestionRecord> records,
                          std::span<const std::string> predictions) {
  if (records.size() != predictions.size())
    throw Error("evaluate: one prediction per record required");
  EvaluationReport rep;
  rep.dataset = dataset;
  rep.questions = records.size();
  std::size_t em = 0, base = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.gold_answers.empty())
      throw Error("question " + r.question_id + " has no gold answers");
    QuestionVerdict v;
    v.question_id = r.question_id;
    v.prediction = predictions[i];
    if (!r.candidates.empty()) {
      v.baseline_prediction = r.candidates.front().span;
      v.correct = exact_match(v.prediction, r.gold_answers);
      v.baseline_correct = exact_match(v.baseline_prediction, r.gold_answers);
      v.answerable = std::any_of(r.candidates.begin(), r.candidates.end(),
                                 [&](const AnswerCandidate& c) {
                                   return exact_match(c.span, r.gold_answers);
                                 });
    }
    em += v.correct;
    base += v.baseline_correct;
    rep.verdicts.push_back(std::move(v));
  }
  if (!records.empty()) {
    const double n = static_cast<double>(records.size());
    rep.em = static_cast<double>(em) / n;
    rep.baseline_em = static_cast<double>(base) / n;
    rep.upper_bound_em = upper_bound(records);
  }
  rep.retention = retention(rep.verdicts);
  return rep;
}

std::optional<double> retention(std::span<const QuestionVerdict> verdicts) {
  std::size_t before = 0, kept = 0;
  for (const auto& v : verdicts) {
    if (!v.baseline_correct) continue;
    ++before;
    kept += v.correct;
  }
  if (before == 0) return std::nullopt;
  return static_cast<double>(kept) / static_cast<double>(before);
}

std::optional<double> retention(std::span<const QuestionRecord> records,
                                const std::vector<std::vector<std::size_t>>& before,
                                const std::vector<std::vector<std::size_t>>& after) {
  if (before.size() != records.size() || after.size() != records.size())
    throw Error("retention: one order per record required");
  std::size_t initially = 0, kept = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    auto sorted_b = before[i], sorted_a = after[i];
    std::sort(sorted_b.begin(), sorted_b.end());
    std::sort(sorted_a.begin(), sorted_a.end());
    if (sorted_b != sorted_a)
      throw Error("retention: orders differ in candidate set for " + r.question_id);
    if (before[i].empty()) continue;
    for (auto idx : before[i])
      if (idx >= r.candidates.size()) throw Error("retention: index out of range");
    if (!exact_match(r.candidates[before[i].front()].span, r.gold_answers)) continue;
    ++initially;
    kept += exact_match(r.candidates[after[i].front()].span, r.gold_answers);
  }
  if (initially == 0) return std::nullopt;
  return static_cast<double>(kept) / static_cast<double>(initially);
}

ordered_json EvaluationReport::to_json(bool with_verdicts) const {
  ordered_json j;
  j["dataset"] = dataset;
  j["questions"] = questions;
  j["em"] = em;
  j["baseline_em"] = baseline_em;
  j["upper_bound_em"] = upper_bound_em;
  j["retention"] = retention ? ordered_json(*retention) : ordered_json(nullptr);
  if (with_verdicts) {
    j["verdicts"] = ordered_json::array();
    for (const auto& v : verdicts) {
      ordered_json jv;
      jv["question_id"] = v.question_id;
      jv["prediction"] = v.prediction;
      jv["baseline_prediction"] = v.baseline_prediction;
      jv["correct"] = v.correct;
      jv["baseline_correct"] = v.baseline_correct;
      jv["answerable"] = v.answerable;
      j["verdicts"].push_back(std::move(jv));
    }
  }
  return j;
}

const std::vector<AblationGroup>& ablation_groups() {
  static const std::vector<AblationGroup> groups = {
      {"query_document_similarity", {"doc_query_sim"}},
      {"query_paragraph_similarity", {"para_query_sim"}},
      {"length", {"doc_length", "para_length", "question_length"}},
      {"linguistic", {"ner", "pos"}},
      {"ranking", {"original_rank"}},
      {"span_score", {"span_score"}},
      {"aggregation", {}},
  };
  return groups;
}

FeatureSchema blind_features(const FeatureSchema& schema,
                             const std::vector<std::string>& names) {
  std::set<std::string> drop;
  auto drop_base = [&](const std::string& feature) {
    const FeatureBlock* b = schema.find(feature);
    if (b == nullptr) throw Error("cannot blind feature not in schema: " + feature);
    drop.insert(feature);
    if (b->group == FeatureGroup::kAggregation) return;
    for (const auto& other : schema.blocks())
      if (other.source == feature) drop.insert(other.name);
  };
  auto drop_group = [&](FeatureGroup g) {
    bool any = false;
    for (const auto& b : schema.blocks()) {
      if (b.group != g) continue;
      any = true;
      if (g == FeatureGroup::kAggregation) drop.insert(b.name);
      else drop_base(b.name);
    }
    if (!any) throw Error("schema has no " + std::string(to_string(g)) + " features");
  };

  for (const auto& name : names) {
    if (name == "IR") {
      drop_group(FeatureGroup::kRetrieval);
      continue;
    }
    if (name == "MC") {
      drop_group(FeatureGroup::kComprehension);
      continue;
    }
    if (name == "AGG" || name == "aggregation") {
      drop_group(FeatureGroup::kAggregation);
      continue;
    }
    const auto& groups = ablation_groups();
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const AblationGroup& g) { return g.name == name; });
    if (it != groups.end()) {
      for (const auto& f : it->features) drop_base(f);
      continue;
    }
    drop_base(name);
  }
  return schema.without({drop.begin(), drop.end()});
}

}  // namespace qarank
