#include "qarank/features.h"

#include <algorithm>
#include <cmath>
#include <set>

namespace qarank {

using nlohmann::json;
using nlohmann::ordered_json;

const std::array<std::string_view, kQuestionTypeDim> kQuestionTypes = {
    "what was", "what is", "what", "in what", "in which", "in", "when",
    "where",    "who",     "why",  "which",   "is",       "<other>"};

std::string_view to_string(FeatureGroup group) {
  switch (group) {
    case FeatureGroup::kRetrieval: return "IR";
    case FeatureGroup::kComprehension: return "MC";
    case FeatureGroup::kAggregation: return "AGG";
  }
  return "?";
}

FeatureGroup feature_group_from_string(std::string_view s) {
  if (s == "IR") return FeatureGroup::kRetrieval;
  if (s == "MC") return FeatureGroup::kComprehension;
  if (s == "AGG") return FeatureGroup::kAggregation;
  throw Error("unknown feature group: " + std::string(s));
}

FeatureSchema::FeatureSchema(ReaderProfile profile, std::vector<FeatureBlock> blocks)
    : profile_(std::move(profile)), blocks_(std::move(blocks)) {
  std::set<std::string> names;
  for (const auto& b : blocks_) {
    if (b.dim == 0) throw Error("feature block " + b.name + " has zero dimension");
    if (!names.insert(b.name).second) throw Error("duplicate feature name: " + b.name);
    dimension_ += b.dim;
  }
}

FeatureSchema FeatureSchema::for_profile(const ReaderProfile& profile) {
  using G = FeatureGroup;
  std::vector<FeatureBlock> b = {
      {"doc_query_sim", G::kRetrieval, 1, false, ""},
      {"para_query_sim", G::kRetrieval, 1, false, ""},
      {"doc_length", G::kRetrieval, 1, false, ""},
      {"para_length", G::kRetrieval, 1, false, ""},
      {"question_length", G::kRetrieval, 1, false, ""},
      {"paragraph_position", G::kRetrieval, 1, false, ""},
      {"question_type", G::kRetrieval, kQuestionTypeDim, true, ""},
      {"span_score", G::kComprehension, 1, false, ""},
      {"original_rank", G::kComprehension, 1, false, ""},
  };
  if (profile.has_linguistic_features) {
    b.push_back({"ner", G::kComprehension, kNerDim, true, ""});
    b.push_back({"pos", G::kComprehension, kPosDim, true, ""});
  }
  const std::vector<FeatureBlock> agg = {
      {"occurrence_count", G::kAggregation, 1, false, "original_rank"},
      {"first_occurrence_rank", G::kAggregation, 1, false, "original_rank"},
      {"span_score_sum", G::kAggregation, 1, false, "span_score"},
      {"span_score_mean", G::kAggregation, 1, false, "span_score"},
      {"span_score_min", G::kAggregation, 1, false, "span_score"},
      {"span_score_max", G::kAggregation, 1, false, "span_score"},
      {"doc_query_sim_sum", G::kAggregation, 1, false, "doc_query_sim"},
      {"doc_query_sim_mean", G::kAggregation, 1, false, "doc_query_sim"},
      {"doc_query_sim_min", G::kAggregation, 1, false, "doc_query_sim"},
      {"doc_query_sim_max", G::kAggregation, 1, false, "doc_query_sim"},
  };
  b.insert(b.end(), agg.begin(), agg.end());
  return FeatureSchema(profile, std::move(b));
}

const FeatureBlock* FeatureSchema::find(std::string_view name) const {
  for (const auto& b : blocks_)
    if (b.name == name) return &b;
  return nullptr;
}

bool FeatureSchema::has(std::string_view name) const { return find(name) != nullptr; }

std::size_t FeatureSchema::offset(std::string_view name) const {
  std::size_t off = 0;
  for (const auto& b : blocks_) {
    if (b.name == name) return off;
    off += b.dim;
  }
  throw Error("feature not in schema: " + std::string(name));
}

std::vector<bool> FeatureSchema::indicator_mask() const {
  std::vector<bool> mask;
  mask.reserve(dimension_);
  for (const auto& b : blocks_) mask.insert(mask.end(), b.dim, b.indicator);
  return mask;
}

FeatureSchema FeatureSchema::without(const std::vector<std::string>& names) const {
  std::set<std::string, std::less<>> drop(names.begin(), names.end());
  std::vector<FeatureBlock> kept;
  for (const auto& b : blocks_)
    if (!drop.count(b.name)) kept.push_back(b);
  return FeatureSchema(profile_, std::move(kept));
}

ordered_json FeatureSchema::to_json() const {
  ordered_json j;
  j["profile"] = profile_.name;
  j["has_linguistic_features"] = profile_.has_linguistic_features;
  j["dimension"] = dimension_;
  j["blocks"] = ordered_json::array();
  for (const auto& b : blocks_) {
    ordered_json jb;
    jb["name"] = b.name;
    jb["group"] = to_string(b.group);
    jb["dim"] = b.dim;
    jb["indicator"] = b.indicator;
    jb["source"] = b.source;
    j["blocks"].push_back(std::move(jb));
  }
  return j;
}

FeatureSchema FeatureSchema::from_json(const json& j) {
  ReaderProfile profile{j.at("profile").get<std::string>(),
                        j.at("has_linguistic_features").get<bool>()};
  std::vector<FeatureBlock> blocks;
  for (const auto& jb : j.at("blocks")) {
    blocks.push_back({jb.at("name").get<std::string>(),
                      feature_group_from_string(jb.at("group").get<std::string>()),
                      jb.at("dim").get<std::size_t>(), jb.at("indicator").get<bool>(),
                      jb.at("source").get<std::string>()});
  }
  FeatureSchema schema(std::move(profile), std::move(blocks));
  if (j.contains("dimension") && j.at("dimension").get<std::size_t>() != schema.dimension())
    throw Error("schema dimension does not match its blocks");
  return schema;
}

std::array<double, kQuestionTypeDim> question_type(std::string_view question) {
  std::array<double, kQuestionTypeDim> out{};
  const auto tokens = tokenize(question);
  std::size_t best = kQuestionTypeDim - 1;
  std::size_t best_len = 0;
  for (std::size_t i = 0; i + 1 < kQuestionTypeDim; ++i) {
    const auto words = tokenize(kQuestionTypes[i]);
    if (words.size() <= best_len || words.size() > tokens.size()) continue;
    if (std::equal(words.begin(), words.end(), tokens.begin())) {
      best = i;
      best_len = words.size();
    }
  }
  out[best] = 1.0;
  return out;
}

RetrievalFeatures extract_ir_features(std::string_view question,
                                      const AnswerCandidate& candidate,
                                      const TfidfIndex& index,
                                      const Corpus& corpus) {
  const Document* doc = corpus.find(candidate.doc_id);
  if (doc == nullptr) throw Error("candidate refers to unknown doc_id " + candidate.doc_id);
  const Paragraph* para = corpus.paragraph(candidate.doc_id, candidate.para_id);
  if (para == nullptr)
    throw Error("candidate refers to unknown paragraph " + candidate.doc_id + "#" +
                std::to_string(candidate.para_id));
  const std::string doc_text = index.document_text(*doc);
  RetrievalFeatures f;
  f.doc_query_sim = index.similarity(question, doc_text);
  f.para_query_sim = index.similarity(question, para->text);
  f.doc_length = static_cast<double>(tokenize(doc_text).size());
  f.para_length = static_cast<double>(tokenize(para->text).size());
  f.question_length = static_cast<double>(tokenize(question).size());
  f.paragraph_position = static_cast<double>(candidate.para_id);
  f.question_type = question_type(question);
  return f;
}

FeatureVector assemble(const AnswerCandidate& candidate,
                       const RetrievalFeatures& ir,
                       const AggregatedCandidate* aggregated,
                       const FeatureSchema& schema) {
  FeatureVector out;
  out.reserve(schema.dimension());
  auto need_agg = [&](const std::string& name) -> const AggregatedCandidate& {
    if (aggregated == nullptr) throw Error("missing aggregation features for block " + name);
    return *aggregated;
  };
  for (const auto& b : schema.blocks()) {
    const std::string& n = b.name;
    if (n == "doc_query_sim") out.push_back(ir.doc_query_sim);
    else if (n == "para_query_sim") out.push_back(ir.para_query_sim);
    else if (n == "doc_length") out.push_back(ir.doc_length);
    else if (n == "para_length") out.push_back(ir.para_length);
    else if (n == "question_length") out.push_back(ir.question_length);
    else if (n == "paragraph_position") out.push_back(ir.paragraph_position);
    else if (n == "question_type")
      out.insert(out.end(), ir.question_type.begin(), ir.question_type.end());
    else if (n == "span_score") out.push_back(candidate.span_score);
    else if (n == "original_rank") out.push_back(candidate.original_rank);
    else if (n == "ner" || n == "pos") {
      const auto& tags = n == "ner" ? candidate.ner_tags : candidate.pos_tags;
      if (!tags) throw Error("candidate has no " + n + " tags required by block " + n);
      if (tags->size() != b.dim) throw Error("block " + n + " has wrong dimension");
      for (auto bit : *tags) out.push_back(bit);
    }
    else if (n == "occurrence_count") out.push_back(need_agg(n).occurrence_count);
    else if (n == "first_occurrence_rank") out.push_back(need_agg(n).first_occurrence_rank);
    else if (n == "span_score_sum") out.push_back(need_agg(n).span_score.sum);
    else if (n == "span_score_mean") out.push_back(need_agg(n).span_score.mean);
    else if (n == "span_score_min") out.push_back(need_agg(n).span_score.min);
    else if (n == "span_score_max") out.push_back(need_agg(n).span_score.max);
    else if (n == "doc_query_sim_sum") out.push_back(need_agg(n).doc_query_sim.sum);
    else if (n == "doc_query_sim_mean") out.push_back(need_agg(n).doc_query_sim.mean);
    else if (n == "doc_query_sim_min") out.push_back(need_agg(n).doc_query_sim.min);
    else if (n == "doc_query_sim_max") out.push_back(need_agg(n).doc_query_sim.max);
    else throw Error("no extractor for feature block " + n);
  }
  return out;
}

Scaler Scaler::fit(std::span<const FeatureVector> training, const FeatureSchema& schema) {
  if (training.empty()) throw Error("cannot fit scaler on an empty training set");
  const std::size_t d = schema.dimension();
  const auto mask = schema.indicator_mask();
  Scaler s;
  s.columns_.resize(d);
  std::vector<double> raw_min(d, INFINITY);
  for (const auto& x : training) {
    if (x.size() != d)
      throw Error("training vector has dimension " + std::to_string(x.size()) +
                  ", schema expects " + std::to_string(d));
    for (std::size_t i = 0; i < d; ++i) {
      if (!std::isfinite(x[i])) throw Error("non-finite training feature value");
      raw_min[i] = std::min(raw_min[i], x[i]);
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    auto& c = s.columns_[i];
    if (mask[i]) {
      c = {Transform::kPassThrough, 0.0, 1.0};
      continue;
    }
    c.transform = raw_min[i] < 0.0 ? Transform::kMinMax : Transform::kLogMinMax;
    c.min = INFINITY;
    c.max = -INFINITY;
    for (const auto& x : training) {
      double v = c.transform == Transform::kLogMinMax ? std::log1p(x[i]) : x[i];
      c.min = std::min(c.min, v);
      c.max = std::max(c.max, v);
    }
  }
  return s;
}

Scaler Scaler::unit(const FeatureSchema& schema) {
  Scaler s;
  s.columns_.assign(schema.dimension(), {Transform::kPassThrough, 0.0, 1.0});
  return s;
}

FeatureVector Scaler::transform(const FeatureVector& raw) const {
  if (raw.size() != columns_.size())
    throw Error("feature vector has dimension " + std::to_string(raw.size()) +
                ", scaler expects " + std::to_string(columns_.size()));
  FeatureVector out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double x = raw[i];
    if (!std::isfinite(x)) throw Error("non-finite feature value");
    const auto& c = columns_[i];
    double v = 0.0;
    switch (c.transform) {
      case Transform::kPassThrough:
        v = x;
        break;
      case Transform::kLogMinMax:
        if (x <= -1.0) {
          v = 0.0;
          break;
        }
        v = c.max > c.min ? (std::log1p(x) - c.min) / (c.max - c.min) : 0.0;
        break;
      case Transform::kMinMax:
        v = c.max > c.min ? (x - c.min) / (c.max - c.min) : 0.0;
        break;
    }
    out[i] = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

namespace {

std::string_view transform_name(Scaler::Transform t) {
  switch (t) {
    case Scaler::Transform::kPassThrough: return "pass";
    case Scaler::Transform::kLogMinMax: return "log1p_minmax";
    case Scaler::Transform::kMinMax: return "minmax";
  }
  return "?";
}

Scaler::Transform transform_from_name(std::string_view s) {
  if (s == "pass") return Scaler::Transform::kPassThrough;
  if (s == "log1p_minmax") return Scaler::Transform::kLogMinMax;
  if (s == "minmax") return Scaler::Transform::kMinMax;
  throw Error("unknown scaler transform: " + std::string(s));
}

}  // namespace

ordered_json Scaler::to_json() const {
  ordered_json arr = ordered_json::array();
  for (const auto& c : columns_) {
    ordered_json jc;
    jc["transform"] = transform_name(c.transform);
    jc["min"] = c.min;
    jc["max"] = c.max;
    arr.push_back(std::move(jc));
  }
  return arr;
}

Scaler Scaler::from_json(const json& j) {
  Scaler s;
  for (const auto& jc : j) {
    Column c{transform_from_name(jc.at("transform").get<std::string>()),
             jc.at("min").get<double>(), jc.at("max").get<double>()};
    if (!(c.min <= c.max)) throw Error("scaler column with min > max");
    s.columns_.push_back(c);
  }
  return s;
}

}  // namespace qarank
