#include "qarank/pipeline.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace qarank {

using nlohmann::json;
using nlohmann::ordered_json;

void PipelineConfig::validate() const {
  if (top_n_documents < 1) throw Error("top_n_documents must be >= 1");
  if (top_k_candidates < 1) throw Error("top_k_candidates must be >= 1");
  if (!(selection_fraction > 0.0 && selection_fraction < 1.0))
    throw Error("selection_fraction must lie in (0, 1)");
  if (num_buckets < 1) throw Error("num_buckets must be >= 1");
  if (mock_reader.window < 0 || mock_reader.max_span_tokens < 1)
    throw Error("bad mock reader settings");
  train.validate();
}

ordered_json PipelineConfig::to_json() const {
  ordered_json j;
  j["top_n_documents"] = top_n_documents;
  j["top_k_candidates"] = top_k_candidates;
  j["profile"] = profile.name;
  j["selection_fraction"] = selection_fraction;
  j["case_fold_spans"] = case_fold_spans;
  j["num_buckets"] = num_buckets;
  j["include_title"] = include_title;
  j["mock_window"] = mock_reader.window;
  j["mock_max_span_tokens"] = mock_reader.max_span_tokens;
  const ordered_json trained = train.to_json();
  for (auto& [k, v] : trained.items()) j[k] = v;
  return j;
}

void PipelineConfig::merge_json(const json& j) {
  if (!j.is_object()) throw Error("config must be a flat JSON object");
  static const std::vector<std::string> known = [] {
    std::vector<std::string> keys;
    const ordered_json defaults = PipelineConfig{}.to_json();
    for (auto& [k, v] : defaults.items()) keys.push_back(k);
    return keys;
  }();
  for (auto& [k, v] : j.items()) {
    if (std::find(known.begin(), known.end(), k) == known.end())
      throw Error("unknown config key: " + k);
  }
  try {
    top_n_documents = j.value("top_n_documents", top_n_documents);
    top_k_candidates = j.value("top_k_candidates", top_k_candidates);
    if (j.contains("profile")) profile = ReaderProfile::from_name(j.at("profile").get<std::string>());
    selection_fraction = j.value("selection_fraction", selection_fraction);
    case_fold_spans = j.value("case_fold_spans", case_fold_spans);
    num_buckets = j.value("num_buckets", num_buckets);
    include_title = j.value("include_title", include_title);
    mock_reader.window = j.value("mock_window", mock_reader.window);
    mock_reader.max_span_tokens = j.value("mock_max_span_tokens", mock_reader.max_span_tokens);
    ordered_json merged = train.to_json();
    for (auto& [k, v] : j.items())
      if (merged.contains(k)) merged[k] = v;
    train = TrainConfig::from_json(merged);
  } catch (const json::exception& e) {
    throw Error(std::string("bad config value: ") + e.what());
  }
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path);
  PipelineConfig c;
  try {
    c.merge_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(path + ": " + e.what());
  }
  return c;
}

QuestionRecord read_question(const QuestionRecord& question, const TfidfIndex& index,
                             const Corpus& corpus, const PipelineConfig& config) {
  QuestionRecord out;
  out.question_id = question.question_id;
  out.question_text = question.question_text;
  out.gold_answers = question.gold_answers;
  const auto retrieved = index.retrieve(question.question_text,
                                        static_cast<std::size_t>(config.top_n_documents));
  std::vector<Paragraph> paragraphs;
  for (const auto& doc : retrieved.documents) {
    const auto& paras = corpus.paragraphs(doc.doc_id);
    paragraphs.insert(paragraphs.end(), paras.begin(), paras.end());
  }
  out.candidates = mock_read(question.question_text, paragraphs, config.top_k_candidates,
                             config.mock_reader);
  return out;
}

PreparedQuestion prepare_question(const QuestionRecord& record, const TfidfIndex& index,
                                  const Corpus& corpus, const FeatureSchema& schema,
                                  bool case_fold_spans) {
  PreparedQuestion q;
  q.question_id = record.question_id;
  q.gold_answers = record.gold_answers;
  std::vector<RetrievalFeatures> ir;
  ir.reserve(record.candidates.size());
  std::vector<CandidateObservation> obs;
  obs.reserve(record.candidates.size());
  for (const auto& c : record.candidates) {
    try {
      ir.push_back(extract_ir_features(record.question_text, c, index, corpus));
    } catch (const Error& e) {
      throw Error("question " + record.question_id + ", candidate rank " +
                  std::to_string(c.original_rank) + ": " + e.what());
    }
    obs.push_back({c.span, c.original_rank, c.span_score, ir.back().doc_query_sim});
  }
  std::vector<AggregatedCandidate> groups;
  try {
    groups = aggregate(obs, {case_fold_spans});
  } catch (const Error& e) {
    throw Error("question " + record.question_id + ": " + e.what());
  }
  for (const auto& g : groups) {
    const auto& base = record.candidates[g.base_index];
    PreparedCandidate pc;
    pc.span = base.span;
    pc.first_occurrence_rank = g.first_occurrence_rank;
    pc.occurrence_count = g.occurrence_count;
    try {
      pc.raw = assemble(base, ir[g.base_index], &g, schema);
    } catch (const Error& e) {
      throw Error("question " + record.question_id + ", candidate rank " +
                  std::to_string(base.original_rank) + ": " + e.what());
    }
    q.candidates.push_back(std::move(pc));
  }
  return q;
}

std::vector<PreparedQuestion> prepare_questions(const std::vector<QuestionRecord>& records,
                                                const TfidfIndex& index,
                                                const Corpus& corpus,
                                                const FeatureSchema& schema,
                                                bool case_fold_spans) {
  std::vector<PreparedQuestion> out;
  out.reserve(records.size());
  for (const auto& r : records)
    out.push_back(prepare_question(r, index, corpus, schema, case_fold_spans));
  return out;
}

PreparedQuestion project(const PreparedQuestion& q, const FeatureSchema& from,
                         const FeatureSchema& to) {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;  // (offset, dim) in `from`
  for (const auto& b : to.blocks()) {
    const FeatureBlock* src = from.find(b.name);
    if (src == nullptr || src->dim != b.dim)
      throw Error("cannot project: block " + b.name + " missing from source schema");
    ranges.emplace_back(from.offset(b.name), b.dim);
  }
  PreparedQuestion out = q;
  for (auto& c : out.candidates) {
    if (c.raw.size() != from.dimension()) throw Error("cannot project: dimension mismatch");
    FeatureVector v;
    v.reserve(to.dimension());
    for (const auto& [off, dim] : ranges)
      v.insert(v.end(), c.raw.begin() + static_cast<std::ptrdiff_t>(off),
               c.raw.begin() + static_cast<std::ptrdiff_t>(off + dim));
    c.raw = std::move(v);
  }
  return out;
}

namespace {

ordered_json weights_to_json(const RankerModel& m) {
  ordered_json j;
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.A.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.A.cols()));
    for (Eigen::Index c = 0; c < m.A.cols(); ++c) row[static_cast<std::size_t>(c)] = m.A(r, c);
    rows.push_back(row);
  }
  j["A"] = std::move(rows);
  j["b1"] = std::vector<double>(m.b1.data(), m.b1.data() + m.b1.size());
  j["B"] = std::vector<double>(m.B.data(), m.B.data() + m.B.size());
  j["b2"] = m.b2;
  return j;
}

RankerModel weights_from_json(const json& j, std::size_t d) {
  const auto& rows = j.at("A");
  const auto b1 = j.at("b1").get<std::vector<double>>();
  const auto B = j.at("B").get<std::vector<double>>();
  const std::size_t m = b1.size();
  if (m == 0 || rows.size() != m || B.size() != m)
    throw Error("model weights have inconsistent hidden size");
  RankerModel model = RankerModel::zeros(d, m);
  for (std::size_t r = 0; r < m; ++r) {
    const auto row = rows[r].get<std::vector<double>>();
    if (row.size() != d) throw Error("model weight row does not match schema dimension");
    for (std::size_t c = 0; c < d; ++c)
      model.A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
    model.b1(static_cast<Eigen::Index>(r)) = b1[r];
    model.B(static_cast<Eigen::Index>(r)) = B[r];
  }
  model.b2 = j.at("b2").get<double>();
  if (!model.all_finite()) throw Error("model weights are not finite");
  return model;
}

}  // namespace

ordered_json ModelBundle::to_json() const {
  ordered_json j;
  j["format"] = "qarank-model";
  j["version"] = kFormatVersion;
  j["profile"] = schema.profile().name;
  j["d"] = model.input_dim();
  j["m"] = model.hidden_units();
  j["lambda"] = lambda;
  j["seed"] = config.seed;
  j["case_fold_spans"] = case_fold_spans;
  j["datasets"] = datasets;
  j["config"] = config.to_json();
  j["schema"] = schema.to_json();
  j["scaler"] = scaler.to_json();
  j["training_logs"] = ordered_json::array();
  for (const auto& log : logs) j["training_logs"].push_back(log.to_json());
  j["weights"] = weights_to_json(model);
  return j;
}

ModelBundle ModelBundle::from_json(const json& j) {
  if (j.value("format", std::string()) != "qarank-model")
    throw Error("not a model bundle (missing format tag)");
  const int version = j.at("version").get<int>();
  if (version != kFormatVersion)
    throw Error("model bundle version " + std::to_string(version) +
                " is not supported (expected " + std::to_string(kFormatVersion) + ")");
  ModelBundle b;
  b.schema = FeatureSchema::from_json(j.at("schema"));
  b.scaler = Scaler::from_json(j.at("scaler"));
  b.config = TrainConfig::from_json(j.at("config"));
  b.lambda = j.at("lambda").get<double>();
  b.case_fold_spans = j.at("case_fold_spans").get<bool>();
  b.datasets = j.at("datasets").get<std::vector<std::string>>();
  for (const auto& jl : j.at("training_logs")) b.logs.push_back(TrainingLog::from_json(jl));
  b.model = weights_from_json(j.at("weights"), b.schema.dimension());
  if (b.scaler.dimension() != b.schema.dimension())
    throw Error("scaler dimension does not match schema");
  if (j.at("d").get<std::size_t>() != b.schema.dimension() ||
      j.at("m").get<std::size_t>() != b.model.hidden_units())
    throw Error("bundle header dimensions do not match weights");
  return b;
}

void ModelBundle::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model bundle: " + path);
  out << to_json().dump() << '\n';
  if (!out) throw Error("failed writing model bundle: " + path);
}

ModelBundle ModelBundle::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model bundle: " + path);
  json j;
  try {
    j = json::parse(in);
    return from_json(j);
  } catch (const json::exception& e) {
    throw Error(path + ": corrupt or truncated model bundle: " + e.what());
  }
}

ModelBundle identity_bundle(const FeatureSchema& schema, const TrainConfig& config) {
  ModelBundle b;
  b.schema = schema;
  b.scaler = Scaler::unit(schema);
  b.model = RankerModel::zeros(schema.dimension(), static_cast<std::size_t>(config.hidden_units));
  b.config = config;
  return b;
}

void split_for_selection(std::vector<PreparedQuestion> questions, double fraction,
                         std::uint64_t seed, std::vector<PreparedQuestion>& train,
                         std::vector<PreparedQuestion>& selection) {
  const std::size_t n = questions.size();
  if (n < 2) throw Error("need at least two questions to split off a selection set");
  std::mt19937_64 rng(seed);
  std::shuffle(questions.begin(), questions.end(), rng);
  std::size_t k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  k = std::clamp<std::size_t>(k, 1, n - 1);
  selection.insert(selection.end(), std::make_move_iterator(questions.begin()),
                   std::make_move_iterator(questions.begin() + static_cast<std::ptrdiff_t>(k)));
  train.insert(train.end(), std::make_move_iterator(questions.begin() + static_cast<std::ptrdiff_t>(k)),
               std::make_move_iterator(questions.end()));
}

std::vector<TrainingPair> make_pairs(const std::vector<PreparedQuestion>& questions,
                                     const Scaler& scaler, const TrainConfig& config) {
  std::vector<TrainingPair> pairs;
  for (const auto& q : questions) {
    if (q.gold_answers.empty())
      throw Error("question " + q.question_id + " has no gold answers to label candidates");
    const std::size_t limit = std::min<std::size_t>(
        q.candidates.size(), static_cast<std::size_t>(config.pair_rank_threshold));
    std::vector<LabeledCandidate> labeled;
    for (std::size_t i = 0; i < limit; ++i) {
      const auto& c = q.candidates[i];
      labeled.push_back({scaler.transform(c.raw), exact_match(c.span, q.gold_answers)});
    }
    auto p = sample_pairs(labeled, config.pair_rank_threshold, config.skip_equal_label_pairs);
    pairs.insert(pairs.end(), std::make_move_iterator(p.begin()),
                 std::make_move_iterator(p.end()));
  }
  return pairs;
}

ModelBundle train_bundle(const std::vector<NamedQuestions>& datasets,
                         const FeatureSchema& schema, const PipelineConfig& config) {
  config.validate();
  if (datasets.empty()) throw Error("no training datasets given");
  std::vector<PreparedQuestion> train_set, selection_set;
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    split_for_selection(datasets[i].questions, config.selection_fraction,
                        config.train.seed + i, train_set, selection_set);
  }

  std::vector<FeatureVector> fit_rows;
  for (const auto& q : train_set)
    for (const auto& c : q.candidates) fit_rows.push_back(c.raw);
  if (fit_rows.empty()) throw Error("training split has no candidates");
  const Scaler scaler = Scaler::fit(fit_rows, schema);

  const auto train_pairs = make_pairs(train_set, scaler, config.train);
  const auto selection_pairs = make_pairs(selection_set, scaler, config.train);
  if (train_pairs.empty()) throw Error("no training pairs could be generated");

  ModelBundle best;
  double best_loss = INFINITY;
  std::vector<TrainingLog> logs;
  for (double lambda : config.train.lambda_grid) {
    TrainResult r = train(train_pairs, selection_pairs, config.train, lambda);
    logs.push_back(r.log);
    if (logs.size() == 1 || r.log.best_selection_loss < best_loss) {
      best_loss = r.log.best_selection_loss;
      best.model = std::move(r.model);
      best.lambda = lambda;
    }
  }
  best.schema = schema;
  best.scaler = scaler;
  best.config = config.train;
  best.case_fold_spans = config.case_fold_spans;
  for (const auto& d : datasets) best.datasets.push_back(d.name);
  best.logs = std::move(logs);
  return best;
}

RerankedQuestion rerank_question(const ModelBundle& bundle, const PreparedQuestion& q) {
  RerankedQuestion out;
  out.question_id = q.question_id;
  std::vector<FeatureVector> scaled;
  scaled.reserve(q.candidates.size());
  for (const auto& c : q.candidates) scaled.push_back(bundle.scaler.transform(c.raw));
  for (const auto& r : rerank(bundle.model, scaled, bundle.config.inference_top)) {
    const auto& c = q.candidates[r.index];
    out.ranked.push_back({c.span, c.first_occurrence_rank, r.score});
  }
  if (!out.ranked.empty()) out.answer = out.ranked.front().span;
  return out;
}

ordered_json to_json(const RerankedQuestion& r) {
  ordered_json j;
  j["question_id"] = r.question_id;
  j["answer"] = r.answer;
  j["ranked"] = ordered_json::array();
  for (const auto& a : r.ranked) {
    if (!a.score) break;
    ordered_json ja;
    ja["span"] = a.span;
    ja["first_occurrence_rank"] = a.first_occurrence_rank;
    ja["score"] = *a.score;
    j["ranked"].push_back(std::move(ja));
  }
  return j;
}

EvaluationReport evaluate_with_model(const std::string& dataset,
                                     const std::vector<QuestionRecord>& records,
                                     const ModelBundle& bundle, const TfidfIndex& index,
                                     const Corpus& corpus,
                                     std::vector<RerankedQuestion>* reranked) {
  std::vector<std::string> predictions;
  predictions.reserve(records.size());
  for (const auto& r : records) {
    auto rq = rerank_question(bundle, prepare_question(r, index, corpus, bundle.schema,
                                                       bundle.case_fold_spans));
    predictions.push_back(rq.answer);
    if (reranked) reranked->push_back(std::move(rq));
  }
  return evaluate(dataset, records, predictions);
}

}  // namespace qarank
