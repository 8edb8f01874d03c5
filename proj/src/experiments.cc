#include "qarank/experiments.h"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <unordered_map>

namespace qarank {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

std::vector<std::string> predictions_of(const ModelBundle& bundle,
                                        const std::vector<PreparedQuestion>& prepared) {
  std::vector<std::string> out;
  out.reserve(prepared.size());
  for (const auto& q : prepared) out.push_back(rerank_question(bundle, q).answer);
  return out;
}

}  // namespace

std::vector<std::string> applicable_ablation_groups(const FeatureSchema& schema) {
  std::vector<std::string> out;
  for (const auto& g : ablation_groups()) {
    bool any = false;
    if (g.features.empty()) {
      for (const auto& b : schema.blocks()) any |= b.group == FeatureGroup::kAggregation;
    } else {
      for (const auto& f : g.features) any |= schema.has(f);
    }
    if (any) out.push_back(g.name);
  }
  return out;
}

std::vector<AblationRow> run_ablation(const std::vector<NamedQuestions>& train,
                                      const std::vector<QuestionRecord>& eval_records,
                                      const std::vector<PreparedQuestion>& eval_prepared,
                                      const FeatureSchema& full, const PipelineConfig& config,
                                      const std::vector<std::string>& groups) {
  if (eval_records.size() != eval_prepared.size())
    throw Error("ablation: evaluation records and prepared questions differ in size");
  std::vector<AblationRow> rows;
  auto run = [&](const std::string& name, const FeatureSchema& schema) {
    std::vector<NamedQuestions> projected;
    for (const auto& ds : train) {
      NamedQuestions p{ds.name, {}};
      for (const auto& q : ds.questions) p.questions.push_back(project(q, full, schema));
      projected.push_back(std::move(p));
    }
    std::vector<PreparedQuestion> eval;
    for (const auto& q : eval_prepared) eval.push_back(project(q, full, schema));
    const ModelBundle bundle = train_bundle(projected, schema, config);
    AblationRow row;
    row.group = name;
    row.dimension = schema.dimension();
    row.lambda = bundle.lambda;
    row.report = evaluate(name, eval_records, predictions_of(bundle, eval));
    rows.push_back(std::move(row));
  };
  run("all", full);
  for (const auto& g : groups) run(g, blind_features(full, {g}));
  return rows;
}

void write_ablation_csv(const std::vector<AblationRow>& rows, std::ostream& out) {
  out << "group,dimension,lambda,baseline_em,reranked_em,upper_bound_em\n";
  for (const auto& r : rows)
    out << r.group << ',' << r.dimension << ',' << r.lambda << ',' << fmt(r.report.baseline_em)
        << ',' << fmt(r.report.em) << ',' << fmt(r.report.upper_bound_em) << '\n';
}

std::vector<SweepRow> corpus_sweep(const CorpusGenerator& generate,
                                   const std::vector<QuestionRecord>& questions,
                                   const std::vector<std::size_t>& sizes,
                                   const ModelBundle& bundle, const PipelineConfig& config) {
  config.validate();
  std::vector<SweepRow> rows;
  std::vector<Document> previous;
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    if (s > 0 && sizes[s] <= sizes[s - 1])
      throw Error("sweep sizes must be strictly increasing");
    std::vector<Document> docs = generate(sizes[s]);
    if (docs.size() != sizes[s])
      throw Error("corpus generator returned " + std::to_string(docs.size()) +
                  " documents for size " + std::to_string(sizes[s]));
    std::unordered_map<std::string_view, const Document*> by_id;
    for (const auto& d : docs) by_id.emplace(d.doc_id, &d);
    for (const auto& p : previous) {
      auto it = by_id.find(p.doc_id);
      if (it == by_id.end() || it->second->title != p.title || it->second->body != p.body)
        throw Error("corpus of size " + std::to_string(sizes[s]) +
                    " does not contain the smaller corpus (document " + p.doc_id + ")");
    }
    by_id.clear();

    const TfidfIndex index =
        TfidfIndex::build(docs, {config.num_buckets, config.include_title});
    const Corpus corpus(docs);
    std::vector<QuestionRecord> records;
    records.reserve(questions.size());
    for (const auto& q : questions) records.push_back(read_question(q, index, corpus, config));
    SweepRow row;
    row.corpus_size = sizes[s];
    row.report = evaluate_with_model("size-" + std::to_string(sizes[s]), records, bundle, index,
                                     corpus);
    rows.push_back(std::move(row));
    previous = std::move(docs);
  }
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "corpus_size,baseline_em,reranked_em,upper_bound_em\n";
  for (const auto& r : rows)
    out << r.corpus_size << ',' << fmt(r.report.baseline_em) << ',' << fmt(r.report.em) << ','
        << fmt(r.report.upper_bound_em) << '\n';
}

std::string format_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size() && c < width.size(); ++c)
      width[c] = std::max(width[c], r[c].size());
  auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t c = 0; c < width.size(); ++c) {
      const std::string cell = c < cells.size() ? cells[c] : "";
      if (c) out += "  ";
      // First column left-aligned, numbers right-aligned.
      if (c == 0) out += cell + std::string(width[c] - cell.size(), ' ');
      else out += std::string(width[c] - cell.size(), ' ') + cell;
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + '\n';
  };
  std::string out = line(header);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out += std::string(total + 2 * (width.size() - 1), '-') + '\n';
  for (const auto& r : rows) out += line(r);
  return out;
}

std::string ablation_table(const std::vector<AblationRow>& rows) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    char lambda[32];
    std::snprintf(lambda, sizeof lambda, "%g", r.lambda);
    cells.push_back({r.group, std::to_string(r.dimension), lambda, pct(r.report.baseline_em),
                     pct(r.report.em), pct(r.report.upper_bound_em)});
  }
  return format_table({"blinded", "d", "lambda", "baseline", "reranked", "upper"}, cells);
}

std::string sweep_table(const std::vector<SweepRow>& rows) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows)
    cells.push_back({std::to_string(r.corpus_size), pct(r.report.baseline_em), pct(r.report.em),
                     pct(r.report.upper_bound_em)});
  return format_table({"documents", "baseline", "reranked", "upper"}, cells);
}

std::string report_table(const EvaluationReport& report) {
  return format_table({"dataset", "questions", "baseline", "reranked", "upper", "retention"},
                      {{report.dataset, std::to_string(report.questions), pct(report.baseline_em),
                        pct(report.em), pct(report.upper_bound_em),
                        report.retention ? pct(*report.retention) : "n/a"}});
}

}  // namespace qarank
