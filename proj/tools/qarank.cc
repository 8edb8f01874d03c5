// Command-line front end. Exit codes: 0 success, 1 runtime failure, 2 usage error.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qarank/corpus.h"
#include "qarank/evaluation.h"
#include "qarank/experiments.h"
#include "qarank/pipeline.h"
#include "qarank/reader.h"
#include "qarank/retrieval.h"
#include "qarank/synthetic.h"

namespace {

using namespace qarank;
using nlohmann::ordered_json;

// Flags shared by every subcommand that touches the pipeline. A flag wins
// over the config file only when it was given.
struct ConfigFlags {
  std::string config_path;
  int top_n = 0, top_k = 0, inference_top = 0, hidden_units = 0, batch_size = 0;
  int max_epochs = 0, patience = 0;
  double learning_rate = 0.0, selection_fraction = 0.0;
  std::vector<double> lambda_grid;
  std::uint64_t seed = 0;
  std::uint32_t num_buckets = 0;
  std::string profile;
  bool case_fold = false, no_title = false;
  std::map<std::string, CLI::Option*> opts;

  void attach(CLI::App* app) {
    opts["config"] = app->add_option("--config", config_path, "JSON config file")
                         ->check(CLI::ExistingFile);
    opts["top_n"] = app->add_option("--top-n", top_n, "documents retrieved per question");
    opts["top_k"] = app->add_option("--top-k", top_k, "reader candidates per question");
    opts["inference_top"] = app->add_option("--inference-top", inference_top,
                                            "candidates re-ranked at inference");
    opts["profile"] = app->add_option("--profile", profile, "reader profile")
                          ->check(CLI::IsMember({"drqa", "bert"}));
    opts["num_buckets"] = app->add_option("--num-buckets", num_buckets, "hash buckets");
    opts["no_title"] = app->add_flag("--no-title", no_title, "score bodies only");
    opts["hidden_units"] = app->add_option("--hidden-units", hidden_units, "hidden layer size");
    opts["learning_rate"] = app->add_option("--learning-rate", learning_rate, "Adam step size");
    opts["batch_size"] = app->add_option("--batch-size", batch_size, "pairs per batch");
    opts["max_epochs"] = app->add_option("--max-epochs", max_epochs, "epoch cap");
    opts["patience"] = app->add_option("--patience", patience, "early stopping patience");
    opts["lambda_grid"] = app->add_option("--lambda-grid", lambda_grid, "L1 weights to try");
    opts["selection_fraction"] = app->add_option("--selection-fraction", selection_fraction,
                                                 "share held out for model selection");
    opts["seed"] = app->add_option("--seed", seed, "seed for every random choice");
    opts["case_fold"] = app->add_flag("--case-fold", case_fold, "case-insensitive span merging");
  }

  bool given(const std::string& name) const { return opts.at(name)->count() > 0; }

  PipelineConfig resolve() const {
    PipelineConfig c = given("config") ? PipelineConfig::load(config_path) : PipelineConfig{};
    if (given("top_n")) c.top_n_documents = top_n;
    if (given("top_k")) c.top_k_candidates = top_k;
    if (given("inference_top")) c.train.inference_top = inference_top;
    if (given("profile")) c.profile = ReaderProfile::from_name(profile);
    if (given("num_buckets")) c.num_buckets = num_buckets;
    if (given("no_title")) c.include_title = false;
    if (given("hidden_units")) c.train.hidden_units = hidden_units;
    if (given("learning_rate")) c.train.learning_rate = learning_rate;
    if (given("batch_size")) c.train.batch_size = batch_size;
    if (given("max_epochs")) c.train.max_epochs = max_epochs;
    if (given("patience")) c.train.patience = patience;
    if (given("lambda_grid")) c.train.lambda_grid = lambda_grid;
    if (given("selection_fraction")) c.selection_fraction = selection_fraction;
    if (given("seed")) c.train.seed = seed;
    if (given("case_fold")) c.case_fold_spans = true;
    c.validate();
    return c;
  }
};

struct IndexFlags {
  std::string corpus_path;
  std::string index_path;

  void attach(CLI::App* app, bool corpus_required = true) {
    auto* o = app->add_option("--corpus", corpus_path, "JSON-lines corpus")
                  ->check(CLI::ExistingFile);
    if (corpus_required) o->required();
    app->add_option("--index", index_path, "prebuilt index (built from the corpus if absent)")
        ->check(CLI::ExistingFile);
  }
};

struct Loaded {
  Corpus corpus;
  TfidfIndex index;
};

Loaded load_corpus_and_index(const IndexFlags& f, const PipelineConfig& config) {
  Loaded l;
  auto docs = load_corpus(f.corpus_path);
  if (!f.index_path.empty()) {
    l.index = TfidfIndex::load(f.index_path);
    if (l.index.size() != docs.size())
      throw Error("index " + f.index_path + " does not match corpus " + f.corpus_path);
    for (std::size_t i = 0; i < docs.size(); ++i)
      if (l.index.doc_id(i) != docs[i].doc_id)
        throw Error("index " + f.index_path + " does not match corpus " + f.corpus_path +
                    " at document " + docs[i].doc_id);
  } else {
    l.index = TfidfIndex::build(docs, {config.num_buckets, config.include_title});
  }
  l.corpus = Corpus(std::move(docs));
  return l;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("failed writing " + path);
}

std::string dataset_name(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

std::vector<QuestionRecord> read_all(const std::vector<QuestionRecord>& questions,
                                     const Loaded& l, const PipelineConfig& config) {
  std::vector<QuestionRecord> out;
  out.reserve(questions.size());
  for (const auto& q : questions) out.push_back(read_question(q, l.index, l.corpus, config));
  return out;
}

// Candidate records from a dump, or from the mock-reader pipeline.
struct CandidateSource {
  std::string dump_path;
  std::string questions_path;
  bool full_pipeline = false;

  void attach(CLI::App* app) {
    auto* dump = app->add_option("--dump", dump_path, "candidate dump")->check(CLI::ExistingFile);
    auto* full = app->add_flag("--full-pipeline", full_pipeline,
                               "retrieve and read with the mock reader");
    auto* qs = app->add_option("--questions", questions_path, "question file")
                   ->check(CLI::ExistingFile);
    full->needs(qs);
    dump->excludes(full);
  }

  std::vector<QuestionRecord> load(const Loaded& l, const PipelineConfig& config,
                                   const ReaderProfile& profile) const {
    if (full_pipeline) return read_all(load_questions(questions_path), l, config);
    if (dump_path.empty()) throw CLI::ValidationError("either --dump or --full-pipeline is required");
    return load_candidate_dump(dump_path, profile, config.top_k_candidates);
  }

  std::string name() const {
    return dataset_name(full_pipeline ? questions_path : dump_path);
  }
};

struct ModelSetup {
  PipelineConfig config;
  ModelBundle bundle;
};

// The bundle's profile decides how dumps are validated; an explicit --profile
// must agree with it. Without a model the identity scorer is used.
ModelSetup resolve_model(const ConfigFlags& flags, const std::string& model_path) {
  ModelSetup s;
  s.config = flags.resolve();
  if (model_path.empty()) {
    s.bundle = identity_bundle(FeatureSchema::for_profile(s.config.profile), s.config.train);
    return s;
  }
  s.bundle = ModelBundle::load(model_path);
  const ReaderProfile& trained = s.bundle.schema.profile();
  if (flags.given("profile") && trained != s.config.profile)
    throw Error("model " + model_path + " was trained for reader profile '" + trained.name +
                "', not '" + s.config.profile.name + "'");
  s.config.profile = trained;
  s.config.train.inference_top = flags.given("inference_top") ? s.config.train.inference_top
                                                              : s.bundle.config.inference_top;
  s.bundle.config.inference_top = s.config.train.inference_top;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Answer re-ranking for open-domain question answering"};
  app.require_subcommand(1);
  app.fallthrough(false);

  // build-index
  auto* build = app.add_subcommand("build-index", "Build and save a TF-IDF index");
  ConfigFlags build_cfg;
  build_cfg.attach(build);
  std::string build_corpus, build_out;
  build->add_option("--corpus", build_corpus, "JSON-lines corpus")
      ->required()
      ->check(CLI::ExistingFile);
  build->add_option("--out", build_out, "index file")->required();

  // read
  auto* read = app.add_subcommand("read", "Retrieve and read questions into a candidate dump");
  ConfigFlags read_cfg;
  read_cfg.attach(read);
  IndexFlags read_idx;
  read_idx.attach(read);
  std::string read_questions, read_out;
  read->add_option("--questions", read_questions, "question file")
      ->required()
      ->check(CLI::ExistingFile);
  read->add_option("--out", read_out, "candidate dump")->required();

  // train
  auto* trn = app.add_subcommand("train", "Train a re-ranker on one or more candidate dumps");
  ConfigFlags train_cfg;
  train_cfg.attach(trn);
  IndexFlags train_idx;
  train_idx.attach(trn);
  std::vector<std::string> train_datasets;
  std::string train_out, train_log;
  trn->add_option("--datasets", train_datasets, "candidate dumps")
      ->required()
      ->check(CLI::ExistingFile);
  trn->add_option("--out", train_out, "model bundle")->required();
  trn->add_option("--log", train_log, "training log (one line per event)");

  // init-model
  auto* init = app.add_subcommand("init-model", "Write an identity model that keeps reader order");
  ConfigFlags init_cfg;
  init_cfg.attach(init);
  std::string init_out;
  init->add_option("--out", init_out, "model bundle")->required();

  // rerank
  auto* rr = app.add_subcommand("rerank", "Re-rank candidates and write answers");
  ConfigFlags rr_cfg;
  rr_cfg.attach(rr);
  IndexFlags rr_idx;
  rr_idx.attach(rr);
  CandidateSource rr_src;
  rr_src.attach(rr);
  std::string rr_model, rr_out, rr_report;
  rr->add_option("--model", rr_model, "model bundle (identity when omitted)")
      ->check(CLI::ExistingFile);
  rr->add_option("--out", rr_out, "answers file")->required();
  rr->add_option("--report", rr_report, "evaluation report");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Score a model against gold answers");
  ConfigFlags ev_cfg;
  ev_cfg.attach(ev);
  IndexFlags ev_idx;
  ev_idx.attach(ev);
  CandidateSource ev_src;
  ev_src.attach(ev);
  std::string ev_model, ev_report;
  bool ev_verdicts = false;
  ev->add_option("--model", ev_model, "model bundle (identity when omitted)")
      ->check(CLI::ExistingFile);
  ev->add_option("--report", ev_report, "report file (stdout when omitted)");
  ev->add_flag("--verdicts", ev_verdicts, "include per-question verdicts");

  // ablate
  auto* ab = app.add_subcommand("ablate", "Retrain with each feature group blinded");
  ConfigFlags ab_cfg;
  ab_cfg.attach(ab);
  IndexFlags ab_idx;
  ab_idx.attach(ab);
  std::vector<std::string> ab_datasets, ab_groups;
  std::string ab_eval, ab_out;
  ab->add_option("--datasets", ab_datasets, "training dumps")
      ->required()
      ->check(CLI::ExistingFile);
  ab->add_option("--eval", ab_eval, "evaluation dump")->required()->check(CLI::ExistingFile);
  ab->add_option("--groups", ab_groups, "groups to blind (default: all that apply)");
  ab->add_option("--out", ab_out, "CSV report (stdout when omitted)");

  // sweep
  auto* sw = app.add_subcommand("sweep", "Evaluate a fixed model over growing synthetic corpora");
  ConfigFlags sw_cfg;
  sw_cfg.attach(sw);
  std::vector<std::size_t> sw_sizes;
  std::string sw_model, sw_out, sw_family = "disjoint";
  std::uint64_t sw_toy_seed = 7;
  std::size_t sw_toy_docs = 100, sw_toy_questions = 50;
  sw->add_option("--sizes", sw_sizes, "corpus sizes, increasing")->required();
  sw->add_option("--model", sw_model, "model bundle (identity when omitted)")
      ->check(CLI::ExistingFile);
  sw->add_option("--family", sw_family, "distractor family")
      ->check(CLI::IsMember({"disjoint", "noisy"}));
  sw->add_option("--toy-seed", sw_toy_seed, "seed of the base toy dataset");
  sw->add_option("--toy-documents", sw_toy_docs, "base toy documents");
  sw->add_option("--toy-questions", sw_toy_questions, "toy questions");
  sw->add_option("--out", sw_out, "CSV report (stdout when omitted)");

  // generate-toy
  auto* gen = app.add_subcommand("generate-toy", "Write the toy corpus and its questions");
  std::string gen_corpus, gen_questions;
  std::uint64_t gen_seed = 7;
  std::size_t gen_docs = 100, gen_qs = 50;
  gen->add_option("--corpus-out", gen_corpus, "corpus file")->required();
  gen->add_option("--questions-out", gen_questions, "question file")->required();
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--documents", gen_docs, "number of documents");
  gen->add_option("--questions", gen_qs, "number of questions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (build->parsed()) {
      const PipelineConfig c = build_cfg.resolve();
      const auto docs = load_corpus(build_corpus);
      const auto index = TfidfIndex::build(docs, {c.num_buckets, c.include_title});
      index.save(build_out);
      std::cout << "documents=" << index.size() << " buckets=" << index.num_buckets()
                << " include_title=" << (index.include_title() ? "true" : "false") << '\n';
    } else if (read->parsed()) {
      const PipelineConfig c = read_cfg.resolve();
      const Loaded l = load_corpus_and_index(read_idx, c);
      const auto records = read_all(load_questions(read_questions), l, c);
      save_candidate_dump(records, read_out);
      std::cout << "questions=" << records.size() << '\n';
    } else if (trn->parsed()) {
      const PipelineConfig c = train_cfg.resolve();
      const Loaded l = load_corpus_and_index(train_idx, c);
      const FeatureSchema schema = FeatureSchema::for_profile(c.profile);
      // Every dump is validated before any training starts.
      std::vector<NamedQuestions> datasets;
      for (const auto& path : train_datasets) {
        const auto records = load_candidate_dump(path, c.profile, c.top_k_candidates);
        datasets.push_back({dataset_name(path), prepare_questions(records, l.index, l.corpus,
                                                                  schema, c.case_fold_spans)});
      }
      const ModelBundle bundle = train_bundle(datasets, schema, c);
      bundle.save(train_out);
      std::string lines;
      for (const auto& log : bundle.logs)
        for (const auto& line : log.lines()) lines += line + '\n';
      if (!train_log.empty()) write_text(train_log, lines);
      std::cout << "d=" << bundle.schema.dimension() << " m=" << bundle.model.hidden_units()
                << " lambda=" << bundle.lambda << '\n';
    } else if (init->parsed()) {
      const PipelineConfig c = init_cfg.resolve();
      identity_bundle(FeatureSchema::for_profile(c.profile), c.train).save(init_out);
    } else if (rr->parsed() || ev->parsed()) {
      const bool is_rr = rr->parsed();
      const ConfigFlags& flags = is_rr ? rr_cfg : ev_cfg;
      const std::string& model_path = is_rr ? rr_model : ev_model;
      const CandidateSource& src = is_rr ? rr_src : ev_src;
      const auto [c, bundle] = resolve_model(flags, model_path);
      const Loaded l = load_corpus_and_index(is_rr ? rr_idx : ev_idx, c);
      const auto records = src.load(l, c, bundle.schema.profile());
      std::vector<RerankedQuestion> reranked;
      const EvaluationReport report =
          evaluate_with_model(src.name(), records, bundle, l.index, l.corpus, &reranked);
      if (is_rr) {
        std::string lines;
        for (const auto& r : reranked) lines += to_json(r).dump() + '\n';
        write_text(rr_out, lines);
        if (!rr_report.empty()) write_text(rr_report, report.to_json(true).dump(2) + '\n');
        std::cout << "questions=" << report.questions << " em=" << report.em
                  << " baseline_em=" << report.baseline_em << '\n';
      } else {
        const std::string text = report.to_json(ev_verdicts).dump(2) + '\n';
        if (ev_report.empty()) {
          std::cout << text;
          std::cerr << report_table(report);
        } else {
          write_text(ev_report, text);
          std::cout << report_table(report);
        }
      }
    } else if (ab->parsed()) {
      const PipelineConfig c = ab_cfg.resolve();
      const Loaded l = load_corpus_and_index(ab_idx, c);
      const FeatureSchema schema = FeatureSchema::for_profile(c.profile);
      std::vector<NamedQuestions> datasets;
      for (const auto& path : ab_datasets) {
        const auto records = load_candidate_dump(path, c.profile, c.top_k_candidates);
        datasets.push_back({dataset_name(path), prepare_questions(records, l.index, l.corpus,
                                                                  schema, c.case_fold_spans)});
      }
      const auto eval_records = load_candidate_dump(ab_eval, c.profile, c.top_k_candidates);
      const auto eval_prepared =
          prepare_questions(eval_records, l.index, l.corpus, schema, c.case_fold_spans);
      const auto groups = ab_groups.empty() ? applicable_ablation_groups(schema) : ab_groups;
      const auto rows = run_ablation(datasets, eval_records, eval_prepared, schema, c, groups);
      std::ostringstream csv;
      write_ablation_csv(rows, csv);
      if (ab_out.empty()) {
        std::cout << csv.str();
        std::cerr << ablation_table(rows);
      } else {
        write_text(ab_out, csv.str());
        std::cout << ablation_table(rows);
      }
    } else if (sw->parsed()) {
      const auto [c, bundle] = resolve_model(sw_cfg, sw_model);
      const auto toy = synthetic::make_toy_dataset(sw_toy_seed, sw_toy_docs, sw_toy_questions);
      const std::uint64_t seed = c.train.seed;
      CorpusGenerator gen_fn;
      if (sw_family == "noisy") {
        gen_fn = [&](std::size_t n) { return synthetic::make_noisy_sweep_corpus(toy, n, seed); };
      } else {
        gen_fn = [&](std::size_t n) {
          return synthetic::make_disjoint_sweep_corpus(toy, n, seed, c.num_buckets);
        };
      }
      const auto rows = corpus_sweep(gen_fn, toy.questions, sw_sizes, bundle, c);
      std::ostringstream csv;
      write_sweep_csv(rows, csv);
      if (sw_out.empty()) {
        std::cout << csv.str();
        std::cerr << sweep_table(rows);
      } else {
        write_text(sw_out, csv.str());
        std::cout << sweep_table(rows);
      }
    } else if (gen->parsed()) {
      const auto toy = synthetic::make_toy_dataset(gen_seed, gen_docs, gen_qs);
      save_corpus(toy.documents, gen_corpus);
      save_questions(toy.questions, gen_questions);
      std::cout << "documents=" << toy.documents.size() << " questions=" << toy.questions.size()
                << '\n';
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
