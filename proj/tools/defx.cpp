// defx command-line interface: train/eval/crossval/predict/scan/segment/
// ensemble/agreement over the core library. Every output artifact embeds the
// resolved run configuration for provenance.
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "defx/corpus.hpp"
#include "defx/crf.hpp"
#include "defx/eval.hpp"
#include "defx/io.hpp"
#include "defx/pipeline.hpp"
#include "defx/synthetic.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace defx;

namespace {

struct TrainFlags {
  std::string data;
  int epochs = 50;
  double lr = 0.1;
  double l2 = 1e-4;
  std::size_t batch = 16;
  std::size_t max_len = 512;
  std::uint64_t seed = 13;

  // crossval derives per-fold seeds from its own --seed, so it skips this one
  void attach(CLI::App* cmd, bool with_seed = true) {
    cmd->add_option("--data", data, "Labeled dataset (.conll or .jsonl)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--epochs", epochs, "Training epochs")->check(CLI::Range(1, 1000000));
    cmd->add_option("--lr", lr, "Learning rate")->check(CLI::PositiveNumber);
    cmd->add_option("--l2", l2, "L2 regularization")->check(CLI::NonNegativeNumber);
    cmd->add_option("--batch", batch, "Mini-batch size")->check(CLI::Range(1, 1 << 20));
    cmd->add_option("--max-len", max_len, "Maximum sentence length")
        ->check(CLI::Range(1, 1 << 20));
    if (with_seed) cmd->add_option("--seed", seed, "Random seed");
  }

  TrainConfig config() const {
    TrainConfig c;
    c.epochs = epochs;
    c.learning_rate = lr;
    c.l2 = l2;
    c.batch_size = batch;
    c.max_sentence_length = max_len;
    c.seed = seed;
    return c;
  }

  json to_json() const {
    return json{{"data", data},   {"epochs", epochs},    {"learning_rate", lr},
                {"l2", l2},       {"batch_size", batch}, {"max_sentence_length", max_len},
                {"seed", seed}};
  }
};

// feature-side inputs shared by most subcommands
struct FxFlags {
  std::string patterns;
  std::string annotations;

  void attach(CLI::App* cmd) {
    cmd->add_option("--patterns", patterns, "Pattern inventory file")
        ->check(CLI::ExistingFile);
    cmd->add_option("--annotations", annotations,
                    "Precomputed POS/dependency/entity annotation JSONL")
        ->check(CLI::ExistingFile);
  }

  // the returned extractor references `storage`; keep it alive while used
  FeatureExtractor build(AnnotationMap& storage) const {
    FeatureExtractor fx = patterns.empty()
                              ? FeatureExtractor()
                              : FeatureExtractor(PatternInventory::load(patterns));
    if (!annotations.empty()) {
      storage = load_annotations(annotations);
      fx.set_annotations(&storage);
    }
    return fx;
  }

  json to_json() const {
    return json{{"patterns", patterns}, {"annotations", annotations}};
  }
};

struct HeurFlags {
  std::size_t max_gap = 3;
  bool no_stitch = false;
  bool no_filter = false;
  bool no_repair = false;
  bool unbounded_gap = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--max-gap", max_gap, "Stitching gap bound in tokens");
    cmd->add_flag("--unbounded-gap", unbounded_gap, "Stitch across any gap");
    cmd->add_flag("--no-stitch", no_stitch, "Disable span stitching");
    cmd->add_flag("--no-filter", no_filter, "Disable the consistency filter");
    cmd->add_flag("--no-repair", no_repair, "Disable BIO repair");
  }

  HeuristicsConfig config() const {
    HeuristicsConfig h;
    h.max_gap = unbounded_gap ? kUnboundedGap : max_gap;
    h.enable_stitch = !no_stitch;
    h.enable_filter = !no_filter;
    h.enable_repair = !no_repair;
    return h;
  }

  json to_json() const {
    return json{{"max_gap", unbounded_gap ? json("unbounded") : json(max_gap)},
                {"enable_stitch", !no_stitch},
                {"enable_filter", !no_filter},
                {"enable_repair", !no_repair}};
  }
};

json with_run_config(const std::string& command, json run, json payload) {
  run["command"] = command;
  payload["run_config"] = std::move(run);
  return payload;
}

std::vector<SentencePrediction> predict_postprocessed(const CrfModel& model,
                                                      const std::vector<Sentence>& sentences,
                                                      const FeatureExtractor& fx,
                                                      const ScoreMap* scores,
                                                      const HeuristicsConfig& heur,
                                                      bool constrained) {
  auto raw = predict(model, sentences, fx, scores, constrained);
  std::vector<SentencePrediction> out;
  out.reserve(raw.size());
  for (auto& tags : raw) out.push_back(postprocess(std::move(tags), heur));
  return out;
}

std::vector<RawDocument> collect_documents(const std::vector<std::string>& paths) {
  std::vector<std::string> files;
  for (const std::string& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<std::string> in_dir;
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.is_regular_file() && entry.path().extension() == ".txt") {
          in_dir.push_back(entry.path().string());
        }
      }
      std::sort(in_dir.begin(), in_dir.end());
      files.insert(files.end(), in_dir.begin(), in_dir.end());
    } else if (fs::exists(p)) {
      files.push_back(p);
    } else {
      throw Error("no such file or directory: " + p);
    }
  }
  std::vector<RawDocument> docs;
  docs.reserve(files.size());
  for (const std::string& f : files) {
    docs.push_back({fs::path(f).stem().string(), read_file(f)});
  }
  return docs;
}

int cmd_train(const TrainFlags& tf, const FxFlags& ff, const std::string& out,
              const std::string& format, const std::string& log_path) {
  Dataset data = load_dataset(tf.data);
  AnnotationMap ann;
  FeatureExtractor fx = ff.build(ann);
  TrainResult result = train(data, fx, tf.config());
  save_model(result.model, out, format == "json" ? ModelFormat::Json : ModelFormat::Binary);

  json run = tf.to_json();
  run["features"] = ff.to_json();
  json log = with_run_config("train", std::move(run),
                             json{{"model", out},
                                  {"format", format},
                                  {"sentences", data.sentences.size()},
                                  {"features", result.model.num_features()},
                                  {"truncated_sentences", result.truncated_sentences},
                                  {"epoch_nll", result.epoch_nll}});
  write_file(log_path.empty() ? out + ".log.json" : log_path, log.dump(2) + "\n");
  std::cerr << "trained " << result.model.num_features() << " features over "
            << data.sentences.size() << " sentences -> " << out << "\n";
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                const std::string& out, const std::string& scores_path, bool constrained,
                bool post, const FxFlags& ff, const HeurFlags& hf) {
  CrfModel model = load_model(model_path);
  Dataset data = load_dataset(data_path);
  AnnotationMap ann;
  FeatureExtractor fx = ff.build(ann);
  ScoreMap scores;
  if (!scores_path.empty()) scores = load_external_scores(scores_path);
  const ScoreMap* sp = scores_path.empty() ? nullptr : &scores;

  std::vector<Sentence> tagged = data.sentences;
  if (post) {
    auto preds = predict_postprocessed(model, data.sentences, fx, sp, hf.config(), constrained);
    for (std::size_t i = 0; i < tagged.size(); ++i) tagged[i].gold_tags = preds[i].tags;
  } else {
    auto raw = predict(model, data.sentences, fx, sp, constrained);
    for (std::size_t i = 0; i < tagged.size(); ++i) tagged[i].gold_tags = raw[i];
  }
  write_file(out, write_jsonl(tagged));

  json meta = with_run_config("predict",
                              json{{"model", model_path},
                                   {"data", data_path},
                                   {"scores", scores_path},
                                   {"constrained", constrained},
                                   {"postprocess", post},
                                   {"features", ff.to_json()},
                                   {"heuristics", hf.to_json()}},
                              json{{"sentences", tagged.size()}});
  write_file(out + ".meta.json", meta.dump(2) + "\n");
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& data_path,
             const std::string& scores_path, const std::string& out, bool table,
             const FxFlags& ff, const HeurFlags& hf, bool constrained) {
  CrfModel model = load_model(model_path);
  Dataset data = load_dataset(data_path);
  AnnotationMap ann;
  FeatureExtractor fx = ff.build(ann);
  ScoreMap scores;
  if (!scores_path.empty()) scores = load_external_scores(scores_path);
  const ScoreMap* sp = scores_path.empty() ? nullptr : &scores;

  auto preds = predict_postprocessed(model, data.sentences, fx, sp, hf.config(), constrained);
  EvalReport report = evaluate(data.sentences, preds);

  json payload = with_run_config("eval",
                                 json{{"model", model_path},
                                      {"data", data_path},
                                      {"scores", scores_path},
                                      {"constrained", constrained},
                                      {"features", ff.to_json()},
                                      {"heuristics", hf.to_json()}},
                                 json::parse(report_to_json(report)));
  std::string text = payload.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    write_file(out, text);
  }
  if (table) std::cout << report_to_table(report);
  return 0;
}

int cmd_crossval(const TrainFlags& tf, const FxFlags& ff, int folds, std::uint64_t seed,
                 unsigned jobs, const std::string& out, const std::string& models_dir,
                 bool table, const HeurFlags& hf) {
  Dataset data = load_dataset(tf.data);
  AnnotationMap ann;
  FeatureExtractor fx = ff.build(ann);
  CrossvalResult result = crossval(data, folds, seed, tf.config(), fx, hf.config(), jobs);

  json folds_json = json::array();
  for (const EvalReport& r : result.fold_reports) {
    folds_json.push_back(json::parse(report_to_json(r)));
  }
  json run = tf.to_json();
  run["features"] = ff.to_json();
  run["folds"] = folds;
  run["crossval_seed"] = seed;
  run["heuristics"] = hf.to_json();
  json payload = with_run_config(
      "crossval", std::move(run),
      json{{"folds", std::move(folds_json)}, {"mean", json::parse(report_to_json(result.mean))}});
  std::string text = payload.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    write_file(out, text);
  }
  if (table) std::cout << report_to_table(result.mean);

  if (!models_dir.empty()) {
    fs::create_directories(models_dir);
    for (std::size_t f = 0; f < result.models.size(); ++f) {
      save_model(result.models[f], models_dir + "/fold" + std::to_string(f) + ".bin");
    }
  }
  return 0;
}

int cmd_segment(const std::vector<std::string>& doc_paths, const std::string& out,
                const std::string& abbrev_path) {
  AbbrevList abbrev =
      abbrev_path.empty() ? AbbrevList::defaults() : AbbrevList::load(abbrev_path);
  std::vector<Sentence> all;
  for (const RawDocument& doc : collect_documents(doc_paths)) {
    RawDocument norm = normalize(doc);
    auto sents = segment(norm, abbrev);
    all.insert(all.end(), sents.begin(), sents.end());
  }
  write_file(out, write_jsonl(all));
  json meta = with_run_config("segment",
                              json{{"documents", doc_paths}, {"abbrev", abbrev_path}},
                              json{{"sentences", all.size()}});
  write_file(out + ".meta.json", meta.dump(2) + "\n");
  std::cerr << "wrote " << all.size() << " sentences to " << out << "\n";
  return 0;
}

int cmd_scan(const std::vector<std::string>& doc_paths, const std::string& model_path,
             const std::vector<std::string>& ensemble_paths, const std::string& out,
             const std::string& stats_path, const std::string& scores_path, bool emit_negatives,
             bool constrained, unsigned jobs, const FxFlags& ff, const HeurFlags& hf,
             const std::string& abbrev_path, const std::string& gold_path,
             const std::string& analysis_path) {
  std::vector<CrfModel> models;
  if (!model_path.empty()) models.push_back(load_model(model_path));
  for (const std::string& p : ensemble_paths) models.push_back(load_model(p));
  if (models.empty()) throw Error("scan: provide --model or --ensemble");

  AnnotationMap ann;
  FeatureExtractor fx = ff.build(ann);
  ScoreMap scores;
  if (!scores_path.empty()) scores = load_external_scores(scores_path);
  const ScoreMap* sp = scores_path.empty() ? nullptr : &scores;

  std::vector<RawDocument> docs = collect_documents(doc_paths);
  ScanOptions opt;
  opt.emit_negatives = emit_negatives;
  opt.constrained = constrained;
  if (!abbrev_path.empty()) opt.abbrev = AbbrevList::load(abbrev_path);

  std::vector<ScanResult> results(docs.size());
  auto scan_one = [&](std::size_t i) {
    results[i] = scan_document(docs[i], {models.data(), models.size()}, fx, hf.config(), sp, opt);
  };
  unsigned workers = docs.empty() ? 1 : std::max(1u, std::min<unsigned>(jobs, docs.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < docs.size(); ++i) scan_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next.fetch_add(1); i < docs.size(); i = next.fetch_add(1)) {
            scan_one(i);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::string jsonl;
  ScanStats total;
  std::vector<GlossaryRecord> all_records;
  for (std::size_t i = 0; i < results.size(); ++i) {
    jsonl += glossary_to_jsonl(results[i].records);
    if (emit_negatives) {
      for (const auto& [idx, text] : results[i].negatives) {
        json neg{{"doc_id", docs[i].doc_id},
                 {"sent_index", idx},
                 {"text", text},
                 {"is_definitional", false}};
        jsonl += neg.dump();
        jsonl += '\n';
      }
    }
    total.merge(results[i].stats);
    all_records.insert(all_records.end(), results[i].records.begin(), results[i].records.end());
  }
  write_file(out, jsonl);

  json stats = json::parse(stats_to_json(total));
  json run{{"model", model_path},
           {"ensemble", ensemble_paths},
           {"documents", doc_paths},
           {"scores", scores_path},
           {"emit_negatives", emit_negatives},
           {"constrained", constrained},
           {"features", ff.to_json()},
           {"abbrev", abbrev_path},
           {"heuristics", hf.to_json()}};
  json payload = with_run_config("scan", std::move(run), std::move(stats));
  write_file(stats_path.empty() ? out + ".stats.json" : stats_path, payload.dump(2) + "\n");

  if (!gold_path.empty()) {
    Dataset gold = load_dataset(gold_path);
    TaxonomyReport taxonomy = analyze_predictions(all_records, gold);
    std::string tpath = analysis_path.empty() ? out + ".analysis.json" : analysis_path;
    write_file(tpath, taxonomy_to_json(taxonomy) + "\n");
  }
  std::cerr << "scanned " << total.sentences << " sentences in " << total.documents
            << " documents, " << total.definitional << " definitional\n";
  return 0;
}

int cmd_ensemble(const std::string& data_path, const std::vector<std::string>& model_paths,
                 const std::string& out, const std::string& report_path, bool table,
                 const FxFlags& ff, const HeurFlags& hf) {
  Dataset data = load_dataset(data_path);
  std::vector<CrfModel> models;
  for (const std::string& p : model_paths) models.push_back(load_model(p));
  AnnotationMap ann;
  FeatureExtractor fx = ff.build(ann);

  std::vector<std::vector<std::vector<SlotTag>>> per_model;
  per_model.reserve(models.size());
  for (const CrfModel& m : models) per_model.push_back(predict(m, data.sentences, fx));

  std::vector<SentencePrediction> preds;
  preds.reserve(data.sentences.size());
  for (std::size_t i = 0; i < data.sentences.size(); ++i) {
    std::vector<std::vector<SlotTag>> votes;
    votes.reserve(models.size());
    for (const auto& pm : per_model) votes.push_back(pm[i]);
    preds.push_back(ensemble_vote(votes, hf.config()));
  }

  if (!out.empty()) {
    std::vector<Sentence> tagged = data.sentences;
    for (std::size_t i = 0; i < tagged.size(); ++i) tagged[i].gold_tags = preds[i].tags;
    write_file(out, write_jsonl(tagged));
  }
  if (!report_path.empty() || out.empty() || table) {
    EvalReport report = evaluate(data.sentences, preds);
    json payload = with_run_config("ensemble",
                                   json{{"data", data_path},
                                        {"models", model_paths},
                                        {"features", ff.to_json()},
                                        {"heuristics", hf.to_json()}},
                                   json::parse(report_to_json(report)));
    std::string text = payload.dump(2) + "\n";
    if (report_path.empty()) {
      std::cout << text;
    } else {
      write_file(report_path, text);
    }
    if (table) std::cout << report_to_table(report);
  }
  return 0;
}

int cmd_agreement(const std::string& annotations, const std::string& kind,
                  const std::string& out) {
  AgreementInput input = parse_agreement_jsonl(read_file(annotations));
  SpanKind k = kind == "term" ? SpanKind::Term : SpanKind::Def;
  double alpha = krippendorff_alpha(input, k);
  json payload = with_run_config("agreement",
                                 json{{"annotations", annotations}, {"kind", kind}},
                                 json{{"alpha", alpha}, {"units", input.units.size()}});
  std::cout << "krippendorff_alpha(" << kind << ") = " << alpha << "\n";
  if (!out.empty()) write_file(out, payload.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"defx: CRF definition extraction over scholarly text"};
  app.require_subcommand(1);
  const char* env_config = std::getenv("DEFX_CONFIG");
  app.set_config("--config", env_config ? env_config : "", "Config file (flags win)", false);

  auto* train_cmd = app.add_subcommand("train", "Train a CRF slot tagger");
  TrainFlags train_flags;
  FxFlags train_fx;
  train_flags.attach(train_cmd);
  train_fx.attach(train_cmd);
  std::string train_out, train_format = "bin", train_log;
  train_cmd->add_option("--out", train_out, "Model output path")->required();
  train_cmd->add_option("--format", train_format, "Model container: bin|json")
      ->check(CLI::IsMember({"bin", "json"}));
  train_cmd->add_option("--log", train_log, "Training log path (default <out>.log.json)");

  auto* predict_cmd = app.add_subcommand("predict", "Tag sentences with a trained model");
  std::string p_model, p_data, p_out, p_scores;
  bool p_constrained = false, p_post = false;
  FxFlags p_fx;
  HeurFlags p_heur;
  predict_cmd->add_option("--model", p_model, "Model file")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--data", p_data, "Dataset to tag")
      ->required()
      ->check(CLI::ExistingFile);
  predict_cmd->add_option("--out", p_out, "Output JSONL")->required();
  predict_cmd->add_option("--scores", p_scores, "External token-score JSONL")
      ->check(CLI::ExistingFile);
  predict_cmd->add_flag("--constrained", p_constrained, "BIO-constrained decoding");
  predict_cmd->add_flag("--postprocess", p_post, "Apply heuristic post-processing");
  p_fx.attach(predict_cmd);
  p_heur.attach(predict_cmd);

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model against gold labels");
  std::string e_model, e_data, e_scores, e_out;
  bool e_table = false, e_constrained = false;
  FxFlags e_fx;
  HeurFlags e_heur;
  eval_cmd->add_option("--model", e_model, "Model file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--data", e_data, "Gold dataset")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--scores", e_scores, "External token-score JSONL")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", e_out, "Report path (stdout when omitted)");
  eval_cmd->add_flag("--table", e_table, "Also print a text table");
  eval_cmd->add_flag("--constrained", e_constrained, "BIO-constrained decoding");
  e_fx.attach(eval_cmd);
  e_heur.attach(eval_cmd);

  auto* cv_cmd = app.add_subcommand("crossval", "k-fold cross validation");
  TrainFlags cv_flags;
  FxFlags cv_fx;
  cv_flags.attach(cv_cmd, /*with_seed=*/false);
  cv_fx.attach(cv_cmd);
  int cv_folds = 10;
  std::uint64_t cv_seed = 1;
  unsigned cv_jobs = std::max(1u, std::thread::hardware_concurrency());
  std::string cv_out, cv_models_dir;
  bool cv_table = false;
  HeurFlags cv_heur;
  cv_cmd->add_option("--folds", cv_folds, "Fold count")->check(CLI::Range(2, 1000));
  cv_cmd->add_option("--seed", cv_seed, "Fold split and per-fold training seed");
  cv_cmd->add_option("--jobs", cv_jobs, "Parallel fold workers")->check(CLI::Range(1, 256));
  cv_cmd->add_option("--out", cv_out, "Report path (stdout when omitted)");
  cv_cmd->add_option("--models-dir", cv_models_dir, "Directory for per-fold models");
  cv_cmd->add_flag("--table", cv_table, "Also print a text table of the mean");
  cv_heur.attach(cv_cmd);

  auto* seg_cmd = app.add_subcommand("segment", "Normalize and segment documents to JSONL");
  std::vector<std::string> seg_docs;
  std::string seg_out, seg_abbrev;
  seg_cmd->add_option("--docs", seg_docs, "Document files or directories of .txt")
      ->required()
      ->expected(-1);
  seg_cmd->add_option("--out", seg_out, "Sentence JSONL output")->required();
  seg_cmd->add_option("--abbrev", seg_abbrev, "Abbreviation exception list")
      ->check(CLI::ExistingFile);

  auto* scan_cmd = app.add_subcommand("scan", "Scan documents for term/definition pairs");
  std::vector<std::string> s_docs, s_ensemble;
  std::string s_model, s_out, s_stats, s_scores, s_abbrev, s_gold, s_analysis;
  bool s_neg = false, s_constrained = false;
  unsigned s_jobs = std::max(1u, std::thread::hardware_concurrency());
  FxFlags s_fx;
  HeurFlags s_heur;
  scan_cmd->add_option("--docs", s_docs, "Document files or directories of .txt")
      ->required()
      ->expected(-1);
  scan_cmd->add_option("--model", s_model, "Single model")->check(CLI::ExistingFile);
  scan_cmd->add_option("--ensemble", s_ensemble, "Ensemble model files")
      ->expected(-1)
      ->check(CLI::ExistingFile);
  scan_cmd->add_option("--out", s_out, "Glossary JSONL output")->required();
  scan_cmd->add_option("--stats", s_stats, "Stats JSON path (default <out>.stats.json)");
  scan_cmd->add_option("--scores", s_scores, "External token-score JSONL")
      ->check(CLI::ExistingFile);
  scan_cmd->add_option("--abbrev", s_abbrev, "Abbreviation exception list")
      ->check(CLI::ExistingFile);
  scan_cmd->add_option("--gold", s_gold, "Gold dataset for taxonomy analysis")
      ->check(CLI::ExistingFile);
  scan_cmd->add_option("--analysis", s_analysis,
                       "Taxonomy output (default <out>.analysis.json)");
  scan_cmd->add_flag("--emit-negatives", s_neg, "Also emit non-definitional sentences");
  scan_cmd->add_flag("--constrained", s_constrained, "BIO-constrained decoding");
  scan_cmd->add_option("--jobs", s_jobs, "Parallel documents")->check(CLI::Range(1, 256));
  s_fx.attach(scan_cmd);
  s_heur.attach(scan_cmd);

  auto* ens_cmd = app.add_subcommand("ensemble", "Majority-vote several models over a dataset");
  std::string en_data, en_out, en_report;
  std::vector<std::string> en_models;
  bool en_table = false;
  FxFlags en_fx;
  HeurFlags en_heur;
  ens_cmd->add_option("--data", en_data, "Dataset")->required()->check(CLI::ExistingFile);
  ens_cmd->add_option("--models", en_models, "Model files")
      ->required()
      ->expected(-1)
      ->check(CLI::ExistingFile);
  ens_cmd->add_option("--out", en_out, "Voted predictions JSONL");
  ens_cmd->add_option("--report", en_report, "Evaluation report path");
  ens_cmd->add_flag("--table", en_table, "Also print a text table");
  en_fx.attach(ens_cmd);
  en_heur.attach(ens_cmd);

  auto* agr_cmd = app.add_subcommand("agreement", "Krippendorff's alpha with MASI distance");
  std::string a_file, a_kind = "term", a_out;
  agr_cmd->add_option("--annotations", a_file, "Annotation JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  agr_cmd->add_option("--kind", a_kind, "term|def")->check(CLI::IsMember({"term", "def"}));
  agr_cmd->add_option("--out", a_out, "Result JSON path");

  auto* syn_cmd = app.add_subcommand("make-synthetic", "Write a synthetic cue corpus");
  std::string syn_out;
  std::size_t syn_n = 200;
  std::uint64_t syn_seed = 13;
  syn_cmd->add_option("--out", syn_out, "Output .conll path")->required();
  syn_cmd->add_option("--n", syn_n, "Sentence count")->check(CLI::Range(1, 1 << 20));
  syn_cmd->add_option("--seed", syn_seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (train_cmd->parsed()) {
      return cmd_train(train_flags, train_fx, train_out, train_format, train_log);
    }
    if (predict_cmd->parsed()) {
      return cmd_predict(p_model, p_data, p_out, p_scores, p_constrained, p_post, p_fx, p_heur);
    }
    if (eval_cmd->parsed()) {
      return cmd_eval(e_model, e_data, e_scores, e_out, e_table, e_fx, e_heur, e_constrained);
    }
    if (cv_cmd->parsed()) {
      return cmd_crossval(cv_flags, cv_fx, cv_folds, cv_seed, cv_jobs, cv_out, cv_models_dir,
                          cv_table, cv_heur);
    }
    if (seg_cmd->parsed()) return cmd_segment(seg_docs, seg_out, seg_abbrev);
    if (scan_cmd->parsed()) {
      return cmd_scan(s_docs, s_model, s_ensemble, s_out, s_stats, s_scores, s_neg,
                      s_constrained, s_jobs, s_fx, s_heur, s_abbrev, s_gold, s_analysis);
    }
    if (ens_cmd->parsed()) {
      return cmd_ensemble(en_data, en_models, en_out, en_report, en_table, en_fx, en_heur);
    }
    if (agr_cmd->parsed()) return cmd_agreement(a_file, a_kind, a_out);
    if (syn_cmd->parsed()) {
      write_file(syn_out, write_conll(make_cue_corpus(syn_n, syn_seed)));
      std::cerr << "wrote " << syn_n << " sentences to " << syn_out << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
