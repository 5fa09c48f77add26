// conceptforge command-line front end.

#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>

#include "conceptforge/bootstrap.hpp"
#include "conceptforge/evalsim.hpp"
#include "conceptforge/phrasemine.hpp"
#include "conceptforge/pipeline.hpp"
#include "conceptforge/selftrain.hpp"
#include "conceptforge/serve.hpp"
#include "conceptforge/taxonomy.hpp"

using namespace conceptforge;
using nlohmann::json;

namespace {

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    write_file(out_path, text);
  }
}

void report_log_errors(const QueryLog& log) {
  for (const auto& e : log.errors) std::cerr << "line " << e.line << ": " << e.message << '\n';
}

std::vector<std::vector<std::string>> read_phrase_lines(const std::string& path, TokenizerMode mode) {
  return load_sentences(path, mode);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conceptforge: concept mining and evolving taxonomy toolkit"};
  app.require_subcommand(1);
  std::string tokenizer = "whitespace";
  app.add_option("--tokenizer", tokenizer, "whitespace|unigram-char")->check(CLI::IsMember({"whitespace", "unigram-char"}));

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Parse and normalize a query log");
  std::string log_path, stopwords_path, out_path;
  ingest->add_option("--log", log_path)->required();
  ingest->add_option("--stopwords", stopwords_path);
  ingest->add_option("--out", out_path, "normalized JSONL output");
  ingest->add_option("--tokenizer", tokenizer)->check(CLI::IsMember({"whitespace", "unigram-char"}));

  // bootstrap
  auto* boot = app.add_subcommand("bootstrap", "Pattern bootstrapping with alignment consensus");
  std::string patterns_path, disc_path;
  BootstrapConfig bcfg;
  boot->add_option("--log", log_path)->required();
  boot->add_option("--patterns", patterns_path)->required();
  boot->add_option("--alpha", bcfg.filter.alpha);
  boot->add_option("--beta", bcfg.filter.beta);
  boot->add_option("--delta", bcfg.filter.delta);
  boot->add_option("--iters", bcfg.iters);
  boot->add_option("--min-align-len", bcfg.alignment.min_align_len);
  boot->add_option("--min-title-hits", bcfg.alignment.min_title_hits);
  boot->add_option("--discriminator-train", disc_path, "phrase<TAB>concept|instance TSV");
  boot->add_option("--out", out_path);
  boot->add_option("--tokenizer", tokenizer)->check(CLI::IsMember({"whitespace", "unigram-char"}));

  // phrasemine
  auto* pm = app.add_subcommand("phrasemine", "Long-tail phrase mining and concept classification");
  std::string kg_path, model_out;
  PhraseMineConfig pcfg;
  std::string neg_rule = "negation";
  pm->add_option("--log", log_path)->required();
  pm->add_option("--kg", kg_path)->required();
  pm->add_option("--stopwords", stopwords_path);
  pm->add_option("--max-len", pcfg.max_len);
  pm->add_option("--min-support", pcfg.min_support);
  pm->add_option("--theta-cls", pcfg.theta_cls);
  pm->add_option("--negatives", neg_rule)->check(CLI::IsMember({"none", "negation", "negation+shuffle"}));
  pm->add_option("--seed", pcfg.classifier.seed);
  pm->add_option("--holdout", pcfg.classifier.holdout_frac);
  pm->add_option("--model-out", model_out);
  pm->add_option("--out", out_path);
  pm->add_option("--tokenizer", tokenizer)->check(CLI::IsMember({"whitespace", "unigram-char"}));

  // selftrain
  auto* st = app.add_subcommand("selftrain", "Self-training with ensemble consensus");
  std::string seeds_path, unlabeled_path, lexicon_path, heldout_path, pool_out;
  SelfTrainConfig scfg;
  std::string consensus = "sentence";
  st->add_option("--seeds", seeds_path)->required();
  st->add_option("--unlabeled", unlabeled_path)->required();
  st->add_option("--lexicon", lexicon_path)->required();
  st->add_option("--iters", scfg.iters);
  st->add_option("--sigma", scfg.sigma);
  st->add_option("--rng-seed", scfg.rng_seed);
  st->add_option("--sample-frac", scfg.sample_frac);
  st->add_option("--passes-per-round", scfg.passes_per_round);
  st->add_option("--batch", scfg.window.batch_size);
  st->add_option("--consensus", consensus)->check(CLI::IsMember({"sentence", "span"}));
  st->add_option("--heldout", heldout_path);
  st->add_option("--model-out", model_out);
  st->add_option("--pool-out", pool_out);
  st->add_option("--out", out_path, "report JSON");
  st->add_option("--tokenizer", tokenizer)->check(CLI::IsMember({"whitespace", "unigram-char"}));

  // taxonomy-init
  auto* tinit = app.add_subcommand("taxonomy-init", "Assemble an initial snapshot");
  std::string init_path, entities_path;
  tinit->add_option("--input", init_path, "concepts/edges JSON")->required();
  tinit->add_option("--log", log_path, "query log for key-entity selection");
  tinit->add_option("--entities", entities_path, "entity lexicon, one per line");
  tinit->add_option("--out", out_path)->required();
  tinit->add_option("--tokenizer", tokenizer)->check(CLI::IsMember({"whitespace", "unigram-char"}));

  // taxonomy-update
  auto* tup = app.add_subcommand("taxonomy-update", "Apply daily updates from a log");
  std::string snapshot_path, config_path, synonyms_path, date_str;
  TaxonomyConfig tcfg;
  tup->add_option("--snapshot", snapshot_path)->required();
  tup->add_option("--log", log_path);
  tup->add_option("--config", config_path, "taxonomy config JSON");
  tup->add_option("--synonyms", synonyms_path, "surface<TAB>canonical TSV");
  tup->add_option("--window", tcfg.window);
  tup->add_option("--delta-t", tcfg.delta_t);
  tup->add_option("--date", date_str, "update an empty day");
  tup->add_option("--out", out_path);
  tup->add_option("--tokenizer", tokenizer)->check(CLI::IsMember({"whitespace", "unigram-char"}));

  // export-series
  auto* ex = app.add_subcommand("export-series", "Per-day parent scores for one instance");
  std::string instance;
  ex->add_option("--snapshot", snapshot_path)->required();
  ex->add_option("--instance", instance)->required();
  ex->add_option("--out", out_path);

  // tag / rewrite
  auto* tag = app.add_subcommand("tag", "Maximum forward matching against a snapshot");
  std::string query;
  tag->add_option("--snapshot", snapshot_path)->required();
  tag->add_option("--query", query)->required();
  tag->add_option("--tokenizer", tokenizer)->check(CLI::IsMember({"whitespace", "unigram-char"}));

  auto* rw = app.add_subcommand("rewrite", "Append the best concept to a text");
  bool all_concepts = false;
  rw->add_option("--snapshot", snapshot_path)->required();
  rw->add_option("--text", query)->required();
  rw->add_flag("--all-concepts", all_concepts);
  rw->add_option("--tokenizer", tokenizer)->check(CLI::IsMember({"whitespace", "unigram-char"}));

  // index
  auto* idx = app.add_subcommand("index", "Reverse concept -> instance index");
  idx->require_subcommand(1);
  auto* idx_build = idx->add_subcommand("build");
  std::string index_path, concept_id;
  std::size_t k = 10;
  idx_build->add_option("--snapshot", snapshot_path)->required();
  idx_build->add_option("--out", index_path)->required();
  auto* idx_lookup = idx->add_subcommand("lookup");
  idx_lookup->add_option("--index", index_path)->required();
  idx_lookup->add_option("--concept", concept_id)->required();
  idx_lookup->add_option("--k", k)->check(CLI::PositiveNumber);

  // eval
  auto* ev = app.add_subcommand("eval", "Exact match and token F1 against a gold set");
  std::string gold_path, pred_path;
  ev->add_option("--gold", gold_path)->required();
  ev->add_option("--pred", pred_path)->required();
  ev->add_option("--tokenizer", tokenizer)->check(CLI::IsMember({"whitespace", "unigram-char"}));

  auto* evi = app.add_subcommand("eval-isa", "Sampled isA precision");
  std::string judgments_path;
  std::size_t sample_n = 1000;
  std::uint64_t seed = 7;
  evi->add_option("--snapshot", snapshot_path)->required();
  evi->add_option("--judgments", judgments_path)->required();
  evi->add_option("--sample-n", sample_n);
  evi->add_option("--seed", seed);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate synthetic behavior logs");
  std::string scenario_path, snapshot_out;
  sim->add_option("--scenario", scenario_path)->required();
  sim->add_option("--seed", seed);
  sim->add_option("--out", out_path)->required();
  sim->add_option("--snapshot-out", snapshot_out, "initial snapshot with the planted edges");

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "Run every stage end to end");
  PipelineInputs pin;
  std::string out_dir;
  std::string tcfg_path;
  pipe->add_option("--log", pin.log_path)->required();
  pipe->add_option("--patterns", pin.patterns_path)->required();
  pipe->add_option("--kg", pin.kg_path)->required();
  pipe->add_option("--stopwords", stopwords_path);
  pipe->add_option("--seeds", pin.seeds_path)->required();
  pipe->add_option("--unlabeled", pin.unlabeled_path)->required();
  pipe->add_option("--lexicon", pin.lexicon_path)->required();
  pipe->add_option("--taxonomy-config", tcfg_path);
  pipe->add_option("--rng-seed", scfg.rng_seed);
  pipe->add_option("--out-dir", out_dir)->required();
  pipe->add_option("--tokenizer", tokenizer)->check(CLI::IsMember({"whitespace", "unigram-char"}));

  CLI11_PARSE(app, argc, argv);
  const auto mode = parse_tokenizer_mode(tokenizer);

  try {
    if (*ingest) {
      auto log = load_query_log(log_path);
      report_log_errors(log);
      StopwordList stop = stopwords_path.empty() ? StopwordList() : StopwordList::load(stopwords_path);
      std::size_t tokens = 0, kept = 0;
      for (const auto& r : log.records) {
        auto ts = tokenize(normalize_text(r.query), mode);
        tokens += ts.tokens.size();
        kept += filter_stopwords(ts, stop).tokens.size();
      }
      if (!out_path.empty()) write_query_log(out_path, log.records);
      std::cout << json{{"records", log.records.size()},
                        {"errors", log.errors.size()},
                        {"tokens", tokens},
                        {"tokens_after_stopwords", kept}}
                       .dump()
                << '\n';
      return log.errors.empty() ? 0 : 2;
    }
    if (*boot) {
      auto log = load_query_log(log_path);
      report_log_errors(log);
      bcfg.tokenizer = mode;
      auto patterns = load_patterns(patterns_path, mode);
      auto result = run_bootstrap(log.records, patterns, bcfg);
      if (!disc_path.empty()) {
        auto labeled = load_discriminator_tsv(disc_path);
        auto stats = CorpusStats::build(log.records, mode);
        std::vector<std::vector<double>> X;
        std::vector<int> y;
        for (const auto& lp : labeled) {
          ConceptCandidate c;
          c.tokens = to_tokens(lp.phrase, mode);
          c.text = join_tokens(c.tokens, mode);
          X.push_back(featurize_candidate(c, stats).as_vector());
          y.push_back(lp.label == Verdict::concept_phrase ? 1 : 0);
        }
        auto model = DiscriminatorModel::train(X, y, {});
        for (auto& c : result.concepts) {
          c.features = featurize_candidate(c, stats);
          c.verdict = discriminate_concept(c.features, model).verdict;
        }
      }
      emit(out_path, bootstrap_result_to_json(result));
      return 0;
    }
    if (*pm) {
      auto log = load_query_log(log_path);
      report_log_errors(log);
      StopwordList stop = stopwords_path.empty() ? StopwordList() : StopwordList::load(stopwords_path);
      pcfg.tokenizer = mode;
      pcfg.classifier.negative_rule = parse_negative_rule(neg_rule);
      auto result = run_phrasemine(log.records, load_kg_tsv(kg_path), stop, pcfg);
      if (!model_out.empty()) write_file(model_out, result.classifier.model.to_json());
      emit(out_path, phrasemine_result_to_json(result));
      return 0;
    }
    if (*st) {
      scfg.consensus = consensus == "span" ? ConsensusMode::span : ConsensusMode::sentence;
      auto seeds = load_conll(seeds_path);
      auto unlabeled = load_sentences(unlabeled_path, mode);
      auto lexicon = read_phrase_lines(lexicon_path, mode);
      std::vector<TaggedSequence> heldout;
      if (!heldout_path.empty()) heldout = load_conll(heldout_path);
      auto result = self_train(seeds, unlabeled, lexicon, scfg, heldout);
      for (const auto& r : result.rounds)
        if (r.warning_no_consensus) std::cerr << "warning: round " << r.round << " admitted no consensus samples\n";
      if (!model_out.empty()) write_file(model_out, result.window.to_json());
      if (!pool_out.empty()) {
        std::vector<TaggedSequence> pool;
        for (const auto& e : result.pool) pool.push_back(e.sample);
        write_file(pool_out, to_conll(pool));
      }
      emit(out_path, self_train_report_json(result, scfg));
      return 0;
    }
    if (*tinit) {
      auto in = parse_init_input(read_file(init_path), mode);
      std::vector<QueryLogRecord> records;
      if (!log_path.empty()) {
        auto log = load_query_log(log_path);
        report_log_errors(log);
        records = std::move(log.records);
      }
      std::set<std::string> entities;
      if (!entities_path.empty())
        for (const auto& line : read_lines(entities_path))
          if (!trim(line).empty()) entities.insert(normalize_text(line));
      save_snapshot(out_path, assemble_snapshot(in, mode, records, entities));
      return 0;
    }
    if (*tup) {
      auto snap = load_snapshot(snapshot_path);
      if (!config_path.empty()) {
        auto file_cfg = load_taxonomy_config(config_path);
        // Command-line values override the file only when given explicitly.
        if (tup->count("--window")) file_cfg.window = tcfg.window;
        if (tup->count("--delta-t")) file_cfg.delta_t = tcfg.delta_t;
        tcfg = file_cfg;
      }
      tcfg.tokenizer = mode;
      if (!synonyms_path.empty()) {
        auto aligned = align_synonyms(snap, SynonymDict::load(synonyms_path));
        for (const auto& m : aligned.log) std::cerr << "synonyms: " << m.note << ": " << m.from << " -> " << m.into << '\n';
        snap = std::move(aligned.snapshot);
      }
      std::vector<UpdateLog> logs;
      if (!log_path.empty()) {
        auto log = load_query_log(log_path);
        report_log_errors(log);
        snap = replay_days(std::move(snap), log.records, tcfg, &logs);
      }
      if (!date_str.empty()) {
        auto res = daily_update(snap, Date::parse(date_str), {}, tcfg);
        snap = std::move(res.snapshot);
        logs.push_back(std::move(res.log));
      }
      for (const auto& l : logs)
        for (const auto& m : l.messages) std::cerr << m << '\n';
      auto text = snapshot_to_json(snap);
      emit(out_path.empty() ? snapshot_path : out_path, text);
      return 0;
    }
    if (*ex) {
      auto snap = load_snapshot(snapshot_path);
      auto id = normalize_text(instance);
      emit(out_path, series_to_csv(id, export_timeseries(snap, id)));
      return 0;
    }
    if (*tag) {
      auto snap = load_snapshot(snapshot_path);
      auto trie = MatchTrie::build(snap, mode);
      json out = json::array();
      for (const auto& m : tag_query(query, trie))
        out.push_back({{"begin", m.span.begin}, {"end", m.span.end}, {"id", m.node_id}});
      std::cout << out.dump() << '\n';
      return 0;
    }
    if (*rw) {
      auto snap = load_snapshot(snapshot_path);
      auto trie = MatchTrie::build(snap, mode);
      std::cout << rewrite_text(normalize_text(query), snap, trie, all_concepts) << '\n';
      return 0;
    }
    if (*idx_build) {
      save_index(index_path, build_reverse_index(load_snapshot(snapshot_path)));
      return 0;
    }
    if (*idx_lookup) {
      auto index = load_index(index_path);
      auto r = lookup_instances(index, normalize_text(concept_id), k);
      std::cout << json{{"found", r.found}, {"snapshot_version", index.snapshot_version}, {"instances", r.instances}}.dump()
                << '\n';
      return r.found ? 0 : 3;
    }
    if (*ev) {
      auto r = evaluate_phrases(load_gold_tsv(gold_path), load_predictions_tsv(pred_path), mode);
      std::cout << json{{"n", r.n}, {"exact_match", r.exact_match}, {"f1", r.f1}, {"missing", r.missing_predictions}}.dump()
                << '\n';
      return 0;
    }
    if (*evi) {
      auto r = eval_isa_precision(load_snapshot(snapshot_path), sample_n, seed, load_judgments(judgments_path));
      std::cout << json{{"sampled", r.sampled},
                        {"judged", r.judged},
                        {"correct", r.correct},
                        {"unjudged", r.unjudged},
                        {"precision", r.precision},
                        {"mean_instances_per_concept", r.mean_instances_per_concept},
                        {"max_instances_per_concept", r.max_instances_per_concept}}
                       .dump()
                << '\n';
      return 0;
    }
    if (*sim) {
      auto sc = load_scenario(scenario_path);
      write_query_log(out_path, generate_synthetic_logs(sc, seed));
      if (!snapshot_out.empty()) save_snapshot(snapshot_out, scenario_snapshot(sc));
      return 0;
    }
    if (*pipe) {
      PipelineConfig cfg;
      cfg.tokenizer = mode;
      cfg.selftrain = scfg;
      if (!stopwords_path.empty()) pin.stopwords_path = stopwords_path;
      if (!tcfg_path.empty()) pin.taxonomy_config_path = tcfg_path;
      write_pipeline_outputs(out_dir, run_pipeline(pin, cfg));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
