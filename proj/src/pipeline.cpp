#include "conceptforge/pipeline.hpp"

#include <filesystem>
#include <set>

#include "conceptforge/serve.hpp"

namespace conceptforge {

PipelineOutputs run_pipeline(const PipelineInputs& in, const PipelineConfig& cfg) {
  PipelineOutputs out;
  const auto mode = cfg.tokenizer;

  auto log = load_query_log(in.log_path);
  for (const auto& r : log.records) out.ingest_jsonl += to_jsonl(r) + "\n";
  for (const auto& e : log.errors) out.ingest_errors += std::to_string(e.line) + "\t" + e.message + "\n";
  const auto& records = log.records;

  auto bcfg = cfg.bootstrap;
  bcfg.tokenizer = mode;
  auto patterns = load_patterns(in.patterns_path, mode);
  auto boot = run_bootstrap(records, patterns, bcfg);
  out.bootstrap_json = bootstrap_result_to_json(boot);

  auto kg = load_kg_tsv(in.kg_path);
  StopwordList stop = in.stopwords_path ? StopwordList::load(*in.stopwords_path) : StopwordList();
  auto pcfg = cfg.phrasemine;
  pcfg.tokenizer = mode;
  auto mined = run_phrasemine(records, kg, stop, pcfg);
  out.phrasemine_json = phrasemine_result_to_json(mined);

  auto seeds = load_conll(in.seeds_path);
  auto unlabeled = load_sentences(in.unlabeled_path, mode);
  auto lexicon = load_sentences(in.lexicon_path, mode);
  auto st = self_train(seeds, unlabeled, lexicon, cfg.selftrain);
  out.selftrain_report_json = self_train_report_json(st, cfg.selftrain);
  out.window_model_json = st.window.to_json();

  // Concept set: bootstrap acceptances, KG concept labels, and spans the final
  // tagger finds in the query stream.
  std::set<std::string> concepts;
  for (const auto& c : boot.concepts) concepts.insert(join_tokens(c.tokens, mode));
  for (const auto& k : kg) concepts.insert(join_tokens(to_tokens(k.concept_id, mode), mode));
  for (const auto& r : records) {
    auto toks = to_tokens(r.query, mode);
    auto tags = st.window.tag(toks);
    for (const auto& s : spans_of(tags)) {
      if (s.size() < 2) continue;
      concepts.insert(join_tokens({toks.begin() + static_cast<std::ptrdiff_t>(s.begin),
                                   toks.begin() + static_cast<std::ptrdiff_t>(s.end)},
                                  mode));
    }
  }

  std::set<std::string> instances;
  ClassifierLinks links;
  for (const auto& k : kg) instances.insert(join_tokens(to_tokens(k.phrase, mode), mode));
  for (const auto& p : mined.phrases) {
    if (!p.concept_label || concepts.count(p.text)) continue;
    instances.insert(p.text);
    links.emplace_back(p.text, p.concept_label->concept_id);
  }
  for (const auto& c : concepts) instances.erase(c);

  auto lcfg = cfg.link;
  lcfg.tokenizer = mode;
  std::vector<std::string> inst_vec(instances.begin(), instances.end());
  std::vector<std::string> concept_vec(concepts.begin(), concepts.end());
  InitInput init;
  for (const auto& c : concepts) init.concepts.push_back({c, Level::level3, false, false, std::nullopt});
  init.edges = link_instances(inst_vec, concept_vec, records, lcfg, links);
  std::set<std::string> entity_lexicon(instances.begin(), instances.end());
  if (!records.empty()) {
    Date first = records.front().date;
    for (const auto& r : records) first = std::min(first, r.date);
    init.date = first.plus_days(-1);
  }
  auto snap = assemble_snapshot(init, mode, records, entity_lexicon);
  out.initial_snapshot_json = snapshot_to_json(snap);

  auto tcfg = in.taxonomy_config_path ? load_taxonomy_config(*in.taxonomy_config_path) : cfg.taxonomy;
  tcfg.tokenizer = mode;
  snap = replay_days(std::move(snap), records, tcfg);
  out.snapshot_json = snapshot_to_json(snap);
  out.index_bytes = serialize_index(build_reverse_index(snap));
  return out;
}

void write_pipeline_outputs(const std::string& dir, const PipelineOutputs& out) {
  std::filesystem::create_directories(dir);
  auto path = [&](const char* name) { return (std::filesystem::path(dir) / name).string(); };
  write_file(path("ingest.jsonl"), out.ingest_jsonl);
  write_file(path("ingest_errors.tsv"), out.ingest_errors);
  write_file(path("bootstrap.json"), out.bootstrap_json);
  write_file(path("phrasemine.json"), out.phrasemine_json);
  write_file(path("selftrain_report.json"), out.selftrain_report_json);
  write_file(path("window_tagger.json"), out.window_model_json);
  write_file(path("snapshot_initial.json"), out.initial_snapshot_json);
  write_file(path("snapshot.json"), out.snapshot_json);
  write_file(path("index.bin"), out.index_bytes);
}

}  // namespace conceptforge
