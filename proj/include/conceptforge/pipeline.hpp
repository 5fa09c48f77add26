#pragma once
// Offline mining orchestration: ingest, concept acquisition, long-tail mining,
// self-training, taxonomy assembly and daily evolution, reverse index.

#include <optional>
#include <string>
#include <vector>

#include "conceptforge/bootstrap.hpp"
#include "conceptforge/phrasemine.hpp"
#include "conceptforge/selftrain.hpp"
#include "conceptforge/taxonomy.hpp"

namespace conceptforge {

struct PipelineInputs {
  std::string log_path;
  std::string patterns_path;
  std::string kg_path;
  std::optional<std::string> stopwords_path;
  std::string seeds_path;      // CoNLL
  std::string unlabeled_path;  // one sentence per line
  std::string lexicon_path;    // one phrase per line
  std::optional<std::string> taxonomy_config_path;
};

struct PipelineConfig {
  TokenizerMode tokenizer = TokenizerMode::whitespace;
  BootstrapConfig bootstrap;
  PhraseMineConfig phrasemine;
  SelfTrainConfig selftrain;
  LinkConfig link;
  TaxonomyConfig taxonomy;
};

/// Serialized output of every stage, in stage order.
struct PipelineOutputs {
  std::string ingest_jsonl;
  std::string ingest_errors;
  std::string bootstrap_json;
  std::string phrasemine_json;
  std::string selftrain_report_json;
  std::string window_model_json;
  std::string initial_snapshot_json;
  std::string snapshot_json;
  std::string index_bytes;

  bool operator==(const PipelineOutputs&) const = default;
};

PipelineOutputs run_pipeline(const PipelineInputs& in, const PipelineConfig& cfg);

/// Writes each output under `dir` with a fixed file name.
void write_pipeline_outputs(const std::string& dir, const PipelineOutputs& out);

}  // namespace conceptforge
