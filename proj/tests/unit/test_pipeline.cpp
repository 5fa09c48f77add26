#include <gtest/gtest.h>

#include <filesystem>

#include "conceptforge/pipeline.hpp"
#include "conceptforge/serve.hpp"
#include "fixtures.hpp"

using namespace conceptforge;

namespace {

PipelineInputs medical_inputs() {
  PipelineInputs in;
  in.log_path = fixture::data_path("medical/log.jsonl");
  in.patterns_path = fixture::data_path("medical/patterns.txt");
  in.kg_path = fixture::data_path("medical/kg.tsv");
  in.stopwords_path = fixture::data_path("medical/stopwords.txt");
  in.seeds_path = fixture::data_path("selftrain/seeds.conll");
  in.unlabeled_path = fixture::data_path("selftrain/unlabeled.txt");
  in.lexicon_path = fixture::data_path("selftrain/lexicon.txt");
  in.taxonomy_config_path = fixture::data_path("taxonomy/config.json");
  return in;
}

}  // namespace

TEST(Pipeline, MedicalEndToEnd) {
  auto out = run_pipeline(medical_inputs(), {});
  EXPECT_TRUE(out.ingest_errors.empty());
  auto snap = snapshot_from_json(out.snapshot_json);
  EXPECT_GT(snap.version, 1u);
  ASSERT_TRUE(snap.nodes.count("body integrity identity disorder"));
  auto idx = deserialize_index(out.index_bytes);
  EXPECT_EQ(idx.snapshot_version, snap.version);
  auto hit = lookup_instances(idx, "rare mental disorder", 10);
  ASSERT_TRUE(hit.found);
  EXPECT_NE(std::find(hit.instances.begin(), hit.instances.end(), "body integrity identity disorder"),
            hit.instances.end());

  auto dir = (std::filesystem::temp_directory_path() / "cf_pipeline_out").string();
  write_pipeline_outputs(dir, out);
  EXPECT_EQ(read_file(dir + "/snapshot.json"), out.snapshot_json);
  EXPECT_EQ(read_file(dir + "/index.bin"), out.index_bytes);
}

TEST(Pipeline, MissingInputThrows) {
  auto in = medical_inputs();
  in.kg_path = "/nonexistent/kg.tsv";
  EXPECT_THROW(run_pipeline(in, {}), Error);
}
