#include <gtest/gtest.h>

#include <filesystem>

#include "limra/pipeline.hpp"
#include "test_util.hpp"

namespace limra {
namespace {

namespace fs = std::filesystem;

std::string words(std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += (i ? " w" : "w");
  return s;
}

UnifiedSample with_context(std::string ctx) { return {std::move(ctx), "claim", Label3::kAligned, "d", "1"}; }

TEST(LengthFilter, StrictBoundary) {
  EXPECT_TRUE(filter_by_length(with_context(words(511))));
  EXPECT_FALSE(filter_by_length(with_context(words(512))));
  EXPECT_FALSE(filter_by_length(with_context(words(513))));
  EXPECT_FALSE(filter_by_length(with_context("   ")));
  EXPECT_TRUE(filter_by_length(with_context(words(9)), 10));
  EXPECT_FALSE(filter_by_length(with_context(words(10)), 10));
}

TEST(QaClaim, Concatenates) {
  const QaSample qa{"p", "Who wrote Hamlet?", "Shakespeare", {}};
  EXPECT_EQ(qa_to_claim(qa, qa.true_answer), "Who wrote Hamlet? Shakespeare");
  EXPECT_THROW(qa_to_claim(qa, " "), DataError);
  EXPECT_THROW(qa_to_claim({"p", "", "x", {}}, "x"), DataError);
}

TEST(Normalize, Answers) {
  EXPECT_EQ(normalize_answer("The  Eiffel Tower!"), "eiffel tower");
  EXPECT_EQ(normalize_answer("an apple, a pear"), "apple pear");
  EXPECT_EQ(normalize_answer("..."), "");
}

// Values frozen from tests/oracles/misc_oracle.py.
TEST(Embedder, CosineOracleValues) {
  CharNgramEmbedder e(3);
  EXPECT_EQ(cosine(e.embed("Paris"), e.embed("London")), 0.0);
  EXPECT_NEAR(cosine(e.embed("Paris"), e.embed("Parish")), 0.8660254037844387, 1e-12);
  EXPECT_NEAR(cosine(e.embed("Shakespear"), e.embed("Shakespeare")), 0.9428090415820632, 1e-12);
  EXPECT_NEAR(cosine(e.embed("abc"), e.embed("abc")), 1.0, 1e-12);
  EXPECT_EQ(cosine(e.embed(""), e.embed("abc")), 0.0);
  EXPECT_EQ(e.embed("ab").size(), 1u);
}

TEST(FakeFilter, Examples) {
  CharNgramEmbedder e(3);
  EXPECT_EQ(filter_fake_answers("Paris", {"London"}, e), std::vector<std::string>{"London"});
  EXPECT_TRUE(filter_fake_answers("Paris", {"paris."}, e).empty());
  EXPECT_TRUE(filter_fake_answers("Shakespeare", {"Shakespear"}, e).empty());
  EXPECT_TRUE(filter_fake_answers("Paris", {"Parish"}, e).empty());
  // "abcdx" shares 2 of 3 trigrams with "abcdy"; no containment, so only the threshold decides
  EXPECT_TRUE(filter_fake_answers("abcdx", {"abcdy"}, e, 0.6).empty());
  EXPECT_EQ(filter_fake_answers("abcdx", {"abcdy"}, e, 0.7), std::vector<std::string>{"abcdy"});
  EXPECT_EQ(filter_fake_answers("Paris", {"Rome", "  ", "The Paris", "Berlin"}, e),
            (std::vector<std::string>{"Rome", "Berlin"}));
}

TEST(Cap, FirstNInOrder) {
  std::vector<UnifiedSample> v;
  for (int i = 0; i < 30000; ++i) v.push_back({"c", "x", Label3::kAligned, "d", std::to_string(i)});
  const auto capped = cap_dataset(v, kDefaultCap);
  ASSERT_EQ(capped.size(), 20000u);
  EXPECT_EQ(capped.front().sample_id, "0");
  EXPECT_EQ(capped.back().sample_id, "19999");
  EXPECT_EQ(cap_dataset(v, 50000).size(), 30000u);
  EXPECT_THROW(cap_dataset(v, 0), ConfigError);
}

TEST(Constants, Defaults) {
  EXPECT_EQ(kDefaultCap, 20000u);
  EXPECT_EQ(kMaxContextTokens, 512u);
  EXPECT_EQ(kFakeSimilarityThreshold, 0.85);
}

TEST(Manifest, ExactBytes) {
  const std::string want =
      "{\n"
      "  \"samples_per_dataset\": 20000,\n"
      "  \"max_context_length\": 512,\n"
      "  \"lr\": 1e-5,\n"
      "  \"seed\": 2027,\n"
      "  \"train_batch\": 8,\n"
      "  \"accumulate_grad_batch\": 1,\n"
      "  \"epoch\": 3,\n"
      "  \"warmup_ratio\": 0.06,\n"
      "  \"weight_decay\": 0.01,\n"
      "  \"adam_epsilon\": 1e-6\n"
      "}\n";
  EXPECT_EQ(render_training_manifest({}), want);
  const json parsed = json::parse(want);
  EXPECT_EQ(parsed.at("lr").get<double>(), 1e-5);
  EXPECT_EQ(parsed.size(), 10u);
}

TEST(Registry, Parse) {
  const auto reg = parse_registry(json::parse(R"([{"dataset_id":"a","label_scheme":"three-way","cap":5},
                                                  {"dataset_id":"b","label_scheme":"regression","enabled":false}])"));
  ASSERT_EQ(reg.size(), 2u);
  EXPECT_EQ(reg[0].cap, 5u);
  EXPECT_EQ(reg[1].cap, kDefaultCap);
  EXPECT_FALSE(reg[1].enabled);
  EXPECT_THROW(parse_registry(json::parse(R"([{"dataset_id":"a","label_scheme":"three-way","cap":0}])")), ConfigError);
  EXPECT_THROW(parse_registry(json::parse(R"([{"dataset_id":"a","label_scheme":"nope"}])")), ConfigError);
  EXPECT_THROW(parse_registry(json::parse(R"([{"dataset_id":"a","label_scheme":"three-way"},
                                              {"dataset_id":"a","label_scheme":"three-way"}])")),
               ConfigError);
  EXPECT_THROW(parse_registry(json::parse("{}")), ConfigError);
}

DatasetRegistryEntry entry(std::string id, LabelScheme scheme, bool qa = false) {
  DatasetRegistryEntry e;
  e.dataset_id = std::move(id);
  e.label_scheme = scheme;
  e.is_qa = qa;
  return e;
}

/// 95 QA records: 10 with overlong passages, 5 with one fake that only
/// differs from the truth in case and punctuation. 100 candidate claims.
std::string qa_fixture() {
  std::string out;
  for (int i = 0; i < 95; ++i) {
    json j;
    j["id"] = "q" + std::to_string(i);
    j["passage"] = i < 10 ? words(600) : "A short passage number " + std::to_string(i) + ".";
    j["question"] = "What is item " + std::to_string(i) + "?";
    j["answer"] = "Answer " + std::to_string(i);
    j["fake_answers"] = json::array();
    if (i >= 90) j["fake_answers"].push_back("answer " + std::to_string(i) + ".");
    out += j.dump() + "\n";
  }
  return out;
}

TEST(Clean, HundredSampleFixture) {
  PipelineConfig cfg;
  FilterStats st;
  const auto kept = clean_dataset(entry("squad_v2", LabelScheme::kBinaryContradiction, true), qa_fixture(), cfg, st);
  EXPECT_EQ(kept.size(), 85u);
  EXPECT_EQ(st.input, 100u);
  EXPECT_EQ(st.kept, 85u);
  EXPECT_EQ(st.dropped_by_length, 10u);
  EXPECT_EQ(st.dropped_by_similarity, 5u);
  EXPECT_EQ(st.dropped_by_cap, 0u);
  EXPECT_TRUE(st.balanced());
  for (const auto& s : kept) EXPECT_EQ(s.label, Label3::kAligned);
}

TEST(Clean, QaFakesBecomeContradictions) {
  const std::string line =
      R"({"id":7,"context":"Paris is the capital of France.","question":"Capital of France?","answer":"Paris",)"
      R"("fake_answers":["Parish","London","paris"]})";
  PipelineConfig cfg;
  FilterStats st;
  const auto kept = clean_dataset(entry("race", LabelScheme::kBinaryContradiction, true), line, cfg, st);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].sample_id, "7");
  EXPECT_EQ(kept[0].claim, "Capital of France? Paris");
  EXPECT_EQ(kept[1].sample_id, "7#fake1");
  EXPECT_EQ(kept[1].claim, "Capital of France? London");
  EXPECT_EQ(kept[1].label, Label3::kContradiction);
  EXPECT_EQ(st.input, 4u);
  EXPECT_EQ(st.dropped_by_similarity, 2u);
}

TEST(Clean, NonQaFieldsAndLabels) {
  const std::string text =
      R"({"premise":"A man sleeps.","hypothesis":"A person rests.","label":"entailment"})" "\n"
      R"({"sentence1":"x y","sentence2":"z","label":"contradiction"})" "\n"
      "\n"
      R"({"context":"c","claim":"d","label":"neutral","id":"k"})" "\n";
  PipelineConfig cfg;
  FilterStats st;
  const auto kept = clean_dataset(entry("mnli", LabelScheme::kThreeWay), text, cfg, st);
  ASSERT_EQ(kept.size(), 3u);
  FilterStats qst;
  const auto q = clean_dataset(entry("qqp", LabelScheme::kBinaryNeutral),
                               R"({"text_a":"a","text_b":"b","label":0})" "\n" R"({"text_a":"a","text_b":"b","label":1})",
                               cfg, qst);
  ASSERT_EQ(q.size(), 2u);
  EXPECT_EQ(q[0].label, Label3::kNeutral);
  EXPECT_EQ(q[1].label, Label3::kAligned);
  EXPECT_EQ(kept[0].sample_id, "1");
  EXPECT_EQ(kept[0].label, Label3::kAligned);
  EXPECT_EQ(kept[1].sample_id, "2");
  EXPECT_EQ(kept[1].label, Label3::kContradiction);
  EXPECT_EQ(kept[2].sample_id, "k");
  EXPECT_EQ(kept[2].label, Label3::kNeutral);
}

TEST(Clean, MalformedLinesAreCounted) {
  const std::string text =
      "{not json\n"
      R"([1,2])" "\n"
      R"({"context":"c","claim":"d"})" "\n"
      R"({"context":"c","claim":"d","label":"banana"})" "\n"
      R"({"context":"c","claim":"d","label":2})" "\n"
      R"({"context":"c","claim":"d","label":"neutral"})" "\n";
  PipelineConfig cfg;
  FilterStats st;
  const auto kept = clean_dataset(entry("mnli", LabelScheme::kThreeWay), text, cfg, st);
  EXPECT_EQ(kept.size(), 1u);
  EXPECT_EQ(st.dropped_malformed, 5u);
  EXPECT_EQ(st.input, 6u);
  EXPECT_TRUE(st.balanced());
}

TEST(Clean, CapOverride) {
  std::string text;
  for (int i = 0; i < 50; ++i) text += R"({"context":"c","claim":"d","label":"neutral"})" "\n";
  PipelineConfig cfg;
  cfg.cap = 20;
  FilterStats st;
  EXPECT_EQ(clean_dataset(entry("mnli", LabelScheme::kThreeWay), text, cfg, st).size(), 20u);
  EXPECT_EQ(st.dropped_by_cap, 30u);
  EXPECT_TRUE(st.balanced());
}

struct RunFixture {
  testing::TempDir dir;
  std::vector<DatasetRegistryEntry> registry;
  std::map<std::string, std::string> sources;

  RunFixture() {
    registry = {entry("mnli", LabelScheme::kThreeWay), entry("qqp", LabelScheme::kBinaryNeutral),
                entry("squad_v2", LabelScheme::kBinaryContradiction, true), entry("stsb", LabelScheme::kRegression)};
    std::string mnli, qqp, stsb;
    for (int i = 0; i < 40; ++i) {
      mnli += json{{"premise", "Premise " + std::to_string(i) + "."}, {"hypothesis", "H."}, {"label", std::vector<std::string>{"entailment", "neutral", "contradiction"}[i % 3]}}.dump() + "\n";
      qqp += json{{"text_a", "Q" + std::to_string(i)}, {"text_b", "R"}, {"label", i % 2}}.dump() + "\n";
      stsb += json{{"sentence1", "S" + std::to_string(i)}, {"sentence2", "T"}, {"label", (i % 9) * 0.125}}.dump() + "\n";
    }
    mnli += "garbage\n";
    testing::write_text(dir.file("src/mnli.jsonl"), mnli);
    testing::write_text(dir.file("src/qqp.jsonl"), qqp);
    testing::write_text(dir.file("src/squad.jsonl"), qa_fixture());
    testing::write_text(dir.file("src/stsb.jsonl"), stsb);
    sources = {{"mnli", dir.file("src/mnli.jsonl")},
               {"qqp", dir.file("src/qqp.jsonl")},
               {"squad_v2", dir.file("src/squad.jsonl")},
               {"stsb", dir.file("src/stsb.jsonl")}};
  }

  PipelineConfig config(const std::string& out, std::size_t parallelism) const {
    PipelineConfig cfg;
    cfg.out_dir = dir.file(out);
    cfg.parallelism = parallelism;
    cfg.config_hash = "abc";
    return cfg;
  }
};

TEST(RunPipeline, DeterministicAcrossParallelism) {
  RunFixture fx;
  const auto a = run_pipeline(fx.registry, fx.sources, fx.config("a", 1));
  const auto b = run_pipeline(fx.registry, fx.sources, fx.config("b", 4));
  EXPECT_EQ(a.total, b.total);
  EXPECT_TRUE(a.total.balanced());
  EXPECT_EQ(a.total.dropped_malformed, 1u);
  for (const std::string f : {"mnli.jsonl", "qqp.jsonl", "squad_v2.jsonl", "stsb.jsonl", "stats.json",
                              "train_manifest.json"}) {
    EXPECT_EQ(testing::read_text(fx.dir.file("a/" + f)), testing::read_text(fx.dir.file("b/" + f))) << f;
  }
  const json stats = json::parse(testing::read_text(fx.dir.file("a/stats.json")));
  EXPECT_EQ(stats.at("config_hash"), "abc");
  EXPECT_EQ(stats.at("datasets").size(), 4u);
  EXPECT_EQ(stats.at("total").at("kept"), a.total.kept);
  EXPECT_EQ(testing::read_text(fx.dir.file("a/train_manifest.json")), render_training_manifest({}));
}

TEST(RunPipeline, IdempotentOnOwnOutput) {
  RunFixture fx;
  const auto first = run_pipeline(fx.registry, fx.sources, fx.config("a", 2));
  std::map<std::string, std::string> again;
  for (const auto& e : fx.registry) again[e.dataset_id] = fx.dir.file("a/" + e.dataset_id + ".jsonl");
  const auto second = run_pipeline(fx.registry, again, fx.config("b", 2));
  for (const auto& e : fx.registry) {
    EXPECT_EQ(testing::read_text(fx.dir.file("a/" + e.dataset_id + ".jsonl")),
              testing::read_text(fx.dir.file("b/" + e.dataset_id + ".jsonl")))
        << e.dataset_id;
  }
  EXPECT_EQ(second.total.kept, first.total.kept);
  EXPECT_EQ(second.total.input, first.total.kept);
}

TEST(RunPipeline, ErrorsAndOptions) {
  RunFixture fx;
  auto missing = fx.sources;
  missing["qqp"] = fx.dir.file("nope.jsonl");
  EXPECT_THROW(run_pipeline(fx.registry, missing, fx.config("x", 1)), DataError);
  auto cfg = fx.config("x", 1);
  cfg.cap = 0;
  EXPECT_THROW(run_pipeline(fx.registry, fx.sources, cfg), ConfigError);

  cfg = fx.config("capped", 1);
  cfg.cap = 10;
  run_pipeline(fx.registry, fx.sources, cfg);
  const json m = json::parse(testing::read_text(fx.dir.file("capped/train_manifest.json")));
  EXPECT_EQ(m.at("samples_per_dataset"), 10);

  auto reg = fx.registry;
  reg[3].enabled = false;
  const auto r = run_pipeline(reg, fx.sources, fx.config("d", 1));
  EXPECT_EQ(r.per_dataset.count("stsb"), 0u);
  EXPECT_FALSE(fs::exists(fx.dir.file("d/stsb.jsonl")));
}

TEST(RunPipeline, BundledRegistryLoads) {
  const auto reg = load_registry(std::string(LIMRA_TEST_DATA_DIR) + "/registry.json");
  EXPECT_EQ(reg.size(), 31u);
  std::size_t enabled = 0;
  for (const auto& e : reg) enabled += e.enabled;
  EXPECT_EQ(enabled, 29u);
}

}  // namespace
}  // namespace limra
