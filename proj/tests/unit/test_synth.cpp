#include <gtest/gtest.h>

#include <atomic>
#include <deque>
#include <mutex>

#include "limra/synth.hpp"
#include "test_util.hpp"

namespace limra {
namespace {

const std::string kMarieClaim = "Archduchess Marie Louise was 18 years old when she married Napoleon .";

TEST(Detect, MarieLouiseClaim) {
  RuleEntityDetector det;
  const auto spans = detect_entities(kMarieClaim, det);
  ASSERT_EQ(spans.size(), 2u);
  EXPECT_EQ(spans[0], (EntitySpan{12, 24, "Marie Louise", EntityKind::kPerson}));
  EXPECT_EQ(spans[1], (EntitySpan{29, 37, "18 years", EntityKind::kTime}));
}

TEST(Detect, MixedKinds) {
  RuleEntityDetector det;
  const std::string claim = "On 22 June 1990 the Acme Corp. hired Dr. John Smith for twenty-five dollars.";
  const auto spans = detect_entities(claim, det);
  ASSERT_EQ(spans.size(), 4u);
  EXPECT_EQ(spans[0], (EntitySpan{3, 15, "22 June 1990", EntityKind::kDate}));
  EXPECT_EQ(spans[1], (EntitySpan{20, 29, "Acme Corp", EntityKind::kOrg}));
  EXPECT_EQ(spans[2], (EntitySpan{41, 51, "John Smith", EntityKind::kPerson}));
  EXPECT_EQ(spans[3], (EntitySpan{56, 75, "twenty-five dollars", EntityKind::kQuantity}));
  for (const auto& s : spans) EXPECT_EQ(claim.substr(s.start, s.end - s.start), s.surface);
}

TEST(Detect, NothingToFind) {
  RuleEntityDetector det;
  EXPECT_TRUE(detect_entities("the cat sat on a mat.", det).empty());
}

/// Returns overlapping spans so detect_entities has to resolve them.
class OverlapDetector final : public EntityDetector {
 public:
  std::vector<EntitySpan> detect(std::string_view) const override {
    return {{5, 9, "aaaa", EntityKind::kPerson}, {0, 7, "aaaaaaa", EntityKind::kPerson}, {8, 10, "aa", EntityKind::kDate}};
  }
};

TEST(Detect, OverlapsKeepLongerSpan) {
  OverlapDetector det;
  const auto spans = detect_entities("aaaaaaaaaaaa", det);
  ASSERT_EQ(spans.size(), 2u);
  EXPECT_EQ(spans[0].start, 0u);
  EXPECT_EQ(spans[1].start, 8u);
}

TEST(Stub, Outputs) {
  EXPECT_EQ(stub_name_change("Marie Louise"), "Marie Louose");
  EXPECT_FALSE(stub_num_change("Marie Louise"));
  EXPECT_EQ(stub_num_change("100"), "101");
  EXPECT_EQ(stub_num_rephrase("100"), "one hundred");
  EXPECT_EQ(stub_num_change("2,000"), "2,001");
  EXPECT_EQ(stub_num_rephrase("2,000"), "two thousand");
  EXPECT_EQ(stub_num_change("twenty-five"), "twenty-six");
  EXPECT_EQ(stub_num_rephrase("twenty-five"), "25");
  EXPECT_EQ(stub_num_change("22 June 1990"), "23 June 1990");
  EXPECT_EQ(stub_num_rephrase("22 June 1990"), "June 22, 1990");
  EXPECT_EQ(stub_num_change("3rd"), "4th");
  EXPECT_EQ(stub_num_rephrase("3rd"), "third");
}

TEST(Stub, OutputsPassVerification) {
  for (const std::string s : {"100", "2,000", "twenty-five", "22 June 1990", "3rd", "18 years"}) {
    if (auto c = stub_num_change(s)) EXPECT_TRUE(verify_perturbation(s, *c, PerturbMode::kNumChange)) << s;
    if (auto r = stub_num_rephrase(s)) EXPECT_TRUE(verify_perturbation(s, *r, PerturbMode::kNumRephrase)) << s;
  }
  EXPECT_TRUE(verify_perturbation("Marie Louise", *stub_name_change("Marie Louise"), PerturbMode::kNameChange));
}

TEST(Verify, Rules) {
  EXPECT_TRUE(verify_perturbation("2,000", "2000", PerturbMode::kNumRephrase));
  EXPECT_TRUE(verify_perturbation("twenty-five", "25", PerturbMode::kNumRephrase));
  EXPECT_FALSE(verify_perturbation("100", "100", PerturbMode::kNumChange));
  EXPECT_FALSE(verify_perturbation("100", "100", PerturbMode::kNumRephrase));
  EXPECT_FALSE(verify_perturbation("100", "101", PerturbMode::kNumRephrase));
  EXPECT_FALSE(verify_perturbation("2,000", "two thousand", PerturbMode::kNumChange));
  EXPECT_FALSE(verify_perturbation("Marie Louise", "marie louise.", PerturbMode::kNameChange));
  EXPECT_FALSE(verify_perturbation("Marie Louise", "  ", PerturbMode::kNameChange));
  EXPECT_TRUE(verify_perturbation("Marie Louise", "Mari Louze", PerturbMode::kNameChange));
}

TEST(Splice, OnlyTheSpanChanges) {
  const EntitySpan span{12, 24, "Marie Louise", EntityKind::kPerson};
  const auto out = splice(kMarieClaim, span, "Mari Louze");
  EXPECT_EQ(out, "Archduchess Mari Louze was 18 years old when she married Napoleon .");
  EXPECT_EQ(out.substr(0, 12), kMarieClaim.substr(0, 12));
  EXPECT_EQ(out.substr(22), kMarieClaim.substr(24));
}

UnifiedSample source(const std::string& id, const std::string& claim, Label3 label = Label3::kAligned) {
  return {"Some context.", claim, label, "src", id};
}

PerturbationRecord record(const std::string& id, EntitySpan span, PerturbMode mode, std::string repl, bool verified = true) {
  PerturbationRecord r;
  r.source_sample_id = id;
  r.span = std::move(span);
  r.mode = mode;
  r.replacement = std::move(repl);
  r.polarity = polarity_of(mode);
  r.verified = verified;
  return r;
}

TEST(Assemble, LabelsAndOriginals) {
  const std::vector<UnifiedSample> src{source("s1", "It cost 100 dollars."), source("s2", "Nothing here."),
                                       source("s3", "Bob Ray won.", Label3::kContradiction)};
  const std::vector<PerturbationRecord> recs{
      record("s1", {8, 11, "100", EntityKind::kQuantity}, PerturbMode::kNumChange, "101"),
      record("s1", {8, 11, "100", EntityKind::kQuantity}, PerturbMode::kNumRephrase, "one hundred"),
      record("s1", {8, 11, "100", EntityKind::kQuantity}, PerturbMode::kNumChange, "100", false),
      record("s1", {0, 3, "zzz", EntityKind::kQuantity}, PerturbMode::kNumChange, "1"),
      record("s3", {0, 7, "Bob Ray", EntityKind::kPerson}, PerturbMode::kNameChange, "Bib Ray")};
  AssemblyStats st;
  const auto out = assemble_dataset(src, recs, RobustKind::kNum, &st);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].sample_id, "s1");
  EXPECT_EQ(out[0].label, Label3::kAligned);
  EXPECT_EQ(out[0].claim, "It cost 100 dollars.");
  EXPECT_EQ(out[1].sample_id, "s1#0");
  EXPECT_EQ(out[1].claim, "It cost 101 dollars.");
  EXPECT_EQ(out[1].label, Label3::kContradiction);
  EXPECT_EQ(out[2].claim, "It cost one hundred dollars.");
  EXPECT_EQ(out[2].label, Label3::kAligned);
  for (const auto& s : out) EXPECT_EQ(s.dataset_id, "robust_num");
  EXPECT_EQ(st.emitted, 2u);
  EXPECT_EQ(st.originals, 1u);
  EXPECT_EQ(st.skipped_unverified, 1u);
  EXPECT_EQ(st.dropped_drift, 1u);
  EXPECT_EQ(st.skipped_source_label, 1u);
}

std::vector<UnifiedSample> stub_corpus(std::size_t n) {
  std::vector<UnifiedSample> out;
  const std::vector<std::string> names{"Marie Louise", "John Smith", "Acme Corp", "Ada Byron"};
  for (std::size_t i = 0; i < n; ++i) {
    const std::string claim = names[i % names.size()] + " paid " + std::to_string(10 + i) + " dollars on day " +
                              std::to_string(1 + i % 28) + ".";
    out.push_back({"Context " + std::to_string(i) + ".", claim, i % 7 == 0 ? Label3::kNeutral : Label3::kAligned,
                   "src", "x" + std::to_string(i)});
  }
  return out;
}

TEST(Generate, DeterministicAndGrouped) {
  const auto src = stub_corpus(300);
  RuleEntityDetector det;
  for (RobustKind kind : {RobustKind::kName, RobustKind::kNum}) {
    SynthConfig cfg;
    cfg.kind = kind;
    StubPerturber a, b;
    cfg.in_flight = 1;
    const auto one = generate_robustness(src, cfg, det, a);
    cfg.in_flight = 8;
    const auto many = generate_robustness(src, cfg, det, b);
    EXPECT_EQ(one.samples, many.samples);
    EXPECT_EQ(one.train, many.train);
    EXPECT_FALSE(one.samples.empty());
    EXPECT_EQ(one.train.size() + one.test.size(), one.samples.size());
    EXPECT_FALSE(one.test.empty());
    EXPECT_GT(one.stats.skipped_source_label, 0u);

    // sources and their perturbations never straddle the split
    std::set<std::string> train_groups, test_groups;
    auto group_of = [](const std::string& id) { return id.substr(0, id.find('#')); };
    for (const auto& s : one.train) train_groups.insert(group_of(s.sample_id));
    for (const auto& s : one.test) test_groups.insert(group_of(s.sample_id));
    for (const auto& g : test_groups) EXPECT_FALSE(train_groups.count(g)) << g;

    for (const auto& s : one.samples) {
      if (s.sample_id.find('#') == std::string::npos) EXPECT_EQ(s.label, Label3::kAligned);
    }
  }
}

TEST(Generate, NumModeUsesBothModes) {
  const auto src = stub_corpus(200);
  RuleEntityDetector det;
  SynthConfig cfg;
  cfg.kind = RobustKind::kNum;
  StubPerturber p;
  const auto out = generate_robustness(src, cfg, det, p);
  std::size_t change = 0, rephrase = 0;
  for (const auto& r : out.records) (r.mode == PerturbMode::kNumChange ? change : rephrase)++;
  EXPECT_GT(change, 0u);
  EXPECT_GT(rephrase, 0u);
}

TEST(Generate, ConfigErrors) {
  RuleEntityDetector det;
  StubPerturber p;
  SynthConfig cfg;
  cfg.in_flight = 0;
  EXPECT_THROW(generate_robustness({}, cfg, det, p), ConfigError);
  cfg.in_flight = 1;
  cfg.train_fraction = 1.5;
  EXPECT_THROW(generate_robustness({}, cfg, det, p), ConfigError);
}

TEST(Prompts, RenderEndsWithSlot) {
  const auto lib = PromptLibrary::builtin();
  for (PerturbMode m : {PerturbMode::kNameChange, PerturbMode::kNumChange, PerturbMode::kNumRephrase}) {
    EXPECT_NE(lib.template_for(m).find("{original}"), std::string::npos);
  }
  const auto p = lib.render(PerturbMode::kNameChange, "Marie Louise");
  const std::string tail = "Original Text: Marie Louise\nChanged Text:";
  ASSERT_GE(p.size(), tail.size());
  EXPECT_EQ(p.substr(p.size() - tail.size()), tail);
  EXPECT_EQ(p.find("{original}"), std::string::npos);
}

TEST(Prompts, FromDirectory) {
  testing::TempDir dir;
  testing::write_text(dir.file("name_change.txt"), "N {original}\n");
  testing::write_text(dir.file("num_change.txt"), "C {original}");
  testing::write_text(dir.file("num_rephrase.txt"), "R {original}");
  const auto lib = PromptLibrary::from_directory(dir.str());
  EXPECT_EQ(lib.render(PerturbMode::kNameChange, "x"), "N x");
  EXPECT_EQ(lib.render(PerturbMode::kNumRephrase, "5"), "R 5");
  testing::TempDir empty;
  EXPECT_THROW(PromptLibrary::from_directory(empty.str()), ConfigError);
}

/// Replays canned completions in order.
class ScriptedLlm final : public LlmClient {
 public:
  explicit ScriptedLlm(std::deque<std::string> replies) : replies_(std::move(replies)) {}
  std::string complete(const std::string&) override {
    ++calls;
    if (replies_.empty()) return "";
    auto r = replies_.front();
    replies_.pop_front();
    return r;
  }
  int calls = 0;

 private:
  std::deque<std::string> replies_;
};

TEST(PerturbEntity, FirstLineTrimmed) {
  ScriptedLlm llm({"  Mari Louze \nextra line\n"});
  AuditEntry audit;
  const auto out = perturb_entity("Marie Louise", PerturbMode::kNameChange, llm, PromptLibrary::builtin(), &audit);
  EXPECT_EQ(out, "Mari Louze");
  EXPECT_EQ(llm.calls, 1);
  EXPECT_EQ(audit.backend, "llm");
  EXPECT_EQ(audit.outcome, "ok");
  EXPECT_EQ(audit.completions.size(), 1u);
}

TEST(PerturbEntity, EmptyRetriedOnceThenGivesUp) {
  ScriptedLlm retry({"   ", "Mari Louze"});
  EXPECT_EQ(perturb_entity("Marie Louise", PerturbMode::kNameChange, retry, PromptLibrary::builtin()), "Mari Louze");
  EXPECT_EQ(retry.calls, 2);
  ScriptedLlm silent({"", "", "late"});
  AuditEntry audit;
  EXPECT_FALSE(perturb_entity("x", PerturbMode::kNameChange, silent, PromptLibrary::builtin(), &audit));
  EXPECT_EQ(silent.calls, 2);
  EXPECT_EQ(audit.outcome, "empty");
}

TEST(HttpLlm, RoundTripAgainstLocalServer) {
  testing::LocalServer server;
  std::mutex mu;
  json seen;
  server.server().Post("/v1/completions", [&](const httplib::Request& req, httplib::Response& res) {
    {
      std::lock_guard lock(mu);
      seen = json::parse(req.body);
    }
    res.set_content(R"({"text":" Mari Louze\n"})", "application/json");
  });
  server.server().Post("/bad", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"nope":1})", "application/json");
  });
  server.server().Post("/reject", [](const httplib::Request&, httplib::Response& res) { res.status = 400; });
  server.start();

  LlmConfig cfg;
  cfg.endpoint = server.url() + "/v1/completions";
  cfg.backoff = std::chrono::milliseconds(1);
  HttpLlmClient client(cfg);
  LlmPerturber perturber(client, PromptLibrary::builtin());
  AuditEntry audit;
  EXPECT_EQ(perturber.perturb("Marie Louise", PerturbMode::kNameChange, audit), "Mari Louze");
  EXPECT_EQ(seen.at("max_tokens"), 32);
  EXPECT_EQ(seen.at("temperature"), 0.0);
  EXPECT_EQ(seen.at("prompt"), PromptLibrary::builtin().render(PerturbMode::kNameChange, "Marie Louise"));

  cfg.endpoint = server.url() + "/bad";
  EXPECT_THROW(HttpLlmClient(cfg).complete("p"), BackendError);
  cfg.endpoint = server.url() + "/reject";
  EXPECT_THROW(HttpLlmClient(cfg).complete("p"), RemoteRejectedError);
  EXPECT_THROW(HttpLlmClient(LlmConfig{}), ConfigError);
}

TEST(Generate, LlmErrorsAreCountedNotFatal) {
  /// Every call fails.
  class Broken final : public LlmClient {
   public:
    std::string complete(const std::string&) override { throw BackendError("down"); }
  } broken;
  LlmPerturber p(broken, PromptLibrary::builtin());
  RuleEntityDetector det;
  const auto src = stub_corpus(10);
  const auto out = generate_robustness(src, {}, det, p);
  EXPECT_TRUE(out.samples.empty());
  EXPECT_EQ(out.stats.perturb_failures, out.stats.spans);
  for (const auto& a : out.audit) EXPECT_EQ(a.outcome.rfind("error: ", 0), 0u);
}

}  // namespace
}  // namespace limra
