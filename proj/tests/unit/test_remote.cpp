#include <gtest/gtest.h>

#include <atomic>
#include <mutex>

#include "limra/backends.hpp"
#include "limra/engine.hpp"
#include "test_util.hpp"

namespace limra {
namespace {

using Strings = std::vector<std::string>;

/// Echoes an S x C grid with aligned = 1 / (1 + s + c).
json echo_probs(const json& request) {
  json probs = json::array();
  const auto s = request.at("sentences").size(), c = request.at("chunks").size();
  for (std::size_t i = 0; i < s; ++i) {
    json row = json::array();
    for (std::size_t k = 0; k < c; ++k) {
      const double a = 1.0 / static_cast<double>(1 + i + k);
      row.push_back({a, 1.0 - a, 0.0});
    }
    probs.push_back(row);
  }
  return probs;
}

RemoteConfig config_for(const std::string& url) {
  RemoteConfig cfg;
  cfg.endpoint = url;
  cfg.timeout = std::chrono::milliseconds(2000);
  cfg.retries = 2;
  cfg.backoff = std::chrono::milliseconds(1);
  return cfg;
}

class RemoteTest : public ::testing::Test {
 protected:
  testing::LocalServer server;
  std::atomic<int> hits{0};
  std::mutex mu;
  json last_request;
};

TEST_F(RemoteTest, HappyPathTwoByThree) {
  server.server().Post("/v1/align", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    const json body = json::parse(req.body);
    {
      std::lock_guard lock(mu);
      last_request = body;
    }
    res.set_content(json{{"probs", echo_probs(body)}, {"model", "nli-test"}, {"version", "7"}}.dump(),
                    "application/json");
  });
  server.start();
  RemoteBackend backend(config_for(server.url()));
  const Strings chunks{"c0", "c1", "c2"}, sentences{"s0", "s1"};
  const auto m = backend.align({"id", chunks, sentences});
  EXPECT_EQ(m.sentences(), 2u);
  EXPECT_EQ(m.chunks(), 3u);
  EXPECT_DOUBLE_EQ(m.at(1, 2).aligned, 0.25);
  EXPECT_EQ(last_request, json::parse(R"({"chunks":["c0","c1","c2"],"sentences":["s0","s1"]})"));
  EXPECT_EQ(last_request.dump(), make_align_request_body(chunks, sentences));
  EXPECT_EQ(backend.identity().model, "nli-test");
  EXPECT_EQ(backend.identity().version, "7");
  EXPECT_EQ(backend.attempts(), 1u);
}

TEST_F(RemoteTest, ShapeMismatchNamesDimensions) {
  server.server().Post("/v1/align", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"probs":[[[1,0,0]]],"model":"m","version":"1"})", "application/json");
  });
  server.start();
  RemoteBackend backend(config_for(server.url()));
  const Strings chunks{"a", "b", "c"}, sentences{"x", "y"};
  try {
    backend.align({"id", chunks, sentences});
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_EQ(e.expected_sentences(), 2u);
    EXPECT_EQ(e.expected_chunks(), 3u);
    EXPECT_EQ(e.actual_sentences(), 1u);
    EXPECT_EQ(e.actual_chunks(), 1u);
    EXPECT_NE(std::string(e.what()).find("expected 2x3, got 1x1"), std::string::npos);
  }
}

TEST_F(RemoteTest, RowSumViolation) {
  server.server().Post("/v1/align", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"probs":[[[0.7,0.7,0]]],"model":"m","version":"1"})", "application/json");
  });
  server.start();
  RemoteBackend backend(config_for(server.url()));
  const Strings one{"a"};
  EXPECT_THROW(backend.align({"id", one, one}), InvariantError);
}

TEST_F(RemoteTest, UnprocessableIsNotRetried) {
  server.server().Post("/v1/align", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 422;
    res.set_content(R"({"detail":"empty sentences"})", "application/json");
  });
  server.start();
  RemoteBackend backend(config_for(server.url()));
  const Strings one{"a"};
  try {
    backend.align({"id", one, one});
    FAIL();
  } catch (const RemoteRejectedError& e) {
    EXPECT_EQ(e.status(), 422);
  }
  EXPECT_EQ(hits.load(), 1);
}

TEST_F(RemoteTest, ServerErrorsAreRetried) {
  server.server().Post("/v1/align", [&](const httplib::Request& req, httplib::Response& res) {
    if (++hits < 3) {
      res.status = 503;
      return;
    }
    res.set_content(json{{"probs", echo_probs(json::parse(req.body))}, {"model", "m"}, {"version", "1"}}.dump(),
                    "application/json");
  });
  server.start();
  RemoteBackend backend(config_for(server.url()));
  const Strings one{"a"};
  EXPECT_NO_THROW(backend.align({"id", one, one}));
  EXPECT_EQ(hits.load(), 3);
  EXPECT_EQ(backend.attempts(), 3u);
}

TEST_F(RemoteTest, PersistentServerErrorBecomesTransportError) {
  server.server().Post("/v1/align", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 500;
  });
  server.start();
  RemoteBackend backend(config_for(server.url()));
  const Strings one{"a"};
  try {
    backend.align({"id", one, one});
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_EQ(e.attempts(), 3);
  }
  EXPECT_EQ(hits.load(), 3);
}

TEST_F(RemoteTest, GarbageBodyIsShapeError) {
  server.server().Post("/v1/align", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content("not json", "text/plain");
  });
  server.start();
  RemoteBackend backend(config_for(server.url()));
  const Strings one{"a"};
  EXPECT_THROW(backend.align({"id", one, one}), ShapeError);
}

TEST(Remote, UnreachableEndpointExhaustsRetries) {
  auto cfg = config_for("http://127.0.0.1:" + std::to_string(testing::closed_port()));
  cfg.retries = 3;
  RemoteBackend backend(cfg);
  const Strings one{"a"};
  try {
    backend.align({"id", one, one});
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_EQ(e.attempts(), 4);
    EXPECT_EQ(e.category(), ErrorCategory::kBackend);
  }
  EXPECT_EQ(backend.attempts(), 4u);
}

TEST(Remote, ConfigValidation) {
  EXPECT_THROW(RemoteBackend(RemoteConfig{}), ConfigError);
  auto cfg = config_for("http://127.0.0.1:1");
  cfg.retries = -1;
  EXPECT_THROW(RemoteBackend{cfg}, ConfigError);
}

TEST(Remote, ParseAlignResponse) {
  EXPECT_THROW(parse_align_response(json::parse("{}"), 1, 1), ShapeError);
  EXPECT_THROW(parse_align_response(json::parse(R"({"probs":{}})"), 1, 1), ShapeError);
  EXPECT_NO_THROW(parse_align_response(json::parse(R"({"probs":[[[1,0,0]]]})"), 1, 1));
}

TEST_F(RemoteTest, PoolBoundsConcurrency) {
  std::atomic<int> in_flight{0}, peak{0};
  server.server().new_task_queue = [] { return new httplib::ThreadPool(8); };
  server.server().Post("/v1/align", [&](const httplib::Request& req, httplib::Response& res) {
    const int now = ++in_flight;
    int p = peak.load();
    while (now > p && !peak.compare_exchange_weak(p, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    --in_flight;
    res.set_content(json{{"probs", echo_probs(json::parse(req.body))}, {"model", "m"}, {"version", "1"}}.dump(),
                    "application/json");
  });
  server.start();
  auto cfg = config_for(server.url());
  cfg.pool_size = 2;
  RemoteBackend backend(cfg);
  std::vector<PairInput> records;
  for (int i = 0; i < 12; ++i) records.push_back({"r" + std::to_string(i), "Some context here.", "A claim."});
  ScoringOptions opts;
  opts.parallelism = 6;
  const auto batch = score_batch(records, backend, opts);
  EXPECT_TRUE(batch.failed_ids.empty());
  EXPECT_LE(peak.load(), 2);
  EXPECT_EQ(backend.attempts(), 12u);
}

}  // namespace
}  // namespace limra
