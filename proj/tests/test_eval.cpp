#include <atomic>
#include <fstream>
#include <functional>
#include <chrono>
#include <mutex>
#include <set>
#include <thread>

#include <gtest/gtest.h>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "rosetta/errors.hpp"
#include "rosetta/eval.hpp"
#include "test_support.hpp"

namespace rosetta {
namespace {

/// A Lean-form set over synthetic problems; the first `n_true` are true.
TestSet make_set(std::size_t n, std::size_t n_true, std::string name = "seen_1_lean") {
    TestSet set;
    set.name = std::move(name);
    const auto statements = testing::synthetic_statements(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
        const SourceProblem p{"q" + std::to_string(i), statements[i], i < n_true, Origin::training};
        set.items.push_back({p.id, p.truth_label, build_record(p)});
    }
    return set;
}

// verdict normalisation ------------------------------------------------------

TEST(Normalize, FixtureResponses) {
    const std::vector<std::pair<std::string, Verdict>> cases{
        {"True", Verdict::True},
        {"False", Verdict::False},
        {"true", Verdict::True},
        {"FALSE", Verdict::False},
        {"  True.\n", Verdict::True},
        {"The answer is False.", Verdict::False},
        {"**True**", Verdict::True},
        {"False, because x > 1 is not True", Verdict::False},
        {"Untrue", Verdict::Unknown},
        {"truely", Verdict::Unknown},
        {"", Verdict::Unknown},
        {"I cannot decide.", Verdict::Unknown},
        {"true_statement", Verdict::Unknown},
    };
    for (const auto& [response, expected] : cases) {
        EXPECT_EQ(normalize_verdict(response), expected) << "response: " << response;
    }
}

TEST(Normalize, VerdictNamesRoundTrip) {
    for (const auto v : {Verdict::True, Verdict::False, Verdict::Unknown}) EXPECT_EQ(parse_verdict(to_string(v)), v);
    EXPECT_THROW(parse_verdict("maybe"), DataError);
}

TEST(Query, DropsAssistantAnswer) {
    const auto set = make_set(1, 1);
    const auto q = make_query(set.items[0]);
    EXPECT_EQ(q.id, "q0");
    ASSERT_EQ(q.messages.size(), 2u);
    EXPECT_EQ(q.messages[0].role, "system");
    EXPECT_EQ(q.messages[1].role, "user");
}

// scoring --------------------------------------------------------------------

TEST(Scoring, Accuracy) {
    EXPECT_DOUBLE_EQ(accuracy(381, 500), 76.2);
    EXPECT_DOUBLE_EQ(accuracy(0, 3), 0.0);
    EXPECT_DOUBLE_EQ(accuracy(3, 3), 100.0);
    EXPECT_THROW(accuracy(0, 0), ZeroTotal);
    EXPECT_THROW(accuracy(4, 3), DataError);
}

TEST(Scoring, UnknownIsIncorrect) {
    const std::vector<ItemResult> items{
        {"a", true, Verdict::True, "True"},
        {"b", false, Verdict::True, "True"},
        {"c", false, Verdict::Unknown, "?"},
        {"d", false, Verdict::False, "False"},
    };
    EXPECT_EQ(score(items), 2u);
}

// mock clients ---------------------------------------------------------------

TEST(Mocks, OracleAndInverted) {
    const auto set = make_set(200, 128);
    OracleClient oracle(set);
    InvertedClient inverted(set);
    const auto good = run_eval(set, oracle);
    const auto bad = run_eval(set, inverted);
    EXPECT_EQ(good.correct, 200u);
    EXPECT_DOUBLE_EQ(accuracy(good.correct, good.total), 100.0);
    EXPECT_EQ(bad.correct, 0u);
    EXPECT_TRUE(good.valid);
    EXPECT_EQ(good.requests, 200u);
}

TEST(Mocks, ConstantMatchesBaseRate) {
    const auto set = make_set(200, 128);
    ConstantClient yes("True");
    ConstantClient no("False");
    EXPECT_EQ(run_eval(set, yes).correct, 128u);
    EXPECT_EQ(run_eval(set, no).correct, 72u);
}

TEST(Mocks, ReplayReproducesRecordedAccuracy) {
    testing::TempDir dir("replay");
    const auto set = make_set(500, 300);
    // Recorded responses: the first 381 items answered correctly, the rest wrong.
    {
        std::ofstream out(dir / "r.jsonl");
        for (std::size_t i = 0; i < set.items.size(); ++i) {
            const bool answer = i < 381 ? set.items[i].label : !set.items[i].label;
            out << nlohmann::json{{"id", set.items[i].id}, {"response", answer ? "True." : "False."}}.dump() << "\n";
        }
    }
    auto replay = ReplayClient::load(dir / "r.jsonl");
    const auto result = run_eval(set, replay);
    EXPECT_EQ(result.correct, 381u);
    EXPECT_DOUBLE_EQ(accuracy(result.correct, result.total), 76.2);
    EXPECT_THROW(ReplayClient::load(dir / "missing.jsonl"), IoError);
}

TEST(Mocks, MissingReplayEntryIsAnError) {
    const auto set = make_set(3, 1);
    ReplayClient replay(std::map<std::string, std::string>{{"q0", "True"}});
    EXPECT_THROW(run_eval(set, replay), DataError);
}

// retries and aborts ---------------------------------------------------------

/// Fails the first `failures` attempts for every item, then answers correctly.
class FlakyClient : public ModelClient {
public:
    FlakyClient(const TestSet& set, std::size_t failures) : oracle_(set), failures_(failures) {}
    std::string complete(const Query& q) override {
        {
            std::lock_guard lock(mutex_);
            if (attempts_[q.id]++ < failures_) throw TransportError("simulated failure");
        }
        return oracle_.complete(q);
    }

private:
    OracleClient oracle_;
    std::size_t failures_;
    std::mutex mutex_;
    std::map<std::string, std::size_t> attempts_;
};

TEST(Retries, TransientFailuresAreRetried) {
    const auto set = make_set(20, 10);
    FlakyClient flaky(set, 2);
    EvalOptions options;
    options.backoff = std::chrono::milliseconds(0);
    options.max_retries = 3;
    const auto result = run_eval(set, flaky, options);
    EXPECT_TRUE(result.valid);
    EXPECT_EQ(result.correct, 20u);
    EXPECT_EQ(result.requests, 60u);  // 2 failures + 1 success per item
}

TEST(Retries, ExhaustedRetriesAbortTheRun) {
    const auto set = make_set(20, 10);
    FlakyClient flaky(set, 100);
    EvalOptions options;
    options.backoff = std::chrono::milliseconds(1);
    options.max_retries = 2;
    options.max_in_flight = 1;
    const auto result = run_eval(set, flaky, options);
    EXPECT_FALSE(result.valid);
    EXPECT_NE(result.error.find("simulated failure"), std::string::npos);
    EXPECT_TRUE(result.items.empty());
    EXPECT_EQ(result.requests, 3u);
    EXPECT_EQ(result.total, 20u);
}

TEST(Retries, BackoffDoubles) {
    const auto set = make_set(1, 1);
    FlakyClient flaky(set, 3);
    EvalOptions options;
    options.backoff = std::chrono::milliseconds(20);
    options.max_retries = 3;
    const auto start = std::chrono::steady_clock::now();
    EXPECT_TRUE(run_eval(set, flaky, options).valid);
    // 20 + 40 + 80 ms of waiting before the fourth attempt succeeds.
    EXPECT_GE(std::chrono::steady_clock::now() - start, std::chrono::milliseconds(140));
}

// concurrency ----------------------------------------------------------------

/// Records the peak number of concurrent calls.
class CountingClient : public ModelClient {
public:
    explicit CountingClient(const TestSet& set) : oracle_(set) {}
    std::string complete(const Query& q) override {
        const auto now = ++in_flight_;
        auto peak = peak_.load();
        while (now > peak && !peak_.compare_exchange_weak(peak, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
        --in_flight_;
        return oracle_.complete(q);
    }
    std::size_t peak() const { return peak_; }

private:
    OracleClient oracle_;
    std::atomic<std::size_t> in_flight_{0}, peak_{0};
};

TEST(Concurrency, ParallelismDoesNotChangeResults) {
    const auto set = make_set(120, 70);
    std::map<std::string, std::string> responses;
    for (std::size_t i = 0; i < set.items.size(); ++i) responses[set.items[i].id] = i % 3 ? "True" : "false!";
    ReplayClient replay(responses);
    EvalOptions serial;
    serial.max_in_flight = 1;
    EvalOptions parallel;
    parallel.max_in_flight = 8;
    const auto a = run_eval(set, replay, serial, "m");
    const auto b = run_eval(set, replay, parallel, "m");
    EXPECT_EQ(a, b);
    for (std::size_t i = 0; i < set.items.size(); ++i) EXPECT_EQ(a.items[i].id, set.items[i].id);
}

TEST(Concurrency, RespectsInFlightBound) {
    const auto set = make_set(64, 10);
    CountingClient counting(set);
    EvalOptions options;
    options.max_in_flight = 4;
    EXPECT_EQ(run_eval(set, counting, options).correct, 64u);
    EXPECT_LE(counting.peak(), 4u);
    EXPECT_GE(counting.peak(), 2u);
}

TEST(RunEval, CopiesSetMetadata) {
    auto set = make_set(5, 5, "unseen_2_key1");
    set.provenance = Provenance::unseen;
    set.form = Form::translated;
    set.replica = 2;
    OracleClient oracle(set);
    const auto r = run_eval(set, oracle, {}, "key1-25214");
    EXPECT_EQ(r.test_set_name, "unseen_2_key1");
    EXPECT_EQ(r.model_label, "key1-25214");
    EXPECT_EQ(r.provenance, Provenance::unseen);
    EXPECT_EQ(r.form, Form::translated);
    EXPECT_EQ(r.run_index, 2u);
    EXPECT_THROW(run_eval(TestSet{}, oracle), DataError);
}

TEST(Persistence, RunResultRoundTrip) {
    testing::TempDir dir("runs");
    const auto set = make_set(10, 4);
    std::map<std::string, std::string> responses;
    for (const auto& item : set.items) responses[item.id] = "maybe";
    responses["q1"] = "True";
    ReplayClient replay(responses);
    const auto r = run_eval(set, replay, {}, "base");
    write_run_result(r, dir / "x" / "r.json");
    EXPECT_EQ(read_run_result(dir / "x" / "r.json"), r);
    EXPECT_THROW(read_run_result(dir / "nope.json"), IoError);
}

// HTTP client ----------------------------------------------------------------

class LocalServer {
public:
    explicit LocalServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
        server_.Post("/v1/chat", std::move(handler));
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~LocalServer() {
        server_.stop();
        thread_.join();
    }
    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat"; }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

TEST(Http, RequestBodyShape) {
    const auto set = make_set(1, 1);
    const auto body = HttpChatClient::request_body("m", make_query(set.items[0]));
    EXPECT_EQ(body["model"], "m");
    ASSERT_EQ(body["messages"].size(), 2u);
    EXPECT_EQ(body["messages"][1]["role"], "user");
    EXPECT_EQ(body["messages"][1]["content"], set.items[0].record.messages[1].content);
}

TEST(Http, ResponseShapes) {
    EXPECT_EQ(HttpChatClient::response_content(R"({"content": "True"})"), "True");
    EXPECT_EQ(HttpChatClient::response_content(R"({"choices": [{"message": {"content": "False"}}]})"), "False");
    EXPECT_THROW(HttpChatClient::response_content("<html>"), TransportError);
    EXPECT_THROW(HttpChatClient::response_content(R"({"choices": []})"), TransportError);
}

TEST(Http, EndToEndAgainstLocalServer) {
    const auto set = make_set(30, 12);
    std::map<std::string, bool> by_statement;
    for (const auto& item : set.items) by_statement[record_statement(item.record)] = item.label;
    std::atomic<int> authorized{0};
    LocalServer server([&](const httplib::Request& req, httplib::Response& res) {
        if (req.get_header_value("Authorization") == "Bearer secret") ++authorized;
        const auto body = nlohmann::json::parse(req.body);
        const auto statement = body["messages"].back()["content"].get<std::string>();
        const bool label = by_statement.at(statement);
        res.set_content(nlohmann::json{{"choices", {{{"message", {{"content", label ? "True" : "False"}}}}}}}.dump(),
                        "application/json");
    });
    HttpChatClient client({server.endpoint(), "m", "secret", std::chrono::seconds(5)});
    const auto r = run_eval(set, client);
    EXPECT_TRUE(r.valid);
    EXPECT_EQ(r.correct, 30u);
    EXPECT_EQ(authorized.load(), 30);
}

TEST(Http, ServerErrorsAreTransportErrors) {
    LocalServer server([](const httplib::Request&, httplib::Response& res) { res.status = 503; });
    HttpChatClient client({server.endpoint(), "m", "", std::chrono::seconds(5)});
    const auto set = make_set(2, 1);
    EXPECT_THROW(client.complete(make_query(set.items[0])), TransportError);
    EvalOptions options;
    options.backoff = std::chrono::milliseconds(1);
    options.max_retries = 1;
    const auto r = run_eval(set, client, options);
    EXPECT_FALSE(r.valid);
    EXPECT_NE(r.error.find("503"), std::string::npos);
}

TEST(Http, UnreachableEndpoint) {
    HttpChatClient client({"http://127.0.0.1:1/v1/chat", "m", "", std::chrono::seconds(2)});
    const auto set = make_set(1, 1);
    EXPECT_THROW(client.complete(make_query(set.items[0])), TransportError);
    EXPECT_THROW(HttpChatClient({"localhost/v1", "m", "", std::chrono::seconds(1)}), DataError);
}

}  // namespace
}  // namespace rosetta
