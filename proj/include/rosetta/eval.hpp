#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rosetta/dataset.hpp"

namespace rosetta {

enum class Verdict { True, False, Unknown };

const char* to_string(Verdict v) noexcept;
Verdict parse_verdict(std::string_view text);

/// Case-insensitive first standalone "true" or "false" word.
Verdict normalize_verdict(std::string_view response);

/// One request: the conversation without its assistant answer. The id lets
/// mock clients look up ground truth or recorded responses.
struct Query {
    std::string id;
    std::vector<Message> messages;
};

Query make_query(const TestItem& item);

/// Chat-completion endpoint. Implementations must be safe to call from
/// several threads at once and throw TransportError on failure.
class ModelClient {
public:
    virtual ~ModelClient() = default;
    virtual std::string complete(const Query& query) = 0;
};

/// Answers with the ground-truth label.
class OracleClient : public ModelClient {
public:
    explicit OracleClient(std::map<std::string, bool> labels) : labels_(std::move(labels)) {}
    explicit OracleClient(const TestSet& set);
    std::string complete(const Query& query) override;

protected:
    std::map<std::string, bool> labels_;
};

/// Answers with the negated ground-truth label.
class InvertedClient : public OracleClient {
public:
    using OracleClient::OracleClient;
    std::string complete(const Query& query) override;
};

class ConstantClient : public ModelClient {
public:
    explicit ConstantClient(std::string answer) : answer_(std::move(answer)) {}
    std::string complete(const Query&) override { return answer_; }

private:
    std::string answer_;
};

/// Serves recorded responses from line-delimited {"id", "response"}.
class ReplayClient : public ModelClient {
public:
    explicit ReplayClient(std::map<std::string, std::string> responses) : responses_(std::move(responses)) {}
    static ReplayClient load(const std::filesystem::path& path);
    std::string complete(const Query& query) override;

private:
    std::map<std::string, std::string> responses_;
};

struct HttpClientOptions {
    std::string endpoint;  // e.g. http://localhost:8080/v1/chat
    std::string model;
    std::string api_key;   // sent as a bearer token when non-empty
    std::chrono::seconds timeout{60};
};

/// POSTs {"model", "messages"} and reads {"content"} (or the first choice's
/// message content) from the JSON response.
class HttpChatClient : public ModelClient {
public:
    explicit HttpChatClient(HttpClientOptions options);
    std::string complete(const Query& query) override;

    static nlohmann::json request_body(std::string_view model, const Query& query);
    static std::string response_content(std::string_view body);

private:
    HttpClientOptions options_;
    std::string base_;  // scheme://host[:port]
    std::string path_;
};

struct EvalOptions {
    std::size_t max_in_flight = 8;
    std::size_t max_retries = 3;
    std::chrono::milliseconds backoff{200};  // doubled after each failed attempt
};

struct ItemResult {
    std::string id;
    bool expected = false;
    Verdict verdict = Verdict::Unknown;
    std::string raw_response;

    bool correct() const noexcept {
        return verdict != Verdict::Unknown && (verdict == Verdict::True) == expected;
    }
    bool operator==(const ItemResult&) const = default;
};

struct RunResult {
    std::string test_set_name;
    std::string model_label;
    Provenance provenance = Provenance::seen;
    Form form = Form::lean;
    std::size_t run_index = 1;
    std::size_t total = 0;
    std::size_t correct = 0;
    bool valid = true;
    std::string error;              // set when the run aborted
    std::size_t requests = 0;       // attempts issued, retries included
    std::vector<ItemResult> items;  // test-set order; partial when invalid

    bool operator==(const RunResult&) const = default;
};

double accuracy(std::size_t correct, std::size_t total);

/// Recomputes `correct` from the per-item verdicts.
std::size_t score(std::span<const ItemResult> items);

/// Queries every item once (plus retries) with at most
/// `options.max_in_flight` requests outstanding. A TransportError that
/// survives all retries aborts the run and yields a partial result with
/// `valid == false`.
RunResult run_eval(const TestSet& set, ModelClient& client, const EvalOptions& options = {},
                   std::string model_label = {});

nlohmann::ordered_json to_json(const RunResult& result);
RunResult run_result_from_json(const nlohmann::json& j);
void write_run_result(const RunResult& result, const std::filesystem::path& path);
RunResult read_run_result(const std::filesystem::path& path);

}  // namespace rosetta
