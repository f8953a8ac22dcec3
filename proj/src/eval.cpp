#include "rosetta/eval.hpp"

#include <algorithm>
#include <cctype>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "rosetta/errors.hpp"

namespace rosetta {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

const char* to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::True: return "true";
        case Verdict::False: return "false";
        case Verdict::Unknown: return "unknown";
    }
    return "?";
}

Verdict parse_verdict(std::string_view text) {
    if (text == "true") return Verdict::True;
    if (text == "false") return Verdict::False;
    if (text == "unknown") return Verdict::Unknown;
    throw DataError("unknown verdict '" + std::string(text) + "'");
}

Verdict normalize_verdict(std::string_view response) {
    const auto word_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
    std::size_t pos = 0;
    while (pos < response.size()) {
        while (pos < response.size() && !word_char(response[pos])) ++pos;
        const auto begin = pos;
        while (pos < response.size() && word_char(response[pos])) ++pos;
        std::string word(response.substr(begin, pos - begin));
        std::transform(word.begin(), word.end(), word.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (word == "true") return Verdict::True;
        if (word == "false") return Verdict::False;
    }
    return Verdict::Unknown;
}

Query make_query(const TestItem& item) {
    Query q{item.id, {}};
    for (const auto& m : item.record.messages) {
        if (m.role != "assistant") q.messages.push_back(m);
    }
    return q;
}

// ---------------------------------------------------------------------------
// mock clients

OracleClient::OracleClient(const TestSet& set) {
    for (const auto& item : set.items) labels_.emplace(item.id, item.label);
}

std::string OracleClient::complete(const Query& query) {
    const auto it = labels_.find(query.id);
    if (it == labels_.end()) throw DataError("oracle has no label for '" + query.id + "'");
    return it->second ? "True" : "False";
}

std::string InvertedClient::complete(const Query& query) {
    return OracleClient::complete(query) == "True" ? "False" : "True";
}

ReplayClient ReplayClient::load(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open replay file " + path.string());
    std::map<std::string, std::string> responses;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = json::parse(line);
            responses[j.at("id").get<std::string>()] = j.at("response").get<std::string>();
        } catch (const json::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return ReplayClient(std::move(responses));
}

std::string ReplayClient::complete(const Query& query) {
    const auto it = responses_.find(query.id);
    if (it == responses_.end()) throw DataError("no recorded response for '" + query.id + "'");
    return it->second;
}

// ---------------------------------------------------------------------------
// HTTP client

HttpChatClient::HttpChatClient(HttpClientOptions options) : options_(std::move(options)) {
    const auto scheme = options_.endpoint.find("://");
    if (scheme == std::string::npos) throw DataError("endpoint needs a scheme: " + options_.endpoint);
    const auto slash = options_.endpoint.find('/', scheme + 3);
    base_ = options_.endpoint.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : options_.endpoint.substr(slash);
}

json HttpChatClient::request_body(std::string_view model, const Query& query) {
    json messages = json::array();
    for (const auto& m : query.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
    return json{{"model", model}, {"messages", std::move(messages)}};
}

std::string HttpChatClient::response_content(std::string_view body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::parse_error& e) {
        throw TransportError(std::string("response is not JSON: ") + e.what());
    }
    if (j.contains("content") && j["content"].is_string()) return j["content"].get<std::string>();
    // OpenAI-style {"choices": [{"message": {"content": ...}}]}
    if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
        const auto& first = j["choices"].front();
        if (first.contains("message") && first["message"].contains("content") &&
            first["message"]["content"].is_string()) {
            return first["message"]["content"].get<std::string>();
        }
    }
    throw TransportError("response has no content field");
}

std::string HttpChatClient::complete(const Query& query) {
    httplib::Client client(base_);
    client.set_connection_timeout(options_.timeout);
    client.set_read_timeout(options_.timeout);
    httplib::Headers headers;
    if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);
    const auto body = request_body(options_.model, query).dump();
    const auto res = client.Post(path_, headers, body, "application/json");
    if (!res) throw TransportError(options_.endpoint + ": " + httplib::to_string(res.error()));
    if (res->status != 200) {
        throw TransportError(options_.endpoint + ": HTTP " + std::to_string(res->status));
    }
    return response_content(res->body);
}

// ---------------------------------------------------------------------------
// scoring

double accuracy(std::size_t correct, std::size_t total) {
    if (total == 0) throw ZeroTotal();
    if (correct > total) throw DataError("correct count exceeds total");
    return 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

std::size_t score(std::span<const ItemResult> items) {
    return static_cast<std::size_t>(std::count_if(items.begin(), items.end(), [](const ItemResult& r) { return r.correct(); }));
}

RunResult run_eval(const TestSet& set, ModelClient& client, const EvalOptions& options, std::string model_label) {
    if (set.items.empty()) throw DataError("test set '" + set.name + "' is empty");

    const auto n = set.items.size();
    std::vector<ItemResult> items(n);
    std::vector<char> done(n, 0);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> requests{0};
    std::atomic<bool> abort{false};
    std::mutex error_mutex;
    std::string error;
    std::exception_ptr failure;

    auto worker = [&] {
        for (;;) {
            if (abort.load()) return;
            const auto i = next.fetch_add(1);
            if (i >= n) return;
            const auto& item = set.items[i];
            const auto query = make_query(item);
            auto delay = options.backoff;
            for (std::size_t attempt = 0;; ++attempt) {
                ++requests;
                try {
                    auto response = client.complete(query);
                    const auto verdict = normalize_verdict(response);
                    items[i] = ItemResult{item.id, item.label, verdict, std::move(response)};
                    done[i] = 1;
                    break;
                } catch (const TransportError& e) {
                    if (attempt >= options.max_retries) {
                        std::lock_guard lock(error_mutex);
                        if (error.empty()) error = "item " + item.id + ": " + e.what();
                        abort = true;
                        return;
                    }
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!failure) failure = std::current_exception();
                    abort = true;
                    return;
                }
                if (delay.count() > 0) std::this_thread::sleep_for(delay);
                delay *= 2;
            }
        }
    };

    const auto workers = std::clamp<std::size_t>(options.max_in_flight, 1, n);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    RunResult result;
    result.test_set_name = set.name;
    result.model_label = std::move(model_label);
    result.provenance = set.provenance;
    result.form = set.form;
    result.run_index = set.replica;
    result.total = n;
    result.requests = requests.load();
    result.valid = error.empty();
    result.error = error;
    for (std::size_t i = 0; i < n; ++i) {
        if (done[i]) result.items.push_back(std::move(items[i]));
    }
    result.correct = score(result.items);
    return result;
}

// ---------------------------------------------------------------------------
// persistence

ordered_json to_json(const RunResult& r) {
    ordered_json items = ordered_json::array();
    for (const auto& item : r.items) {
        items.push_back({{"id", item.id},
                         {"expected", item.expected},
                         {"verdict", to_string(item.verdict)},
                         {"raw_response", item.raw_response}});
    }
    return ordered_json{
        {"test_set", r.test_set_name},
        {"model_label", r.model_label},
        {"provenance", to_string(r.provenance)},
        {"form", to_string(r.form)},
        {"run_index", r.run_index},
        {"total", r.total},
        {"correct", r.correct},
        {"valid", r.valid},
        {"error", r.error},
        {"requests", r.requests},
        {"items", std::move(items)},
    };
}

RunResult run_result_from_json(const json& j) {
    RunResult r;
    try {
        r.test_set_name = j.at("test_set").get<std::string>();
        r.model_label = j.at("model_label").get<std::string>();
        r.provenance = parse_provenance(j.at("provenance").get<std::string>());
        r.form = parse_form(j.at("form").get<std::string>());
        r.run_index = j.at("run_index").get<std::size_t>();
        r.total = j.at("total").get<std::size_t>();
        r.correct = j.at("correct").get<std::size_t>();
        r.valid = j.value("valid", true);
        r.error = j.value("error", std::string{});
        r.requests = j.value("requests", std::size_t{0});
        if (j.contains("items")) {
            for (const auto& item : j["items"]) {
                r.items.push_back({item.at("id").get<std::string>(), item.at("expected").get<bool>(),
                                   parse_verdict(item.at("verdict").get<std::string>()),
                                   item.value("raw_response", std::string{})});
            }
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("run result: ") + e.what());
    }
    if (r.correct > r.total) throw DataError("run result " + r.test_set_name + ": correct exceeds total");
    if (!r.items.empty() && score(r.items) != r.correct) {
        throw DataError("run result " + r.test_set_name + ": correct does not match item verdicts");
    }
    return r;
}

void write_run_result(const RunResult& result, const fs::path& path) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << to_json(result).dump(1) << '\n';
    if (!out.flush()) throw IoError("write failed for " + path.string());
}

RunResult read_run_result(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    return run_result_from_json(j);
}

}  // namespace rosetta
