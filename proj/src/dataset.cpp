#include "rosetta/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "rosetta/errors.hpp"
#include "rosetta/sampling.hpp"

namespace rosetta {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

const char* to_string(Provenance p) noexcept { return p == Provenance::seen ? "seen" : "unseen"; }
const char* to_string(Form f) noexcept { return f == Form::lean ? "lean" : "translated"; }

Provenance parse_provenance(std::string_view text) {
    if (text == "seen") return Provenance::seen;
    if (text == "unseen") return Provenance::unseen;
    throw DataError("unknown provenance '" + std::string(text) + "'");
}

Form parse_form(std::string_view text) {
    if (text == "lean") return Form::lean;
    if (text == "translated") return Form::translated;
    throw DataError("unknown form '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// ingestion

Corpus parse_source(std::istream& in, Origin origin) {
    Corpus corpus;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;

        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw SourceParseError(line_no, e.what());
        }
        if (!j.is_object()) throw SourceParseError(line_no, "expected a JSON object");

        SourceProblem p;
        p.origin = origin;
        const auto id = j.find("id");
        if (id == j.end()) throw SourceParseError(line_no, "missing id");
        if (id->is_string()) {
            p.id = id->get<std::string>();
        } else if (id->is_number_integer()) {
            p.id = std::to_string(id->get<long long>());
        } else {
            throw SourceParseError(line_no, "id must be a string or integer");
        }

        const auto statement = j.find("statement");
        if (statement == j.end() || !statement->is_string()) {
            throw SourceParseError(line_no, "missing statement");
        }
        p.statement = statement->get<std::string>();
        if (p.statement.empty()) throw SourceParseError(line_no, "empty statement");

        const auto label = j.find("label");
        if (label == j.end() || label->is_null()) throw MissingLabel(line_no);
        if (label->is_boolean()) {
            p.truth_label = label->get<bool>();
        } else if (label->is_string() && (*label == "True" || *label == "true")) {
            p.truth_label = true;
        } else if (label->is_string() && (*label == "False" || *label == "false")) {
            p.truth_label = false;
        } else {
            throw SourceParseError(line_no, "label must be a boolean or \"True\"/\"False\"");
        }

        if (!seen_ids.insert(p.id).second) throw DuplicateId(p.id);
        corpus.push_back(std::move(p));
    }
    return corpus;
}

Corpus ingest_source(const fs::path& path, Origin origin) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open corpus " + path.string());
    return parse_source(in, origin);
}

// ---------------------------------------------------------------------------
// records

namespace {

ConversationRecord make_record(std::string_view prompt, std::string user, bool label) {
    return ConversationRecord{{
        {"system", std::string(prompt)},
        {"user", std::move(user)},
        {"assistant", label ? "True" : "False"},
    }};
}

bool allowed_role(std::string_view role) {
    return role == "system" || role == "user" || role == "assistant" || role == "function";
}

}  // namespace

ConversationRecord build_record(const SourceProblem& problem, std::string_view system_prompt) {
    return make_record(system_prompt, problem.statement, problem.truth_label);
}

ConversationRecord build_record(const SourceProblem& problem, const Translator& translator,
                                std::string_view system_prompt) {
    return make_record(system_prompt, translator.translate(problem.statement), problem.truth_label);
}

const char* to_string(Violation v) noexcept {
    switch (v) {
        case Violation::empty: return "Empty";
        case Violation::first_not_system: return "FirstNotSystem";
        case Violation::invalid_role: return "InvalidRole";
        case Violation::missing_user: return "MissingUser";
        case Violation::multiple_user: return "MultipleUser";
        case Violation::missing_assistant: return "MissingAssistant";
        case Violation::multiple_assistant: return "MultipleAssistant";
        case Violation::bad_label: return "BadLabel";
    }
    return "?";
}

std::vector<Violation> validate_record(const ConversationRecord& record) {
    const auto& messages = record.messages;
    if (messages.empty()) return {Violation::empty};

    std::vector<Violation> out;
    if (messages.front().role != "system") out.push_back(Violation::first_not_system);
    if (std::any_of(messages.begin(), messages.end(), [](const Message& m) { return !allowed_role(m.role); })) {
        out.push_back(Violation::invalid_role);
    }
    const auto count = [&](std::string_view role) {
        return std::count_if(messages.begin(), messages.end(), [&](const Message& m) { return m.role == role; });
    };
    const auto users = count("user");
    const auto assistants = count("assistant");
    if (users == 0) out.push_back(Violation::missing_user);
    if (users > 1) out.push_back(Violation::multiple_user);
    if (assistants == 0) out.push_back(Violation::missing_assistant);
    if (assistants > 1) out.push_back(Violation::multiple_assistant);
    if (assistants == 1 && !record_label(record)) out.push_back(Violation::bad_label);
    return out;
}

std::optional<bool> record_label(const ConversationRecord& record) {
    for (const auto& m : record.messages) {
        if (m.role != "assistant") continue;
        if (m.content == "True") return true;
        if (m.content == "False") return false;
        return std::nullopt;
    }
    return std::nullopt;
}

const std::string& record_statement(const ConversationRecord& record) {
    for (const auto& m : record.messages) {
        if (m.role == "user") return m.content;
    }
    throw InvalidRecord("no user message");
}

ordered_json to_json(const ConversationRecord& record) {
    ordered_json messages = ordered_json::array();
    for (const auto& m : record.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
    return ordered_json{{"messages", std::move(messages)}};
}

ConversationRecord record_from_json(const json& j) {
    ConversationRecord record;
    if (!j.is_object() || !j.contains("messages") || !j["messages"].is_array()) {
        throw InvalidRecord("expected {\"messages\": [...]}");
    }
    for (const auto& m : j["messages"]) {
        if (!m.is_object() || !m.contains("role") || !m.contains("content") || !m["role"].is_string() ||
            !m["content"].is_string()) {
            throw InvalidRecord("message needs string role and content");
        }
        record.messages.push_back({m["role"].get<std::string>(), m["content"].get<std::string>()});
    }
    return record;
}

std::string to_jsonl_line(const ConversationRecord& record) { return to_json(record).dump() + "\n"; }

// ---------------------------------------------------------------------------
// emission

namespace {

void write_file(const fs::path& path, const std::string& contents) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << contents;
    if (!out.flush()) throw IoError("write failed for " + path.string());
}

std::string checked_line(const ConversationRecord& record) {
    if (const auto violations = validate_record(record); !violations.empty()) {
        throw InvalidRecord(to_string(violations.front()));
    }
    return to_jsonl_line(record);
}

std::optional<ConversationRecord> try_build(const SourceProblem& problem, const Translator* translator,
                                            std::string_view prompt) {
    if (translator == nullptr) return build_record(problem, prompt);
    try {
        return build_record(problem, *translator, prompt);
    } catch (const DataError&) {
        return std::nullopt;
    }
}

}  // namespace

EmissionSummary emit_dataset(const Corpus& corpus, const DatasetSpec& spec, const Translator* translator,
                             const fs::path& out, std::string_view system_prompt) {
    if (spec.size > corpus.size()) throw SizeExceedsCorpus(spec.size, corpus.size());
    const auto order = sample_indices(corpus.size(), corpus.size(), spec.seed);

    EmissionSummary summary;
    std::string body;
    for (const auto index : order) {
        if (summary.written == spec.size) break;
        const auto record = try_build(corpus[index], translator, system_prompt);
        if (!record) {
            ++summary.skipped;
            continue;
        }
        body += checked_line(*record);
        ++summary.written;
    }
    if (summary.written < spec.size) throw SizeExceedsCorpus(spec.size, summary.written);
    write_file(out, body);
    return summary;
}

// ---------------------------------------------------------------------------
// test sets

std::vector<std::string> TestSet::ids() const {
    std::vector<std::string> out;
    out.reserve(items.size());
    for (const auto& item : items) out.push_back(item.id);
    return out;
}

std::vector<TestSet> sample_test_sets(const Corpus& corpus, Provenance provenance, const Translator& translator,
                                      const SamplingOptions& options) {
    if (options.replicas == 0) throw DataError("at least one replica is required");
    if (options.n > corpus.size()) throw SizeExceedsCorpus(options.n, corpus.size());
    if (options.mode == SamplingMode::disjoint && options.n * options.replicas > corpus.size()) {
        throw SizeExceedsCorpus(options.n * options.replicas, corpus.size());
    }

    const std::string prefix = to_string(provenance);
    std::vector<TestSet> sets;

    // Walks a seeded permutation and keeps problems that translate.
    auto fill = [&](TestSet& lean, TestSet& translated, const std::vector<std::size_t>& order, std::size_t& cursor) {
        while (lean.items.size() < options.n && cursor < order.size()) {
            const auto& problem = corpus[order[cursor++]];
            ConversationRecord encoded;
            try {
                encoded = build_record(problem, translator, options.system_prompt);
            } catch (const DataError&) {
                continue;
            }
            lean.items.push_back({problem.id, problem.truth_label, build_record(problem, options.system_prompt)});
            translated.items.push_back({problem.id, problem.truth_label, std::move(encoded)});
        }
        if (lean.items.size() < options.n) throw SizeExceedsCorpus(options.n, lean.items.size());
    };

    std::vector<std::size_t> shared_order;
    std::size_t shared_cursor = 0;
    if (options.mode == SamplingMode::disjoint) {
        shared_order = sample_indices(corpus.size(), corpus.size(), options.seed);
    }

    for (std::size_t r = 0; r < options.replicas; ++r) {
        const auto index = std::to_string(r + 1);
        TestSet lean{prefix + "_" + index + "_lean", provenance, Form::lean, "lean", r + 1, {}, {}};
        TestSet translated{prefix + "_" + index + "_" + translator.name(), provenance, Form::translated,
                           translator.name(), r + 1, {}, {}};
        if (options.mode == SamplingMode::disjoint) {
            lean.seed = translated.seed = options.seed;
            fill(lean, translated, shared_order, shared_cursor);
        } else {
            const auto seed = replica_seed(options.seed, r);
            lean.seed = translated.seed = seed;
            std::size_t cursor = 0;
            fill(lean, translated, sample_indices(corpus.size(), corpus.size(), seed), cursor);
        }
        sets.push_back(std::move(lean));
        sets.push_back(std::move(translated));
    }
    return sets;
}

void write_test_set(const TestSet& set, const fs::path& dir) {
    std::string body;
    for (const auto& item : set.items) body += checked_line(item.record);
    write_file(dir / (set.name + ".jsonl"), body);

    ordered_json manifest{
        {"name", set.name},
        {"provenance", to_string(set.provenance)},
        {"form", to_string(set.form)},
        {"key", set.key_name},
        {"replica", set.replica},
        {"seed", set.seed},
        {"records", set.name + ".jsonl"},
        {"ids", set.ids()},
    };
    write_file(dir / (set.name + ".manifest.json"), manifest.dump(1) + "\n");
}

TestSet read_test_set(const fs::path& manifest_path) {
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) throw IoError("cannot open manifest " + manifest_path.string());
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const json::exception& e) {
        throw DataError("manifest " + manifest_path.string() + ": " + e.what());
    }

    TestSet set;
    std::vector<std::string> ids;
    fs::path records_path;
    try {
        set.name = manifest.at("name").get<std::string>();
        set.provenance = parse_provenance(manifest.at("provenance").get<std::string>());
        set.form = parse_form(manifest.at("form").get<std::string>());
        set.key_name = manifest.value("key", std::string(set.form == Form::lean ? "lean" : ""));
        set.replica = manifest.value("replica", std::size_t{1});
        set.seed = manifest.at("seed").get<std::uint64_t>();
        ids = manifest.at("ids").get<std::vector<std::string>>();
        records_path = manifest_path.parent_path() / manifest.value("records", set.name + ".jsonl");
    } catch (const json::exception& e) {
        throw DataError("manifest " + manifest_path.string() + ": " + e.what());
    }

    std::ifstream records(records_path, std::ios::binary);
    if (!records) throw IoError("cannot open records " + records_path.string());
    std::string line;
    std::size_t i = 0;
    while (std::getline(records, line)) {
        if (line.empty()) continue;
        if (i >= ids.size()) throw DataError(records_path.string() + ": more records than manifest ids");
        ConversationRecord record;
        try {
            record = record_from_json(json::parse(line));
        } catch (const json::exception& e) {
            throw DataError(records_path.string() + ": " + e.what());
        }
        const auto label = record_label(record);
        if (!label || !validate_record(record).empty()) {
            throw InvalidRecord(records_path.string() + " record " + std::to_string(i + 1));
        }
        set.items.push_back({ids[i], *label, std::move(record)});
        ++i;
    }
    if (i != ids.size()) throw DataError(records_path.string() + ": fewer records than manifest ids");
    return set;
}

std::vector<fs::path> list_test_sets(const fs::path& dir) {
    std::vector<fs::path> out;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        const auto name = entry.path().filename().string();
        if (entry.is_regular_file() && name.ends_with(".manifest.json")) out.push_back(entry.path());
    }
    if (ec) throw IoError("cannot list " + dir.string());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace rosetta
