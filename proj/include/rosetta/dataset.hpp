#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rosetta/translation.hpp"

namespace rosetta {

enum class Origin { training, unseen };
enum class Provenance { seen, unseen };
enum class Form { lean, translated };

const char* to_string(Provenance p) noexcept;
const char* to_string(Form f) noexcept;
Provenance parse_provenance(std::string_view text);
Form parse_form(std::string_view text);

struct SourceProblem {
    std::string id;
    std::string statement;
    bool truth_label = false;
    Origin origin = Origin::training;
};

using Corpus = std::vector<SourceProblem>;

/// Line-delimited JSON records {"id", "statement", "label"}; the label may
/// be a boolean or the strings "True"/"False". Blank lines are ignored.
Corpus parse_source(std::istream& in, Origin origin);
Corpus ingest_source(const std::filesystem::path& path, Origin origin);

inline constexpr std::string_view kDefaultSystemPrompt =
    "You are given a logical statement. Decide whether it is true. Answer only \"True\" or \"False\".";

struct Message {
    std::string role;
    std::string content;

    bool operator==(const Message&) const = default;
};

struct ConversationRecord {
    std::vector<Message> messages;

    bool operator==(const ConversationRecord&) const = default;
};

/// Record in Lean form (user content is the raw statement).
ConversationRecord build_record(const SourceProblem& problem, std::string_view system_prompt = kDefaultSystemPrompt);

/// Record in translated form.
ConversationRecord build_record(const SourceProblem& problem, const Translator& translator,
                                std::string_view system_prompt = kDefaultSystemPrompt);

enum class Violation {
    empty,
    first_not_system,
    invalid_role,
    missing_user,
    multiple_user,
    missing_assistant,
    multiple_assistant,
    bad_label,
};

const char* to_string(Violation v) noexcept;

/// Empty result means the record is well-formed.
std::vector<Violation> validate_record(const ConversationRecord& record);

/// "True"/"False" from the record's assistant message, if well-formed.
std::optional<bool> record_label(const ConversationRecord& record);
const std::string& record_statement(const ConversationRecord& record);

nlohmann::ordered_json to_json(const ConversationRecord& record);
ConversationRecord record_from_json(const nlohmann::json& j);
std::string to_jsonl_line(const ConversationRecord& record);

struct DatasetSpec {
    std::string key_name = "lean";  // "lean" means untranslated
    std::size_t size = 0;
    std::uint64_t seed = 0;
};

struct EmissionSummary {
    std::size_t written = 0;
    std::size_t skipped = 0;  // problems whose translation failed
};

/// Writes `spec.size` validated records chosen by a seeded shuffle. A null
/// translator emits the Lean form.
EmissionSummary emit_dataset(const Corpus& corpus, const DatasetSpec& spec, const Translator* translator,
                             const std::filesystem::path& out,
                             std::string_view system_prompt = kDefaultSystemPrompt);

struct TestItem {
    std::string id;
    bool label = false;
    ConversationRecord record;
};

struct TestSet {
    std::string name;
    Provenance provenance = Provenance::seen;
    Form form = Form::lean;
    std::string key_name;  // "lean" for the Lean form
    std::size_t replica = 1;
    std::uint64_t seed = 0;
    std::vector<TestItem> items;

    std::vector<std::string> ids() const;
};

enum class SamplingMode { independent, disjoint };

struct SamplingOptions {
    std::size_t n = 500;
    std::size_t replicas = 3;
    std::uint64_t seed = 0;
    SamplingMode mode = SamplingMode::independent;
    std::string system_prompt{kDefaultSystemPrompt};
};

/// For each replica, one Lean-form and one translated-form set over the
/// same problem ids, in that order.
std::vector<TestSet> sample_test_sets(const Corpus& corpus, Provenance provenance, const Translator& translator,
                                      const SamplingOptions& options);

/// `<name>.jsonl` with the records and `<name>.manifest.json` with
/// {name, provenance, form, key, replica, seed, ids}.
void write_test_set(const TestSet& set, const std::filesystem::path& dir);
TestSet read_test_set(const std::filesystem::path& manifest);

/// Manifests in `dir`, sorted by file name.
std::vector<std::filesystem::path> list_test_sets(const std::filesystem::path& dir);

}  // namespace rosetta
