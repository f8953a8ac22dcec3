#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rosetta/dataset.hpp"
#include "rosetta/eval.hpp"
#include "rosetta/report.hpp"

namespace rosetta {

struct ModelSettings {
    std::string endpoint;
    std::string model;
    std::size_t max_in_flight = 8;
    std::size_t max_retries = 3;
    std::size_t backoff_ms = 200;
    std::size_t timeout_s = 60;
};

inline constexpr const char* kApiKeyEnv = "ROSETTA_API_KEY";

/// One JSON file describing the whole experiment grid. Relative paths are
/// resolved against the config file's directory.
struct PipelineConfig {
    std::filesystem::path training_corpus;
    std::filesystem::path unseen_corpus;
    std::vector<std::filesystem::path> keys;
    std::optional<std::filesystem::path> inventory;
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 0;
    std::vector<std::size_t> train_sizes{25214, 20000, 10000};
    std::size_t seen_n = 500;
    std::size_t unseen_n = 200;
    std::size_t replicas = 3;
    bool disjoint = false;
    std::string system_prompt{kDefaultSystemPrompt};
    ModelSettings model;

    static PipelineConfig load(const std::filesystem::path& path);

    /// Throws IoError for missing files and DataError for bad sizes.
    void validate() const;

    SymbolInventory load_inventory() const;
    std::filesystem::path train_dir() const { return output_dir / "train"; }
    std::filesystem::path test_dir(const std::string& key) const { return output_dir / "testsets" / key; }
    std::filesystem::path results_dir() const { return output_dir / "results"; }
};

int cmd_translate(const std::filesystem::path& in, const std::filesystem::path& key, const std::filesystem::path& out,
                  bool decode, const std::optional<std::filesystem::path>& inventory, std::ostream& err);

int cmd_build(const PipelineConfig& config, std::ostream& log, std::ostream& err);

struct EvalCommand {
    std::string model_label;
    std::string key;                  // whose test sets to run; empty = first key
    std::string mock;                 // oracle | inverted | constant-true | constant-false | replay; empty = HTTP
    std::filesystem::path replay_dir; // one <test_set>.jsonl per test set
    std::optional<std::size_t> parallel;
    std::optional<std::filesystem::path> results_dir;
};

int cmd_eval(const PipelineConfig& config, const EvalCommand& command, std::ostream& log, std::ostream& err);

int cmd_report(const std::filesystem::path& results_dir, ReportFormat format,
               const std::optional<std::filesystem::path>& out, const std::optional<std::filesystem::path>& chart,
               std::ostream& stdout_stream, std::ostream& err);

/// Every run result under `dir` (recursively), sorted by path.
std::vector<RunResult> load_results(const std::filesystem::path& dir);

/// Parses argv and dispatches to the subcommands. Exit status: 0 ok, 1 I/O,
/// 2 data or translation error, 3 model transport failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rosetta
