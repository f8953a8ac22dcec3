#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rosetta/dataset.hpp"
#include "rosetta/eval.hpp"

namespace rosetta::testing {

std::filesystem::path data_dir();

std::string read_text(const std::filesystem::path& path);

/// Lines of a text file without their terminators.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Deterministic Lean-style theorem statements: binders, hypotheses in
/// parentheses, arithmetic, comparison chains, implications, quantifiers.
std::vector<std::string> synthetic_statements(std::size_t n, std::uint64_t seed);

/// Synthetic problems with ids "<prefix>-<index>" and pseudo-random labels.
Corpus synthetic_corpus(std::size_t n, std::uint64_t seed, Origin origin, const std::string& id_prefix);

void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

/// One cell of a printed result table.
struct PrintedCell {
    Provenance provenance;
    Form form;
    std::string accuracy;   // printed strings keep their precision
    std::string correct;
    std::string incorrect;
    std::vector<RunResult> runs;
    std::vector<double> printed_run_accuracies;
};

struct PrintedModel {
    std::string label;
    std::string title;
    bool fine_tuned = false;
    std::string key;
    std::size_t train_size = 0;
    std::vector<PrintedCell> cells;

    std::vector<RunResult> all_runs() const;
};

struct ReferenceTables {
    std::vector<PrintedModel> models;
    double seen_translated = 0, seen_lean = 0, unseen_lean_key1 = 0, unseen_translated_key1 = 0;
    double cross_set_key1_25214 = 0, cross_set_key2 = 0;
    double seen_size_gain = 0, unseen_size_gain = 0;

    const PrintedModel& model(const std::string& label) const;
};

ReferenceTables load_reference_tables();

/// Decimal places of a printed number ("76.66667" -> 5, "100" -> 0).
int printed_decimals(const std::string& printed);

}  // namespace rosetta::testing
