#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rosetta/eval.hpp"

namespace rosetta {

struct Family {
    Provenance provenance = Provenance::seen;
    Form form = Form::lean;

    bool operator==(const Family&) const = default;
};

/// Table order: seen Lean, seen translated, unseen Lean, unseen translated.
inline constexpr std::array<Family, 4> kFamilies{{
    {Provenance::seen, Form::lean},
    {Provenance::seen, Form::translated},
    {Provenance::unseen, Form::lean},
    {Provenance::unseen, Form::translated},
}};

std::string to_string(Family f);

struct Uncertainty {
    std::optional<double> sem;  // absent with fewer than two runs
    double binomial_se = 0;
};

struct SetSummary {
    Family family;
    double total = 0;  // queries per run
    std::vector<std::size_t> run_indices;
    std::vector<double> run_accuracies;
    std::vector<double> run_correct;
    double mean_accuracy = 0;
    double mean_correct = 0;
    double mean_incorrect = 0;
    Uncertainty uncertainty;  // spread of this cell's runs
};

/// Runs of one family and size; rejects empty input, mixed families and
/// aborted runs.
SetSummary aggregate_runs(std::span<const RunResult> results);

enum class Weighting { unweighted, by_queries };

/// Mean of exactly one summary per family.
double cross_set_average(std::span<const SetSummary> summaries, Weighting weighting = Weighting::unweighted);

/// Mean of one family's summaries across models.
double cross_model_average(std::span<const SetSummary> summaries, Weighting weighting = Weighting::unweighted);

/// Sample standard deviation over sqrt(n); needs two or more runs.
double standard_error_of_mean(std::span<const double> run_accuracies);

/// 100 * sqrt(p (1 - p) / N) with p and N pooled over all runs.
double binomial_standard_error(std::span<const double> run_accuracies, std::span<const double> totals);

Uncertainty uncertainty(std::span<const double> run_accuracies, std::span<const double> totals);

struct ModelSummary {
    std::string label;
    std::vector<SetSummary> cells;          // in kFamilies order, present cells only
    std::optional<double> cross_set_mean;   // when all four cells are present

    const SetSummary* cell(Family family) const;
};

ModelSummary summarize_model(std::string label, std::span<const RunResult> results);

/// Groups results by model label (sorted) and summarizes each.
std::vector<ModelSummary> summarize_results(std::span<const RunResult> results);

struct SizeDelta {
    double lean = 0;
    double translated = 0;
    double combined = 0;  // mean of the two
};

/// Change in mean accuracy from `from` to `to` on one provenance.
SizeDelta size_delta(const ModelSummary& from, const ModelSummary& to, Provenance provenance);

enum class ReportFormat { table_text, csv };

/// Spreadsheet-style number: at most 11 characters, trailing zeros dropped
/// (76.66666667, 383.3333333, 0.666666667, 100).
std::string format_general(double value);

inline constexpr std::string_view kCsvHeader = "model_label,provenance,form,run_index,accuracy,correct,total";

std::string render_report(std::span<const ModelSummary> models, ReportFormat format);

/// Grouped bar chart of mean accuracy (model x test-set family).
std::string render_chart_svg(std::span<const ModelSummary> models);

}  // namespace rosetta
