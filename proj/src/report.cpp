#include "rosetta/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "rosetta/errors.hpp"

namespace rosetta {

std::string to_string(Family f) { return std::string(to_string(f.provenance)) + "-" + to_string(f.form); }

namespace {

double mean(std::span<const double> xs) { return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size()); }

Family family_of(const RunResult& r) { return {r.provenance, r.form}; }

}  // namespace

SetSummary aggregate_runs(std::span<const RunResult> results) {
    if (results.empty()) throw EmptyInput("no runs");
    std::vector<const RunResult*> runs;
    for (const auto& r : results) runs.push_back(&r);
    std::stable_sort(runs.begin(), runs.end(), [](auto* a, auto* b) { return a->run_index < b->run_index; });

    SetSummary s;
    s.family = family_of(*runs.front());
    s.total = static_cast<double>(runs.front()->total);
    for (const auto* r : runs) {
        if (!r->valid) throw DataError("run '" + r->test_set_name + "' aborted: " + r->error);
        if (family_of(*r) != s.family) throw MixedFamilies(to_string(s.family) + " vs " + to_string(family_of(*r)));
        if (static_cast<double>(r->total) != s.total) {
            throw MixedFamilies("set sizes " + std::to_string(r->total) + " and " + format_general(s.total));
        }
        s.run_indices.push_back(r->run_index);
        s.run_accuracies.push_back(accuracy(r->correct, r->total));
        s.run_correct.push_back(static_cast<double>(r->correct));
    }
    s.mean_accuracy = mean(s.run_accuracies);
    s.mean_correct = mean(s.run_correct);
    s.mean_incorrect = s.total - s.mean_correct;
    s.uncertainty = uncertainty(s.run_accuracies, std::vector<double>(s.run_accuracies.size(), s.total));
    return s;
}

namespace {

double weighted_mean(std::span<const SetSummary> summaries, Weighting weighting) {
    double sum = 0;
    double weight = 0;
    for (const auto& s : summaries) {
        const double w = weighting == Weighting::by_queries ? s.total * static_cast<double>(s.run_accuracies.size()) : 1.0;
        sum += w * s.mean_accuracy;
        weight += w;
    }
    return sum / weight;
}

}  // namespace

double cross_set_average(std::span<const SetSummary> summaries, Weighting weighting) {
    for (const auto& family : kFamilies) {
        const auto n = std::count_if(summaries.begin(), summaries.end(), [&](const SetSummary& s) { return s.family == family; });
        if (n == 0) throw MissingCell(to_string(family));
        if (n > 1) throw MixedFamilies("duplicate cell " + to_string(family));
    }
    return weighted_mean(summaries, weighting);
}

double cross_model_average(std::span<const SetSummary> summaries, Weighting weighting) {
    if (summaries.empty()) throw EmptyInput("no models");
    for (const auto& s : summaries) {
        if (s.family != summaries.front().family) {
            throw MixedFamilies(to_string(summaries.front().family) + " vs " + to_string(s.family));
        }
    }
    return weighted_mean(summaries, weighting);
}

double standard_error_of_mean(std::span<const double> xs) {
    if (xs.size() < 2) throw TooFewRuns();
    const double m = mean(xs);
    double ss = 0;
    for (const double x : xs) ss += (x - m) * (x - m);
    const double n = static_cast<double>(xs.size());
    return std::sqrt(ss / (n - 1)) / std::sqrt(n);
}

double binomial_standard_error(std::span<const double> run_accuracies, std::span<const double> totals) {
    if (run_accuracies.size() != totals.size()) throw DataError("accuracy and total lists differ in length");
    if (run_accuracies.empty()) throw EmptyInput("no runs");
    double correct = 0;
    double n = 0;
    for (std::size_t i = 0; i < totals.size(); ++i) {
        if (totals[i] <= 0) throw ZeroTotal();
        correct += run_accuracies[i] / 100.0 * totals[i];
        n += totals[i];
    }
    const double p = correct / n;
    return 100.0 * std::sqrt(p * (1 - p) / n);
}

Uncertainty uncertainty(std::span<const double> run_accuracies, std::span<const double> totals) {
    Uncertainty u;
    u.binomial_se = binomial_standard_error(run_accuracies, totals);
    if (run_accuracies.size() >= 2) u.sem = standard_error_of_mean(run_accuracies);
    return u;
}

const SetSummary* ModelSummary::cell(Family family) const {
    for (const auto& c : cells) {
        if (c.family == family) return &c;
    }
    return nullptr;
}

ModelSummary summarize_model(std::string label, std::span<const RunResult> results) {
    ModelSummary m;
    m.label = std::move(label);
    for (const auto& family : kFamilies) {
        std::vector<RunResult> runs;
        for (const auto& r : results) {
            if (family_of(r) == family) runs.push_back(r);
        }
        if (runs.empty()) continue;
        m.cells.push_back(aggregate_runs(runs));
    }
    if (m.cells.size() == kFamilies.size()) m.cross_set_mean = cross_set_average(m.cells);
    return m;
}

std::vector<ModelSummary> summarize_results(std::span<const RunResult> results) {
    std::map<std::string, std::vector<RunResult>> by_model;
    for (const auto& r : results) by_model[r.model_label].push_back(r);
    std::vector<ModelSummary> out;
    for (auto& [label, runs] : by_model) out.push_back(summarize_model(label, runs));
    return out;
}

SizeDelta size_delta(const ModelSummary& from, const ModelSummary& to, Provenance provenance) {
    auto diff = [&](Form form) {
        const auto* a = from.cell({provenance, form});
        const auto* b = to.cell({provenance, form});
        if (a == nullptr) throw MissingCell(from.label + " " + to_string(Family{provenance, form}));
        if (b == nullptr) throw MissingCell(to.label + " " + to_string(Family{provenance, form}));
        return b->mean_accuracy - a->mean_accuracy;
    };
    SizeDelta d;
    d.lean = diff(Form::lean);
    d.translated = diff(Form::translated);
    d.combined = (d.lean + d.translated) / 2;
    return d;
}

// ---------------------------------------------------------------------------
// rendering

std::string format_general(double value) {
    constexpr int kWidth = 11;
    if (std::abs(value - std::round(value)) < 1e-9) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.0f", std::round(value) + 0.0);
        return buf;
    }
    const double magnitude = std::abs(value);
    int int_digits = magnitude < 1 ? 1 : static_cast<int>(std::floor(std::log10(magnitude))) + 1;
    const int sign = value < 0 ? 1 : 0;
    int decimals = std::max(0, kWidth - 1 - int_digits - sign);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    std::string s = buf;
    if (s.find('.') != std::string::npos) {
        while (s.back() == '0') s.pop_back();
        if (s.back() == '.') s.pop_back();
    }
    return s;
}

namespace {

std::string dataset_label(const SetSummary& s) {
    std::string out = s.family.form == Form::lean ? "Lean" : "Translated";
    out += " (" + format_general(s.total) + ")";
    if (s.family.provenance == Provenance::seen && s.family.form == Form::lean) out += " - Benchmark";
    return out;
}

void row(std::ostringstream& out, std::string_view set, std::string_view dataset, std::string_view acc,
         std::string_view total, std::string_view correct, std::string_view incorrect) {
    auto pad = [&](std::string_view s, std::size_t width) {
        out << s;
        for (std::size_t i = s.size(); i < width; ++i) out << ' ';
    };
    pad(set, 8);
    pad(dataset, 24);
    pad(acc, 14);
    pad(total, 15);
    pad(correct, 13);
    out << incorrect << '\n';
}

std::string csv_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string render_text(std::span<const ModelSummary> models) {
    std::ostringstream out;
    out << "Accuracy summary\n";
    for (const auto& m : models) {
        out << "\n== " << m.label << " ==\n";
        row(out, "Set", "Testing Dataset", "Accuracy (%)", "Total Queries", "Correct", "Incorrect");
        for (const auto& c : m.cells) {
            row(out, c.family.provenance == Provenance::seen ? "Seen" : "Unseen", dataset_label(c),
                format_general(c.mean_accuracy), format_general(c.total), format_general(c.mean_correct),
                format_general(c.mean_incorrect));
            for (std::size_t i = 0; i < c.run_accuracies.size(); ++i) {
                row(out, "", std::to_string(c.run_indices[i]), format_general(c.run_accuracies[i]),
                    format_general(c.total), format_general(c.run_correct[i]),
                    format_general(c.total - c.run_correct[i]));
            }
        }
        if (m.cross_set_mean) out << "Cross-set mean accuracy: " << format_general(*m.cross_set_mean) << '\n';
        for (const auto& c : m.cells) {
            out << "Uncertainty " << to_string(c.family) << ": run SEM "
                << (c.uncertainty.sem ? format_general(*c.uncertainty.sem) : std::string("n/a")) << ", binomial SE "
                << format_general(c.uncertainty.binomial_se) << '\n';
        }
    }
    return out.str();
}

std::string render_csv(std::span<const ModelSummary> models) {
    std::ostringstream out;
    out << kCsvHeader << '\n';
    for (const auto& m : models) {
        for (const auto& c : m.cells) {
            const auto prefix = m.label + "," + to_string(c.family.provenance) + "," + to_string(c.family.form) + ",";
            for (std::size_t i = 0; i < c.run_accuracies.size(); ++i) {
                out << prefix << c.run_indices[i] << ',' << csv_number(c.run_accuracies[i]) << ','
                    << csv_number(c.run_correct[i]) << ',' << csv_number(c.total) << '\n';
            }
            out << prefix << "mean," << csv_number(c.mean_accuracy) << ',' << csv_number(c.mean_correct) << ','
                << csv_number(c.total) << '\n';
        }
    }
    return out.str();
}

}  // namespace

std::string render_report(std::span<const ModelSummary> models, ReportFormat format) {
    return format == ReportFormat::csv ? render_csv(models) : render_text(models);
}

std::string render_chart_svg(std::span<const ModelSummary> models) {
    constexpr int kBar = 18, kGap = 30, kHeight = 300, kLeft = 50, kTop = 20;
    constexpr std::array<const char*, 4> kColors{"#4e79a7", "#f28e2b", "#59a14f", "#e15759"};
    const int group = static_cast<int>(kFamilies.size()) * kBar + kGap;
    const int width = kLeft + std::max<int>(1, static_cast<int>(models.size())) * group + 20;
    const int height = kTop + kHeight + 80;

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (int tick = 0; tick <= 100; tick += 25) {
        const int y = kTop + kHeight - tick * kHeight / 100;
        out << "<line x1=\"" << kLeft << "\" y1=\"" << y << "\" x2=\"" << width - 10 << "\" y2=\"" << y
            << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << kLeft - 6 << "\" y=\"" << y + 4 << "\" font-size=\"10\" text-anchor=\"end\">" << tick
            << "</text>\n";
    }
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
        const int x0 = kLeft + static_cast<int>(mi) * group + kGap / 2;
        for (std::size_t fi = 0; fi < kFamilies.size(); ++fi) {
            const auto* c = models[mi].cell(kFamilies[fi]);
            if (c == nullptr) continue;
            const double h = c->mean_accuracy * kHeight / 100.0;
            char buf[256];
            std::snprintf(buf, sizeof buf,
                          "<rect x=\"%d\" y=\"%.2f\" width=\"%d\" height=\"%.2f\" fill=\"%s\"><title>%s %s: %s</title></rect>\n",
                          x0 + static_cast<int>(fi) * kBar, kTop + kHeight - h, kBar - 2, h, kColors[fi],
                          models[mi].label.c_str(), to_string(kFamilies[fi]).c_str(),
                          format_general(c->mean_accuracy).c_str());
            out << buf;
        }
        out << "<text x=\"" << x0 + 2 * kBar << "\" y=\"" << kTop + kHeight + 16
            << "\" font-size=\"11\" text-anchor=\"middle\">" << models[mi].label << "</text>\n";
    }
    for (std::size_t fi = 0; fi < kFamilies.size(); ++fi) {
        const int y = kTop + kHeight + 34 + static_cast<int>(fi % 2) * 16;
        const int x = kLeft + static_cast<int>(fi / 2) * 160;
        out << "<rect x=\"" << x << "\" y=\"" << y - 9 << "\" width=\"10\" height=\"10\" fill=\"" << kColors[fi]
            << "\"/><text x=\"" << x + 14 << "\" y=\"" << y << "\" font-size=\"11\">" << to_string(kFamilies[fi])
            << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace rosetta
