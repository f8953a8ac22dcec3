#include "rosetta/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rosetta/errors.hpp"
#include "rosetta/sampling.hpp"

namespace rosetta {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// config

PipelineConfig PipelineConfig::load(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError("config " + path.string() + ": " + e.what());
    }
    const auto base = path.parent_path();
    const auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

    PipelineConfig c;
    try {
        c.training_corpus = resolve(j.at("training_corpus").get<std::string>());
        c.unseen_corpus = resolve(j.at("unseen_corpus").get<std::string>());
        for (const auto& k : j.at("keys")) c.keys.push_back(resolve(k.get<std::string>()));
        if (j.contains("inventory")) c.inventory = resolve(j["inventory"].get<std::string>());
        c.output_dir = resolve(j.value("output_dir", std::string("out")));
        c.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("train_sizes")) c.train_sizes = j["train_sizes"].get<std::vector<std::size_t>>();
        c.seen_n = j.value("seen_n", c.seen_n);
        c.unseen_n = j.value("unseen_n", c.unseen_n);
        c.replicas = j.value("replicas", c.replicas);
        c.disjoint = j.value("disjoint", false);
        c.system_prompt = j.value("system_prompt", c.system_prompt);
        if (j.contains("model")) {
            const auto& m = j["model"];
            c.model.endpoint = m.value("endpoint", std::string{});
            c.model.model = m.value("name", std::string{});
            c.model.max_in_flight = m.value("max_in_flight", c.model.max_in_flight);
            c.model.max_retries = m.value("max_retries", c.model.max_retries);
            c.model.backoff_ms = m.value("backoff_ms", c.model.backoff_ms);
            c.model.timeout_s = m.value("timeout_s", c.model.timeout_s);
        }
    } catch (const json::exception& e) {
        throw DataError("config " + path.string() + ": " + e.what());
    }
    return c;
}

void PipelineConfig::validate() const {
    const auto require = [](const fs::path& p, const char* what) {
        if (!fs::is_regular_file(p)) throw IoError(std::string(what) + " not found: " + p.string());
    };
    require(training_corpus, "training corpus");
    require(unseen_corpus, "unseen corpus");
    if (keys.empty()) throw DataError("config lists no translation keys");
    for (const auto& k : keys) require(k, "key file");
    if (inventory) require(*inventory, "symbol inventory");
    for (const auto s : train_sizes) {
        if (s == 0) throw DataError("training sizes must be positive");
    }
    if (seen_n == 0 || unseen_n == 0 || replicas == 0) throw DataError("test-set sizes and replicas must be positive");
}

SymbolInventory PipelineConfig::load_inventory() const {
    return inventory ? SymbolInventory::load(*inventory) : SymbolInventory::lean_default();
}

// ---------------------------------------------------------------------------
// helpers

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& contents) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << contents;
    if (!out.flush()) throw IoError("write failed for " + path.string());
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(Error::Category::data);
    }
}

std::vector<Translator> load_translators(const PipelineConfig& config) {
    const auto inventory = config.load_inventory();
    std::vector<Translator> out;
    for (const auto& path : config.keys) out.emplace_back(load_key(path), inventory);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// translate

int cmd_translate(const fs::path& in, const fs::path& key_path, const fs::path& out, bool decode,
                  const std::optional<fs::path>& inventory_path, std::ostream& err) {
    return guarded(err, [&] {
        const auto inventory = inventory_path ? SymbolInventory::load(*inventory_path) : SymbolInventory::lean_default();
        const Translator translator(load_key(key_path), inventory);
        const auto text = read_file(in);

        std::string result;
        std::size_t line_no = 0;
        std::size_t start = 0;
        while (start < text.size()) {
            auto end = text.find('\n', start);
            const bool terminated = end != std::string::npos;
            if (!terminated) end = text.size();
            const std::string_view line(text.data() + start, end - start);
            ++line_no;
            try {
                const auto converted = decode ? translator.detranslate(line) : translator.translate(line);
                if (converted.find('\n') != std::string::npos) {
                    throw DataError("result contains a line break");
                }
                result += converted;
            } catch (const DataError& e) {
                throw DataError(in.string() + ":" + std::to_string(line_no) + ": " + e.what());
            }
            if (terminated) result += '\n';
            start = end + 1;
        }
        write_file(out, result);
        return 0;
    });
}

// ---------------------------------------------------------------------------
// build

int cmd_build(const PipelineConfig& config, std::ostream& log, std::ostream& err) {
    return guarded(err, [&] {
        config.validate();
        const auto training = ingest_source(config.training_corpus, Origin::training);
        const auto unseen = ingest_source(config.unseen_corpus, Origin::unseen);
        const auto translators = load_translators(config);
        log << "corpus: " << training.size() << " training, " << unseen.size() << " unseen problems\n";

        for (const auto& translator : translators) {
            for (const auto size : config.train_sizes) {
                const auto path = config.train_dir() / (translator.name() + "_" + std::to_string(size) + ".jsonl");
                const auto summary =
                    emit_dataset(training, {translator.name(), size, config.seed}, &translator, path, config.system_prompt);
                log << path.string() << ": " << summary.written << " records";
                if (summary.skipped) log << " (" << summary.skipped << " untranslatable skipped)";
                log << '\n';
            }

            SamplingOptions options;
            options.replicas = config.replicas;
            options.mode = config.disjoint ? SamplingMode::disjoint : SamplingMode::independent;
            options.system_prompt = config.system_prompt;
            const auto dir = config.test_dir(translator.name());
            std::size_t written = 0;
            for (const auto provenance : {Provenance::seen, Provenance::unseen}) {
                const auto& corpus = provenance == Provenance::seen ? training : unseen;
                options.n = provenance == Provenance::seen ? config.seen_n : config.unseen_n;
                // Distinct streams for the two corpora.
                options.seed = splitmix64(config.seed ^ (provenance == Provenance::seen ? 0x5EE7ULL : 0x0215EE7ULL));
                for (const auto& set : sample_test_sets(corpus, provenance, translator, options)) {
                    write_test_set(set, dir);
                    ++written;
                }
            }
            log << dir.string() << ": " << written << " test sets\n";
        }
        return 0;
    });
}

// ---------------------------------------------------------------------------
// eval

namespace {

std::unique_ptr<ModelClient> make_client(const PipelineConfig& config, const EvalCommand& command, const TestSet& set) {
    const auto& mock = command.mock;
    if (mock.empty()) {
        if (config.model.endpoint.empty()) throw DataError("no model endpoint configured and no --mock given");
        HttpClientOptions options;
        options.endpoint = config.model.endpoint;
        options.model = config.model.model;
        options.timeout = std::chrono::seconds(config.model.timeout_s);
        if (const char* key = std::getenv(kApiKeyEnv)) options.api_key = key;
        return std::make_unique<HttpChatClient>(std::move(options));
    }
    if (mock == "oracle") return std::make_unique<OracleClient>(set);
    if (mock == "inverted") return std::make_unique<InvertedClient>(set);
    if (mock == "constant-true") return std::make_unique<ConstantClient>("True");
    if (mock == "constant-false") return std::make_unique<ConstantClient>("False");
    if (mock == "replay") {
        return std::make_unique<ReplayClient>(ReplayClient::load(command.replay_dir / (set.name + ".jsonl")));
    }
    throw DataError("unknown mock '" + mock + "'");
}

}  // namespace

int cmd_eval(const PipelineConfig& config, const EvalCommand& command, std::ostream& log, std::ostream& err) {
    return guarded(err, [&] {
        if (command.model_label.empty()) throw DataError("--model label is required");
        std::string key = command.key;
        if (key.empty()) {
            if (config.keys.empty()) throw DataError("config lists no translation keys");
            key = key_name(load_key(config.keys.front()));
        }
        const auto sets_dir = config.test_dir(key);
        if (!fs::is_directory(sets_dir)) throw IoError("no test sets at " + sets_dir.string() + "; run build first");
        const auto manifests = list_test_sets(sets_dir);
        if (manifests.empty()) throw IoError("no test sets at " + sets_dir.string());

        EvalOptions options;
        options.max_in_flight = command.parallel.value_or(config.model.max_in_flight);
        options.max_retries = config.model.max_retries;
        options.backoff = std::chrono::milliseconds(config.model.backoff_ms);
        const auto out_dir = command.results_dir.value_or(config.results_dir()) / command.model_label;

        for (const auto& manifest : manifests) {
            const auto set = read_test_set(manifest);
            auto client = make_client(config, command, set);
            const auto result = run_eval(set, *client, options, command.model_label);
            write_run_result(result, out_dir / (set.name + ".json"));
            if (!result.valid) throw TransportError(set.name + ": " + result.error);
            log << set.name << ": " << result.correct << "/" << result.total << " ("
                << format_general(accuracy(result.correct, result.total)) << "%)\n";
        }
        return 0;
    });
}

// ---------------------------------------------------------------------------
// report

std::vector<RunResult> load_results(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("results directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<RunResult> results;
    for (const auto& f : files) results.push_back(read_run_result(f));
    return results;
}

int cmd_report(const fs::path& results_dir, ReportFormat format, const std::optional<fs::path>& out,
               const std::optional<fs::path>& chart, std::ostream& stdout_stream, std::ostream& err) {
    return guarded(err, [&] {
        auto results = load_results(results_dir);
        // Aborted runs are kept on disk for diagnosis but never aggregated.
        std::erase_if(results, [&](const RunResult& r) {
            if (r.valid) return false;
            err << "warning: skipping aborted run " << r.model_label << "/" << r.test_set_name << ": " << r.error
                << '\n';
            return true;
        });
        const auto models = summarize_results(results);
        const auto document = render_report(models, format);
        if (out) {
            write_file(*out, document);
        } else {
            stdout_stream << document;
        }
        if (chart) write_file(*chart, render_chart_svg(models));
        return 0;
    });
}

// ---------------------------------------------------------------------------
// argv

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Translate Lean statements into custom propositional languages, build datasets, evaluate and report"};
    app.require_subcommand(1);

    std::string in, key, output, inventory;
    bool decode = false;
    auto* translate = app.add_subcommand("translate", "Translate (or --decode) one statement per line");
    translate->add_option("--in", in, "Input file")->required();
    translate->add_option("--key", key, "Key definition file")->required();
    translate->add_option("--out", output, "Output file")->required();
    translate->add_option("--inventory", inventory, "Symbol inventory file");
    translate->add_flag("--decode", decode, "Decode translated lines back to Lean");

    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed;
    auto* build = app.add_subcommand("build", "Emit training files and test sets");
    build->add_option("--config", config_path, "Pipeline config (JSON)")->required();
    build->add_option("--seed", seed, "Override the config seed");
    build->add_option("--out", out_dir, "Override the output directory");

    EvalCommand eval_command;
    std::string results_dir;
    std::size_t parallel = 0;
    auto* eval = app.add_subcommand("eval", "Run the evaluation harness over a key's test sets");
    eval->add_option("--config", config_path, "Pipeline config (JSON)")->required();
    eval->add_option("--model", eval_command.model_label, "Label for this model's results")->required();
    eval->add_option("--key", eval_command.key, "Key whose test sets are evaluated (default: first key)");
    eval->add_option("--mock", eval_command.mock, "oracle | inverted | constant-true | constant-false | replay");
    eval->add_option("--replay-dir", eval_command.replay_dir, "Directory of <test_set>.jsonl replay files");
    eval->add_option("--parallel", parallel, "Maximum in-flight requests");
    eval->add_option("--results", results_dir, "Results directory (default: <output_dir>/results)");
    eval->add_option("--out", out_dir, "Override the output directory");

    std::string format = "text", report_out, chart;
    auto* report = app.add_subcommand("report", "Aggregate run results into tables or CSV");
    report->add_option("--results", results_dir, "Results directory")->required();
    report->add_option("--format", format, "text | csv")->check(CLI::IsMember({"text", "csv"}));
    report->add_option("--out", report_out, "Write the report here instead of stdout");
    report->add_option("--chart", chart, "Also write an SVG bar chart");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : static_cast<int>(Error::Category::data);
    }

    const auto load_config = [&](PipelineConfig& config) {
        config = PipelineConfig::load(config_path);
        if (seed) config.seed = *seed;
        if (!out_dir.empty()) config.output_dir = out_dir;
        return 0;
    };

    if (translate->parsed()) {
        return cmd_translate(in, key, output, decode, inventory.empty() ? std::nullopt : std::optional<fs::path>(inventory),
                             err);
    }
    if (build->parsed()) {
        PipelineConfig config;
        if (const int rc = guarded(err, [&] { return load_config(config); })) return rc;
        return cmd_build(config, out, err);
    }
    if (eval->parsed()) {
        PipelineConfig config;
        if (const int rc = guarded(err, [&] { return load_config(config); })) return rc;
        if (parallel > 0) eval_command.parallel = parallel;
        if (!results_dir.empty()) eval_command.results_dir = results_dir;
        return cmd_eval(config, eval_command, out, err);
    }
    return cmd_report(results_dir, format == "csv" ? ReportFormat::csv : ReportFormat::table_text,
                      report_out.empty() ? std::nullopt : std::optional<fs::path>(report_out),
                      chart.empty() ? std::nullopt : std::optional<fs::path>(chart), out, err);
}

}  // namespace rosetta
