#include "avrd/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "avrd/core.hpp"
#include "avrd/distiller.hpp"
#include "avrd/errors.hpp"
#include "avrd/evaluate.hpp"
#include "avrd/extraction.hpp"
#include "avrd/json_codec.hpp"
#include "avrd/prompts.hpp"

namespace avrd::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Use the injected runtime when given; otherwise build one from the
// registry file. `owned` keeps the built runtime alive in the caller.
agents::AgentRuntime& resolve_runtime(agents::AgentRuntime* injected,
                                      const fs::path& registry,
                                      const std::optional<fs::path>& cache_dir,
                                      std::optional<agents::AgentRuntime>& owned) {
    if (injected) return *injected;
    owned.emplace(agents::parse_registry(registry), cache_dir);
    return *owned;
}

}  // namespace

int cmd_distill(const DistillArgs& args, std::ostream& err, agents::AgentRuntime* runtime) {
    std::optional<agents::AgentRuntime> owned;
    try {
        const prompts::PromptLibrary library = prompts::PromptLibrary::load(args.templates_dir);
        agents::AgentRuntime& rt =
            resolve_runtime(runtime, args.registry, args.cache_dir, owned);
        const bench::Manifest manifest = bench::load_manifest(args.manifest);

        DistillConfig config;
        config.max_iterations = args.max_iter;
        config.threshold = args.threshold;
        config.generation_temperature = args.generation_temperature;
        config.seed = args.seed;
        config.agents[Role::ReasoningGeneration] = args.generator;
        config.agents[Role::Summarization] = args.summarizer;
        config.agents[Role::Evaluation] = args.evaluator;
        if (!args.feedback.empty()) config.agents[Role::Feedback] = args.feedback;

        std::vector<Sample> samples;
        samples.reserve(manifest.entries.size());
        for (const bench::ManifestEntry& entry : manifest.entries) {
            samples.push_back(entry.sample);
        }

        // Config problems (bad knobs, unknown backends) must surface before
        // any sample runs, not as per-sample failures.
        distill::DatasetSummary summary;
        const std::vector<distill::DistillResult> results = distill::distill_dataset(
            samples, config, rt, library, args.parallelism, args.trace_dir, &summary);

        bench::write_augmented_dataset(results, config, args.output);

        for (const distill::DistillResult& result : results) {
            if (result.outcome.stop_reason == StopReason::AgentFailure) {
                err << "sample '" << result.outcome.sample_id
                    << "' failed: " << result.outcome.error << "\n";
            }
        }
        err << "distilled " << summary.succeeded << "/" << summary.total << " samples ("
            << summary.failed << " failed)\n";
        return summary.failed == 0 ? kExitOk : kExitPartial;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int cmd_evaluate(const EvaluateArgs& args, std::ostream& err, agents::AgentRuntime* runtime) {
    std::optional<agents::AgentRuntime> owned;
    try {
        const prompts::PromptLibrary library = prompts::PromptLibrary::load(args.templates_dir);
        agents::AgentRuntime& rt =
            resolve_runtime(runtime, args.registry, args.cache_dir, owned);
        const bench::Manifest manifest = bench::load_manifest(args.manifest);
        const std::string dataset_hash = sha256_hex(read_text(args.manifest));

        evaluate::EvalOptions options;
        options.runs = args.runs;
        options.target_backend = args.target;
        options.judge_backend = args.judge;
        options.target_temperature = args.target_temperature;
        options.seed = args.seed;
        options.parallelism = args.parallelism;

        const evaluate::EvaluationResult result =
            evaluate::run_evaluation(manifest, rt, library, options);
        const bench::RunReport report =
            evaluate::make_report(manifest, result, options, dataset_hash);
        bench::save_report(report, args.report);

        for (const std::string& warning : result.warnings) err << "warning: " << warning << "\n";
        for (const std::string& error : result.errors) err << "failure: " << error << "\n";
        err << "evaluated " << manifest.entries.size() << " samples x " << args.runs
            << " runs over " << report.metrics.tasks.size() << " tasks ("
            << result.errors.size() << " failed calls)\n";
        return result.errors.empty() ? kExitOk : kExitPartial;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int cmd_extract(const ExtractArgs& args, std::ostream& out, std::ostream& err,
                agents::AgentRuntime* runtime) {
    std::optional<agents::AgentRuntime> owned;
    try {
        const prompts::PromptLibrary library = prompts::PromptLibrary::load(args.templates_dir);
        agents::AgentRuntime* rt = runtime;
        if (!rt && args.registry) {
            owned.emplace(agents::parse_registry(*args.registry), args.cache_dir);
            rt = &*owned;
        }
        if (!rt) {
            // No backends at all: heuristic-only corpora still work; any
            // fallback case will fail its expectation loudly below.
            owned.emplace(std::vector<agents::BackendSpec>{}, args.cache_dir);
            rt = &*owned;
        }

        std::ifstream in(args.corpus, std::ios::binary);
        if (!in) throw IoError("cannot open corpus '" + args.corpus.string() + "'");

        std::size_t line_no = 0;
        std::size_t cases = 0;
        std::size_t passed = 0;
        std::size_t heuristic_hits = 0;
        std::size_t fallback_hits = 0;
        std::string line;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.find_first_not_of(" \t") == std::string::npos) continue;
            json record;
            try {
                record = json::parse(line);
            } catch (const json::exception& e) {
                err << "error: corpus line " << line_no << ": malformed JSON (" << e.what()
                    << ")\n";
                return kExitConfig;
            }
            ++cases;
            std::string expectation = "?";
            std::string got = "?";
            bool ok = false;
            try {
                const std::string response = record.at("response").get<std::string>();
                const std::string question = record.value("question", std::string{});
                const std::vector<Option> options =
                    record.at("options").get<std::vector<Option>>();
                std::optional<std::string> expected;
                if (record.contains("expected") && !record.at("expected").is_null()) {
                    expected = record.at("expected").get<std::string>();
                }
                expectation = expected ? *expected : "no match";

                const extract::ChoiceExtraction choice = extract::extract_choice(
                    response, question, options, *rt, args.judge, library);
                if (choice.path == ExtractionPath::Heuristic) {
                    ++heuristic_hits;
                } else {
                    ++fallback_hits;
                }
                got = choice.label ? std::string(1, *choice.label) : "no match";
                ok = (choice.label.has_value() == expected.has_value()) &&
                     (!choice.label || std::string(1, *choice.label) == *expected);
                if (ok && record.contains("expected_path")) {
                    ok = record.at("expected_path").get<std::string>() ==
                         to_string(choice.path);
                    if (!ok) got += " via " + std::string(to_string(choice.path));
                }
            } catch (const json::exception& e) {
                err << "error: corpus line " << line_no << ": " << e.what() << "\n";
                return kExitConfig;
            } catch (const Error& e) {
                got = std::string("error: ") + e.what();
            }
            if (ok) ++passed;
            out << "case " << cases << " (line " << line_no << "): "
                << (ok ? "PASS" : "FAIL") << " expected " << expectation << ", got " << got
                << "\n";
        }
        out << "passed " << passed << "/" << cases << " (heuristic " << heuristic_hits
            << ", fallback " << fallback_hits << ")\n";
        return passed == cases ? kExitOk : kExitPartial;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int cmd_report(const ReportArgs& args, std::ostream& out, std::ostream& err) {
    try {
        const bench::RunReport report = bench::load_report(args.report);
        std::optional<bench::RunReport> baseline;
        if (args.baseline) baseline = bench::load_report(*args.baseline);
        const std::string rendered = bench::render_report(report, baseline, args.format);
        if (args.output) {
            std::ofstream file(*args.output, std::ios::binary | std::ios::trunc);
            if (!file) throw IoError("cannot open '" + args.output->string() + "' for writing");
            file << rendered;
            if (!file) throw IoError("failed writing '" + args.output->string() + "'");
        } else {
            out << rendered;
        }
        return kExitOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int run(int argc, const char* const* argv) {
    CLI::App app{"Reasoning distillation and evaluation for audio-visual QA"};
    app.require_subcommand(1);

    DistillArgs distill_args;
    EvaluateArgs evaluate_args;
    ExtractArgs extract_args;
    ReportArgs report_args;
    std::string format = "markdown";

    CLI::App* distill = app.add_subcommand(
        "distill", "Run the reasoning refinement loop over a dataset");
    distill->add_option("--manifest", distill_args.manifest, "Input dataset (JSONL)")
        ->required();
    distill->add_option("--registry", distill_args.registry, "Backend registry (JSON)")
        ->required();
    distill->add_option("--templates-dir", distill_args.templates_dir,
                        "Directory of prompt templates")
        ->required();
    distill->add_option("--output", distill_args.output, "Augmented dataset output path")
        ->required();
    distill->add_option("--cache-dir", distill_args.cache_dir, "Response cache directory");
    distill->add_option("--trace-dir", distill_args.trace_dir,
                        "Directory for per-sample trace files");
    distill->add_option("--threshold", distill_args.threshold,
                        "Stop once the evaluator score reaches this value");
    distill->add_option("--max-iter", distill_args.max_iter, "Iteration cap of the loop");
    distill->add_option("--parallelism", distill_args.parallelism,
                        "Samples processed concurrently");
    distill->add_option("--generator", distill_args.generator, "Reasoning generator backend id")
        ->required();
    distill->add_option("--summarizer", distill_args.summarizer, "Summarizer backend id")
        ->required();
    distill->add_option("--evaluator", distill_args.evaluator, "Evaluator backend id")
        ->required();
    distill->add_option("--feedback", distill_args.feedback,
                        "Feedback backend id (defaults to the generator)");
    distill->add_option("--generation-temperature", distill_args.generation_temperature,
                        "Sampling temperature of the generator");
    distill->add_option("--seed", distill_args.seed, "Sampling seed forwarded to backends");

    CLI::App* evaluate = app.add_subcommand(
        "evaluate", "Query the target model and score its answers");
    evaluate->add_option("--manifest", evaluate_args.manifest,
                         "Dataset to evaluate (plain or augmented JSONL)")
        ->required();
    evaluate->add_option("--registry", evaluate_args.registry, "Backend registry (JSON)")
        ->required();
    evaluate->add_option("--templates-dir", evaluate_args.templates_dir,
                         "Directory of prompt templates")
        ->required();
    evaluate->add_option("--report", evaluate_args.report, "Report output path")->required();
    evaluate->add_option("--cache-dir", evaluate_args.cache_dir, "Response cache directory");
    evaluate->add_option("--runs", evaluate_args.runs, "Evaluation repetitions per sample");
    evaluate->add_option("--parallelism", evaluate_args.parallelism,
                         "Requests processed concurrently");
    evaluate->add_option("--target", evaluate_args.target, "Target model backend id")
        ->required();
    evaluate->add_option("--judge", evaluate_args.judge,
                         "Judge backend id (choice fallback and open-ended)");
    evaluate->add_option("--target-temperature", evaluate_args.target_temperature,
                         "Sampling temperature of the target model");
    evaluate->add_option("--seed", evaluate_args.seed, "Sampling seed forwarded to backends");

    CLI::App* extract = app.add_subcommand(
        "extract", "Replay a choice-extraction regression corpus");
    extract->add_option("--corpus", extract_args.corpus, "Corpus JSONL path")->required();
    extract->add_option("--templates-dir", extract_args.templates_dir,
                        "Directory of prompt templates")
        ->required();
    extract->add_option("--registry", extract_args.registry,
                        "Backend registry (for fallback cases)");
    extract->add_option("--cache-dir", extract_args.cache_dir, "Response cache directory");
    extract->add_option("--judge", extract_args.judge, "Judge backend id for fallback");

    CLI::App* report = app.add_subcommand("report", "Render a stored report as a table");
    report->add_option("--report", report_args.report, "Report JSON path")->required();
    report->add_option("--baseline", report_args.baseline,
                       "Baseline report for gain annotations");
    report->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"markdown", "csv"}));
    report->add_option("--output", report_args.output, "Write to this path instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (*distill) return cmd_distill(distill_args, std::cerr);
    if (*evaluate) return cmd_evaluate(evaluate_args, std::cerr);
    if (*extract) return cmd_extract(extract_args, std::cout, std::cerr);
    report_args.format =
        format == "csv" ? bench::ReportFormat::Csv : bench::ReportFormat::Markdown;
    return cmd_report(report_args, std::cout, std::cerr);
}

}  // namespace avrd::cli
