#include "avrd/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "avrd/errors.hpp"
#include "avrd/extraction.hpp"
#include "avrd/metrics.hpp"

namespace avrd::evaluate {

using nlohmann::json;

namespace {

std::string trim_copy(const std::string& text) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    return text.substr(begin, end - begin);
}

std::vector<std::string> sample_media(const Sample& sample) {
    std::vector<std::string> media;
    if (!sample.video_ref.empty()) media.push_back(sample.video_ref);
    if (!sample.audio_ref.empty() && sample.audio_ref != sample.video_ref) {
        media.push_back(sample.audio_ref);
    }
    return media;
}

void validate_options(const bench::Manifest& manifest, const agents::AgentRuntime& runtime,
                      const EvalOptions& options) {
    if (options.runs < 1) {
        throw ConfigError("runs must be at least 1, got " + std::to_string(options.runs));
    }
    if (options.target_backend.empty() || !runtime.has_backend(options.target_backend)) {
        throw ConfigError("unknown target backend '" + options.target_backend + "'");
    }
    const bool needs_judge = std::any_of(
        manifest.entries.begin(), manifest.entries.end(),
        [](const bench::ManifestEntry& e) { return !is_captioning_task(e.sample.task); });
    if (needs_judge &&
        (options.judge_backend.empty() || !runtime.has_backend(options.judge_backend))) {
        throw ConfigError("unknown judge backend '" + options.judge_backend + "'");
    }
}

// Evaluation of one (run, entry) pair, before task aggregation.
struct CellResult {
    EvalRecord record;              // meaningful for non-captioning entries
    std::string caption;            // candidate caption for captioning entries
    std::vector<std::string> warnings;
    std::string error;              // non-empty when the sample failed
};

CaptionScores mean_caption_scores(const std::vector<CaptionScores>& runs) {
    CaptionScores mean;
    for (const CaptionScores& s : runs) {
        mean.bleu4 += s.bleu4;
        mean.meteor += s.meteor;
        mean.rouge_l += s.rouge_l;
        mean.cider += s.cider;
    }
    const double n = static_cast<double>(runs.size());
    mean.bleu4 /= n;
    mean.meteor /= n;
    mean.rouge_l /= n;
    mean.cider /= n;
    return mean;
}

}  // namespace

std::string compose_target_query(const bench::ManifestEntry& entry,
                                 const prompts::PromptLibrary& prompts) {
    std::string question = entry.sample.question;
    if (!entry.sample.options.empty()) {
        question += "\nOptions: " + prompts::options_line(entry.sample.options);
    }
    if (entry.reasoning_steps && !entry.reasoning_steps->empty()) {
        ReasoningTrace trace;
        trace.steps = *entry.reasoning_steps;
        return prompts.render_augmented_query(question, trace);
    }
    return question;
}

EvaluationResult run_evaluation(const bench::Manifest& manifest,
                                agents::AgentRuntime& runtime,
                                const prompts::PromptLibrary& prompts,
                                const EvalOptions& options) {
    validate_options(manifest, runtime, options);

    const std::size_t entry_count = manifest.entries.size();
    const std::size_t runs = static_cast<std::size_t>(options.runs);
    std::vector<CellResult> cells(runs * entry_count);

    auto evaluate_cell = [&](std::size_t run, std::size_t idx) {
        const bench::ManifestEntry& entry = manifest.entries[idx];
        CellResult& cell = cells[run * entry_count + idx];
        cell.record.sample_id = entry.sample.id;
        try {
            agents::AgentRequest request;
            request.backend_id = options.target_backend;
            request.role = Role::Target;
            request.prompt = compose_target_query(entry, prompts);
            request.media_refs = sample_media(entry.sample);
            request.temperature = options.target_temperature;
            request.seed = options.seed;
            const agents::AgentResponse response = runtime.invoke(request);
            const std::string answer = trim_copy(response.text);
            cell.record.raw_response = response.text;

            if (is_captioning_task(entry.sample.task)) {
                cell.caption = answer;
                return;
            }
            if (!entry.sample.options.empty()) {
                const extract::ChoiceExtraction choice = extract::extract_choice(
                    response.text, entry.sample.question, entry.sample.options, runtime,
                    options.judge_backend, prompts);
                cell.record.extraction_path = choice.path;
                for (const std::string& w : choice.warnings) {
                    cell.warnings.push_back("sample '" + entry.sample.id + "': " + w);
                }
                if (choice.label) {
                    cell.record.extracted = std::string(1, *choice.label);
                    cell.record.correct = !entry.sample.ground_truth.empty() &&
                                          *choice.label == entry.sample.ground_truth[0];
                } else {
                    cell.record.extracted.reset();
                    cell.record.correct = false;
                }
                return;
            }
            // Open-ended: ask the judge to compare against the ground truth.
            agents::AgentRequest judge;
            judge.backend_id = options.judge_backend;
            judge.role = Role::OpenEndedJudge;
            judge.prompt = prompts.render_open_ended_judge_prompt(
                entry.sample.question, answer, entry.sample.ground_truth);
            judge.temperature = 0.0;
            judge.seed = options.seed;
            const agents::AgentResponse verdict_text = runtime.invoke(judge);
            const extract::Verdict verdict = extract::parse_judge_verdict(verdict_text.text);
            cell.record.extracted = answer;
            cell.record.correct = verdict == extract::Verdict::Correct;
            cell.record.extraction_path = ExtractionPath::Judge;
        } catch (const std::exception& e) {
            cell.error = "sample '" + entry.sample.id + "' run " + std::to_string(run + 1) +
                         ": " + e.what();
            cell.record.extracted.reset();
            cell.record.correct = false;
            cell.caption.clear();
        }
    };

    const std::size_t jobs = runs * entry_count;
    const std::size_t workers = std::min<std::size_t>(
        static_cast<std::size_t>(std::max(1, options.parallelism)), std::max<std::size_t>(jobs, 1));
    if (workers <= 1) {
        for (std::size_t k = 0; k < jobs; ++k) evaluate_cell(k / entry_count, k % entry_count);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                while (true) {
                    const std::size_t k = next.fetch_add(1);
                    if (k >= jobs) break;
                    evaluate_cell(k / entry_count, k % entry_count);
                }
            });
        }
        for (auto& worker : pool) worker.join();
    }

    EvaluationResult result;
    for (const CellResult& cell : cells) {
        if (!cell.error.empty()) result.errors.push_back(cell.error);
        result.warnings.insert(result.warnings.end(), cell.warnings.begin(),
                               cell.warnings.end());
    }

    // Records for non-captioning entries, [run][record] in manifest order.
    result.run_records.assign(runs, {});
    for (std::size_t run = 0; run < runs; ++run) {
        for (std::size_t idx = 0; idx < entry_count; ++idx) {
            if (is_captioning_task(manifest.entries[idx].sample.task)) continue;
            result.run_records[run].push_back(cells[run * entry_count + idx].record);
        }
    }

    for (const bench::TaskBlock& block : manifest.task_blocks()) {
        TaskMetrics task;
        task.task = block.task;
        if (is_captioning_task(block.task)) {
            task.kind = "caption";
            for (std::size_t run = 0; run < runs; ++run) {
                std::vector<metrics::CaptionItem> corpus;
                corpus.reserve(block.entry_indices.size());
                for (std::size_t idx : block.entry_indices) {
                    metrics::CaptionItem item;
                    item.candidate = cells[run * entry_count + idx].caption;
                    item.references = manifest.entries[idx].sample.references;
                    corpus.push_back(std::move(item));
                }
                task.caption_runs.push_back(metrics::caption_scores(corpus));
                task.run_values.push_back(task.caption_runs.back().cider);
            }
            const metrics::BestMean agg = metrics::best_of_n(task.run_values);
            task.best = agg.best;
            task.mean = agg.mean;
            std::size_t best_run = 0;
            for (std::size_t run = 1; run < runs; ++run) {
                if (task.run_values[run] > task.run_values[best_run]) best_run = run;
            }
            task.caption_best = task.caption_runs[best_run];
            task.caption_mean = mean_caption_scores(task.caption_runs);
        } else {
            task.kind = "accuracy";
            for (std::size_t run = 0; run < runs; ++run) {
                std::vector<EvalRecord> records;
                records.reserve(block.entry_indices.size());
                for (std::size_t idx : block.entry_indices) {
                    records.push_back(cells[run * entry_count + idx].record);
                }
                std::vector<std::string> warnings;
                task.run_values.push_back(metrics::top1_accuracy(records, &warnings));
                result.warnings.insert(result.warnings.end(), warnings.begin(), warnings.end());
            }
            const metrics::BestMean agg = metrics::best_of_n(task.run_values);
            task.best = agg.best;
            task.mean = agg.mean;
        }
        result.report.tasks.push_back(std::move(task));
    }
    return result;
}

bench::RunReport make_report(const bench::Manifest& manifest, const EvaluationResult& result,
                             const EvalOptions& options, const std::string& dataset_hash) {
    bench::RunReport report;
    json fingerprint;
    fingerprint["backends"] =
        json{{"target", options.target_backend}, {"judge", options.judge_backend}};
    fingerprint["runs"] = options.runs;
    fingerprint["target_temperature"] = options.target_temperature;
    fingerprint["dataset_hash"] = dataset_hash;
    fingerprint["augmented"] = manifest.augmented;
    fingerprint["distill"] = manifest.distill_params;
    if (options.seed) {
        fingerprint["seed"] = *options.seed;
    } else {
        fingerprint["seed"] = nullptr;
    }
    report.fingerprint = std::move(fingerprint);
    report.metrics = result.report;
    return report;
}

}  // namespace avrd::evaluate
