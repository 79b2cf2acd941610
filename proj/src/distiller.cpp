#include "avrd/distiller.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "avrd/errors.hpp"
#include "avrd/extraction.hpp"
#include "avrd/json_codec.hpp"

namespace avrd::distill {

namespace fs = std::filesystem;

namespace {

void validate_config(const DistillConfig& config, const agents::AgentRuntime& runtime) {
    if (config.max_iterations < 1) {
        throw ConfigError("max_iterations must be at least 1, got " +
                          std::to_string(config.max_iterations));
    }
    if (config.threshold < 1 || config.threshold > 10) {
        throw ConfigError("threshold must be in [1,10], got " +
                          std::to_string(config.threshold));
    }
    for (Role role : {Role::ReasoningGeneration, Role::Summarization, Role::Evaluation}) {
        auto it = config.agents.find(role);
        if (it == config.agents.end() || it->second.empty()) {
            throw ConfigError(std::string("no backend configured for role '") +
                              to_string(role) + "'");
        }
    }
    for (const auto& [role, backend_id] : config.agents) {
        if (backend_id.empty()) continue;
        if (!runtime.has_backend(backend_id)) {
            throw ConfigError("unknown backend '" + backend_id + "' for role '" +
                              std::string(to_string(role)) + "'");
        }
    }
}

// Media attachments for one sample: video first, then audio unless it is
// the same reference (embedded-audio case).
std::vector<std::string> sample_media(const Sample& sample) {
    std::vector<std::string> media;
    if (!sample.video_ref.empty()) media.push_back(sample.video_ref);
    if (!sample.audio_ref.empty() && sample.audio_ref != sample.video_ref) {
        media.push_back(sample.audio_ref);
    }
    return media;
}

std::string trim_copy(const std::string& text) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    return text.substr(begin, end - begin);
}

std::string trace_filename(const std::string& sample_id) {
    std::string name;
    name.reserve(sample_id.size());
    for (char c : sample_id) {
        bool portable = std::isalnum(static_cast<unsigned char>(c)) || c == '-' ||
                        c == '_' || c == '.';
        name.push_back(portable ? c : '_');
    }
    if (name.empty()) name = "_";
    return name + ".json";
}

void write_text_atomic(const fs::path& path, const std::string& text) {
    std::ostringstream suffix;
    suffix << ".tmp-" << std::this_thread::get_id();
    fs::path temp = path;
    temp += suffix.str();
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + temp.string() + "' for writing");
        out << text;
        if (!out) throw IoError("failed writing '" + temp.string() + "'");
    }
    std::error_code ec;
    fs::rename(temp, path, ec);
    if (ec) {
        fs::remove(temp, ec);
        throw IoError("cannot rename temp file onto '" + path.string() + "'");
    }
}

void write_trace_file(const fs::path& dir, const DistillOutcome& outcome) {
    nlohmann::json j = outcome;
    write_text_atomic(dir / trace_filename(outcome.sample_id), j.dump(2) + "\n");
}

}  // namespace

std::size_t select_best(const std::vector<IterationRecord>& iterations) {
    if (iterations.empty()) {
        throw ValidationError("cannot select the best of zero iterations");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < iterations.size(); ++i) {
        if (iterations[i].score > iterations[best].score) best = i;
    }
    return best;
}

DistillOutcome run_distillation(const Sample& sample, const DistillConfig& config,
                                agents::AgentRuntime& runtime,
                                const prompts::PromptLibrary& prompts) {
    validate_config(config, runtime);

    const std::string& generator = config.agents.at(Role::ReasoningGeneration);
    const std::string& summarizer = config.agents.at(Role::Summarization);
    const std::string& evaluator = config.agents.at(Role::Evaluation);
    std::string feedback = generator;
    if (auto it = config.agents.find(Role::Feedback);
        it != config.agents.end() && !it->second.empty()) {
        feedback = it->second;
    }

    DistillOutcome outcome;
    outcome.sample_id = sample.id;
    const std::vector<std::string> media = sample_media(sample);

    for (int t = 1; t <= config.max_iterations; ++t) {
        try {
            agents::AgentRequest generate;
            if (t == 1) {
                generate.backend_id = generator;
                generate.role = Role::ReasoningGeneration;
                generate.prompt = prompts.render_reasoning_prompt(sample.question);
            } else {
                const IterationRecord& prev = outcome.iterations.back();
                generate.backend_id = feedback;
                generate.role = Role::Feedback;
                generate.prompt =
                    prompts.render_feedback_prompt(prev.trace, sample.question, prev.score);
            }
            generate.media_refs = media;
            generate.temperature = config.generation_temperature;
            generate.seed = config.seed;
            const agents::AgentResponse generated = runtime.invoke(generate);

            const extract::ParsedTrace parsed = extract::parse_reasoning_output(generated.text);

            // The summarizer writes the caption from the reasoning text alone:
            // no media goes with this request.
            const prompts::RenderedPrompt summary_prompt =
                prompts.render_summarization_prompt(parsed.trace, sample.question);
            agents::AgentRequest summarize;
            summarize.backend_id = summarizer;
            summarize.role = Role::Summarization;
            summarize.prompt = summary_prompt.text;
            summarize.temperature = config.summarization_temperature;
            summarize.seed = config.seed;
            const agents::AgentResponse summarized = runtime.invoke(summarize);
            const std::string caption = trim_copy(summarized.text);

            agents::AgentRequest evaluate;
            evaluate.backend_id = evaluator;
            evaluate.role = Role::Evaluation;
            evaluate.prompt = prompts.render_evaluation_prompt(caption);
            evaluate.media_refs = media;
            evaluate.temperature = 0.0;
            evaluate.seed = config.seed;
            const agents::AgentResponse evaluated = runtime.invoke(evaluate);
            const int score = extract::parse_score(evaluated.text);

            IterationRecord record;
            record.t = t;
            record.trace = parsed.trace;
            record.caption = caption;
            record.score = score;
            record.raw = RawResponses{generated.text, summarized.text, evaluated.text};
            outcome.iterations.push_back(std::move(record));

            if (score >= config.threshold) {
                outcome.stop_reason = StopReason::ThresholdReached;
                break;
            }
            outcome.stop_reason = StopReason::IterationsExhausted;
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            outcome.stop_reason = StopReason::AgentFailure;
            outcome.error = e.what();
            break;
        }
    }

    if (!outcome.iterations.empty()) outcome.best = select_best(outcome.iterations);
    return outcome;
}

AugmentedSample augment_sample(const Sample& sample, const ReasoningTrace& trace,
                               const prompts::PromptLibrary& prompts) {
    AugmentedSample out;
    out.sample = sample;
    out.trace = trace;
    out.query = prompts.render_augmented_query(sample.question, trace);
    return out;
}

std::vector<DistillResult> distill_dataset(
    const std::vector<Sample>& samples, const DistillConfig& config,
    agents::AgentRuntime& runtime, const prompts::PromptLibrary& prompts,
    int parallelism, const std::optional<std::filesystem::path>& trace_dir,
    DatasetSummary* summary) {
    validate_config(config, runtime);
    if (trace_dir) fs::create_directories(*trace_dir);

    std::vector<DistillResult> results(samples.size());

    auto process = [&](std::size_t i) {
        DistillResult& slot = results[i];
        try {
            slot.outcome = run_distillation(samples[i], config, runtime, prompts);
        } catch (const std::exception& e) {
            slot.outcome = DistillOutcome{};
            slot.outcome.sample_id = samples[i].id;
            slot.outcome.stop_reason = StopReason::AgentFailure;
            slot.outcome.error = e.what();
        }
        if (slot.outcome.best) {
            const IterationRecord& chosen = slot.outcome.iterations[*slot.outcome.best];
            slot.augmented = augment_sample(samples[i], chosen.trace, prompts);
        }
    };

    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(std::max(1, parallelism)),
                              std::max<std::size_t>(samples.size(), 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < samples.size(); ++i) process(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= samples.size()) break;
                    process(i);
                }
            });
        }
        for (auto& worker : pool) worker.join();
    }

    if (trace_dir) {
        for (const DistillResult& result : results) {
            write_trace_file(*trace_dir, result.outcome);
        }
    }

    if (summary) {
        summary->total = samples.size();
        summary->failed = static_cast<std::size_t>(
            std::count_if(results.begin(), results.end(), [](const DistillResult& r) {
                return r.outcome.stop_reason == StopReason::AgentFailure;
            }));
        summary->succeeded = summary->total - summary->failed;
    }
    return results;
}

}  // namespace avrd::distill
