// Acceptance gate: one self-contained check per release criterion, each
// printed as "CRITERION k: PASS" or "CRITERION k: FAIL (...)". The binary
// exits non-zero if any criterion fails. Checks use only mock backends and
// the bundled fixtures; nothing here touches the network.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "avrd/agents.hpp"
#include "avrd/bench_io.hpp"
#include "avrd/cli.hpp"
#include "avrd/core.hpp"
#include "avrd/distiller.hpp"
#include "avrd/evaluate.hpp"
#include "avrd/extraction.hpp"
#include "avrd/metrics.hpp"
#include "avrd/prompts.hpp"

#include "support/helpers.hpp"
#include "support/reference_metrics.hpp"

using namespace avrd;
using nlohmann::json;
using testsupport::read_file;
using testsupport::write_file;

namespace {

// Thrown by require() with a human-readable description of the first
// violated expectation; main() turns it into the FAIL line.
struct CheckFailure : std::runtime_error {
    explicit CheckFailure(const std::string& what) : std::runtime_error(what) {}
};

void require(bool condition, const std::string& what) {
    if (!condition) throw CheckFailure(what);
}

const prompts::PromptLibrary& library() {
    static const prompts::PromptLibrary lib =
        prompts::PromptLibrary::load(testsupport::templates_dir());
    return lib;
}

std::string golden(const std::string& name) {
    return read_file(testsupport::golden_dir() / (name + ".golden.txt"));
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// A minimal multiple-choice sample; media references stay opaque strings
// unless a check needs cache keying (which digests the referenced bytes).
Sample loop_sample() {
    Sample sample;
    sample.id = "loop-01";
    sample.video_ref = "media/loop-01.mp4";
    sample.audio_ref = "media/loop-01.wav";
    sample.question = "Which instrument carries the melody?";
    sample.options = {{'A', "Piano"}, {'B', "Electric guitar"}, {'C', "Violin"}, {'D', "Flute"}};
    sample.ground_truth = "B";
    sample.task = "music-avqa";
    return sample;
}

DistillConfig loop_config(int threshold, int max_iterations) {
    DistillConfig config;
    config.threshold = threshold;
    config.max_iterations = max_iterations;
    config.agents[Role::ReasoningGeneration] = "gen";
    config.agents[Role::Summarization] = "sum";
    config.agents[Role::Evaluation] = "eval";
    return config;
}

// Backends for one refinement-loop run: the generator serves the first
// iteration plus the scripted feedback rounds, the evaluator replays the
// given scores, and the summarizer answers every round with a fixed caption.
agents::AgentRuntime loop_runtime(const std::vector<int>& scores,
                                  const std::vector<std::string>& feedback_traces,
                                  const std::string& first_trace) {
    auto gen = testsupport::mock_spec("gen");
    gen.scripts[to_string(Role::ReasoningGeneration)] = {first_trace};
    gen.scripts[to_string(Role::Feedback)] = feedback_traces;
    auto sum = testsupport::mock_spec("sum");
    sum.default_response = "a caption of the clip";
    auto eval = testsupport::mock_spec("eval");
    auto& evaluations = eval.scripts[to_string(Role::Evaluation)];
    evaluations.reserve(scores.size());
    for (int score : scores) evaluations.push_back(std::to_string(score));
    return agents::AgentRuntime({gen, sum, eval});
}

// ---------------------------------------------------------------------------
// Criterion 1: loop semantics over randomized score schedules
// ---------------------------------------------------------------------------

void criterion_loop_semantics() {
    std::mt19937 rng(20260816u);
    std::uniform_int_distribution<int> score_dist(1, 10);
    std::uniform_int_distribution<int> knob_dist(1, 10);

    std::vector<std::string> feedback_traces;
    for (int t = 2; t <= 10; ++t) {
        feedback_traces.push_back(testsupport::reasoning_json(
            {"step for round " + std::to_string(t)}, {}, "answer " + std::to_string(t)));
    }
    const std::string first_trace =
        testsupport::reasoning_json({"step for round 1"}, {}, "answer 1");
    const Sample sample = loop_sample();

    const auto start = std::chrono::steady_clock::now();
    for (int trial = 0; trial < 1000; ++trial) {
        const int threshold = knob_dist(rng);
        const int cap = knob_dist(rng);
        std::vector<int> scores(static_cast<std::size_t>(cap));
        for (int& s : scores) s = score_dist(rng);

        int expected_iterations = cap;
        StopReason expected_stop = StopReason::IterationsExhausted;
        for (int i = 0; i < cap; ++i) {
            if (scores[static_cast<std::size_t>(i)] >= threshold) {
                expected_iterations = i + 1;
                expected_stop = StopReason::ThresholdReached;
                break;
            }
        }
        std::size_t expected_best = 0;
        for (std::size_t i = 1; i < static_cast<std::size_t>(expected_iterations); ++i) {
            if (scores[i] > scores[expected_best]) expected_best = i;
        }

        agents::AgentRuntime runtime = loop_runtime(scores, feedback_traces, first_trace);
        const DistillOutcome outcome =
            distill::run_distillation(sample, loop_config(threshold, cap), runtime, library());

        const std::string tag = "trial " + std::to_string(trial) + " (threshold " +
                                std::to_string(threshold) + ", cap " + std::to_string(cap) + ")";
        require(outcome.iterations.size() == static_cast<std::size_t>(expected_iterations),
                tag + ": expected " + std::to_string(expected_iterations) + " iterations, got " +
                    std::to_string(outcome.iterations.size()));
        require(outcome.stop_reason == expected_stop, tag + ": wrong stop reason");
        require(outcome.best.has_value(), tag + ": no best iteration selected");
        require(*outcome.best == expected_best,
                tag + ": expected best index " + std::to_string(expected_best) + ", got " +
                    std::to_string(*outcome.best));
        for (std::size_t i = 0; i < outcome.iterations.size(); ++i) {
            require(outcome.iterations[i].score == scores[i], tag + ": score mismatch at " +
                                                                  std::to_string(i));
            require(outcome.iterations[i].t == static_cast<int>(i) + 1,
                    tag + ": iteration index mismatch");
        }
    }
    const double elapsed = seconds_since(start);
    require(elapsed < 5.0,
            "1000 mock loop runs took " + std::to_string(elapsed) + "s (budget 5s)");
}

// ---------------------------------------------------------------------------
// Criterion 2: prompt fidelity (goldens + feedback request audit)
// ---------------------------------------------------------------------------

void criterion_prompt_fidelity() {
    namespace fixture = testsupport::fixture;
    require(library().render_reasoning_prompt(fixture::kQuestion) ==
                golden("reasoning_generation"),
            "reasoning-generation prompt drifted from its golden");
    require(library().render_summarization_prompt(fixture::trace(), fixture::kQuestion).text ==
                golden("summarization"),
            "summarization prompt drifted from its golden");
    require(library().render_evaluation_prompt(fixture::kCaption) == golden("evaluation"),
            "evaluation prompt drifted from its golden");
    require(library().render_feedback_prompt(fixture::trace(), fixture::kQuestion,
                                             fixture::kScore) == golden("feedback"),
            "feedback prompt drifted from its golden");

    // Drive a full four-round loop and audit every feedback-round request:
    // it must quote the previous score and the previous steps verbatim.
    const std::vector<int> scores = {2, 3, 5, 9};
    std::vector<std::string> feedback_traces;
    for (int t = 2; t <= 4; ++t) {
        feedback_traces.push_back(testsupport::reasoning_json(
            {"audit step " + std::to_string(t) + " alpha",
             "audit step " + std::to_string(t) + " beta"},
            {}, "audit answer " + std::to_string(t)));
    }
    const std::string first_trace = testsupport::reasoning_json(
        {"audit step 1 alpha", "audit step 1 beta"}, {}, "audit answer 1");

    agents::AgentRuntime runtime = loop_runtime(scores, feedback_traces, first_trace);
    const DistillOutcome outcome =
        distill::run_distillation(loop_sample(), loop_config(9, 4), runtime, library());
    require(outcome.iterations.size() == 4, "audit loop did not run four iterations");

    const auto requests = runtime.captured_requests("gen");
    require(requests.size() == 4, "generator should have been called four times");
    require(requests[0].role == Role::ReasoningGeneration, "first round must not be feedback");
    for (std::size_t i = 1; i < requests.size(); ++i) {
        const IterationRecord& previous = outcome.iterations[i - 1];
        const std::string& prompt = requests[i].prompt;
        require(requests[i].role == Role::Feedback, "later rounds must use the feedback role");
        const std::string phrase =
            "received a score of " + std::to_string(previous.score) + " out of 10";
        require(prompt.find(phrase) != std::string::npos,
                "feedback round " + std::to_string(i + 1) + " does not quote \"" + phrase +
                    "\"");
        require(prompt.find(prompts::numbered_list(previous.trace.steps)) != std::string::npos,
                "feedback round " + std::to_string(i + 1) +
                    " does not quote the previous steps verbatim");
    }
}

// ---------------------------------------------------------------------------
// Criterion 3: the summarizer never sees media
// ---------------------------------------------------------------------------

void criterion_summarizer_blindness() {
    auto gen = testsupport::mock_spec("gen");
    gen.default_response =
        testsupport::reasoning_json({"watch the frames", "listen to the track"}, {}, "a verdict");
    auto sum = testsupport::mock_spec("sum");
    sum.default_response = "a concise caption";
    auto eval = testsupport::mock_spec("eval");
    agents::AgentRuntime runtime({gen, sum, eval});

    std::vector<Sample> samples;
    std::vector<std::string> evaluations;
    for (int i = 1; i <= 4; ++i) {
        Sample sample = loop_sample();
        sample.id = "blind-" + std::to_string(i);
        sample.question = "Round " + std::to_string(i) + ": what drives the rhythm?";
        samples.push_back(sample);
        evaluations.push_back("3");  // every sample takes a feedback round
        evaluations.push_back("9");
    }
    runtime.script_mock("eval", Role::Evaluation, evaluations);

    distill::DatasetSummary summary;
    const auto results = distill::distill_dataset(samples, loop_config(8, 5), runtime,
                                                  library(), /*parallelism=*/1, std::nullopt,
                                                  &summary);
    require(results.size() == 4 && summary.failed == 0, "mock pipeline run did not complete");

    const auto summarizer_requests = runtime.captured_requests("sum");
    require(summarizer_requests.size() == 8, "expected two summarizer calls per sample");
    for (const auto& request : summarizer_requests) {
        require(request.media_refs.empty(), "a summarizer request carried media references");
    }
    // The run exercised media elsewhere, so the check above is not vacuous.
    for (const auto& request : runtime.captured_requests("eval")) {
        require(!request.media_refs.empty(), "evaluator requests should carry media");
    }
    for (const auto& request : runtime.captured_requests("gen")) {
        require(!request.media_refs.empty(), "generator requests should carry media");
    }
}

// ---------------------------------------------------------------------------
// Criterion 4: choice-extraction corpus, with routing audited per case
// ---------------------------------------------------------------------------

void criterion_choice_extraction() {
    agents::AgentRuntime runtime(
        agents::parse_registry(testsupport::data_dir() / "extraction_registry.json"));

    std::ifstream in(testsupport::data_dir() / "extraction_corpus.jsonl", std::ios::binary);
    require(static_cast<bool>(in), "cannot open the extraction corpus");

    std::size_t cases = 0;
    std::size_t heuristic_cases = 0;
    std::size_t fallback_cases = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json record = json::parse(line);
        ++cases;
        const std::string label = "case " + std::to_string(cases);

        const auto before = runtime.invocation_count("judge");
        const extract::ChoiceExtraction choice = extract::extract_choice(
            record.at("response").get<std::string>(), record.value("question", std::string{}),
            record.at("options").get<std::vector<Option>>(), runtime, "judge", library());
        const auto delta = runtime.invocation_count("judge") - before;

        std::optional<std::string> expected;
        if (record.contains("expected") && !record.at("expected").is_null()) {
            expected = record.at("expected").get<std::string>();
        }
        require(choice.label.has_value() == expected.has_value(),
                label + ": match/no-match expectation violated");
        if (expected) {
            require(std::string(1, *choice.label) == *expected,
                    label + ": expected " + *expected + ", got " + *choice.label);
        }
        require(std::string(to_string(choice.path)) ==
                    record.at("expected_path").get<std::string>(),
                label + ": took the wrong extraction path");

        if (choice.path == ExtractionPath::Heuristic) {
            ++heuristic_cases;
            require(delta == 0, label + ": heuristic case invoked the judge backend");
        } else {
            ++fallback_cases;
            require(delta == 1, label + ": fallback case should invoke the judge exactly once");
        }
    }
    require(cases == 40, "extraction corpus should hold 40 cases, found " +
                             std::to_string(cases));
    require(heuristic_cases == 19 && fallback_cases == 21,
            "routing split drifted: heuristic " + std::to_string(heuristic_cases) +
                ", fallback " + std::to_string(fallback_cases));
    require(runtime.invocation_count("judge") == fallback_cases,
            "judge invocation total does not equal the fallback case count");
}

// ---------------------------------------------------------------------------
// Criterion 5: caption metrics agree with brute-force references
// ---------------------------------------------------------------------------

std::string random_sentence(std::mt19937& rng) {
    static const std::vector<std::string> vocab = {
        "band",  "plays", "guitar", "drums", "over",  "river",  "crowd", "lights",
        "night", "slow",  "rising", "beat",  "sings", "speaks", "walks", "stage"};
    std::uniform_int_distribution<std::size_t> length_dist(1, 8);
    std::uniform_int_distribution<std::size_t> word_dist(0, vocab.size() - 1);
    std::string sentence;
    const std::size_t length = length_dist(rng);
    for (std::size_t i = 0; i < length; ++i) {
        if (i > 0) sentence += ' ';
        sentence += vocab[word_dist(rng)];
    }
    return sentence;
}

void criterion_metric_oracles() {
    std::mt19937 rng(4242u);
    std::uniform_int_distribution<std::size_t> corpus_dist(1, 6);
    std::uniform_int_distribution<std::size_t> ref_dist(1, 3);
    const double tolerance = 1e-9;

    for (int trial = 0; trial < 200; ++trial) {
        std::vector<metrics::CaptionItem> corpus(corpus_dist(rng));
        for (auto& item : corpus) {
            item.candidate = random_sentence(rng);
            item.references.resize(ref_dist(rng));
            for (auto& reference : item.references) reference = random_sentence(rng);
        }
        const std::string tag = "corpus trial " + std::to_string(trial);

        std::vector<std::pair<std::string, std::vector<std::string>>> pairs;
        for (const auto& item : corpus) {
            pairs.emplace_back(item.candidate, item.references);
            require(std::abs(metrics::bleu4(item.candidate, item.references) -
                             refmetrics::ref_bleu4(item.candidate, item.references)) <= tolerance,
                    tag + ": BLEU@4 disagrees with the reference implementation");
            require(std::abs(metrics::meteor_lite(item.candidate, item.references) -
                             refmetrics::ref_meteor(item.candidate, item.references)) <=
                        tolerance,
                    tag + ": METEOR-lite disagrees with the reference implementation");
            require(std::abs(metrics::rouge_l(item.candidate, item.references) -
                             refmetrics::ref_rouge_l(item.candidate, item.references)) <=
                        tolerance,
                    tag + ": ROUGE-L disagrees with the reference implementation");
        }

        const metrics::CiderResult produced = metrics::cider_d(corpus);
        const std::vector<double> reference = refmetrics::ref_cider_d(pairs);
        require(produced.per_sample.size() == reference.size(),
                tag + ": CIDEr-D sample count mismatch");
        double reference_mean = 0.0;
        for (std::size_t i = 0; i < reference.size(); ++i) {
            require(std::abs(produced.per_sample[i] - reference[i]) <= tolerance,
                    tag + ": CIDEr-D disagrees with the reference implementation");
            reference_mean += reference[i];
        }
        reference_mean /= static_cast<double>(reference.size());
        require(std::abs(produced.mean - reference_mean) <= tolerance,
                tag + ": CIDEr-D mean disagrees with the reference implementation");
    }

    // Identity anchors. BLEU@4 and ROUGE-L score a verbatim match 1.0; the
    // METEOR-lite fragmentation penalty leaves 1 - 0.5/m^3 for an m-token
    // match; single-item CIDEr-D degenerates to 0 (every n-gram's document
    // frequency equals the corpus size), while two items with disjoint
    // vocabulary each score the full 10.
    const std::string sentence = "a band plays over the river crowd";
    require(std::abs(metrics::bleu4(sentence, {sentence}) - 1.0) <= 1e-12,
            "BLEU@4 identity is not 1.0");
    require(std::abs(metrics::rouge_l(sentence, {sentence}) - 1.0) <= 1e-12,
            "ROUGE-L identity is not 1.0");
    const double m = 7.0;  // tokens in `sentence`
    require(std::abs(metrics::meteor_lite(sentence, {sentence}) - (1.0 - 0.5 / (m * m * m))) <=
                1e-12,
            "METEOR-lite identity is not 1 - 0.5/m^3");
    const metrics::CiderResult degenerate = metrics::cider_d({{sentence, {sentence}}});
    require(degenerate.per_sample.size() == 1 && degenerate.per_sample[0] == 0.0,
            "single-item CIDEr-D identity should collapse to 0");
    const metrics::CiderResult disjoint = metrics::cider_d(
        {{"a band plays guitar", {"a band plays guitar"}},
         {"fireworks explode over rooftops", {"fireworks explode over rooftops"}}});
    require(std::abs(disjoint.per_sample[0] - 10.0) <= 1e-9 &&
                std::abs(disjoint.per_sample[1] - 10.0) <= 1e-9,
            "disjoint two-item CIDEr-D identities should score 10");
}

// ---------------------------------------------------------------------------
// Criterion 6: relative-gain arithmetic anchors
// ---------------------------------------------------------------------------

void criterion_gain_anchors() {
    const std::vector<std::tuple<double, double, std::string>> anchors = {
        {41.9, 33.7, "+24.33%"},
        {41.6, 31.8, "+30.81%"},
        {38.1, 34.3, "+11.07%"},
        {25.0, 12.5, "+100.00%"},
        {0.250, 0.125, "+100.00%"},  // scale-free: fractions behave like percentages
    };
    for (const auto& [value, baseline, expected] : anchors) {
        const std::string got = metrics::relative_gain(value, baseline);
        require(got == expected, "relative_gain(" + std::to_string(value) + ", " +
                                     std::to_string(baseline) + ") = " + got + ", expected " +
                                     expected);
    }
}

// ---------------------------------------------------------------------------
// Criteria 7 and 8: end-to-end differential demo, then cached replay
// ---------------------------------------------------------------------------

// Everything the demo needs on disk: a ten-sample manifest whose media
// references point at real scratch files (the response cache digests them),
// plus output paths for both pipeline passes.
struct DemoEnvironment {
    testsupport::TempDir root{"acceptance-demo"};
    std::filesystem::path manifest_path;
    std::filesystem::path cache_dir;
    std::filesystem::path augmented_path;
    std::filesystem::path baseline_report_path;
    std::filesystem::path treatment_report_path;
    std::vector<std::string> sample_ids;
};

std::string demo_marker(const std::string& sample_id) { return "marker-step-" + sample_id; }

void populate_demo_environment(DemoEnvironment& env) {
    env.manifest_path = env.root / "demo_manifest.jsonl";
    env.cache_dir = env.root / "cache";
    env.augmented_path = env.root / "augmented.jsonl";
    env.baseline_report_path = env.root / "baseline_report.json";
    env.treatment_report_path = env.root / "treatment_report.json";

    const auto media_dir = env.root.path() / "media";
    std::filesystem::create_directories(media_dir);

    bench::Manifest manifest;
    for (int i = 1; i <= 10; ++i) {
        std::ostringstream id;
        id << "demo-" << (i < 10 ? "0" : "") << i;
        const auto video = media_dir / (id.str() + ".mp4");
        const auto audio = media_dir / (id.str() + ".wav");
        write_file(video, "synthetic video bytes " + id.str());
        write_file(audio, "synthetic audio bytes " + id.str());

        Sample sample;
        sample.id = id.str();
        sample.video_ref = video.string();
        sample.audio_ref = audio.string();
        sample.question = "Demo question " + std::to_string(i) + ": which sound anchors the scene?";
        sample.options = {{'A', "Silence"},
                          {'B', "A drum solo"},
                          {'C', "Wind noise"},
                          {'D', "Crowd chatter"}};
        sample.ground_truth = "B";
        sample.task = "music-avqa";
        manifest.entries.push_back(bench::ManifestEntry{sample, {}, {}, {}, {}});
        env.sample_ids.push_back(sample.id);
    }
    bench::write_manifest(manifest, env.manifest_path);
}

// The distillation side: the generator plants a per-sample marker step, the
// summarizer captions blind, and the evaluator immediately clears the
// threshold so every sample distills in one round.
std::vector<agents::BackendSpec> demo_distill_specs(const DemoEnvironment& env) {
    auto gen = testsupport::mock_spec("gen");
    for (std::size_t i = 0; i < env.sample_ids.size(); ++i) {
        gen.rules.push_back(
            {"Demo question " + std::to_string(i + 1) + ":",
             testsupport::reasoning_json({demo_marker(env.sample_ids[i]),
                                          "compare the audio onset with the visible action"},
                                         {}, "a drum solo anchors the scene")});
    }
    auto sum = testsupport::mock_spec("sum");
    sum.default_response = "a percussive demo caption";
    auto eval = testsupport::mock_spec("eval");
    eval.default_response = "9";
    return {gen, sum, eval};
}

// The evaluation side: the target answers correctly iff its query quotes the
// sample's marker step — i.e. iff distillation injected the reasoning.
std::vector<agents::BackendSpec> demo_eval_specs(const DemoEnvironment& env) {
    auto target = testsupport::mock_spec("target");
    for (const auto& id : env.sample_ids) {
        target.rules.push_back({demo_marker(id), "B) A drum solo"});
    }
    target.default_response = "A) Silence";
    auto judge = testsupport::mock_spec("judge");  // required by config, never consulted
    return {target, judge};
}

cli::DistillArgs demo_distill_args(const DemoEnvironment& env,
                                   const std::filesystem::path& output) {
    cli::DistillArgs args;
    args.manifest = env.manifest_path;
    args.templates_dir = testsupport::templates_dir();
    args.output = output;
    args.threshold = 8;
    args.max_iter = 5;
    args.generator = "gen";
    args.summarizer = "sum";
    args.evaluator = "eval";
    args.seed = 11;
    return args;
}

cli::EvaluateArgs demo_evaluate_args(const std::filesystem::path& manifest,
                                     const std::filesystem::path& report) {
    cli::EvaluateArgs args;
    args.manifest = manifest;
    args.templates_dir = testsupport::templates_dir();
    args.report = report;
    args.runs = 1;
    args.target = "target";
    args.judge = "judge";
    args.seed = 11;
    return args;
}

// One full pipeline pass: distill the manifest, evaluate the plain dataset
// as the baseline, evaluate the augmented dataset as the treatment. Returns
// the total number of mock invocations the pass performed.
std::size_t run_demo_pass(const DemoEnvironment& env, const std::filesystem::path& augmented,
                          const std::filesystem::path& baseline_report,
                          const std::filesystem::path& treatment_report) {
    std::ostringstream errors;

    agents::AgentRuntime distill_runtime(demo_distill_specs(env), env.cache_dir);
    require(cli::cmd_distill(demo_distill_args(env, augmented), errors, &distill_runtime) ==
                cli::kExitOk,
            "cmd_distill failed: " + errors.str());

    agents::AgentRuntime baseline_runtime(demo_eval_specs(env), env.cache_dir);
    require(cli::cmd_evaluate(demo_evaluate_args(env.manifest_path, baseline_report), errors,
                              &baseline_runtime) == cli::kExitOk,
            "baseline cmd_evaluate failed: " + errors.str());

    agents::AgentRuntime treatment_runtime(demo_eval_specs(env), env.cache_dir);
    require(cli::cmd_evaluate(demo_evaluate_args(augmented, treatment_report), errors,
                              &treatment_runtime) == cli::kExitOk,
            "treatment cmd_evaluate failed: " + errors.str());

    require(baseline_runtime.invocation_count("judge") == 0 &&
                treatment_runtime.invocation_count("judge") == 0,
            "the judge backend should never be consulted in the demo");
    return distill_runtime.total_invocations() + baseline_runtime.total_invocations() +
           treatment_runtime.total_invocations();
}

double task_metric(const bench::RunReport& report, const std::string& task, bool best) {
    for (const auto& metrics : report.metrics.tasks) {
        if (metrics.task == task) return best ? metrics.best : metrics.mean;
    }
    throw CheckFailure("report has no task '" + task + "'");
}

void criterion_differential_demo(const DemoEnvironment& env) {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t invocations =
        run_demo_pass(env, env.augmented_path, env.baseline_report_path,
                      env.treatment_report_path);
    const double elapsed = seconds_since(start);
    require(invocations > 0, "the first pass should hit the mock backends");

    const bench::Manifest augmented = bench::load_manifest(env.augmented_path);
    require(augmented.augmented && augmented.entries.size() == 10,
            "augmented dataset should carry all ten samples");
    for (const auto& entry : augmented.entries) {
        require(entry.augmented(), "every augmented entry should carry reasoning steps");
    }

    const bench::RunReport baseline = bench::load_report(env.baseline_report_path);
    const bench::RunReport treatment = bench::load_report(env.treatment_report_path);
    require(task_metric(baseline, "music-avqa", true) == 0.0 &&
                task_metric(baseline, "music-avqa", false) == 0.0,
            "baseline accuracy should be 0.0 without injected reasoning");
    require(task_metric(treatment, "music-avqa", true) == 1.0 &&
                task_metric(treatment, "music-avqa", false) == 1.0,
            "treatment accuracy should be 1.0 with injected reasoning");

    const std::string rendered =
        bench::render_report(treatment, baseline, bench::ReportFormat::Markdown);
    require(rendered.find("| music-avqa | 100.0 (n/a) | 100.0 (n/a) |") != std::string::npos,
            "rendered report lacks the annotated treatment row");

    require(elapsed < 10.0,
            "demo pass took " + std::to_string(elapsed) + "s (budget 10s)");
}

void criterion_cached_replay(const DemoEnvironment& env) {
    const auto augmented_replay = env.root / "augmented_replay.jsonl";
    const auto baseline_replay = env.root / "baseline_report_replay.json";
    const auto treatment_replay = env.root / "treatment_report_replay.json";

    const std::size_t invocations =
        run_demo_pass(env, augmented_replay, baseline_replay, treatment_replay);
    require(invocations == 0,
            "warm-cache replay hit the backends " + std::to_string(invocations) + " times");

    require(read_file(augmented_replay) == read_file(env.augmented_path),
            "replayed augmented dataset is not byte-identical");
    require(read_file(baseline_replay) == read_file(env.baseline_report_path),
            "replayed baseline report is not byte-identical");
    require(read_file(treatment_replay) == read_file(env.treatment_report_path),
            "replayed treatment report is not byte-identical");
}

}  // namespace

int main() {
    int failures = 0;
    const auto run = [&failures](int number, const auto& body) {
        try {
            body();
            std::cout << "CRITERION " << number << ": PASS\n";
        } catch (const std::exception& e) {
            ++failures;
            std::cout << "CRITERION " << number << ": FAIL (" << e.what() << ")\n";
        }
    };

    run(1, criterion_loop_semantics);
    run(2, criterion_prompt_fidelity);
    run(3, criterion_summarizer_blindness);
    run(4, criterion_choice_extraction);
    run(5, criterion_metric_oracles);
    run(6, criterion_gain_anchors);

    // Criteria 7 and 8 share one scratch environment: 8 replays 7's pipeline
    // against the warm cache, so it must observe the same files.
    try {
        DemoEnvironment env;
        populate_demo_environment(env);
        run(7, [&env] { criterion_differential_demo(env); });
        run(8, [&env] { criterion_cached_replay(env); });
    } catch (const std::exception& e) {
        failures += 2;
        std::cout << "CRITERION 7: FAIL (demo setup: " << e.what() << ")\n";
        std::cout << "CRITERION 8: FAIL (demo setup: " << e.what() << ")\n";
    }

    return failures == 0 ? 0 : 1;
}
