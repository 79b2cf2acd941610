#pragma once

// Domain types shared by the whole pipeline, sample validation, and the
// content hash used for cache keying. All types are immutable values after
// construction and safe to share across threads.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace avrd {

// ---------------------------------------------------------------------------
// Samples and tasks
// ---------------------------------------------------------------------------

// One labeled answer option of a multiple-choice question.
struct Option {
    char label = 'A';
    std::string text;

    bool operator==(const Option&) const = default;
};

// A benchmark sample: media references plus a question. Media are opaque
// references (paths or URLs); nothing here ever decodes audio or video.
struct Sample {
    std::string id;
    std::string video_ref;
    std::string audio_ref;  // may equal video_ref when audio is embedded
    std::string question;
    std::vector<Option> options;  // empty for open-ended and captioning tasks
    std::string ground_truth;     // option label, or free text for open-ended
    std::string task;
    std::vector<std::string> references;  // reference captions (captioning only)
    std::string category;                 // free-form question category tag

    bool operator==(const Sample&) const = default;
};

// The closed task vocabulary, in canonical report order.
const std::vector<std::string>& known_tasks();
bool is_known_task(const std::string& task);
// Captioning tasks are scored with caption metrics instead of accuracy.
bool is_captioning_task(const std::string& task);

// Option labels are drawn from this fixed alphabet.
inline constexpr char kMinLabel = 'A';
inline constexpr char kMaxLabel = 'E';

// Returns every invariant violation of the sample, as human-readable
// strings naming the broken rule. Empty result means the sample is valid.
// Total: never throws regardless of field contents.
std::vector<std::string> validate_sample(const Sample& sample);

// ---------------------------------------------------------------------------
// Reasoning traces and distillation records
// ---------------------------------------------------------------------------

// Structured output of the reasoning generator: steps, per-step answers,
// and the final answer. step_answers either aligns 1:1 with steps or is
// empty (the parser records a warning in the latter case).
struct ReasoningTrace {
    std::vector<std::string> steps;
    std::vector<std::string> step_answers;
    std::string final_answer;

    bool operator==(const ReasoningTrace&) const = default;
};

// The three raw agent responses of one loop iteration, kept for audit.
struct RawResponses {
    std::string generation;
    std::string summarization;
    std::string evaluation;

    bool operator==(const RawResponses&) const = default;
};

// One generate/summarize/evaluate round of the refinement loop.
struct IterationRecord {
    int t = 1;  // 1-based iteration index; consecutive within an outcome
    ReasoningTrace trace;
    std::string caption;
    int score = 1;  // evaluator score in [1,10]
    RawResponses raw;

    bool operator==(const IterationRecord&) const = default;
};

enum class StopReason {
    ThresholdReached,
    IterationsExhausted,
    AgentFailure,
};

const char* to_string(StopReason reason);
std::optional<StopReason> stop_reason_from_string(const std::string& text);

// Agent roles. The first four drive the refinement loop; the rest cover
// answer extraction, open-ended judging, and the target model itself.
enum class Role {
    ReasoningGeneration,
    Summarization,
    Evaluation,
    Feedback,
    ChoiceExtraction,
    OpenEndedJudge,
    TargetAugmentation,
    Target,
};

const char* to_string(Role role);
std::optional<Role> role_from_string(const std::string& text);

// Knobs of the refinement loop. The defaults are the recommended operating
// point: at most five iterations, stop as soon as the score reaches 8.
struct DistillConfig {
    int max_iterations = 5;           // T >= 1
    int threshold = 8;                // stop when score >= threshold, in [1,10]
    std::map<Role, std::string> agents;  // role -> backend id

    // Sampling temperatures. Evaluation and judging are pinned to 0 for
    // deterministic scoring; generation keeps some diversity by default.
    double generation_temperature = 0.7;
    double summarization_temperature = 0.0;

    // Optional: forwarded to backends that accept a sampling seed.
    std::optional<std::uint64_t> seed;
};

// Result of running the loop on one sample.
struct DistillOutcome {
    std::string sample_id;
    std::vector<IterationRecord> iterations;
    // Index into iterations of the selected record: max score, earliest tie.
    // Unset only when no iteration completed (failure at t=1).
    std::optional<std::size_t> best;
    StopReason stop_reason = StopReason::IterationsExhausted;
    std::string error;  // failure detail when stop_reason == AgentFailure

    bool operator==(const DistillOutcome&) const = default;
};

// ---------------------------------------------------------------------------
// Evaluation records and metric reports
// ---------------------------------------------------------------------------

// How an answer was mapped to a result: label-pattern heuristics, the
// choice-extraction fallback model, or the open-ended judge.
enum class ExtractionPath {
    Heuristic,
    LlmFallback,
    Judge,
};

const char* to_string(ExtractionPath path);
std::optional<ExtractionPath> extraction_path_from_string(const std::string& text);

// Outcome of evaluating one sample in one run.
struct EvalRecord {
    std::string sample_id;
    std::string raw_response;
    // Extracted option label or open-ended answer; empty optional = no match.
    std::optional<std::string> extracted;
    bool correct = false;
    ExtractionPath extraction_path = ExtractionPath::Heuristic;

    bool operator==(const EvalRecord&) const = default;
};

// The four caption metrics. bleu4/meteor/rouge_l live in [0,1]; cider is the
// raw x10-scaled CIDEr-D value (tables conventionally show it x100).
struct CaptionScores {
    double bleu4 = 0.0;
    double meteor = 0.0;  // METEOR-lite: exact + stem matching, no synonymy
    double rouge_l = 0.0;
    double cider = 0.0;

    bool operator==(const CaptionScores&) const = default;
};

// Per-task aggregate over N evaluation runs. For accuracy tasks run_values
// holds the per-run accuracy fractions; for captioning tasks it holds the
// per-run CIDEr-D values and the caption_* fields carry all four metrics.
struct TaskMetrics {
    std::string task;
    std::string kind;  // "accuracy" | "caption"
    std::vector<double> run_values;
    double best = 0.0;
    double mean = 0.0;
    std::vector<CaptionScores> caption_runs;
    std::optional<CaptionScores> caption_best;
    std::optional<CaptionScores> caption_mean;

    bool operator==(const TaskMetrics&) const = default;
};

// Full metric summary of an evaluation, one entry per task, in canonical
// task order. Relative-gain strings are attached only when a baseline
// report is linked at render time.
struct MetricReport {
    std::vector<TaskMetrics> tasks;
    std::map<std::string, std::string> gains;  // task -> "+DD.DD%" string

    bool operator==(const MetricReport&) const = default;
};

// ---------------------------------------------------------------------------
// Content hashing
// ---------------------------------------------------------------------------

// Order-sensitive digest over a list of byte strings: each part is fed as an
// 8-byte big-endian length prefix followed by its bytes, and the whole
// stream is SHA-256 hashed. Returns 64 lowercase hex characters.
// content_hash({}) is the SHA-256 of the empty input.
std::string content_hash(const std::vector<std::string>& parts);

// SHA-256 of a single byte string, 64 lowercase hex characters.
std::string sha256_hex(const std::string& bytes);

}  // namespace avrd
