#pragma once

// The iterative refinement loop: generate reasoning, summarize it into a
// caption without media access, score the caption against the media, and
// feed the score back to the generator until the threshold or the iteration
// cap is hit. Also builds the reasoning-augmented query for the target model.

#include <filesystem>
#include <optional>
#include <vector>

#include "avrd/agents.hpp"
#include "avrd/core.hpp"
#include "avrd/prompts.hpp"

namespace avrd::distill {

// A sample paired with its selected reasoning and the rendered query that
// the target model will receive. Media references pass through unchanged.
struct AugmentedSample {
    Sample sample;
    ReasoningTrace trace;
    std::string query;

    bool operator==(const AugmentedSample&) const = default;
};

// Index of the best iteration: maximum score, earliest iteration on ties.
// Throws ValidationError on an empty list.
std::size_t select_best(const std::vector<IterationRecord>& iterations);

// Runs the loop for one sample. Iteration t sends the reasoning prompt
// (t = 1) or the feedback prompt (t >= 2) with the sample media, summarizes
// the parsed trace with NO media attached, and scores the caption against
// the media. Stops as soon as the score reaches config.threshold or t hits
// config.max_iterations; the loop always runs at least once.
//
// Agent or parse failures become stop_reason = AgentFailure: at t = 1 the
// outcome carries no iterations and an error message; at t > 1 the loop
// truncates and `best` is selected among the completed records. Throws
// ConfigError only when the config itself is unusable (missing roles,
// out-of-range knobs).
DistillOutcome run_distillation(const Sample& sample, const DistillConfig& config,
                                agents::AgentRuntime& runtime,
                                const prompts::PromptLibrary& prompts);

// Pairs the sample with the selected trace and renders the augmented query.
// Idempotent; media references are returned byte-equal.
AugmentedSample augment_sample(const Sample& sample, const ReasoningTrace& trace,
                               const prompts::PromptLibrary& prompts);

// Outcome of one sample within a dataset run; `augmented` is set iff at
// least one iteration completed.
struct DistillResult {
    DistillOutcome outcome;
    std::optional<AugmentedSample> augmented;
};

struct DatasetSummary {
    std::size_t total = 0;
    std::size_t succeeded = 0;
    std::size_t failed = 0;  // outcomes that stopped on AgentFailure
};

// Runs the loop over every sample with up to `parallelism` samples in
// flight. Results are ordered by input order and independent of scheduling.
// Per-sample failures are aggregated, never thrown. When trace_dir is set,
// writes one JSON trace file per sample ("<id>.json") with every iteration
// record. `summary`, if given, receives the aggregate counts.
std::vector<DistillResult> distill_dataset(
    const std::vector<Sample>& samples, const DistillConfig& config,
    agents::AgentRuntime& runtime, const prompts::PromptLibrary& prompts,
    int parallelism,
    const std::optional<std::filesystem::path>& trace_dir = std::nullopt,
    DatasetSummary* summary = nullptr);

}  // namespace avrd::distill
