#pragma once

// Evaluation runner: queries the target model N times per sample, extracts
// or judges the answers, and aggregates best/mean metrics per task.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "avrd/agents.hpp"
#include "avrd/bench_io.hpp"
#include "avrd/core.hpp"
#include "avrd/prompts.hpp"

namespace avrd::evaluate {

struct EvalOptions {
    int runs = 3;
    std::string target_backend;
    std::string judge_backend;  // choice-extraction fallback + open-ended judge
    double target_temperature = 0.0;
    std::optional<std::uint64_t> seed;
    int parallelism = 1;
};

// The text query the target model receives for this entry: the question
// plus an options block for multiple choice, wrapped in the augmented-query
// template when the entry carries reasoning steps.
std::string compose_target_query(const bench::ManifestEntry& entry,
                                 const prompts::PromptLibrary& prompts);

// Per-run evaluation records (accuracy tasks and open-ended tasks only;
// captioning samples contribute to caption metrics instead). Sample-level
// failures are aggregated into `errors` (the failed sample is scored as
// incorrect / empty caption); extraction warnings land in `warnings`.
struct EvaluationResult {
    MetricReport report;
    std::vector<std::vector<EvalRecord>> run_records;  // [run][record]
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
};

// Runs the full evaluation. Accuracy tasks go through two-step choice
// extraction; open-ended tasks through the Correct/Incorrect judge;
// captioning tasks are scored with the four caption metrics. Per-task
// values are aggregated as (best, mean) over the N runs.
EvaluationResult run_evaluation(const bench::Manifest& manifest,
                                agents::AgentRuntime& runtime,
                                const prompts::PromptLibrary& prompts,
                                const EvalOptions& options);

// Wraps an evaluation into a storable report. The fingerprint covers the
// backends, run count, target temperature, the dataset's content hash, and
// the loop parameters recorded in an augmented dataset's header.
bench::RunReport make_report(const bench::Manifest& manifest,
                             const EvaluationResult& result,
                             const EvalOptions& options,
                             const std::string& dataset_hash);

}  // namespace avrd::evaluate
