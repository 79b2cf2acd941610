#pragma once

// Subcommand implementations behind the command-line tool. Each cmd_*
// returns a process exit status: 0 success, 1 configuration error before
// any work, 2 partial failure. Tests call these directly (optionally
// injecting a runtime to observe backend traffic); main() routes argv here.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "avrd/agents.hpp"
#include "avrd/bench_io.hpp"

namespace avrd::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitPartial = 2;

struct DistillArgs {
    std::filesystem::path manifest;
    std::filesystem::path registry;
    std::filesystem::path templates_dir;
    std::filesystem::path output;
    std::optional<std::filesystem::path> cache_dir;
    std::optional<std::filesystem::path> trace_dir;
    int threshold = 8;
    int max_iter = 5;
    int parallelism = 1;
    std::string generator;    // backend ids per role
    std::string summarizer;
    std::string evaluator;
    std::string feedback;     // empty -> same backend as generator
    double generation_temperature = 0.7;
    std::optional<std::uint64_t> seed;
};

struct EvaluateArgs {
    std::filesystem::path manifest;  // plain or augmented dataset
    std::filesystem::path registry;
    std::filesystem::path templates_dir;
    std::filesystem::path report;    // output report path
    std::optional<std::filesystem::path> cache_dir;
    int runs = 3;
    int parallelism = 1;
    std::string target;
    std::string judge;
    double target_temperature = 0.0;
    std::optional<std::uint64_t> seed;
};

struct ExtractArgs {
    std::filesystem::path corpus;  // JSONL of {response, options, expected}
    std::filesystem::path templates_dir;
    std::optional<std::filesystem::path> registry;  // needed for fallback cases
    std::optional<std::filesystem::path> cache_dir;
    std::string judge;
};

struct ReportArgs {
    std::filesystem::path report;
    std::optional<std::filesystem::path> baseline;
    bench::ReportFormat format = bench::ReportFormat::Markdown;
    std::optional<std::filesystem::path> output;  // default: stdout
};

// Runs the refinement loop over a manifest and writes the augmented
// dataset (plus per-sample trace files when trace_dir is set).
int cmd_distill(const DistillArgs& args, std::ostream& err,
                agents::AgentRuntime* runtime = nullptr);

// Evaluates a dataset against the target backend and writes a RunReport.
int cmd_evaluate(const EvaluateArgs& args, std::ostream& err,
                 agents::AgentRuntime* runtime = nullptr);

// Replays an extraction regression corpus, printing per-case results and
// routing statistics. Exit 0 iff every case matched its expectation.
int cmd_extract(const ExtractArgs& args, std::ostream& out, std::ostream& err,
                agents::AgentRuntime* runtime = nullptr);

// Renders a stored report (optionally against a baseline) as a table.
int cmd_report(const ReportArgs& args, std::ostream& out, std::ostream& err);

// Full argv interface used by the binary.
int run(int argc, const char* const* argv);

}  // namespace avrd::cli
