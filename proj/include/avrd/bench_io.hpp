#pragma once

// Dataset manifest ingestion (JSONL with a one-line header record),
// augmented-dataset persistence, report storage, and table rendering.
// Every persisted file is written to a temp file then renamed, so readers
// never observe partial output.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "avrd/core.hpp"
#include "avrd/distiller.hpp"
#include "avrd/json_codec.hpp"

namespace avrd::bench {

inline constexpr int kManifestSchemaVersion = 1;
inline constexpr int kReportSchemaVersion = 1;

// One manifest record: a sample, plus the reasoning fields present in
// augmented datasets.
struct ManifestEntry {
    Sample sample;
    std::optional<std::vector<std::string>> reasoning_steps;
    std::optional<int> reasoning_score;
    std::optional<StopReason> stop_reason;
    std::optional<int> iterations_used;

    bool augmented() const { return reasoning_steps.has_value(); }
    bool operator==(const ManifestEntry&) const = default;
};

// Grouped view over a manifest: one block per task id, in canonical task
// order, with the category tags seen in that task.
struct TaskBlock {
    std::string task;
    std::vector<std::string> categories;      // sorted, unique, non-empty tags
    std::vector<std::size_t> entry_indices;   // into Manifest::entries
};

struct Manifest {
    int schema_version = kManifestSchemaVersion;
    bool augmented = false;
    nlohmann::json distill_params;  // loop settings recorded at distill time
    std::vector<ManifestEntry> entries;

    std::vector<TaskBlock> task_blocks() const;
    bool operator==(const Manifest&) const = default;
};

// Loads and fully validates a manifest. Throws ParseError (malformed JSONL
// or header, with 1-based line numbers) or ValidationError (duplicate ids,
// unknown tasks, per-sample invariant violations — all collected and
// reported together with sample ids and line numbers).
Manifest load_manifest(const std::filesystem::path& path);

// Writes the manifest back as JSONL (header first). Atomic. Throws IoError.
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

// Persists distillation results as an augmented dataset: one JSONL record
// per sample that completed at least one iteration, in input order, each
// carrying the original fields plus reasoning_steps, reasoning_score,
// stop_reason, and iterations_used. The header records the loop config.
// Atomic; throws IoError.
void write_augmented_dataset(const std::vector<distill::DistillResult>& results,
                             const DistillConfig& config,
                             const std::filesystem::path& path);

struct TaskStats {
    std::map<std::string, std::size_t> per_task;
    std::map<std::string, std::size_t> per_category;  // "" = untagged
    std::size_t total = 0;
};

// Sample counts grouped by task and by question category; totals equal the
// manifest's sample count.
TaskStats task_stats(const Manifest& manifest);

// A stored evaluation result: the config fingerprint that produced it plus
// per-task metrics. Fingerprints make baseline/treatment pairs auditable.
struct RunReport {
    int schema_version = kReportSchemaVersion;
    nlohmann::json fingerprint;
    MetricReport metrics;

    bool operator==(const RunReport&) const = default;
};

void to_json(nlohmann::json& j, const RunReport& v);
void from_json(const nlohmann::json& j, RunReport& v);

RunReport load_report(const std::filesystem::path& path);
void save_report(const RunReport& report, const std::filesystem::path& path);

enum class ReportFormat { Markdown, Csv };

// Renders the per-task table. Values are shown x100 with one decimal. With
// a baseline, each value cell is annotated with relative_gain against the
// baseline's mean (there is no second formatting path); a baseline mean of
// zero renders the placeholder "n/a". Throws ValidationError when the task
// sets differ, listing the symmetric difference. Output is byte-identical
// for identical inputs.
std::string render_report(const RunReport& report,
                          const std::optional<RunReport>& baseline,
                          ReportFormat format);

}  // namespace avrd::bench
