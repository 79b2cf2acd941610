#include "avrd/bench_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "avrd/errors.hpp"
#include "avrd/metrics.hpp"

namespace avrd::bench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

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

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

json parse_line(const std::string& line, std::size_t line_no) {
    try {
        return json::parse(line);
    } catch (const json::exception& e) {
        throw ParseError("line " + std::to_string(line_no) + ": malformed JSON (" +
                         e.what() + ")");
    }
}

// Augmented-extension fields of one manifest record. Type problems are
// parse errors; value problems are collected by the caller.
void read_augmented_fields(const json& j, ManifestEntry& entry, std::size_t line_no) {
    auto fail = [&](const std::string& msg) {
        throw ParseError("line " + std::to_string(line_no) + ": " + msg);
    };
    if (j.contains("reasoning_steps") && !j.at("reasoning_steps").is_null()) {
        if (!j.at("reasoning_steps").is_array()) fail("reasoning_steps must be an array");
        try {
            entry.reasoning_steps = j.at("reasoning_steps").get<std::vector<std::string>>();
        } catch (const json::exception&) {
            fail("reasoning_steps must be an array of strings");
        }
    }
    if (j.contains("reasoning_score") && !j.at("reasoning_score").is_null()) {
        if (!j.at("reasoning_score").is_number_integer()) {
            fail("reasoning_score must be an integer");
        }
        entry.reasoning_score = j.at("reasoning_score").get<int>();
    }
    if (j.contains("stop_reason") && !j.at("stop_reason").is_null()) {
        if (!j.at("stop_reason").is_string()) fail("stop_reason must be a string");
        const std::string text = j.at("stop_reason").get<std::string>();
        auto reason = stop_reason_from_string(text);
        if (!reason) fail("unknown stop_reason '" + text + "'");
        entry.stop_reason = *reason;
    }
    if (j.contains("iterations_used") && !j.at("iterations_used").is_null()) {
        if (!j.at("iterations_used").is_number_integer()) {
            fail("iterations_used must be an integer");
        }
        entry.iterations_used = j.at("iterations_used").get<int>();
    }
}

json entry_to_json(const ManifestEntry& entry) {
    json j = entry.sample;
    if (entry.reasoning_steps) j["reasoning_steps"] = *entry.reasoning_steps;
    if (entry.reasoning_score) j["reasoning_score"] = *entry.reasoning_score;
    if (entry.stop_reason) j["stop_reason"] = to_string(*entry.stop_reason);
    if (entry.iterations_used) j["iterations_used"] = *entry.iterations_used;
    return j;
}

// One decimal on the conventional table scale: fractions and [0,1] caption
// metrics x100; CIDEr-D values are already x10-scaled, so x10 more.
std::string display_value(double value, bool cider_scale) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.1f", value * (cider_scale ? 10.0 : 100.0));
    return buffer;
}

std::string gain_annotation(double value, double baseline_mean) {
    if (baseline_mean <= 0.0) return "n/a";
    return metrics::relative_gain(value, baseline_mean);
}

// Canonical row order: closed task vocabulary first, anything else after it
// in lexical order (stored reports are not trusted to stay in range).
std::vector<std::size_t> row_order(const std::vector<TaskMetrics>& tasks) {
    const auto& canon = known_tasks();
    auto rank = [&](const std::string& task) {
        auto it = std::find(canon.begin(), canon.end(), task);
        return it == canon.end() ? canon.size() : static_cast<std::size_t>(it - canon.begin());
    };
    std::vector<std::size_t> order(tasks.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const std::size_t ra = rank(tasks[a].task);
        const std::size_t rb = rank(tasks[b].task);
        if (ra != rb) return ra < rb;
        return tasks[a].task < tasks[b].task;
    });
    return order;
}

void check_task_sets(const RunReport& report, const RunReport& baseline) {
    std::set<std::string> in_report;
    std::set<std::string> in_baseline;
    for (const auto& t : report.metrics.tasks) in_report.insert(t.task);
    for (const auto& t : baseline.metrics.tasks) in_baseline.insert(t.task);
    if (in_report == in_baseline) return;
    std::string only_report;
    std::string only_baseline;
    for (const auto& task : in_report) {
        if (!in_baseline.count(task)) only_report += (only_report.empty() ? "" : ", ") + task;
    }
    for (const auto& task : in_baseline) {
        if (!in_report.count(task)) only_baseline += (only_baseline.empty() ? "" : ", ") + task;
    }
    std::string msg = "task sets of report and baseline differ:";
    if (!only_report.empty()) msg += " only in report: {" + only_report + "}";
    if (!only_baseline.empty()) msg += " only in baseline: {" + only_baseline + "}";
    throw ValidationError(msg);
}

}  // namespace

std::vector<TaskBlock> Manifest::task_blocks() const {
    std::vector<TaskBlock> blocks;
    for (const std::string& task : known_tasks()) {
        TaskBlock block;
        block.task = task;
        std::set<std::string> categories;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (entries[i].sample.task != task) continue;
            block.entry_indices.push_back(i);
            if (!entries[i].sample.category.empty()) {
                categories.insert(entries[i].sample.category);
            }
        }
        if (block.entry_indices.empty()) continue;
        block.categories.assign(categories.begin(), categories.end());
        blocks.push_back(std::move(block));
    }
    return blocks;
}

Manifest load_manifest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open manifest '" + path.string() + "'");

    Manifest manifest;
    std::string line;
    std::size_t line_no = 0;

    // Header record.
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        break;
    }
    if (line_no == 0 || line.find_first_not_of(" \t") == std::string::npos) {
        throw ParseError("line 1: missing manifest header record");
    }
    const json header = parse_line(line, line_no);
    if (!header.is_object() || !header.contains("schema_version")) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": first record must be a header carrying schema_version");
    }
    if (!header.at("schema_version").is_number_integer() ||
        header.at("schema_version").get<int>() != kManifestSchemaVersion) {
        throw ParseError("line " + std::to_string(line_no) + ": unsupported schema_version " +
                         header.at("schema_version").dump() + " (expected " +
                         std::to_string(kManifestSchemaVersion) + ")");
    }
    manifest.schema_version = header.at("schema_version").get<int>();
    if (header.contains("augmented")) {
        if (!header.at("augmented").is_boolean()) {
            throw ParseError("line " + std::to_string(line_no) +
                             ": header field 'augmented' must be a boolean");
        }
        manifest.augmented = header.at("augmented").get<bool>();
    }
    if (header.contains("distill")) manifest.distill_params = header.at("distill");

    // Records — parse them all, then report every validation violation at once.
    std::vector<std::string> violations;
    std::map<std::string, std::size_t> first_line_of_id;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const json record = parse_line(line, line_no);
        ManifestEntry entry;
        try {
            entry.sample = record.get<Sample>();
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
        read_augmented_fields(record, entry, line_no);

        const std::string where =
            "line " + std::to_string(line_no) + " (id '" + entry.sample.id + "'): ";
        auto [it, inserted] = first_line_of_id.emplace(entry.sample.id, line_no);
        if (!inserted) {
            violations.push_back(where + "duplicate sample id (first seen on line " +
                                 std::to_string(it->second) + ")");
        }
        for (const std::string& problem : validate_sample(entry.sample)) {
            violations.push_back(where + problem);
        }
        if (entry.reasoning_score && (*entry.reasoning_score < 1 || *entry.reasoning_score > 10)) {
            violations.push_back(where + "reasoning_score must be in [1,10], got " +
                                 std::to_string(*entry.reasoning_score));
        }
        if (entry.iterations_used && *entry.iterations_used < 1) {
            violations.push_back(where + "iterations_used must be at least 1, got " +
                                 std::to_string(*entry.iterations_used));
        }
        manifest.entries.push_back(std::move(entry));
    }

    if (!violations.empty()) {
        std::string msg = "manifest '" + path.string() + "' failed validation:";
        for (const std::string& v : violations) msg += "\n  - " + v;
        throw ValidationError(msg);
    }
    return manifest;
}

void write_manifest(const Manifest& manifest, const fs::path& path) {
    std::ostringstream out;
    json header;
    header["schema_version"] = manifest.schema_version;
    if (manifest.augmented) header["augmented"] = true;
    if (!manifest.distill_params.is_null()) header["distill"] = manifest.distill_params;
    out << header.dump() << "\n";
    for (const ManifestEntry& entry : manifest.entries) {
        out << entry_to_json(entry).dump() << "\n";
    }
    write_text_atomic(path, out.str());
}

void write_augmented_dataset(const std::vector<distill::DistillResult>& results,
                             const DistillConfig& config, const fs::path& path) {
    Manifest manifest;
    manifest.augmented = true;
    manifest.distill_params = json{
        {"max_iterations", config.max_iterations},
        {"threshold", config.threshold},
        {"generation_temperature", config.generation_temperature},
        {"summarization_temperature", config.summarization_temperature},
    };
    for (const distill::DistillResult& result : results) {
        if (!result.augmented || !result.outcome.best) continue;
        const IterationRecord& chosen = result.outcome.iterations[*result.outcome.best];
        ManifestEntry entry;
        entry.sample = result.augmented->sample;
        entry.reasoning_steps = result.augmented->trace.steps;
        entry.reasoning_score = chosen.score;
        entry.stop_reason = result.outcome.stop_reason;
        entry.iterations_used = static_cast<int>(result.outcome.iterations.size());
        manifest.entries.push_back(std::move(entry));
    }
    write_manifest(manifest, path);
}

TaskStats task_stats(const Manifest& manifest) {
    TaskStats stats;
    for (const ManifestEntry& entry : manifest.entries) {
        ++stats.per_task[entry.sample.task];
        ++stats.per_category[entry.sample.category];
        ++stats.total;
    }
    return stats;
}

void to_json(json& j, const RunReport& v) {
    j = json{{"schema_version", v.schema_version},
             {"fingerprint", v.fingerprint},
             {"metrics", v.metrics}};
}

void from_json(const json& j, RunReport& v) {
    if (!j.is_object() || !j.contains("schema_version") || !j.contains("metrics")) {
        throw ParseError("report must carry schema_version and metrics");
    }
    if (!j.at("schema_version").is_number_integer() ||
        j.at("schema_version").get<int>() != kReportSchemaVersion) {
        throw ParseError("unsupported report schema_version " + j.at("schema_version").dump());
    }
    v.schema_version = j.at("schema_version").get<int>();
    v.fingerprint = j.value("fingerprint", json(nullptr));
    try {
        v.metrics = j.at("metrics").get<MetricReport>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed report metrics: ") + e.what());
    }
}

RunReport load_report(const fs::path& path) {
    const std::string text = read_text(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError("report '" + path.string() + "': malformed JSON (" + e.what() + ")");
    }
    try {
        return j.get<RunReport>();
    } catch (const ParseError& e) {
        throw ParseError("report '" + path.string() + "': " + e.what());
    }
}

void save_report(const RunReport& report, const fs::path& path) {
    const json j = report;
    write_text_atomic(path, j.dump(2) + "\n");
}

std::string render_report(const RunReport& report, const std::optional<RunReport>& baseline,
                          ReportFormat format) {
    if (baseline) check_task_sets(report, *baseline);

    std::map<std::string, double> baseline_mean;
    if (baseline) {
        for (const TaskMetrics& t : baseline->metrics.tasks) baseline_mean[t.task] = t.mean;
    }

    const std::vector<std::size_t> order = row_order(report.metrics.tasks);
    std::ostringstream out;

    if (format == ReportFormat::Csv) {
        out << (baseline ? "task,best,mean,gain\n" : "task,best,mean\n");
        for (std::size_t idx : order) {
            const TaskMetrics& t = report.metrics.tasks[idx];
            const bool cider_scale = t.kind == "caption";
            out << t.task << ',' << display_value(t.best, cider_scale) << ','
                << display_value(t.mean, cider_scale);
            if (baseline) out << ',' << gain_annotation(t.best, baseline_mean.at(t.task));
            out << '\n';
        }
        return out.str();
    }

    out << "# Evaluation Report\n\n";
    out << "| Task | Best | Mean |\n";
    out << "| --- | --- | --- |\n";
    for (std::size_t idx : order) {
        const TaskMetrics& t = report.metrics.tasks[idx];
        const bool cider_scale = t.kind == "caption";
        std::string best_cell = display_value(t.best, cider_scale);
        std::string mean_cell = display_value(t.mean, cider_scale);
        if (baseline) {
            const double base = baseline_mean.at(t.task);
            best_cell += " (" + gain_annotation(t.best, base) + ")";
            mean_cell += " (" + gain_annotation(t.mean, base) + ")";
        }
        out << "| " << t.task << " | " << best_cell << " | " << mean_cell << " |\n";
    }

    bool any_caption = false;
    for (std::size_t idx : order) {
        const TaskMetrics& t = report.metrics.tasks[idx];
        if (t.kind == "caption" && t.caption_best && t.caption_mean) any_caption = true;
    }
    if (any_caption) {
        out << "\n## Caption Metrics\n\n";
        out << "| Task | Stat | BLEU@4 | METEOR-lite | ROUGE-L | CIDEr-D |\n";
        out << "| --- | --- | --- | --- | --- | --- |\n";
        for (std::size_t idx : order) {
            const TaskMetrics& t = report.metrics.tasks[idx];
            if (t.kind != "caption" || !t.caption_best || !t.caption_mean) continue;
            auto row = [&](const char* stat, const CaptionScores& s) {
                out << "| " << t.task << " | " << stat << " | " << display_value(s.bleu4, false)
                    << " | " << display_value(s.meteor, false) << " | "
                    << display_value(s.rouge_l, false) << " | " << display_value(s.cider, true)
                    << " |\n";
            };
            row("best", *t.caption_best);
            row("mean", *t.caption_mean);
        }
    }
    return out.str();
}

}  // namespace avrd::bench
