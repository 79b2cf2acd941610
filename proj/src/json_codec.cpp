#include "avrd/json_codec.hpp"

#include "avrd/errors.hpp"

namespace avrd {

using nlohmann::json;

namespace {

// Field-level parse errors should name the field, not surface as opaque
// nlohmann exceptions.
template <typename T>
T require(const json& j, const char* key) {
    if (!j.contains(key)) {
        throw ParseError(std::string("missing required field '") + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ParseError(std::string("field '") + key + "' has the wrong type");
    }
}

template <typename T>
T optional_field(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ParseError(std::string("field '") + key + "' has the wrong type");
    }
}

}  // namespace

void to_json(json& j, const Option& v) {
    j = json{{"label", std::string(1, v.label)}, {"text", v.text}};
}

void from_json(const json& j, Option& v) {
    std::string label = require<std::string>(j, "label");
    if (label.size() != 1) {
        throw ParseError("option label must be a single character, got '" + label + "'");
    }
    v.label = label[0];
    v.text = optional_field<std::string>(j, "text", "");
}

void to_json(json& j, const Sample& v) {
    j = json{
        {"id", v.id},
        {"task", v.task},
        {"video", v.video_ref},
        {"audio", v.audio_ref},
        {"question", v.question},
        {"options", v.options},
        {"answer", v.ground_truth},
        {"references", v.references},
    };
    if (!v.category.empty()) j["category"] = v.category;
}

void from_json(const json& j, Sample& v) {
    v.id = require<std::string>(j, "id");
    v.task = require<std::string>(j, "task");
    v.video_ref = optional_field<std::string>(j, "video", "");
    v.audio_ref = optional_field<std::string>(j, "audio", "");
    v.question = optional_field<std::string>(j, "question", "");
    v.options = optional_field<std::vector<Option>>(j, "options", {});
    v.ground_truth = optional_field<std::string>(j, "answer", "");
    v.references = optional_field<std::vector<std::string>>(j, "references", {});
    v.category = optional_field<std::string>(j, "category", "");
}

void to_json(json& j, const ReasoningTrace& v) {
    j = json{{"steps", v.steps},
             {"step_answers", v.step_answers},
             {"final_answer", v.final_answer}};
}

void from_json(const json& j, ReasoningTrace& v) {
    v.steps = require<std::vector<std::string>>(j, "steps");
    v.step_answers = optional_field<std::vector<std::string>>(j, "step_answers", {});
    v.final_answer = optional_field<std::string>(j, "final_answer", "");
}

void to_json(json& j, const RawResponses& v) {
    j = json{{"generation", v.generation},
             {"summarization", v.summarization},
             {"evaluation", v.evaluation}};
}

void from_json(const json& j, RawResponses& v) {
    v.generation = optional_field<std::string>(j, "generation", "");
    v.summarization = optional_field<std::string>(j, "summarization", "");
    v.evaluation = optional_field<std::string>(j, "evaluation", "");
}

void to_json(json& j, const IterationRecord& v) {
    j = json{{"t", v.t},
             {"trace", v.trace},
             {"caption", v.caption},
             {"score", v.score},
             {"raw", v.raw}};
}

void from_json(const json& j, IterationRecord& v) {
    v.t = require<int>(j, "t");
    v.trace = require<ReasoningTrace>(j, "trace");
    v.caption = optional_field<std::string>(j, "caption", "");
    v.score = require<int>(j, "score");
    v.raw = optional_field<RawResponses>(j, "raw", {});
}

void to_json(json& j, const DistillOutcome& v) {
    j = json{{"sample_id", v.sample_id},
             {"iterations", v.iterations},
             {"stop_reason", to_string(v.stop_reason)},
             {"error", v.error}};
    j["best"] = v.best ? json(*v.best) : json(nullptr);
}

void from_json(const json& j, DistillOutcome& v) {
    v.sample_id = require<std::string>(j, "sample_id");
    v.iterations = optional_field<std::vector<IterationRecord>>(j, "iterations", {});
    std::string reason = require<std::string>(j, "stop_reason");
    auto parsed = stop_reason_from_string(reason);
    if (!parsed) throw ParseError("unknown stop_reason '" + reason + "'");
    v.stop_reason = *parsed;
    v.error = optional_field<std::string>(j, "error", "");
    if (j.contains("best") && !j.at("best").is_null()) {
        v.best = require<std::size_t>(j, "best");
    } else {
        v.best.reset();
    }
}

void to_json(json& j, const EvalRecord& v) {
    j = json{{"sample_id", v.sample_id},
             {"raw_response", v.raw_response},
             {"correct", v.correct},
             {"extraction_path", to_string(v.extraction_path)}};
    j["extracted"] = v.extracted ? json(*v.extracted) : json(nullptr);
}

void from_json(const json& j, EvalRecord& v) {
    v.sample_id = require<std::string>(j, "sample_id");
    v.raw_response = optional_field<std::string>(j, "raw_response", "");
    v.correct = require<bool>(j, "correct");
    std::string path = require<std::string>(j, "extraction_path");
    auto parsed = extraction_path_from_string(path);
    if (!parsed) throw ParseError("unknown extraction_path '" + path + "'");
    v.extraction_path = *parsed;
    if (j.contains("extracted") && !j.at("extracted").is_null()) {
        v.extracted = require<std::string>(j, "extracted");
    } else {
        v.extracted.reset();
    }
}

void to_json(json& j, const CaptionScores& v) {
    j = json{{"bleu4", v.bleu4},
             {"meteor_lite", v.meteor},
             {"rouge_l", v.rouge_l},
             {"cider", v.cider}};
}

void from_json(const json& j, CaptionScores& v) {
    v.bleu4 = require<double>(j, "bleu4");
    v.meteor = require<double>(j, "meteor_lite");
    v.rouge_l = require<double>(j, "rouge_l");
    v.cider = require<double>(j, "cider");
}

void to_json(json& j, const TaskMetrics& v) {
    j = json{{"task", v.task},
             {"kind", v.kind},
             {"runs", v.run_values},
             {"best", v.best},
             {"mean", v.mean}};
    if (!v.caption_runs.empty()) j["caption_runs"] = v.caption_runs;
    if (v.caption_best) j["caption_best"] = *v.caption_best;
    if (v.caption_mean) j["caption_mean"] = *v.caption_mean;
}

void from_json(const json& j, TaskMetrics& v) {
    v.task = require<std::string>(j, "task");
    v.kind = require<std::string>(j, "kind");
    v.run_values = require<std::vector<double>>(j, "runs");
    v.best = require<double>(j, "best");
    v.mean = require<double>(j, "mean");
    v.caption_runs = optional_field<std::vector<CaptionScores>>(j, "caption_runs", {});
    if (j.contains("caption_best") && !j.at("caption_best").is_null()) {
        v.caption_best = require<CaptionScores>(j, "caption_best");
    } else {
        v.caption_best.reset();
    }
    if (j.contains("caption_mean") && !j.at("caption_mean").is_null()) {
        v.caption_mean = require<CaptionScores>(j, "caption_mean");
    } else {
        v.caption_mean.reset();
    }
}

void to_json(json& j, const MetricReport& v) {
    j = json{{"tasks", v.tasks}};
    if (!v.gains.empty()) j["gains"] = v.gains;
}

void from_json(const json& j, MetricReport& v) {
    v.tasks = optional_field<std::vector<TaskMetrics>>(j, "tasks", {});
    v.gains = optional_field<std::map<std::string, std::string>>(j, "gains", {});
}

}  // namespace avrd
