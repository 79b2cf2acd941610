#pragma once

// JSON serialization for the core domain types (nlohmann ADL hooks), shared
// by datasets, trace files, and reports. Round trip is lossless: reading
// back a serialized value yields a structurally equal value.

#include <nlohmann/json.hpp>

#include "avrd/core.hpp"

namespace avrd {

void to_json(nlohmann::json& j, const Option& v);
void from_json(const nlohmann::json& j, Option& v);
void to_json(nlohmann::json& j, const Sample& v);
void from_json(const nlohmann::json& j, Sample& v);
void to_json(nlohmann::json& j, const ReasoningTrace& v);
void from_json(const nlohmann::json& j, ReasoningTrace& v);
void to_json(nlohmann::json& j, const RawResponses& v);
void from_json(const nlohmann::json& j, RawResponses& v);
void to_json(nlohmann::json& j, const IterationRecord& v);
void from_json(const nlohmann::json& j, IterationRecord& v);
void to_json(nlohmann::json& j, const DistillOutcome& v);
void from_json(const nlohmann::json& j, DistillOutcome& v);
void to_json(nlohmann::json& j, const EvalRecord& v);
void from_json(const nlohmann::json& j, EvalRecord& v);
void to_json(nlohmann::json& j, const CaptionScores& v);
void from_json(const nlohmann::json& j, CaptionScores& v);
void to_json(nlohmann::json& j, const TaskMetrics& v);
void from_json(const nlohmann::json& j, TaskMetrics& v);
void to_json(nlohmann::json& j, const MetricReport& v);
void from_json(const nlohmann::json& j, MetricReport& v);

}  // namespace avrd
