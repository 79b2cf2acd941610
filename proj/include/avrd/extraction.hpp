#pragma once

// Response parsing: structured reasoning-dictionary parsing, evaluator
// score parsing, judge verdict parsing, and the two-step choice extraction
// (label-pattern heuristics first, LLM fallback second).

#include <optional>
#include <string>
#include <vector>

#include "avrd/agents.hpp"
#include "avrd/core.hpp"
#include "avrd/prompts.hpp"

namespace avrd::extract {

// Parsed reasoning output plus audit data: which parsing path fired and any
// warnings (e.g. step answers dropped over a length mismatch).
struct ParsedTrace {
    ReasoningTrace trace;
    bool lenient = false;  // true when the heading-based fallback parsed it
    std::vector<std::string> warnings;
};

// Parses generator output. Strict path: a JSON dictionary with keys
// Task_1/Task_2/Task_3 (lists or strings), unwrapping fenced code blocks
// first. Lenient path: "Task 1:" / "Task 2:" / "Task 3:" section headings
// with numbered items. Throws ParseError when neither path yields
// non-empty steps and a final answer.
ParsedTrace parse_reasoning_output(const std::string& raw);

// First numeric token, floored to an integer, accepted iff in [1,10]
// ("8/10" forms take the 8). Throws ParseError otherwise.
int parse_score(const std::string& raw);

enum class Verdict { Correct, Incorrect };

// First case-insensitive occurrence of "correct"/"incorrect" wins, with
// "incorrect" checked first at each position (substring hazard). Throws
// ParseError when neither token appears.
Verdict parse_judge_verdict(const std::string& raw);

// Step 1: label-pattern matching. Returns label L iff the response matches
// exactly one of: bare "L", "L) ...", "L. ...", "L, ...", "(L) ..." — and
// the trailing text embeds no other option's text or label pattern. Returns
// nullopt (the routing signal for step 2) on zero or multiple candidate
// labels, or when the response opens with a clarification request.
std::optional<char> heuristic_extract(const std::string& response,
                                      const std::vector<Option>& options);

struct ChoiceExtraction {
    std::optional<char> label;  // nullopt = no match
    ExtractionPath path = ExtractionPath::Heuristic;
    std::vector<std::string> warnings;
};

// Two-step extraction: heuristic first; on none, renders the
// choice-extraction prompt and asks the judge backend, parsing a single
// uppercase A-E or the literal "No match found". Judge transport errors
// propagate; unparseable judge output and labels outside the option set
// degrade to no-match with a recorded warning.
ChoiceExtraction extract_choice(const std::string& response,
                                const std::string& question,
                                const std::vector<Option>& options,
                                agents::AgentRuntime& runtime,
                                const std::string& judge_backend_id,
                                const prompts::PromptLibrary& prompts);

}  // namespace avrd::extract
