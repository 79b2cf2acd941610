#pragma once

// Prompt rendering for every agent role. Templates are UTF-8 data files with
// {placeholder} markers, one file per role, loaded from a templates
// directory. Substitution is single-pass: placeholder values are never
// re-scanned, so braces inside values are inert.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "avrd/core.hpp"

namespace avrd::prompts {

// Rendered prompt text plus any non-fatal warnings recorded while rendering
// (e.g. a trace whose step answers were dropped by the parser).
struct RenderedPrompt {
    std::string text;
    std::vector<std::string> warnings;
};

// Template file name for a role, e.g. "reasoning_generation.txt".
const char* template_filename(Role role);

// Single-pass placeholder substitution. A '{' starting a [a-z_]+ name
// followed by '}' is a placeholder and must be present in values; anything
// else is literal text. Throws ConfigError on an unresolved placeholder.
std::string substitute(const std::string& body,
                       const std::map<std::string, std::string>& values);

// "1. first\n2. second" — the flat list serialization used to embed
// reasoning steps in prompts and queries.
std::string numbered_list(const std::vector<std::string>& items);

// "A. Green B. Red C. Yellow D. Black" — options as shown in the
// choice-extraction examples.
std::string options_line(const std::vector<Option>& options);

// Loads and renders the role templates. Stateless after load; safe for
// unrestricted concurrent use.
class PromptLibrary {
public:
    // Reads all role templates from dir. Throws ConfigError if the
    // directory or any template file is missing or unreadable.
    static PromptLibrary load(const std::filesystem::path& dir);

    // Actor prompt for the first iteration. Throws on empty question.
    std::string render_reasoning_prompt(const std::string& question) const;

    // Critic-side caption request. Embeds steps, step answers, and the
    // final answer; never attaches media. Records a warning when the trace
    // carries no step answers.
    RenderedPrompt render_summarization_prompt(const ReasoningTrace& trace,
                                               const std::string& question) const;

    // 1-to-10 scoring request for a caption. Throws on empty caption.
    std::string render_evaluation_prompt(const std::string& caption) const;

    // Actor prompt for iterations t >= 2: previous steps, question, and the
    // received score. Throws when score is outside [1,10].
    std::string render_feedback_prompt(const ReasoningTrace& prev_trace,
                                       const std::string& question,
                                       int score) const;

    // Fallback prompt mapping a free-form answer onto option labels.
    // Throws on empty options.
    std::string render_choice_extraction_prompt(const std::string& question,
                                                const std::vector<Option>& options,
                                                const std::string& response) const;

    // Correct/Incorrect judgment request for open-ended answers. Throws
    // when any of the three fields is empty.
    std::string render_open_ended_judge_prompt(const std::string& question,
                                               const std::string& model_answer,
                                               const std::string& ground_truth) const;

    // The query sent to the target model: selected reasoning steps as a
    // numbered list, then the question. Deterministic; throws on a trace
    // with no steps.
    std::string render_augmented_query(const std::string& question,
                                       const ReasoningTrace& trace) const;

    // Raw template body for a role (for tests and audits).
    const std::string& body(Role role) const;

private:
    std::map<Role, std::string> bodies_;
};

}  // namespace avrd::prompts
