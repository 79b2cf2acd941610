#include "avrd/prompts.hpp"

#include <fstream>
#include <sstream>

#include "avrd/errors.hpp"

namespace avrd::prompts {

namespace {

// Roles that own a template file.
constexpr Role kTemplatedRoles[] = {
    Role::ReasoningGeneration, Role::Summarization,    Role::Evaluation,
    Role::Feedback,            Role::ChoiceExtraction, Role::OpenEndedJudge,
    Role::TargetAugmentation,
};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read template file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

bool is_placeholder_char(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

}  // namespace

const char* template_filename(Role role) {
    switch (role) {
        case Role::ReasoningGeneration: return "reasoning_generation.txt";
        case Role::Summarization: return "summarization.txt";
        case Role::Evaluation: return "evaluation.txt";
        case Role::Feedback: return "feedback.txt";
        case Role::ChoiceExtraction: return "choice_extraction.txt";
        case Role::OpenEndedJudge: return "open_ended_judge.txt";
        case Role::TargetAugmentation: return "target_augmentation.txt";
        case Role::Target: break;
    }
    throw ConfigError(std::string("role '") + to_string(role) + "' has no template");
}

std::string substitute(const std::string& body,
                       const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(body.size());
    std::size_t i = 0;
    while (i < body.size()) {
        char c = body[i];
        if (c == '{') {
            std::size_t j = i + 1;
            while (j < body.size() && is_placeholder_char(body[j])) ++j;
            if (j > i + 1 && j < body.size() && body[j] == '}') {
                std::string name = body.substr(i + 1, j - i - 1);
                auto it = values.find(name);
                if (it == values.end()) {
                    throw ConfigError("unresolved placeholder {" + name + "}");
                }
                out += it->second;  // single pass: the value is never re-scanned
                i = j + 1;
                continue;
            }
        }
        out.push_back(c);
        ++i;
    }
    return out;
}

std::string numbered_list(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out.push_back('\n');
        out += std::to_string(i + 1);
        out += ". ";
        out += items[i];
    }
    return out;
}

std::string options_line(const std::vector<Option>& options) {
    std::string out;
    for (std::size_t i = 0; i < options.size(); ++i) {
        if (i > 0) out.push_back(' ');
        out.push_back(options[i].label);
        out += ". ";
        out += options[i].text;
    }
    return out;
}

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw ConfigError("templates directory not found: " + dir.string());
    }
    PromptLibrary lib;
    for (Role role : kTemplatedRoles) {
        lib.bodies_[role] = read_file(dir / template_filename(role));
    }
    return lib;
}

const std::string& PromptLibrary::body(Role role) const {
    auto it = bodies_.find(role);
    if (it == bodies_.end()) {
        throw ConfigError(std::string("no template loaded for role '") +
                          to_string(role) + "'");
    }
    return it->second;
}

std::string PromptLibrary::render_reasoning_prompt(const std::string& question) const {
    if (question.empty()) {
        throw ValidationError("reasoning prompt needs a non-empty question");
    }
    return substitute(body(Role::ReasoningGeneration), {{"question", question}});
}

RenderedPrompt PromptLibrary::render_summarization_prompt(
    const ReasoningTrace& trace, const std::string& question) const {
    if (trace.steps.empty()) {
        throw ValidationError("summarization prompt needs a trace with steps");
    }
    RenderedPrompt out;
    if (trace.step_answers.empty()) {
        out.warnings.push_back("trace has no step answers; rendering steps only");
    }
    out.text = substitute(body(Role::Summarization),
                          {{"question", question},
                           {"reasoning_steps", numbered_list(trace.steps)},
                           {"step_answers", numbered_list(trace.step_answers)},
                           {"final_answer", trace.final_answer}});
    return out;
}

std::string PromptLibrary::render_evaluation_prompt(const std::string& caption) const {
    if (caption.empty()) {
        throw ValidationError("evaluation prompt needs a non-empty caption");
    }
    return substitute(body(Role::Evaluation), {{"caption", caption}});
}

std::string PromptLibrary::render_feedback_prompt(const ReasoningTrace& prev_trace,
                                                  const std::string& question,
                                                  int score) const {
    if (score < 1 || score > 10) {
        throw ValidationError("feedback score must be in [1,10], got " +
                              std::to_string(score));
    }
    if (prev_trace.steps.empty()) {
        throw ValidationError("feedback prompt needs the previous trace's steps");
    }
    return substitute(body(Role::Feedback),
                      {{"reasoning_steps", numbered_list(prev_trace.steps)},
                       {"question", question},
                       {"score", std::to_string(score)}});
}

std::string PromptLibrary::render_choice_extraction_prompt(
    const std::string& question, const std::vector<Option>& options,
    const std::string& response) const {
    if (options.empty()) {
        throw ValidationError("choice extraction needs a non-empty option set");
    }
    return substitute(body(Role::ChoiceExtraction),
                      {{"question", question},
                       {"options", options_line(options)},
                       {"response", response}});
}

std::string PromptLibrary::render_open_ended_judge_prompt(
    const std::string& question, const std::string& model_answer,
    const std::string& ground_truth) const {
    if (question.empty() || model_answer.empty() || ground_truth.empty()) {
        throw ValidationError(
            "judge prompt needs question, model answer, and ground truth");
    }
    return substitute(body(Role::OpenEndedJudge),
                      {{"question", question},
                       {"model_answer", model_answer},
                       {"ground_truth", ground_truth}});
}

std::string PromptLibrary::render_augmented_query(const std::string& question,
                                                  const ReasoningTrace& trace) const {
    if (trace.steps.empty()) {
        throw ValidationError("augmented query needs a trace with steps");
    }
    return substitute(body(Role::TargetAugmentation),
                      {{"reasoning_steps", numbered_list(trace.steps)},
                       {"question", question}});
}

}  // namespace avrd::prompts
