#include "avrd/extraction.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>

#include <nlohmann/json.hpp>

#include "avrd/errors.hpp"

namespace avrd::extract {

namespace {

using nlohmann::json;

std::string trim(const std::string& text) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    return text.substr(begin, end - begin);
}

std::string to_lower(const std::string& text) {
    std::string out = text;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)); }

// --- reasoning-trace parsing -----------------------------------------------

// Content of the first fenced code block, skipping the language tag line.
std::optional<std::string> unwrap_fence(const std::string& raw) {
    std::size_t open = raw.find("```");
    if (open == std::string::npos) return std::nullopt;
    std::size_t content_start = raw.find('\n', open);
    if (content_start == std::string::npos) return std::nullopt;
    ++content_start;
    std::size_t close = raw.find("```", content_start);
    if (close == std::string::npos) return std::nullopt;
    return raw.substr(content_start, close - content_start);
}

// Splits "1. first 2. second" (inline or one per line) into items by
// scanning for ascending numeric markers at word boundaries. Text without a
// leading "1." marker comes back as a single trimmed item.
std::vector<std::string> split_numbered(const std::string& text) {
    auto find_marker = [&text](int k, std::size_t from)
        -> std::pair<std::size_t, std::size_t> {  // (marker pos, content pos)
        std::string num = std::to_string(k);
        std::size_t pos = from;
        while ((pos = text.find(num, pos)) != std::string::npos) {
            bool boundary_before = pos == 0 || is_space(text[pos - 1]);
            std::size_t after = pos + num.size();
            bool marker_punct =
                after < text.size() && (text[after] == '.' || text[after] == ')');
            bool boundary_after =
                marker_punct && (after + 1 >= text.size() || is_space(text[after + 1]));
            if (boundary_before && boundary_after) return {pos, after + 1};
            ++pos;
        }
        return {std::string::npos, std::string::npos};
    };

    std::vector<std::pair<std::size_t, std::size_t>> markers;
    std::size_t from = 0;
    for (int k = 1;; ++k) {
        auto [pos, content] = find_marker(k, from);
        if (pos == std::string::npos) break;
        markers.emplace_back(pos, content);
        from = content;
    }

    std::vector<std::string> items;
    if (markers.empty()) {
        std::string whole = trim(text);
        if (!whole.empty()) items.push_back(whole);
        return items;
    }
    for (std::size_t i = 0; i < markers.size(); ++i) {
        std::size_t end = i + 1 < markers.size() ? markers[i + 1].first : text.size();
        std::string item = trim(text.substr(markers[i].second, end - markers[i].second));
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

std::string json_to_text(const json& value) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_array()) {
        std::string out;
        for (const json& el : value) {
            if (!out.empty()) out.push_back(' ');
            out += el.is_string() ? el.get<std::string>() : el.dump();
        }
        return out;
    }
    return value.dump();
}

std::vector<std::string> json_to_items(const json& value) {
    if (value.is_array()) {
        std::vector<std::string> items;
        for (const json& el : value) {
            std::string text = trim(el.is_string() ? el.get<std::string>() : el.dump());
            if (!text.empty()) items.push_back(text);
        }
        return items;
    }
    if (value.is_string()) return split_numbered(value.get<std::string>());
    std::string text = trim(value.dump());
    if (text.empty()) return {};
    return {text};
}

// step_answers either aligns 1:1 with steps or is dropped with a warning;
// downstream consumers rely on that invariant.
void enforce_answer_alignment(ParsedTrace& parsed) {
    auto& trace = parsed.trace;
    if (!trace.step_answers.empty() &&
        trace.step_answers.size() != trace.steps.size()) {
        parsed.warnings.push_back(
            "step answer count (" + std::to_string(trace.step_answers.size()) +
            ") does not match step count (" + std::to_string(trace.steps.size()) +
            "); dropping step answers");
        trace.step_answers.clear();
    }
}

const json* find_task_key(const json& obj, int k) {
    const std::string num = std::to_string(k);
    for (const std::string& name :
         {"Task_" + num, "Task " + num, "task_" + num, "task " + num, "TASK_" + num}) {
        if (obj.contains(name)) return &obj.at(name);
    }
    return nullptr;
}

std::optional<json> parse_json_object(const std::string& text) {
    json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (!j.is_discarded() && j.is_object()) return j;
    // Models often wrap the dictionary in prose; retry on the brace span.
    std::size_t lb = text.find('{');
    std::size_t rb = text.rfind('}');
    if (lb != std::string::npos && rb != std::string::npos && rb > lb) {
        j = json::parse(text.substr(lb, rb - lb + 1), nullptr, false);
        if (!j.is_discarded() && j.is_object()) return j;
    }
    return std::nullopt;
}

// Strict path: a JSON dictionary carrying Task_1/Task_2/Task_3.
std::optional<ParsedTrace> parse_strict(const std::string& text) {
    auto obj = parse_json_object(text);
    if (!obj) return std::nullopt;
    const json* t1 = find_task_key(*obj, 1);
    const json* t3 = find_task_key(*obj, 3);
    if (!t1 || !t3) return std::nullopt;

    ParsedTrace out;
    out.trace.steps = json_to_items(*t1);
    out.trace.final_answer = trim(json_to_text(*t3));
    if (const json* t2 = find_task_key(*obj, 2)) {
        out.trace.step_answers = json_to_items(*t2);
    } else {
        out.warnings.push_back("no Task_2 key; step answers empty");
    }
    if (out.trace.steps.empty() || out.trace.final_answer.empty()) return std::nullopt;
    enforce_answer_alignment(out);
    return out;
}

// Lenient path: "Task 1:" / "Task 2:" / "Task 3:" section headings.
std::optional<ParsedTrace> parse_lenient(const std::string& text) {
    struct Heading {
        int k;
        std::size_t pos;            // heading start
        std::size_t content_start;  // first char after the heading marker
    };
    std::vector<Heading> headings;
    const std::string lower = to_lower(text);
    std::size_t i = 0;
    while ((i = lower.find("task", i)) != std::string::npos) {
        bool boundary = i == 0 || is_space(text[i - 1]) || text[i - 1] == '*';
        std::size_t j = i + 4;
        while (j < text.size() && (text[j] == ' ' || text[j] == '_')) ++j;
        if (boundary && j < text.size() && text[j] >= '1' && text[j] <= '3') {
            int k = text[j] - '0';
            ++j;
            while (j < text.size() && text[j] == ' ') ++j;
            if (j < text.size() && (text[j] == ':' || text[j] == '.' || text[j] == '-')) {
                ++j;
            }
            headings.push_back({k, i, j});
            i = j;
            continue;
        }
        i += 4;
    }
    if (headings.empty()) return std::nullopt;

    std::string sections[4];
    for (std::size_t h = 0; h < headings.size(); ++h) {
        std::size_t end = h + 1 < headings.size() ? headings[h + 1].pos : text.size();
        int k = headings[h].k;
        if (sections[k].empty()) {
            sections[k] = text.substr(headings[h].content_start,
                                      end - headings[h].content_start);
        }
    }

    ParsedTrace out;
    out.lenient = true;
    out.trace.steps = split_numbered(sections[1]);
    out.trace.step_answers = split_numbered(sections[2]);
    out.trace.final_answer = trim(sections[3]);
    if (out.trace.step_answers.empty()) {
        out.warnings.push_back("no Task 2 section; step answers empty");
    }
    if (out.trace.steps.empty() || out.trace.final_answer.empty()) return std::nullopt;
    enforce_answer_alignment(out);
    return out;
}

// --- choice extraction ------------------------------------------------------

const char* kClarificationPrefixes[] = {
    "apologies",          "i'm sorry",
    "i am sorry",         "sorry",
    "can you clarify",    "can you please clarify",
    "could you clarify",  "could you please clarify",
    "please clarify",
};

bool is_clarification(const std::string& trimmed) {
    std::string lower = to_lower(trimmed);
    for (const char* prefix : kClarificationPrefixes) {
        if (lower.rfind(prefix, 0) == 0) return true;
    }
    return false;
}

bool has_option_label(const std::vector<Option>& options, char label) {
    for (const Option& opt : options) {
        if (opt.label == label) return true;
    }
    return false;
}

bool is_pattern_separator(char c) { return c == ')' || c == '.' || c == ','; }

// True when the tail contains a label pattern for any option other than
// `chosen`: the label char at a word boundary followed by ')' '.' ',' or
// the end of a word. Plain words starting with an option letter ("A dog")
// do not qualify.
bool tail_has_other_label_pattern(const std::string& tail,
                                  const std::vector<Option>& options, char chosen) {
    for (std::size_t i = 0; i < tail.size(); ++i) {
        char c = tail[i];
        if (c == chosen || !has_option_label(options, c)) continue;
        bool boundary_before = i == 0 || is_space(tail[i - 1]) || tail[i - 1] == '(';
        if (!boundary_before) continue;
        std::size_t after = i + 1;
        if (after >= tail.size()) return true;  // bare label at the very end
        if (is_pattern_separator(tail[after]) &&
            (after + 1 >= tail.size() || is_space(tail[after + 1]))) {
            return true;
        }
        if (i > 0 && tail[i - 1] == '(' && tail[after] == ')') return true;
    }
    return false;
}

// True when the tail quotes another option's text (case-insensitive).
bool tail_embeds_other_option_text(const std::string& tail,
                                   const std::vector<Option>& options, char chosen) {
    std::string lower_tail = to_lower(tail);
    for (const Option& opt : options) {
        if (opt.label == chosen || opt.text.empty()) continue;
        if (lower_tail.find(to_lower(opt.text)) != std::string::npos) return true;
    }
    return false;
}

}  // namespace

ParsedTrace parse_reasoning_output(const std::string& raw) {
    std::optional<std::string> unwrapped = unwrap_fence(raw);
    const std::string& primary = unwrapped ? *unwrapped : raw;

    if (auto strict = parse_strict(primary)) return *strict;
    if (unwrapped) {
        // Fenced content failed; the dictionary may sit outside the fence.
        if (auto strict = parse_strict(raw)) return *strict;
    }
    if (auto lenient = parse_lenient(primary)) return *lenient;
    if (unwrapped) {
        if (auto lenient = parse_lenient(raw)) return *lenient;
    }
    throw ParseError("malformed reasoning trace: neither the Task_1/Task_2/Task_3 "
                     "dictionary nor Task headings found in: " +
                     trim(raw).substr(0, 120));
}

int parse_score(const std::string& raw) {
    std::size_t i = 0;
    while (i < raw.size() && !std::isdigit(static_cast<unsigned char>(raw[i]))) ++i;
    if (i == raw.size()) {
        throw ParseError("unparseable score (no numeric token): " + trim(raw).substr(0, 80));
    }
    std::size_t end = i;
    while (end < raw.size() && std::isdigit(static_cast<unsigned char>(raw[end]))) ++end;
    if (end < raw.size() && raw[end] == '.' && end + 1 < raw.size() &&
        std::isdigit(static_cast<unsigned char>(raw[end + 1]))) {
        ++end;
        while (end < raw.size() && std::isdigit(static_cast<unsigned char>(raw[end]))) ++end;
    }
    double value = std::strtod(raw.substr(i, end - i).c_str(), nullptr);
    int score = static_cast<int>(std::floor(value));
    if (score < 1 || score > 10) {
        throw ParseError("score out of range [1,10]: " + raw.substr(i, end - i));
    }
    return score;
}

Verdict parse_judge_verdict(const std::string& raw) {
    std::string lower = to_lower(raw);
    for (std::size_t i = 0; i < lower.size(); ++i) {
        // "incorrect" first: "correct" is its substring.
        if (lower.compare(i, 9, "incorrect") == 0) return Verdict::Incorrect;
        if (lower.compare(i, 7, "correct") == 0) return Verdict::Correct;
    }
    throw ParseError("unparseable judge verdict: " + trim(raw).substr(0, 80));
}

std::optional<char> heuristic_extract(const std::string& response,
                                      const std::vector<Option>& options) {
    std::string text = trim(response);
    if (text.empty()) return std::nullopt;
    if (is_clarification(text)) return std::nullopt;

    char label = 0;
    std::string tail;

    if (text.size() >= 3 && text[0] == '(' && text[2] == ')' &&
        has_option_label(options, text[1])) {
        // "(A) Green"
        label = text[1];
        tail = trim(text.substr(3));
    } else if (has_option_label(options, text[0])) {
        if (text.size() == 1) {
            label = text[0];  // bare "A"
        } else if (is_pattern_separator(text[1]) &&
                   (text.size() == 2 || is_space(text[2]))) {
            // "A) ...", "A. ...", "A, ..." and the bare "B." form
            label = text[0];
            tail = trim(text.substr(2));
        }
    }
    if (label == 0) return std::nullopt;

    if (tail_has_other_label_pattern(tail, options, label)) return std::nullopt;
    if (tail_embeds_other_option_text(tail, options, label)) return std::nullopt;
    return label;
}

ChoiceExtraction extract_choice(const std::string& response, const std::string& question,
                                const std::vector<Option>& options,
                                agents::AgentRuntime& runtime,
                                const std::string& judge_backend_id,
                                const prompts::PromptLibrary& prompts) {
    if (options.empty()) {
        throw ValidationError("choice extraction needs a non-empty option set");
    }

    ChoiceExtraction result;
    if (auto label = heuristic_extract(response, options)) {
        result.label = label;
        result.path = ExtractionPath::Heuristic;
        return result;
    }

    result.path = ExtractionPath::LlmFallback;
    agents::AgentRequest req;
    req.backend_id = judge_backend_id;
    req.role = Role::ChoiceExtraction;
    req.prompt = prompts.render_choice_extraction_prompt(question, options, response);
    req.temperature = 0.0;  // deterministic judging
    agents::AgentResponse resp = runtime.invoke(req);  // transport errors propagate

    std::string verdict = trim(resp.text);
    if (to_lower(verdict).rfind("no match found", 0) == 0) {
        return result;  // no label, clean no-match
    }
    // Accept a single uppercase A-E, tolerating one trailing punctuation mark.
    std::string stripped = verdict;
    if (stripped.size() == 2 && is_pattern_separator(stripped[1])) {
        stripped.resize(1);
    }
    if (stripped.size() == 1 && stripped[0] >= kMinLabel && stripped[0] <= kMaxLabel) {
        if (has_option_label(options, stripped[0])) {
            result.label = stripped[0];
        } else {
            result.warnings.push_back(std::string("judge label '") + stripped[0] +
                                      "' outside the option set; treating as no match");
        }
        return result;
    }
    result.warnings.push_back("unparseable judge output; treating as no match: " +
                              verdict.substr(0, 80));
    return result;
}

}  // namespace avrd::extract
