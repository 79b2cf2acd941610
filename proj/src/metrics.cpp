#include "avrd/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "avrd/errors.hpp"

namespace avrd::metrics {

namespace {

using Tokens = std::vector<std::string>;

// n-grams keyed as tokens joined with an unprintable separator.
std::string ngram_key(const Tokens& tokens, std::size_t start, std::size_t n) {
    std::string key;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) key.push_back('\x1f');
        key += tokens[start + i];
    }
    return key;
}

std::map<std::string, int> ngram_counts(const Tokens& tokens, std::size_t n) {
    std::map<std::string, int> counts;
    if (tokens.size() >= n) {
        for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
            ++counts[ngram_key(tokens, i, n)];
        }
    }
    return counts;
}

void require_references(const std::vector<Tokens>& refs) {
    if (refs.empty()) {
        throw ValidationError("caption metrics need at least one reference");
    }
}

std::vector<Tokens> tokenize_all(const std::vector<std::string>& texts) {
    std::vector<Tokens> out;
    out.reserve(texts.size());
    for (const std::string& t : texts) out.push_back(tokenize(t));
    return out;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
    Tokens tokens;
    std::string current;
    for (char raw : text) {
        unsigned char c = static_cast<unsigned char>(raw);
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::string stem_token(const std::string& word) {
    std::string w = word;
    auto ends_with = [&w](const char* suffix) {
        std::size_t n = std::char_traits<char>::length(suffix);
        return w.size() >= n && w.compare(w.size() - n, n, suffix) == 0;
    };
    if (w.size() <= 3) return w;

    // Plural reduction.
    if (ends_with("sses")) {
        w.resize(w.size() - 2);  // sses -> ss
    } else if (ends_with("ies")) {
        w.resize(w.size() - 2);  // ies -> i
    } else if (ends_with("s") && !ends_with("ss") && !ends_with("us")) {
        w.resize(w.size() - 1);
    }
    // Light suffix stripping, one rule at most.
    if (w.size() >= 6 && w.compare(w.size() - 3, 3, "ing") == 0) {
        w.resize(w.size() - 3);
    } else if (w.size() >= 5 && w.compare(w.size() - 2, 2, "ed") == 0) {
        w.resize(w.size() - 2);
    } else if (w.size() >= 5 && w.compare(w.size() - 2, 2, "ly") == 0) {
        w.resize(w.size() - 2);
    }
    return w;
}

double top1_accuracy(const std::vector<EvalRecord>& records,
                     std::vector<std::string>* warnings) {
    if (records.empty()) {
        if (warnings) {
            warnings->push_back("accuracy over an empty record set; reporting 0");
        }
        return 0.0;
    }
    std::size_t correct = 0;
    for (const EvalRecord& rec : records) {
        if (rec.correct) ++correct;  // no-match records are simply not correct
    }
    return static_cast<double>(correct) / static_cast<double>(records.size());
}

BestMean best_of_n(const std::vector<double>& run_values) {
    if (run_values.empty()) {
        throw ValidationError("best_of_n needs at least one run value");
    }
    BestMean out;
    out.best = *std::max_element(run_values.begin(), run_values.end());
    double sum = 0.0;
    for (double v : run_values) sum += v;
    out.mean = sum / static_cast<double>(run_values.size());
    return out;
}

double bleu4(const std::vector<std::string>& candidate_tokens,
             const std::vector<Tokens>& reference_tokens) {
    require_references(reference_tokens);
    const std::size_t cand_len = candidate_tokens.size();
    if (cand_len == 0) return 0.0;

    double log_precision_sum = 0.0;
    for (std::size_t n = 1; n <= 4; ++n) {
        if (cand_len < n) return 0.0;  // no n-grams at all -> zero precision
        auto cand_counts = ngram_counts(candidate_tokens, n);
        std::map<std::string, int> max_ref_counts;
        for (const Tokens& ref : reference_tokens) {
            for (const auto& [gram, count] : ngram_counts(ref, n)) {
                int& best = max_ref_counts[gram];
                best = std::max(best, count);
            }
        }
        long long clipped = 0;
        long long total = 0;
        for (const auto& [gram, count] : cand_counts) {
            total += count;
            auto it = max_ref_counts.find(gram);
            if (it != max_ref_counts.end()) {
                clipped += std::min(count, it->second);
            }
        }
        if (clipped == 0) return 0.0;  // no smoothing
        log_precision_sum += std::log(static_cast<double>(clipped) /
                                      static_cast<double>(total));
    }

    // Brevity penalty against the closest reference length (ties -> shorter).
    std::size_t closest = reference_tokens.front().size();
    for (const Tokens& ref : reference_tokens) {
        std::size_t len = ref.size();
        auto distance = [&](std::size_t r) {
            return r > cand_len ? r - cand_len : cand_len - r;
        };
        if (distance(len) < distance(closest) ||
            (distance(len) == distance(closest) && len < closest)) {
            closest = len;
        }
    }
    double bp = cand_len >= closest
                    ? 1.0
                    : std::exp(1.0 - static_cast<double>(closest) /
                                         static_cast<double>(cand_len));
    return bp * std::exp(log_precision_sum / 4.0);
}

double bleu4(const std::string& candidate, const std::vector<std::string>& references) {
    return bleu4(tokenize(candidate), tokenize_all(references));
}

namespace {

// Two-stage greedy alignment in candidate order: exact matches first, then
// stem matches. Returns (matches, chunks).
std::pair<int, int> meteor_alignment(const Tokens& cand, const Tokens& ref) {
    const int n = static_cast<int>(cand.size());
    const int m = static_cast<int>(ref.size());
    std::vector<int> cand_to_ref(n, -1);
    std::vector<bool> ref_used(m, false);

    for (int i = 0; i < n; ++i) {  // stage 1: exact
        for (int j = 0; j < m; ++j) {
            if (!ref_used[j] && cand[i] == ref[j]) {
                cand_to_ref[i] = j;
                ref_used[j] = true;
                break;
            }
        }
    }
    for (int i = 0; i < n; ++i) {  // stage 2: stems
        if (cand_to_ref[i] != -1) continue;
        std::string cs = stem_token(cand[i]);
        for (int j = 0; j < m; ++j) {
            if (!ref_used[j] && cs == stem_token(ref[j])) {
                cand_to_ref[i] = j;
                ref_used[j] = true;
                break;
            }
        }
    }

    int matches = 0;
    int chunks = 0;
    int prev_ref = -2;
    for (int i = 0; i < n; ++i) {
        if (cand_to_ref[i] == -1) {
            prev_ref = -2;
            continue;
        }
        ++matches;
        if (cand_to_ref[i] != prev_ref + 1) ++chunks;
        prev_ref = cand_to_ref[i];
    }
    return {matches, chunks};
}

double meteor_single(const Tokens& cand, const Tokens& ref) {
    if (cand.empty() || ref.empty()) return 0.0;
    auto [matches, chunks] = meteor_alignment(cand, ref);
    if (matches == 0) return 0.0;
    double m = matches;
    double precision = m / static_cast<double>(cand.size());
    double recall = m / static_cast<double>(ref.size());
    double fmean = 10.0 * precision * recall / (recall + 9.0 * precision);
    double frag = static_cast<double>(chunks) / m;
    double penalty = 0.5 * frag * frag * frag;
    return fmean * (1.0 - penalty);
}

}  // namespace

double meteor_lite(const std::vector<std::string>& candidate_tokens,
                   const std::vector<Tokens>& reference_tokens) {
    require_references(reference_tokens);
    double best = 0.0;
    for (const Tokens& ref : reference_tokens) {
        best = std::max(best, meteor_single(candidate_tokens, ref));
    }
    return best;
}

double meteor_lite(const std::string& candidate, const std::vector<std::string>& references) {
    return meteor_lite(tokenize(candidate), tokenize_all(references));
}

namespace {

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0);
    std::vector<std::size_t> curr(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            curr[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                           : std::max(prev[j], curr[j - 1]);
        }
        std::swap(prev, curr);
    }
    return prev[b.size()];
}

}  // namespace

double rouge_l(const std::vector<std::string>& candidate_tokens,
               const std::vector<Tokens>& reference_tokens) {
    require_references(reference_tokens);
    double best = 0.0;
    for (const Tokens& ref : reference_tokens) {
        if (candidate_tokens.empty() || ref.empty()) continue;
        double lcs = static_cast<double>(lcs_length(candidate_tokens, ref));
        if (lcs == 0.0) continue;
        double precision = lcs / static_cast<double>(candidate_tokens.size());
        double recall = lcs / static_cast<double>(ref.size());
        best = std::max(best, 2.0 * precision * recall / (precision + recall));
    }
    return best;
}

double rouge_l(const std::string& candidate, const std::vector<std::string>& references) {
    return rouge_l(tokenize(candidate), tokenize_all(references));
}

CiderResult cider_d(const std::vector<CaptionItem>& corpus) {
    if (corpus.empty()) {
        throw ValidationError("cider_d needs a non-empty corpus");
    }
    constexpr std::size_t kMaxN = 4;
    constexpr double kSigma = 6.0;
    const double corpus_size = static_cast<double>(corpus.size());

    struct TokenizedItem {
        Tokens cand;
        std::vector<Tokens> refs;
    };
    std::vector<TokenizedItem> items;
    items.reserve(corpus.size());
    for (const CaptionItem& item : corpus) {
        require_references(tokenize_all(item.references));
        items.push_back({tokenize(item.candidate), tokenize_all(item.references)});
    }

    // Document frequency per n-gram: the number of corpus items whose
    // reference set mentions it.
    std::map<std::string, int> df[kMaxN];
    for (const TokenizedItem& item : items) {
        for (std::size_t n = 1; n <= kMaxN; ++n) {
            std::set<std::string> seen;
            for (const Tokens& ref : item.refs) {
                for (const auto& [gram, count] : ngram_counts(ref, n)) {
                    seen.insert(gram);
                }
            }
            for (const std::string& gram : seen) ++df[n - 1][gram];
        }
    }

    auto idf = [&](std::size_t n, const std::string& gram) {
        auto it = df[n - 1].find(gram);
        double freq = it == df[n - 1].end() ? 0.0 : static_cast<double>(it->second);
        return std::log(corpus_size / std::max(1.0, freq));
    };

    // TF-IDF vector (raw counts x IDF) plus its norm.
    auto weighted_vector = [&](const Tokens& tokens, std::size_t n) {
        std::map<std::string, double> vec;
        double norm_sq = 0.0;
        for (const auto& [gram, count] : ngram_counts(tokens, n)) {
            double w = static_cast<double>(count) * idf(n, gram);
            vec[gram] = w;
            norm_sq += w * w;
        }
        return std::make_pair(std::move(vec), std::sqrt(norm_sq));
    };

    CiderResult result;
    result.per_sample.reserve(items.size());
    double total = 0.0;
    for (const TokenizedItem& item : items) {
        double score_sum_over_n = 0.0;
        for (std::size_t n = 1; n <= kMaxN; ++n) {
            auto [cand_vec, cand_norm] = weighted_vector(item.cand, n);
            double ref_sum = 0.0;
            for (const Tokens& ref : item.refs) {
                auto [ref_vec, ref_norm] = weighted_vector(ref, n);
                if (cand_norm == 0.0 || ref_norm == 0.0) continue;
                // Clipped similarity: candidate counts are capped at the
                // reference's value before the dot product.
                double dot = 0.0;
                for (const auto& [gram, cw] : cand_vec) {
                    auto it = ref_vec.find(gram);
                    if (it != ref_vec.end()) {
                        dot += std::min(cw, it->second) * it->second;
                    }
                }
                double delta = static_cast<double>(item.cand.size()) -
                               static_cast<double>(ref.size());
                double length_penalty =
                    std::exp(-(delta * delta) / (2.0 * kSigma * kSigma));
                ref_sum += dot / (cand_norm * ref_norm) * length_penalty;
            }
            score_sum_over_n += ref_sum / static_cast<double>(item.refs.size());
        }
        double score = 10.0 * score_sum_over_n / static_cast<double>(kMaxN);
        result.per_sample.push_back(score);
        total += score;
    }
    result.mean = total / corpus_size;
    return result;
}

CaptionScores caption_scores(const std::vector<CaptionItem>& corpus) {
    if (corpus.empty()) {
        throw ValidationError("caption_scores needs a non-empty corpus");
    }
    CaptionScores scores;
    for (const CaptionItem& item : corpus) {
        scores.bleu4 += bleu4(item.candidate, item.references);
        scores.meteor += meteor_lite(item.candidate, item.references);
        scores.rouge_l += rouge_l(item.candidate, item.references);
    }
    const double n = static_cast<double>(corpus.size());
    scores.bleu4 /= n;
    scores.meteor /= n;
    scores.rouge_l /= n;
    scores.cider = cider_d(corpus).mean;
    return scores;
}

std::string relative_gain(double new_value, double baseline_mean) {
    if (!(baseline_mean > 0.0)) {
        throw ValidationError("relative gain needs a baseline mean > 0");
    }
    double pct = 100.0 * (new_value - baseline_mean) / baseline_mean;
    // Truncate toward zero at two decimals; integer cents keep the
    // formatting exact (printf would re-round).
    long long cents = static_cast<long long>(std::trunc(pct * 100.0));
    char sign = cents < 0 ? '-' : '+';
    long long abs_cents = cents < 0 ? -cents : cents;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%c%lld.%02lld%%", sign, abs_cents / 100,
                  abs_cents % 100);
    return buf;
}

}  // namespace avrd::metrics
