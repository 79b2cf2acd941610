#pragma once

// Scoring: Top-1 accuracy with best/mean-of-N aggregation, caption metrics
// implemented from scratch (BLEU@4, METEOR-lite, ROUGE-L, CIDEr-D), and the
// relative-gain arithmetic used by the reports.

#include <string>
#include <vector>

#include "avrd/core.hpp"

namespace avrd::metrics {

// Shared normalizer for all caption metrics: lowercase, punctuation
// replaced by spaces, split on whitespace.
std::vector<std::string> tokenize(const std::string& text);

// Light deterministic stemmer used by METEOR-lite's second matching stage:
// plural reduction (sses/ies/s) followed by at most one of -ing/-ed/-ly.
std::string stem_token(const std::string& word);

// Fraction of correct records; a no-match extraction counts as incorrect.
// An empty list scores 0 and records a warning if `warnings` is given.
double top1_accuracy(const std::vector<EvalRecord>& records,
                     std::vector<std::string>* warnings = nullptr);

struct BestMean {
    double best = 0.0;
    double mean = 0.0;
};

// (max, arithmetic mean) over per-run values. Throws ValidationError on an
// empty list.
BestMean best_of_n(const std::vector<double>& run_values);

// Sentence-level BLEU@4: geometric mean of clipped modified n-gram
// precisions for n = 1..4 times the brevity penalty (closest reference
// length, ties to the shorter). No smoothing: any zero precision gives 0.
double bleu4(const std::vector<std::string>& candidate_tokens,
             const std::vector<std::vector<std::string>>& reference_tokens);
double bleu4(const std::string& candidate, const std::vector<std::string>& references);

// METEOR-lite: unigram alignment by exact match, then stem match; F-mean
// with recall weight 9; fragmentation penalty 0.5*(chunks/matches)^3; score
// is the max over references. No synonym lookup (hence "-lite"); note the
// penalty makes even a verbatim match score slightly below 1.
double meteor_lite(const std::vector<std::string>& candidate_tokens,
                   const std::vector<std::vector<std::string>>& reference_tokens);
double meteor_lite(const std::string& candidate, const std::vector<std::string>& references);

// ROUGE-L: LCS-based F1 (P = LCS/|cand|, R = LCS/|ref|), max over references.
double rouge_l(const std::vector<std::string>& candidate_tokens,
               const std::vector<std::vector<std::string>>& reference_tokens);
double rouge_l(const std::string& candidate, const std::vector<std::string>& references);

// One corpus item for CIDEr-D: a candidate and its reference set.
struct CaptionItem {
    std::string candidate;
    std::vector<std::string> references;
};

struct CiderResult {
    std::vector<double> per_sample;
    double mean = 0.0;
};

// CIDEr-D over a corpus: TF-IDF n-gram vectors for n = 1..4 with document
// frequency over the corpus reference sets (IDF = log(|corpus|/df), df
// clipped >= 1), clipped cosine similarity with a length-gaussian penalty
// (sigma = 6), averaged over n and references, scaled x10. Throws
// ValidationError on an empty corpus.
CiderResult cider_d(const std::vector<CaptionItem>& corpus);

// All four caption metrics over a corpus. bleu4/meteor/rouge_l are averaged
// per-candidate scores; cider is the corpus mean.
CaptionScores caption_scores(const std::vector<CaptionItem>& corpus);

// 100*(new - baseline)/baseline, truncated (toward zero) to two decimals
// and formatted "+DD.DD%" / "-DD.DD%". Throws ValidationError when the
// baseline is not > 0.
std::string relative_gain(double new_value, double baseline_mean);

}  // namespace avrd::metrics
