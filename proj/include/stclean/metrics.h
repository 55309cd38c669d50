#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace stclean {

// Unit-cost edit distance over Unicode code points.
std::size_t levenshtein(std::string_view a, std::string_view b);
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

// mteval-v13a tokenization as done by sacreBLEU's "13a" tokenizer.
std::vector<std::string> tokenize_13a(std::string_view text);

inline constexpr int kMaxNgramOrder = 4;

// Sufficient statistics of one or more segments.
struct BleuStats {
  std::array<std::int64_t, kMaxNgramOrder> correct{};
  std::array<std::int64_t, kMaxNgramOrder> total{};
  std::int64_t hyp_len = 0;
  std::int64_t ref_len = 0;

  BleuStats& operator+=(const BleuStats& other);
};

struct BleuScore {
  double score = 0.0;                                 // percent
  std::array<double, kMaxNgramOrder> precisions{};    // percent
  double brevity_penalty = 0.0;
  std::int64_t hyp_len = 0;
  std::int64_t ref_len = 0;
  int effective_order = kMaxNgramOrder;
  std::string signature;

  // One decimal, as scores are usually reported.
  std::string formatted() const;
  // "BLEU = 13.11 57.9/27.8/5.9/3.1 (BP = 1.000 ratio = 1.056 hyp_len = 19 ref_len = 18)"
  std::string verbose() const;
};

inline constexpr std::uint64_t kDefaultBootstrapSeed = 12345;
inline constexpr std::size_t kDefaultBootstrapResamples = 1000;

std::string bleu_signature(bool sentence_level, std::size_t resamples = 0,
                           std::uint64_t seed = kDefaultBootstrapSeed);

// Both inputs are stripped of trailing whitespace and 13a-tokenized.
BleuStats segment_stats(std::string_view hyp, std::string_view ref);

// Exp smoothing (mteval NIST method 3). When effective_order is set, orders
// with no candidate n-grams are left out of the geometric mean. A score of 0
// is returned when no order has any match.
BleuScore compute_bleu(const BleuStats& stats, bool effective_order);

// Case-sensitive sentence BLEU with effective order.
BleuScore sentence_bleu(std::string_view hyp, std::string_view ref);

// Corpus BLEU over summed statistics (eff:no). Throws LengthMismatch.
BleuScore corpus_bleu(const std::vector<std::string>& hyps, const std::vector<std::string>& refs);

struct BootstrapResult {
  double mean = 0.0;   // percent
  double ci95 = 0.0;   // half-width, 1.96 * sample stddev
  std::vector<double> scores;
};

// Resamples segment indices with replacement. Resample r draws from its own
// SplitMix64 stream derive_seed(seed, r), so the result does not depend on
// `workers`.
BootstrapResult bootstrap_ci(const std::vector<std::string>& hyps, const std::vector<std::string>& refs,
                             std::size_t resamples = kDefaultBootstrapResamples,
                             std::uint64_t seed = kDefaultBootstrapSeed, unsigned workers = 1);

}  // namespace stclean
