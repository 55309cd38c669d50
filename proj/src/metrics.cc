#include "stclean/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <thread>
#include <unordered_map>

#include "stclean/error.h"
#include "stclean/rng.h"
#include "stclean/text.h"

namespace stclean {
namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// ASCII punctuation class of the first 13a rule: {|}~ [\]^_` space!"#$%&
// ()*+ :;<=>?@ and '/'.
bool is_13a_punct(char c) {
  return (c >= '{' && c <= '~') || (c >= '[' && c <= '`') || (c >= ' ' && c <= '&') ||
         (c >= '(' && c <= '+') || (c >= ':' && c <= '@') || c == '/';
}

// The three regex substitutions are applied one after another, each as a
// left-to-right scan over non-overlapping matches, like re.sub. Non-ASCII
// bytes are never digits or punctuation, so working on bytes is exact.
std::string apply_13a_rules(const std::string& in) {
  std::string a;
  a.reserve(in.size() * 2);
  for (char c : in) {
    if (is_13a_punct(c)) {
      a.push_back(' ');
      a.push_back(c);
      a.push_back(' ');
    } else {
      a.push_back(c);
    }
  }

  // ([^0-9])([\.,]) -> \1 \2 ' '
  std::string b;
  b.reserve(a.size() * 2);
  for (std::size_t i = 0; i < a.size();) {
    if (i + 1 < a.size() && !is_digit(a[i]) && (a[i + 1] == '.' || a[i + 1] == ',')) {
      b.push_back(a[i]);
      b.push_back(' ');
      b.push_back(a[i + 1]);
      b.push_back(' ');
      i += 2;
    } else {
      b.push_back(a[i]);
      ++i;
    }
  }

  // ([\.,])([^0-9]) -> ' ' \1 ' ' \2
  std::string c;
  c.reserve(b.size() * 2);
  for (std::size_t i = 0; i < b.size();) {
    if (i + 1 < b.size() && (b[i] == '.' || b[i] == ',') && !is_digit(b[i + 1])) {
      c.push_back(' ');
      c.push_back(b[i]);
      c.push_back(' ');
      c.push_back(b[i + 1]);
      i += 2;
    } else {
      c.push_back(b[i]);
      ++i;
    }
  }

  // ([0-9])(-) -> \1 ' ' \2 ' '
  std::string d;
  d.reserve(c.size() * 2);
  for (std::size_t i = 0; i < c.size();) {
    if (i + 1 < c.size() && is_digit(c[i]) && c[i + 1] == '-') {
      d.push_back(c[i]);
      d.push_back(' ');
      d.push_back('-');
      d.push_back(' ');
      i += 2;
    } else {
      d.push_back(c[i]);
      ++i;
    }
  }
  return d;
}

std::string_view rstrip(std::string_view s) {
  std::size_t e = s.size();
  while (e > 0 && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\n' || s[e - 1] == '\r' ||
                   s[e - 1] == '\f' || s[e - 1] == '\v')) {
    --e;
  }
  return s.substr(0, e);
}

using NgramCounts = std::unordered_map<std::string, std::int64_t>;

std::array<NgramCounts, kMaxNgramOrder> count_ngrams(const std::vector<std::string>& tokens) {
  std::array<NgramCounts, kMaxNgramOrder> counts;
  for (int n = 1; n <= kMaxNgramOrder; ++n) {
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string key = tokens[i];
      for (int k = 1; k < n; ++k) {
        key.push_back(' ');
        key += tokens[i + k];
      }
      ++counts[n - 1][key];
    }
  }
  return counts;
}

// sacreBLEU's my_log: log(0) is a large negative constant rather than -inf.
double safe_log(double x) { return x == 0.0 ? -9999999999.0 : std::log(x); }

}  // namespace

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diagonal = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t above = row[j];
      row[j] = std::min({above + 1, row[j - 1] + 1, diagonal + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diagonal = above;
    }
  }
  return row[b.size()];
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  return levenshtein(std::u32string_view(utf8_decode(a)), std::u32string_view(utf8_decode(b)));
}

std::vector<std::string> tokenize_13a(std::string_view text) {
  std::string line(text);
  replace_all(line, "<skipped>", "");
  replace_all(line, "-\n", "");
  replace_all(line, "\n", " ");
  if (line.find('&') != std::string::npos) {
    replace_all(line, "&quot;", "\"");
    replace_all(line, "&amp;", "&");
    replace_all(line, "&lt;", "<");
    replace_all(line, "&gt;", ">");
  }
  return split_whitespace(apply_13a_rules(" " + line + " "));
}

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  for (int n = 0; n < kMaxNgramOrder; ++n) {
    correct[n] += other.correct[n];
    total[n] += other.total[n];
  }
  hyp_len += other.hyp_len;
  ref_len += other.ref_len;
  return *this;
}

std::string BleuScore::formatted() const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", score);
  return buf;
}

std::string BleuScore::verbose() const {
  char buf[256];
  const double ratio = ref_len > 0 ? static_cast<double>(hyp_len) / static_cast<double>(ref_len) : 0.0;
  std::snprintf(buf, sizeof(buf), "BLEU = %.2f %.1f/%.1f/%.1f/%.1f (BP = %.3f ratio = %.3f hyp_len = %lld ref_len = %lld)",
                score, precisions[0], precisions[1], precisions[2], precisions[3], brevity_penalty, ratio,
                static_cast<long long>(hyp_len), static_cast<long long>(ref_len));
  return buf;
}

std::string bleu_signature(bool sentence_level, std::size_t resamples, std::uint64_t seed) {
  std::string sig = "nrefs:1|";
  if (resamples > 0) sig += "bs:" + std::to_string(resamples) + "|seed:" + std::to_string(seed) + "|";
  sig += "case:mixed|eff:";
  sig += sentence_level ? "yes" : "no";
  sig += "|tok:13a|smooth:exp";
  return sig;
}

BleuStats segment_stats(std::string_view hyp, std::string_view ref) {
  const auto hyp_tokens = tokenize_13a(rstrip(hyp));
  const auto ref_tokens = tokenize_13a(rstrip(ref));
  const auto hyp_counts = count_ngrams(hyp_tokens);
  const auto ref_counts = count_ngrams(ref_tokens);
  BleuStats stats;
  stats.hyp_len = static_cast<std::int64_t>(hyp_tokens.size());
  stats.ref_len = static_cast<std::int64_t>(ref_tokens.size());
  for (int n = 0; n < kMaxNgramOrder; ++n) {
    stats.total[n] = std::max<std::int64_t>(0, stats.hyp_len - n);
    for (const auto& [ngram, count] : hyp_counts[n]) {
      const auto it = ref_counts[n].find(ngram);
      if (it != ref_counts[n].end()) stats.correct[n] += std::min(count, it->second);
    }
  }
  return stats;
}

BleuScore compute_bleu(const BleuStats& stats, bool effective_order) {
  BleuScore out;
  out.hyp_len = stats.hyp_len;
  out.ref_len = stats.ref_len;
  if (stats.hyp_len < stats.ref_len) {
    out.brevity_penalty = stats.hyp_len > 0 ? std::exp(1.0 - static_cast<double>(stats.ref_len) / stats.hyp_len) : 0.0;
  } else {
    out.brevity_penalty = 1.0;
  }
  out.signature = bleu_signature(effective_order);

  const bool any_match = std::any_of(stats.correct.begin(), stats.correct.end(), [](auto c) { return c > 0; });
  if (!any_match) {
    out.score = 0.0;
    return out;
  }

  double smooth = 1.0;
  int order = kMaxNgramOrder;
  for (int n = 0; n < kMaxNgramOrder; ++n) {
    if (stats.total[n] == 0) break;
    if (effective_order) order = n + 1;
    if (stats.correct[n] == 0) {
      smooth *= 2.0;
      out.precisions[n] = 100.0 / (smooth * static_cast<double>(stats.total[n]));
    } else {
      out.precisions[n] = 100.0 * static_cast<double>(stats.correct[n]) / static_cast<double>(stats.total[n]);
    }
  }
  out.effective_order = order;
  double log_sum = 0.0;
  for (int n = 0; n < order; ++n) log_sum += safe_log(out.precisions[n]);
  out.score = out.brevity_penalty * std::exp(log_sum / order);
  return out;
}

BleuScore sentence_bleu(std::string_view hyp, std::string_view ref) {
  return compute_bleu(segment_stats(hyp, ref), true);
}

BleuScore corpus_bleu(const std::vector<std::string>& hyps, const std::vector<std::string>& refs) {
  if (hyps.size() != refs.size() || hyps.empty()) {
    throw Error(ErrorCode::kLengthMismatch, std::to_string(hyps.size()) + " hypotheses vs " +
                                                std::to_string(refs.size()) + " references");
  }
  BleuStats total;
  for (std::size_t i = 0; i < hyps.size(); ++i) total += segment_stats(hyps[i], refs[i]);
  return compute_bleu(total, false);
}

BootstrapResult bootstrap_ci(const std::vector<std::string>& hyps, const std::vector<std::string>& refs,
                             std::size_t resamples, std::uint64_t seed, unsigned workers) {
  if (hyps.size() != refs.size() || hyps.empty()) {
    throw Error(ErrorCode::kLengthMismatch, std::to_string(hyps.size()) + " hypotheses vs " +
                                                std::to_string(refs.size()) + " references");
  }
  if (resamples == 0) throw Error(ErrorCode::kInvalidArgument, "need at least one resample");
  std::vector<BleuStats> stats(hyps.size());
  for (std::size_t i = 0; i < hyps.size(); ++i) stats[i] = segment_stats(hyps[i], refs[i]);

  BootstrapResult out;
  out.scores.resize(resamples);
  auto run = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t r = begin; r < resamples; r += stride) {
      SplitMix64 rng(derive_seed(seed, r));
      BleuStats sum;
      for (std::size_t i = 0; i < stats.size(); ++i) sum += stats[rng.below(stats.size())];
      out.scores[r] = compute_bleu(sum, false).score;
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(resamples)));
  if (workers == 1) {
    run(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w, workers);
    for (auto& th : pool) th.join();
  }

  double sum = 0.0;
  for (double s : out.scores) sum += s;
  out.mean = sum / static_cast<double>(resamples);
  if (resamples > 1) {
    double sq = 0.0;
    for (double s : out.scores) sq += (s - out.mean) * (s - out.mean);
    out.ci95 = 1.96 * std::sqrt(sq / static_cast<double>(resamples - 1));
  }
  return out;
}

}  // namespace stclean
