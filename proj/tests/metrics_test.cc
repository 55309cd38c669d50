#include "stclean/metrics.h"

#include <gtest/gtest.h>

#include "stclean/error.h"
#include "stclean/rng.h"
#include "stclean/text.h"
#include "oracles.h"

namespace stclean {
namespace {

// Reference values below were produced with sacrebleu 2.0.0
// (sentence_bleu / corpus_bleu, default tokenizer and smoothing).

std::string joined(std::string_view s) { return join(tokenize_13a(s), " "); }

TEST(Tokenize13a, Punctuation) {
  EXPECT_EQ(tokenize_13a("Hello, world!"), (std::vector<std::string>{"Hello", ",", "world", "!"}));
  EXPECT_EQ(joined("3.5"), "3.5");
  EXPECT_EQ(joined("1,000 people"), "1,000 people");
  EXPECT_EQ(joined("pages 10-20."), "pages 10 - 20 .");
  EXPECT_EQ(joined("x.y"), "x . y");
  EXPECT_EQ(joined("3.a"), "3 . a");
  EXPECT_EQ(joined("It's 5 o'clock; why?"), "It's 5 o'clock ; why ?");
  EXPECT_EQ(joined("a -- b"), "a -- b");
  EXPECT_EQ(joined("U.S.A. is big."), "U . S . A . is big .");
  EXPECT_EQ(joined("$100/month @home #tag"), "$ 100 / month @ home # tag");
  EXPECT_EQ(joined("2-3-4"), "2 - 3 - 4");
  EXPECT_EQ(joined("e-mail re-use"), "e-mail re-use");
  EXPECT_EQ(joined("..."), ". . .");
  EXPECT_EQ(joined(",.,"), ", . ,");
  EXPECT_EQ(joined("(parens) [brackets] {braces}"), "( parens ) [ brackets ] { braces }");
}

TEST(Tokenize13a, EntitiesAndSkipped) {
  EXPECT_EQ(joined("He said &quot;no&quot; &amp; left."), "He said \" no \" & left .");
  EXPECT_EQ(joined("a<skipped>b"), "ab");
  EXPECT_EQ(tokenize_13a("tab\tseparated   spaces").size(), 3u);
}

TEST(Tokenize13a, NonAscii) {
  EXPECT_EQ(joined("naïve café, déjà vu."), "naïve café , déjà vu .");
  EXPECT_EQ(joined("Wie geht's? Gut, danke."), "Wie geht's ? Gut , danke .");
}

TEST(SentenceBleu, ReferenceValues) {
  EXPECT_NEAR(sentence_bleu("The cat sat on the mat.", "The cat is on the mat.").score, 48.892302243490086, 1e-9);
  EXPECT_NEAR(sentence_bleu("one two three four five", "one two three six seven").score, 39.76353643835252, 1e-9);
  EXPECT_NEAR(sentence_bleu("Das ist ein Test, oder?", "Das ist kein Test, oder?").score, 48.892302243490086, 1e-9);
  EXPECT_NEAR(sentence_bleu("It costs 3.50 dollars.", "It costs 3,50 dollars.").score, 30.213753973567677, 1e-9);
  EXPECT_NEAR(sentence_bleu("the the the the", "the cat").score, 15.97357760615681, 1e-9);
  EXPECT_NEAR(sentence_bleu("Wir leben in der friedlichsten Zeit.",
                            "Wir leben in einer sehr friedlichen Zeit der Geschichte.").score,
              18.938334565508196, 1e-9);
}

TEST(SentenceBleu, TalkTranslations) {
  const std::string hyp1 =
      "Steve Pinker zeigte uns, dass wir in der Tat in einer der friedlichsten Zeiten der Menschheitsgeschichte leben.";
  const std::string hyp2 =
      "Die Idee von Glühwürmchen und einem Kiefer war aus irgendeinem Grund immer sehr aufregend für mich.";
  EXPECT_NEAR(sentence_bleu(hyp1, "Steve Pinker hat uns gezeigt, dass wir derzeit in einer sehr friedlichen Zeit "
                                  "der Menschengeschichte leben.").score,
              13.11246738393144, 1e-9);
  EXPECT_NEAR(sentence_bleu(hyp1, "Steve Pinker hat uns gezeigt, dass wir in der Tat in der friedlichsten Zeit "
                                  "der Menschheitsgeschichte leben.").score,
              50.727846440621036, 1e-9);
  EXPECT_NEAR(sentence_bleu(hyp2, "Glühwürmchen in einem Glas fand ich immer ganz aufregend.").score,
              3.4197980307804725, 1e-9);
  EXPECT_NEAR(sentence_bleu(hyp2, "Die Vorstellung von Glühwürmchen in einem Glas fand ich aus irgendeinem Grund "
                                  "immer ganz aufregend.").score,
              19.345299022826186, 1e-9);
}

TEST(SentenceBleu, Bounds) {
  EXPECT_NEAR(sentence_bleu("a b c d e", "a b c d e").score, 100.0, 1e-9);
  EXPECT_EQ(sentence_bleu("a b c d", "e f g h").score, 0.0);
  EXPECT_EQ(sentence_bleu("", "e f g h").score, 0.0);
  EXPECT_EQ(sentence_bleu("The cat.", "The cat.").formatted(), "100.0");
}

TEST(SentenceBleu, SignatureAndVerbose) {
  const BleuScore s = sentence_bleu("The cat sat on the mat.", "The cat is on the mat.");
  EXPECT_EQ(s.signature, "nrefs:1|case:mixed|eff:yes|tok:13a|smooth:exp");
  EXPECT_EQ(s.formatted(), "48.9");
  EXPECT_EQ(s.verbose().rfind("BLEU = 48.89 ", 0), 0u) << s.verbose();
  EXPECT_EQ(bleu_signature(false, 1000, 12345),
            "nrefs:1|bs:1000|seed:12345|case:mixed|eff:no|tok:13a|smooth:exp");
}

const std::vector<std::string> kHyps{
    "The cat sat on the mat.", "A quick brown fox.", "Hallo Welt", "one two three four five",
    "Das ist ein Test, oder?", "It costs 3.50 dollars.", "the the the the", "Wir leben in der friedlichsten Zeit."};
const std::vector<std::string> kRefs{
    "The cat is on the mat.", "A quick brown fox.", "Hallo Welt", "one two three six seven",
    "Das ist kein Test, oder?", "It costs 3,50 dollars.", "the cat",
    "Wir leben in einer sehr friedlichen Zeit der Geschichte."};

TEST(CorpusBleu, ReferenceValue) {
  EXPECT_NEAR(corpus_bleu(kHyps, kRefs).score, 41.298889745453145, 1e-9);
}

TEST(CorpusBleu, DuplicationInvariance) {
  std::vector<std::string> h = kHyps, r = kRefs;
  h.insert(h.end(), kHyps.begin(), kHyps.end());
  r.insert(r.end(), kRefs.begin(), kRefs.end());
  EXPECT_NEAR(corpus_bleu(h, r).score, corpus_bleu(kHyps, kRefs).score, 1e-9);
}

TEST(CorpusBleu, LengthMismatch) {
  try {
    corpus_bleu({"a"}, {"a", "b"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLengthMismatch);
  }
  EXPECT_THROW(corpus_bleu({}, {}), Error);
}

TEST(CorpusBleu, StatsAreAdditive) {
  BleuStats total;
  for (std::size_t i = 0; i < kHyps.size(); ++i) total += segment_stats(kHyps[i], kRefs[i]);
  EXPECT_NEAR(compute_bleu(total, false).score, corpus_bleu(kHyps, kRefs).score, 1e-12);
}

TEST(Bootstrap, DeterministicAndWorkerIndependent) {
  const BootstrapResult a = bootstrap_ci(kHyps, kRefs, 200, 7, 1);
  const BootstrapResult b = bootstrap_ci(kHyps, kRefs, 200, 7, 4);
  EXPECT_EQ(a.scores, b.scores);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.ci95, b.ci95);
  EXPECT_GT(a.ci95, 0.0);
  const auto [lo, hi] = std::minmax_element(a.scores.begin(), a.scores.end());
  EXPECT_GE(a.mean, *lo);
  EXPECT_LE(a.mean, *hi);
  EXPECT_NE(bootstrap_ci(kHyps, kRefs, 200, 8, 1).scores, a.scores);
}

TEST(Bootstrap, IdenticalSegmentsHaveNoSpread) {
  const std::vector<std::string> h(5, "The cat sat on the mat.");
  const std::vector<std::string> r(5, "The cat is on the mat.");
  const BootstrapResult res = bootstrap_ci(h, r, 100, 1, 2);
  EXPECT_NEAR(res.ci95, 0.0, 1e-9);
  EXPECT_NEAR(res.mean, corpus_bleu(h, r).score, 1e-9);
}

TEST(Levenshtein, Examples) {
  EXPECT_EQ(levenshtein("kitten", "sitting"), 3u);
  EXPECT_EQ(levenshtein("", "abc"), 3u);
  EXPECT_EQ(levenshtein("abc", "abc"), 0u);
  EXPECT_EQ(levenshtein("für", "fur"), 1u);  // code points, not bytes
}

TEST(Levenshtein, AgreesWithRecursionAndIsAMetric) {
  SplitMix64 rng(99);
  auto random_word = [&] {
    std::u32string s;
    const auto n = rng.below(8);
    for (std::size_t i = 0; i < n; ++i) s.push_back(U'a' + static_cast<char32_t>(rng.below(3)));
    return s;
  };
  for (int i = 0; i < 2000; ++i) {
    const auto a = random_word(), b = random_word(), c = random_word();
    const auto ab = levenshtein(a, b);
    EXPECT_EQ(ab, oracle::levenshtein_recursive(a, b));
    EXPECT_EQ(ab, levenshtein(b, a));
    EXPECT_EQ(ab == 0, a == b);
    EXPECT_LE(levenshtein(a, c), ab + levenshtein(b, c));
  }
}

}  // namespace
}  // namespace stclean
