#include "stclean/detector.h"

#include <gtest/gtest.h>

#include "stclean/corpus.h"
#include "stclean/error.h"
#include "stclean/rng.h"
#include "stclean/synthetic.h"
#include "stclean/text.h"
#include "test_util.h"

namespace stclean {
namespace {

using testing::TempDir;

constexpr double kStride = 0.02;

// "HELLO WORLD" spoken from 10.0 s; 11 chars of 0.08 s each end at 10.86 s.
struct Scene {
  Vocab vocab = english_vocab();
  std::vector<CharTiming> chars = layout_chars("HELLO WORLD", 10.0, 0.06, 0.02);

  Utterance utterance(double offset, double duration, std::string transcript = "Hello world.") const {
    Utterance u;
    u.id = "talk_0_0";
    u.audio_path = "talk_0.wav";
    u.offset_s = offset;
    u.duration_s = duration;
    u.transcript = std::move(transcript);
    u.translation = "Hallo Welt.";
    return u;
  }
  EmissionPair emissions(const Utterance& u, double expand = 1.0, double eps = 0.0) const {
    return {render_emissions(vocab, chars, kStride, {u.offset_s - expand, u.end_s() + expand}, eps, 1),
            render_emissions(vocab, chars, kStride, {u.offset_s, u.end_s()}, eps, 2)};
  }
  Verdict detect(const Utterance& u, const DetectorConfig& cfg = {}) const {
    const EmissionPair p = emissions(u, cfg.expand_s);
    return detect_utterance(u, p.expanded, p.original, vocab, cfg);
  }
};

TEST(DetectUtterance, CleanWindow) {
  const Scene s;
  const Verdict v = s.detect(s.utterance(10.0, 0.88));
  EXPECT_FALSE(v.flagged);
  EXPECT_TRUE(v.reasons.empty());
  EXPECT_EQ(v.decoded_transcript, "HELLO WORLD");
  EXPECT_EQ(v.edit_distance, 0u);
  EXPECT_EQ(v.overrun_start_s, 0.0);
  EXPECT_EQ(v.overrun_end_s, 0.0);
  ASSERT_TRUE(v.aligned_span.has_value());
  EXPECT_NEAR(v.aligned_span->first, 10.0, kStride);
  EXPECT_NEAR(v.aligned_span->second, 10.86, kStride);
}

TEST(DetectUtterance, SpeechStartsBeforeWindow) {
  const Scene s;
  const Verdict v = s.detect(s.utterance(10.5, 0.88));
  EXPECT_TRUE(v.flagged);
  EXPECT_TRUE(v.has_reason(Reason::kOverrunStart));
  EXPECT_FALSE(v.has_reason(Reason::kOverrunEnd));
  EXPECT_NEAR(v.overrun_start_s, 0.5, kStride);
}

TEST(DetectUtterance, SpeechEndsAfterWindow) {
  const Scene s;
  const Verdict v = s.detect(s.utterance(9.6, 0.8));
  EXPECT_TRUE(v.has_reason(Reason::kOverrunEnd));
  EXPECT_NEAR(v.overrun_end_s, 10.86 - 10.4, kStride);
}

TEST(DetectUtterance, EmptyDecodeOfLongTranscript) {
  const Scene s;
  std::string transcript;
  for (int i = 0; i < 20; ++i) transcript += i ? " ABCD" : "ABCDE";
  ASSERT_EQ(normalize_text(transcript).size(), 100u);
  const Utterance u = s.utterance(20.0, 2.0, transcript);
  const EmissionPair p = s.emissions(u);
  const Verdict v = detect_utterance(u, p.expanded, p.original, s.vocab, {});
  EXPECT_EQ(v.decoded_transcript, "");
  EXPECT_EQ(v.edit_distance, 100u);
  EXPECT_TRUE(v.has_reason(Reason::kEditDistance));
  EXPECT_DOUBLE_EQ(v.edit_ratio_observed, 1.0);
}

TEST(DetectUtterance, InfeasibleAlignment) {
  const Scene s;
  const Utterance u = s.utterance(10.0, 0.02, std::string(300, 'a'));
  const EmissionPair p = s.emissions(u, 0.01);
  const Verdict v = detect_utterance(u, p.expanded, p.original, s.vocab, {});
  EXPECT_TRUE(v.has_reason(Reason::kAlignmentInfeasible));
  EXPECT_FALSE(v.aligned_span.has_value());
}

TEST(DetectUtterance, Errors) {
  const Scene s;
  const Utterance u = s.utterance(10.0, 0.88, "?!...");
  const EmissionPair p = s.emissions(u);
  try {
    detect_utterance(u, p.expanded, p.original, s.vocab, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyNormalizedTranscript);
  }
  const Vocab small = Vocab::from_letters("AB");
  EXPECT_THROW(detect_utterance(s.utterance(10.0, 0.88), p.expanded, p.original, small, {}), Error);
}

TEST(DetectorConfig, Validation) {
  EXPECT_NO_THROW(DetectorConfig{}.validate());
  DetectorConfig c;
  c.overrun_tol_s = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.edit_ratio = 2.5;
  EXPECT_THROW(c.validate(), Error);
}

// Flagging is a threshold on a fixed measurement: a shift is flagged exactly
// when it exceeds the tolerance, and looser thresholds never add flags.
TEST(Judge, ThresholdsAreMonotone) {
  const Scene s;
  for (double shift = 0.04; shift < 0.9; shift += 0.06) {
    const Utterance u = s.utterance(10.0 + shift, 0.86);
    const EmissionPair p = s.emissions(u);
    const Measurement m = measure_utterance(u, p.expanded, p.original, s.vocab);
    EXPECT_NEAR(m.raw_overrun_start_s, shift, kStride);
    bool previous = true;
    for (double tol = 0.05; tol < 1.0; tol += 0.05) {
      DetectorConfig cfg;
      cfg.overrun_tol_s = tol;
      cfg.edit_ratio = 2.0;
      const Verdict v = judge(u, m, cfg);
      EXPECT_EQ(v.has_reason(Reason::kOverrunStart), m.raw_overrun_start_s > tol);
      EXPECT_TRUE(previous || !v.flagged);
      previous = v.flagged;
    }
  }
}

SyntheticCorpus small_world() {
  SyntheticOptions opts;
  opts.utterances = 24;
  opts.utterances_per_talk = 6;
  return make_synthetic_corpus(opts, 5);
}

TEST(DetectCorpus, CleanSyntheticCorpusHasNoFlags) {
  const SyntheticCorpus world = small_world();
  const SyntheticEmissionProvider provider(world, kStride, 1.0, 0.1, 3);
  const auto verdicts = detect_corpus(world.manifest, provider, world.vocab, {}, 2);
  ASSERT_EQ(verdicts.size(), world.manifest.size());
  for (const auto& v : verdicts) EXPECT_FALSE(v.removable()) << v.utterance_id;
  EXPECT_TRUE(detect_corpus(CorpusManifest{}, provider, world.vocab, {}, 2).empty());
}

TEST(DetectCorpus, OrderAndContentIndependentOfWorkers) {
  SyntheticCorpus world = small_world();
  world.manifest.utterances[3].offset_s += 0.6;
  world.manifest.utterances[7].transcript = "!!!";
  const SyntheticEmissionProvider provider(world, kStride, 1.0, 0.2, 3);
  const auto one = verdicts_to_jsonl(detect_corpus(world.manifest, provider, world.vocab, {}, 1));
  for (unsigned w : {2u, 5u, 16u}) {
    EXPECT_EQ(verdicts_to_jsonl(detect_corpus(world.manifest, provider, world.vocab, {}, w)), one);
  }
  const auto verdicts = detect_corpus(world.manifest, provider, world.vocab, {}, 3);
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    EXPECT_EQ(verdicts[i].utterance_id, world.manifest.utterances[i].id);
  }
  EXPECT_TRUE(verdicts[3].has_reason(Reason::kOverrunStart));
  ASSERT_TRUE(verdicts[7].error.has_value());
  EXPECT_NE(verdicts[7].error->find("EmptyNormalizedTranscript"), std::string::npos);
  EXPECT_TRUE(verdicts[7].removable());
}

TEST(DetectCorpus, MissingEmissionFilesBecomeErrors) {
  const SyntheticCorpus world = small_world();
  TempDir dir;
  const EmissionDirectory provider(dir.path());
  const auto verdicts = detect_corpus(world.manifest, provider, world.vocab, {}, 2);
  for (const auto& v : verdicts) EXPECT_TRUE(v.error.has_value());
}

TEST(VerdictJson, RoundTrip) {
  Verdict a;
  a.utterance_id = "ted_1_0";
  a.flagged = true;
  a.reasons = {Reason::kOverrunStart, Reason::kEditDistance};
  a.overrun_start_s = 0.52;
  a.edit_distance = 9;
  a.edit_ratio_observed = 0.75;
  a.decoded_transcript = "HELLO";
  a.aligned_span = std::make_pair(1.25, 3.5);
  Verdict b;
  b.utterance_id = "ted_1_1";
  b.error = "CharNotInVocab: 'É'";
  const std::string jsonl = verdicts_to_jsonl({a, b});
  EXPECT_EQ(jsonl.substr(0, jsonl.find('\n')),
            R"({"id":"ted_1_0","flagged":true,"reasons":["OverrunStart","EditDistance"],"overrun_start_s":0.52,)"
            R"("overrun_end_s":0.0,"edit_distance":9,"edit_ratio_observed":0.75,"decoded":"HELLO",)"
            R"("aligned_span":[1.25,3.5]})");
  TempDir dir;
  write_file(dir / "v.jsonl", jsonl);
  const auto back = read_verdicts(dir / "v.jsonl");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(verdicts_to_jsonl(back), jsonl);
  EXPECT_EQ(back[1].error, b.error);
  EXPECT_FALSE(back[1].aligned_span.has_value());
  EXPECT_THROW(verdict_from_json("{\"id\": 3}"), Error);
}

TEST(SpeakerName, Examples) {
  const auto hit = detect_speaker_name("Woman: 80's revival meets skater-punk, unless it's laundry day.", 20);
  ASSERT_TRUE(hit.has_value());
  EXPECT_EQ(hit->name, "Woman");
  EXPECT_EQ(hit->remainder, "80's revival meets skater-punk, unless it's laundry day.");
  EXPECT_FALSE(detect_speaker_name("That's what we were looking forward to.", 20));
  EXPECT_FALSE(detect_speaker_name(
      "DigiNotar is a certificate authority from the Netherlands -- or actually, it was.", 20));
  EXPECT_EQ(detect_speaker_name("Chris Anderson: Thank you.", 20)->name, "Chris Anderson");
  EXPECT_FALSE(detect_speaker_name("There are three things: one, two, three.", 20));
  EXPECT_FALSE(detect_speaker_name("A Very Long Speaker Name: hi", 20));
  EXPECT_FALSE(detect_speaker_name("Dr. Smith: hi", 20));
  EXPECT_FALSE(detect_speaker_name("Time:10", 20));
}

TEST(SpeakerName, Rate) {
  CorpusManifest m;
  for (int i = 0; i < 4; ++i) {
    Utterance u;
    u.id = "u" + std::to_string(i);
    u.transcript = "Just words here.";
    m.utterances.push_back(u);
  }
  EXPECT_EQ(speaker_name_rate(m, {}), 0.0);
  for (auto& u : m.utterances) u.transcript = "Narrator: " + u.transcript;
  EXPECT_EQ(speaker_name_rate(m, {}), 1.0);
  m.utterances[0].transcript = "plain";
  EXPECT_EQ(speaker_name_rate(m, {}), 0.75);
  EXPECT_EQ(speaker_name_rate(CorpusManifest{}, {}), 0.0);
}

}  // namespace
}  // namespace stclean
