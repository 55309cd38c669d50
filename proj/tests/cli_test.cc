#include "stclean/cli.h"

#include <gtest/gtest.h>

#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "stclean/corpus.h"
#include "stclean/curation.h"
#include "stclean/detector.h"
#include "stclean/emission.h"
#include "test_util.h"

namespace stclean {
namespace {

using testing::TempDir;

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string p(const std::filesystem::path& path) { return path.string(); }

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const CliRun r = run({"synth", "--out-dir", p(dir / "corpus"), "--out-split", "train", "--emissions",
                       p(dir / "emit"), "--n", "30", "--per-talk", "10", "--noise", "0.1", "--seed", "3"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  }
  TempDir dir;
};

TEST(CliUsage, ExitCodes) {
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"bogus"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"scan", "--split", "x"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
  TempDir d;
  const CliRun missing = run({"scan", "--corpus", p(d.path()), "--split", "nope", "--emissions", p(d.path())});
  EXPECT_EQ(missing.code, cli::kExitData);
  EXPECT_NE(missing.err.find("MissingFile"), std::string::npos) << missing.err;
}

TEST(CliUsage, BinaryReportsExitCodes) {
  const std::string bin = STCLEAN_CLI_PATH;
  EXPECT_EQ(std::system((bin + " > /dev/null 2>&1").c_str()) >> 8, cli::kExitUsage);
  EXPECT_EQ(std::system((bin + " --help > /dev/null 2>&1").c_str()) >> 8, cli::kExitOk);
  EXPECT_EQ(std::system((bin + " score --hyp /nonexistent --ref /nonexistent > /dev/null 2>&1").c_str()) >> 8,
            cli::kExitData);
}

TEST_F(CliTest, ScanFilterRoundTrip) {
  const CliRun scan = run({"scan", "--corpus", p(dir / "corpus"), "--split", "train", "--emissions", p(dir / "emit"),
                        "--out", p(dir / "scan.jsonl"), "--workers", "3"});
  ASSERT_EQ(scan.code, cli::kExitOk) << scan.err;
  EXPECT_NE(scan.err.find("flagged 0 of 30"), std::string::npos) << scan.err;
  EXPECT_EQ(read_verdicts(dir / "scan.jsonl").size(), 30u);

  const CliRun filter = run({"filter", "--corpus", p(dir / "corpus"), "--split", "train", "--report",
                          p(dir / "scan.jsonl"), "--out-dir", p(dir / "clean")});
  ASSERT_EQ(filter.code, cli::kExitOk) << filter.err;
  EXPECT_EQ(parse_mustc(dir / "clean", "train").utterances, parse_mustc(dir / "corpus", "train").utterances);
}

TEST_F(CliTest, FixRewindowsAroundAlignedSpeech) {
  CorpusManifest m = parse_mustc(dir / "corpus", "train");
  const Utterance original = m.utterances[4];
  const CliRun stdout_scan = run({"scan", "--corpus", p(dir / "corpus"), "--split", "train", "--emissions",
                               p(dir / "emit")});
  ASSERT_EQ(stdout_scan.code, cli::kExitOk);
  EXPECT_EQ(std::count(stdout_scan.out.begin(), stdout_scan.out.end(), '\n'), 30);

  const CliRun fix = run({"fix", "--corpus", p(dir / "corpus"), "--split", "train", "--emissions", p(dir / "emit"),
                       "--pad-s", "0.15", "--patch-out", p(dir / "patch.json"), "--out-dir", p(dir / "fixed")});
  ASSERT_EQ(fix.code, cli::kExitOk) << fix.err;
  const Patch patch = read_patch(dir / "patch.json");
  EXPECT_EQ(patch.entries.size(), 30u);
  const CorpusManifest fixed = parse_mustc(dir / "fixed", "train");
  const Utterance& f = fixed.utterances[4];
  EXPECT_NEAR(f.offset_s, original.offset_s - 0.15, 0.15 + 0.02 + 1e-9);
  EXPECT_NEAR(f.end_s(), original.end_s() + 0.15, 0.15 + 0.02 + 1e-9);
  EXPECT_EQ(f.transcript, original.transcript);
}

TEST_F(CliTest, AlignAndDecode) {
  const CorpusManifest m = parse_mustc(dir / "corpus", "train");
  const std::string emit = p(dir / "emit" / (m.utterances[0].id + ".orig.emit"));
  const std::string vocab = p(dir / "emit" / "vocab.txt");
  const CliRun decode = run({"decode", "--emission", emit, "--vocab", vocab});
  ASSERT_EQ(decode.code, cli::kExitOk) << decode.err;
  const std::string decoded = decode.out.substr(0, decode.out.find('\n'));
  EXPECT_FALSE(decoded.empty());

  write_file(dir / "t.txt", m.utterances[0].transcript + "\n");
  const CliRun align = run({"align", "--emission", emit, "--vocab", vocab, "--text", "@" + p(dir / "t.txt")});
  ASSERT_EQ(align.code, cli::kExitOk) << align.err;
  const auto spans = nlohmann::json::parse(align.out);
  ASSERT_TRUE(spans.is_array());
  EXPECT_FALSE(spans.empty());
  EXPECT_LE(spans.front()["start_s"].get<double>(), spans.back()["end_s"].get<double>());

  EXPECT_EQ(run({"align", "--emission", emit, "--vocab", vocab, "--text", "1234"}).code, cli::kExitData);
}

TEST_F(CliTest, SampleAndPatch) {
  const CliRun sample = run({"sample", "--corpus", p(dir / "corpus"), "--split", "train", "--n", "7", "--seed", "1",
                          "--out-dir", p(dir / "sub"), "--out-split", "small"});
  ASSERT_EQ(sample.code, cli::kExitOk) << sample.err;
  const CorpusManifest sub = parse_mustc(dir / "sub", "small");
  EXPECT_EQ(sub.size(), 7u);
  EXPECT_EQ(run({"sample", "--corpus", p(dir / "corpus"), "--split", "train", "--n", "70", "--out-dir",
                 p(dir / "sub2")}).code,
            cli::kExitData);

  const std::string id = sub.utterances[0].id;
  write_file(dir / "patch.json", "{\"" + id + "\": {\"translation\": \"Neu.\"}}");
  const CliRun patch = run({"patch", "--corpus", p(dir / "sub"), "--split", "small", "--patch", p(dir / "patch.json"),
                         "--out-dir", p(dir / "patched")});
  ASSERT_EQ(patch.code, cli::kExitOk) << patch.err;
  const CorpusManifest patched = parse_mustc(dir / "patched", "small");
  EXPECT_EQ(patched.utterances[0].translation, "Neu.");
  EXPECT_EQ(patched.utterances[1], sub.utterances[1]);
}

TEST_F(CliTest, CorruptAndCalibrate) {
  const CliRun corrupt = run({"corrupt", "--corpus", p(dir / "corpus"), "--split", "train", "--fraction", "0.2",
                           "--seed", "9", "--out-dir", p(dir / "bad"), "--labels-out", p(dir / "labels.json")});
  ASSERT_EQ(corrupt.code, cli::kExitOk) << corrupt.err;
  const LabelSet labels = read_labels(dir / "labels.json");
  EXPECT_EQ(labels.size(), 30u);
  EXPECT_EQ(std::count_if(labels.begin(), labels.end(), [](const auto& kv) { return kv.second; }), 6);

  // Emissions still describe the clean windows, so calibrate against an all-clean labeling.
  LabelSet clean;
  for (const auto& [id, _] : labels) clean[id] = false;
  write_file(dir / "clean.json", labels_to_json(clean));
  const CliRun cal = run({"calibrate", "--corpus", p(dir / "corpus"), "--split", "train", "--emissions",
                       p(dir / "emit"), "--labels", p(dir / "clean.json"), "--tol-grid", "0.15,0.3",
                       "--ratio-grid", "0.7", "--out", p(dir / "cal.csv")});
  ASSERT_EQ(cal.code, cli::kExitOk) << cal.err;
  const auto rows = read_lines(dir / "cal.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1], "0.15,0.7,0,0,0,nan,nan,nan");
}

TEST_F(CliTest, SpeakerNames) {
  CorpusManifest m = parse_mustc(dir / "corpus", "train");
  m.utterances[2].transcript = "Woman: " + m.utterances[2].transcript;
  write_manifest(m, dir / "corpus");
  const CliRun r = run({"speaker-names", "--corpus", p(dir / "corpus"), "--split", "train"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto hit = nlohmann::json::parse(r.out.substr(0, r.out.find('\n')));
  EXPECT_EQ(hit["id"], m.utterances[2].id);
  EXPECT_EQ(hit["name"], "Woman");
  EXPECT_NE(r.err.find("1 of 30"), std::string::npos) << r.err;
}

TEST(CliScore, SegmentFiles) {
  TempDir dir;
  write_file(dir / "hyp.txt", "The cat sat on the mat.\none two three four five\n");
  write_file(dir / "ref.txt", "The cat is on the mat.\none two three six seven\n");
  const CliRun corpus = run({"score", "--hyp", p(dir / "hyp.txt"), "--ref", p(dir / "ref.txt")});
  ASSERT_EQ(corpus.code, cli::kExitOk) << corpus.err;
  EXPECT_EQ(corpus.out.rfind("BLEU = ", 0), 0u);
  EXPECT_NE(corpus.out.find("nrefs:1|case:mixed|eff:no|tok:13a|smooth:exp"), std::string::npos);

  const CliRun sentence = run({"score", "--hyp", p(dir / "hyp.txt"), "--ref", p(dir / "ref.txt"), "--sentence-level"});
  ASSERT_EQ(sentence.code, cli::kExitOk);
  EXPECT_EQ(sentence.out.substr(0, sentence.out.find("nrefs")), "BLEU = 48.9\nBLEU = 39.8\n");

  const CliRun bs = run({"score", "--hyp", p(dir / "hyp.txt"), "--ref", p(dir / "ref.txt"), "--confidence",
                      "--resamples", "50"});
  ASSERT_EQ(bs.code, cli::kExitOk);
  EXPECT_NE(bs.out.find("bs:50|seed:12345"), std::string::npos) << bs.out;

  write_file(dir / "short.txt", "one line\n");
  const CliRun mismatch = run({"score", "--hyp", p(dir / "short.txt"), "--ref", p(dir / "ref.txt")});
  EXPECT_EQ(mismatch.code, cli::kExitData);
  EXPECT_NE(mismatch.err.find("LengthMismatch"), std::string::npos);
}

}  // namespace
}  // namespace stclean
