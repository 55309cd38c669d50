#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "stclean/corpus.h"
#include "stclean/detector.h"
#include "stclean/emission.h"
#include "stclean/rng.h"

namespace stclean {

// Character timeline of one synthetic source file.
struct SyntheticTalk {
  std::string audio_path;
  double duration_s = 0.0;
  std::vector<CharTiming> chars;  // sorted, non-overlapping
};

struct SyntheticOptions {
  std::size_t utterances = 100;
  std::size_t utterances_per_talk = 10;
  std::size_t min_words = 3;
  std::size_t max_words = 10;
  std::size_t min_word_len = 2;
  std::size_t max_word_len = 8;
  double char_s = 0.06;     // must be >= the emission stride
  double gap_s = 0.02;      // blank after every char; >= stride keeps repeats apart
  double pause_min_s = 1.2; // silence between consecutive utterances; above the
                            // default expansion so clean expanded windows hold no
                            // neighbouring speech
  double pause_max_s = 2.0;
  double lead_s = 1.5;      // silence at both file ends
  double pad_s = 0.0;       // slack of the declared window around the speech
};

struct SyntheticCorpus {
  CorpusManifest manifest;
  std::map<std::string, SyntheticTalk> talks;  // keyed by audio_path
  Vocab vocab;
};

// Letters in the order of a wav2vec2 character vocabulary.
inline constexpr const char* kEnglishLetters = "ETAONIHSRDLUMWCFGYPBVK'XJQZ";

Vocab english_vocab();

// A sentence of random lowercase words, first letter capitalized, ending in ".".
std::string random_sentence(SplitMix64& rng, const SyntheticOptions& opts);

// Talks of consecutive utterances whose declared windows match the speech
// (plus pad_s), so every utterance starts out correctly aligned.
SyntheticCorpus make_synthetic_corpus(const SyntheticOptions& opts, std::uint64_t seed);

// Renders emissions for an utterance's original and expanded windows from the
// talk timeline, so the audio around a shifted window contains whatever the
// neighbouring speech says there.
class SyntheticEmissionProvider final : public EmissionProvider {
 public:
  SyntheticEmissionProvider(const SyntheticCorpus& corpus, double stride_s, double expand_s, double noise_eps,
                            std::uint64_t seed);

  EmissionPair emissions(const Utterance& utt) const override;
  double file_duration(const std::string& audio_path) const;

 private:
  const SyntheticCorpus& corpus_;
  double stride_s_;
  double expand_s_;
  double noise_eps_;
  std::uint64_t seed_;
};

// Writes <dir>/<id>.orig.emit, <dir>/<id>.exp.emit for every utterance of
// `manifest` plus <dir>/vocab.txt.
void export_emissions(const CorpusManifest& manifest, const EmissionProvider& provider, const Vocab& vocab,
                      const std::filesystem::path& dir, unsigned workers = 1);

}  // namespace stclean
