#include "stclean/synthetic.h"

#include <cmath>

#include "parallel.h"
#include "stclean/audio.h"
#include "stclean/error.h"
#include "stclean/text.h"

namespace stclean {
namespace {

double round_centi(double t) { return std::round(t * 100.0) / 100.0; }

std::size_t pick(SplitMix64& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

}  // namespace

Vocab english_vocab() { return Vocab::from_letters(kEnglishLetters); }

std::string random_sentence(SplitMix64& rng, const SyntheticOptions& opts) {
  static constexpr std::string_view kLetters = "abcdefghijklmnopqrstuvwxyz";
  const std::size_t words = pick(rng, opts.min_words, opts.max_words);
  std::string out;
  for (std::size_t w = 0; w < words; ++w) {
    if (w) out.push_back(' ');
    const std::size_t len = pick(rng, opts.min_word_len, opts.max_word_len);
    for (std::size_t k = 0; k < len; ++k) out.push_back(kLetters[rng.below(kLetters.size())]);
    // An occasional contraction keeps the apostrophe in play.
    if (rng.uniform() < 0.05) out += "'s";
  }
  out.front() = static_cast<char>(out.front() - 'a' + 'A');
  out.push_back('.');
  return out;
}

SyntheticCorpus make_synthetic_corpus(const SyntheticOptions& opts, std::uint64_t seed) {
  if (opts.utterances_per_talk == 0 || opts.min_words == 0 || opts.min_words > opts.max_words ||
      opts.min_word_len == 0 || opts.min_word_len > opts.max_word_len) {
    throw Error(ErrorCode::kInvalidArgument, "bad synthetic corpus options");
  }
  SyntheticCorpus corpus;
  corpus.vocab = english_vocab();
  corpus.manifest.name = "synthetic";
  SplitMix64 rng(seed);

  SyntheticTalk* talk = nullptr;
  double cursor = 0.0;
  for (std::size_t i = 0; i < opts.utterances; ++i) {
    const std::size_t talk_index = i / opts.utterances_per_talk;
    const std::size_t within = i % opts.utterances_per_talk;
    if (within == 0) {
      const std::string wav = "talk_" + std::to_string(talk_index) + ".wav";
      talk = &corpus.talks[wav];
      talk->audio_path = wav;
      cursor = opts.lead_s;
    } else {
      cursor = round_centi(cursor + rng.uniform(opts.pause_min_s, opts.pause_max_s));
    }
    const std::string transcript = random_sentence(rng, opts);
    const auto chars = layout_chars(normalize_text(transcript), cursor, opts.char_s, opts.gap_s);
    talk->chars.insert(talk->chars.end(), chars.begin(), chars.end());
    const double speech_start = chars.front().start_s;
    const double speech_end = chars.back().end_s;
    cursor = speech_end;
    talk->duration_s = round_centi(speech_end + opts.lead_s);

    Utterance u;
    u.id = "talk_" + std::to_string(talk_index) + "_" + std::to_string(within);
    u.audio_path = talk->audio_path;
    u.offset_s = std::max(0.0, speech_start - opts.pad_s);
    u.duration_s = speech_end + opts.pad_s - u.offset_s;
    u.transcript = transcript;
    u.translation = "Übersetzung " + std::to_string(i) + ": " + transcript;
    u.speaker_id = "spk." + std::to_string(talk_index);
    corpus.manifest.utterances.push_back(std::move(u));
  }
  return corpus;
}

SyntheticEmissionProvider::SyntheticEmissionProvider(const SyntheticCorpus& corpus, double stride_s,
                                                     double expand_s, double noise_eps, std::uint64_t seed)
    : corpus_(corpus), stride_s_(stride_s), expand_s_(expand_s), noise_eps_(noise_eps), seed_(seed) {}

double SyntheticEmissionProvider::file_duration(const std::string& audio_path) const {
  const auto it = corpus_.talks.find(audio_path);
  if (it == corpus_.talks.end()) throw Error(ErrorCode::kMissingFile, audio_path);
  return it->second.duration_s;
}

EmissionPair SyntheticEmissionProvider::emissions(const Utterance& utt) const {
  const auto it = corpus_.talks.find(utt.audio_path);
  if (it == corpus_.talks.end()) throw Error(ErrorCode::kMissingFile, utt.audio_path);
  const SyntheticTalk& talk = it->second;
  const ClampedWindow original = expand_window(utt.offset_s, utt.duration_s, 0.0, talk.duration_s);
  const ClampedWindow expanded = expand_window(utt.offset_s, utt.duration_s, expand_s_, talk.duration_s);
  const std::uint64_t key = hash_string(utt.id.data(), utt.id.size());
  return {render_emissions(corpus_.vocab, talk.chars, stride_s_, expanded.actual, noise_eps_,
                           derive_seed(seed_, 2 * key)),
          render_emissions(corpus_.vocab, talk.chars, stride_s_, original.actual, noise_eps_,
                           derive_seed(seed_, 2 * key + 1))};
}

void export_emissions(const CorpusManifest& manifest, const EmissionProvider& provider, const Vocab& vocab,
                      const std::filesystem::path& dir, unsigned workers) {
  std::filesystem::create_directories(dir);
  save_vocab(vocab, dir / "vocab.txt");
  internal::parallel_for(manifest.size(), workers, [&](std::size_t i) {
    const Utterance& u = manifest.utterances[i];
    const EmissionPair pair = provider.emissions(u);
    save_emission(pair.expanded, dir / (u.id + ".exp.emit"));
    save_emission(pair.original, dir / (u.id + ".orig.emit"));
  });
}

}  // namespace stclean
