#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "stclean/audio.h"

namespace stclean {

using LogProbMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Log-probability used for "impossible" entries in synthesized emissions.
// Finite, so paths through such frames still compare by how many they use.
inline constexpr float kLogZero = -1.0e10f;

// Character vocabulary of a CTC acoustic model: blank at index 0 and "|" as
// the word delimiter.
class Vocab {
 public:
  static constexpr int kBlank = 0;
  static constexpr const char* kWordDelimiter = "|";

  Vocab() = default;
  explicit Vocab(std::vector<std::string> tokens);

  // Blank "<pad>", "|", then the symbols of `letters` one per character.
  static Vocab from_letters(std::string_view letters);

  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }
  const std::string& token(int index) const { return tokens_.at(static_cast<std::size_t>(index)); }

  std::optional<int> find(const std::string& token) const;
  // Index for a normalized-text character; space maps to the word delimiter.
  std::optional<int> find_char(char c) const;
  std::optional<int> word_delimiter() const { return find(kWordDelimiter); }

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// T x V frame log-probabilities; frame t covers
// [abs_start_s + t * stride_s, abs_start_s + (t + 1) * stride_s).
struct EmissionMatrix {
  LogProbMatrix log_probs;
  float stride_s = 0.02f;
  double abs_start_s = 0.0;

  Eigen::Index frames() const { return log_probs.rows(); }
  Eigen::Index vocab_size() const { return log_probs.cols(); }
  double frame_start(Eigen::Index t) const { return abs_start_s + static_cast<double>(t) * stride_s; }
  double end_s() const { return frame_start(frames()); }
};

// Largest |logsumexp(row)| over all rows.
double max_row_normalization_error(const EmissionMatrix& em);

// Throws InvalidArgument unless frames >= 1, vocab >= 2 and every row's
// log-sum-exp is within `tolerance` of 0.
void validate_emission(const EmissionMatrix& em, double tolerance = 1e-3);

// Binary layout, all little-endian:
//   "EMIT" | u32 version=1 | u32 T | u32 V | f32 stride_s | f64 abs_start_s |
//   T*V f32 log-probs, row-major
void save_emission(const EmissionMatrix& em, const std::filesystem::path& path);
EmissionMatrix load_emission(const std::filesystem::path& path);
std::string encode_emission(const EmissionMatrix& em);
EmissionMatrix decode_emission(std::string_view bytes);

// Sidecar: UTF-8, one token per line, line 0 is blank.
void save_vocab(const Vocab& vocab, const std::filesystem::path& path);
Vocab load_vocab(const std::filesystem::path& path);

struct CharTiming {
  char symbol = 0;  // normalized-text character; ' ' stands for the word delimiter
  double start_s = 0.0;
  double end_s = 0.0;
};

// Lays out the characters of already-normalized text back to back from
// start_s: each character lasts char_s and is followed by gap_s of silence.
std::vector<CharTiming> layout_chars(std::string_view normalized, double start_s, double char_s,
                                     double gap_s);

// Emissions for an arbitrary stretch of a character timeline. A frame whose
// centre falls inside a character's interval puts 1 - noise_eps on that
// character; other frames put it on blank. The remaining noise_eps is spread
// over the other tokens with seeded weights drawn from U(0.5, 1.5).
EmissionMatrix render_emissions(const Vocab& vocab, std::span<const CharTiming> chars,
                                double stride_s, TimeWindow window, double noise_eps,
                                std::uint64_t seed);

// render_emissions after checking that char_times spell normalize_text(transcript).
EmissionMatrix synthesize_emissions(std::string_view transcript, const Vocab& vocab,
                                    std::span<const CharTiming> char_times, double stride_s,
                                    TimeWindow window, double noise_eps, std::uint64_t seed);

}  // namespace stclean
