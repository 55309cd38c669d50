#pragma once

#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stclean/emission.h"

namespace stclean {

inline constexpr double kInfeasibleScore = -std::numeric_limits<double>::infinity();

struct WordSpan {
  std::string word;
  double start_s = 0.0;
  double end_s = 0.0;
};

// Frame range [first_frame, last_frame] occupied by one label of the path.
struct LabelFrames {
  int label = 0;
  Eigen::Index first_frame = 0;
  Eigen::Index last_frame = 0;
};

// Best CTC path for a label sequence.
struct LabelAlignment {
  bool feasible = false;
  double path_log_score = kInfeasibleScore;
  std::vector<int> frame_tokens;  // token emitted at each frame (blank or label)
  std::vector<LabelFrames> labels;
};

struct AlignmentResult {
  std::vector<WordSpan> spans;
  double path_log_score = kInfeasibleScore;
  bool feasible = false;
};

// Fewest frames a CTC path needs: one per label plus one blank between each
// pair of equal neighbours.
std::size_t min_frames_for(std::span<const int> labels);

// Viterbi over the blank-interleaved sequence (length 2L + 1). Ties prefer
// the transition that advances furthest (skip > advance > stay), and the
// final state with the trailing blank over the last label. Infeasible when
// T < min_frames_for(labels); an empty label list aligns every frame to blank.
LabelAlignment align_labels(const EmissionMatrix& em, std::span<const int> labels);

// Labels for normalize_text(transcript): letters as-is, "|" between words.
// Throws CharNotInVocab / EmptyNormalizedTranscript.
std::vector<int> transcript_labels(std::string_view transcript, const Vocab& vocab);

// Word-level forced alignment. Span of a word is
// [first frame of its first char, last frame of its last char + 1] * stride + abs_start.
AlignmentResult force_align(const EmissionMatrix& em, const Vocab& vocab, std::string_view transcript);

// Per-frame argmax (first index on ties), collapse repeats, drop blanks and
// "<...>" specials, "|" becomes a space, whitespace collapsed and trimmed.
std::string greedy_decode(const EmissionMatrix& em, const Vocab& vocab);

}  // namespace stclean
