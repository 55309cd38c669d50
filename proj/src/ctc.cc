#include "stclean/ctc.h"

#include <cstdint>

#include "stclean/error.h"
#include "stclean/text.h"

namespace stclean {
namespace {

// Backpointer codes: how many extended states the path advanced into s.
enum Step : std::uint8_t { kStay = 0, kAdvance = 1, kSkip = 2 };

}  // namespace

std::size_t min_frames_for(std::span<const int> labels) {
  std::size_t frames = labels.size();
  for (std::size_t i = 1; i < labels.size(); ++i) {
    if (labels[i] == labels[i - 1]) ++frames;
  }
  return frames;
}

LabelAlignment align_labels(const EmissionMatrix& em, std::span<const int> labels) {
  const Eigen::Index frames = em.frames();
  LabelAlignment out;
  if (frames == 0 || min_frames_for(labels) > static_cast<std::size_t>(frames)) return out;
  for (int label : labels) {
    if (label <= Vocab::kBlank || label >= em.vocab_size()) {
      throw Error(ErrorCode::kInvalidArgument, "label index out of range: " + std::to_string(label));
    }
  }

  // Extended sequence: blank, l0, blank, l1, ..., blank.
  const auto states = static_cast<Eigen::Index>(2 * labels.size() + 1);
  auto token_at = [&](Eigen::Index s) { return s % 2 == 0 ? Vocab::kBlank : labels[static_cast<std::size_t>(s / 2)]; };
  auto can_skip = [&](Eigen::Index s) { return s % 2 == 1 && s >= 3 && token_at(s) != token_at(s - 2); };

  Eigen::MatrixXd score = Eigen::MatrixXd::Constant(frames, states, kInfeasibleScore);
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> back =
      Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(frames, states);

  score(0, 0) = em.log_probs(0, token_at(0));
  if (states > 1) score(0, 1) = em.log_probs(0, token_at(1));

  for (Eigen::Index t = 1; t < frames; ++t) {
    // States beyond 2t + 1 are unreachable at frame t.
    const Eigen::Index reach = std::min<Eigen::Index>(states, 2 * t + 2);
    for (Eigen::Index s = 0; s < reach; ++s) {
      double best = kInfeasibleScore;
      Step step = kStay;
      if (can_skip(s) && score(t - 1, s - 2) > best) {
        best = score(t - 1, s - 2);
        step = kSkip;
      }
      if (s >= 1 && score(t - 1, s - 1) > best) {
        best = score(t - 1, s - 1);
        step = kAdvance;
      }
      if (score(t - 1, s) > best) {
        best = score(t - 1, s);
        step = kStay;
      }
      if (best == kInfeasibleScore) continue;
      score(t, s) = best + em.log_probs(t, token_at(s));
      back(t, s) = step;
    }
  }

  Eigen::Index state = states - 1;
  if (states > 1 && score(frames - 1, states - 2) > score(frames - 1, states - 1)) state = states - 2;
  if (score(frames - 1, state) == kInfeasibleScore) return out;

  out.feasible = true;
  out.path_log_score = score(frames - 1, state);
  std::vector<Eigen::Index> path(static_cast<std::size_t>(frames));
  for (Eigen::Index t = frames - 1; t >= 0; --t) {
    path[static_cast<std::size_t>(t)] = state;
    if (t > 0) state -= back(t, state);
  }

  out.frame_tokens.resize(path.size());
  for (std::size_t t = 0; t < path.size(); ++t) {
    const Eigen::Index s = path[t];
    out.frame_tokens[t] = token_at(s);
    if (s % 2 == 1) {
      const auto label_index = static_cast<std::size_t>(s / 2);
      const auto frame = static_cast<Eigen::Index>(t);
      if (out.labels.size() == label_index) {
        out.labels.push_back({labels[label_index], frame, frame});
      } else {
        out.labels.back().last_frame = frame;
      }
    }
  }
  return out;
}

std::vector<int> transcript_labels(std::string_view transcript, const Vocab& vocab) {
  const std::string normalized = normalize_text(transcript);
  if (normalized.empty()) {
    throw Error(ErrorCode::kEmptyNormalizedTranscript, "'" + std::string(transcript) + "'");
  }
  std::vector<int> labels;
  labels.reserve(normalized.size());
  for (char c : normalized) {
    const auto id = vocab.find_char(c);
    if (!id) throw Error(ErrorCode::kCharNotInVocab, c == ' ' ? std::string("word delimiter '|'") : std::string("'") + c + "'");
    labels.push_back(*id);
  }
  return labels;
}

AlignmentResult force_align(const EmissionMatrix& em, const Vocab& vocab, std::string_view transcript) {
  const std::vector<int> labels = transcript_labels(transcript, vocab);
  const LabelAlignment path = align_labels(em, labels);
  AlignmentResult result;
  if (!path.feasible) return result;
  result.feasible = true;
  result.path_log_score = path.path_log_score;

  const std::string normalized = normalize_text(transcript);
  std::size_t i = 0;
  while (i < normalized.size()) {
    std::size_t j = normalized.find(' ', i);
    if (j == std::string::npos) j = normalized.size();
    WordSpan span;
    span.word = normalized.substr(i, j - i);
    span.start_s = em.frame_start(path.labels[i].first_frame);
    span.end_s = em.frame_start(path.labels[j - 1].last_frame + 1);
    result.spans.push_back(std::move(span));
    i = j + 1;
  }
  return result;
}

std::string greedy_decode(const EmissionMatrix& em, const Vocab& vocab) {
  std::string text;
  int previous = -1;
  for (Eigen::Index t = 0; t < em.frames(); ++t) {
    int best = 0;
    float best_value = em.log_probs(t, 0);
    for (Eigen::Index v = 1; v < em.vocab_size(); ++v) {
      if (em.log_probs(t, v) > best_value) {
        best_value = em.log_probs(t, v);
        best = static_cast<int>(v);
      }
    }
    if (best != previous && best != Vocab::kBlank) {
      const std::string& token = vocab.token(best);
      const bool special = token.size() > 1 && token.front() == '<' && token.back() == '>';
      if (token == Vocab::kWordDelimiter) {
        text.push_back(' ');
      } else if (!special) {
        text += token;
      }
    }
    previous = best;
  }
  return join(split_whitespace(text), " ");
}

}  // namespace stclean
