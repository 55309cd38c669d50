#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stclean/corpus.h"
#include "stclean/ctc.h"
#include "stclean/emission.h"

namespace stclean {

struct DetectorConfig {
  double expand_s = 1.0;        // audio added at both ends before aligning
  double overrun_tol_s = 0.15;  // allowed alignment overrun past the window
  double edit_ratio = 0.7;      // max edit distance per normalized char
  std::size_t max_name_len = 20;

  // Throws InvalidArgument on non-positive thresholds or edit_ratio > 2.
  void validate() const;
};

enum class Reason { kOverrunStart, kOverrunEnd, kEditDistance, kAlignmentInfeasible };

std::string_view to_string(Reason reason);

// Raw, threshold-free observations for one utterance. Verdicts for any
// thresholds are a pure function of this.
struct Measurement {
  bool feasible = false;
  double raw_overrun_start_s = 0.0;  // max(0, offset - first span start)
  double raw_overrun_end_s = 0.0;    // max(0, last span end - window end)
  std::optional<std::pair<double, double>> aligned_span;
  std::size_t edit_distance = 0;
  std::size_t reference_length = 0;  // normalized transcript characters
  std::string decoded;               // normalized decode of the original window
};

struct Verdict {
  std::string utterance_id;
  bool flagged = false;
  std::vector<Reason> reasons;  // in enum order
  double overrun_start_s = 0.0;  // raw overrun when it exceeds the tolerance, else 0
  double overrun_end_s = 0.0;
  std::size_t edit_distance = 0;
  double edit_ratio_observed = 0.0;
  std::string decoded_transcript;
  std::optional<std::pair<double, double>> aligned_span;
  // Set when detection could not run (e.g. CharNotInVocab); such entries are
  // not flagged but never count as clean.
  std::optional<std::string> error;

  bool has_reason(Reason r) const;
  bool removable() const { return flagged || error.has_value(); }
};

struct EmissionPair {
  EmissionMatrix expanded;
  EmissionMatrix original;
};

// Source of the two emission matrices per utterance. Implementations must
// allow concurrent calls.
class EmissionProvider {
 public:
  virtual ~EmissionProvider() = default;
  virtual EmissionPair emissions(const Utterance& utt) const = 0;
};

// Reads <dir>/<id>.exp.emit and <dir>/<id>.orig.emit.
class EmissionDirectory final : public EmissionProvider {
 public:
  explicit EmissionDirectory(std::filesystem::path dir) : dir_(std::move(dir)) {}
  EmissionPair emissions(const Utterance& utt) const override;

  std::filesystem::path expanded_path(const std::string& id) const { return dir_ / (id + ".exp.emit"); }
  std::filesystem::path original_path(const std::string& id) const { return dir_ / (id + ".orig.emit"); }

 private:
  std::filesystem::path dir_;
};

Measurement measure_utterance(const Utterance& utt, const EmissionMatrix& em_expanded,
                              const EmissionMatrix& em_original, const Vocab& vocab);

Verdict judge(const Utterance& utt, const Measurement& m, const DetectorConfig& cfg);

// Overrun rule on the expanded window plus edit-distance rule on the original
// window. Throws EmptyNormalizedTranscript / CharNotInVocab.
Verdict detect_utterance(const Utterance& utt, const EmissionMatrix& em_expanded,
                         const EmissionMatrix& em_original, const Vocab& vocab,
                         const DetectorConfig& cfg);

// Measurement, or the error message that prevented it.
struct MeasuredUtterance {
  std::optional<Measurement> measurement;
  std::optional<std::string> error;
};

// Fans out over `workers` threads; results are in manifest order.
std::vector<MeasuredUtterance> measure_corpus(const CorpusManifest& manifest, const EmissionProvider& provider,
                                              const Vocab& vocab, unsigned workers = 1);

std::vector<Verdict> detect_corpus(const CorpusManifest& manifest, const EmissionProvider& provider,
                                   const Vocab& vocab, const DetectorConfig& cfg, unsigned workers = 1);

struct SpeakerName {
  std::string name;
  std::string remainder;
};

// Prefix before the first ": " when it is shorter than max_name_len code
// points, has 1-3 tokens each starting with an uppercase letter, and holds no
// sentence punctuation.
std::optional<SpeakerName> detect_speaker_name(std::string_view text, std::size_t max_name_len);

double speaker_name_rate(const CorpusManifest& manifest, const DetectorConfig& cfg);

// JSONL line: {"id","flagged","reasons","overrun_start_s","overrun_end_s",
// "edit_distance","edit_ratio_observed","decoded","aligned_span"[,"error"]}
std::string verdict_to_json(const Verdict& v);
Verdict verdict_from_json(std::string_view line);
std::string verdicts_to_jsonl(const std::vector<Verdict>& verdicts);
std::vector<Verdict> read_verdicts(const std::filesystem::path& path);

}  // namespace stclean
