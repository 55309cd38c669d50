#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stclean/corpus.h"
#include "stclean/ctc.h"
#include "stclean/detector.h"

namespace stclean {

// true = misaligned (the positive class).
using LabelSet = std::map<std::string, bool>;

struct CalibrationRow {
  double overrun_tol_s = 0.0;
  double edit_ratio = 0.0;
  std::size_t true_pos = 0;
  std::size_t false_pos = 0;
  std::size_t false_neg = 0;
  std::optional<double> precision;  // undefined when nothing is flagged
  std::optional<double> recall;     // undefined when there are no positives
  std::optional<double> f1;
};

struct CalibrationReport {
  std::vector<CalibrationRow> rows;
};

struct ThresholdPoint {
  double overrun_tol_s = 0.0;
  double edit_ratio = 0.0;
};

struct FilterResult {
  CorpusManifest clean;
  CorpusManifest removed;
};

// Partition by verdict: flagged or errored utterances go to `removed`.
FilterResult filter_corpus(const CorpusManifest& manifest, const std::vector<Verdict>& verdicts);

inline constexpr double kDefaultPad = 0.15;

// New window = [max(0, first span start - pad), min(file end, last span end + pad)].
Utterance fix_boundaries(const Utterance& utt, const AlignmentResult& alignment, double pad_s,
                         double file_duration_s);

struct CorruptionResult {
  CorpusManifest corrupted;
  LabelSet labels;
};

// Looks up a source file's duration by audio_path; nullopt when unknown.
using DurationLookup = std::function<std::optional<double>(const std::string& audio_path)>;

// Shifts the offsets of exactly round(fraction * N) utterances (chosen by
// selection sampling) by +-s, s ~ U[lo, hi], random sign. A sign that would
// leave the file is flipped; if neither fits the shift is clamped.
CorruptionResult corrupt_corpus(const CorpusManifest& manifest, double fraction,
                                std::pair<double, double> shift_range_s, std::uint64_t seed,
                                const DurationLookup& file_duration = {});

// Precision/recall at every grid point. Detection runs once per utterance;
// thresholds are applied to the cached measurements. Errored utterances count
// as flagged.
CalibrationReport calibrate(const CorpusManifest& manifest, const EmissionProvider& provider,
                            const Vocab& vocab, const LabelSet& labels,
                            const std::vector<ThresholdPoint>& grid, unsigned workers = 1);

// Same, over measurements already taken (manifest order).
CalibrationReport calibrate_measured(const CorpusManifest& manifest,
                                     const std::vector<MeasuredUtterance>& measured,
                                     const LabelSet& labels, const std::vector<ThresholdPoint>& grid);

std::vector<ThresholdPoint> threshold_grid(const std::vector<double>& overrun_tols,
                                           const std::vector<double>& edit_ratios);

std::string labels_to_json(const LabelSet& labels);
LabelSet parse_labels_json(const std::string& json_text);
LabelSet read_labels(const std::filesystem::path& path);

// Header: overrun_tol_s,edit_ratio,true_pos,false_pos,false_neg,precision,recall,f1
// Undefined ratios are written as "nan".
std::string calibration_to_csv(const CalibrationReport& report);

}  // namespace stclean
