#include "stclean/curation.h"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "json.hpp"
#include "stclean/error.h"
#include "stclean/rng.h"

namespace stclean {
namespace {

std::string csv_ratio(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string("nan");
}

}  // namespace

FilterResult filter_corpus(const CorpusManifest& manifest, const std::vector<Verdict>& verdicts) {
  std::unordered_map<std::string, const Verdict*> by_id;
  for (const auto& v : verdicts) {
    if (!by_id.emplace(v.utterance_id, &v).second) {
      throw Error(ErrorCode::kVerdictCoverageMismatch, "duplicate verdict for '" + v.utterance_id + "'");
    }
  }
  if (by_id.size() != manifest.size()) {
    throw Error(ErrorCode::kVerdictCoverageMismatch, std::to_string(verdicts.size()) + " verdicts for " +
                                                         std::to_string(manifest.size()) + " utterances");
  }
  FilterResult out;
  out.clean.name = manifest.name;
  out.removed.name = manifest.name;
  for (const auto& u : manifest.utterances) {
    const auto it = by_id.find(u.id);
    if (it == by_id.end()) throw Error(ErrorCode::kVerdictCoverageMismatch, "no verdict for '" + u.id + "'");
    (it->second->removable() ? out.removed : out.clean).utterances.push_back(u);
  }
  return out;
}

Utterance fix_boundaries(const Utterance& utt, const AlignmentResult& alignment, double pad_s,
                         double file_duration_s) {
  if (!alignment.feasible || alignment.spans.empty()) {
    throw Error(ErrorCode::kInfeasibleAlignment, "cannot fix '" + utt.id + "' without an alignment");
  }
  const double start = std::max(0.0, alignment.spans.front().start_s - pad_s);
  const double end = std::min(file_duration_s, alignment.spans.back().end_s + pad_s);
  if (!(end > start)) throw Error(ErrorCode::kInvalidArgument, "fixed window for '" + utt.id + "' is empty");
  Utterance out = utt;
  out.offset_s = start;
  out.duration_s = end - start;
  return out;
}

CorruptionResult corrupt_corpus(const CorpusManifest& manifest, double fraction,
                                std::pair<double, double> shift_range_s, std::uint64_t seed,
                                const DurationLookup& file_duration) {
  const auto [lo, hi] = shift_range_s;
  if (!(fraction >= 0.0 && fraction <= 1.0) || !(lo >= 0.0 && lo <= hi)) {
    throw Error(ErrorCode::kInvalidArgument, "need 0 <= fraction <= 1 and 0 <= lo <= hi");
  }
  CorruptionResult out;
  out.corrupted = manifest;
  for (const auto& u : manifest.utterances) out.labels[u.id] = false;

  const std::size_t total = manifest.size();
  const auto target = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));
  SplitMix64 rng(seed);
  std::size_t chosen = 0;
  for (std::size_t i = 0; i < total && chosen < target; ++i) {
    if (static_cast<double>(total - i) * rng.uniform() >= static_cast<double>(target - chosen)) continue;
    ++chosen;
    Utterance& u = out.corrupted.utterances[i];
    const double shift = rng.uniform(lo, hi);
    const bool positive = rng.uniform() < 0.5;
    const std::optional<double> limit = file_duration ? file_duration(u.audio_path) : std::nullopt;
    const double max_offset = limit ? std::max(0.0, *limit - u.duration_s) : HUGE_VAL;
    auto fits = [&](double offset) { return offset >= 0.0 && offset <= max_offset; };
    const double forward = u.offset_s + shift;
    const double backward = u.offset_s - shift;
    double offset = positive ? forward : backward;
    if (!fits(offset)) offset = positive ? backward : forward;
    if (!fits(offset)) offset = std::clamp(positive ? forward : backward, 0.0, max_offset);
    u.offset_s = offset;
    out.labels[u.id] = true;
  }
  return out;
}

std::vector<ThresholdPoint> threshold_grid(const std::vector<double>& overrun_tols,
                                           const std::vector<double>& edit_ratios) {
  std::vector<ThresholdPoint> grid;
  for (double tol : overrun_tols) {
    for (double ratio : edit_ratios) grid.push_back({tol, ratio});
  }
  return grid;
}

CalibrationReport calibrate_measured(const CorpusManifest& manifest,
                                     const std::vector<MeasuredUtterance>& measured,
                                     const LabelSet& labels, const std::vector<ThresholdPoint>& grid) {
  if (measured.size() != manifest.size()) {
    throw Error(ErrorCode::kInvalidArgument, "measurements do not match the manifest");
  }
  std::vector<bool> positive(manifest.size());
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto it = labels.find(manifest.utterances[i].id);
    if (it == labels.end()) {
      throw Error(ErrorCode::kLabelCoverageMismatch, "no label for '" + manifest.utterances[i].id + "'");
    }
    positive[i] = it->second;
  }

  CalibrationReport report;
  for (const ThresholdPoint& point : grid) {
    DetectorConfig cfg;
    cfg.overrun_tol_s = point.overrun_tol_s;
    cfg.edit_ratio = point.edit_ratio;
    CalibrationRow row;
    row.overrun_tol_s = point.overrun_tol_s;
    row.edit_ratio = point.edit_ratio;
    for (std::size_t i = 0; i < manifest.size(); ++i) {
      const bool flagged = !measured[i].measurement ||
                           judge(manifest.utterances[i], *measured[i].measurement, cfg).flagged;
      if (flagged && positive[i]) ++row.true_pos;
      if (flagged && !positive[i]) ++row.false_pos;
      if (!flagged && positive[i]) ++row.false_neg;
    }
    if (row.true_pos + row.false_pos > 0) {
      row.precision = static_cast<double>(row.true_pos) / static_cast<double>(row.true_pos + row.false_pos);
    }
    if (row.true_pos + row.false_neg > 0) {
      row.recall = static_cast<double>(row.true_pos) / static_cast<double>(row.true_pos + row.false_neg);
    }
    if (row.precision && row.recall && *row.precision + *row.recall > 0.0) {
      row.f1 = 2.0 * *row.precision * *row.recall / (*row.precision + *row.recall);
    }
    report.rows.push_back(row);
  }
  return report;
}

CalibrationReport calibrate(const CorpusManifest& manifest, const EmissionProvider& provider,
                            const Vocab& vocab, const LabelSet& labels,
                            const std::vector<ThresholdPoint>& grid, unsigned workers) {
  for (const auto& u : manifest.utterances) {
    if (!labels.count(u.id)) throw Error(ErrorCode::kLabelCoverageMismatch, "no label for '" + u.id + "'");
  }
  return calibrate_measured(manifest, measure_corpus(manifest, provider, vocab, workers), labels, grid);
}

std::string labels_to_json(const LabelSet& labels) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& [id, misaligned] : labels) doc[id] = misaligned;
  return doc.dump(2) + "\n";
}

LabelSet parse_labels_json(const std::string& json_text) {
  try {
    const auto doc = nlohmann::json::parse(json_text);
    if (!doc.is_object()) throw Error(ErrorCode::kMalformedEntry, "labels json must be an object");
    LabelSet labels;
    for (const auto& [id, value] : doc.items()) {
      if (!value.is_boolean()) throw Error(ErrorCode::kMalformedEntry, "label for '" + id + "' is not a bool");
      labels[id] = value.get<bool>();
    }
    return labels;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedEntry, std::string("labels json: ") + e.what());
  }
}

LabelSet read_labels(const std::filesystem::path& path) {
  return parse_labels_json(read_file(path));
}

std::string calibration_to_csv(const CalibrationReport& report) {
  std::string out = "overrun_tol_s,edit_ratio,true_pos,false_pos,false_neg,precision,recall,f1\n";
  for (const auto& row : report.rows) {
    out += format_double(row.overrun_tol_s) + "," + format_double(row.edit_ratio) + "," +
           std::to_string(row.true_pos) + "," + std::to_string(row.false_pos) + "," +
           std::to_string(row.false_neg) + "," + csv_ratio(row.precision) + "," + csv_ratio(row.recall) + "," +
           csv_ratio(row.f1) + "\n";
  }
  return out;
}

}  // namespace stclean
