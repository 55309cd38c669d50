#include "stclean/detector.h"

#include <algorithm>

#include "json.hpp"
#include "parallel.h"
#include "stclean/error.h"
#include "stclean/metrics.h"
#include "stclean/text.h"

namespace stclean {
namespace {

constexpr Reason kAllReasons[] = {Reason::kOverrunStart, Reason::kOverrunEnd, Reason::kEditDistance,
                                  Reason::kAlignmentInfeasible};

Reason reason_from_string(std::string_view name) {
  for (Reason r : kAllReasons) {
    if (to_string(r) == name) return r;
  }
  throw Error(ErrorCode::kMalformedEntry, "unknown reason '" + std::string(name) + "'");
}

void check_vocab(const EmissionMatrix& em, const Vocab& vocab, const char* which) {
  if (static_cast<std::size_t>(em.vocab_size()) != vocab.size()) {
    throw Error(ErrorCode::kInvalidArgument, std::string(which) + " emission has " +
                                                 std::to_string(em.vocab_size()) + " columns, vocab has " +
                                                 std::to_string(vocab.size()) + " tokens");
  }
}

bool is_sentence_punct(char c) {
  return c == '.' || c == ',' || c == ';' || c == '!' || c == '?' || c == '"' || c == '(' || c == ')' ||
         c == ':';
}

}  // namespace

void DetectorConfig::validate() const {
  if (!(expand_s > 0.0) || !(overrun_tol_s > 0.0) || !(edit_ratio > 0.0) || max_name_len == 0) {
    throw Error(ErrorCode::kInvalidArgument, "detector thresholds must be positive");
  }
  if (edit_ratio > 2.0) throw Error(ErrorCode::kInvalidArgument, "edit_ratio above 2 makes the rule vacuous");
}

std::string_view to_string(Reason reason) {
  switch (reason) {
    case Reason::kOverrunStart: return "OverrunStart";
    case Reason::kOverrunEnd: return "OverrunEnd";
    case Reason::kEditDistance: return "EditDistance";
    case Reason::kAlignmentInfeasible: return "AlignmentInfeasible";
  }
  return "Unknown";
}

bool Verdict::has_reason(Reason r) const {
  return std::find(reasons.begin(), reasons.end(), r) != reasons.end();
}

EmissionPair EmissionDirectory::emissions(const Utterance& utt) const {
  return {load_emission(expanded_path(utt.id)), load_emission(original_path(utt.id))};
}

Measurement measure_utterance(const Utterance& utt, const EmissionMatrix& em_expanded,
                              const EmissionMatrix& em_original, const Vocab& vocab) {
  check_vocab(em_expanded, vocab, "expanded");
  check_vocab(em_original, vocab, "original");
  const std::string reference = normalize_text(utt.transcript);

  Measurement m;
  const AlignmentResult alignment = force_align(em_expanded, vocab, utt.transcript);
  m.feasible = alignment.feasible;
  if (alignment.feasible) {
    const double first = alignment.spans.front().start_s;
    const double last = alignment.spans.back().end_s;
    m.aligned_span = std::make_pair(first, last);
    m.raw_overrun_start_s = std::max(0.0, utt.offset_s - first);
    m.raw_overrun_end_s = std::max(0.0, last - utt.end_s());
  }
  m.decoded = normalize_text(greedy_decode(em_original, vocab));
  m.edit_distance = levenshtein(m.decoded, reference);
  m.reference_length = reference.size();
  return m;
}

Verdict judge(const Utterance& utt, const Measurement& m, const DetectorConfig& cfg) {
  Verdict v;
  v.utterance_id = utt.id;
  if (m.feasible) {
    if (m.raw_overrun_start_s > cfg.overrun_tol_s) {
      v.reasons.push_back(Reason::kOverrunStart);
      v.overrun_start_s = m.raw_overrun_start_s;
    }
    if (m.raw_overrun_end_s > cfg.overrun_tol_s) {
      v.reasons.push_back(Reason::kOverrunEnd);
      v.overrun_end_s = m.raw_overrun_end_s;
    }
  }
  if (static_cast<double>(m.edit_distance) > cfg.edit_ratio * static_cast<double>(m.reference_length)) {
    v.reasons.push_back(Reason::kEditDistance);
  }
  if (!m.feasible) v.reasons.push_back(Reason::kAlignmentInfeasible);
  v.flagged = !v.reasons.empty();
  v.edit_distance = m.edit_distance;
  v.edit_ratio_observed =
      m.reference_length ? static_cast<double>(m.edit_distance) / static_cast<double>(m.reference_length) : 0.0;
  v.decoded_transcript = m.decoded;
  v.aligned_span = m.aligned_span;
  return v;
}

Verdict detect_utterance(const Utterance& utt, const EmissionMatrix& em_expanded,
                         const EmissionMatrix& em_original, const Vocab& vocab,
                         const DetectorConfig& cfg) {
  return judge(utt, measure_utterance(utt, em_expanded, em_original, vocab), cfg);
}

std::vector<MeasuredUtterance> measure_corpus(const CorpusManifest& manifest, const EmissionProvider& provider,
                                              const Vocab& vocab, unsigned workers) {
  std::vector<MeasuredUtterance> out(manifest.size());
  internal::parallel_for(manifest.size(), workers, [&](std::size_t i) {
    const Utterance& utt = manifest.utterances[i];
    try {
      const EmissionPair pair = provider.emissions(utt);
      out[i].measurement = measure_utterance(utt, pair.expanded, pair.original, vocab);
    } catch (const std::exception& e) {
      out[i].error = e.what();
    }
  });
  return out;
}

std::vector<Verdict> detect_corpus(const CorpusManifest& manifest, const EmissionProvider& provider,
                                   const Vocab& vocab, const DetectorConfig& cfg, unsigned workers) {
  cfg.validate();
  const auto measured = measure_corpus(manifest, provider, vocab, workers);
  std::vector<Verdict> verdicts;
  verdicts.reserve(measured.size());
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const Utterance& utt = manifest.utterances[i];
    if (measured[i].measurement) {
      verdicts.push_back(judge(utt, *measured[i].measurement, cfg));
    } else {
      Verdict v;
      v.utterance_id = utt.id;
      v.error = measured[i].error;
      verdicts.push_back(std::move(v));
    }
  }
  return verdicts;
}

std::optional<SpeakerName> detect_speaker_name(std::string_view text, std::size_t max_name_len) {
  const auto colon = text.find(": ");
  if (colon == std::string_view::npos || colon == 0) return std::nullopt;
  const std::string_view prefix = text.substr(0, colon);
  if (utf8_length(prefix) >= max_name_len) return std::nullopt;
  if (std::any_of(prefix.begin(), prefix.end(), is_sentence_punct)) return std::nullopt;
  const auto tokens = split_whitespace(prefix);
  if (tokens.empty() || tokens.size() > 3) return std::nullopt;
  for (const auto& token : tokens) {
    if (!(token.front() >= 'A' && token.front() <= 'Z')) return std::nullopt;
  }
  SpeakerName out;
  out.name = std::string(trim(prefix));
  out.remainder = std::string(trim(text.substr(colon + 2)));
  return out;
}

double speaker_name_rate(const CorpusManifest& manifest, const DetectorConfig& cfg) {
  if (manifest.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& u : manifest.utterances) {
    if (detect_speaker_name(u.transcript, cfg.max_name_len)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(manifest.size());
}

std::string verdict_to_json(const Verdict& v) {
  nlohmann::ordered_json j;
  j["id"] = v.utterance_id;
  j["flagged"] = v.flagged;
  j["reasons"] = nlohmann::ordered_json::array();
  for (Reason r : v.reasons) j["reasons"].push_back(std::string(to_string(r)));
  j["overrun_start_s"] = v.overrun_start_s;
  j["overrun_end_s"] = v.overrun_end_s;
  j["edit_distance"] = v.edit_distance;
  j["edit_ratio_observed"] = v.edit_ratio_observed;
  j["decoded"] = v.decoded_transcript;
  if (v.aligned_span) {
    j["aligned_span"] = {v.aligned_span->first, v.aligned_span->second};
  } else {
    j["aligned_span"] = nullptr;
  }
  if (v.error) j["error"] = *v.error;
  return j.dump();
}

Verdict verdict_from_json(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    Verdict v;
    v.utterance_id = j.at("id").get<std::string>();
    v.flagged = j.at("flagged").get<bool>();
    for (const auto& r : j.at("reasons")) v.reasons.push_back(reason_from_string(r.get<std::string>()));
    v.overrun_start_s = j.at("overrun_start_s").get<double>();
    v.overrun_end_s = j.at("overrun_end_s").get<double>();
    v.edit_distance = j.at("edit_distance").get<std::size_t>();
    v.edit_ratio_observed = j.at("edit_ratio_observed").get<double>();
    v.decoded_transcript = j.at("decoded").get<std::string>();
    if (!j.at("aligned_span").is_null()) {
      v.aligned_span = std::make_pair(j["aligned_span"].at(0).get<double>(), j["aligned_span"].at(1).get<double>());
    }
    if (j.contains("error")) v.error = j["error"].get<std::string>();
    if (v.flagged != !v.reasons.empty()) throw Error(ErrorCode::kMalformedEntry, "flagged disagrees with reasons");
    return v;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedEntry, std::string("verdict json: ") + e.what());
  }
}

std::string verdicts_to_jsonl(const std::vector<Verdict>& verdicts) {
  std::string out;
  for (const auto& v : verdicts) {
    out += verdict_to_json(v);
    out += '\n';
  }
  return out;
}

std::vector<Verdict> read_verdicts(const std::filesystem::path& path) {
  std::vector<Verdict> out;
  for (const auto& line : read_lines(path)) {
    if (trim(line).empty()) continue;
    out.push_back(verdict_from_json(line));
  }
  return out;
}

}  // namespace stclean
