#include "stclean/cli.h"

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "stclean/audio.h"
#include "stclean/corpus.h"
#include "stclean/ctc.h"
#include "stclean/curation.h"
#include "stclean/detector.h"
#include "stclean/emission.h"
#include "stclean/error.h"
#include "stclean/metrics.h"
#include "stclean/synthetic.h"

namespace stclean::cli {
namespace fs = std::filesystem;
namespace {

struct CorpusArgs {
  std::string corpus;
  std::string split;
};

struct Options {
  CorpusArgs in;
  DetectorConfig detector;
  unsigned workers = 1;
  std::uint64_t seed = 0;

  std::string emissions;
  std::string vocab;
  std::string out;
  std::string out_dir;
  std::string out_split;
  std::string report;
  std::string labels;
  std::string patch;
  std::string patch_out;
  std::string labels_out;

  // align / decode
  std::string emission;
  std::string text;

  // score
  std::string hyp;
  std::string ref;
  bool sentence_level = false;
  bool confidence = false;
  std::size_t resamples = kDefaultBootstrapResamples;
  std::uint64_t bs_seed = kDefaultBootstrapSeed;

  // sample / corrupt / fix / calibrate
  std::size_t n = 200;
  double fraction = 0.1;
  double shift_min = 0.5;
  double shift_max = 1.0;
  double pad_s = kDefaultPad;
  bool only_flagged = false;
  std::vector<double> tol_grid = {0.05, 0.1, 0.15, 0.2, 0.3, 0.5};
  std::vector<double> ratio_grid = {0.3, 0.5, 0.7, 0.9};

  // synth
  std::size_t per_talk = 10;
  double noise = 0.0;
  double stride = 0.02;
};

void add_corpus(CLI::App* cmd, Options& o) {
  cmd->add_option("--corpus", o.in.corpus, "corpus root (holds txt/ and wav/)")->required();
  cmd->add_option("--split", o.in.split, "split name, e.g. train or tst-COMMON")->required();
}

void add_detector(CLI::App* cmd, Options& o) {
  cmd->add_option("--expand-s", o.detector.expand_s, "seconds added at both window ends")->capture_default_str();
  cmd->add_option("--overrun-tol-s", o.detector.overrun_tol_s, "allowed alignment overrun")->capture_default_str();
  cmd->add_option("--edit-ratio", o.detector.edit_ratio, "edit distance per transcript char")->capture_default_str();
  cmd->add_option("--max-name-len", o.detector.max_name_len, "speaker-name length bound")->capture_default_str();
}

void add_emissions(CLI::App* cmd, Options& o) {
  cmd->add_option("--emissions", o.emissions, "directory of <id>.orig.emit / <id>.exp.emit")->required();
  cmd->add_option("--vocab", o.vocab, "vocab sidecar (default <emissions>/vocab.txt)");
}

void add_workers(CLI::App* cmd, Options& o) {
  cmd->add_option("--workers", o.workers, "worker threads (no effect on output)")->capture_default_str()
      ->check(CLI::PositiveNumber);
}

Vocab emissions_vocab(const Options& o) {
  return load_vocab(o.vocab.empty() ? fs::path(o.emissions) / "vocab.txt" : fs::path(o.vocab));
}

std::string output_split(const Options& o) {
  return o.out_split.empty() ? o.in.split : o.out_split;
}

// Writes to --out when given, else to the data stream.
void emit(const Options& o, std::ostream& out, const std::string& data) {
  if (o.out.empty()) {
    out << data;
  } else {
    write_file(o.out, data);
  }
}

std::optional<double> wav_duration_if_present(const fs::path& corpus, const std::string& audio_path) {
  const fs::path wav = corpus / "wav" / audio_path;
  if (!fs::exists(wav)) return std::nullopt;
  return wav_duration(wav);
}

std::string read_text_arg(const std::string& value) {
  // "@file" reads the text from a file.
  if (!value.empty() && value.front() == '@') {
    const auto lines = read_lines(value.substr(1));
    return lines.empty() ? std::string() : lines.front();
  }
  return value;
}

int cmd_scan(const Options& o, std::ostream& out, std::ostream& err) {
  o.detector.validate();
  const CorpusManifest manifest = parse_mustc(o.in.corpus, o.in.split);
  const Vocab vocab = emissions_vocab(o);
  const EmissionDirectory provider(o.emissions);
  const auto verdicts = detect_corpus(manifest, provider, vocab, o.detector, o.workers);
  emit(o, out, verdicts_to_jsonl(verdicts));
  std::size_t flagged = 0;
  std::size_t errors = 0;
  for (const auto& v : verdicts) {
    flagged += v.flagged;
    errors += v.error.has_value();
  }
  err << "flagged " << flagged << " of " << verdicts.size();
  if (errors) err << " (" << errors << " could not be checked)";
  err << "\n";
  return kExitOk;
}

int cmd_filter(const Options& o, std::ostream&, std::ostream& err) {
  const CorpusManifest manifest = parse_mustc(o.in.corpus, o.in.split);
  const FilterResult result = filter_corpus(manifest, read_verdicts(o.report));
  CorpusManifest clean = result.clean;
  clean.name = output_split(o);
  write_manifest(clean, o.out_dir);
  err << "kept " << result.clean.size() << " of " << manifest.size() << ", removed " << result.removed.size()
      << "\n";
  return kExitOk;
}

int cmd_fix(const Options& o, std::ostream& out, std::ostream& err) {
  const CorpusManifest manifest = parse_mustc(o.in.corpus, o.in.split);
  const Vocab vocab = emissions_vocab(o);
  const EmissionDirectory provider(o.emissions);
  std::optional<std::map<std::string, bool>> flagged;
  if (!o.report.empty()) {
    flagged.emplace();
    for (const auto& v : read_verdicts(o.report)) (*flagged)[v.utterance_id] = v.flagged;
  }
  Patch patch;
  std::size_t skipped = 0;
  for (const auto& u : manifest.utterances) {
    if (flagged && !(*flagged)[u.id]) continue;
    const EmissionMatrix em = load_emission(provider.expanded_path(u.id));
    const AlignmentResult alignment = force_align(em, vocab, u.transcript);
    if (!alignment.feasible) {
      err << "cannot fix " << u.id << ": alignment infeasible\n";
      ++skipped;
      continue;
    }
    const double file_end = wav_duration_if_present(o.in.corpus, u.audio_path).value_or(em.end_s());
    const Utterance fixed = fix_boundaries(u, alignment, o.pad_s, file_end);
    if (fixed.offset_s == u.offset_s && fixed.duration_s == u.duration_s) continue;
    PatchEntry& entry = patch.entries[u.id];
    entry.offset_s = fixed.offset_s;
    entry.duration_s = fixed.duration_s;
  }
  const std::string json = patch_to_json(patch);
  if (o.patch_out.empty()) {
    out << json;
  } else {
    write_file(o.patch_out, json);
  }
  if (!o.out_dir.empty()) {
    CorpusManifest fixed = apply_patch(manifest, patch);
    fixed.name = output_split(o);
    write_manifest(fixed, o.out_dir);
  }
  err << "adjusted " << patch.entries.size() << " of " << manifest.size() << " windows";
  if (skipped) err << ", " << skipped << " infeasible";
  err << "\n";
  return kExitOk;
}

int cmd_align(const Options& o, std::ostream& out, std::ostream&) {
  const EmissionMatrix em = load_emission(o.emission);
  const Vocab vocab = load_vocab(o.vocab);
  const AlignmentResult result = force_align(em, vocab, read_text_arg(o.text));
  nlohmann::ordered_json spans = nlohmann::ordered_json::array();
  for (const auto& span : result.spans) {
    nlohmann::ordered_json j;
    j["word"] = span.word;
    j["start_s"] = span.start_s;
    j["end_s"] = span.end_s;
    spans.push_back(std::move(j));
  }
  if (!result.feasible) throw Error(ErrorCode::kInfeasibleAlignment, "too few frames for the transcript");
  out << spans.dump() << "\n";
  return kExitOk;
}

int cmd_decode(const Options& o, std::ostream& out, std::ostream&) {
  const EmissionMatrix em = load_emission(o.emission);
  out << greedy_decode(em, load_vocab(o.vocab)) << "\n";
  return kExitOk;
}

int cmd_score(const Options& o, std::ostream& out, std::ostream& err) {
  const auto hyps = read_lines(o.hyp);
  const auto refs = read_lines(o.ref);
  if (hyps.size() != refs.size()) {
    throw Error(ErrorCode::kLengthMismatch, o.hyp + " has " + std::to_string(hyps.size()) + " lines, " + o.ref +
                                                " has " + std::to_string(refs.size()));
  }
  if (o.sentence_level) {
    for (std::size_t i = 0; i < hyps.size(); ++i) out << "BLEU = " << sentence_bleu(hyps[i], refs[i]).formatted() << "\n";
    out << bleu_signature(true) << "\n";
    return kExitOk;
  }
  const BleuScore score = corpus_bleu(hyps, refs);
  if (o.confidence) {
    const BootstrapResult bs = bootstrap_ci(hyps, refs, o.resamples, o.bs_seed, o.workers);
    char buf[64];
    std::snprintf(buf, sizeof(buf), " (μ = %.1f ± %.1f)", bs.mean, bs.ci95);
    out << "BLEU = " << score.formatted() << buf << "\n" << bleu_signature(false, o.resamples, o.bs_seed) << "\n";
  } else {
    out << "BLEU = " << score.formatted() << "\n" << bleu_signature(false) << "\n";
  }
  err << score.verbose() << "\n";
  return kExitOk;
}

int cmd_calibrate(const Options& o, std::ostream& out, std::ostream& err) {
  const CorpusManifest manifest = parse_mustc(o.in.corpus, o.in.split);
  const Vocab vocab = emissions_vocab(o);
  const EmissionDirectory provider(o.emissions);
  const LabelSet labels = read_labels(o.labels);
  const auto report = calibrate(manifest, provider, vocab, labels, threshold_grid(o.tol_grid, o.ratio_grid), o.workers);
  emit(o, out, calibration_to_csv(report));
  err << report.rows.size() << " operating points over " << manifest.size() << " utterances\n";
  return kExitOk;
}

int cmd_corrupt(const Options& o, std::ostream&, std::ostream& err) {
  const CorpusManifest manifest = parse_mustc(o.in.corpus, o.in.split);
  const fs::path root = o.in.corpus;
  const DurationLookup durations = [&root](const std::string& audio) { return wav_duration_if_present(root, audio); };
  CorruptionResult result = corrupt_corpus(manifest, o.fraction, {o.shift_min, o.shift_max}, o.seed, durations);
  result.corrupted.name = output_split(o);
  write_manifest(result.corrupted, o.out_dir);
  write_file(o.labels_out, labels_to_json(result.labels));
  std::size_t shifted = 0;
  for (const auto& [id, bad] : result.labels) shifted += bad;
  err << "shifted " << shifted << " of " << manifest.size() << "\n";
  return kExitOk;
}

int cmd_speaker_names(const Options& o, std::ostream& out, std::ostream& err) {
  const CorpusManifest manifest = parse_mustc(o.in.corpus, o.in.split);
  std::string jsonl;
  std::size_t hits = 0;
  for (const auto& u : manifest.utterances) {
    const auto name = detect_speaker_name(u.transcript, o.detector.max_name_len);
    if (!name) continue;
    ++hits;
    nlohmann::ordered_json j;
    j["id"] = u.id;
    j["name"] = name->name;
    j["remainder"] = name->remainder;
    jsonl += j.dump() + "\n";
  }
  emit(o, out, jsonl);
  err << "speaker names in " << hits << " of " << manifest.size() << " transcripts (rate "
      << format_double(speaker_name_rate(manifest, o.detector)) << ")\n";
  return kExitOk;
}

int cmd_sample(const Options& o, std::ostream&, std::ostream& err) {
  CorpusManifest subset = sample_subset(parse_mustc(o.in.corpus, o.in.split), o.n, o.seed);
  subset.name = output_split(o);
  write_manifest(subset, o.out_dir);
  err << "sampled " << subset.size() << " utterances into " << subset.name << "\n";
  return kExitOk;
}

int cmd_patch(const Options& o, std::ostream&, std::ostream& err) {
  const Patch patch = read_patch(o.patch);
  CorpusManifest patched = apply_patch(parse_mustc(o.in.corpus, o.in.split), patch);
  patched.name = output_split(o);
  write_manifest(patched, o.out_dir);
  err << "patched " << patch.entries.size() << " utterances into " << patched.name << "\n";
  return kExitOk;
}

int cmd_synth(const Options& o, std::ostream&, std::ostream& err) {
  SyntheticOptions opts;
  opts.utterances = o.n;
  opts.utterances_per_talk = o.per_talk;
  const SyntheticCorpus corpus = make_synthetic_corpus(opts, o.seed);
  CorpusManifest manifest = corpus.manifest;
  manifest.name = o.out_split.empty() ? "synthetic" : o.out_split;
  write_manifest(manifest, o.out_dir);
  std::string timeline;
  for (const auto& [wav, talk] : corpus.talks) {
    nlohmann::ordered_json j;
    j["wav"] = wav;
    j["duration_s"] = talk.duration_s;
    timeline += j.dump() + "\n";
  }
  write_file(fs::path(o.out_dir) / "talks.jsonl", timeline);
  if (!o.emissions.empty()) {
    const SyntheticEmissionProvider provider(corpus, o.stride, o.detector.expand_s, o.noise, o.seed);
    export_emissions(manifest, provider, corpus.vocab, o.emissions, o.workers);
  }
  err << "wrote " << manifest.size() << " synthetic utterances in " << corpus.talks.size() << " talks\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Speech-translation corpus quality control"};
  app.name("stclean");
  app.require_subcommand(1);
  Options o;

  auto* scan = app.add_subcommand("scan", "detect misaligned utterances (JSONL verdicts)");
  add_corpus(scan, o);
  add_emissions(scan, o);
  add_detector(scan, o);
  add_workers(scan, o);
  scan->add_option("--out", o.out, "JSONL output (default stdout)");

  auto* filter = app.add_subcommand("filter", "drop flagged utterances using a scan report");
  add_corpus(filter, o);
  filter->add_option("--report", o.report, "scan JSONL")->required();
  filter->add_option("--out-dir", o.out_dir, "output corpus root")->required();
  filter->add_option("--out-split", o.out_split, "output split name (default: input split)");

  auto* fix = app.add_subcommand("fix", "re-window utterances to their forced alignment");
  add_corpus(fix, o);
  add_emissions(fix, o);
  fix->add_option("--report", o.report, "only fix utterances flagged in this scan JSONL");
  fix->add_option("--pad-s", o.pad_s, "slack kept around the aligned speech")->capture_default_str();
  fix->add_option("--patch-out", o.patch_out, "patch JSON (default stdout)");
  fix->add_option("--out-dir", o.out_dir, "also write the fixed corpus here");
  fix->add_option("--out-split", o.out_split, "output split name");

  auto* align = app.add_subcommand("align", "forced-align a transcript to an emission file");
  align->add_option("--emission", o.emission, "EMIT file")->required();
  align->add_option("--vocab", o.vocab, "vocab sidecar")->required();
  align->add_option("--text", o.text, "transcript, or @file for its first line")->required();

  auto* decode = app.add_subcommand("decode", "greedy CTC decode of an emission file");
  decode->add_option("--emission", o.emission, "EMIT file")->required();
  decode->add_option("--vocab", o.vocab, "vocab sidecar")->required();

  auto* score = app.add_subcommand("score", "BLEU (13a, exp smoothing, case-sensitive)");
  score->add_option("--hyp", o.hyp, "hypotheses, one segment per line")->required();
  score->add_option("--ref", o.ref, "references, one segment per line")->required();
  score->add_flag("--sentence-level", o.sentence_level, "one score per line");
  score->add_flag("--confidence", o.confidence, "bootstrap mean and 95% interval");
  score->add_option("--resamples", o.resamples, "bootstrap resamples")->capture_default_str();
  score->add_option("--seed", o.bs_seed, "bootstrap seed")->capture_default_str();
  add_workers(score, o);

  auto* cal = app.add_subcommand("calibrate", "precision/recall sweep against labels (CSV)");
  add_corpus(cal, o);
  add_emissions(cal, o);
  add_workers(cal, o);
  cal->add_option("--labels", o.labels, "labels JSON {id: bool}")->required();
  cal->add_option("--tol-grid", o.tol_grid, "overrun tolerances")->delimiter(',')->capture_default_str();
  cal->add_option("--ratio-grid", o.ratio_grid, "edit ratios")->delimiter(',')->capture_default_str();
  cal->add_option("--out", o.out, "CSV output (default stdout)");

  auto* corrupt = app.add_subcommand("corrupt", "plant labeled boundary shifts");
  add_corpus(corrupt, o);
  corrupt->add_option("--fraction", o.fraction, "fraction of utterances to shift")->capture_default_str();
  corrupt->add_option("--shift-min", o.shift_min, "smallest shift (s)")->capture_default_str();
  corrupt->add_option("--shift-max", o.shift_max, "largest shift (s)")->capture_default_str();
  corrupt->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
  corrupt->add_option("--out-dir", o.out_dir, "output corpus root")->required();
  corrupt->add_option("--out-split", o.out_split, "output split name");
  corrupt->add_option("--labels-out", o.labels_out, "labels JSON")->required();

  auto* names = app.add_subcommand("speaker-names", "find leading speaker names (JSONL)");
  add_corpus(names, o);
  names->add_option("--max-name-len", o.detector.max_name_len, "name length bound")->capture_default_str();
  names->add_option("--out", o.out, "JSONL output (default stdout)");

  auto* sample = app.add_subcommand("sample", "uniform subset without replacement");
  add_corpus(sample, o);
  sample->add_option("--n", o.n, "subset size")->capture_default_str();
  sample->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
  sample->add_option("--out-dir", o.out_dir, "output corpus root")->required();
  sample->add_option("--out-split", o.out_split, "output split name");

  auto* patch = app.add_subcommand("patch", "apply a patch JSON to a split");
  add_corpus(patch, o);
  patch->add_option("--patch", o.patch, "patch JSON")->required();
  patch->add_option("--out-dir", o.out_dir, "output corpus root")->required();
  patch->add_option("--out-split", o.out_split, "output split name");

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus and emissions");
  synth->add_option("--out-dir", o.out_dir, "output corpus root")->required();
  synth->add_option("--out-split", o.out_split, "split name (default synthetic)");
  synth->add_option("--emissions", o.emissions, "also write emissions here");
  synth->add_option("--n", o.n, "utterances")->capture_default_str();
  synth->add_option("--per-talk", o.per_talk, "utterances per talk")->capture_default_str();
  synth->add_option("--noise", o.noise, "emission noise epsilon")->capture_default_str();
  synth->add_option("--stride", o.stride, "frame stride (s)")->capture_default_str();
  synth->add_option("--expand-s", o.detector.expand_s, "expansion of .exp windows")->capture_default_str();
  synth->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
  add_workers(synth, o);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    if (auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
      err << sub->help();
    } else {
      err << app.help();
    }
    return kExitUsage;
  }

  try {
    CLI::App* cmd = app.get_subcommands().front();
    const std::string name = cmd->get_name();
    if (name == "scan") return cmd_scan(o, out, err);
    if (name == "filter") return cmd_filter(o, out, err);
    if (name == "fix") return cmd_fix(o, out, err);
    if (name == "align") return cmd_align(o, out, err);
    if (name == "decode") return cmd_decode(o, out, err);
    if (name == "score") return cmd_score(o, out, err);
    if (name == "calibrate") return cmd_calibrate(o, out, err);
    if (name == "corrupt") return cmd_corrupt(o, out, err);
    if (name == "speaker-names") return cmd_speaker_names(o, out, err);
    if (name == "sample") return cmd_sample(o, out, err);
    if (name == "patch") return cmd_patch(o, out, err);
    if (name == "synth") return cmd_synth(o, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace stclean::cli
