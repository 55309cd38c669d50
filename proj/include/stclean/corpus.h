#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace stclean {

// One row of a speech-translation corpus: an audio window plus its parallel
// source transcript and target translation.
struct Utterance {
  std::string id;
  std::string audio_path;  // relative to <root>/wav/
  double offset_s = 0.0;
  double duration_s = 0.0;
  std::string transcript;
  std::string translation;
  std::optional<std::string> speaker_id;

  double end_s() const { return offset_s + duration_s; }

  bool operator==(const Utterance&) const = default;
};

struct CorpusManifest {
  std::string name;
  std::vector<Utterance> utterances;

  std::size_t size() const { return utterances.size(); }
  bool empty() const { return utterances.empty(); }

  bool operator==(const CorpusManifest&) const = default;
};

// Field overrides for a single utterance.
struct PatchEntry {
  std::optional<double> offset_s;
  std::optional<double> duration_s;
  std::optional<std::string> transcript;
  std::optional<std::string> translation;

  bool operator==(const PatchEntry&) const = default;
};

struct Patch {
  std::map<std::string, PatchEntry> entries;
};

// Reads txt/<split>.yaml, txt/<split>.en and txt/<split>.de under root_dir.
// The yaml is the MuST-C subset: one flow mapping per line,
//   - {duration: 3.5, offset: 17.2, speaker_id: spk.1, wav: ted_1.wav}
// with scalar values only. Missing ids become <wav-stem>_<index-within-wav>.
CorpusManifest parse_mustc(const std::filesystem::path& root_dir, const std::string& split);

// Writes the three-file layout for manifest.name. Ids are always written so a
// re-parse is field-identical.
void write_manifest(const CorpusManifest& manifest, const std::filesystem::path& root_dir);

// Uniform sample of n utterances without replacement (selection sampling
// driven by SplitMix64), keeping input order.
CorpusManifest sample_subset(const CorpusManifest& manifest, std::size_t n, std::uint64_t seed);

CorpusManifest apply_patch(const CorpusManifest& manifest, const Patch& patch);

// Patch JSON: { "<id>": { "offset_s"?, "duration_s"?, "transcript"?, "translation"? } }
Patch parse_patch_json(const std::string& json_text);
Patch read_patch(const std::filesystem::path& path);
std::string patch_to_json(const Patch& patch);

// Throws MalformedEntry on the first violated Utterance invariant (including
// duplicate ids).
void validate_manifest(const CorpusManifest& manifest);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines);
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace stclean
