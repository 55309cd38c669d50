#include "stclean/corpus.h"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "json.hpp"
#include "stclean/error.h"
#include "stclean/rng.h"
#include "stclean/text.h"

namespace stclean {
namespace fs = std::filesystem;

namespace {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

std::string unquote(std::string_view value, std::size_t line_no) {
  if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
    std::string out;
    for (std::size_t i = 1; i + 1 < value.size(); ++i) {
      if (value[i] == '\\' && i + 2 < value.size()) {
        out.push_back(value[++i]);
      } else {
        out.push_back(value[i]);
      }
    }
    return out;
  }
  if (value.size() >= 2 && value.front() == '\'' && value.back() == '\'') {
    std::string out;
    for (std::size_t i = 1; i + 1 < value.size(); ++i) {
      out.push_back(value[i]);
      if (value[i] == '\'' && value[i + 1] == '\'') ++i;
    }
    return out;
  }
  if (!value.empty() && (value.front() == '"' || value.front() == '\'')) {
    throw Error(ErrorCode::kMalformedEntry,
                "unterminated quoted scalar on yaml line " + std::to_string(line_no));
  }
  return std::string(value);
}

// Parses "- {k: v, k: v}" into ordered key/value pairs.
KeyValues parse_flow_entry(std::string_view line, std::size_t line_no) {
  auto fail = [line_no](const std::string& what) {
    return Error(ErrorCode::kMalformedEntry,
                 what + " on yaml line " + std::to_string(line_no));
  };
  std::string_view body = trim(line);
  if (body.empty() || body.front() != '-') throw fail("expected '- {...}'");
  body = trim(body.substr(1));
  if (body.size() < 2 || body.front() != '{' || body.back() != '}') {
    throw fail("expected a flow mapping");
  }
  body = body.substr(1, body.size() - 2);

  std::vector<std::string_view> items;
  char quote = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < body.size(); ++i) {
    const char c = body[i];
    if (quote) {
      if (c == '\\' && quote == '"') {
        ++i;
      } else if (c == quote) {
        quote = 0;
      }
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == ',') {
      items.push_back(body.substr(start, i - start));
      start = i + 1;
    }
  }
  if (quote) throw fail("unterminated quote");
  items.push_back(body.substr(start));

  KeyValues out;
  for (std::string_view item : items) {
    item = trim(item);
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) throw fail("item without ':'");
    std::string key(trim(item.substr(0, colon)));
    if (key.empty()) throw fail("empty key");
    out.emplace_back(std::move(key), unquote(trim(item.substr(colon + 1)), line_no));
  }
  return out;
}

double parse_number(const std::string& text, const char* key, std::size_t line_no) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty()) {
    throw Error(ErrorCode::kMalformedEntry, std::string("unparseable ") + key + " '" + text +
                                                "' on yaml line " + std::to_string(line_no));
  }
  return value;
}

bool needs_quotes(std::string_view value) {
  if (value.empty() || value != trim(value)) return true;
  for (char c : value) {
    if (c == ',' || c == '{' || c == '}' || c == ':' || c == '"' || c == '\'' || c == '#' ||
        c == '[' || c == ']' || c == '\\') {
      return true;
    }
  }
  return false;
}

std::string yaml_scalar(std::string_view value) {
  if (!needs_quotes(value)) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string wav_stem(const std::string& wav) {
  return fs::path(wav).stem().string();
}

fs::path txt_path(const fs::path& root, const std::string& split, const std::string& ext) {
  return root / "txt" / (split + "." + ext);
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& contents) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string() + " for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed for " + path.string());
}

std::vector<std::string> read_lines(const fs::path& path) {
  const std::string contents = read_file(path);
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < contents.size()) {
    std::size_t end = contents.find('\n', start);
    if (end == std::string::npos) end = contents.size();
    std::string line = contents.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = end + 1;
  }
  return lines;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::string contents;
  for (const auto& line : lines) {
    contents += line;
    contents += '\n';
  }
  write_file(path, contents);
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void validate_manifest(const CorpusManifest& manifest) {
  std::set<std::string> seen;
  for (const auto& u : manifest.utterances) {
    auto fail = [&u](const std::string& what) {
      return Error(ErrorCode::kMalformedEntry, "utterance '" + u.id + "': " + what);
    };
    if (u.id.empty()) throw fail("empty id");
    if (!seen.insert(u.id).second) throw fail("duplicate id");
    if (!(u.offset_s >= 0.0)) throw fail("offset_s must be >= 0");
    if (!(u.duration_s > 0.0)) throw fail("duration_s must be > 0");
    if (trim(u.transcript).empty()) throw fail("empty transcript");
    if (trim(u.translation).empty()) throw fail("empty translation");
  }
}

CorpusManifest parse_mustc(const fs::path& root_dir, const std::string& split) {
  const fs::path yaml_path = txt_path(root_dir, split, "yaml");
  const fs::path en_path = txt_path(root_dir, split, "en");
  const fs::path de_path = txt_path(root_dir, split, "de");
  for (const auto& p : {yaml_path, en_path, de_path}) {
    if (!fs::exists(p)) throw Error(ErrorCode::kMissingFile, p.string());
  }

  const auto yaml_lines = read_lines(yaml_path);
  const auto en = read_lines(en_path);
  const auto de = read_lines(de_path);

  std::vector<std::pair<std::size_t, KeyValues>> entries;
  for (std::size_t i = 0; i < yaml_lines.size(); ++i) {
    const std::string_view line = trim(yaml_lines[i]);
    if (line.empty() || line.front() == '#' || line == "---") continue;
    entries.emplace_back(i + 1, parse_flow_entry(line, i + 1));
  }
  if (entries.size() != en.size() || entries.size() != de.size()) {
    throw Error(ErrorCode::kLineCountMismatch,
                split + ": yaml has " + std::to_string(entries.size()) + " entries, en has " +
                    std::to_string(en.size()) + " lines, de has " + std::to_string(de.size()));
  }

  CorpusManifest manifest;
  manifest.name = split;
  manifest.utterances.reserve(entries.size());
  std::unordered_map<std::string, std::size_t> per_wav;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& [line_no, kv] = entries[i];
    std::optional<double> duration;
    std::optional<double> offset;
    Utterance u;
    for (const auto& [key, value] : kv) {
      if (key == "duration") {
        duration = parse_number(value, "duration", line_no);
      } else if (key == "offset") {
        offset = parse_number(value, "offset", line_no);
      } else if (key == "wav" || key == "rpath") {
        u.audio_path = value;
      } else if (key == "speaker_id") {
        u.speaker_id = value;
      } else if (key == "id") {
        u.id = value;
      }
    }
    if (!duration) throw Error(ErrorCode::kMalformedEntry, "missing duration on yaml line " + std::to_string(line_no));
    if (!offset) throw Error(ErrorCode::kMalformedEntry, "missing offset on yaml line " + std::to_string(line_no));
    if (u.audio_path.empty()) throw Error(ErrorCode::kMalformedEntry, "missing wav on yaml line " + std::to_string(line_no));
    u.offset_s = *offset;
    u.duration_s = *duration;
    const std::size_t index = per_wav[u.audio_path]++;
    if (u.id.empty()) u.id = wav_stem(u.audio_path) + "_" + std::to_string(index);
    u.transcript = en[i];
    u.translation = de[i];
    manifest.utterances.push_back(std::move(u));
  }
  validate_manifest(manifest);
  return manifest;
}

void write_manifest(const CorpusManifest& manifest, const fs::path& root_dir) {
  std::vector<std::string> yaml;
  std::vector<std::string> en;
  std::vector<std::string> de;
  yaml.reserve(manifest.size());
  for (const auto& u : manifest.utterances) {
    std::string line = "- {duration: " + format_double(u.duration_s) +
                       ", offset: " + format_double(u.offset_s);
    if (u.speaker_id) line += ", speaker_id: " + yaml_scalar(*u.speaker_id);
    line += ", wav: " + yaml_scalar(u.audio_path) + ", id: " + yaml_scalar(u.id) + "}";
    yaml.push_back(std::move(line));
    en.push_back(u.transcript);
    de.push_back(u.translation);
  }
  write_lines(txt_path(root_dir, manifest.name, "yaml"), yaml);
  write_lines(txt_path(root_dir, manifest.name, "en"), en);
  write_lines(txt_path(root_dir, manifest.name, "de"), de);
}

CorpusManifest sample_subset(const CorpusManifest& manifest, std::size_t n, std::uint64_t seed) {
  const std::size_t total = manifest.size();
  if (n > total) {
    throw Error(ErrorCode::kNTooLarge, "requested " + std::to_string(n) + " of " +
                                           std::to_string(total) + " utterances");
  }
  CorpusManifest out;
  out.name = manifest.name;
  out.utterances.reserve(n);
  SplitMix64 rng(seed);
  // Knuth's Algorithm S: keep item i with probability (n - kept) / (total - i).
  std::size_t kept = 0;
  for (std::size_t i = 0; i < total && kept < n; ++i) {
    const double remaining = static_cast<double>(total - i);
    if (remaining * rng.uniform() < static_cast<double>(n - kept)) {
      out.utterances.push_back(manifest.utterances[i]);
      ++kept;
    }
  }
  return out;
}

CorpusManifest apply_patch(const CorpusManifest& manifest, const Patch& patch) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < manifest.size(); ++i) index.emplace(manifest.utterances[i].id, i);
  for (const auto& [id, entry] : patch.entries) {
    if (!index.count(id)) throw Error(ErrorCode::kUnknownId, id);
  }
  CorpusManifest out = manifest;
  for (const auto& [id, entry] : patch.entries) {
    Utterance& u = out.utterances[index.at(id)];
    if (entry.offset_s) u.offset_s = *entry.offset_s;
    if (entry.duration_s) u.duration_s = *entry.duration_s;
    if (entry.transcript) u.transcript = *entry.transcript;
    if (entry.translation) u.translation = *entry.translation;
  }
  return out;
}

Patch parse_patch_json(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedEntry, std::string("patch json: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::kMalformedEntry, "patch json must be an object");
  Patch patch;
  for (const auto& [id, fields] : doc.items()) {
    if (!fields.is_object()) throw Error(ErrorCode::kMalformedEntry, "patch entry '" + id + "' must be an object");
    PatchEntry entry;
    for (const auto& [key, value] : fields.items()) {
      const bool is_time = key == "offset_s" || key == "duration_s";
      const bool is_text = key == "transcript" || key == "translation";
      if ((is_time && !value.is_number()) || (is_text && !value.is_string()) || (!is_time && !is_text)) {
        throw Error(ErrorCode::kMalformedEntry, "patch entry '" + id + "': bad field '" + key + "'");
      }
      if (key == "offset_s") entry.offset_s = value.get<double>();
      if (key == "duration_s") entry.duration_s = value.get<double>();
      if (key == "transcript") entry.transcript = value.get<std::string>();
      if (key == "translation") entry.translation = value.get<std::string>();
    }
    patch.entries.emplace(id, std::move(entry));
  }
  return patch;
}

Patch read_patch(const fs::path& path) {
  return parse_patch_json(read_file(path));
}

std::string patch_to_json(const Patch& patch) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& [id, entry] : patch.entries) {
    nlohmann::ordered_json fields = nlohmann::ordered_json::object();
    if (entry.offset_s) fields["offset_s"] = *entry.offset_s;
    if (entry.duration_s) fields["duration_s"] = *entry.duration_s;
    if (entry.transcript) fields["transcript"] = *entry.transcript;
    if (entry.translation) fields["translation"] = *entry.translation;
    doc[id] = std::move(fields);
  }
  return doc.dump(2) + "\n";
}

}  // namespace stclean
