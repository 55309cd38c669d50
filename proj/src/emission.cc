#include "stclean/emission.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "stclean/corpus.h"
#include "stclean/error.h"
#include "stclean/rng.h"
#include "stclean/text.h"

namespace stclean {
namespace {

constexpr char kMagic[4] = {'E', 'M', 'I', 'T'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 4 + 4 + 4 + 4 + 8;
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 31;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

Vocab::Vocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate vocab token '" + tokens_[i] + "'");
    }
  }
  if (tokens_.size() < 2) throw Error(ErrorCode::kInvalidArgument, "vocab needs blank plus one symbol");
}

Vocab Vocab::from_letters(std::string_view letters) {
  std::vector<std::string> tokens = {"<pad>", kWordDelimiter};
  for (char c : letters) tokens.emplace_back(1, c);
  return Vocab(std::move(tokens));
}

std::optional<int> Vocab::find(const std::string& token) const {
  const auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> Vocab::find_char(char c) const {
  if (c == ' ') return word_delimiter();
  return find(std::string(1, c));
}

double max_row_normalization_error(const EmissionMatrix& em) {
  double worst = 0.0;
  for (Eigen::Index t = 0; t < em.frames(); ++t) {
    const auto row = em.log_probs.row(t).cast<double>();
    const double peak = row.maxCoeff();
    const double lse = peak + std::log((row.array() - peak).exp().sum());
    worst = std::max(worst, std::abs(lse));
  }
  return worst;
}

void validate_emission(const EmissionMatrix& em, double tolerance) {
  if (em.frames() < 1 || em.vocab_size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "emission matrix needs T >= 1 and V >= 2");
  }
  if (!(em.stride_s > 0.0f)) throw Error(ErrorCode::kInvalidArgument, "stride_s must be positive");
  const double err = max_row_normalization_error(em);
  if (!(err <= tolerance)) {
    throw Error(ErrorCode::kInvalidArgument,
                "emission rows are not log-distributions (max |logsumexp| = " + format_double(err) + ")");
  }
}

std::string encode_emission(const EmissionMatrix& em) {
  const auto frames = static_cast<std::uint64_t>(em.frames());
  const auto vocab = static_cast<std::uint64_t>(em.vocab_size());
  if (frames > std::numeric_limits<std::uint32_t>::max() || vocab > std::numeric_limits<std::uint32_t>::max() ||
      frames * vocab > kMaxElements) {
    throw Error(ErrorCode::kDimensionOverflow, "emission too large for the EMIT format");
  }
  std::string out;
  out.reserve(kHeaderBytes + frames * vocab * 4);
  out.append(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(frames));
  put_u32(out, static_cast<std::uint32_t>(vocab));
  put_u32(out, std::bit_cast<std::uint32_t>(em.stride_s));
  put_u64(out, std::bit_cast<std::uint64_t>(em.abs_start_s));
  const float* data = em.log_probs.data();
  for (std::uint64_t i = 0; i < frames * vocab; ++i) put_u32(out, std::bit_cast<std::uint32_t>(data[i]));
  return out;
}

EmissionMatrix decode_emission(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::kBadMagic, "missing EMIT magic");
  }
  if (bytes.size() < kHeaderBytes) throw Error(ErrorCode::kTruncatedFile, "header shorter than 28 bytes");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t version = get_u32(p + 4);
  if (version != kVersion) throw Error(ErrorCode::kBadMagic, "unsupported EMIT version " + std::to_string(version));
  const std::uint64_t frames = get_u32(p + 8);
  const std::uint64_t vocab = get_u32(p + 12);
  if (frames == 0 || vocab < 2 || frames * vocab > kMaxElements) {
    throw Error(ErrorCode::kDimensionOverflow,
                "header dimensions " + std::to_string(frames) + "x" + std::to_string(vocab));
  }
  const std::uint64_t payload = frames * vocab * 4;
  if (bytes.size() - kHeaderBytes < payload) {
    throw Error(ErrorCode::kTruncatedFile, "header claims " + std::to_string(frames) + "x" + std::to_string(vocab) +
                                               " values, file has " + std::to_string(bytes.size()) + " bytes");
  }
  EmissionMatrix em;
  em.stride_s = std::bit_cast<float>(get_u32(p + 16));
  em.abs_start_s = std::bit_cast<double>(get_u64(p + 20));
  em.log_probs.resize(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(vocab));
  float* data = em.log_probs.data();
  const unsigned char* values = p + kHeaderBytes;
  for (std::uint64_t i = 0; i < frames * vocab; ++i) data[i] = std::bit_cast<float>(get_u32(values + 4 * i));
  return em;
}

void save_emission(const EmissionMatrix& em, const std::filesystem::path& path) {
  write_file(path, encode_emission(em));
}

EmissionMatrix load_emission(const std::filesystem::path& path) {
  return decode_emission(read_file(path));
}

void save_vocab(const Vocab& vocab, const std::filesystem::path& path) {
  write_lines(path, vocab.tokens());
}

Vocab load_vocab(const std::filesystem::path& path) {
  return Vocab(read_lines(path));
}

std::vector<CharTiming> layout_chars(std::string_view normalized, double start_s, double char_s,
                                     double gap_s) {
  std::vector<CharTiming> out;
  out.reserve(normalized.size());
  double t = start_s;
  for (char c : normalized) {
    out.push_back({c, t, t + char_s});
    t += char_s + gap_s;
  }
  return out;
}

EmissionMatrix render_emissions(const Vocab& vocab, std::span<const CharTiming> chars,
                                double stride_s, TimeWindow window, double noise_eps,
                                std::uint64_t seed) {
  if (!(stride_s > 0.0) || !(window.end_s > window.start_s)) {
    throw Error(ErrorCode::kInvalidArgument, "need stride > 0 and a non-empty window");
  }
  if (!(noise_eps >= 0.0 && noise_eps < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "noise_eps must lie in [0, 1)");
  }
  const auto vocab_size = static_cast<Eigen::Index>(vocab.size());
  std::vector<int> ids(chars.size());
  for (std::size_t i = 0; i < chars.size(); ++i) {
    const auto id = vocab.find_char(chars[i].symbol);
    if (!id) throw Error(ErrorCode::kCharNotInVocab, std::string("'") + chars[i].symbol + "'");
    ids[i] = *id;
  }

  const auto frames = std::max<Eigen::Index>(
      1, static_cast<Eigen::Index>(std::ceil(window.length_s() / stride_s - 1e-9)));
  EmissionMatrix em;
  em.stride_s = static_cast<float>(stride_s);
  em.abs_start_s = window.start_s;
  em.log_probs.resize(frames, vocab_size);

  SplitMix64 rng(seed);
  Eigen::VectorXd weights(vocab_size);
  std::size_t cursor = 0;
  for (Eigen::Index t = 0; t < frames; ++t) {
    const double centre = window.start_s + (static_cast<double>(t) + 0.5) * stride_s;
    while (cursor < chars.size() && chars[cursor].end_s <= centre) ++cursor;
    int dominant = Vocab::kBlank;
    if (cursor < chars.size() && chars[cursor].start_s <= centre) dominant = ids[cursor];

    for (Eigen::Index v = 0; v < vocab_size; ++v) weights[v] = v == dominant ? 0.0 : rng.uniform(0.5, 1.5);
    weights *= noise_eps / weights.sum();
    weights[dominant] = 1.0 - noise_eps;
    for (Eigen::Index v = 0; v < vocab_size; ++v) {
      em.log_probs(t, v) = weights[v] > 0.0 ? static_cast<float>(std::log(weights[v])) : kLogZero;
    }
  }
  return em;
}

EmissionMatrix synthesize_emissions(std::string_view transcript, const Vocab& vocab,
                                    std::span<const CharTiming> char_times, double stride_s,
                                    TimeWindow window, double noise_eps, std::uint64_t seed) {
  const std::string normalized = normalize_text(transcript);
  for (char c : normalized) {
    if (!vocab.find_char(c)) throw Error(ErrorCode::kCharNotInVocab, std::string("'") + c + "'");
  }
  bool matches = char_times.size() == normalized.size();
  for (std::size_t i = 0; matches && i < normalized.size(); ++i) {
    const char c = char_times[i].symbol == '|' ? ' ' : char_times[i].symbol;
    matches = c == normalized[i] && char_times[i].end_s > char_times[i].start_s &&
              (i == 0 || char_times[i].start_s >= char_times[i - 1].end_s);
  }
  if (!matches) {
    throw Error(ErrorCode::kInvalidArgument, "char_times do not spell the normalized transcript in order");
  }
  return render_emissions(vocab, char_times, stride_s, window, noise_eps, seed);
}

}  // namespace stclean
