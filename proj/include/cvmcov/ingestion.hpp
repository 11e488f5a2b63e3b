#pragma once

// Text and token-file ingestion.
//
// Raw text is split on Unicode White_Space. Each word then goes through,
// in order: NFC normalization, full lowercasing, and stripping of leading
// and trailing punctuation. Words that end up empty are dropped.
//
// Pre-tokenized input is one UTF-8 label per line, taken verbatim (a
// trailing '\r' is removed, blank lines are skipped, the normalization
// policy does not apply).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cvmcov/token.hpp"

namespace cvmcov {

struct NormalizationPolicy {
  bool lowercase = true;
  bool strip_punctuation = true;
  bool unicode_nfc = true;

  /// "lowercase=on strip_punctuation=on unicode_nfc=on"
  std::string describe() const;

  friend bool operator==(const NormalizationPolicy&, const NormalizationPolicy&) = default;
};

enum class InputFormat { Text, Pretokenized };

std::string_view to_string(InputFormat format) noexcept;

class EncodingError : public std::runtime_error {
 public:
  EncodingError(std::uint64_t byte_offset, const std::string& reason);
  std::uint64_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::uint64_t byte_offset_;
};

using TokenSink = std::function<void(StreamToken)>;

/// Applies the policy to one whitespace-free word. May return "".
std::string normalize_word(std::string_view word, const NormalizationPolicy& policy);

bool is_unicode_whitespace(char32_t cp) noexcept;

/// Incremental tokenizer. Memory is bounded by the longest word: input is
/// consumed in arbitrary chunks and a code point may straddle two chunks.
class Tokenizer {
 public:
  explicit Tokenizer(NormalizationPolicy policy = {}) : policy_(policy) {}

  void feed(std::string_view chunk, const TokenSink& sink);
  /// Flushes the last word. Throws EncodingError on a truncated sequence.
  void finish(const TokenSink& sink);

  std::uint64_t bytes_consumed() const noexcept { return offset_; }

 private:
  void flush(const TokenSink& sink);

  NormalizationPolicy policy_;
  std::string word_;
  char seq_[4]{};
  int seq_len_ = 0;
  int need_ = 0;
  char32_t cp_ = 0;
  char32_t min_cp_ = 0;
  std::uint64_t seq_start_ = 0;
  std::uint64_t offset_ = 0;
};

/// Throws EncodingError (offset relative to `base_offset`) on invalid UTF-8.
void validate_utf8(std::string_view bytes, std::uint64_t base_offset = 0);

std::vector<StreamToken> tokenize(std::string_view text, const NormalizationPolicy& policy = {});

void tokenize_stream(std::istream& in, const NormalizationPolicy& policy, const TokenSink& sink);
void read_pretokenized(std::istream& in, const TokenSink& sink);
void read_tokens(std::istream& in, InputFormat format, const NormalizationPolicy& policy,
                 const TokenSink& sink);
std::vector<StreamToken> read_all_tokens(std::istream& in, InputFormat format,
                                         const NormalizationPolicy& policy = {});
/// Opens `path` ("-" for stdin) and reads every token.
std::vector<StreamToken> load_tokens(const std::string& path, InputFormat format,
                                     const NormalizationPolicy& policy = {});

struct StreamStats {
  std::uint64_t length = 0;
  std::uint64_t distinct = 0;
  /// Most frequent labels, descending by count then label. Empty unless requested.
  std::vector<std::pair<std::string, std::uint64_t>> top_frequencies;
};

class StreamStatsAccumulator {
 public:
  void add(const StreamToken& token);
  StreamStats result(std::size_t top_k = 0) const;

 private:
  std::unordered_map<std::string, std::uint64_t> counts_;
  std::uint64_t length_ = 0;
};

StreamStats stream_stats(std::span<const StreamToken> tokens, std::size_t top_k = 0);

}  // namespace cvmcov
