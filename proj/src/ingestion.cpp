#include "cvmcov/ingestion.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/locid.h>

#include <algorithm>
#include <fstream>
#include <iostream>

namespace cvmcov {
namespace {

constexpr std::size_t kChunkSize = 1 << 16;

bool is_ascii_punct(char32_t c) noexcept {
  return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
         (c >= 0x7B && c <= 0x7E);
}

bool is_punct(UChar32 c) noexcept {
  return (c >= 0 && c < 0x80) ? is_ascii_punct(static_cast<char32_t>(c)) : u_ispunct(c) != 0;
}

std::string normalize_ascii(std::string_view word, const NormalizationPolicy& policy) {
  std::size_t begin = 0;
  std::size_t end = word.size();
  if (policy.strip_punctuation) {
    while (begin < end && is_ascii_punct(static_cast<unsigned char>(word[begin]))) ++begin;
    while (end > begin && is_ascii_punct(static_cast<unsigned char>(word[end - 1]))) --end;
  }
  std::string out(word.substr(begin, end - begin));
  if (policy.lowercase) {
    for (auto& ch : out) {
      if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
    }
  }
  return out;
}

std::string normalize_unicode(std::string_view word, const NormalizationPolicy& policy) {
  icu::UnicodeString text = icu::UnicodeString::fromUTF8(
      icu::StringPiece(word.data(), static_cast<int32_t>(word.size())));
  if (policy.unicode_nfc) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) throw std::runtime_error("ICU: NFC normalizer unavailable");
    text = nfc->normalize(text, status);
    if (U_FAILURE(status)) throw std::runtime_error("ICU: NFC normalization failed");
  }
  if (policy.lowercase) text.toLower(icu::Locale::getRoot());
  if (policy.strip_punctuation) {
    int32_t begin = 0;
    int32_t end = text.length();
    while (begin < end) {
      const UChar32 c = text.char32At(begin);
      if (!is_punct(c)) break;
      begin = text.moveIndex32(begin, 1);
    }
    while (end > begin) {
      const int32_t prev = text.moveIndex32(end, -1);
      if (!is_punct(text.char32At(prev))) break;
      end = prev;
    }
    text = icu::UnicodeString(text, begin, end - begin);
  }
  std::string out;
  text.toUTF8String(out);
  return out;
}

}  // namespace

std::string NormalizationPolicy::describe() const {
  auto flag = [](bool on) { return on ? "on" : "off"; };
  return std::string("lowercase=") + flag(lowercase) + " strip_punctuation=" +
         flag(strip_punctuation) + " unicode_nfc=" + flag(unicode_nfc);
}

std::string_view to_string(InputFormat format) noexcept {
  return format == InputFormat::Text ? "text" : "pretokenized";
}

EncodingError::EncodingError(std::uint64_t byte_offset, const std::string& reason)
    : std::runtime_error("invalid UTF-8 at byte offset " + std::to_string(byte_offset) + ": " +
                         reason),
      byte_offset_(byte_offset) {}

bool is_unicode_whitespace(char32_t cp) noexcept {
  return (cp >= 0x09 && cp <= 0x0D) || cp == 0x20 || cp == 0x85 || cp == 0xA0 || cp == 0x1680 ||
         (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 || cp == 0x2029 || cp == 0x202F ||
         cp == 0x205F || cp == 0x3000;
}

std::string normalize_word(std::string_view word, const NormalizationPolicy& policy) {
  const bool ascii = std::all_of(word.begin(), word.end(),
                                 [](char c) { return static_cast<unsigned char>(c) < 0x80; });
  return ascii ? normalize_ascii(word, policy) : normalize_unicode(word, policy);
}

void Tokenizer::feed(std::string_view chunk, const TokenSink& sink) {
  for (const char ch : chunk) {
    const auto b = static_cast<unsigned char>(ch);
    const std::uint64_t at = offset_++;
    if (need_ == 0) {
      seq_start_ = at;
      seq_len_ = 0;
      if (b < 0x80) {
        cp_ = b;
      } else if ((b & 0xE0) == 0xC0) {
        cp_ = b & 0x1F, need_ = 1, min_cp_ = 0x80;
      } else if ((b & 0xF0) == 0xE0) {
        cp_ = b & 0x0F, need_ = 2, min_cp_ = 0x800;
      } else if ((b & 0xF8) == 0xF0) {
        cp_ = b & 0x07, need_ = 3, min_cp_ = 0x10000;
      } else {
        throw EncodingError(at, "invalid lead byte");
      }
      seq_[seq_len_++] = ch;
      if (need_ > 0) continue;
    } else {
      if ((b & 0xC0) != 0x80) throw EncodingError(seq_start_, "truncated sequence");
      cp_ = (cp_ << 6) | (b & 0x3F);
      seq_[seq_len_++] = ch;
      if (--need_ > 0) continue;
      if (cp_ < min_cp_) throw EncodingError(seq_start_, "overlong encoding");
      if (cp_ > 0x10FFFF) throw EncodingError(seq_start_, "code point above U+10FFFF");
      if (cp_ >= 0xD800 && cp_ <= 0xDFFF) throw EncodingError(seq_start_, "surrogate code point");
    }
    if (is_unicode_whitespace(cp_)) {
      flush(sink);
    } else {
      word_.append(seq_, static_cast<std::size_t>(seq_len_));
    }
  }
}

void Tokenizer::finish(const TokenSink& sink) {
  if (need_ > 0) throw EncodingError(seq_start_, "truncated sequence at end of input");
  flush(sink);
}

void Tokenizer::flush(const TokenSink& sink) {
  if (word_.empty()) return;
  std::string normalized = normalize_word(word_, policy_);
  word_.clear();
  if (!normalized.empty()) sink(StreamToken(std::move(normalized)));
}

void validate_utf8(std::string_view bytes, std::uint64_t base_offset) {
  // The tokenizer's decoder is the validator; a policy-free pass with a
  // no-op sink only checks encoding.
  Tokenizer checker(NormalizationPolicy{false, false, false});
  try {
    const TokenSink ignore = [](StreamToken) {};
    checker.feed(bytes, ignore);
    checker.finish(ignore);
  } catch (const EncodingError& e) {
    throw EncodingError(base_offset + e.byte_offset(), "in label");
  }
}

std::vector<StreamToken> tokenize(std::string_view text, const NormalizationPolicy& policy) {
  std::vector<StreamToken> tokens;
  const TokenSink sink = [&](StreamToken t) { tokens.push_back(std::move(t)); };
  Tokenizer tokenizer(policy);
  tokenizer.feed(text, sink);
  tokenizer.finish(sink);
  return tokens;
}

void tokenize_stream(std::istream& in, const NormalizationPolicy& policy, const TokenSink& sink) {
  Tokenizer tokenizer(policy);
  std::string buffer(kChunkSize, '\0');
  while (in) {
    in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got == 0) break;
    tokenizer.feed(std::string_view(buffer.data(), got), sink);
  }
  if (in.bad()) throw std::runtime_error("read error");
  tokenizer.finish(sink);
}

void read_pretokenized(std::istream& in, const TokenSink& sink) {
  std::string line;
  std::uint64_t offset = 0;
  while (std::getline(in, line)) {
    const std::uint64_t line_start = offset;
    offset += line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    validate_utf8(line, line_start);
    sink(StreamToken(std::move(line)));
  }
  if (in.bad()) throw std::runtime_error("read error");
}

void read_tokens(std::istream& in, InputFormat format, const NormalizationPolicy& policy,
                 const TokenSink& sink) {
  if (format == InputFormat::Pretokenized) {
    read_pretokenized(in, sink);
  } else {
    tokenize_stream(in, policy, sink);
  }
}

std::vector<StreamToken> read_all_tokens(std::istream& in, InputFormat format,
                                         const NormalizationPolicy& policy) {
  std::vector<StreamToken> tokens;
  read_tokens(in, format, policy, [&](StreamToken t) { tokens.push_back(std::move(t)); });
  return tokens;
}

std::vector<StreamToken> load_tokens(const std::string& path, InputFormat format,
                                     const NormalizationPolicy& policy) {
  if (path == "-") return read_all_tokens(std::cin, format, policy);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open input '" + path + "'");
  return read_all_tokens(in, format, policy);
}

void StreamStatsAccumulator::add(const StreamToken& token) {
  ++length_;
  ++counts_[token.label()];
}

StreamStats StreamStatsAccumulator::result(std::size_t top_k) const {
  StreamStats stats{length_, counts_.size(), {}};
  if (top_k > 0) {
    stats.top_frequencies.assign(counts_.begin(), counts_.end());
    std::sort(stats.top_frequencies.begin(), stats.top_frequencies.end(),
              [](const auto& a, const auto& b) {
                return a.second != b.second ? a.second > b.second : a.first < b.first;
              });
    if (stats.top_frequencies.size() > top_k) stats.top_frequencies.resize(top_k);
  }
  return stats;
}

StreamStats stream_stats(std::span<const StreamToken> tokens, std::size_t top_k) {
  StreamStatsAccumulator acc;
  for (const auto& t : tokens) acc.add(t);
  return acc.result(top_k);
}

}  // namespace cvmcov
