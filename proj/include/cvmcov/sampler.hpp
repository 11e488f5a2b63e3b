#pragma once

// Fixed-memory uniform sampling from a stream of unknown length.
//
// The sampler keeps at most `capacity` entries. Every incoming element is
// admitted with probability 2^-level, duplicates included. When the buffer
// fills, each entry (including the one just admitted) survives an
// independent fair coin and the level goes up by one. After any prefix of
// the stream, every element seen so far is in the buffer with probability
// 2^-level.
//
// If a halving removes nothing the buffer is still full; the sampler throws
// RetentionFailure and is dead from then on. This happens with probability
// 2^-capacity per halving.
//
// Draw order, per observed element: the admission flips first (stopping at
// the first tail), then one flip per buffer entry in buffer order if a
// halving fires. All flips come from a single CoinSource seeded by
// SamplerConfig::seed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cvmcov/rng.hpp"
#include "cvmcov/token.hpp"

namespace cvmcov {

struct SamplerConfig {
  std::size_t capacity = 0;
  std::uint64_t seed = 0;
};

/// The exact probability 1 / 2^exponent. Never stored as a float.
struct DyadicProbability {
  std::uint64_t exponent = 0;

  static constexpr std::uint64_t numerator() noexcept { return 1; }
  /// Nearest double; underflows to 0 for exponents past ~1074.
  double to_double() const noexcept;
  /// "1", "1/2", "1/2^k".
  std::string to_string() const;

  friend bool operator==(DyadicProbability, DyadicProbability) = default;
};

/// A halving left the buffer full (the "bottom" output). Terminal.
class RetentionFailure : public std::runtime_error {
 public:
  RetentionFailure(std::uint64_t stream_index, std::size_t capacity,
                   std::uint64_t level);

  /// Zero-based index of the stream element whose observation failed.
  std::uint64_t stream_index() const noexcept { return stream_index_; }
  std::size_t capacity() const noexcept { return capacity_; }
  /// Level after the failed halving.
  std::uint64_t level() const noexcept { return level_; }

 private:
  std::uint64_t stream_index_;
  std::size_t capacity_;
  std::uint64_t level_;
};

void validate(const SamplerConfig& config);

template <typename Label>
struct BasicSampleResult {
  std::vector<Label> tokens;
  /// Zero-based stream index of each token. Diagnostic only.
  std::vector<std::uint64_t> positions;
  std::size_t realized_size = 0;
  std::size_t capacity = 0;
  std::uint64_t level = 0;
  std::uint64_t observed = 0;

  DyadicProbability inclusion_probability() const noexcept { return {level}; }

  friend bool operator==(const BasicSampleResult&, const BasicSampleResult&) = default;
};

template <typename Label>
class BasicCoverageSampler {
 public:
  struct Entry {
    Label label;
    std::uint64_t position;
  };

  explicit BasicCoverageSampler(SamplerConfig config)
      : capacity_(config.capacity), coins_(config.seed) {
    validate(config);
    buffer_.reserve(std::min<std::size_t>(capacity_, kMaxReserve));
  }

  /// Processes one stream element. Throws RetentionFailure on the bottom
  /// outcome and std::logic_error if the sampler is already dead.
  void observe(Label token) {
    require_live();
    const std::uint64_t position = observed_++;
    if (coins_.all_heads(level_)) {
      buffer_.push_back(Entry{std::move(token), position});
      peak_size_ = std::max(peak_size_, buffer_.size());
    }
    if (buffer_.size() == capacity_) halve(position);
  }

  /// Left fold of observe(). A RetentionFailure carries the stream index.
  template <typename Range>
  void observe_all(Range&& tokens) {
    for (auto&& token : tokens) observe(Label(token));
  }

  /// Consumes the sampler.
  BasicSampleResult<Label> finalize() && {
    require_live();
    BasicSampleResult<Label> result;
    result.tokens.reserve(buffer_.size());
    result.positions.reserve(buffer_.size());
    for (auto& entry : buffer_) {
      result.tokens.push_back(std::move(entry.label));
      result.positions.push_back(entry.position);
    }
    result.realized_size = result.tokens.size();
    result.capacity = capacity_;
    result.level = level_;
    result.observed = observed_;
    buffer_.clear();
    dead_ = true;
    return result;
  }

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return buffer_.size(); }
  std::uint64_t level() const noexcept { return level_; }
  std::uint64_t observed() const noexcept { return observed_; }
  /// High-water mark of the buffer size over the sampler's lifetime.
  std::size_t peak_size() const noexcept { return peak_size_; }
  bool dead() const noexcept { return dead_; }
  DyadicProbability inclusion_probability() const noexcept { return {level_}; }
  std::span<const Entry> entries() const noexcept { return buffer_; }

 private:
  static constexpr std::size_t kMaxReserve = std::size_t{1} << 16;

  void require_live() const {
    if (dead_) throw std::logic_error("sampler is no longer live");
  }

  void halve(std::uint64_t position) {
    std::size_t kept = 0;
    for (std::size_t i = 0; i < buffer_.size(); ++i) {
      if (coins_.heads()) {
        if (kept != i) buffer_[kept] = std::move(buffer_[i]);
        ++kept;
      }
    }
    buffer_.erase(buffer_.begin() + static_cast<std::ptrdiff_t>(kept), buffer_.end());
    ++level_;
    if (kept == capacity_) {
      dead_ = true;
      throw RetentionFailure(position, capacity_, level_);
    }
  }

  std::size_t capacity_;
  CoinSource coins_;
  std::vector<Entry> buffer_;
  std::uint64_t level_ = 0;
  std::uint64_t observed_ = 0;
  std::size_t peak_size_ = 0;
  bool dead_ = false;
};

using SampleResult = BasicSampleResult<StreamToken>;
using CoverageSampler = BasicCoverageSampler<StreamToken>;

}  // namespace cvmcov
