#pragma once

// The original CVM distinct-elements estimator.
//
// Unlike BasicCoverageSampler the buffer is a set: an incoming label first
// evicts its existing copy, then is re-admitted with probability 2^-level.
// The estimate is |buffer| * 2^level.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cvmcov/rng.hpp"
#include "cvmcov/sampler.hpp"

namespace cvmcov {

template <typename Label, typename Hash = std::hash<Label>>
class BasicDistinctCounter {
 public:
  BasicDistinctCounter(std::size_t capacity, std::uint64_t seed)
      : capacity_(capacity), coins_(seed) {
    validate(SamplerConfig{capacity, seed});
  }

  void observe(const Label& token) {
    if (dead_) throw std::logic_error("distinct counter is no longer live");
    const std::uint64_t position = observed_++;
    if (auto it = index_.find(token); it != index_.end()) erase_at(it->second);
    if (coins_.all_heads(level_)) {
      index_.emplace(token, buffer_.size());
      buffer_.push_back(token);
    }
    if (buffer_.size() == capacity_) halve(position);
  }

  template <typename Range>
  void observe_all(Range&& tokens) {
    for (auto&& token : tokens) observe(Label(token));
  }

  /// |buffer| * 2^level as a double (exact while it fits the mantissa).
  double estimate() const noexcept {
    return std::ldexp(static_cast<double>(buffer_.size()), static_cast<int>(level_));
  }

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return buffer_.size(); }
  std::uint64_t level() const noexcept { return level_; }
  std::uint64_t observed() const noexcept { return observed_; }
  bool dead() const noexcept { return dead_; }
  bool contains(const Label& token) const { return index_.contains(token); }
  std::span<const Label> entries() const noexcept { return buffer_; }

 private:
  void erase_at(std::size_t slot) {
    index_.erase(buffer_[slot]);
    if (slot + 1 != buffer_.size()) {
      buffer_[slot] = std::move(buffer_.back());
      index_[buffer_[slot]] = slot;
    }
    buffer_.pop_back();
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
    index_.clear();
    for (std::size_t i = 0; i < buffer_.size(); ++i) index_.emplace(buffer_[i], i);
    ++level_;
    if (kept == capacity_) {
      dead_ = true;
      throw RetentionFailure(position, capacity_, level_);
    }
  }

  std::size_t capacity_;
  CoinSource coins_;
  std::vector<Label> buffer_;
  std::unordered_map<Label, std::size_t, Hash> index_;
  std::uint64_t level_ = 0;
  std::uint64_t observed_ = 0;
  bool dead_ = false;
};

using DistinctCounter = BasicDistinctCounter<StreamToken>;

}  // namespace cvmcov
