#pragma once

// Good's singleton coverage estimate and the exact true-coverage oracle.

#include <cstddef>
#include <cstdint>
#include <ranges>
#include <span>
#include <stdexcept>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "cvmcov/sampler.hpp"

namespace cvmcov {

enum class DenominatorPolicy {
  RealizedSize,  // 1 - s/r
  Capacity,      // 1 - s/n, the literal output line of the streaming procedure
};

std::string_view to_string(DenominatorPolicy policy) noexcept;
/// Accepts "realized" and "capacity".
DenominatorPolicy parse_denominator_policy(std::string_view text);

struct CoverageEstimate {
  std::uint64_t singletons = 0;
  std::uint64_t denominator = 1;
  double estimate = 0.0;
  DenominatorPolicy policy = DenominatorPolicy::RealizedSize;
};

struct TrueCoverage {
  std::uint64_t covered_count = 0;
  std::uint64_t stream_length = 0;
  double value = 0.0;
};

class EmptySample : public std::runtime_error {
 public:
  EmptySample() : std::runtime_error("sample is empty; coverage is undefined for r = 0") {}
};

/// Number of labels whose multiplicity in `tokens` is exactly one.
template <std::ranges::sized_range Range>
std::uint64_t count_singletons(const Range& tokens) {
  using Label = std::ranges::range_value_t<Range>;
  std::unordered_map<Label, std::uint64_t> histogram;
  histogram.reserve(tokens.size());
  for (const auto& t : tokens) ++histogram[t];
  std::uint64_t s = 0;
  for (const auto& [label, count] : histogram) s += (count == 1);
  return s;
}

template <typename Label>
std::uint64_t count_singletons(const BasicSampleResult<Label>& sample) {
  return count_singletons(sample.tokens);
}

CoverageEstimate make_coverage_estimate(std::uint64_t singletons, std::uint64_t realized_size,
                                        std::uint64_t capacity, DenominatorPolicy policy);

template <typename Label>
CoverageEstimate estimate_coverage(const BasicSampleResult<Label>& sample,
                                   DenominatorPolicy policy = DenominatorPolicy::RealizedSize) {
  return make_coverage_estimate(count_singletons(sample), sample.realized_size, sample.capacity,
                                policy);
}

/// Second-pass scan: counts stream positions whose label occurs in the
/// sample, ignoring multiplicity in the sample.
template <typename Label>
class CoverageScanner {
 public:
  explicit CoverageScanner(std::span<const Label> sample_tokens)
      : labels_(sample_tokens.begin(), sample_tokens.end()) {}
  explicit CoverageScanner(const BasicSampleResult<Label>& sample)
      : CoverageScanner(std::span<const Label>(sample.tokens)) {}

  void scan(const Label& token) {
    ++length_;
    covered_ += labels_.contains(token);
  }

  /// Throws std::invalid_argument if nothing was scanned.
  TrueCoverage result() const {
    if (length_ == 0) throw std::invalid_argument("true coverage needs a non-empty stream");
    return TrueCoverage{covered_, length_,
                        static_cast<double>(covered_) / static_cast<double>(length_)};
  }

 private:
  std::unordered_set<Label> labels_;
  std::uint64_t covered_ = 0;
  std::uint64_t length_ = 0;
};

template <std::ranges::range Range, typename Label>
TrueCoverage true_coverage(const Range& stream, const BasicSampleResult<Label>& sample) {
  CoverageScanner<Label> scanner(sample);
  for (const auto& token : stream) scanner.scan(token);
  return scanner.result();
}

}  // namespace cvmcov
